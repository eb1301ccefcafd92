//! Success-probability estimation, runs-to-solution and summary statistics.
//!
//! Unsolved quantities are carried as `f64::INFINITY` so that they sort after
//! every solved value.

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{input, Error, Result};
use crate::rng::Seed;

/// Target probability of seeing the ground state at least once.
pub const TTS_TARGET: f64 = 0.99;

/// Successes per gauge, all gauges with the same number of readouts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeCounts {
    pub successes: Vec<u64>,
    pub reads: u64,
}

impl GaugeCounts {
    pub fn new(successes: Vec<u64>, reads: u64) -> Result<Self> {
        if successes.is_empty() || reads == 0 {
            return input("need at least one gauge with at least one readout");
        }
        if let Some(&s) = successes.iter().find(|&&s| s > reads) {
            return input(format!("{s} successes exceed {reads} readouts"));
        }
        Ok(Self { successes, reads })
    }

    pub fn gauges(&self) -> usize {
        self.successes.len()
    }

    /// Pooled fraction of successful readouts.
    pub fn empirical_rate(&self) -> f64 {
        self.successes.iter().sum::<u64>() as f64 / (self.reads * self.successes.len() as u64) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub mu: f64,
    pub sigma: f64,
    pub chaoticity: f64,
    pub mu_ci: (f64, f64),
    pub sigma_ci: (f64, f64),
    pub chaoticity_ci: (f64, f64),
    pub n_resamples: usize,
}

/// Bayesian bootstrap of the mean success probability across gauges and its
/// gauge-to-gauge spread.
pub fn bootstrap_success(counts: &GaugeCounts, n_resamples: usize, seed: Seed) -> Result<SuccessEstimate> {
    bootstrap_success_with(counts, n_resamples, seed, |b| b)
}

/// As [`bootstrap_success`], mapping each per-gauge posterior draw through
/// `transform` first (e.g. the repetition-baseline formula).
pub fn bootstrap_success_with(
    counts: &GaugeCounts,
    n_resamples: usize,
    seed: Seed,
    transform: impl Fn(f64) -> f64,
) -> Result<SuccessEstimate> {
    if counts.successes.is_empty() || counts.reads == 0 {
        return input("need at least one gauge with at least one readout");
    }
    if n_resamples < 1000 {
        return input(format!("at least 1000 resamples required, got {n_resamples}"));
    }
    let m = counts.reads as f64;
    let posteriors: Vec<Beta<f64>> = counts
        .successes
        .iter()
        .map(|&s| Beta::new(s as f64 + 1.0, m - s as f64 + 1.0).expect("positive shape"))
        .collect();
    let g = posteriors.len();
    let mut rng = seed.rng();
    let mut mus = Vec::with_capacity(n_resamples);
    let mut sigmas = Vec::with_capacity(n_resamples);
    let mut chaos = Vec::with_capacity(n_resamples);
    let mut b = vec![0.0; g];
    let mut d = vec![0.0; g];
    for _ in 0..n_resamples {
        for (bi, post) in b.iter_mut().zip(&posteriors) {
            *bi = transform(post.sample(&mut rng));
        }
        dirichlet_uniform(&mut d, &mut rng);
        let mu: f64 = d.iter().zip(&b).map(|(di, bi)| di * bi).sum();
        let var: f64 = d.iter().zip(&b).map(|(di, bi)| di * (bi - mu).powi(2)).sum();
        let sigma = var.max(0.0).sqrt();
        mus.push(mu);
        sigmas.push(sigma);
        chaos.push(if mu > 0.0 { sigma / mu } else { 0.0 });
    }
    Ok(SuccessEstimate {
        mu: mean(&mus),
        sigma: mean(&sigmas),
        chaoticity: mean(&chaos),
        mu_ci: central_interval(&mut mus),
        sigma_ci: central_interval(&mut sigmas),
        chaoticity_ci: central_interval(&mut chaos),
        n_resamples,
    })
}

fn dirichlet_uniform<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    if out.len() == 1 {
        out[0] = 1.0;
        return;
    }
    let mut total = 0.0;
    for x in out.iter_mut() {
        *x = Exp1.sample(rng);
        total += *x;
    }
    for x in out.iter_mut() {
        *x /= total;
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Rank-based quantile of sorted data: the element at `round(q (n - 1))`.
fn rank_quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

fn central_interval(v: &mut [f64]) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    (rank_quantile(v, 0.025), rank_quantile(v, 0.975))
}

/// Runs needed to see the ground state at least once with 99% probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtsResult {
    /// `None` when the ground state was never found.
    pub runs: Option<u64>,
    pub p_g: f64,
}

impl TtsResult {
    /// Runs as a float, `+inf` when unsolved.
    pub fn as_f64(&self) -> f64 {
        self.runs.map_or(f64::INFINITY, |r| r as f64)
    }
}

pub fn tts(p_g: f64) -> TtsResult {
    let runs = if !(p_g > 0.0) {
        None
    } else if p_g >= TTS_TARGET {
        Some(1)
    } else {
        let x = (1.0 - TTS_TARGET).ln() / (1.0 - p_g).ln();
        // guard against ln round-off pushing an exact integer over the ceiling
        Some(((x * (1.0 - 1e-12)).ceil() as u64).max(1))
    };
    TtsResult { runs, p_g }
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return input("pearson needs two sequences of equal length >= 2");
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (ties share the mean rank), 1-based.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation and its two-sided p-value (t approximation).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rho = pearson(&ranks(x), &ranks(y))?;
    let n = x.len() as f64;
    if n < 3.0 {
        return Ok((rho, 1.0));
    }
    if rho.abs() >= 1.0 {
        return Ok((rho, 0.0));
    }
    let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).expect("n > 2");
    Ok((rho, 2.0 * (1.0 - dist.cdf(t.abs()))))
}

/// Median with `+inf` for unsolved entries; the mean of the two middle values
/// for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return input("median of an empty set");
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 || v[n / 2].is_infinite() {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Median and a 95% central interval from an ordinary bootstrap over entries.
pub fn median_ci(values: &[f64], n_resamples: usize, seed: Seed) -> Result<(f64, (f64, f64))> {
    let m = median(values)?;
    if n_resamples == 0 {
        return input("median_ci needs at least one resample");
    }
    let mut rng = seed.rng();
    let mut meds = Vec::with_capacity(n_resamples);
    let mut buf = vec![0.0; values.len()];
    for _ in 0..n_resamples {
        for x in buf.iter_mut() {
            *x = values[rng.random_range(0..values.len())];
        }
        meds.push(median(&buf)?);
    }
    Ok((m, central_interval(&mut meds)))
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return input("percentile of an empty set");
    }
    if !(0.0..=100.0).contains(&p) {
        return input(format!("percentile {p} outside [0, 100]"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Ok(v[rank.min(v.len()) - 1])
}

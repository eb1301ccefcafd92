//! Trial scaling forms for runs-to-solution, least-squares data collapse,
//! exponent bounds and the classical dynamic-programming reference curve.
//!
//! All fits work on `log10 R`. Parameter vectors are laid out as
//! `[a, b, c, d]` for `g1` and `[a, b, c, d, e]` for `g2` and the `g3` family.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::rng::Seed;
use crate::simplex::{minimize, SimplexOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormKind {
    /// `a (eta^2 + b^2)^c L^d`
    G1,
    /// `g1 + log10(e)`
    G2,
    /// `a L + c (eta^2 + b^2)^(1/2) L^2 + log10(e L^2)`
    G3a,
    /// `a L + c (eta^2 + b^2)^d L^2 + log10(e L^2)`
    G3b,
    /// `a L + c (eta^2 + b^2)^(1/2) L^d + log10(e L^2)`
    G3c,
}

impl FormKind {
    pub const ALL: [FormKind; 5] = [FormKind::G1, FormKind::G2, FormKind::G3a, FormKind::G3b, FormKind::G3c];

    pub fn n_params(self) -> usize {
        match self {
            FormKind::G1 => 4,
            _ => 5,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            FormKind::G1 => "g1",
            FormKind::G2 => "g2",
            FormKind::G3a => "g3a",
            FormKind::G3b => "g3b",
            FormKind::G3c => "g3c",
        }
    }

    fn is_g3(self) -> bool {
        matches!(self, FormKind::G3a | FormKind::G3b | FormKind::G3c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    Raw,
    /// Every fitted parameter enters the form squared.
    Squared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialForm {
    pub kind: FormKind,
    /// Effective parameters, i.e. after squaring when applicable.
    pub params: Vec<f64>,
}

impl TrialForm {
    pub fn new(kind: FormKind, params: Vec<f64>) -> Result<Self> {
        if params.len() != kind.n_params() {
            return input(format!(
                "{} takes {} parameters, got {}",
                kind.id(),
                kind.n_params(),
                params.len()
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return input("non-finite trial parameter");
        }
        Ok(Self { kind, params })
    }

    pub fn log10_tts(&self, l: f64, eta: f64) -> Result<f64> {
        if !(l > 0.0) || !(eta >= 0.0) {
            return input(format!("trial form needs L > 0 and eta >= 0 (L={l}, eta={eta})"));
        }
        Ok(log10_form(self.kind, &self.params, l, eta))
    }

    /// `10^g(L, eta)`.
    pub fn eval(&self, l: f64, eta: f64) -> Result<f64> {
        Ok(10f64.powf(self.log10_tts(l, eta)?))
    }
}

fn log10_form(kind: FormKind, p: &[f64], l: f64, eta: f64) -> f64 {
    let base = eta * eta + p[1] * p[1];
    match kind {
        FormKind::G1 => p[0] * base.powf(p[2]) * l.powf(p[3]),
        FormKind::G2 => p[0] * base.powf(p[2]) * l.powf(p[3]) + p[4].log10(),
        FormKind::G3a | FormKind::G3b | FormKind::G3c => {
            let (d1, d2) = match kind {
                FormKind::G3a => (0.5, 2.0),
                FormKind::G3b => (p[3], 2.0),
                _ => (0.5, p[3]),
            };
            p[0] * l + p[2] * base.powf(d1) * l.powf(d2) + (p[4] * l * l).log10()
        }
    }
}

/// One median runs-to-solution observation. `runs` is `+inf` when unsolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub l: f64,
    pub eta: f64,
    pub runs: f64,
    /// Effective size from the actual logical coupler count, if known.
    pub l_eff: Option<f64>,
}

impl DataPoint {
    pub fn new(l: f64, eta: f64, runs: f64) -> Self {
        Self { l, eta, runs, l_eff: None }
    }

    fn size(&self, effective: bool) -> f64 {
        if effective {
            self.l_eff.unwrap_or(self.l)
        } else {
            self.l
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub positivity: Positivity,
    pub restarts: usize,
    pub seed: u64,
    pub effective_l: bool,
    pub max_evals: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            positivity: Positivity::Squared,
            restarts: 32,
            seed: 0,
            effective_l: false,
            max_evals: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DBounds {
    pub d_minus: f64,
    pub d_plus: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
}

impl DBounds {
    /// `[d_- - Δd_-, d_+ + Δd_+]`.
    pub fn range(&self) -> (f64, f64) {
        (self.d_minus - self.delta_minus, self.d_plus + self.delta_plus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub form: TrialForm,
    pub positivity: Positivity,
    pub effective_l: bool,
    /// Sum of squared `log10` errors.
    pub residual: f64,
    pub n_points: usize,
    pub restart_index: usize,
    pub d_bounds: Option<DBounds>,
}

impl ScalingFit {
    pub fn d(&self) -> f64 {
        self.form.params[3]
    }

    pub fn predict_log10(&self, l: f64, eta: f64) -> f64 {
        log10_form(self.form.kind, &self.form.params, l, eta)
    }

    /// Plain-text fit report.
    pub fn report(&self, data: &[DataPoint]) -> String {
        let names = ["a", "b", "c", "d", "e"];
        let mut out = String::new();
        let _ = writeln!(out, "form={}", self.form.kind.id());
        let _ = writeln!(
            out,
            "positivity={}",
            match self.positivity {
                Positivity::Raw => "raw",
                Positivity::Squared => "squared",
            }
        );
        let _ = writeln!(out, "size={}", if self.effective_l { "effective" } else { "raw" });
        for (n, v) in names.iter().zip(&self.form.params) {
            let _ = writeln!(out, "{n}={v}");
        }
        let _ = writeln!(out, "residual={}", self.residual);
        let _ = writeln!(out, "points={}", self.n_points);
        if let Some(b) = &self.d_bounds {
            let (lo, hi) = b.range();
            let _ = writeln!(out, "d_minus={} delta_minus={}", b.d_minus, b.delta_minus);
            let _ = writeln!(out, "d_plus={} delta_plus={}", b.d_plus, b.delta_plus);
            let _ = writeln!(out, "d_range=[{lo}, {hi}]");
        }
        let _ = writeln!(out, "data_digest={}", data_digest(data));
        out
    }
}

/// FNV-1a digest of the data rows in the order given.
pub fn data_digest(data: &[DataPoint]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in data {
        for x in [p.l, p.eta, p.runs, p.l_eff.unwrap_or(f64::NAN)] {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}

fn usable(data: &[DataPoint]) -> Vec<DataPoint> {
    data.iter()
        .copied()
        .filter(|p| p.runs.is_finite() && p.runs > 0.0 && p.l > 0.0)
        .collect()
}

fn sse(kind: FormKind, params: &[f64], data: &[DataPoint], effective: bool) -> f64 {
    data.iter()
        .map(|p| (p.runs.log10() - log10_form(kind, params, p.size(effective), p.eta)).powi(2))
        .sum()
}

fn effective_params(raw: &[f64], positivity: Positivity) -> Vec<f64> {
    match positivity {
        Positivity::Raw => raw.to_vec(),
        Positivity::Squared => raw.iter().map(|v| v * v).collect(),
    }
}

/// Starting point drawn from broad, form-appropriate ranges.
fn initial_point<R: Rng + ?Sized>(kind: FormKind, rng: &mut R) -> Vec<f64> {
    let log_uniform = |rng: &mut R, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    let mut p = vec![
        log_uniform(rng, 0.01, 10.0),
        rng.random_range(0.01..0.5),
        rng.random_range(0.1..3.0),
        rng.random_range(0.5..3.0),
    ];
    if kind.n_params() == 5 {
        p.push(log_uniform(rng, 0.1, 10.0));
    }
    if kind.is_g3() {
        p[0] = rng.random_range(0.0..1.0);
        p[2] = log_uniform(rng, 0.01, 10.0);
    }
    p
}

/// Least-squares collapse of `log10 R` onto a trial form, best of seeded
/// simplex restarts (each restart is polished once from its own optimum).
pub fn fit_collapse(data: &[DataPoint], kind: FormKind, opts: &FitOptions) -> Result<ScalingFit> {
    let pts = usable(data);
    let k = kind.n_params();
    if pts.len() < k + 2 {
        return Err(Error::Input(format!(
            "insufficient data: {} usable points for {} parameters",
            pts.len(),
            k
        )));
    }
    let objective = |raw: &[f64]| sse(kind, &effective_params(raw, opts.positivity), &pts, opts.effective_l);
    let simplex = SimplexOptions {
        max_evals: opts.max_evals,
        ..SimplexOptions::default()
    };
    let mut rng = Seed(opts.seed).child("collapse", kind as u64).rng();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut rejected = 0;
    for restart in 0..opts.restarts.max(1) {
        let start = initial_point(kind, &mut rng);
        let x0: Vec<f64> = match opts.positivity {
            Positivity::Raw => start,
            Positivity::Squared => start.iter().map(|v| v.abs().sqrt()).collect(),
        };
        let scale: Vec<f64> = x0.iter().map(|v| 0.25 * v.abs().max(0.05)).collect();
        let first = minimize(&objective, &x0, &scale, simplex);
        let scale: Vec<f64> = first.x.iter().map(|v| 0.05 * v.abs().max(0.01)).collect();
        let polished = minimize(&objective, &first.x, &scale, simplex);
        let r = if polished.f <= first.f { polished } else { first };
        let params = effective_params(&r.x, opts.positivity);
        if kind.is_g3() && params[0] < 0.0 {
            rejected += 1;
            continue;
        }
        if !r.f.is_finite() || r.f == f64::MAX {
            continue;
        }
        if best.as_ref().is_none_or(|(f, _, _)| r.f < *f) {
            best = Some((r.f, restart, params));
        }
    }
    let Some((residual, restart_index, params)) = best else {
        return Err(Error::FitFailure(format!(
            "{}: no acceptable optimum after {} restarts ({} rejected for a < 0)",
            kind.id(),
            opts.restarts,
            rejected
        )));
    };
    Ok(ScalingFit {
        form: TrialForm::new(kind, params)?,
        positivity: opts.positivity,
        effective_l: opts.effective_l,
        residual,
        n_points: pts.len(),
        restart_index,
        d_bounds: None,
    })
}

/// `log10` of the `g1` form with `a, b, c` fixed and exponent `d`.
fn g1_with_d(abc: &[f64], d: f64, l: f64, eta: f64) -> f64 {
    abc[0] * (eta * eta + abc[1] * abc[1]).powf(abc[2]) * l.powf(d)
}

const D_LO: f64 = 0.0;
const D_HI: f64 = 6.0;

/// One-dimensional least squares in `d`: grid scan then golden-section refinement.
fn fit_d_only(abc: &[f64], data: &[DataPoint], effective: bool) -> f64 {
    let f = |d: f64| -> f64 {
        data.iter()
            .map(|p| (p.runs.log10() - g1_with_d(abc, d, p.size(effective), p.eta)).powi(2))
            .sum()
    };
    let steps = 600;
    let h = (D_HI - D_LO) / steps as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..=steps {
        let v = f(D_LO + i as f64 * h);
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut lo = D_LO + (best.0 as f64 - 1.0).max(0.0) * h;
    let mut hi = D_LO + (best.0 as f64 + 1.0).min(steps as f64) * h;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub l: f64,
    pub eta: f64,
    pub runs_lower: f64,
    pub runs_upper: f64,
    pub l_eff: Option<f64>,
}

/// Refits only the exponent against the lower and upper confidence series of
/// the medians, keeping `a, b, c` from `median_fit`. The uncertainty of each
/// exponent comes from a bootstrap over data points.
pub fn fit_d_bounds(data: &[BoundPoint], median_fit: &ScalingFit, n_resamples: usize, seed: Seed) -> Result<DBounds> {
    if median_fit.form.kind != FormKind::G1 {
        return input("exponent bounds are defined for the g1 form");
    }
    let abc = &median_fit.form.params[..3];
    let effective = median_fit.effective_l;
    let series = |upper: bool| -> Vec<DataPoint> {
        usable(
            &data
                .iter()
                .map(|b| DataPoint {
                    l: b.l,
                    eta: b.eta,
                    runs: if upper { b.runs_upper } else { b.runs_lower },
                    l_eff: b.l_eff,
                })
                .collect::<Vec<_>>(),
        )
    };
    let lower = series(false);
    let upper = series(true);
    if lower.len() < 3 || upper.len() < 3 {
        return Err(Error::Input(format!(
            "insufficient data: {} lower and {} upper points",
            lower.len(),
            upper.len()
        )));
    }
    let d_minus = fit_d_only(abc, &lower, effective);
    let d_plus = fit_d_only(abc, &upper, effective);
    let mut rng = seed.rng();
    let boot = |pts: &[DataPoint], rng: &mut crate::rng::LabRng| -> Vec<f64> {
        let mut out = Vec::with_capacity(n_resamples);
        let mut buf = Vec::with_capacity(pts.len());
        for _ in 0..n_resamples {
            buf.clear();
            for _ in 0..pts.len() {
                buf.push(pts[rng.random_range(0..pts.len())]);
            }
            out.push(fit_d_only(abc, &buf, effective));
        }
        out.sort_by(f64::total_cmp);
        out
    };
    let (delta_minus, delta_plus) = if n_resamples == 0 {
        (0.0, 0.0)
    } else {
        let bl = boot(&lower, &mut rng);
        let bu = boot(&upper, &mut rng);
        let q = |v: &[f64], p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        ((d_minus - q(&bl, 0.025)).max(0.0), (q(&bu, 0.975) - d_plus).max(0.0))
    };
    Ok(DBounds {
        d_minus,
        d_plus,
        delta_minus,
        delta_plus,
    })
}

/// Worst-case classical cost of finding the intended ground state by exact
/// dynamic programming under noise: `log10(L^2 2^{4L}) + 8 eta^alpha L^2 log10(e)`.
pub fn classical_bound(l: f64, eta: f64, alpha: f64) -> f64 {
    (l * l).log10() + 4.0 * l * 2f64.log10() + 8.0 * eta.powf(alpha) * l * l * std::f64::consts::LOG10_E
}

/// Random guessing over the `N = 8 L^2` physical spins under the same noise
/// penalty: `N log10(2) + 8 eta^alpha L^2 log10(e)`.
pub fn random_guess_bound(l: f64, eta: f64, alpha: f64) -> f64 {
    8.0 * l * l * 2f64.log10() + 8.0 * eta.powf(alpha) * l * l * std::f64::consts::LOG10_E
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupSeries {
    /// `(L, eta, R_C / R_QAC)`
    pub points: Vec<(f64, f64, f64)>,
    /// Matched keys dropped because either side was unsolved.
    pub omitted: usize,
}

/// Elementwise `R_C / R_QAC` over matching `(L, eta)` keys.
pub fn speedup_ratio(c: &[(f64, f64, f64)], qac: &[(f64, f64, f64)]) -> Result<SpeedupSeries> {
    let mut points = Vec::new();
    let mut omitted = 0;
    let mut matched = 0;
    for &(l, eta, rc) in c {
        let Some(&(_, _, rq)) = qac.iter().find(|q| q.0 == l && q.1 == eta) else {
            continue;
        };
        matched += 1;
        if rc.is_finite() && rq.is_finite() && rq > 0.0 {
            points.push((l, eta, rc / rq));
        } else {
            omitted += 1;
        }
    }
    if matched == 0 {
        return input("no overlapping (L, eta) keys between the two series");
    }
    Ok(SpeedupSeries { points, omitted })
}

#[cfg(test)]
mod tests {
    use super::*;

    const QAC_ROW: [f64; 4] = [0.392, 0.069, 0.486, 1.73];
    const C_ROW: [f64; 4] = [8.01, 0.134, 1.61, 2.12];
    const ETAS: [f64; 6] = [0.0, 0.03, 0.05, 0.07, 0.10, 0.15];

    fn planted(row: [f64; 4], sizes: std::ops::RangeInclusive<usize>) -> Vec<DataPoint> {
        let f = TrialForm::new(FormKind::G1, row.to_vec()).unwrap();
        let mut out = Vec::new();
        for l in sizes {
            for &eta in &ETAS {
                out.push(DataPoint::new(l as f64, eta, f.eval(l as f64, eta).unwrap()));
            }
        }
        out
    }

    #[test]
    fn g1_table_row_at_unit_size() {
        let f = TrialForm::new(FormKind::G1, C_ROW.to_vec()).unwrap();
        let g = f.log10_tts(1.0, 0.0).unwrap();
        let expect = 8.01 * (0.134f64 * 0.134).powf(1.61);
        assert!((g - expect).abs() < 1e-15);
        // 0.017956^1.61 = 0.0015462
        assert!((g - 0.012385).abs() < 1e-6, "{g}");
    }

    #[test]
    fn zero_amplitude_is_one_run() {
        let f = TrialForm::new(FormKind::G1, vec![0.0, 0.1, 1.0, 2.0]).unwrap();
        for l in [1.0, 5.0, 16.0] {
            assert_eq!(f.eval(l, 0.1).unwrap(), 1.0);
        }
    }

    #[test]
    fn form_validation() {
        assert!(TrialForm::new(FormKind::G1, vec![1.0, f64::NAN, 1.0, 1.0]).is_err());
        assert!(TrialForm::new(FormKind::G2, vec![1.0; 4]).is_err());
        let f = TrialForm::new(FormKind::G1, QAC_ROW.to_vec()).unwrap();
        assert!(f.eval(0.0, 0.1).is_err());
        assert!(f.eval(2.0, -0.1).is_err());
    }

    #[test]
    fn g2_and_g3_shapes() {
        let g2 = TrialForm::new(FormKind::G2, vec![0.5, 0.1, 1.0, 2.0, 10.0]).unwrap();
        let g1 = TrialForm::new(FormKind::G1, vec![0.5, 0.1, 1.0, 2.0]).unwrap();
        assert!((g2.log10_tts(3.0, 0.1).unwrap() - g1.log10_tts(3.0, 0.1).unwrap() - 1.0).abs() < 1e-12);
        let g3 = TrialForm::new(FormKind::G3a, vec![0.1, 0.1, 0.2, 9.9, 1.0]).unwrap();
        let expect = 0.1 * 3.0 + 0.2 * (0.01f64 + 0.01).sqrt() * 9.0 + 9f64.log10();
        assert!((g3.log10_tts(3.0, 0.1).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn noiseless_recovery() {
        let data = planted(QAC_ROW, 2..=16);
        let fit = fit_collapse(&data, FormKind::G1, &FitOptions::default()).unwrap();
        assert!((fit.d() - 1.73).abs() < 1e-4, "d = {}", fit.d());
        assert!(fit.residual < 1e-8, "residual {}", fit.residual);
        assert!(fit.form.params.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn permutation_invariance() {
        let data = planted(C_ROW, 2..=12);
        let mut rev = data.clone();
        rev.reverse();
        let opts = FitOptions {
            restarts: 8,
            ..FitOptions::default()
        };
        let a = fit_collapse(&data, FormKind::G1, &opts).unwrap();
        let b = fit_collapse(&rev, FormKind::G1, &opts).unwrap();
        assert!((a.d() - b.d()).abs() < 1e-6);
        assert_eq!(fit_collapse(&data, FormKind::G1, &opts).unwrap(), a);
    }

    #[test]
    fn insufficient_data() {
        let data = vec![DataPoint::new(2.0, 0.1, 10.0)];
        assert!(matches!(fit_collapse(&data, FormKind::G1, &FitOptions::default()), Err(Error::Input(_))));
        let mut data = planted(QAC_ROW, 2..=2);
        for p in data.iter_mut().skip(1) {
            p.runs = f64::INFINITY;
        }
        assert!(fit_collapse(&data, FormKind::G1, &FitOptions::default()).is_err());
    }

    fn bounds_from(data: &[DataPoint], lo: f64, hi: f64) -> Vec<BoundPoint> {
        data.iter()
            .map(|p| BoundPoint {
                l: p.l,
                eta: p.eta,
                runs_lower: 10f64.powf(p.runs.log10() * lo),
                runs_upper: 10f64.powf(p.runs.log10() * hi),
                l_eff: None,
            })
            .collect()
    }

    #[test]
    fn identical_bounds_reproduce_median_exponent() {
        let data = planted(QAC_ROW, 2..=16);
        let fit = fit_collapse(&data, FormKind::G1, &FitOptions::default()).unwrap();
        let b = fit_d_bounds(&bounds_from(&data, 1.0, 1.0), &fit, 0, Seed(0)).unwrap();
        assert!((b.d_minus - fit.d()).abs() < 1e-6);
        assert!((b.d_plus - fit.d()).abs() < 1e-6);
    }

    #[test]
    fn widened_bounds_bracket_exponent() {
        let data = planted(C_ROW, 2..=12);
        let fit = fit_collapse(&data, FormKind::G1, &FitOptions::default()).unwrap();
        let b = fit_d_bounds(&bounds_from(&data, 0.9, 1.1), &fit, 200, Seed(1)).unwrap();
        assert!(b.d_minus < fit.d() && fit.d() < b.d_plus, "{b:?}");
        let (lo, hi) = b.range();
        assert!(lo <= b.d_minus && hi >= b.d_plus);
    }

    #[test]
    fn classical_curves() {
        assert!((classical_bound(2.0, 0.0, 1.0) - 1024f64.log10()).abs() < 1e-12);
        assert!((classical_bound(1.0, 0.0, 1.0) - 16f64.log10()).abs() < 1e-12);
        let mut prev = classical_bound(4.0, 0.0, 0.5);
        for k in 1..=20 {
            let v = classical_bound(4.0, k as f64 * 0.01, 0.5);
            assert!(v >= prev);
            prev = v;
        }
        let rand_gap = random_guess_bound(3.0, 0.1, 1.0) - (classical_bound(3.0, 0.1, 1.0) - (9f64).log10() - 12.0 * 2f64.log10());
        assert!((rand_gap - 72.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn speedup_examples() {
        let c = vec![(2.0, 0.1, 100.0), (3.0, 0.1, 50.0), (4.0, 0.1, f64::INFINITY)];
        let q = vec![(2.0, 0.1, 10.0), (3.0, 0.1, 50.0), (4.0, 0.1, 9.0)];
        let s = speedup_ratio(&c, &q).unwrap();
        assert_eq!(s.points, vec![(2.0, 0.1, 10.0), (3.0, 0.1, 1.0)]);
        assert_eq!(s.omitted, 1);
        assert!(speedup_ratio(&c, &[(9.0, 0.0, 1.0)]).is_err());
    }
}

//! `analyze`: per-instance success estimates and the aggregate tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use jchaos_core::qac::{c_strategy_success, optimal_penalty, PenaltyChoice, C_COPIES};
use jchaos_core::rng::eta_index;
use jchaos_core::stats::{
    bootstrap_success_with, median, median_ci, pearson, percentile, spearman, tts, GaugeCounts, SuccessEstimate,
};
use jchaos_core::Seed;

use crate::config::ExperimentConfig;
use crate::error::{validation, HResult};
use crate::store::{write_atomic, RunDir, RunRecord, Strategy};

pub const PERCENTILES: [u32; 9] = [10, 20, 30, 40, 50, 60, 70, 80, 90];

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRow {
    pub l: usize,
    pub eta: f64,
    pub instance: usize,
    pub strategy: Strategy,
    /// Penalty strength of the row; for chosen QAC rows the argmax strength.
    pub gamma: Option<f64>,
    /// QAC rows where no strength produced a success.
    pub gamma_fail: bool,
    pub successes: u64,
    pub reads: u64,
    pub gauges: usize,
    /// Pooled success fraction (after the repetition formula for C).
    pub p_hat: f64,
    pub estimate: SuccessEstimate,
    /// Runs to solution from `p_hat`; `+inf` when unsolved.
    pub tts: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Analysis {
    /// C rows and the chosen QAC row per (L, eta, instance).
    pub rows: Vec<InstanceRow>,
    /// Every QAC penalty strength.
    pub by_gamma: Vec<InstanceRow>,
}

/// Prints floats losslessly, with `inf` and `nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

type GroupKey = (usize, usize, u64, Strategy, Option<u64>);

fn estimate(
    cfg: &ExperimentConfig,
    label: &str,
    strategy: Strategy,
    gauges: &[(usize, u64, u64)],
) -> HResult<(GaugeCounts, SuccessEstimate, f64)> {
    let reads = gauges[0].2;
    if gauges.iter().any(|g| g.2 != reads) {
        return validation(format!("{label}: gauges with different read counts"));
    }
    let counts = GaugeCounts::new(gauges.iter().map(|g| g.1).collect(), reads)?;
    let seed = Seed(cfg.seed).child(label, 0);
    let n = cfg.analysis.bootstrap_resamples;
    let (est, p_hat) = match strategy {
        Strategy::C => (
            bootstrap_success_with(&counts, n, seed, |b| c_strategy_success(b, C_COPIES))?,
            c_strategy_success(counts.empirical_rate(), C_COPIES),
        ),
        Strategy::Qac => (bootstrap_success_with(&counts, n, seed, |b| b)?, counts.empirical_rate()),
    };
    Ok((counts, est, p_hat))
}

pub fn compute(cfg: &ExperimentConfig, records: &[RunRecord]) -> HResult<Analysis> {
    if records.is_empty() {
        return validation("run directory has no completed records");
    }
    let mut groups: BTreeMap<GroupKey, Vec<(usize, u64, u64)>> = BTreeMap::new();
    let mut etas: BTreeMap<u64, f64> = BTreeMap::new();
    let mut gammas: BTreeMap<u64, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == "complete") {
        let k = &r.key;
        etas.insert(eta_index(k.eta), k.eta);
        if let Some(g) = k.gamma {
            gammas.insert(eta_index(g), g);
        }
        groups
            .entry((k.l, k.instance, eta_index(k.eta), k.strategy, k.gamma.map(eta_index)))
            .or_default()
            .push((k.gauge, r.successes, r.reads));
    }
    let mut an = Analysis::default();
    let mut qac: BTreeMap<(usize, usize, u64), Vec<InstanceRow>> = BTreeMap::new();
    for ((l, k, ei, strategy, gi), mut gauges) in groups {
        gauges.sort();
        gauges.dedup_by_key(|g| g.0);
        let gamma = gi.map(|g| gammas[&g]);
        let label = format!("L{l}/i{k}/e{ei}/{}/{}", strategy.label(), gi.map_or(-1, |g| g as i64));
        let (counts, est, p_hat) = estimate(cfg, &label, strategy, &gauges)?;
        let row = InstanceRow {
            l,
            eta: etas[&ei],
            instance: k,
            strategy,
            gamma,
            gamma_fail: false,
            successes: counts.successes.iter().sum(),
            reads: counts.reads * counts.gauges() as u64,
            gauges: counts.gauges(),
            p_hat,
            tts: tts(p_hat).as_f64(),
            estimate: est,
        };
        match strategy {
            Strategy::C => an.rows.push(row),
            Strategy::Qac => {
                an.by_gamma.push(row.clone());
                qac.entry((l, k, ei)).or_default().push(row);
            }
        }
    }
    for (_, rows) in qac {
        let choices: Vec<(f64, f64)> = rows.iter().map(|r| (r.gamma.unwrap_or(0.0), r.p_hat)).collect();
        let mut chosen = match optimal_penalty(&choices)? {
            PenaltyChoice::Optimal(g) => rows.iter().find(|r| r.gamma == Some(g)).cloned().expect("chosen strength"),
            PenaltyChoice::Fail => {
                let mut r = rows
                    .iter()
                    .min_by(|a, b| a.gamma.unwrap_or(0.0).total_cmp(&b.gamma.unwrap_or(0.0)))
                    .cloned()
                    .expect("non-empty");
                r.gamma_fail = true;
                r
            }
        };
        chosen.strategy = Strategy::Qac;
        an.rows.push(chosen);
    }
    an.rows.sort_by(|a, b| {
        (a.l, eta_index(a.eta), a.instance, a.strategy).cmp(&(b.l, eta_index(b.eta), b.instance, b.strategy))
    });
    Ok(an)
}

type Cell = (usize, u64, Strategy);

impl Analysis {
    fn cells(&self) -> BTreeMap<Cell, Vec<&InstanceRow>> {
        let mut out: BTreeMap<Cell, Vec<&InstanceRow>> = BTreeMap::new();
        for r in &self.rows {
            out.entry((r.l, eta_index(r.eta), r.strategy)).or_default().push(r);
        }
        out
    }

    fn eta_of(&self, ei: u64) -> f64 {
        self.rows.iter().find(|r| eta_index(r.eta) == ei).map_or(f64::NAN, |r| r.eta)
    }

    /// Median runs-to-solution with a bootstrap interval per (L, eta, strategy).
    pub fn tts_medians(&self, cfg: &ExperimentConfig) -> HResult<Vec<TtsCell>> {
        let mut out = Vec::new();
        for ((l, ei, s), rows) in self.cells() {
            let values: Vec<f64> = rows.iter().map(|r| r.tts).collect();
            let seed = Seed(cfg.seed).child(&format!("median/L{l}/e{ei}/{}", s.label()), 0);
            let (m, (lo, hi)) = median_ci(&values, cfg.analysis.median_resamples, seed)?;
            out.push(TtsCell {
                l,
                eta: self.eta_of(ei),
                strategy: s,
                n: values.len(),
                unsolved: values.iter().filter(|v| v.is_infinite()).count(),
                median: m,
                lo,
                hi,
            });
        }
        Ok(out)
    }

    /// Per (L, eta): QAC vs C comparisons with both-failed instances set aside.
    pub fn comparisons(&self) -> Vec<Comparison> {
        let mut by: BTreeMap<(usize, u64), (Vec<&InstanceRow>, Vec<&InstanceRow>)> = BTreeMap::new();
        for r in &self.rows {
            let e = by.entry((r.l, eta_index(r.eta))).or_default();
            match r.strategy {
                Strategy::C => e.0.push(r),
                Strategy::Qac => e.1.push(r),
            }
        }
        let mut out = Vec::new();
        for ((l, ei), (c, q)) in by {
            let mut cmp = Comparison {
                l,
                eta: self.eta_of(ei),
                ..Default::default()
            };
            for cr in &c {
                let Some(qr) = q.iter().find(|r| r.instance == cr.instance) else {
                    continue;
                };
                cmp.instances += 1;
                if cr.successes == 0 && qr.successes == 0 {
                    cmp.both_failed.push(cr.instance);
                } else if qr.p_hat > cr.p_hat {
                    cmp.qac_better += 1;
                } else if cr.p_hat > qr.p_hat {
                    cmp.c_better += 1;
                } else {
                    cmp.equal += 1;
                }
            }
            out.push(cmp);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtsCell {
    pub l: usize,
    pub eta: f64,
    pub strategy: Strategy,
    pub n: usize,
    pub unsolved: usize,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Comparison {
    pub l: usize,
    pub eta: f64,
    pub instances: usize,
    pub both_failed: Vec<usize>,
    pub qac_better: usize,
    pub c_better: usize,
    pub equal: usize,
}

impl Comparison {
    pub fn compared(&self) -> usize {
        self.instances - self.both_failed.len()
    }

    pub fn fraction_qac_better(&self) -> f64 {
        if self.compared() == 0 {
            f64::NAN
        } else {
            self.qac_better as f64 / self.compared() as f64
        }
    }
}

fn success_header() -> &'static str {
    "L,eta,instance,strategy,gamma,gauges,successes,reads,p_hat,mu,mu_lo,mu_hi,sigma,sigma_lo,sigma_hi,chaoticity,chaoticity_lo,chaoticity_hi,tts\n"
}

fn success_line(out: &mut String, r: &InstanceRow) {
    let e = &r.estimate;
    let gamma = if r.gamma_fail {
        "fail".to_string()
    } else {
        r.gamma.map_or(String::new(), num)
    };
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.l,
        num(r.eta),
        r.instance,
        r.strategy.label(),
        gamma,
        r.gauges,
        r.successes,
        r.reads,
        num(r.p_hat),
        num(e.mu),
        num(e.mu_ci.0),
        num(e.mu_ci.1),
        num(e.sigma),
        num(e.sigma_ci.0),
        num(e.sigma_ci.1),
        num(e.chaoticity),
        num(e.chaoticity_ci.0),
        num(e.chaoticity_ci.1),
        num(r.tts)
    );
}

/// All analysis tables as `(file name, contents)`.
pub fn tables(cfg: &ExperimentConfig, an: &Analysis) -> HResult<Vec<(String, String)>> {
    let mut files = Vec::new();

    let mut s = String::from(success_header());
    for r in &an.rows {
        success_line(&mut s, r);
    }
    files.push(("success.csv".to_string(), s));

    let mut s = String::from(success_header());
    for r in &an.by_gamma {
        success_line(&mut s, r);
    }
    files.push(("success_by_gamma.csv".to_string(), s));

    let mut s = String::from("L,eta,strategy,instances,median_mu,median_p_hat,mean_p_hat\n");
    for ((l, ei, st), rows) in an.cells() {
        let mus: Vec<f64> = rows.iter().map(|r| r.estimate.mu).collect();
        let ps: Vec<f64> = rows.iter().map(|r| r.p_hat).collect();
        let _ = writeln!(
            s,
            "{l},{},{},{},{},{},{}",
            num(an.eta_of(ei)),
            st.label(),
            rows.len(),
            num(median(&mus)?),
            num(median(&ps)?),
            num(ps.iter().sum::<f64>() / ps.len() as f64)
        );
    }
    files.push(("summary.csv".to_string(), s));

    let mut s = String::from("L,eta,strategy,used,excluded_zero_success,pearson,spearman_rho,spearman_p\n");
    for ((l, ei, st), rows) in an.cells() {
        let used: Vec<&&InstanceRow> = rows.iter().filter(|r| r.successes > 0).collect();
        let x: Vec<f64> = used.iter().map(|r| r.estimate.mu).collect();
        let y: Vec<f64> = used.iter().map(|r| r.estimate.chaoticity).collect();
        let p = pearson(&x, &y).unwrap_or(f64::NAN);
        let (rho, pv) = spearman(&x, &y).unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(
            s,
            "{l},{},{},{},{},{},{},{}",
            num(an.eta_of(ei)),
            st.label(),
            used.len(),
            rows.len() - used.len(),
            num(p),
            num(rho),
            num(pv)
        );
    }
    files.push(("correlations.csv".to_string(), s));

    let comps = an.comparisons();
    let mut s = String::from("L,eta,instances,both_failed,compared,qac_better,c_better,equal,fraction_qac_better\n");
    let mut f = String::from("L,eta,instance\n");
    for c in &comps {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.l,
            num(c.eta),
            c.instances,
            c.both_failed.len(),
            c.compared(),
            c.qac_better,
            c.c_better,
            c.equal,
            num(c.fraction_qac_better())
        );
        for i in &c.both_failed {
            let _ = writeln!(f, "{},{},{i}", c.l, num(c.eta));
        }
    }
    files.push(("better_fraction.csv".to_string(), s));
    files.push(("failures.csv".to_string(), f));

    let mut s = String::from("L,eta,strategy,instances,unsolved,median_tts,ci_lo,ci_hi\n");
    for t in an.tts_medians(cfg)? {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            t.l,
            num(t.eta),
            t.strategy.label(),
            t.n,
            t.unsolved,
            num(t.median),
            num(t.lo),
            num(t.hi)
        );
    }
    files.push(("tts.csv".to_string(), s));

    let mut s = String::from("L,eta,strategy,p,tts\n");
    for ((l, ei, st), rows) in an.cells() {
        let v: Vec<f64> = rows.iter().map(|r| r.tts).collect();
        for p in PERCENTILES {
            let _ = writeln!(s, "{l},{},{},{p},{}", num(an.eta_of(ei)), st.label(), num(percentile(&v, p as f64)?));
        }
    }
    files.push(("percentiles.csv".to_string(), s));

    let mut hist: BTreeMap<(usize, u64, String), usize> = BTreeMap::new();
    for r in an.rows.iter().filter(|r| r.strategy == Strategy::Qac) {
        let g = if r.gamma_fail {
            "fail".to_string()
        } else {
            r.gamma.map_or(String::new(), num)
        };
        *hist.entry((r.l, eta_index(r.eta), g)).or_default() += 1;
    }
    let mut s = String::from("L,eta,gamma,count\n");
    for ((l, ei, g), n) in hist {
        let _ = writeln!(s, "{l},{},{g},{n}", num(an.eta_of(ei)));
    }
    files.push(("gamma_opt.csv".to_string(), s));

    Ok(files)
}

pub fn cmd_analyze(cfg: &ExperimentConfig) -> HResult<Vec<PathBuf>> {
    let rd = RunDir::new(&cfg.out);
    let records: Vec<RunRecord> = rd.completed()?.into_values().collect();
    let an = compute(cfg, &records)?;
    let mut written = Vec::new();
    for (name, text) in tables(cfg, &an)? {
        let p = rd.analysis_dir().join(name);
        write_atomic(&p, text.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

//! `collapse`: scaling fits of median runs-to-solution, speedup ratios and the
//! classical reference curves.

use std::fmt::Write as _;
use std::path::PathBuf;

use jchaos_core::chimera::effective_l;
use jchaos_core::collapse::{
    classical_bound, fit_collapse, fit_d_bounds, random_guess_bound, speedup_ratio, BoundPoint, DataPoint,
    FitOptions, FormKind, Positivity, ScalingFit,
};
use jchaos_core::Seed;

use crate::analysis::{compute, num, TtsCell};
use crate::config::ExperimentConfig;
use crate::error::HResult;
use crate::pipeline::build_graphs;
use crate::store::{write_atomic, RunDir, RunRecord, Strategy};

pub struct CollapseOutputs {
    pub files: Vec<(String, String)>,
    pub fits: Vec<(Strategy, bool, HResult<ScalingFit>)>,
}

fn series(cells: &[TtsCell], s: Strategy, l_eff: &dyn Fn(usize) -> f64) -> (Vec<DataPoint>, Vec<BoundPoint>) {
    let mut data = Vec::new();
    let mut bounds = Vec::new();
    for c in cells.iter().filter(|c| c.strategy == s) {
        let le = Some(l_eff(c.l));
        data.push(DataPoint {
            l: c.l as f64,
            eta: c.eta,
            runs: c.median,
            l_eff: le,
        });
        bounds.push(BoundPoint {
            l: c.l as f64,
            eta: c.eta,
            runs_lower: c.lo,
            runs_upper: c.hi,
            l_eff: le,
        });
    }
    (data, bounds)
}

pub fn collapse_outputs(cfg: &ExperimentConfig, records: &[RunRecord]) -> HResult<CollapseOutputs> {
    let an = compute(cfg, records)?;
    let cells = an.tts_medians(cfg)?;
    let graphs = build_graphs(cfg)?;
    let l_eff = |l: usize| graphs.get(&l).map_or(l as f64, |g| effective_l(g.lg.edges().len()));
    let mut files = Vec::new();
    let mut fits = Vec::new();
    let mut forms = String::from("strategy,size,form,status,residual,points,a,b,c,d,e\n");
    let mut points = String::from("strategy,size,L,eta,log10_tts,log10_lo,log10_hi,x,y\n");

    for s in [Strategy::C, Strategy::Qac] {
        let (data, bounds) = series(&cells, s, &l_eff);
        for effective in [false, true] {
            let size = if effective { "effective" } else { "raw" };
            let opts = FitOptions {
                positivity: Positivity::Squared,
                restarts: cfg.analysis.fit_restarts,
                seed: cfg.seed,
                effective_l: effective,
                ..FitOptions::default()
            };
            for kind in FormKind::ALL {
                let label = format!("{},{size},{}", s.label(), kind.id());
                match fit_collapse(&data, kind, &opts) {
                    Ok(f) => {
                        let p: Vec<String> = f.form.params.iter().map(|v| num(*v)).collect();
                        let _ = writeln!(
                            forms,
                            "{label},ok,{},{},{}{}",
                            num(f.residual),
                            f.n_points,
                            p.join(","),
                            if p.len() == 4 { "," } else { "" }
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(forms, "{label},\"{e}\",,,,,,,");
                    }
                }
            }
            let fit = fit_collapse(&data, FormKind::G1, &opts).and_then(|mut f| {
                let seed = Seed(cfg.seed).child(&format!("dbounds/{}/{size}", s.label()), 0);
                f.d_bounds = Some(fit_d_bounds(&bounds, &f, cfg.analysis.d_resamples, seed)?);
                Ok(f)
            });
            let name = format!("fit_{}_{size}.txt", s.label());
            let text = match &fit {
                Ok(f) => {
                    for p in data.iter().filter(|p| p.runs.is_finite()) {
                        let b = bounds
                            .iter()
                            .find(|b| b.l == p.l && b.eta == p.eta)
                            .expect("bound per point");
                        let le = if effective { p.l_eff.unwrap_or(p.l) } else { p.l };
                        let pr = &f.form.params;
                        let x = (p.eta * p.eta + pr[1] * pr[1]).powf(pr[2]) * le.powf(pr[3]);
                        let _ = writeln!(
                            points,
                            "{},{size},{},{},{},{},{},{},{}",
                            s.label(),
                            p.l,
                            num(p.eta),
                            num(p.runs.log10()),
                            num(b.runs_lower.log10()),
                            num(b.runs_upper.log10()),
                            num(x),
                            num(p.runs.log10() / pr[0])
                        );
                    }
                    f.report(&data)
                }
                Err(e) => format!("form=g1\nsize={size}\nerror={e}\n"),
            };
            files.push((name, text));
            fits.push((s, effective, fit.map_err(Into::into)));
        }
    }
    files.push(("forms.csv".into(), forms));
    files.push(("collapse_points.csv".into(), points));

    let key = |s: Strategy| -> Vec<(f64, f64, f64)> {
        cells
            .iter()
            .filter(|c| c.strategy == s)
            .map(|c| (c.l as f64, c.eta, c.median))
            .collect()
    };
    let mut sp = String::from("L,eta,ratio\n");
    match speedup_ratio(&key(Strategy::C), &key(Strategy::Qac)) {
        Ok(r) => {
            for (l, eta, v) in &r.points {
                let _ = writeln!(sp, "{l},{},{}", num(*eta), num(*v));
            }
            let _ = writeln!(sp, "# omitted_unsolved={}", r.omitted);
        }
        Err(e) => {
            let _ = writeln!(sp, "# {e}");
        }
    }
    files.push(("speedup.csv".into(), sp));

    let lmax = cfg.sizes.iter().copied().max().unwrap_or(1).max(16);
    let mut cb = String::from("L,eta,alpha,log10_dp,log10_random\n");
    for l in 1..=lmax {
        for &eta in &cfg.etas {
            let a = cfg.analysis.bound_alpha;
            let _ = writeln!(
                cb,
                "{l},{},{},{},{}",
                num(eta),
                num(a),
                num(classical_bound(l as f64, eta, a)),
                num(random_guess_bound(l as f64, eta, a))
            );
        }
    }
    files.push(("classical_bound.csv".into(), cb));
    files.push(("plot.gp".into(), GNUPLOT.to_string()));
    Ok(CollapseOutputs { files, fits })
}

const GNUPLOT: &str = "\
set datafile separator ','
set logscale x
set xlabel '(eta^2+b^2)^c L^d'
set ylabel 'log10(R)/a'
set key top left
plot 'collapse_points.csv' using (strcol(2) eq 'raw' && strcol(1) eq 'C' ? $8 : 1/0):9 title 'C' with points, \\
     'collapse_points.csv' using (strcol(2) eq 'raw' && strcol(1) eq 'QAC' ? $8 : 1/0):9 title 'QAC' with points, \\
     x title 'collapse' with lines
";

pub fn cmd_collapse(cfg: &ExperimentConfig) -> HResult<Vec<PathBuf>> {
    let rd = RunDir::new(&cfg.out);
    let records: Vec<RunRecord> = rd.completed()?.into_values().collect();
    let out = collapse_outputs(cfg, &records)?;
    let mut written = Vec::new();
    for (name, text) in out.files {
        let p = rd.collapse_dir().join(name);
        write_atomic(&p, text.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

//! `report`: plain-text summary of a run directory.

use std::fmt::Write as _;

use crate::analysis::{compute, num};
use crate::config::ExperimentConfig;
use crate::error::HResult;
use crate::fits::collapse_outputs;
use crate::store::{write_atomic, RunDir, RunRecord, Strategy};

pub fn render(cfg: &ExperimentConfig) -> HResult<String> {
    let rd = RunDir::new(&cfg.out);
    let records: Vec<RunRecord> = rd.completed()?.into_values().collect();
    let an = compute(cfg, &records)?;
    let flagged = rd.read_flagged()?;
    let mut s = String::new();
    let _ = writeln!(s, "run directory: {}", rd.root.display());
    let _ = writeln!(s, "seed: {}", cfg.seed);
    let _ = writeln!(
        s,
        "sizes: {:?}  etas: {:?}  instances: {}  gauges: {}  reads: {}",
        cfg.sizes, cfg.etas, cfg.instances, cfg.gauges, cfg.reads
    );
    let _ = writeln!(s, "records: {}  flagged instances: {}", records.len(), flagged.len());
    let _ = writeln!(s);
    let _ = writeln!(s, "median runs to solution (95% interval)");
    let _ = writeln!(s, "{:>3} {:>6} {:>5} {:>12} {:>26} {:>9}", "L", "eta", "strat", "median", "interval", "unsolved");
    for t in an.tts_medians(cfg)? {
        let _ = writeln!(
            s,
            "{:>3} {:>6} {:>5} {:>12} {:>26} {:>9}",
            t.l,
            num(t.eta),
            t.strategy.label(),
            num(t.median),
            format!("[{}, {}]", num(t.lo), num(t.hi)),
            format!("{}/{}", t.unsolved, t.n)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "fraction of instances where QAC beats C (both-failed removed)");
    for c in an.comparisons() {
        let _ = writeln!(
            s,
            "L={} eta={}: {}/{} = {} (both failed: {})",
            c.l,
            num(c.eta),
            c.qac_better,
            c.compared(),
            num(c.fraction_qac_better()),
            c.both_failed.len()
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "scaling fits, g1");
    let out = collapse_outputs(cfg, &records)?;
    for (strategy, effective, fit) in &out.fits {
        let size = if *effective { "effective L" } else { "L" };
        let name = if *strategy == Strategy::C { "C" } else { "QAC" };
        match fit {
            Ok(f) => {
                let range = f.d_bounds.as_ref().map(|b| b.range()).unwrap_or((f64::NAN, f64::NAN));
                let _ = writeln!(
                    s,
                    "{name:>3} vs {size:<11}: d = {:.3}, d-range [{:.3}, {:.3}], residual {:.3e}",
                    f.d(),
                    range.0,
                    range.1,
                    f.residual
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{name:>3} vs {size:<11}: {e}");
            }
        }
    }
    Ok(s)
}

pub fn cmd_report(cfg: &ExperimentConfig) -> HResult<String> {
    let text = render(cfg)?;
    write_atomic(&RunDir::new(&cfg.out).root.join("report.txt"), text.as_bytes())?;
    Ok(text)
}

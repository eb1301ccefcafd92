use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jchaos_harness::error::{HResult, HarnessError};
use jchaos_harness::store::RunDir;
use jchaos_harness::{analysis, fits, pipeline, report, verify, ExperimentConfig};

/// Noisy-Ising benchmark pipeline: C vs QAC under control noise.
#[derive(Parser)]
#[command(name = "jchaos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML). Defaults to `<out>/config.toml`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results are bit-identical only at 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw intended instances and certify their ground states.
    Generate,
    /// Sample every (instance, eta, strategy, gamma, gauge) batch; resumable.
    Run,
    /// Write success, correlation, comparison and TTS tables.
    Analyze,
    /// Fit scaling forms and write speedup and classical-bound series.
    Collapse,
    /// Recompute a 1% sample of records and compare.
    Verify,
    /// Print a summary of the run.
    Report,
}

fn load_config(cli: &Cli) -> HResult<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.out) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(out)) => {
            let p = RunDir::new(out).config_path();
            if !p.exists() {
                return Err(HarnessError::Dependency(format!(
                    "{} not found; pass --config or run `generate` first",
                    p.display()
                )));
            }
            ExperimentConfig::load(&p)?
        }
        (None, None) => return Err(HarnessError::Validation("pass --config or --out".into())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> HResult<()> {
    let cfg = load_config(cli)?;
    let threads = match cli.threads {
        Some(0) => return Err(HarnessError::Validation("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    match cli.command {
        Command::Generate => {
            let s = pipeline::cmd_generate(&cfg, threads)?;
            println!(
                "generated {} instances in {} ({} flagged, {} certified by PT-ICM only)",
                s.instances,
                cfg.out.display(),
                s.flagged.len(),
                s.pticm_only.len()
            );
        }
        Command::Run => {
            let s = pipeline::cmd_run(&cfg, threads)?;
            println!("{} batches planned, {} already complete, {} run", s.planned, s.skipped, s.executed);
        }
        Command::Analyze => {
            for p in analysis::cmd_analyze(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Collapse => {
            for p in fits::cmd_collapse(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Verify => {
            let s = verify::cmd_verify(&cfg, threads)?;
            println!("verified {} of {} records: all match", s.checked.len(), s.records);
        }
        Command::Report => print!("{}", report::cmd_report(&cfg)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(&e)
        }
    }
}

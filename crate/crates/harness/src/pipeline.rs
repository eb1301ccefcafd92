//! `generate` and `run`: instances, certificates, noise draws and sampling records.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use jchaos_core::chimera::{ChimeraGraph, LogicalGraph};
use jchaos_core::instance::{apply_gauge, generate_instance, ungauge_readout, Gauge, IsingInstance};
use jchaos_core::qac::{decode_majority, encode, sidecar_mapping};
use jchaos_core::rng::eta_index;
use jchaos_core::solvers::{
    adjudicate_success, solve_dp_exact, solve_pticm, solve_sa, CertMethod, DpOptions, GroundCertificate, SampleSet,
};
use jchaos_core::{Error as CoreError, Seed};

use crate::config::ExperimentConfig;
use crate::error::{HResult, HarnessError};
use crate::store::{gzip, instance_name, sha256_hex, write_atomic, NoiseFile, RecordKey, RunDir, RunRecord, Strategy};

/// Hardware and logical graphs for one size.
pub struct SizeGraphs {
    pub cg: ChimeraGraph,
    pub lg: LogicalGraph,
}

pub fn build_graphs(cfg: &ExperimentConfig) -> HResult<BTreeMap<usize, SizeGraphs>> {
    let mut out = BTreeMap::new();
    for &l in &cfg.sizes {
        let cg = match cfg.hole_file(l) {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| HarnessError::Dependency(format!("hole file {}: {e}", p.display())))?;
                let g = ChimeraGraph::from_hole_file(&text)?;
                if g.l() != l || g.r() != 4 {
                    return Err(HarnessError::Validation(format!(
                        "hole file {} describes L={} r={}, expected L={l} r=4",
                        p.display(),
                        g.l(),
                        g.r()
                    )));
                }
                g
            }
            None => ChimeraGraph::hole_free(l, 4)?,
        };
        let lg = LogicalGraph::from_chimera(&cg)?;
        out.insert(l, SizeGraphs { cg, lg });
    }
    Ok(out)
}

pub fn instance_seed(cfg: &ExperimentConfig, l: usize, k: usize) -> Seed {
    Seed(cfg.seed).child("instance", ((l as u64) << 32) | k as u64)
}

pub fn noise_seed(cfg: &ExperimentConfig, l: usize, k: usize, eta: f64, gauge: Option<usize>) -> Seed {
    let s = instance_seed(cfg, l, k).child("noise", eta_index(eta));
    match gauge {
        Some(g) => s.child("redraw", g as u64),
        None => s,
    }
}

fn gauge_seed(cfg: &ExperimentConfig, l: usize, k: usize, eta: f64, gauge: usize) -> Seed {
    instance_seed(cfg, l, k).child("noise", eta_index(eta)).child("gauge", gauge as u64)
}

pub fn record_key(
    cfg: &ExperimentConfig,
    l: usize,
    k: usize,
    eta: f64,
    strategy: Strategy,
    gamma: Option<f64>,
    gauge: usize,
) -> RecordKey {
    let g = gauge_seed(cfg, l, k, eta, gauge);
    let seed = match strategy {
        Strategy::C => g.child("C", 0),
        Strategy::Qac => g.child("QAC", eta_index(gamma.unwrap_or(0.0))),
    };
    RecordKey {
        instance: k,
        l,
        eta,
        gamma,
        strategy,
        gauge,
        seed: seed.0,
    }
}

/// Applies `f` to every item on `threads` workers. Results reach `sink` on the
/// calling thread in completion order. The first error stops the hand-out of
/// further items and is returned.
pub fn parallel_for_each<T, R, F, S>(items: &[T], threads: usize, f: F, mut sink: S) -> HResult<()>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> HResult<R> + Sync,
    S: FnMut(usize, R) -> HResult<()>,
{
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, HResult<R>)>();
    let mut first_err = None;
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(items.len().max(1)) {
            let tx = tx.clone();
            let (next, stop, f) = (&next, &stop, &f);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                let failed = r.is_err();
                if tx.send((i, r)).is_err() || failed {
                    stop.store(true, Ordering::Relaxed);
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            let outcome = r.and_then(|v| sink(i, v));
            if let Err(e) = outcome {
                stop.store(true, Ordering::Relaxed);
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    });
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct GenerateSummary {
    pub instances: usize,
    pub flagged: Vec<String>,
    pub pticm_only: Vec<String>,
}

pub fn cmd_generate(cfg: &ExperimentConfig, threads: usize) -> HResult<GenerateSummary> {
    cfg.validate()?;
    let rd = RunDir::new(&cfg.out);
    fs::create_dir_all(&rd.root)?;
    write_atomic(&rd.config_path(), cfg.to_toml().as_bytes())?;
    let graphs = build_graphs(cfg)?;
    for (&l, g) in &graphs {
        write_atomic(&rd.graph_dir().join(format!("L{l:02}.holes")), g.cg.to_hole_file().as_bytes())?;
        write_atomic(&rd.graph_dir().join(format!("L{l:02}.map")), sidecar_mapping(&g.lg).as_bytes())?;
    }
    let items: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&l| (0..cfg.instances).map(move |k| (l, k)))
        .collect();
    let dp_opts = DpOptions {
        max_width: cfg.oracle.dp_max_width,
    };
    let pt = cfg.pticm_params();
    let mut summary = GenerateSummary::default();
    let mut flagged = BTreeSet::new();
    parallel_for_each(
        &items,
        threads,
        |&(l, k)| {
            let seed = instance_seed(cfg, l, k);
            let inst = generate_instance(&graphs[&l].lg, seed.0, &mut seed.child("couplers", 0).rng())?;
            let (pt_cert, _) = solve_pticm(&inst, &pt, seed.child("pticm", 0))?;
            let (cert, agreed) = match solve_dp_exact(&inst, &dp_opts) {
                Ok(mut dp) => {
                    let agree = dp.agrees_with(&pt_cert);
                    dp.agreement.push((CertMethod::Pticm, agree));
                    (dp, Some(agree))
                }
                Err(CoreError::Resource { .. }) => (pt_cert, None),
                Err(e) => return Err(e.into()),
            };
            Ok((l, k, inst, cert, agreed))
        },
        |_, (l, k, inst, cert, agreed): (usize, usize, IsingInstance, GroundCertificate, Option<bool>)| {
            write_atomic(&rd.instance_path(l, k), inst.to_file_string().as_bytes())?;
            let json = serde_json::to_string_pretty(&cert).map_err(anyhow::Error::from)?;
            write_atomic(&rd.certificate_path(l, k), json.as_bytes())?;
            summary.instances += 1;
            match agreed {
                Some(false) => {
                    eprintln!("flagged {}: DP and PT-ICM disagree", instance_name(l, k));
                    flagged.insert(instance_name(l, k));
                }
                None => summary.pticm_only.push(instance_name(l, k)),
                Some(true) => {}
            }
            Ok(())
        },
    )?;
    let json = serde_json::to_string_pretty(&flagged).map_err(anyhow::Error::from)?;
    write_atomic(&rd.flagged_path(), json.as_bytes())?;
    summary.flagged = flagged.into_iter().collect();
    summary.pticm_only.sort();
    Ok(summary)
}

/// One noise draw on the physical problem couplers of the encoding; the logical
/// instance reuses the offset of the first copy of every logical coupler.
pub fn draw_noise(
    cfg: &ExperimentConfig,
    inst: &IsingInstance,
    graphs: &SizeGraphs,
    eta: f64,
    seed: Seed,
) -> HResult<NoiseFile> {
    let enc = encode(inst, 0.0, cfg.alpha, &graphs.lg, &graphs.cg)?;
    let (_, draw) = enc.problem.perturb(eta, cfg.field_noise, &mut seed.rng())?;
    let mut logical_couplers = Vec::new();
    for e in graphs.lg.edges() {
        if !inst.j().contains_key(&(e.a, e.b)) {
            continue;
        }
        let (p, q) = e.couplers[0];
        if let Some(&d) = draw.dj.get(&(p.min(q), p.max(q))) {
            logical_couplers.push((e.a, e.b, d));
        }
    }
    let mut logical_fields = Vec::new();
    for (i, q) in graphs.lg.qubits().iter().enumerate() {
        if q.in_problem() {
            if let Some(&d) = draw.dh.get(&q.data_qubits[0]) {
                logical_fields.push((i, d));
            }
        }
    }
    Ok(NoiseFile {
        eta,
        seed: seed.0,
        physical_couplers: draw.dj.iter().map(|(&(a, b), &d)| (a, b, d)).collect(),
        physical_fields: draw.dh.iter().map(|(&q, &d)| (q, d)).collect(),
        logical_couplers,
        logical_fields,
        physical_truncations: draw.truncation_count,
    })
}

pub fn load_or_draw_noise(
    cfg: &ExperimentConfig,
    rd: &RunDir,
    inst: &IsingInstance,
    graphs: &SizeGraphs,
    l: usize,
    k: usize,
    eta: f64,
    gauge: Option<usize>,
) -> HResult<NoiseFile> {
    let path = rd.noise_path(l, k, eta, gauge);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(n) = serde_json::from_str::<NoiseFile>(&text) {
            return Ok(n);
        }
    }
    let n = draw_noise(cfg, inst, graphs, eta, noise_seed(cfg, l, k, eta, gauge))?;
    let json = serde_json::to_string(&n).map_err(anyhow::Error::from)?;
    write_atomic(&path, json.as_bytes())?;
    Ok(n)
}

/// Everything a batch needs besides its key.
pub struct TaskInputs<'a> {
    pub cfg: &'a ExperimentConfig,
    pub graphs: &'a SizeGraphs,
    pub intended: &'a IsingInstance,
    pub cert: &'a GroundCertificate,
    pub noise: &'a NoiseFile,
}

pub struct TaskOutput {
    pub record: RunRecord,
    pub archive_text: String,
    pub samples: SampleSet,
}

/// Samples one batch and adjudicates it against the intended certificate.
/// The archive holds readouts in the original (ungauged) frame with energies
/// on the instance actually sampled.
pub fn execute(key: &RecordKey, x: &TaskInputs) -> HResult<TaskOutput> {
    let cfg = x.cfg;
    let sampled = sampled_instance(key, x)?;
    let gauge = Gauge::random(
        sampled.num_slots(),
        &mut gauge_seed(cfg, key.l, key.instance, key.eta, key.gauge).child(key.strategy.label(), 0).rng(),
    );
    let gauged = apply_gauge(&sampled, &gauge)?;
    let mut set = solve_sa(&gauged, &cfg.sa_params(), cfg.reads, Seed(key.seed))?;
    set.readouts = set
        .readouts
        .iter()
        .map(|s| ungauge_readout(s, &gauge))
        .collect::<jchaos_core::Result<_>>()?;
    set.gauge_id = key.gauge;
    let wall = set.wall_time_s;
    set.wall_time_s = 0.0;
    let (successes, disagreements) = adjudicate(key, x, &set)?;
    let archive_text = set.to_archive_text();
    let record = RunRecord {
        key: key.clone(),
        status: "complete".into(),
        archive: format!("samples/{}.txt.gz", key.id()),
        successes,
        reads: set.len() as u64,
        disagreements,
        content_hash: sha256_hex(&archive_text),
        wall_time_s: wall,
    };
    Ok(TaskOutput {
        record,
        archive_text,
        samples: set,
    })
}

/// The perturbed instance a batch samples: logical for C, encoded physical for QAC.
pub fn sampled_instance(key: &RecordKey, x: &TaskInputs) -> HResult<IsingInstance> {
    Ok(match key.strategy {
        Strategy::C => x.intended.apply_noise(&x.noise.logical_draw())?,
        Strategy::Qac => {
            let gamma = key
                .gamma
                .ok_or_else(|| HarnessError::Validation(format!("{}: QAC record without gamma", key.id())))?;
            let enc = encode(x.intended, gamma, x.cfg.alpha, &x.graphs.lg, &x.graphs.cg)?;
            enc.noisy_with(&x.noise.physical_draw())?
        }
    })
}

/// Successes against the intended certificate, and summed decode disagreements.
pub fn adjudicate(key: &RecordKey, x: &TaskInputs, set: &SampleSet) -> HResult<(u64, u64)> {
    match key.strategy {
        Strategy::C => {
            let b = adjudicate_success(&set.readouts, key.gauge, x.intended, x.cert)?;
            Ok((b.successes as u64, 0))
        }
        Strategy::Qac => {
            let decoded = decode_majority(&set.readouts, &x.graphs.lg, Seed(key.seed).child("decode", 0))?;
            if !decoded.usable {
                return Err(HarnessError::Validation(format!(
                    "{}: logical qubits without a data majority",
                    key.id()
                )));
            }
            let b = adjudicate_success(&decoded.configs, key.gauge, x.intended, x.cert)?;
            let dis = decoded.meta.iter().map(|m| m.disagreements as u64).sum();
            Ok((b.successes as u64, dis))
        }
    }
}

pub fn planned_keys(cfg: &ExperimentConfig, l: usize, k: usize, eta: f64) -> Vec<RecordKey> {
    let mut keys = Vec::new();
    for g in 0..cfg.gauges {
        keys.push(record_key(cfg, l, k, eta, Strategy::C, None, g));
        for &gamma in &cfg.gammas {
            keys.push(record_key(cfg, l, k, eta, Strategy::Qac, Some(gamma), g));
        }
    }
    keys
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct RunSummary {
    pub planned: usize,
    pub skipped: usize,
    pub executed: usize,
}

/// Loaded per-instance inputs of a run directory.
pub struct Workspace {
    pub cfg: ExperimentConfig,
    pub rd: RunDir,
    pub graphs: BTreeMap<usize, SizeGraphs>,
    pub instances: BTreeMap<(usize, usize), (IsingInstance, GroundCertificate)>,
    pub noise: BTreeMap<(usize, usize, u64, Option<usize>), NoiseFile>,
}

impl Workspace {
    pub fn load(cfg: &ExperimentConfig) -> HResult<Self> {
        let rd = RunDir::new(&cfg.out);
        let graphs = build_graphs(cfg)?;
        let flagged = rd.read_flagged()?;
        let mut instances = BTreeMap::new();
        let mut noise = BTreeMap::new();
        for &l in &cfg.sizes {
            for k in 0..cfg.instances {
                if flagged.contains(&instance_name(l, k)) {
                    continue;
                }
                let inst = rd.read_instance(l, k)?;
                let cert = rd.read_certificate(l, k)?;
                for &eta in &cfg.etas {
                    if cfg.redraw_noise_per_gauge {
                        for g in 0..cfg.gauges {
                            let n = load_or_draw_noise(cfg, &rd, &inst, &graphs[&l], l, k, eta, Some(g))?;
                            noise.insert((l, k, eta_index(eta), Some(g)), n);
                        }
                    } else {
                        let n = load_or_draw_noise(cfg, &rd, &inst, &graphs[&l], l, k, eta, None)?;
                        noise.insert((l, k, eta_index(eta), None), n);
                    }
                }
                instances.insert((l, k), (inst, cert));
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            rd,
            graphs,
            instances,
            noise,
        })
    }

    pub fn inputs(&self, key: &RecordKey) -> HResult<TaskInputs<'_>> {
        let (intended, cert) = self
            .instances
            .get(&(key.l, key.instance))
            .ok_or_else(|| HarnessError::Dependency(format!("{}: instance not loaded", key.id())))?;
        let gauge = self.cfg.redraw_noise_per_gauge.then_some(key.gauge);
        let noise = self
            .noise
            .get(&(key.l, key.instance, eta_index(key.eta), gauge))
            .ok_or_else(|| HarnessError::Dependency(format!("{}: noise draw not loaded", key.id())))?;
        Ok(TaskInputs {
            cfg: &self.cfg,
            graphs: &self.graphs[&key.l],
            intended,
            cert,
            noise,
        })
    }

    pub fn planned(&self) -> Vec<RecordKey> {
        let mut keys = Vec::new();
        for &(l, k) in self.instances.keys() {
            for &eta in &self.cfg.etas {
                keys.extend(planned_keys(&self.cfg, l, k, eta));
            }
        }
        keys
    }
}

pub fn cmd_run(cfg: &ExperimentConfig, threads: usize) -> HResult<RunSummary> {
    run_limited(cfg, threads, None)
}

/// As [`cmd_run`], stopping after `limit` new records (used to exercise resumption).
pub fn run_limited(cfg: &ExperimentConfig, threads: usize, limit: Option<usize>) -> HResult<RunSummary> {
    cfg.validate()?;
    let ws = Workspace::load(cfg)?;
    let done = ws.rd.completed()?;
    let planned = ws.planned();
    let mut todo: Vec<RecordKey> = planned.iter().filter(|k| !done.contains_key(&k.id())).cloned().collect();
    let skipped = planned.len() - todo.len();
    if let Some(n) = limit {
        todo.truncate(n);
    }
    let summary = RunSummary {
        planned: planned.len(),
        skipped,
        executed: todo.len(),
    };
    fs::create_dir_all(ws.rd.samples_dir())?;
    let mut index = ws.rd.open_records_for_append()?;
    let total = todo.len();
    let mut finished = 0usize;
    parallel_for_each(
        &todo,
        threads,
        |key| {
            let out = execute(key, &ws.inputs(key)?)?;
            write_atomic(&ws.rd.root.join(&out.record.archive), &gzip(&out.archive_text)?)?;
            Ok(out.record)
        },
        |_, record| {
            ws.rd.append_record(&mut index, &record)?;
            finished += 1;
            if finished.is_multiple_of(500) || finished == total {
                eprintln!("run: {finished}/{total} batches");
            }
            Ok(())
        },
    )?;
    Ok(summary)
}

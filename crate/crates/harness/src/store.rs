//! On-disk layout of a run directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use jchaos_core::instance::{IsingInstance, NoiseDraw};
use jchaos_core::rng::eta_index;
use jchaos_core::solvers::GroundCertificate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HResult, HarnessError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    C,
    #[serde(rename = "QAC")]
    Qac,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::C => "C",
            Strategy::Qac => "QAC",
        }
    }
}

/// Identity tuple of one sampling batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordKey {
    pub instance: usize,
    pub l: usize,
    pub eta: f64,
    pub gamma: Option<f64>,
    pub strategy: Strategy,
    pub gauge: usize,
    pub seed: u64,
}

impl RecordKey {
    pub fn id(&self) -> String {
        let gamma = self.gamma.map_or("none".to_string(), |g| format!("{:07}", eta_index(g)));
        format!(
            "L{:02}_i{:03}_e{:07}_{}_{}_g{}",
            self.l,
            self.instance,
            eta_index(self.eta),
            self.strategy.label(),
            gamma,
            self.gauge
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub key: RecordKey,
    pub status: String,
    pub archive: String,
    pub successes: u64,
    pub reads: u64,
    /// Logical qubits whose data copies disagreed, summed over readouts.
    pub disagreements: u64,
    /// SHA-256 of the uncompressed archive text.
    pub content_hash: String,
    pub wall_time_s: f64,
}

pub struct RunDir {
    pub root: PathBuf,
}

pub fn instance_name(l: usize, k: usize) -> String {
    format!("L{l:02}_i{k:03}")
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn instance_path(&self, l: usize, k: usize) -> PathBuf {
        self.root.join("instances").join(format!("{}.ising", instance_name(l, k)))
    }

    pub fn certificate_path(&self, l: usize, k: usize) -> PathBuf {
        self.root.join("certificates").join(format!("{}.json", instance_name(l, k)))
    }

    pub fn graph_dir(&self) -> PathBuf {
        self.root.join("graphs")
    }

    pub fn flagged_path(&self) -> PathBuf {
        self.root.join("flagged.json")
    }

    pub fn noise_path(&self, l: usize, k: usize, eta: f64, gauge: Option<usize>) -> PathBuf {
        let suffix = gauge.map_or(String::new(), |g| format!("_g{g}"));
        self.root
            .join("noise")
            .join(format!("{}_e{:07}{suffix}.json", instance_name(l, k), eta_index(eta)))
    }

    pub fn samples_dir(&self) -> PathBuf {
        self.root.join("samples")
    }

    pub fn records_path(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn collapse_dir(&self) -> PathBuf {
        self.root.join("collapse")
    }

    pub fn read_certificate(&self, l: usize, k: usize) -> HResult<GroundCertificate> {
        let p = self.certificate_path(l, k);
        let text = fs::read_to_string(&p)
            .map_err(|_| HarnessError::Dependency(format!("missing certificate {}; run `generate` first", p.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Validation(format!("{}: {e}", p.display())))
    }

    pub fn read_instance(&self, l: usize, k: usize) -> HResult<IsingInstance> {
        let p = self.instance_path(l, k);
        let text = fs::read_to_string(&p)
            .map_err(|_| HarnessError::Dependency(format!("missing instance {}; run `generate` first", p.display())))?;
        Ok(IsingInstance::from_file_str(&text)?)
    }

    pub fn read_flagged(&self) -> HResult<BTreeSet<String>> {
        match fs::read_to_string(self.flagged_path()) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| HarnessError::Validation(format!("flagged.json: {e}"))),
            Err(_) => Err(HarnessError::Dependency("missing flagged.json; run `generate` first".into())),
        }
    }

    pub fn read_records(&self) -> HResult<Vec<RunRecord>> {
        let p = self.records_path();
        let Ok(f) = File::open(&p) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<RunRecord>(&line) {
                Ok(r) => out.push(r),
                // a torn final line from an interrupted run is dropped and redone
                Err(e) => eprintln!("records.jsonl line {}: skipped ({e})", i + 1),
            }
        }
        Ok(out)
    }

    /// Records keyed by id; a later line for the same id wins.
    pub fn completed(&self) -> HResult<BTreeMap<String, RunRecord>> {
        Ok(self
            .read_records()?
            .into_iter()
            .filter(|r| r.status == "complete")
            .map(|r| (r.key.id(), r))
            .collect())
    }

    pub fn append_record(&self, file: &mut File, record: &RunRecord) -> HResult<()> {
        let line = serde_json::to_string(record).context("serialising record")?;
        writeln!(file, "{line}")?;
        file.flush()?;
        Ok(())
    }

    /// Opens the log for appending, ending any torn final line first.
    pub fn open_records_for_append(&self) -> HResult<File> {
        let path = self.records_path();
        let torn = fs::read(&path).is_ok_and(|b| b.last().is_some_and(|&c| c != b'\n'));
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if torn {
            writeln!(f)?;
        }
        Ok(f)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> HResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn gzip(text: &str) -> HResult<Vec<u8>> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(text.as_bytes())?;
    Ok(enc.finish()?)
}

pub fn gunzip_file(path: &Path) -> HResult<String> {
    let f = File::open(path).map_err(|e| HarnessError::Dependency(format!("{}: {e}", path.display())))?;
    let mut s = String::new();
    GzDecoder::new(f)
        .read_to_string(&mut s)
        .with_context(|| format!("decompressing {}", path.display()))?;
    Ok(s)
}

pub fn sha256_hex(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Persisted noise for one (instance, eta): offsets on the physical problem
/// couplers of the encoding, and the logical offsets derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseFile {
    pub eta: f64,
    pub seed: u64,
    pub physical_couplers: Vec<(usize, usize, f64)>,
    pub physical_fields: Vec<(usize, f64)>,
    pub logical_couplers: Vec<(usize, usize, f64)>,
    pub logical_fields: Vec<(usize, f64)>,
    pub physical_truncations: usize,
}

impl NoiseFile {
    pub fn physical_draw(&self) -> NoiseDraw {
        NoiseDraw {
            eta: self.eta,
            dh: self.physical_fields.iter().copied().collect(),
            dj: self.physical_couplers.iter().map(|&(a, b, d)| ((a, b), d)).collect(),
            truncation_count: self.physical_truncations,
        }
    }

    pub fn logical_draw(&self) -> NoiseDraw {
        NoiseDraw {
            eta: self.eta,
            dh: self.logical_fields.iter().copied().collect(),
            dj: self.logical_couplers.iter().map(|&(a, b, d)| ((a, b), d)).collect(),
            truncation_count: 0,
        }
    }
}

//! Experiment configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use jchaos_core::qac::GAMMA_GRID;
use jchaos_core::solvers::{PticmParams, SaParams};
use serde::{Deserialize, Serialize};

use crate::error::{validation, HResult, HarnessError};

pub const DEFAULT_ETAS: [f64; 6] = [0.0, 0.03, 0.05, 0.07, 0.10, 0.15];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Logical lattice sizes `L`.
    pub sizes: Vec<usize>,
    pub etas: Vec<f64>,
    pub instances: usize,
    pub gauges: usize,
    pub reads: usize,
    pub gammas: Vec<f64>,
    /// Problem scale of the encoded Hamiltonian.
    pub alpha: f64,
    pub field_noise: bool,
    pub redraw_noise_per_gauge: bool,
    /// Replaces instance and read counts with the paper's 100 instances and
    /// 10000 reads per gauge.
    pub paper_scale: bool,
    /// Optional hole file per size, keyed by `L` as a string.
    pub holes: BTreeMap<String, PathBuf>,
    pub solver: SolverConfig,
    pub oracle: OracleConfig,
    pub analysis: AnalysisConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub backend: String,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub dp_max_width: usize,
    pub pticm_temperatures: usize,
    pub pticm_beta_min: f64,
    pub pticm_beta_max: f64,
    pub pticm_sweeps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bootstrap_resamples: usize,
    pub median_resamples: usize,
    pub fit_restarts: usize,
    pub d_resamples: usize,
    /// Exponent of the noise term in the classical reference curve.
    pub bound_alpha: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("runs/default"),
            sizes: vec![1, 2, 3, 4],
            etas: DEFAULT_ETAS.to_vec(),
            instances: 20,
            gauges: 5,
            reads: 1000,
            gammas: GAMMA_GRID.to_vec(),
            alpha: 1.0,
            field_noise: false,
            redraw_noise_per_gauge: false,
            paper_scale: false,
            holes: BTreeMap::new(),
            solver: SolverConfig::default(),
            oracle: OracleConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: "sa".into(),
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 3.0,
        }
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dp_max_width: 24,
            pticm_temperatures: 16,
            pticm_beta_min: 0.2,
            pticm_beta_max: 5.0,
            pticm_sweeps: 2000,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 1000,
            median_resamples: 1000,
            fit_restarts: 32,
            d_resamples: 2000,
            bound_alpha: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> HResult<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Validation(format!("config: {e}")))?;
        if cfg.paper_scale {
            cfg.instances = 100;
            cfg.reads = 10_000;
            cfg.paper_scale = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> HResult<()> {
        if self.sizes.is_empty() || self.etas.is_empty() || self.gammas.is_empty() {
            return validation("sizes, etas and gammas must be non-empty");
        }
        if self.sizes.contains(&0) {
            return validation("sizes must be at least 1");
        }
        if let Some(e) = self.etas.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
            return validation(format!("noise level {e} must be a finite value >= 0"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return validation(format!("penalty strength {g} outside [0, 1]"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return validation(format!("alpha {} outside (0, 1]", self.alpha));
        }
        if self.instances == 0 || self.gauges == 0 || self.reads == 0 {
            return validation("instances, gauges and reads must be positive");
        }
        if self.solver.backend != "sa" {
            return validation(format!("unknown solver backend `{}` (available: sa)", self.solver.backend));
        }
        if self.solver.sweeps == 0 || !(self.solver.beta_start >= 0.0) || self.solver.beta_end < self.solver.beta_start {
            return validation("solver needs sweeps >= 1 and 0 <= beta_start <= beta_end");
        }
        let o = &self.oracle;
        if o.pticm_temperatures < 2 || o.pticm_sweeps == 0 || !(o.pticm_beta_min > 0.0) || o.pticm_beta_max <= o.pticm_beta_min {
            return validation("oracle needs >= 2 temperatures, >= 1 sweep and 0 < beta_min < beta_max");
        }
        let a = &self.analysis;
        if a.bootstrap_resamples < 1000 {
            return validation("bootstrap_resamples must be at least 1000");
        }
        if a.median_resamples == 0 || a.fit_restarts == 0 {
            return validation("median_resamples and fit_restarts must be positive");
        }
        if !(a.bound_alpha > 0.0 && a.bound_alpha <= 1.0) {
            return validation("bound_alpha must lie in (0, 1]");
        }
        for key in self.holes.keys() {
            match key.parse::<usize>() {
                Ok(l) if self.sizes.contains(&l) => {}
                _ => return validation(format!("hole file key `{key}` is not a configured size")),
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &e in &self.etas {
            if !seen.insert(jchaos_core::rng::eta_index(e)) {
                return validation(format!("duplicate noise level {e}"));
            }
        }
        Ok(())
    }

    pub fn sa_params(&self) -> SaParams {
        SaParams::linear(self.solver.sweeps, self.solver.beta_start, self.solver.beta_end)
    }

    pub fn pticm_params(&self) -> PticmParams {
        let o = &self.oracle;
        PticmParams::geometric(o.pticm_temperatures, o.pticm_beta_min, o.pticm_beta_max, o.pticm_sweeps)
    }

    pub fn hole_file(&self, l: usize) -> Option<&Path> {
        self.holes.get(&l.to_string()).map(PathBuf::as_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("sizes = [2]\n[solver]\nsweeps = 50\n").unwrap();
        assert_eq!(cfg.sizes, vec![2]);
        assert_eq!(cfg.solver.sweeps, 50);
        assert_eq!(cfg.solver.beta_end, 3.0);
        assert_eq!(cfg.etas, DEFAULT_ETAS.to_vec());
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "etas = [-0.1]",
            "sizes = []",
            "gammas = [1.5]",
            "[solver]\nbackend = \"qpu\"",
            "unknown_key = 1",
            "instances = 0",
            "[holes]\n7 = \"x\"",
        ] {
            let err = ExperimentConfig::from_toml(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn paper_scale_switch() {
        let cfg = ExperimentConfig::from_toml("paper_scale = true").unwrap();
        assert_eq!((cfg.instances, cfg.reads), (100, 10_000));
    }
}

//! Ising instances, Gaussian control noise, spin-reversal gauges and energies.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::chimera::{ChimeraGraph, LogicalGraph};
use crate::error::{input, Error, Result};

/// Coupler magnitudes of the intended instance class, in units of 1/6.
pub const COUPLER_STEPS: [i64; 3] = [1, 2, 3];
/// Integer scale at which intended instances are exact.
pub const INTENDED_SCALE: u32 = 6;

const EXACT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    Logical,
    Physical,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Logical => "logical",
            GraphKind::Physical => "physical",
        }
    }
}

/// Anything an instance can be generated on.
pub trait ProblemGraph {
    fn kind(&self) -> GraphKind;
    fn side(&self) -> usize;
    fn active_mask(&self) -> Vec<bool>;
    fn edge_list(&self) -> Vec<(usize, usize)>;
}

impl ProblemGraph for ChimeraGraph {
    fn kind(&self) -> GraphKind {
        GraphKind::Physical
    }
    fn side(&self) -> usize {
        self.l()
    }
    fn active_mask(&self) -> Vec<bool> {
        self.active().to_vec()
    }
    fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().to_vec()
    }
}

impl ProblemGraph for LogicalGraph {
    fn kind(&self) -> GraphKind {
        GraphKind::Logical
    }
    fn side(&self) -> usize {
        self.l()
    }
    fn active_mask(&self) -> Vec<bool> {
        LogicalGraph::active_mask(self)
    }
    fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().iter().map(|e| (e.a, e.b)).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    kind: GraphKind,
    l: usize,
    active: Vec<bool>,
    h: BTreeMap<usize, f64>,
    j: BTreeMap<(usize, usize), f64>,
    exact_scale: Option<u32>,
    provenance: Provenance,
}

/// Energy of a configuration; `scaled` is `scale * energy` as an exact integer
/// when the instance carries an exact scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub scaled: Option<i64>,
}

fn check_range(value: f64, context: impl FnOnce() -> String) -> Result<()> {
    if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
        return Err(Error::Range {
            value,
            lo: -1.0,
            hi: 1.0,
            context: context(),
        });
    }
    Ok(())
}

fn to_scaled(value: f64, scale: u32) -> Option<i64> {
    let s = value * scale as f64;
    let r = s.round();
    ((s - r).abs() < EXACT_TOL).then_some(r as i64)
}

impl IsingInstance {
    pub fn new(
        kind: GraphKind,
        l: usize,
        active: Vec<bool>,
        h: BTreeMap<usize, f64>,
        j: BTreeMap<(usize, usize), f64>,
        exact_scale: Option<u32>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = active.len();
        let known = |q: usize| q < n && active[q];
        for (&q, &v) in &h {
            if !known(q) {
                return input(format!("field on unknown or inactive qubit {q}"));
            }
            check_range(v, || format!("h[{q}]"))?;
        }
        let mut normalised = BTreeMap::new();
        for (&(a, b), &v) in &j {
            if a == b || !known(a) || !known(b) {
                return input(format!("coupler ({a}, {b}) on unknown, inactive or identical qubits"));
            }
            check_range(v, || format!("J[{a},{b}]"))?;
            let key = (a.min(b), a.max(b));
            if normalised.insert(key, v).is_some() {
                return input(format!("duplicate coupler ({a}, {b})"));
            }
        }
        if let Some(s) = exact_scale {
            if s == 0 {
                return input("exact scale must be positive");
            }
            let inexact = h
                .values()
                .chain(normalised.values())
                .any(|&v| to_scaled(v, s).is_none());
            if inexact {
                return input(format!("values are not integer multiples of 1/{s}"));
            }
        }
        Ok(Self {
            kind,
            l,
            active,
            h,
            j: normalised,
            exact_scale,
            provenance,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of index slots (active or not).
    pub fn num_slots(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&q| self.active[q]).collect()
    }

    pub fn h(&self) -> &BTreeMap<usize, f64> {
        &self.h
    }

    pub fn j(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.j
    }

    pub fn exact_scale(&self) -> Option<u32> {
        self.exact_scale
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Field vector over all slots (zero where unset).
    pub fn field_vec(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.active.len()];
        for (&q, &v) in &self.h {
            out[q] = v;
        }
        out
    }

    /// Adjacency lists `(neighbour, J)` over all slots; zero couplers are kept.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.active.len()];
        for (&(a, b), &v) in &self.j {
            adj[a].push((b, v));
            adj[b].push((a, v));
        }
        adj
    }

    /// Integer fields and couplers at the exact scale, if the instance has one.
    pub fn scaled_terms(&self) -> Option<(BTreeMap<usize, i64>, BTreeMap<(usize, usize), i64>)> {
        let s = self.exact_scale?;
        let h = self.h.iter().map(|(&q, &v)| (q, to_scaled(v, s).unwrap())).collect();
        let j = self.j.iter().map(|(&k, &v)| (k, to_scaled(v, s).unwrap())).collect();
        Some((h, j))
    }

    fn check_spins(&self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.active.len() {
            return input(format!(
                "configuration has {} entries, instance has {} slots",
                spins.len(),
                self.active.len()
            ));
        }
        for (q, (&s, &a)) in spins.iter().zip(&self.active).enumerate() {
            if a && s != 1 && s != -1 {
                return input(format!("missing or invalid spin on active qubit {q}"));
            }
        }
        Ok(())
    }

    /// `sum h_i s_i + sum J_ij s_i s_j`, plus the exact integer value at scale.
    pub fn energy(&self, spins: &[i8]) -> Result<Energy> {
        self.check_spins(spins)?;
        Ok(self.energy_unchecked(spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> Energy {
        let mut value = 0.0;
        for (&q, &v) in &self.h {
            value += v * spins[q] as f64;
        }
        for (&(a, b), &v) in &self.j {
            value += v * (spins[a] * spins[b]) as f64;
        }
        let scaled = self.exact_scale.map(|s| {
            let mut e = 0i64;
            for (&q, &v) in &self.h {
                e += to_scaled(v, s).unwrap() * spins[q] as i64;
            }
            for (&(a, b), &v) in &self.j {
                e += to_scaled(v, s).unwrap() * (spins[a] * spins[b]) as i64;
            }
            e
        });
        Energy { value, scaled }
    }

    /// Adds `N(0, eta^2)` noise to every coupler (and to every active field when
    /// `include_fields` is set), clipping into `[-1, 1]`. `eta = 0` returns an exact copy.
    pub fn perturb<R: Rng + ?Sized>(
        &self,
        eta: f64,
        include_fields: bool,
        rng: &mut R,
    ) -> Result<(IsingInstance, NoiseDraw)> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return input(format!("noise level must be non-negative, got {eta}"));
        }
        let mut draw = NoiseDraw {
            eta,
            dh: BTreeMap::new(),
            dj: BTreeMap::new(),
            truncation_count: 0,
        };
        if eta == 0.0 {
            let mut copy = self.clone();
            copy.provenance.eta = Some(0.0);
            return Ok((copy, draw));
        }
        let normal = Normal::new(0.0, eta).expect("eta validated");
        let mut h = self.h.clone();
        if include_fields {
            for q in self.active_indices() {
                let d = normal.sample(rng);
                draw.dh.insert(q, d);
                let v = self.h.get(&q).copied().unwrap_or(0.0) + d;
                h.insert(q, draw.clip(v));
            }
        }
        let mut j = BTreeMap::new();
        for (&k, &v) in &self.j {
            let d = normal.sample(rng);
            draw.dj.insert(k, d);
            j.insert(k, draw.clip(v + d));
        }
        let perturbed = IsingInstance {
            kind: self.kind,
            l: self.l,
            active: self.active.clone(),
            h,
            j,
            exact_scale: None,
            provenance: Provenance {
                seed: self.provenance.seed,
                eta: Some(eta),
                parent: Some(self.digest()),
            },
        };
        Ok((perturbed, draw))
    }

    /// Applies a previously drawn set of offsets with the same clipping rule as
    /// [`perturb`](Self::perturb). Offsets for absent terms are an input error;
    /// terms without an offset are kept as they are.
    pub fn apply_noise(&self, draw: &NoiseDraw) -> Result<IsingInstance> {
        let mut truncations = 0;
        let mut h = self.h.clone();
        for (&q, &d) in &draw.dh {
            if !self.active.get(q).copied().unwrap_or(false) {
                return input(format!("field offset on inactive slot {q}"));
            }
            let v = self.h.get(&q).copied().unwrap_or(0.0);
            h.insert(q, clip_coupler(v, d, &mut truncations));
        }
        let mut j = self.j.clone();
        for (k, &d) in &draw.dj {
            let Some(v) = j.get_mut(k) else {
                return input(format!("coupler offset on missing coupler {k:?}"));
            };
            *v = clip_coupler(*v, d, &mut truncations);
        }
        IsingInstance::new(
            self.kind,
            self.l,
            self.active.clone(),
            h,
            j,
            None,
            Provenance {
                seed: self.provenance.seed,
                eta: Some(draw.eta),
                parent: Some(self.digest()),
            },
        )
    }

    /// Stable 64-bit FNV digest of the canonical file text, as hex.
    pub fn digest(&self) -> String {
        let text = self.to_file_string();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind={}", self.kind.as_str());
        let _ = writeln!(out, "# L={}", self.l);
        let _ = writeln!(out, "# n={}", self.active.len());
        if let Some(s) = self.exact_scale {
            let _ = writeln!(out, "# scale={s}");
        }
        if let Some(seed) = self.provenance.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        if let Some(eta) = self.provenance.eta {
            let _ = writeln!(out, "# eta={eta}");
        }
        if let Some(p) = &self.provenance.parent {
            let _ = writeln!(out, "# parent={p}");
        }
        let inactive: Vec<String> = (0..self.active.len())
            .filter(|&q| !self.active[q])
            .map(|q| q.to_string())
            .collect();
        if !inactive.is_empty() {
            let _ = writeln!(out, "# inactive={}", inactive.join(","));
        }
        for (&q, &v) in &self.h {
            let _ = writeln!(out, "{q} {q} {v}");
        }
        for (&(a, b), &v) in &self.j {
            let _ = writeln!(out, "{a} {b} {v}");
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut kind = None;
        let mut l = None;
        let mut n = None;
        let mut scale = None;
        let mut provenance = Provenance::default();
        let mut inactive = Vec::new();
        let mut h = BTreeMap::new();
        let mut j = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.trim().split_once('=') else {
                    continue;
                };
                let value = value.trim();
                let num = |v: &str| v.parse::<u64>().map_err(|e| perr(ln, format!("{key}: {e}")));
                match key.trim() {
                    "kind" => {
                        kind = Some(match value {
                            "logical" => GraphKind::Logical,
                            "physical" => GraphKind::Physical,
                            other => return Err(perr(ln, format!("unknown kind `{other}`"))),
                        })
                    }
                    "L" => l = Some(num(value)? as usize),
                    "n" => n = Some(num(value)? as usize),
                    "scale" => scale = Some(num(value)? as u32),
                    "seed" => provenance.seed = Some(num(value)?),
                    "eta" => {
                        provenance.eta =
                            Some(value.parse().map_err(|e| perr(ln, format!("eta: {e}")))?)
                    }
                    "parent" => provenance.parent = Some(value.to_string()),
                    "inactive" => {
                        for tok in value.split(',').filter(|t| !t.is_empty()) {
                            inactive.push(num(tok)? as usize);
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(perr(ln, format!("expected `i j value`, got `{line}`")));
            }
            let a: usize = toks[0].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let b: usize = toks[1].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let v: f64 = toks[2].parse().map_err(|e| perr(ln, format!("{e}")))?;
            check_range(v, || format!("line {ln}"))?;
            if a == b {
                if h.insert(a, v).is_some() {
                    return Err(perr(ln, format!("duplicate field {a}")));
                }
            } else if j.insert((a.min(b), a.max(b)), v).is_some() {
                return Err(perr(ln, format!("duplicate coupler ({a}, {b})")));
            }
        }
        let kind = kind.ok_or_else(|| perr(1, "missing `# kind=` header".into()))?;
        let l = l.ok_or_else(|| perr(1, "missing `# L=` header".into()))?;
        let n = n.ok_or_else(|| perr(1, "missing `# n=` header".into()))?;
        let mut active = vec![true; n];
        for q in inactive {
            if q >= n {
                return input(format!("inactive index {q} outside 0..{n}"));
            }
            active[q] = false;
        }
        IsingInstance::new(kind, l, active, h, j, scale, provenance)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_file_string())
    }

    pub fn read(path: &Path) -> std::result::Result<Self, ReadError> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_file_str(&text)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] Error),
}

/// Draws one intended instance: zero fields, couplers uniform on `{±1/6, ±1/3, ±1/2}`.
pub fn generate_instance<G: ProblemGraph, R: Rng + ?Sized>(
    graph: &G,
    seed: u64,
    rng: &mut R,
) -> Result<IsingInstance> {
    let edges = graph.edge_list();
    if edges.is_empty() {
        return input("cannot generate an instance on a graph without edges");
    }
    let mut j = BTreeMap::new();
    for (a, b) in edges {
        let step = COUPLER_STEPS[rng.random_range(0..COUPLER_STEPS.len())];
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        j.insert((a, b), (sign * step) as f64 / INTENDED_SCALE as f64);
    }
    IsingInstance::new(
        graph.kind(),
        graph.side(),
        graph.active_mask(),
        BTreeMap::new(),
        j,
        Some(INTENDED_SCALE),
        Provenance {
            seed: Some(seed),
            eta: Some(0.0),
            parent: None,
        },
    )
}

/// Gaussian offsets as drawn (before clipping) and the number of clipped values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseDraw {
    pub eta: f64,
    pub dh: BTreeMap<usize, f64>,
    pub dj: BTreeMap<(usize, usize), f64>,
    pub truncation_count: usize,
}

impl NoiseDraw {
    fn clip(&mut self, v: f64) -> f64 {
        if !(-1.0..=1.0).contains(&v) {
            self.truncation_count += 1;
        }
        v.clamp(-1.0, 1.0)
    }
}

/// Applies a precomputed coupler offset with the same clipping rule as `perturb`.
pub fn clip_coupler(value: f64, delta: f64, truncations: &mut usize) -> f64 {
    let v = value + delta;
    if !(-1.0..=1.0).contains(&v) {
        *truncations += 1;
    }
    v.clamp(-1.0, 1.0)
}

/// Spin-reversal transform: one `±1` per slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge(pub Vec<i8>);

impl Gauge {
    pub fn identity(n: usize) -> Self {
        Gauge(vec![1; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Gauge((0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.0.len() != n || self.0.iter().any(|&a| a != 1 && a != -1) {
            return input(format!("gauge of length {} does not match {n} slots", self.0.len()));
        }
        Ok(())
    }
}

/// `h_i -> a_i h_i`, `J_ij -> a_i a_j J_ij`.
pub fn apply_gauge(inst: &IsingInstance, gauge: &Gauge) -> Result<IsingInstance> {
    gauge.check(inst.num_slots())?;
    let a = &gauge.0;
    let mut out = inst.clone();
    for (&q, v) in out.h.iter_mut() {
        *v *= a[q] as f64;
    }
    for (&(p, q), v) in out.j.iter_mut() {
        *v *= (a[p] * a[q]) as f64;
    }
    Ok(out)
}

/// `s_i -> a_i s_i`; maps a readout of the gauged problem back to the original.
pub fn ungauge_readout(spins: &[i8], gauge: &Gauge) -> Result<Vec<i8>> {
    gauge.check(spins.len())?;
    Ok(spins.iter().zip(&gauge.0).map(|(&s, &a)| s * a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::ChimeraGraph;
    use crate::rng::Seed;

    fn pair(jv: f64) -> IsingInstance {
        IsingInstance::new(
            GraphKind::Physical,
            1,
            vec![true, true],
            BTreeMap::new(),
            BTreeMap::from([((0, 1), jv)]),
            Some(6),
            Provenance::default(),
        )
        .unwrap()
    }

    fn random_spins(n: usize, rng: &mut impl Rng) -> Vec<i8> {
        (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
    }

    fn l1_instance(seed: u64) -> IsingInstance {
        let g = ChimeraGraph::hole_free(1, 4).unwrap();
        generate_instance(&g, seed, &mut Seed(seed).rng()).unwrap()
    }

    #[test]
    fn generated_values_and_determinism() {
        let g = LogicalGraph::from_chimera(&ChimeraGraph::hole_free(3, 4).unwrap()).unwrap();
        let a = generate_instance(&g, 11, &mut Seed(11).rng()).unwrap();
        let b = generate_instance(&g, 11, &mut Seed(11).rng()).unwrap();
        assert_eq!(a, b);
        assert!(a.h().is_empty());
        assert_eq!(a.exact_scale(), Some(6));
        let allowed = [-3i64, -2, -1, 1, 2, 3];
        for &v in a.j().values() {
            assert!(allowed.contains(&((v * 6.0).round() as i64)));
        }
        assert_eq!(a.j().len(), g.edges().len());
    }

    #[test]
    fn coupler_values_are_uniform() {
        let g = ChimeraGraph::hole_free(5, 4).unwrap(); // 520 edges
        let mut counts = BTreeMap::<i64, usize>::new();
        let mut total = 0;
        let mut seed = 0;
        while total < 100_000 {
            let inst = generate_instance(&g, seed, &mut Seed(seed).rng()).unwrap();
            for &v in inst.j().values() {
                *counts.entry((v * 6.0).round() as i64).or_default() += 1;
                total += 1;
            }
            seed += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            let f = c as f64 / total as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn empty_graph_rejected() {
        let g = ChimeraGraph::new(1, 4, &(0..8).collect()).unwrap();
        assert!(generate_instance(&g, 0, &mut Seed(0).rng()).is_err());
    }

    #[test]
    fn zero_noise_is_exact_copy() {
        let inst = l1_instance(3);
        let (p, draw) = inst.perturb(0.0, false, &mut Seed(1).rng()).unwrap();
        assert_eq!(p.j(), inst.j());
        assert_eq!(p.exact_scale(), Some(6));
        assert_eq!(draw.truncation_count, 0);
        assert!(inst.perturb(-0.1, false, &mut Seed(1).rng()).is_err());
    }

    #[test]
    fn replaying_a_draw_matches_perturb() {
        let inst = l1_instance(8);
        let (p, draw) = inst.perturb(0.3, true, &mut Seed(2).rng()).unwrap();
        assert_eq!(inst.apply_noise(&draw).unwrap(), p);
        let mut bad = draw.clone();
        bad.dj.insert((0, 1), 0.1);
        assert!(inst.apply_noise(&bad).is_err());
    }

    #[test]
    fn clipping_counts_truncations() {
        let mut t = 0;
        assert_eq!(clip_coupler(0.5, 0.7, &mut t), 1.0);
        assert_eq!(t, 1);
        assert_eq!(clip_coupler(-0.5, -0.2, &mut t), -0.7);
        assert_eq!(t, 1);
    }

    #[test]
    fn perturbation_std_matches_eta() {
        let inst = l1_instance(4);
        let mut rng = Seed(99).rng();
        let mut diffs = Vec::new();
        while diffs.len() < 100_000 {
            let (p, draw) = inst.perturb(0.1, false, &mut rng).unwrap();
            assert_eq!(draw.truncation_count, 0);
            for (k, &v) in p.j() {
                diffs.push(v - inst.j()[k]);
            }
        }
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - 0.1).abs() < 0.002, "std {}", var.sqrt());
    }

    #[test]
    fn truncations_are_rare_at_paper_noise() {
        let inst = l1_instance(5);
        let mut rng = Seed(5).rng();
        let (mut clipped, mut total) = (0usize, 0usize);
        for _ in 0..10_000 {
            let (_, draw) = inst.perturb(0.15, false, &mut rng).unwrap();
            clipped += draw.truncation_count;
            total += draw.dj.len();
        }
        assert!((clipped as f64 / total as f64) < 1e-3);
    }

    #[test]
    fn field_noise_only_when_requested() {
        let inst = l1_instance(6);
        let (p, d) = inst.perturb(0.1, false, &mut Seed(2).rng()).unwrap();
        assert!(p.h().is_empty() && d.dh.is_empty());
        let (p, d) = inst.perturb(0.1, true, &mut Seed(2).rng()).unwrap();
        assert_eq!(p.h().len(), 8);
        assert_eq!(d.dh.len(), 8);
    }

    #[test]
    fn pair_energies() {
        let inst = pair(-0.5);
        let e = inst.energy(&[1, 1]).unwrap();
        assert_eq!(e.value, -0.5);
        assert_eq!(e.scaled, Some(-3));
        assert!(inst.energy(&[1, 0]).is_err());
        assert!(inst.energy(&[1]).is_err());
    }

    #[test]
    fn isolated_spin_flip_is_free() {
        let g = ChimeraGraph::hole_free(1, 4).unwrap();
        let mut inst = generate_instance(&g, 1, &mut Seed(1).rng()).unwrap();
        // drop every coupler touching qubit 0
        let j: BTreeMap<_, _> = inst.j().iter().filter(|(k, _)| k.0 != 0).map(|(k, v)| (*k, *v)).collect();
        inst = IsingInstance::new(inst.kind(), 1, inst.active().to_vec(), BTreeMap::new(), j, Some(6), Provenance::default()).unwrap();
        let mut s = vec![1i8; 8];
        let e0 = inst.energy(&s).unwrap();
        s[0] = -1;
        assert_eq!(inst.energy(&s).unwrap(), e0);
    }

    /// Second summation: half of the per-site local-field sum.
    fn energy_by_sites(inst: &IsingInstance, s: &[i8]) -> f64 {
        let adj = inst.adjacency();
        let fields = inst.field_vec();
        let mut twice_pair = 0.0;
        let mut single = 0.0;
        for q in 0..s.len() {
            single += fields[q] * s[q] as f64;
            for &(p, jv) in &adj[q] {
                twice_pair += jv * (s[q] * s[p]) as f64;
            }
        }
        single + twice_pair / 2.0
    }

    #[test]
    fn energy_matches_site_summation() {
        let inst = l1_instance(7);
        let mut rng = Seed(8).rng();
        for _ in 0..1000 {
            let s = random_spins(8, &mut rng);
            let e = inst.energy(&s).unwrap();
            assert!((e.value - energy_by_sites(&inst, &s)).abs() < 1e-12);
            assert!((e.scaled.unwrap() as f64 / 6.0 - e.value).abs() < 1e-12);
        }
    }

    #[test]
    fn gauge_examples() {
        let inst = l1_instance(9);
        assert_eq!(apply_gauge(&inst, &Gauge::identity(8)).unwrap(), inst);
        let neg = apply_gauge(&inst, &Gauge(vec![-1; 8])).unwrap();
        assert_eq!(neg.j(), inst.j());
        assert!(apply_gauge(&inst, &Gauge::identity(7)).is_err());
    }

    #[test]
    fn gauge_preserves_energy() {
        let g = LogicalGraph::from_chimera(&ChimeraGraph::hole_free(3, 4).unwrap()).unwrap();
        let base = generate_instance(&g, 10, &mut Seed(10).rng()).unwrap();
        let mut rng = Seed(11).rng();
        let (inst, _) = base.perturb(0.05, true, &mut rng).unwrap();
        let gauge = Gauge::random(inst.num_slots(), &mut rng);
        let gauged = apply_gauge(&inst, &gauge).unwrap();
        assert_eq!(apply_gauge(&gauged, &gauge).unwrap(), inst);
        for _ in 0..100 {
            let s = random_spins(inst.num_slots(), &mut rng);
            let orig = inst.energy(&ungauge_readout(&s, &gauge).unwrap()).unwrap();
            assert_eq!(gauged.energy(&s).unwrap().value, orig.value);
        }
    }

    #[test]
    fn file_roundtrip_and_errors() {
        let g = ChimeraGraph::new(2, 4, &[3usize, 20].into_iter().collect()).unwrap();
        let inst = generate_instance(&g, 12, &mut Seed(12).rng()).unwrap();
        let back = IsingInstance::from_file_str(&inst.to_file_string()).unwrap();
        assert_eq!(back, inst);
        let (p, _) = inst.perturb(0.07, true, &mut Seed(1).rng()).unwrap();
        assert_eq!(IsingInstance::from_file_str(&p.to_file_string()).unwrap(), p);

        let head = "# kind=physical\n# L=1\n# n=8\n";
        assert!(matches!(
            IsingInstance::from_file_str(&format!("{head}0 4 1.5\n")),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            IsingInstance::from_file_str(&format!("{head}0 4 0.5\n4 0 0.5\n")),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            IsingInstance::from_file_str(&format!("{head}0 4\n")),
            Err(Error::Parse { .. })
        ));
        assert!(IsingInstance::from_file_str(&format!("{head}0 40 0.5\n")).is_err());
    }
}

//! Three-copy penalty encoding, majority-vote decoding and the classical
//! repetition baseline.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{ChimeraGraph, LogicalGraph, LogicalStatus, CODE_COPIES};
use crate::error::{input, Error, Result};
use crate::instance::{GraphKind, IsingInstance, NoiseDraw, Provenance};
use crate::rng::Seed;

/// Penalty strengths swept per instance.
pub const GAMMA_GRID: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
/// Copies assumed by the classical repetition baseline.
pub const C_COPIES: u32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QacEncoding {
    pub gamma: f64,
    pub alpha: f64,
    /// The encoded problem `alpha * H_Ising` on the data qubits only.
    pub problem: IsingInstance,
    /// Ferromagnetic `-gamma` couplers between each penalty qubit and its data qubits.
    pub penalty: BTreeMap<(usize, usize), f64>,
    /// Backing multiplicity for every logical edge `(a, b)`.
    pub backing: BTreeMap<(usize, usize), usize>,
}

fn range_check(value: f64, lo: f64, hi: f64, context: &str) -> Result<()> {
    if !(lo..=hi).contains(&value) || !value.is_finite() {
        return Err(Error::Range {
            value,
            lo,
            hi,
            context: context.into(),
        });
    }
    Ok(())
}

fn pick_scale(values: impl Iterator<Item = f64> + Clone) -> Option<u32> {
    [6u32, 30, 60].into_iter().find(|&s| {
        values.clone().all(|v| {
            let x = v * s as f64;
            (x - x.round()).abs() < 1e-9
        })
    })
}

/// Encodes a logical instance: each field and coupler is copied onto the three
/// data-qubit copies with factor `alpha`, and every operational logical qubit
/// gets three `-gamma` penalty couplers. Penalty-missing qubits are encoded
/// without penalty terms; edges with fewer backing couplers are not rescaled.
pub fn encode(
    logical: &IsingInstance,
    gamma: f64,
    alpha: f64,
    lg: &LogicalGraph,
    cg: &ChimeraGraph,
) -> Result<QacEncoding> {
    range_check(gamma, 0.0, 1.0, "penalty strength")?;
    if !(alpha > 0.0) {
        return Err(Error::Range {
            value: alpha,
            lo: f64::MIN_POSITIVE,
            hi: 1.0,
            context: "problem scale".into(),
        });
    }
    range_check(alpha, 0.0, 1.0, "problem scale")?;
    if logical.kind() != GraphKind::Logical || logical.num_slots() != lg.num_slots() {
        return input("encoding needs a logical instance on the given logical graph");
    }
    let qubits = lg.qubits();
    for &q in logical.h().keys() {
        if !qubits[q].in_problem() {
            return input(format!("field on unused logical qubit {q}"));
        }
    }
    let mut h = BTreeMap::new();
    for (&q, &v) in logical.h() {
        for &d in &qubits[q].data_qubits {
            let x = alpha * v;
            range_check(x, -1.0, 1.0, "encoded field")?;
            h.insert(d, x);
        }
    }
    let edges: BTreeMap<(usize, usize), &Vec<(usize, usize)>> =
        lg.edges().iter().map(|e| ((e.a, e.b), &e.couplers)).collect();
    let mut j = BTreeMap::new();
    let mut backing = BTreeMap::new();
    for (&(a, b), &v) in logical.j() {
        let Some(couplers) = edges.get(&(a, b)) else {
            return input(format!("coupler ({a}, {b}) is not a logical edge"));
        };
        backing.insert((a, b), couplers.len());
        for &(p, q) in couplers.iter() {
            let x = alpha * v;
            range_check(x, -1.0, 1.0, "encoded coupler")?;
            j.insert((p, q), x);
        }
    }
    let mut penalty = BTreeMap::new();
    if gamma > 0.0 {
        for lq in qubits.iter().filter(|q| q.status == LogicalStatus::Operational) {
            for &d in &lq.data_qubits {
                let key = (d.min(lq.penalty_qubit), d.max(lq.penalty_qubit));
                if cg.has_edge(key.0, key.1) {
                    penalty.insert(key, -gamma);
                }
            }
        }
    }
    let scale = logical
        .exact_scale()
        .and_then(|_| pick_scale(h.values().chain(j.values()).copied()));
    let problem = IsingInstance::new(
        GraphKind::Physical,
        cg.l(),
        cg.active().to_vec(),
        h,
        j,
        scale,
        Provenance {
            seed: logical.provenance().seed,
            eta: logical.provenance().eta,
            parent: Some(logical.digest()),
        },
    )?;
    Ok(QacEncoding {
        gamma,
        alpha,
        problem,
        penalty,
        backing,
    })
}

impl QacEncoding {
    fn compose(&self, problem: &IsingInstance) -> Result<IsingInstance> {
        let mut j = problem.j().clone();
        for (&k, &v) in &self.penalty {
            if j.insert(k, v).is_some() {
                return input(format!("penalty coupler {k:?} overlaps a problem coupler"));
            }
        }
        let scale = problem
            .exact_scale()
            .and_then(|_| pick_scale(problem.h().values().chain(j.values()).copied()));
        IsingInstance::new(
            GraphKind::Physical,
            problem.l(),
            problem.active().to_vec(),
            problem.h().clone(),
            j,
            scale,
            problem.provenance().clone(),
        )
    }

    /// `alpha * H_Ising + gamma * H_P` as one physical instance.
    pub fn physical(&self) -> Result<IsingInstance> {
        self.compose(&self.problem)
    }

    /// Physical instance with independent Gaussian noise on every encoded
    /// problem coupler (and data-qubit field when `include_fields`); penalty
    /// couplers are left exact.
    pub fn noisy<R: Rng + ?Sized>(
        &self,
        eta: f64,
        include_fields: bool,
        rng: &mut R,
    ) -> Result<(IsingInstance, NoiseDraw)> {
        let (p, draw) = self.problem.perturb(eta, include_fields, rng)?;
        Ok((self.compose(&p)?, draw))
    }

    /// Physical instance with given offsets on the encoded problem couplers.
    pub fn noisy_with(&self, draw: &NoiseDraw) -> Result<IsingInstance> {
        self.compose(&self.problem.apply_noise(draw)?)
    }

    pub fn penalty_coupler_count(&self) -> usize {
        self.penalty.len()
    }
}

/// Sidecar text: one `logical d0 d1 d2 penalty status` line per logical slot.
pub fn sidecar_mapping(lg: &LogicalGraph) -> String {
    let mut out = String::from("# logical data0 data1 data2 penalty status\n");
    for (i, q) in lg.qubits().iter().enumerate() {
        let status = match q.status {
            LogicalStatus::Operational => "operational",
            LogicalStatus::PenaltyMissing => "penalty-missing",
            LogicalStatus::Inactive => "inactive",
        };
        let d = q.data_qubits;
        let _ = writeln!(out, "{i} {} {} {} {} {status}", d[0], d[1], d[2], q.penalty_qubit);
    }
    out
}

/// Copies a logical configuration onto every data and penalty qubit.
pub fn broadcast(logical_spins: &[i8], lg: &LogicalGraph, cg: &ChimeraGraph) -> Vec<i8> {
    let mut out = vec![0i8; cg.num_qubits()];
    for (q, lq) in lg.qubits().iter().enumerate() {
        let s = logical_spins[q];
        for &d in lq.data_qubits.iter().chain(std::iter::once(&lq.penalty_qubit)) {
            if cg.is_active(d) {
                out[d] = if s == 0 { 1 } else { s };
            }
        }
    }
    for q in 0..out.len() {
        if cg.is_active(q) && out[q] == 0 {
            out[q] = 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeMeta {
    /// Logical qubits whose active copies disagreed.
    pub disagreements: usize,
    /// Two-vote ties resolved by the seeded coin.
    pub ties: usize,
    /// Logical qubits with fewer than two active data qubits.
    pub unresolved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedSet {
    /// One logical configuration per readout; unused slots are 0.
    pub configs: Vec<Vec<i8>>,
    pub meta: Vec<DecodeMeta>,
    pub usable: bool,
}

/// Majority vote over the data qubits of every logical qubit in the problem.
/// Penalty qubits are ignored. Two-vote disagreements are broken by a coin
/// drawn from `seed/tiebreak/<readout index>`.
pub fn decode_majority(readouts: &[Vec<i8>], lg: &LogicalGraph, seed: Seed) -> Result<DecodedSet> {
    let mut configs = Vec::with_capacity(readouts.len());
    let mut meta = Vec::with_capacity(readouts.len());
    let mut usable = true;
    for (i, r) in readouts.iter().enumerate() {
        let mut coin = None;
        let mut m = DecodeMeta::default();
        let mut out = vec![0i8; lg.num_slots()];
        for (q, lq) in lg.qubits().iter().enumerate() {
            if !lq.in_problem() {
                continue;
            }
            let mut votes = [0i8; CODE_COPIES];
            let mut count = 0;
            for &d in &lq.data_qubits {
                let Some(&v) = r.get(d) else {
                    return input(format!("readout {i} does not cover physical qubit {d}"));
                };
                if v != 0 {
                    votes[count] = v;
                    count += 1;
                }
            }
            let sum: i32 = votes[..count].iter().map(|&v| v as i32).sum();
            if count > 0 && sum.unsigned_abs() as usize != count {
                m.disagreements += 1;
            }
            out[q] = match count {
                3 => sum.signum() as i8,
                2 if sum != 0 => sum.signum() as i8,
                2 => {
                    m.ties += 1;
                    let rng = coin.get_or_insert_with(|| seed.child("tiebreak", i as u64).rng());
                    if rng.random_bool(0.5) {
                        1
                    } else {
                        -1
                    }
                }
                _ => {
                    m.unresolved += 1;
                    usable = false;
                    0
                }
            };
        }
        configs.push(out);
        meta.push(m);
    }
    Ok(DecodedSet { configs, meta, usable })
}

/// `1 - (1 - p)^k`: probability that at least one of `k` independent copies succeeds.
pub fn c_strategy_success(p: f64, k: u32) -> f64 {
    1.0 - (1.0 - p).powi(k as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PenaltyChoice {
    Optimal(f64),
    /// No penalty strength produced a single success.
    Fail,
}

/// Argmax of success over penalty strengths, ties to the smaller strength.
pub fn optimal_penalty(results: &[(f64, f64)]) -> Result<PenaltyChoice> {
    if results.is_empty() {
        return input("no penalty strengths to choose from");
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = sorted[0];
    for &r in &sorted[1..] {
        if r.1 > best.1 {
            best = r;
        }
    }
    Ok(if best.1 > 0.0 {
        PenaltyChoice::Optimal(best.0)
    } else {
        PenaltyChoice::Fail
    })
}

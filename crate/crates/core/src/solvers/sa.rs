//! Single-spin Metropolis simulated annealing, the stand-in for the annealer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{now_s, Couplings, SampleSet, Sampler, SolverDescriptor};
use crate::error::{input, Result};
use crate::instance::IsingInstance;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BetaSchedule {
    Linear { start: f64, end: f64 },
    Explicit(Vec<f64>),
}

impl BetaSchedule {
    pub fn betas(&self, sweeps: usize) -> Vec<f64> {
        match self {
            BetaSchedule::Linear { start, end } => {
                if sweeps == 1 {
                    return vec![*end];
                }
                (0..sweeps)
                    .map(|k| start + (end - start) * k as f64 / (sweeps - 1) as f64)
                    .collect()
            }
            BetaSchedule::Explicit(v) => v.clone(),
        }
    }

    fn describe(&self) -> String {
        match self {
            BetaSchedule::Linear { start, end } => format!("linear:{start}:{end}"),
            BetaSchedule::Explicit(v) => format!("explicit:{}", v.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub sweeps: usize,
    pub schedule: BetaSchedule,
}

impl SaParams {
    pub fn linear(sweeps: usize, start: f64, end: f64) -> Self {
        Self {
            sweeps,
            schedule: BetaSchedule::Linear { start, end },
        }
    }
}

impl Default for SaParams {
    fn default() -> Self {
        Self::linear(1000, 0.1, 3.0)
    }
}

impl Sampler for SaParams {
    fn name(&self) -> &str {
        "sa"
    }

    fn sample(&self, inst: &IsingInstance, n_reads: usize, seed: Seed) -> Result<SampleSet> {
        solve_sa(inst, self, n_reads, seed)
    }
}

/// Runs `n_reads` independent anneals. Read `k` uses the stream `seed/read/k`,
/// so results do not depend on how reads are scheduled.
pub fn solve_sa(inst: &IsingInstance, params: &SaParams, n_reads: usize, seed: Seed) -> Result<SampleSet> {
    if params.sweeps == 0 || n_reads == 0 {
        return input("simulated annealing needs at least one sweep and one read");
    }
    let betas = params.schedule.betas(params.sweeps);
    if betas.is_empty() || betas.windows(2).any(|w| w[1] < w[0]) || betas.iter().any(|b| !(*b >= 0.0)) {
        return input("beta schedule must be non-empty, non-negative and non-decreasing");
    }
    let started = now_s();
    let c = Couplings::new(inst);
    let n = inst.num_slots();
    let mut readouts = Vec::with_capacity(n_reads);
    let mut energies = Vec::with_capacity(n_reads);
    for read in 0..n_reads {
        let mut rng = seed.child("read", read as u64).rng();
        let mut s = c.random_state(n, &mut rng);
        for &beta in &betas {
            metropolis_sweep(&c, &mut s, beta, &mut rng);
        }
        energies.push(inst.energy_unchecked(&s).value);
        readouts.push(s);
    }
    Ok(SampleSet {
        readouts,
        energies,
        gauge_id: 0,
        solver: SolverDescriptor {
            name: "sa".into(),
            sweeps: betas.len(),
            schedule: params.schedule.describe(),
            seed: seed.0,
        },
        wall_time_s: now_s() - started,
    })
}

/// One in-order Metropolis pass; returns the energy change.
pub(crate) fn metropolis_sweep<R: Rng + ?Sized>(c: &Couplings, s: &mut [i8], beta: f64, rng: &mut R) -> f64 {
    let mut delta = 0.0;
    for &q in &c.spins {
        let de = -2.0 * s[q] as f64 * c.local_field(q, s);
        if de <= 0.0 || rng.random::<f64>() < (-beta * de).exp() {
            s[q] = -s[q];
            delta += de;
        }
    }
    delta
}

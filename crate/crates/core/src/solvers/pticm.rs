//! Parallel tempering with isoenergetic (Houdayer) cluster moves.
//!
//! `n_replicas` independent chains each hold one replica per temperature.
//! Every sweep all replicas receive a Metropolis pass and neighbouring
//! temperatures within a chain attempt an exchange. Every `icm_period`
//! sweeps, replicas at the same temperature in chains `2k` and `2k + 1`
//! undergo a Houdayer move.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sa::metropolis_sweep;
use super::{now_s, CertMethod, Couplings, GroundCertificate, SampleSet, SolverDescriptor};
use crate::error::{input, Result};
use crate::instance::IsingInstance;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PticmParams {
    pub n_replicas: usize,
    pub betas: Vec<f64>,
    pub sweeps: usize,
    pub icm_period: usize,
}

impl PticmParams {
    /// Geometric ladder between `beta_min` and `beta_max`.
    pub fn geometric(n_temps: usize, beta_min: f64, beta_max: f64, sweeps: usize) -> Self {
        let betas = if n_temps == 1 {
            vec![beta_max]
        } else {
            let ratio = (beta_max / beta_min).powf(1.0 / (n_temps - 1) as f64);
            (0..n_temps).map(|k| beta_min * ratio.powi(k as i32)).collect()
        };
        Self {
            n_replicas: 2,
            betas,
            sweeps,
            icm_period: 1,
        }
    }
}

impl Default for PticmParams {
    fn default() -> Self {
        Self::geometric(16, 0.2, 5.0, 2000)
    }
}

/// Flips the cluster of disagreeing spins grown from a random seed site in both
/// replicas. Returns the cluster size (0 if the replicas agree everywhere).
/// The summed energy of the pair is unchanged by construction.
pub fn houdayer_move<R: Rng + ?Sized>(inst: &IsingInstance, a: &mut [i8], b: &mut [i8], rng: &mut R) -> usize {
    let c = Couplings::new(inst);
    houdayer_with(&c, a, b, rng)
}

fn houdayer_with<R: Rng + ?Sized>(c: &Couplings, a: &mut [i8], b: &mut [i8], rng: &mut R) -> usize {
    let disagree: Vec<usize> = c.spins.iter().copied().filter(|&q| a[q] != b[q]).collect();
    let Some(&start) = disagree.choose(rng) else {
        return 0;
    };
    let mut stack = vec![start];
    let mut in_cluster = vec![false; a.len()];
    in_cluster[start] = true;
    let mut size = 0;
    while let Some(q) = stack.pop() {
        size += 1;
        for &(p, _) in c.neighbours(q) {
            if !in_cluster[p] && a[p] != b[p] {
                in_cluster[p] = true;
                stack.push(p);
            }
        }
    }
    for q in 0..a.len() {
        if in_cluster[q] {
            a[q] = -a[q];
            b[q] = -b[q];
        }
    }
    size
}

/// Returns the best configuration found (as a certificate) and the final
/// coldest-temperature replicas.
pub fn solve_pticm(inst: &IsingInstance, params: &PticmParams, seed: Seed) -> Result<(GroundCertificate, SampleSet)> {
    if params.n_replicas < 2 {
        return input("cluster moves need at least two replicas per temperature");
    }
    if params.betas.is_empty() || params.betas.windows(2).any(|w| w[1] <= w[0]) {
        return input("beta ladder must be strictly increasing");
    }
    if params.sweeps == 0 || params.icm_period == 0 {
        return input("sweeps and icm_period must be positive");
    }
    let started = now_s();
    let c = Couplings::new(inst);
    let n = inst.num_slots();
    let nt = params.betas.len();
    let mut rng = seed.rng();
    // state[chain][temperature]
    let mut state: Vec<Vec<Vec<i8>>> = (0..params.n_replicas)
        .map(|_| (0..nt).map(|_| c.random_state(n, &mut rng)).collect())
        .collect();
    let mut energy: Vec<Vec<f64>> = state
        .iter()
        .map(|chain| chain.iter().map(|s| inst.energy_unchecked(s).value).collect())
        .collect();

    let mut best = state[0][0].clone();
    let mut best_e = energy[0][0];
    let consider = |s: &[i8], e: f64, best: &mut Vec<i8>, best_e: &mut f64| {
        if e < *best_e - 1e-9 {
            let exact = inst.energy_unchecked(s).value;
            if exact < *best_e {
                *best_e = exact;
                best.copy_from_slice(s);
            }
        }
    };

    for sweep in 0..params.sweeps {
        for (chain, energies) in state.iter_mut().zip(energy.iter_mut()) {
            for (t, s) in chain.iter_mut().enumerate() {
                energies[t] += metropolis_sweep(&c, s, params.betas[t], &mut rng);
            }
        }
        if (sweep + 1) % params.icm_period == 0 {
            for pair in 0..params.n_replicas / 2 {
                let (lo, hi) = state.split_at_mut(2 * pair + 1);
                let (ra, rb) = (&mut lo[2 * pair], &mut hi[0]);
                for t in 0..nt {
                    #[cfg(debug_assertions)]
                    let before = pair_scaled(inst, &ra[t], &rb[t]);
                    if houdayer_with(&c, &mut ra[t], &mut rb[t], &mut rng) > 0 {
                        energy[2 * pair][t] = inst.energy_unchecked(&ra[t]).value;
                        energy[2 * pair + 1][t] = inst.energy_unchecked(&rb[t]).value;
                    }
                    #[cfg(debug_assertions)]
                    debug_assert_eq!(before, pair_scaled(inst, &ra[t], &rb[t]));
                }
            }
        }
        for (chain, energies) in state.iter_mut().zip(energy.iter_mut()) {
            for t in 0..nt.saturating_sub(1) {
                let x = (params.betas[t] - params.betas[t + 1]) * (energies[t] - energies[t + 1]);
                if x >= 0.0 || rng.random::<f64>() < x.exp() {
                    chain.swap(t, t + 1);
                    energies.swap(t, t + 1);
                }
            }
        }
        for (chain, energies) in state.iter().zip(&energy) {
            for (s, &e) in chain.iter().zip(energies) {
                consider(s, e, &mut best, &mut best_e);
            }
        }
    }

    let cert = GroundCertificate::from_witness(inst, best, CertMethod::Pticm);
    let coldest: Vec<Vec<i8>> = state.iter().map(|chain| chain[nt - 1].clone()).collect();
    let energies = coldest.iter().map(|s| inst.energy_unchecked(s).value).collect();
    let samples = SampleSet {
        readouts: coldest,
        energies,
        gauge_id: 0,
        solver: SolverDescriptor {
            name: "pticm".into(),
            sweeps: params.sweeps,
            schedule: format!("ladder:{}:{}:{}", nt, params.betas[0], params.betas[nt - 1]),
            seed: seed.0,
        },
        wall_time_s: now_s() - started,
    };
    Ok((cert, samples))
}

#[cfg(debug_assertions)]
fn pair_scaled(inst: &IsingInstance, a: &[i8], b: &[i8]) -> Option<i64> {
    let (ea, eb) = (inst.energy_unchecked(a), inst.energy_unchecked(b));
    Some(ea.scaled? + eb.scaled?)
}

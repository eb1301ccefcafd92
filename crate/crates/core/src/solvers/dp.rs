//! Exact ground states by a frontier sweep over the Chimera cell grid.
//!
//! Spins are added one at a time in column-major cell order (side 0 before
//! side 1 inside a physical cell, slot 0 before slot 1 inside a logical cell).
//! The table holds the minimum partial energy for every assignment of the
//! frontier: processed spins that still have unprocessed neighbours. A spin
//! leaves the frontier, minimised out with a recorded choice bit, as soon as
//! its last neighbour is added. For an `L x L` Chimera graph the frontier
//! stays at `4L + O(1)` spins, so the sweep costs `O(L^2 2^{4L})`.

use serde::{Deserialize, Serialize};

use super::{CertMethod, GroundCertificate};
use crate::chimera::decode_index;
use crate::error::{Error, Result};
use crate::instance::{GraphKind, IsingInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpOptions {
    /// Largest frontier (in spins) the solver will allocate a table for.
    pub max_width: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self { max_width: 24 }
    }
}

/// Static cost profile of a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpPlan {
    pub order: Vec<usize>,
    pub peak_width: usize,
    /// Total table entries written over the sweep.
    pub work: u128,
}

impl DpPlan {
    pub fn required_bytes(&self, entry_bytes: usize) -> u128 {
        // two tables live during a transition, plus one choice bit per entry
        (2 * entry_bytes as u128) << self.peak_width
    }
}

fn sweep_order(inst: &IsingInstance) -> Vec<usize> {
    let l = inst.l().max(1);
    let mut order = inst.active_indices();
    match inst.kind() {
        GraphKind::Physical => {
            let r = inst.num_slots() / (2 * l * l);
            if r > 0 && 2 * r * l * l == inst.num_slots() {
                order.sort_by_key(|&q| {
                    let c = decode_index(l, r, q);
                    (c.col, c.row, c.side, c.offset)
                });
            }
        }
        GraphKind::Logical => {
            if inst.num_slots() == 2 * l * l {
                order.sort_by_key(|&q| {
                    let cell = q / 2;
                    (cell % l, cell / l, q % 2)
                });
            }
        }
    }
    order
}

fn neighbour_lists(inst: &IsingInstance) -> Vec<Vec<usize>> {
    inst.adjacency()
        .into_iter()
        .map(|list| list.into_iter().map(|(p, _)| p).collect())
        .collect()
}

/// Simulates the sweep without allocating tables.
pub fn plan(inst: &IsingInstance) -> DpPlan {
    let order = sweep_order(inst);
    let nbrs = neighbour_lists(inst);
    let mut remaining: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    let mut in_frontier = vec![false; inst.num_slots()];
    let mut width = 0usize;
    let mut peak = 0usize;
    let mut work: u128 = 0;
    for &v in &order {
        width += 1;
        peak = peak.max(width);
        work += 1u128 << width;
        in_frontier[v] = true;
        for &u in &nbrs[v] {
            remaining[u] -= 1;
        }
        for u in std::iter::once(v).chain(nbrs[v].iter().copied()) {
            if in_frontier[u] && remaining[u] == 0 {
                in_frontier[u] = false;
                width -= 1;
                work += 1u128 << width;
            }
        }
    }
    DpPlan {
        order,
        peak_width: peak,
        work,
    }
}

trait Weight: Copy + PartialOrd + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    const ZERO: Self;
}

impl Weight for i64 {
    const ZERO: Self = 0;
}

impl Weight for f64 {
    const ZERO: Self = 0.0;
}

struct Elimination {
    vertex: usize,
    frontier_after: Vec<usize>,
    choice: Vec<u64>,
}

fn sweep<W: Weight>(order: &[usize], fields: &[W], adj: &[Vec<(usize, W)>], n: usize) -> (W, Vec<i8>) {
    let mut remaining: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut pos: Vec<Option<usize>> = vec![None; n];
    let mut frontier: Vec<usize> = Vec::new();
    let mut table: Vec<W> = vec![W::ZERO];
    let mut steps: Vec<Elimination> = Vec::new();
    let mut local: Vec<(usize, W)> = Vec::new();

    for &v in order {
        // bit 0 means spin +1, bit 1 means spin -1
        local.clear();
        local.extend(adj[v].iter().filter_map(|&(u, j)| pos[u].map(|p| (p, j))));
        let k = frontier.len();
        let mut next = Vec::with_capacity(table.len() * 2);
        next.resize(table.len() * 2, W::ZERO);
        for (m, &t) in table.iter().enumerate() {
            let mut c = fields[v];
            for &(p, j) in &local {
                if m >> p & 1 == 0 {
                    c = c + j;
                } else {
                    c = c - j;
                }
            }
            next[m] = t + c;
            next[m | 1 << k] = t - c;
        }
        table = next;
        pos[v] = Some(k);
        frontier.push(v);
        for &(u, _) in &adj[v] {
            remaining[u] -= 1;
        }
        let candidates: Vec<usize> = std::iter::once(v).chain(adj[v].iter().map(|&(u, _)| u)).collect();
        for u in candidates {
            let Some(p) = pos[u] else { continue };
            if remaining[u] != 0 {
                continue;
            }
            let k = frontier.len();
            let half = table.len() / 2;
            let mut next = Vec::with_capacity(half);
            let mut choice = vec![0u64; half.div_ceil(64)];
            for m in 0..half {
                let (i0, i1) = if p == k - 1 {
                    (m, m | 1 << p)
                } else {
                    let moved = m >> p & 1;
                    let base = (m & !(1 << p)) | moved << (k - 1);
                    (base, base | 1 << p)
                };
                if table[i1] < table[i0] {
                    next.push(table[i1]);
                    choice[m / 64] |= 1 << (m % 64);
                } else {
                    next.push(table[i0]);
                }
            }
            table = next;
            pos[u] = None;
            frontier.swap_remove(p);
            if p < frontier.len() {
                pos[frontier[p]] = Some(p);
            }
            steps.push(Elimination {
                vertex: u,
                frontier_after: frontier.clone(),
                choice,
            });
        }
    }
    debug_assert!(frontier.is_empty() && table.len() == 1);

    let mut spins = vec![0i8; n];
    for step in steps.iter().rev() {
        let mut m = 0usize;
        for (i, &q) in step.frontier_after.iter().enumerate() {
            if spins[q] == -1 {
                m |= 1 << i;
            }
        }
        let bit = step.choice[m / 64] >> (m % 64) & 1;
        spins[step.vertex] = if bit == 1 { -1 } else { 1 };
    }
    (table[0], spins)
}

/// Exact minimum energy with one witness. Intended instances are solved in
/// integer arithmetic at their exact scale.
pub fn solve_dp_exact(inst: &IsingInstance, opts: &DpOptions) -> Result<GroundCertificate> {
    let plan = plan(inst);
    if plan.peak_width > opts.max_width {
        return Err(Error::Resource {
            msg: format!(
                "frontier of {} spins exceeds the cap of {}",
                plan.peak_width, opts.max_width
            ),
            required_bytes: plan.required_bytes(8),
        });
    }
    let n = inst.num_slots();
    let witness = if let Some((h, j)) = inst.scaled_terms() {
        let mut fields = vec![0i64; n];
        for (q, v) in h {
            fields[q] = v;
        }
        let mut adj = vec![Vec::new(); n];
        for ((a, b), v) in j {
            adj[a].push((b, v));
            adj[b].push((a, v));
        }
        let (best, spins) = sweep(&plan.order, &fields, &adj, n);
        debug_assert_eq!(inst.energy_unchecked(&spins).scaled, Some(best));
        spins
    } else {
        let (best, spins) = sweep(&plan.order, &inst.field_vec(), &inst.adjacency(), n);
        debug_assert!((inst.energy_unchecked(&spins).value - best).abs() < 1e-9);
        spins
    };
    Ok(GroundCertificate::from_witness(inst, witness, CertMethod::DpExact))
}

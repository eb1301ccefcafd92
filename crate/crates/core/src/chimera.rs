//! Chimera topology and the degree-3 logical graph of the three-copy penalty code.
//!
//! Physical qubit layout: cells are numbered row-major, and inside a cell the
//! `2r` qubits are numbered side-then-offset, so
//! `index = ((row * L + col) * 2 + side) * r + offset`.
//! Side 0 qubits couple vertically to the cell below, side 1 qubits couple
//! horizontally to the cell to the right.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Decoded position of a physical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitCoord {
    pub row: usize,
    pub col: usize,
    pub side: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    l: usize,
    r: usize,
    active: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl ChimeraGraph {
    /// Builds an `l x l` Chimera graph of `K_{r,r}` cells with the given qubits removed.
    pub fn new(l: usize, r: usize, holes: &BTreeSet<usize>) -> Result<Self> {
        if l == 0 || r == 0 {
            return input(format!("chimera dimensions must be positive (L={l}, r={r})"));
        }
        let n = 2 * r * l * l;
        let mut active = vec![true; n];
        for &q in holes {
            if q >= n {
                return input(format!("hole index {q} outside 0..{n}"));
            }
            active[q] = false;
        }
        let mut edges = Vec::new();
        for (a, b) in ideal_edges(l, r) {
            if active[a] && active[b] {
                edges.push((a, b));
            }
        }
        edges.sort_unstable();
        Ok(Self { l, r, active, edges })
    }

    pub fn hole_free(l: usize, r: usize) -> Result<Self> {
        Self::new(l, r, &BTreeSet::new())
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn num_qubits(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, q: usize) -> bool {
        self.active.get(q).copied().unwrap_or(false)
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Sorted list of `(lo, hi)` couplers between active qubits.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    pub fn holes(&self) -> BTreeSet<usize> {
        (0..self.active.len()).filter(|&q| !self.active[q]).collect()
    }

    pub fn index(&self, c: QubitCoord) -> usize {
        encode_index(self.l, self.r, c)
    }

    pub fn coord(&self, q: usize) -> QubitCoord {
        decode_index(self.l, self.r, q)
    }

    /// Serialises as the hole-mask text format: an `L r` header followed by one
    /// inactive qubit index per line in ascending order.
    pub fn to_hole_file(&self) -> String {
        let mut out = format!("{} {}\n", self.l, self.r);
        for q in self.holes() {
            let _ = writeln!(out, "{q}");
        }
        out
    }

    pub fn from_hole_file(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `L r` header".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: hl,
                msg: format!("expected `L r`, got `{header}`"),
            });
        }
        let parse = |s: &str, line: usize| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("`{s}`: {e}"),
            })
        };
        let l = parse(dims[0], hl)?;
        let r = parse(dims[1], hl)?;
        let mut holes = BTreeSet::new();
        for (ln, line) in lines {
            let q = parse(line, ln)?;
            if !holes.insert(q) {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("duplicate hole {q}"),
                });
            }
        }
        Self::new(l, r, &holes)
    }
}

pub fn encode_index(l: usize, r: usize, c: QubitCoord) -> usize {
    ((c.row * l + c.col) * 2 + c.side) * r + c.offset
}

pub fn decode_index(l: usize, r: usize, q: usize) -> QubitCoord {
    let offset = q % r;
    let side = (q / r) % 2;
    let cell = q / (2 * r);
    QubitCoord {
        row: cell / l,
        col: cell % l,
        side,
        offset,
    }
}

fn ideal_edges(l: usize, r: usize) -> Vec<(usize, usize)> {
    let idx = |row, col, side, offset| encode_index(l, r, QubitCoord { row, col, side, offset });
    let mut edges = Vec::with_capacity(l * l * (r * r + 2 * r));
    for row in 0..l {
        for col in 0..l {
            for a in 0..r {
                for b in 0..r {
                    edges.push((idx(row, col, 0, a), idx(row, col, 1, b)));
                }
            }
            if row + 1 < l {
                for k in 0..r {
                    edges.push((idx(row, col, 0, k), idx(row + 1, col, 0, k)));
                }
            }
            if col + 1 < l {
                for k in 0..r {
                    edges.push((idx(row, col, 1, k), idx(row, col + 1, 1, k)));
                }
            }
        }
    }
    edges
}

/// Number of data qubits per logical qubit.
pub const CODE_COPIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicalStatus {
    Operational,
    PenaltyMissing,
    Inactive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalQubit {
    pub row: usize,
    pub col: usize,
    /// 0: data on side 0, penalty on side 1. 1: the reverse.
    pub slot: usize,
    pub data_qubits: [usize; CODE_COPIES],
    pub penalty_qubit: usize,
    pub status: LogicalStatus,
}

impl LogicalQubit {
    pub fn in_problem(&self) -> bool {
        self.status != LogicalStatus::Inactive
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalEdge {
    pub a: usize,
    pub b: usize,
    /// Physical couplers realising this edge, copy `k` of `a` paired with copy `k` of `b`.
    pub couplers: Vec<(usize, usize)>,
}

/// Logical index layout: `(row * L + col) * 2 + slot`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalGraph {
    l: usize,
    qubits: Vec<LogicalQubit>,
    edges: Vec<LogicalEdge>,
}

impl LogicalGraph {
    pub fn from_chimera(g: &ChimeraGraph) -> Result<Self> {
        if g.r() != 4 {
            return Err(Error::Unsupported(format!(
                "the three-copy penalty code needs r = 4, got r = {}",
                g.r()
            )));
        }
        let l = g.l();
        let r = g.r();
        let idx = |row, col, side, offset| encode_index(l, r, QubitCoord { row, col, side, offset });
        let mut qubits = Vec::with_capacity(2 * l * l);
        for row in 0..l {
            for col in 0..l {
                for slot in 0..2 {
                    let data_qubits = [0, 1, 2].map(|k| idx(row, col, slot, k));
                    let penalty_qubit = idx(row, col, 1 - slot, 3);
                    let status = if data_qubits.iter().any(|&q| !g.is_active(q)) {
                        LogicalStatus::Inactive
                    } else if !g.is_active(penalty_qubit) {
                        LogicalStatus::PenaltyMissing
                    } else {
                        LogicalStatus::Operational
                    };
                    qubits.push(LogicalQubit {
                        row,
                        col,
                        slot,
                        data_qubits,
                        penalty_qubit,
                        status,
                    });
                }
            }
        }
        let lidx = |row: usize, col: usize, slot: usize| (row * l + col) * 2 + slot;
        let mut candidates = Vec::new();
        for row in 0..l {
            for col in 0..l {
                candidates.push((lidx(row, col, 0), lidx(row, col, 1)));
                if row + 1 < l {
                    candidates.push((lidx(row, col, 0), lidx(row + 1, col, 0)));
                }
                if col + 1 < l {
                    candidates.push((lidx(row, col, 1), lidx(row, col + 1, 1)));
                }
            }
        }
        let mut edges = Vec::new();
        for (a, b) in candidates {
            if !qubits[a].in_problem() || !qubits[b].in_problem() {
                continue;
            }
            let couplers: Vec<(usize, usize)> = (0..CODE_COPIES)
                .map(|k| (qubits[a].data_qubits[k], qubits[b].data_qubits[k]))
                .filter(|&(p, q)| g.has_edge(p, q))
                .map(|(p, q)| if p < q { (p, q) } else { (q, p) })
                .collect();
            if !couplers.is_empty() {
                edges.push(LogicalEdge { a, b, couplers });
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        Ok(Self { l, qubits, edges })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn qubits(&self) -> &[LogicalQubit] {
        &self.qubits
    }

    pub fn edges(&self) -> &[LogicalEdge] {
        &self.edges
    }

    pub fn num_slots(&self) -> usize {
        self.qubits.len()
    }

    /// Mask of logical qubits that take part in problems (operational or penalty-missing).
    pub fn active_mask(&self) -> Vec<bool> {
        self.qubits.iter().map(LogicalQubit::in_problem).collect()
    }

    pub fn count_status(&self, status: LogicalStatus) -> usize {
        self.qubits.iter().filter(|q| q.status == status).count()
    }
}

/// Logical coupler count of a hole-free `L x L` code graph: `L(3L - 2)`.
pub fn ideal_logical_coupler_count(l: usize) -> usize {
    l * (3 * l).saturating_sub(2)
}

/// Positive root of `x(3x - 2) = count`, or 0 for an empty graph.
pub fn effective_l(actual_coupler_count: usize) -> f64 {
    if actual_coupler_count == 0 {
        return 0.0;
    }
    (1.0 + (1.0 + 3.0 * actual_coupler_count as f64).sqrt()) / 3.0
}

//! Exhaustive enumeration, used as a test oracle.

use super::{CertMethod, Couplings, GroundCertificate};
use crate::error::{Error, Result};
use crate::instance::IsingInstance;

const TIE_TOL: f64 = 1e-12;

/// Minimum energy and the complete set of minimising configurations.
///
/// Walks the Gray code over the active spins so each step flips one spin.
/// Float instances keep every configuration within `1e-12` of the minimum.
pub fn brute_force(inst: &IsingInstance, max_spins: usize) -> Result<(GroundCertificate, Vec<Vec<i8>>)> {
    let spins = inst.active_indices();
    let k = spins.len();
    if k > max_spins {
        return Err(Error::Resource {
            msg: format!("{k} active spins exceed the brute-force limit of {max_spins}"),
            required_bytes: (1u128 << k.min(120)) / 8,
        });
    }
    let n = inst.num_slots();
    let mut s = vec![0i8; n];
    for &q in &spins {
        s[q] = 1;
    }
    let ground = match inst.scaled_terms() {
        Some((h, j)) => {
            let mut fields = vec![0i64; n];
            for (q, v) in h {
                fields[q] = v;
            }
            let mut adj = vec![Vec::new(); n];
            for ((a, b), v) in j {
                adj[a].push((b, v));
                adj[b].push((a, v));
            }
            let mut e: i64 = inst.energy_unchecked(&s).scaled.unwrap();
            let mut best = e;
            let mut set = vec![s.clone()];
            for step in 1u64..(1u64 << k) {
                let q = spins[step.trailing_zeros() as usize];
                let mut f = fields[q];
                for &(p, jv) in &adj[q] {
                    f += jv * s[p] as i64;
                }
                e -= 2 * s[q] as i64 * f;
                s[q] = -s[q];
                if e < best {
                    best = e;
                    set.clear();
                }
                if e == best {
                    set.push(s.clone());
                }
            }
            set
        }
        None => {
            let c = Couplings::new(inst);
            let mut e = inst.energy_unchecked(&s).value;
            let mut all: Vec<(f64, Vec<i8>)> = Vec::new();
            let mut best = e;
            all.push((e, s.clone()));
            for step in 1u64..(1u64 << k) {
                let q = spins[step.trailing_zeros() as usize];
                e -= 2.0 * s[q] as f64 * c.local_field(q, &s);
                s[q] = -s[q];
                if e < best + TIE_TOL {
                    best = best.min(e);
                    all.retain(|(v, _)| *v <= best + TIE_TOL);
                    all.push((e, s.clone()));
                }
            }
            // incremental energies drift; settle the final set on exact values
            let exact: Vec<(f64, Vec<i8>)> = all
                .into_iter()
                .map(|(_, s)| (inst.energy_unchecked(&s).value, s))
                .collect();
            let min = exact.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
            exact
                .into_iter()
                .filter(|(v, _)| *v <= min + TIE_TOL)
                .map(|(_, s)| s)
                .collect()
        }
    };
    let cert = GroundCertificate::from_witness(inst, ground[0].clone(), CertMethod::BruteForce);
    Ok((cert, ground))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::instance::{GraphKind, Provenance};

    fn inst(n: usize, h: &[(usize, f64)], j: &[((usize, usize), f64)]) -> IsingInstance {
        IsingInstance::new(
            GraphKind::Physical,
            1,
            vec![true; n],
            h.iter().copied().collect::<BTreeMap<_, _>>(),
            j.iter().copied().collect::<BTreeMap<_, _>>(),
            Some(6),
            Provenance::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_spin_field() {
        let (cert, set) = brute_force(&inst(1, &[(0, 1.0 / 6.0)], &[]), 24).unwrap();
        assert_eq!(set, vec![vec![-1]]);
        assert!((cert.energy.value() + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn antiferromagnetic_pair() {
        let (_, mut set) = brute_force(&inst(2, &[], &[((0, 1), 0.5)]), 24).unwrap();
        set.sort();
        assert_eq!(set, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn spin_limit() {
        assert!(matches!(
            brute_force(&inst(5, &[], &[]), 4),
            Err(Error::Resource { .. })
        ));
    }
}

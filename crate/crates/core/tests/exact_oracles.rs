use std::collections::BTreeSet;

use jchaos_core::chimera::{ChimeraGraph, LogicalGraph};
use jchaos_core::instance::{apply_gauge, generate_instance, ungauge_readout, Gauge, IsingInstance};
use jchaos_core::solvers::{brute_force, plan, solve_dp_exact, solve_pticm, DpOptions, PticmParams};
use jchaos_core::Seed;
use proptest::prelude::*;
use rand::Rng;

fn holed_physical(l: usize, keep: usize, seed: Seed) -> ChimeraGraph {
    let mut rng = seed.rng();
    let n = 8 * l * l;
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let holes: BTreeSet<usize> = ids[keep.min(n)..].iter().copied().collect();
    ChimeraGraph::new(l, 4, &holes).unwrap()
}

fn physical_instance(l: usize, keep: usize, seed: u64) -> Option<IsingInstance> {
    let g = holed_physical(l, keep, Seed(seed).child("mask", 0));
    generate_instance(&g, seed, &mut Seed(seed).child("instance", 0).rng()).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_brute_force_on_holed_graphs(seed in any::<u64>(), l in 1usize..=3, keep in 4usize..=20) {
        if let Some(inst) = physical_instance(l, keep, seed) {
            let dp = solve_dp_exact(&inst, &DpOptions::default()).unwrap();
            let (bf, ground) = brute_force(&inst, 20).unwrap();
            prop_assert_eq!(dp.energy.scaled().unwrap(), bf.energy.scaled().unwrap());
            prop_assert!(ground.contains(&dp.witness));
            dp.check(&inst).unwrap();
        }
    }

    #[test]
    fn dp_float_path_matches_brute_force(seed in any::<u64>(), eta in 0.01f64..0.3) {
        if let Some(inst) = physical_instance(2, 16, seed) {
            let (noisy, _) = inst.perturb(eta, true, &mut Seed(seed).child("noise", 0).rng()).unwrap();
            let dp = solve_dp_exact(&noisy, &DpOptions::default()).unwrap();
            let (bf, _) = brute_force(&noisy, 20).unwrap();
            prop_assert!((dp.energy.value() - bf.energy.value()).abs() < 1e-9);
        }
    }
}

#[test]
fn gauge_preserves_dp_ground_energy() {
    for seed in 0..20u64 {
        let g = ChimeraGraph::hole_free(2, 4).unwrap();
        let inst = generate_instance(&g, seed, &mut Seed(seed).rng()).unwrap();
        let gauge = Gauge::random(inst.num_slots(), &mut Seed(seed).child("gauge", 0).rng());
        let gauged = apply_gauge(&inst, &gauge).unwrap();
        let a = solve_dp_exact(&inst, &DpOptions::default()).unwrap();
        let b = solve_dp_exact(&gauged, &DpOptions::default()).unwrap();
        assert_eq!(a.energy.scaled(), b.energy.scaled());
        let back = ungauge_readout(&b.witness, &gauge).unwrap();
        assert_eq!(inst.energy(&back).unwrap().scaled, a.energy.scaled());
    }
}

#[test]
fn pticm_agrees_with_dp_on_logical_instances() {
    let mut agree = 0;
    let mut total = 0;
    for l in 1..=4 {
        let lg = LogicalGraph::from_chimera(&ChimeraGraph::hole_free(l, 4).unwrap()).unwrap();
        for k in 0..5u64 {
            let seed = Seed(17).child("inst", (l * 100) as u64 + k);
            let inst = generate_instance(&lg, seed.0, &mut seed.rng()).unwrap();
            let dp = solve_dp_exact(&inst, &DpOptions::default()).unwrap();
            let (pt, _) = solve_pticm(&inst, &PticmParams::geometric(12, 0.2, 5.0, 500), seed.child("pt", 0)).unwrap();
            assert!(pt.energy.value() >= dp.energy.value() - 1e-12);
            total += 1;
            agree += pt.agrees_with(&dp) as usize;
        }
    }
    assert_eq!(agree, total);
}

#[test]
fn sweep_work_scales_as_two_to_the_four_l() {
    // log2(work / L^2) per unit of L, from the exact table-entry count
    let mut logs = Vec::new();
    for l in 1..=5 {
        let g = ChimeraGraph::hole_free(l, 4).unwrap();
        let inst = generate_instance(&g, 0, &mut Seed(0).rng()).unwrap();
        let p = plan(&inst);
        assert!(p.peak_width <= 4 * l + 5, "L={l} width {}", p.peak_width);
        logs.push((p.work as f64).log2() - 2.0 * (l as f64).log2());
    }
    let steps: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    // boundary columns are cheap, so small L overshoots and the increments fall towards 4
    assert!(steps.windows(2).all(|w| w[1] <= w[0]), "{steps:?}");
    let last = *steps.last().unwrap();
    assert!((3.7..=4.3).contains(&last), "{steps:?}");
}

#[test]
fn dp_refuses_oversized_frontier() {
    let g = ChimeraGraph::hole_free(6, 4).unwrap();
    let inst = generate_instance(&g, 0, &mut Seed(0).rng()).unwrap();
    let err = solve_dp_exact(&inst, &DpOptions::default()).unwrap_err();
    assert!(matches!(err, jchaos_core::Error::Resource { required_bytes, .. } if required_bytes > 1 << 24));
}

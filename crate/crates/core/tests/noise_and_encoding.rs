use jchaos_core::chimera::{ChimeraGraph, LogicalGraph};
use jchaos_core::instance::{apply_gauge, generate_instance, Gauge};
use jchaos_core::qac::{broadcast, decode_majority, encode};
use jchaos_core::solvers::{solve_dp_exact, DpOptions};
use jchaos_core::Seed;

fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn encoded_copy_noise_averages_down() {
    let cg = ChimeraGraph::hole_free(1, 4).unwrap();
    let lg = LogicalGraph::from_chimera(&cg).unwrap();
    let logical = generate_instance(&lg, 0, &mut Seed(0).rng()).unwrap();
    let enc = encode(&logical, 0.3, 1.0, &lg, &cg).unwrap();
    let eta = 0.05;
    let n = 100_000;
    let mut rng = Seed(3).rng();
    let mut means = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, draw) = enc.noisy(eta, false, &mut rng).unwrap();
        assert_eq!(draw.dj.len(), 3);
        means.push(draw.dj.values().sum::<f64>() / 3.0);
    }
    let mu = means.iter().sum::<f64>() / n as f64;
    let sd = (means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let target = eta / 3f64.sqrt();
    assert!((sd / target - 1.0).abs() < 0.05, "sd {sd} vs {target}");
}

#[test]
fn gauge_and_noise_commute_in_distribution() {
    let g = ChimeraGraph::hole_free(2, 4).unwrap();
    let inst = generate_instance(&g, 5, &mut Seed(5).rng()).unwrap();
    let gauge = Gauge::random(inst.num_slots(), &mut Seed(6).rng());
    let probe: Vec<i8> = (0..inst.num_slots()).map(|q| if q % 3 == 0 { -1 } else { 1 }).collect();
    let gauged_probe: Vec<i8> = probe.iter().zip(&gauge.0).map(|(s, a)| s * a).collect();
    let n = 3000;
    let mut rng_a = Seed(7).rng();
    let mut rng_b = Seed(8).rng();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, _) = inst.perturb(0.1, false, &mut rng_a).unwrap();
        a.push(apply_gauge(&p, &gauge).unwrap().energy(&gauged_probe).unwrap().value);
        let gi = apply_gauge(&inst, &gauge).unwrap();
        let (p, _) = gi.perturb(0.1, false, &mut rng_b).unwrap();
        b.push(p.energy(&gauged_probe).unwrap().value);
    }
    let d = ks_statistic(&mut a, &mut b);
    // 0.1% critical value for two samples of equal size
    let crit = 1.95 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "KS statistic {d} >= {crit}");
}

#[test]
fn logical_ground_state_survives_encoding_round_trip() {
    for l in 1..=3 {
        let cg = ChimeraGraph::hole_free(l, 4).unwrap();
        let lg = LogicalGraph::from_chimera(&cg).unwrap();
        let logical = generate_instance(&lg, l as u64, &mut Seed(l as u64).rng()).unwrap();
        let ground = solve_dp_exact(&logical, &DpOptions::default()).unwrap();
        let enc = encode(&logical, 0.2, 1.0, &lg, &cg).unwrap();
        let phys = enc.physical().unwrap();
        let lifted = broadcast(&ground.witness, &lg, &cg);
        let e_phys = phys.energy(&lifted).unwrap().value;
        let penalty = -0.2 * enc.penalty_coupler_count() as f64;
        assert!((e_phys - (3.0 * ground.energy.value() + penalty)).abs() < 1e-9);
        let decoded = decode_majority(&[lifted], &lg, Seed(0)).unwrap();
        assert!(decoded.usable);
        assert_eq!(logical.energy(&decoded.configs[0]).unwrap().scaled, ground.energy.scaled());
    }
}

#[test]
fn noise_is_reproducible_from_seed() {
    let g = ChimeraGraph::hole_free(2, 4).unwrap();
    let inst = generate_instance(&g, 1, &mut Seed(1).rng()).unwrap();
    let seed = Seed(1).child("noise", 0);
    let (a, da) = inst.perturb(0.07, false, &mut seed.rng()).unwrap();
    let (b, db) = inst.perturb(0.07, false, &mut seed.rng()).unwrap();
    assert_eq!(a, b);
    assert_eq!(da, db);
    assert_eq!(a.provenance().parent.as_deref(), Some(inst.digest().as_str()));
}

//! Three operations for the static demo page. Each returns JSON text; the
//! plain functions are what the wasm exports wrap.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use jchaos_core::chimera::{ChimeraGraph, LogicalGraph};
use jchaos_core::collapse::{classical_bound, random_guess_bound, FormKind, TrialForm};
use jchaos_core::instance::generate_instance;
use jchaos_core::solvers::{is_ground, solve_dp_exact, DpOptions};
use jchaos_core::stats::{bootstrap_success, tts, GaugeCounts};
use jchaos_core::Seed;
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const QAC_ROW: [f64; 4] = [0.392, 0.069, 0.486, 1.73];
pub const C_ROW: [f64; 4] = [8.01, 0.134, 1.61, 2.12];

/// Largest size the in-browser exact solver is offered for.
pub const MAX_CHAOS_L: usize = 5;

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub l: usize,
    pub qac: f64,
    pub c: f64,
    pub classical: f64,
    pub random: f64,
}

/// log10 runs-to-solution against L for the fitted QAC and C rows, with the
/// exact-solver and random-guess reference curves.
pub fn scaling_curves(eta: f64, l_max: usize, alpha: f64) -> Result<Vec<CurvePoint>, String> {
    if !(eta >= 0.0) || l_max == 0 || l_max > 64 || !(alpha > 0.0 && alpha <= 1.0) {
        return Err("need eta >= 0, 1 <= L <= 64 and alpha in (0, 1]".into());
    }
    let q = TrialForm::new(FormKind::G1, QAC_ROW.to_vec()).map_err(|e| e.to_string())?;
    let c = TrialForm::new(FormKind::G1, C_ROW.to_vec()).map_err(|e| e.to_string())?;
    (1..=l_max)
        .map(|l| {
            let lf = l as f64;
            Ok(CurvePoint {
                l,
                qac: q.log10_tts(lf, eta).map_err(|e| e.to_string())?,
                c: c.log10_tts(lf, eta).map_err(|e| e.to_string())?,
                classical: classical_bound(lf, eta, alpha),
                random: random_guess_bound(lf, eta, alpha),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ChaosRow {
    pub eta: f64,
    pub draws: usize,
    pub wrong: usize,
    pub fraction: f64,
}

/// For one random intended instance, how often the exact ground state of a
/// noisy copy fails to be a ground state of the intended problem.
pub fn wrong_ground_fraction(l: usize, etas: &[f64], draws: usize, seed: u64) -> Result<Vec<ChaosRow>, String> {
    if l == 0 || l > MAX_CHAOS_L || draws == 0 || draws > 2000 {
        return Err(format!("need 1 <= L <= {MAX_CHAOS_L} and 1..2000 draws"));
    }
    let err = |e: jchaos_core::Error| e.to_string();
    let lg = LogicalGraph::from_chimera(&ChimeraGraph::hole_free(l, 4).map_err(err)?).map_err(err)?;
    let s = Seed(seed);
    let inst = generate_instance(&lg, seed, &mut s.child("instance", 0).rng()).map_err(err)?;
    let cert = solve_dp_exact(&inst, &DpOptions::default()).map_err(err)?;
    let mut out = Vec::new();
    for (i, &eta) in etas.iter().enumerate() {
        let mut wrong = 0;
        for d in 0..draws {
            let mut rng = s.child("noise", (i as u64) << 32 | d as u64).rng();
            let (noisy, _) = inst.perturb(eta, false, &mut rng).map_err(err)?;
            let w = solve_dp_exact(&noisy, &DpOptions::default()).map_err(err)?.witness;
            wrong += !is_ground(&inst, &cert, &w).map_err(err)? as usize;
        }
        out.push(ChaosRow {
            eta,
            draws,
            wrong,
            fraction: wrong as f64 / draws as f64,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct BootstrapView {
    pub mu: f64,
    pub mu_ci: (f64, f64),
    pub sigma: f64,
    pub chaoticity: f64,
    pub chaoticity_ci: (f64, f64),
    pub tts: Option<u64>,
}

/// Bayesian bootstrap over per-gauge success counts.
pub fn bootstrap_view(successes: &[u64], reads: u64, resamples: usize, seed: u64) -> Result<BootstrapView, String> {
    let counts = GaugeCounts::new(successes.to_vec(), reads).map_err(|e| e.to_string())?;
    let e = bootstrap_success(&counts, resamples, Seed(seed)).map_err(|e| e.to_string())?;
    Ok(BootstrapView {
        mu: e.mu,
        mu_ci: e.mu_ci,
        sigma: e.sigma,
        chaoticity: e.chaoticity,
        chaoticity_ci: e.chaoticity_ci,
        tts: tts(e.mu).runs,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = scalingCurves)]
pub fn scaling_curves_js(eta: f64, l_max: usize, alpha: f64) -> Result<String, JsError> {
    to_js(scaling_curves(eta, l_max, alpha))
}

#[wasm_bindgen(js_name = wrongGroundFraction)]
pub fn wrong_ground_fraction_js(l: usize, etas: Vec<f64>, draws: usize, seed: u64) -> Result<String, JsError> {
    to_js(wrong_ground_fraction(l, &etas, draws, seed))
}

#[wasm_bindgen(js_name = bootstrapView)]
pub fn bootstrap_view_js(successes: Vec<u64>, reads: u64, resamples: usize, seed: u64) -> Result<String, JsError> {
    to_js(bootstrap_view(&successes, reads, resamples, seed))
}

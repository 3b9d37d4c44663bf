//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function takes a potential description as JSON (the same
//! format the command-line tool reads) and returns a JSON document. The
//! `*_json` functions hold the logic and are callable from native code.

use nodal_scatter::nodal_inverse::{detect_with_floor, reconstruct_piecewise, third_derivative_profile};
use nodal_scatter::nodal_lines::{invert_line, trace_fixed_l_line, trace_fixed_l_line_at_radii};
use nodal_scatter::potentials::{evaluate, Potential};
use nodal_scatter::radial_solver::{phase_shift, SolverConfig};
use nodal_scatter::semiclassical::jwkb_phase_shift;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest number of samples any request may ask for.
const MAX_POINTS: usize = 2000;

fn parse(potential: &str) -> Result<Potential, String> {
    serde_json::from_str(potential).map_err(|e| format!("potential: {e}"))
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(format!("need a finite range with max > min, got [{lo}, {hi}]"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}"));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

#[derive(Serialize)]
struct Line {
    n: usize,
    energy: Vec<f64>,
    r: Vec<Option<f64>>,
}

/// Lines of zeros `r_n(E)` at fixed ℓ for `n = 1..=n_max`.
pub fn trace_lines_json(potential: &str, ell: f64, n_max: usize, e_min: f64, e_max: f64, points: usize) -> Result<String, String> {
    let pot = parse(potential)?;
    let energies = grid(e_min, e_max, points)?;
    if !(1..=8).contains(&n_max) {
        return Err("n_max must lie in 1..=8".into());
    }
    let cfg = SolverConfig::default();
    let cap = 60.0;
    let mut lines = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let line = trace_fixed_l_line(&pot, ell, n, &energies, cap, &cfg).map_err(|e| e.to_string())?;
        lines.push(Line {
            n,
            energy: line.points.iter().map(|p| p.energy).collect(),
            r: line.points.iter().map(|p| p.r.is_finite().then_some(p.r)).collect(),
        });
    }
    Ok(to_json(&lines))
}

#[derive(Serialize)]
struct Reconstruction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    events: Vec<(f64, f64)>,
    noise_floor: f64,
    profile_r: Vec<f64>,
    profile: Vec<f64>,
    truth_r: Vec<f64>,
    truth: Vec<f64>,
}

/// Traces the first s-wave line at radii in `[r_min, r_max]`, then detects
/// and rebuilds the steps of the potential from it.
pub fn reconstruct_json(potential: &str, r_min: f64, r_max: f64, points: usize) -> Result<String, String> {
    let pot = parse(potential)?;
    let radii = grid(r_min, r_max, points)?;
    if r_min <= 0.0 {
        return Err("r_min must be positive".into());
    }
    let line = trace_fixed_l_line_at_radii(&pot, 0.0, 1, &radii, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let inv = invert_line(&line).map_err(|e| e.to_string())?;
    let det = detect_with_floor(&inv, None).map_err(|e| e.to_string())?;
    let rec = reconstruct_piecewise(&inv, &det.events).map_err(|e| e.to_string())?;
    let profile = third_derivative_profile(&inv).map_err(|e| e.to_string())?;
    let truth_r = grid(0.0, r_max, 400)?;
    let truth = truth_r.iter().map(|&r| evaluate(&pot, r).unwrap_or(f64::NAN)).collect();
    Ok(to_json(&Reconstruction {
        breakpoints: rec.breakpoints().to_vec(),
        values: rec.values().to_vec(),
        events: det.events.iter().map(|e| (e.location, e.inferred_jump)).collect(),
        noise_floor: det.noise_floor,
        profile_r: profile.iter().map(|p| p.r).collect(),
        profile: profile.iter().map(|p| 0.5 * (p.left + p.right)).collect(),
        truth_r,
        truth,
    }))
}

#[derive(Serialize)]
struct Phases {
    k: Vec<f64>,
    exact: Vec<f64>,
    jwkb: Vec<Option<f64>>,
}

/// Exact and JWKB phase shifts of partial wave ℓ over `[k_min, k_max]`.
pub fn phase_shifts_json(potential: &str, ell: f64, k_min: f64, k_max: f64, points: usize) -> Result<String, String> {
    let pot = parse(potential)?;
    if k_min <= 0.0 {
        return Err("k_min must be positive".into());
    }
    let k = grid(k_min, k_max, points)?;
    let cfg = SolverConfig::default();
    let exact = k
        .iter()
        .map(|&k| phase_shift(&pot, ell, k, &cfg).map(|s| s.delta).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    // The JWKB phase needs a unique turning point; gaps are left where it fails.
    let jwkb = k.iter().map(|&k| jwkb_phase_shift(&pot, ell + 0.5, k).ok()).collect();
    Ok(to_json(&Phases { k, exact, jwkb }))
}

#[wasm_bindgen]
pub fn trace_lines(potential: &str, ell: f64, n_max: usize, e_min: f64, e_max: f64, points: usize) -> Result<String, JsError> {
    trace_lines_json(potential, ell, n_max, e_min, e_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reconstruct(potential: &str, r_min: f64, r_max: f64, points: usize) -> Result<String, JsError> {
    reconstruct_json(potential, r_min, r_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn phase_shifts(potential: &str, ell: f64, k_min: f64, k_max: f64, points: usize) -> Result<String, JsError> {
    phase_shifts_json(potential, ell, k_min, k_max, points).map_err(|e| JsError::new(&e))
}

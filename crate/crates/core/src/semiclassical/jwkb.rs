use crate::error::{Error, Result};
use crate::potentials::RadialPotential;
use crate::quad::{integrate, integrate_pieces, partition};
use crate::roots::brent;

const SCAN_POINTS: usize = 4000;
const QUAD_TOL: f64 = 1e-12;

fn check_args(lambda: f64, k: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite() && k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("need λ > 0 and k > 0, got λ={lambda}, k={k}")));
    }
    Ok(())
}

/// The radius where `k² - V(r) - λ²/r²` vanishes.
///
/// A logarithmic grid from deep inside the centrifugal barrier to well past
/// the support of the potential is scanned for sign changes first; anything
/// other than exactly one is an error, so callers never silently get one of
/// several classical turning points.
pub fn turning_point(potential: &dyn RadialPotential, lambda: f64, k: f64) -> Result<f64> {
    check_args(lambda, k)?;
    let f = |r: f64| k * k - potential.value(r) - (lambda / r).powi(2);
    let depth = k * k + potential.min_value().abs();
    let r_lo = 1e-2 * lambda / depth.sqrt();
    let support = potential.support_radius();
    let reach = if support.is_finite() { support } else { 100.0 * lambda / k };
    let r_hi = 2.0 * reach.max(lambda / k).max(r_lo);
    if f(r_lo) >= 0.0 {
        return Err(Error::domain(format!(
            "potential overwhelms the centrifugal barrier at r = {r_lo:e}; no inner classically forbidden region"
        )));
    }
    let mut grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| r_lo * (r_hi / r_lo).powf(i as f64 / SCAN_POINTS as f64))
        .collect();
    // Breakpoints and their immediate neighbourhoods catch sign changes that
    // happen exactly at a jump of the potential.
    for b in potential.breakpoints() {
        if b > r_lo && b < r_hi {
            grid.extend([b * (1.0 - 1e-12), b, b * (1.0 + 1e-12)]);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut brackets = Vec::new();
    let mut prev = (grid[0], f(grid[0]) > 0.0);
    for &r in &grid[1..] {
        let pos = f(r) > 0.0;
        if pos != prev.1 {
            brackets.push((prev.0, r));
        }
        prev = (r, pos);
    }
    match brackets.len() {
        1 => {
            let (a, b) = brackets[0];
            brent(f, a, b, 1e-15 * b)
        }
        0 => Err(Error::domain("no turning point between the centrifugal barrier and the scan limit")),
        _ => Err(Error::NonUniqueTurningPoint { brackets }),
    }
}

/// JWKB phase shift
/// `δ = lim_{R→∞} [∫_{r_t}^R K dr - ∫_{λ/k}^R K_free dr]`
/// with `K = sqrt(k² - V - λ²/r²)` and `K_free = sqrt(k² - λ²/r²)`.
///
/// Rewriting both integrals against the common asymptote `k` gives
/// `δ = ∫_{r_t}^∞ (K - k) dr - k r_t + λπ/2`. Up to a radius `R1` the
/// integral is done with `r = r_t + s²`, which removes the square-root
/// endpoint; beyond `R1` only `K - K_free = -V / (K + K_free)` is integrated
/// numerically and the free part is known in closed form.
pub fn jwkb_phase_shift(potential: &dyn RadialPotential, lambda: f64, k: f64) -> Result<f64> {
    check_args(lambda, k)?;
    if potential.is_identically_zero() {
        return Ok(0.0);
    }
    let rt = turning_point(potential, lambda, k)?;
    let big_k = |r: f64| (k * k - potential.value(r) - (lambda / r).powi(2)).max(0.0).sqrt();
    let free_k = |r: f64| (k * k - (lambda / r).powi(2)).max(0.0).sqrt();
    let r1 = (2.0 * rt).max(2.0 * lambda / k);
    let bps = potential.breakpoints();

    let s_max = (r1 - rt).sqrt();
    let s_breaks: Vec<f64> = bps.iter().filter(|&&b| b > rt && b < r1).map(|&b| (b - rt).sqrt()).collect();
    let inner = integrate_pieces(
        |s| {
            let r = rt + s * s;
            2.0 * s * (big_k(r) - k)
        },
        &partition(0.0, s_max, &s_breaks),
        QUAD_TOL,
        QUAD_TOL,
    )?
    .value;

    let diff = |r: f64| {
        let v = potential.value(r);
        if v == 0.0 {
            0.0
        } else {
            -v / (big_k(r) + free_k(r))
        }
    };
    let support = potential.support_radius();
    let mut outer = 0.0;
    if support > r1 {
        let end = if support.is_finite() { support } else { r1 };
        let bps_out: Vec<f64> = bps.iter().copied().filter(|&b| b > r1 && b < end).collect();
        outer += integrate_pieces(diff, &partition(r1, end, &bps_out), QUAD_TOL, QUAD_TOL)?.value;
    }
    if !support.is_finite() {
        let base = r1;
        let scale = r1;
        outer += integrate(
            |t| {
                let u = 1.0 - t;
                diff(base + scale * t / u) * scale / (u * u)
            },
            0.0,
            1.0,
            QUAD_TOL,
            QUAD_TOL,
        )?
        .value;
    }

    // F(R) = ∫_{λ/k}^R K_free dr - k R + λπ/2 - ... collected so that
    // ∫_{R}^∞ (K_free - k) dr = -λπ/2 - F(R).
    let x = lambda / (k * r1);
    let free_tail = (k * r1) * ((1.0 - x) * (1.0 + x)).sqrt() - lambda * x.acos() - k * r1;
    Ok(inner + outer - free_tail - k * rt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ClosedFormPotential, FnPotential};

    #[test]
    fn free_turning_point() {
        let z = ClosedFormPotential::Zero;
        assert!((turning_point(&z, 1.5, 3.0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(jwkb_phase_shift(&z, 1.5, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_core_turning_point() {
        // V = -v0 out to r = 5, turning point well inside.
        let w = ClosedFormPotential::SquareWell { v0: 2.0, a: 5.0 };
        let (lambda, k) = (1.5, 1.0);
        let expect = lambda / (k * k + 2.0f64).sqrt();
        assert!((turning_point(&w, lambda, k).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn free_potential_through_general_path_is_zero() {
        // A potential that is zero but not recognised as such takes the
        // quadrature path; the result must still cancel to zero.
        let z = FnPotential::new(|_| 0.0, 3.0);
        for &(l, k) in &[(0.5, 1.0), (2.5, 3.0), (10.5, 0.7)] {
            let d = jwkb_phase_shift(&z, l, k).unwrap();
            assert!(d.abs() < 1e-11, "λ={l} k={k} δ={d}");
        }
    }

    #[test]
    fn smoothed_well_has_several_turning_points() {
        let well = FnPotential::new(|r: f64| -10.0 / (1.0 + ((r - 2.0) / 0.1).exp()), 6.0);
        match turning_point(&well, 3.0, 1.0) {
            Err(Error::NonUniqueTurningPoint { brackets }) => {
                assert!(brackets.len() >= 2);
                assert!(brackets.iter().any(|b| b.0 < 2.5) && brackets.iter().any(|b| b.1 > 2.5));
            }
            other => panic!("expected non-unique turning point, got {other:?}"),
        }
        assert!(matches!(
            jwkb_phase_shift(&well, 3.0, 1.0),
            Err(Error::NonUniqueTurningPoint { .. })
        ));
    }
}

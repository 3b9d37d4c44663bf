use super::{
    abel_invert_fixed_energy, abel_invert_fixed_l, reconstruct_low_k_phase, PhaseShiftTable, TurningPointCurve,
};
use crate::error::{Error, Result};
use crate::potentials::TabulatedPotential;
use serde::{Deserialize, Serialize};

/// Number of completion momenta placed uniformly on `(0, k0)`.
const LOW_K_POINTS: usize = 96;

/// Output of [`mixed_jwkb_invert`] with the intermediate curves kept for
/// inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedJwkbResult {
    pub potential: TabulatedPotential,
    pub fixed_energy_curve: TurningPointCurve,
    pub fixed_ell_curve: TurningPointCurve,
    /// `(k, δ(ℓ0, k))` for `k < k0` as used by the fixed-ℓ inversion.
    pub low_k_phase: Vec<(f64, f64)>,
    /// Momenta below this were assigned `δ = 0` because their turning radius
    /// lies beyond the fixed-energy data (finite-range assumption).
    pub zero_phase_below: Option<f64>,
    /// `r(λ0, k0)` from the fixed-energy branch.
    pub seam_radius: f64,
    /// Same radius from the fixed-ℓ branch.
    pub seam_radius_fixed_ell: f64,
    /// `|V_E(r0) - V_ℓ(r0)| / (|V_E(r0)| + 0.01)`.
    pub seam_residual: f64,
}

/// Potential from mixed JWKB phase shifts.
///
/// 1. The fixed-energy branch gives `r(λ, k0)` and so `V` for `r ≥ r0`.
/// 2. That curve gives `δ(ℓ0, k)` for `k < k0`.
/// 3. The completed fixed-ℓ branch gives `r(λ0, k)` and so `V` for `r ≤ r0`.
///
/// Errors carry the name of the stage that failed.
pub fn mixed_jwkb_invert(table: &PhaseShiftTable) -> Result<MixedJwkbResult> {
    let k0 = table.k0;
    let lambda0 = table.lambda0();
    let outer = abel_invert_fixed_energy(&table.fixed_e, k0).map_err(|e| e.in_stage("fixed-energy inversion"))?;
    if (outer.parameter[0] - lambda0).abs() > 1e-9 * lambda0 {
        return Err(Error::Coverage(format!(
            "fixed-energy branch starts at λ = {}, not at λ0 = {lambda0}",
            outer.parameter[0]
        ))
        .in_stage("fixed-energy inversion"));
    }

    let mut low_k = Vec::with_capacity(LOW_K_POINTS);
    let mut zero_phase_below = None;
    let mut covered = false;
    for j in 1..LOW_K_POINTS {
        let k = k0 * j as f64 / LOW_K_POINTS as f64;
        match reconstruct_low_k_phase(&outer, lambda0, &[k]) {
            Ok(d) => {
                covered = true;
                low_k.push((k, d[0]));
            }
            Err(Error::Coverage(_)) if !covered => {
                zero_phase_below = Some(k);
                low_k.push((k, 0.0));
            }
            Err(e) => return Err(e.in_stage("low-k completion")),
        }
    }
    let inner = abel_invert_fixed_l(&table.fixed_l, &low_k, lambda0).map_err(|e| e.in_stage("fixed-ell inversion"))?;

    let seam_radius = outer.radii[0];
    let seam_radius_fixed_ell = inner.radii[0];
    let v_outer = outer.potential_samples();
    let v_inner = inner.potential_samples();
    let v_e = {
        let x = lambda0 / (k0 * seam_radius);
        k0 * k0 * (1.0 - x) * (1.0 + x)
    };
    let v_l = {
        let k = inner.parameter[0];
        let x = lambda0 / (k * seam_radius_fixed_ell);
        k * k * (1.0 - x) * (1.0 + x)
    };
    let seam_residual = (v_e - v_l).abs() / (v_e.abs() + 0.01);

    // Inner samples strictly inside the seam, then the outer branch.
    let mut r = Vec::with_capacity(v_inner.len() + v_outer.len());
    let mut v = Vec::with_capacity(r.capacity());
    for &(ri, vi) in v_inner.iter().filter(|s| s.0 < seam_radius * (1.0 - 1e-9)) {
        r.push(ri);
        v.push(vi);
    }
    for &(ri, vi) in &v_outer {
        if r.last().is_none_or(|&last| ri > last) {
            r.push(ri);
            v.push(vi);
        }
    }
    let potential = TabulatedPotential::new(r, v).map_err(|e| e.in_stage("stitch"))?;
    Ok(MixedJwkbResult {
        potential,
        fixed_energy_curve: outer,
        fixed_ell_curve: inner,
        low_k_phase: low_k,
        zero_phase_below,
        seam_radius,
        seam_radius_fixed_ell,
        seam_residual,
    })
}

//! Semiclassical and first-order (Born) inversions of phase-shift data.
//!
//! Angular momentum enters through `λ = ℓ + 1/2` throughout this module and
//! energies are `E = k²`.
//!
//! The JWKB side works on turning-point curves: at fixed energy the curve
//! `λ ↦ r(λ, k0)` is an Abel transform of `dδ/dλ`, at fixed ℓ the curve
//! `k ↦ r(λ0, k)` is an Abel transform of `dδ/dk`. Each curve determines the
//! potential on its own radial range, and [`mixed_jwkb_invert`] chains the
//! two through the low-momentum completion of the fixed-ℓ data.
//!
//! The Born side works with the sine transform `g(q) = ∫ sin(qr) r V(r) dr`.

mod abel;
mod born;
mod jwkb;
mod mixed;
mod tails;

pub use abel::{
    abel_invert_fixed_energy, abel_invert_fixed_l, fixed_ell_forward, reconstruct_low_k_phase, sabatier_forward,
    FixedEnergyPhases,
};
pub use born::{
    born_extend_and_invert, born_fixed_energy_phases, born_g_from_fixed_energy, born_g_from_potential, born_invert,
    born_s_wave_phase, BornInversion, OscillatoryTerm,
};
pub use jwkb::{jwkb_phase_shift, turning_point};
pub use mixed::{mixed_jwkb_invert, MixedJwkbResult};

use crate::error::{Error, Result};
use crate::potentials::RadialPotential;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Which family of phase shifts a curve or sample set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// `λ` varies, `k = k0` fixed.
    FixedEnergy { k0: f64 },
    /// `k` varies, `λ = λ0` fixed.
    FixedEll { lambda0: f64 },
}

/// Evidence that the two branches of a [`PhaseShiftTable`] are continuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCertificate {
    /// Largest jump between adjacent fixed-ℓ samples.
    pub max_step_fixed_l: f64,
    /// Largest jump between adjacent fixed-energy samples.
    pub max_step_fixed_e: f64,
    /// `|δ_fixed_l(k0) - δ_fixed_e(λ0)|` when both branches start at the corner.
    pub corner_mismatch: Option<f64>,
}

/// Largest step between adjacent phase samples that still counts as continuous.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_2;

/// Phase shifts on the mixed domain `{ℓ = ℓ0, k ≥ k0} ∪ {k = k0, λ ≥ λ0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftTable {
    pub ell0: f64,
    pub k0: f64,
    /// `(k, δ(ℓ0, k))`, k ascending from k0.
    pub fixed_l: Vec<(f64, f64)>,
    /// `(λ, δ(λ - 1/2, k0))`, λ ascending from λ0.
    pub fixed_e: Vec<(f64, f64)>,
    pub continuity: ContinuityCertificate,
}

fn max_step(samples: &[(f64, f64)], what: &str) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::NonMonotone {
                index: i + 1,
                reason: format!("{what} abscissae must be strictly increasing"),
            });
        }
        worst = worst.max((w[1].1 - w[0].1).abs());
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
        return Err(Error::domain(format!("{what} contains non-finite samples")));
    }
    if worst > MAX_PHASE_STEP {
        return Err(Error::domain(format!(
            "{what} jumps by {worst:.3} rad between adjacent samples; unwrap the phase first"
        )));
    }
    Ok(worst)
}

impl PhaseShiftTable {
    /// Validates ordering and continuity of both branches.
    pub fn new(ell0: f64, k0: f64, fixed_l: Vec<(f64, f64)>, fixed_e: Vec<(f64, f64)>) -> Result<Self> {
        if !(ell0 > -0.5 && k0 > 0.0 && k0.is_finite()) {
            return Err(Error::domain(format!("need ℓ0 > -1/2 and k0 > 0, got ℓ0={ell0}, k0={k0}")));
        }
        let lambda0 = ell0 + 0.5;
        let tol = 1e-9 * k0.max(lambda0);
        if fixed_l.first().is_some_and(|s| s.0 < k0 - tol) {
            return Err(Error::domain("fixed-ℓ branch starts below k0"));
        }
        if fixed_e.first().is_some_and(|s| s.0 < lambda0 - tol) {
            return Err(Error::domain("fixed-energy branch starts below λ0"));
        }
        let max_step_fixed_l = max_step(&fixed_l, "fixed-ℓ branch")?;
        let max_step_fixed_e = max_step(&fixed_e, "fixed-energy branch")?;
        let corner_mismatch = match (fixed_l.first(), fixed_e.first()) {
            (Some(a), Some(b)) if (a.0 - k0).abs() <= tol && (b.0 - lambda0).abs() <= tol => Some((a.1 - b.1).abs()),
            _ => None,
        };
        Ok(PhaseShiftTable {
            ell0,
            k0,
            fixed_l,
            fixed_e,
            continuity: ContinuityCertificate {
                max_step_fixed_l,
                max_step_fixed_e,
                corner_mismatch,
            },
        })
    }

    /// Builds a table from JWKB phase shifts of a known potential.
    pub fn from_jwkb(
        potential: &dyn RadialPotential,
        ell0: f64,
        k0: f64,
        ks: &[f64],
        lambdas: &[f64],
    ) -> Result<Self> {
        let lambda0 = ell0 + 0.5;
        let fixed_l = ks
            .iter()
            .map(|&k| jwkb_phase_shift(potential, lambda0, k).map(|d| (k, d)))
            .collect::<Result<Vec<_>>>()?;
        let fixed_e = lambdas
            .iter()
            .map(|&l| jwkb_phase_shift(potential, l, k0).map(|d| (l, d)))
            .collect::<Result<Vec<_>>>()?;
        PhaseShiftTable::new(ell0, k0, fixed_l, fixed_e)
    }

    pub fn lambda0(&self) -> f64 {
        self.ell0 + 0.5
    }
}

/// Turning radii along one branch, `r(λ, k0)` or `r(λ0, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointCurve {
    pub branch: Branch,
    /// λ for the fixed-energy branch, k for the fixed-ℓ branch.
    pub parameter: Vec<f64>,
    pub radii: Vec<f64>,
    /// Free turning radii `λ/k`.
    pub free_reference: Vec<f64>,
    /// Estimated error of each radius from truncated tails (zero when exact).
    pub tail_error: Vec<f64>,
    /// Whether the curve has the expected monotonicity (increasing in λ,
    /// decreasing in k). A `false` here means the single-turning-point
    /// hypothesis behind the inversion is violated by the data.
    pub monotone: bool,
}

impl TurningPointCurve {
    pub(crate) fn assemble(branch: Branch, parameter: Vec<f64>, radii: Vec<f64>, tail_error: Vec<f64>) -> Self {
        let free_reference = parameter
            .iter()
            .map(|&p| match branch {
                Branch::FixedEnergy { k0 } => p / k0,
                Branch::FixedEll { lambda0 } => lambda0 / p,
            })
            .collect();
        let monotone = radii.windows(2).all(|w| match branch {
            Branch::FixedEnergy { .. } => w[1] > w[0],
            Branch::FixedEll { .. } => w[1] < w[0],
        });
        TurningPointCurve {
            branch,
            parameter,
            radii,
            free_reference,
            tail_error,
            monotone,
        }
    }

    /// Exact turning radii of a known potential along a branch.
    pub fn from_potential(potential: &dyn RadialPotential, branch: Branch, parameter: &[f64]) -> Result<Self> {
        let radii = parameter
            .iter()
            .map(|&p| match branch {
                Branch::FixedEnergy { k0 } => turning_point(potential, p, k0),
                Branch::FixedEll { lambda0 } => turning_point(potential, lambda0, p),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(branch, parameter.to_vec(), radii, vec![0.0; parameter.len()]))
    }

    /// Builds a curve from explicit samples, checking positivity and ordering.
    pub fn from_samples(branch: Branch, parameter: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if parameter.len() != radii.len() || parameter.len() < 2 {
            return Err(Error::domain("turning-point curve needs at least two (parameter, radius) pairs"));
        }
        if let Some(i) = parameter.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone {
                index: i + 1,
                reason: "curve parameter must be strictly increasing".into(),
            });
        }
        if parameter.iter().chain(&radii).any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::domain("curve parameters and radii must be positive and finite"));
        }
        let n = parameter.len();
        Ok(Self::assemble(branch, parameter, radii, vec![0.0; n]))
    }

    /// `(r, V(r))` implied by the curve, sorted by radius.
    ///
    /// Fixed energy: `V = k0² (1 - (λ / (k0 r))²)`. Fixed ℓ: `V = k² - λ0²/r²`.
    pub fn potential_samples(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .parameter
            .iter()
            .zip(&self.radii)
            .map(|(&p, &r)| match self.branch {
                Branch::FixedEnergy { k0 } => {
                    let x = p / (k0 * r);
                    (r, k0 * k0 * (1.0 - x) * (1.0 + x))
                }
                Branch::FixedEll { lambda0 } => {
                    let x = lambda0 / (p * r);
                    (r, p * p * (1.0 - x) * (1.0 + x))
                }
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Where a sine transform came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BornSource {
    FromPotential,
    FromFixedEData,
    ExtendedByFixedLData,
}

/// Samples of `g(q) = ∫₀^∞ sin(qr) r V(r) dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornTransform {
    pub q_grid: Vec<f64>,
    pub g: Vec<f64>,
    pub source: BornSource,
}

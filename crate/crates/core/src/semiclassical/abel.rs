//! Abel-type transforms between phase shifts and turning-point curves.

use super::tails::{integrate_to_infinity, PowerTail};
use super::{Branch, TurningPointCurve};
use crate::error::{Error, Result};
use crate::interp::{CubicSpline, SmoothingSpline};
use crate::quad::{integrate, integrate_pieces, partition};
use crate::roots::brent;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

const TOL: f64 = 1e-13;
/// A tail whose estimated error exceeds this fraction of the result is fatal.
const MAX_TAIL_FRACTION: f64 = 0.1;

fn fixed_energy_k0(curve: &TurningPointCurve) -> Result<f64> {
    match curve.branch {
        Branch::FixedEnergy { k0 } => Ok(k0),
        Branch::FixedEll { .. } => Err(Error::domain("expected a fixed-energy turning-point curve")),
    }
}

fn split_samples(samples: &[(f64, f64)], needed: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.len() < needed {
        return Err(Error::Resolution {
            points: samples.len(),
            needed,
        });
    }
    Ok(samples.iter().copied().unzip())
}

/// `∫_T^∞ f(t) dt` through `t = T + s/(1-s)`.
fn integrate_t_tail<F: Fn(f64) -> f64>(f: F, t0: f64) -> Result<f64> {
    integrate(
        |s| {
            let u = 1.0 - s;
            f(t0 + s / u) / (u * u)
        },
        0.0,
        1.0,
        TOL,
        1e-10,
    )
    .map(|q| q.value)
}

/// Phase shifts at fixed energy computed from a turning-point curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedEnergyPhases {
    pub k0: f64,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    /// Estimated contribution missed or mis-modelled beyond the last sample.
    pub tail_error: Vec<f64>,
    /// Set when `ln(r/r_free)` decays too slowly for the integral to converge;
    /// the phases then cover the sampled range only.
    pub divergent: bool,
}

/// `δ(λ, k0) = ∫_λ^∞ sqrt(λ'² - λ²) d/dλ' ln(r/r_free) dλ'`.
///
/// The curve is interpolated by a natural cubic spline of `u = ln(r k0 / λ)`;
/// past the last sample `u` follows a power law fitted on the last decade.
pub fn sabatier_forward(curve: &TurningPointCurve) -> Result<FixedEnergyPhases> {
    let k0 = fixed_energy_k0(curve)?;
    let lam = &curve.parameter;
    if lam.len() < 4 {
        return Err(Error::Resolution {
            points: lam.len(),
            needed: 4,
        });
    }
    let u: Vec<f64> = lam.iter().zip(&curve.radii).map(|(&l, &r)| (r * k0 / l).ln()).collect();
    let spline = CubicSpline::natural(lam.clone(), u.clone())?;
    let lam_end = *lam.last().unwrap();
    let u_end = *u.last().unwrap();
    let tail = PowerTail::fit(lam, &u, u_end);
    let divergent = tail.is_some_and(|t| t.p <= 1.0);

    let mut delta = Vec::with_capacity(lam.len());
    let mut tail_error = Vec::with_capacity(lam.len());
    for &l in lam {
        let t_end = (lam_end / l).acosh();
        let knots: Vec<f64> = lam.iter().filter(|&&x| x > l && x < lam_end).map(|&x| (x / l).acosh()).collect();
        let data = integrate_pieces(
            |t: f64| {
                let sh = t.sinh();
                l * l * sh * sh * spline.derivative(l * t.cosh())
            },
            &partition(0.0, t_end, &knots),
            TOL,
            1e-12,
        )?
        .value;
        let (extra, err) = match tail {
            Some(tl) if !divergent => {
                let v = integrate_to_infinity(
                    |x| ((x - l) * (x + l)).max(0.0).sqrt() * tl.derivative(x),
                    lam_end,
                    TOL,
                )?;
                (v, 0.1 * v.abs())
            }
            _ if u_end != 0.0 => {
                // No usable model: report what a 1/λ² decay would have added.
                let crude = PowerTail {
                    c: u_end * lam_end * lam_end,
                    p: 2.0,
                };
                let v = integrate_to_infinity(
                    |x| ((x - l) * (x + l)).max(0.0).sqrt() * crude.derivative(x),
                    lam_end,
                    TOL,
                )?;
                (0.0, v.abs())
            }
            _ => (0.0, 0.0),
        };
        delta.push(data + extra);
        tail_error.push(err);
    }
    Ok(FixedEnergyPhases {
        k0,
        lambda: lam.clone(),
        delta,
        tail_error,
        divergent,
    })
}

/// Turning radii `r(λ, k0)` from fixed-energy phase shifts `(λ, δ)`:
/// `ln(r k0/λ) = (2/π) ∫_λ^∞ δ'(λ') / sqrt(λ'² - λ²) dλ'`.
///
/// `δ'` is the derivative of a GCV smoothing spline through the samples and
/// the integral is taken in `t` with `λ' = λ cosh t`. Beyond the table `δ`
/// is continued by a power law fitted on the last decade; if that fit is not
/// possible the missing piece is only estimated, and a tail error above 10%
/// of the curve's scale is an error.
pub fn abel_invert_fixed_energy(samples: &[(f64, f64)], k0: f64) -> Result<TurningPointCurve> {
    if !(k0 > 0.0) {
        return Err(Error::domain("k0 must be positive"));
    }
    let (lam, del) = split_samples(samples, 5)?;
    if lam[0] <= 0.0 {
        return Err(Error::domain("λ samples must be positive"));
    }
    let spline = SmoothingSpline::fit_gcv(&lam, &del)?.spline;
    let lam_end = *lam.last().unwrap();
    let anchor = spline.eval(lam_end);
    let tail = PowerTail::fit(&lam, &del, anchor).filter(|t| t.p > 0.0);

    let mut u = Vec::with_capacity(lam.len());
    let mut err = Vec::with_capacity(lam.len());
    for &l in &lam {
        let t_end = (lam_end / l).acosh();
        let knots: Vec<f64> = lam.iter().filter(|&&x| x > l && x < lam_end).map(|&x| (x / l).acosh()).collect();
        let data = integrate_pieces(
            |t: f64| spline.derivative(l * t.cosh()),
            &partition(0.0, t_end, &knots),
            TOL,
            1e-12,
        )?
        .value;
        let (extra, e) = match tail {
            Some(tl) => {
                let v = integrate_t_tail(|t| tl.derivative(l * t.cosh()), t_end)?;
                (v, 0.1 * v.abs())
            }
            None if anchor != 0.0 => {
                let crude = PowerTail {
                    c: anchor * lam_end * lam_end,
                    p: 2.0,
                };
                let v = integrate_t_tail(|t| crude.derivative(l * t.cosh()), t_end)?;
                (0.0, v.abs())
            }
            None => (0.0, 0.0),
        };
        u.push(FRAC_2_PI * (data + extra));
        err.push(FRAC_2_PI * e);
    }
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = err.iter().fold(0.0f64, |m, x| m.max(*x));
    if worst > 0.0 && worst > MAX_TAIL_FRACTION * scale {
        return Err(Error::Truncation {
            relative: if scale > 0.0 { worst / scale } else { f64::INFINITY },
        });
    }
    let radii: Vec<f64> = lam.iter().zip(&u).map(|(&l, &x)| l / k0 * x.exp()).collect();
    let tail_error = radii.iter().zip(&err).map(|(r, e)| r * e).collect();
    Ok(TurningPointCurve::assemble(Branch::FixedEnergy { k0 }, lam, radii, tail_error))
}

/// Forward transform along the fixed-ℓ branch:
/// `δ(λ0, k) = -∫_0^k k' f(k') / sqrt(k² - k'²) dk'` with `f = r(λ0,k) - λ0/k`,
/// evaluated as `-k ∫_0^{π/2} f(k sin θ) sin θ dθ`.
///
/// The sign follows from substituting `h(r) = k'²` in the JWKB phase
/// integral: a repulsive potential pushes the turning point out (`f > 0`)
/// and gives a negative phase.
///
/// `f` is taken to vanish at `k = 0` (finite-range potentials) and is
/// interpolated by a natural cubic spline between there and the samples.
pub fn fixed_ell_forward(curve: &TurningPointCurve) -> Result<Vec<(f64, f64)>> {
    let lambda0 = match curve.branch {
        Branch::FixedEll { lambda0 } => lambda0,
        Branch::FixedEnergy { .. } => return Err(Error::domain("expected a fixed-ℓ turning-point curve")),
    };
    let mut ks = vec![0.0];
    let mut fs = vec![0.0];
    for (&k, &r) in curve.parameter.iter().zip(&curve.radii) {
        ks.push(k);
        fs.push(r - lambda0 / k);
    }
    let spline = CubicSpline::natural(ks, fs)?;
    curve
        .parameter
        .iter()
        .map(|&k| {
            let knots: Vec<f64> = curve.parameter.iter().filter(|&&x| x < k).map(|&x| (x / k).asin()).collect();
            let v = integrate_pieces(
                |th: f64| {
                    let s = th.sin();
                    spline.eval(k * s) * s
                },
                &partition(0.0, FRAC_PI_2, &knots),
                TOL,
                1e-12,
            )?
            .value;
            Ok((k, -k * v))
        })
        .collect()
}

/// Turning radii `r(λ0, k)` on the fixed-ℓ branch:
/// `r - λ0/k = -(2/π) ∫_0^k δ'(k') / sqrt(k² - k'²) dk'`, the inverse of
/// [`fixed_ell_forward`].
///
/// `branch` holds `(k, δ(ℓ0, k))` for `k ≥ k0` and `low_k` the completion on
/// `[0, k0)`; `δ(0) = 0` is added when the completion does not start at zero.
/// The integral is taken in `θ` with `k' = k sin θ`.
pub fn abel_invert_fixed_l(
    branch: &[(f64, f64)],
    low_k: &[(f64, f64)],
    lambda0: f64,
) -> Result<TurningPointCurve> {
    if !(lambda0 > 0.0) {
        return Err(Error::domain("λ0 must be positive"));
    }
    let k0 = branch
        .first()
        .ok_or_else(|| Error::Coverage("fixed-ℓ branch is empty".into()))?
        .0;
    if low_k.is_empty() && k0 > 0.0 {
        return Err(Error::Coverage(format!(
            "missing low-k completion: δ(ℓ0, k) is needed on [0, {k0})"
        )));
    }
    let mut combined: Vec<(f64, f64)> = low_k
        .iter()
        .copied()
        .filter(|&(k, _)| k >= 0.0 && k < k0 * (1.0 - 1e-12))
        .collect();
    if combined.first().is_none_or(|s| s.0 > 0.0) {
        combined.insert(0, (0.0, 0.0));
    }
    combined.extend_from_slice(branch);
    let (ks, ds) = split_samples(&combined, 5)?;
    let spline = SmoothingSpline::fit_gcv(&ks, &ds)?.spline;

    let mut params = Vec::with_capacity(branch.len());
    let mut radii = Vec::with_capacity(branch.len());
    for &(k, _) in branch {
        let knots: Vec<f64> = ks.iter().filter(|&&x| x > 0.0 && x < k).map(|&x| (x / k).asin()).collect();
        let f = integrate_pieces(
            |th: f64| spline.derivative(k * th.sin()),
            &partition(0.0, FRAC_PI_2, &knots),
            TOL,
            1e-12,
        )?
        .value;
        let r = lambda0 / k - FRAC_2_PI * f;
        if !(r > 0.0) {
            return Err(Error::Reconstruction {
                location: lambda0 / k,
                reason: format!("non-positive turning radius {r} at k = {k}"),
            });
        }
        params.push(k);
        radii.push(r);
    }
    let n = params.len();
    Ok(TurningPointCurve::assemble(
        Branch::FixedEll { lambda0 },
        params,
        radii,
        vec![0.0; n],
    ))
}

/// Fixed-ℓ phase shifts below `k0` from the fixed-energy turning-point curve:
///
/// `δ(ℓ0, k) = ∫_{λ(k)}^∞ sqrt(k² - k0² + (λ² - λ0²)/r(λ,k0)²) r'(λ) dλ
///             - ∫_{λ0 k0/k}^∞ sqrt(k² - k0² λ0²/λ²) / k0 dλ`,
///
/// where `λ(k)` is the root of the radicand. This is the JWKB phase of the
/// potential implied by the curve; the curve is treated as free beyond its
/// last sample, which makes the large-λ parts of both integrals cancel in
/// closed form.
pub fn reconstruct_low_k_phase(curve: &TurningPointCurve, lambda0: f64, ks: &[f64]) -> Result<Vec<f64>> {
    let k0 = fixed_energy_k0(curve)?;
    let lam = &curve.parameter;
    if lam.len() < 4 {
        return Err(Error::Resolution {
            points: lam.len(),
            needed: 4,
        });
    }
    if lam[0] > lambda0 * (1.0 + 1e-9) {
        return Err(Error::Coverage(format!(
            "curve starts at λ = {} above λ0 = {lambda0}",
            lam[0]
        )));
    }
    let u: Vec<f64> = lam.iter().zip(&curve.radii).map(|(&l, &r)| (r * k0 / l).ln()).collect();
    let spline = CubicSpline::natural(lam.clone(), u)?;
    let lam_end = *lam.last().unwrap();
    let radius = |l: f64| l / k0 * spline.eval(l).exp();
    let r_end = radius(lam_end);

    ks.iter()
        .map(|&k| {
            if !(k > 0.0 && k <= k0 * (1.0 + 1e-12)) {
                return Err(Error::domain(format!("low-k completion needs 0 < k ≤ k0, got {k}")));
            }
            let radicand = |l: f64| {
                let r = radius(l);
                (k - k0) * (k + k0) + (l - lambda0) * (l + lambda0) / (r * r)
            };
            let needed = 1.2 * lambda0 * k0 / k;
            let lk = if radicand(lambda0) >= 0.0 {
                lambda0
            } else if radicand(lam_end) <= 0.0 || k * r_end <= lambda0 {
                return Err(Error::Coverage(format!(
                    "λ(k) for k = {k} lies beyond the curve; need λ_max ≳ {needed:.3}, have {lam_end}"
                )));
            } else {
                brent(radicand, lambda0, lam_end, 1e-14 * lam_end)?
            };
            let s_end = (lam_end - lk).sqrt();
            let knots: Vec<f64> = lam.iter().filter(|&&x| x > lk && x < lam_end).map(|&x| (x - lk).sqrt()).collect();
            let first = integrate_pieces(
                |s: f64| {
                    let l = lk + s * s;
                    let (u, du, _) = spline.eval3(l);
                    let r = l / k0 * u.exp();
                    let dr = r * (1.0 / l + du);
                    2.0 * s * radicand(l).max(0.0).sqrt() * dr
                },
                &partition(0.0, s_end, &knots),
                TOL,
                1e-13,
            )?
            .value;
            let x = lambda0 / (k * r_end);
            let free = k * r_end * ((1.0 - x) * (1.0 + x)).sqrt() - lambda0 * x.acos();
            Ok(first - free)
        })
        .collect()
}

//! First-order (Born) relations between phase shifts and the sine transform
//! `g(q) = ∫₀^∞ sin(qr) r V(r) dr`.

use super::{BornSource, BornTransform};
use crate::error::{Error, Result};
use crate::interp::{CubicSpline, SmoothingSpline};
use crate::potentials::{RadialPotential, TabulatedPotential};
use crate::quad::{integrate_pieces, partition};
use crate::special::{riccati, sici};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

const TOL: f64 = 1e-13;
/// Relative size of the q = 2k0 mismatch above which a warning is raised.
pub const SEAM_TOLERANCE: f64 = 0.05;
const MAX_TAIL_TERMS: usize = 8;

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn check_grid(q: &[f64]) -> Result<()> {
    if q.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::domain("momenta must be finite and non-negative"));
    }
    if let Some(i) = q.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotone {
            index: i + 1,
            reason: "momentum grid must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Wynn ε extrapolation of a sequence of partial sums.
fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = *sums.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let e = if d == 0.0 { f64::INFINITY } else { prev[i + 1] + 1.0 / d };
            next.push(e);
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            match cur.last() {
                Some(v) if v.is_finite() => best = *v,
                _ => break,
            }
        }
    }
    best
}

/// `∫₀^∞ f(r) dr` for an integrand oscillating with half period `half`.
///
/// Up to the support of the potential the integral is split at the zeros
/// `jπ/q` and at the breakpoints. Potentials without finite support continue
/// half period by half period and the partial sums are accelerated with
/// Wynn's ε algorithm.
fn oscillatory<F: Fn(f64) -> f64>(f: F, half: f64, potential: &dyn RadialPotential) -> Result<f64> {
    let support = potential.support_radius();
    let bps = potential.breakpoints();
    let finite_end = if support.is_finite() {
        support
    } else {
        bps.last().copied().unwrap_or(0.0).max(half)
    };
    let mut cuts: Vec<f64> = bps.iter().copied().filter(|&b| b > 0.0 && b < finite_end).collect();
    let zeros = (finite_end / half).floor() as usize;
    cuts.extend((1..=zeros).map(|j| j as f64 * half).filter(|&z| z < finite_end));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let head = integrate_pieces(&f, &partition(0.0, finite_end, &cuts), TOL, 1e-13)?.value;
    if support.is_finite() {
        return Ok(head);
    }
    let mut start = finite_end;
    let mut end = ((finite_end / half).floor() + 1.0) * half;
    let mut sums = vec![head];
    let mut total = head;
    for n in 0..100_000 {
        total += integrate_pieces(&f, &[start, end], TOL, 1e-13)?.value;
        sums.push(total);
        start = end;
        end += half;
        if n >= 10 && n % 10 == 0 {
            let tail = &sums[sums.len().saturating_sub(21)..];
            let a = wynn_epsilon(&tail[..tail.len() - 2]);
            let b = wynn_epsilon(tail);
            if (a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-15 {
                return Ok(b);
            }
        }
    }
    Err(Error::NoConvergence("oscillatory tail did not converge".into()))
}

/// `g(q) = ∫₀^∞ sin(qr) r V(r) dr` on the given momenta.
pub fn born_g_from_potential(potential: &dyn RadialPotential, q_grid: &[f64]) -> Result<BornTransform> {
    check_grid(q_grid)?;
    let g = q_grid
        .iter()
        .map(|&q| {
            if q == 0.0 || potential.is_identically_zero() {
                return Ok(0.0);
            }
            oscillatory(|r| (q * r).sin() * r * potential.value(r), PI / q, potential)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BornTransform {
        q_grid: q_grid.to_vec(),
        g,
        source: BornSource::FromPotential,
    })
}

/// Born s-wave phase shift, `-k δ(0, k) = ∫₀^∞ sin²(kr) V(r) dr`.
pub fn born_s_wave_phase(potential: &dyn RadialPotential, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain("k must be positive"));
    }
    let i = oscillatory(|r| (k * r).sin().powi(2) * potential.value(r), PI / k, potential)?;
    Ok(-i / k)
}

/// Born phase shifts `δ_ℓ = -(1/k0) ∫ ŝ_ℓ(k0 r)² V(r) dr` for ℓ = 0..=l_max,
/// with `ŝ_ℓ` the regular Riccati–Bessel function.
pub fn born_fixed_energy_phases(potential: &dyn RadialPotential, k0: f64, l_max: usize) -> Result<Vec<f64>> {
    if !(k0 > 0.0) {
        return Err(Error::domain("k0 must be positive"));
    }
    (0..=l_max)
        .map(|l| {
            let ell = l as f64;
            let i = oscillatory(
                |r| {
                    let s = riccati(ell, k0 * r).s;
                    let s = if s.is_finite() { s } else { 0.0 };
                    s * s * potential.value(r)
                },
                PI / k0,
                potential,
            )?;
            Ok(-i / k0)
        })
        .collect()
}

/// `g(q)` for `q ≤ 2k0` from integer-ℓ Born phase shifts at `k = k0`:
/// `g(q) = -(q/k0) Σ (2ℓ+1) δ_ℓ P_ℓ(1 - q²/(2k0²))`.
pub fn born_g_from_fixed_energy(k0: f64, deltas: &[f64], q_grid: &[f64]) -> Result<BornTransform> {
    check_grid(q_grid)?;
    if !(k0 > 0.0) {
        return Err(Error::domain("k0 must be positive"));
    }
    if let Some(&q) = q_grid.iter().find(|&&q| q > 2.0 * k0 * (1.0 + 1e-12)) {
        return Err(Error::Coverage(format!(
            "fixed-energy data at k0 = {k0} determine g only up to q = {}, asked for {q}",
            2.0 * k0
        )));
    }
    let g = q_grid
        .iter()
        .map(|&q| {
            let x = (1.0 - q * q / (2.0 * k0 * k0)).max(-1.0);
            let (mut p_prev, mut p) = (0.0, 1.0);
            let mut sum = 0.0;
            for (l, &d) in deltas.iter().enumerate() {
                let lf = l as f64;
                sum += (2.0 * lf + 1.0) * d * p;
                let p_next = ((2.0 * lf + 1.0) * x * p - lf * p_prev) / (lf + 1.0);
                p_prev = p;
                p = p_next;
            }
            -q / k0 * sum
        })
        .collect();
    Ok(BornTransform {
        q_grid: q_grid.to_vec(),
        g,
        source: BornSource::FromFixedEData,
    })
}

/// One term `c cos(a q) + s sin(a q)` of the large-q model of `q g(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryTerm {
    pub frequency: f64,
    pub cos_amplitude: f64,
    pub sin_amplitude: f64,
}

/// Result of a Born inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornInversion {
    pub potential: TabulatedPotential,
    /// `(r, r V(r))` as computed, before division by r.
    pub r_v: Vec<(f64, f64)>,
    /// The transform that was inverted.
    pub transform: BornTransform,
    /// Model used for `q g(q)` beyond the last momentum.
    pub tail: Vec<OscillatoryTerm>,
    /// `|g_fixed_E(2k0) - g_fixed_ℓ(2k0)|` when the transform was extended.
    pub seam_mismatch: Option<f64>,
    pub warnings: Vec<String>,
}

fn least_squares(q: &[f64], y: &[f64], freqs: &[f64]) -> (Vec<OscillatoryTerm>, f64) {
    let cols = 2 * freqs.len();
    let m = DMatrix::from_fn(q.len(), cols, |i, j| {
        let a = freqs[j / 2];
        if j % 2 == 0 {
            (a * q[i]).cos()
        } else {
            (a * q[i]).sin()
        }
    });
    let svd = m.clone().svd(true, true);
    let coef = svd
        .solve(&DVector::from_column_slice(y), 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let res = DVector::from_column_slice(y) - &m * &coef;
    let rms = (res.norm_squared() / q.len() as f64).sqrt();
    let terms = freqs
        .iter()
        .enumerate()
        .map(|(j, &a)| OscillatoryTerm {
            frequency: a,
            cos_amplitude: coef[2 * j],
            sin_amplitude: if a == 0.0 { 0.0 } else { coef[2 * j + 1] },
        })
        .collect();
    (terms, rms)
}

/// Fits `q g(q) ≈ Σ c_j cos(a_j q) + s_j sin(a_j q)` on the upper half of
/// the momentum range. Jumps of `rV` at radii `a_j` produce exactly such
/// terms at large q; frequencies are found one at a time from the
/// periodogram of the current residual and amplitudes are refitted jointly.
fn fit_oscillatory_tail(q: &[f64], g: &[f64]) -> Vec<OscillatoryTerm> {
    let q_end = *q.last().unwrap();
    let lo = q.partition_point(|&x| x < 0.5 * q_end);
    let (qw, gw) = (&q[lo..], &g[lo..]);
    if qw.len() < 32 {
        return Vec::new();
    }
    let y: Vec<f64> = qw.iter().zip(gw).map(|(q, g)| q * g).collect();
    let y_rms = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    if y_rms < 1e-12 {
        return Vec::new();
    }
    let width = qw.last().unwrap() - qw[0];
    let dq = qw.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    let a_max = (0.9 * PI / dq).min(60.0);
    let da = PI / (2.0 * width);

    let step = qw[1] - qw[0];
    let uniform = qw.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step);
    let power = |res: &[f64], a: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        if uniform {
            // Rotate the phasor instead of calling sin/cos per sample.
            let (mut sn, mut cs) = (a * qw[0]).sin_cos();
            let (ds, dc) = (a * step).sin_cos();
            for &ri in res {
                c += ri * cs;
                s += ri * sn;
                let next = cs * dc - sn * ds;
                sn = sn * dc + cs * ds;
                cs = next;
            }
        } else {
            for (&qi, &ri) in qw.iter().zip(res) {
                let (sn, cs) = (a * qi).sin_cos();
                c += ri * cs;
                s += ri * sn;
            }
        }
        c * c + s * s
    };

    let mut freqs: Vec<f64> = Vec::new();
    let mut terms = Vec::new();
    let mut rms = y_rms;
    let mut residual = y.clone();
    for _ in 0..MAX_TAIL_TERMS {
        let steps = (a_max / da).ceil() as usize;
        let (mut best_a, mut best_p) = (0.0, -1.0);
        for i in 0..=steps {
            let a = i as f64 * da;
            let p = power(&residual, a);
            if p > best_p {
                best_a = a;
                best_p = p;
            }
        }
        // Golden-section refinement of the peak.
        let (mut a, mut b) = ((best_a - da).max(0.0), best_a + da);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut pc, mut pd) = (power(&residual, c), power(&residual, d));
        for _ in 0..60 {
            if pc > pd {
                b = d;
                d = c;
                pd = pc;
                c = b - phi * (b - a);
                pc = power(&residual, c);
            } else {
                a = c;
                c = d;
                pc = pd;
                d = a + phi * (b - a);
                pd = power(&residual, d);
            }
        }
        let mut peak = 0.5 * (a + b);
        if peak < 0.5 * da {
            peak = 0.0;
        }
        if freqs.iter().any(|&f| (f - peak).abs() < 0.25 * da) {
            break;
        }
        freqs.push(peak);
        let (t, new_rms) = least_squares(qw, &y, &freqs);
        if new_rms > 0.8 * rms {
            freqs.pop();
            break;
        }
        terms = t;
        rms = new_rms;
        residual = qw
            .iter()
            .zip(&y)
            .map(|(&qi, &yi)| yi - terms.iter().map(|t| eval_term(t, qi)).sum::<f64>())
            .collect();
        if rms < 1e-10 * y_rms {
            break;
        }
    }
    terms
}

fn eval_term(t: &OscillatoryTerm, q: f64) -> f64 {
    let (s, c) = (t.frequency * q).sin_cos();
    t.cos_amplitude * c + t.sin_amplitude * s
}

/// `∫_Q^∞ sin(qr) [c cos(aq) + s sin(aq)] / q dq`.
fn tail_integral(t: &OscillatoryTerm, q_end: f64, r: f64) -> f64 {
    let sine = |b: f64| {
        if b == 0.0 {
            0.0
        } else {
            b.signum() * (FRAC_PI_2 - sici(q_end * b.abs()).0)
        }
    };
    let cosine = |b: f64| if b == 0.0 { 0.0 } else { -sici(q_end * b.abs()).1 };
    let a = t.frequency;
    let tc = 0.5 * (sine(r + a) + sine(r - a));
    let ts = 0.5 * (cosine(r - a) - cosine(r + a));
    t.cos_amplitude * tc + t.sin_amplitude * ts
}

/// `r V(r) = (2/π) ∫₀^∞ sin(qr) g(q) dq`.
///
/// Between samples `g` is a natural cubic spline (with `g(0) = 0`), integrated
/// against `sin(qr)` by Gauss–Legendre on sub-intervals short compared with
/// the period. Past the last sample the fitted oscillatory model of
/// `q g(q)` is integrated in closed form with sine and cosine integrals,
/// which removes most of the Gibbs ringing a hard cut-off would leave next to
/// jumps of the potential.
pub fn born_invert(transform: &BornTransform, radii: &[f64]) -> Result<BornInversion> {
    let q = &transform.q_grid;
    check_grid(q)?;
    if q.len() != transform.g.len() || q.len() < 2 {
        return Err(Error::domain("sine transform needs at least two (q, g) samples"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("inversion radii must be positive"));
    }
    let (mut qs, mut gs) = (q.clone(), transform.g.clone());
    if qs[0] > 0.0 {
        qs.insert(0, 0.0);
        gs.insert(0, 0.0);
    }
    let q_end = *qs.last().unwrap();
    let spline = CubicSpline::natural(qs.clone(), gs.clone())?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);

    let mut nodes = Vec::new();
    for w in qs.windows(2) {
        let h = w[1] - w[0];
        let m = ((h * r_max / 2.0).ceil() as usize).max(1);
        let sub = h / m as f64;
        for j in 0..m {
            let c = w[0] + (j as f64 + 0.5) * sub;
            let half = 0.5 * sub;
            for (x, wt) in GL_X.iter().zip(&GL_W) {
                for sgn in [-1.0, 1.0] {
                    let qn = c + sgn * half * x;
                    nodes.push((qn, wt * half * spline.eval(qn)));
                }
            }
        }
    }
    let tail = fit_oscillatory_tail(q, &transform.g);
    let mut warnings = Vec::new();
    if tail.is_empty() && transform.g.iter().rev().take(8).any(|&g| g.abs() * q_end > 1e-6) {
        warnings.push("sine transform not decayed at the last momentum and no tail model could be fitted".into());
    }

    let mut r_v = Vec::with_capacity(radii.len());
    for &r in radii {
        let body: f64 = nodes.iter().map(|&(qn, wg)| wg * (qn * r).sin()).sum();
        let extra: f64 = tail.iter().map(|t| tail_integral(t, q_end, r)).sum();
        r_v.push((r, FRAC_2_PI * (body + extra)));
    }
    let mut sorted = r_v.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (rr, vv): (Vec<f64>, Vec<f64>) = sorted.iter().map(|&(r, rv)| (r, rv / r)).unzip();
    Ok(BornInversion {
        potential: TabulatedPotential::new(rr, vv)?,
        r_v,
        transform: transform.clone(),
        tail,
        seam_mismatch: None,
        warnings,
    })
}

/// Born inversion from fixed-energy data (`g` for `q ≤ 2k0`) extended by
/// s-wave phase shifts `(k, δ(0, k))` for `k ≥ k0` through
/// `g(2k) = -d(k δ(0,k))/dk`.
///
/// The derivative comes from a GCV smoothing spline of `k δ`. A mismatch of
/// the two pieces at `q = 2k0` larger than [`SEAM_TOLERANCE`] times the
/// largest `|g|` is reported as a warning, not an error.
pub fn born_extend_and_invert(
    fixed_e: &BornTransform,
    fixed_l: &[(f64, f64)],
    radii: &[f64],
) -> Result<BornInversion> {
    let (combined, seam_mismatch, mut warnings) = extend_transform(fixed_e, fixed_l).map_err(|e| e.in_stage("extension"))?;
    let mut out = born_invert(&combined, radii).map_err(|e| e.in_stage("transform inversion"))?;
    out.seam_mismatch = seam_mismatch;
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok(out)
}

fn extend_transform(fixed_e: &BornTransform, fixed_l: &[(f64, f64)]) -> Result<(BornTransform, Option<f64>, Vec<String>)> {
    check_grid(&fixed_e.q_grid)?;
    let q_seam = *fixed_e
        .q_grid
        .last()
        .ok_or_else(|| Error::Coverage("fixed-energy transform is empty".into()))?;
    if fixed_l.len() < 5 {
        return Err(Error::Resolution {
            points: fixed_l.len(),
            needed: 5,
        });
    }
    let ks: Vec<f64> = fixed_l.iter().map(|s| s.0).collect();
    let kd: Vec<f64> = fixed_l.iter().map(|s| s.0 * s.1).collect();
    let spline = SmoothingSpline::fit_gcv(&ks, &kd)?.spline;
    let g_ext = |k: f64| -spline.derivative(k);

    let mut warnings = Vec::new();
    let k_seam = 0.5 * q_seam;
    let seam_mismatch = if k_seam >= ks[0] * (1.0 - 1e-9) && k_seam <= *ks.last().unwrap() {
        let g_e = *fixed_e.g.last().unwrap();
        let m = (g_e - g_ext(k_seam)).abs();
        let scale = fixed_e.g.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(1e-300);
        if m > SEAM_TOLERANCE * scale {
            warnings.push(format!(
                "sine transform jumps by {m:.3e} at q = {q_seam} ({:.1}% of max |g|)",
                100.0 * m / scale
            ));
        }
        Some(m)
    } else {
        warnings.push(format!(
            "fixed-ℓ data start at k = {} and do not reach the seam k = {k_seam}",
            ks[0]
        ));
        None
    };

    let mut q_grid = fixed_e.q_grid.clone();
    let mut g = fixed_e.g.clone();
    for &k in &ks {
        let q = 2.0 * k;
        if q > q_seam * (1.0 + 1e-12) {
            q_grid.push(q);
            g.push(g_ext(k));
        }
    }
    let combined = BornTransform {
        q_grid,
        g,
        source: BornSource::ExtendedByFixedLData,
    };
    Ok((combined, seam_mismatch, warnings))
}

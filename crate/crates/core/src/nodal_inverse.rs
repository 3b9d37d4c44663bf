//! Reconstruction of piecewise-constant potentials from a single line of
//! zeros, and numerical probes of the uniqueness argument behind it.
//!
//! Along a line of zeros the inverse `E(r)` is `C²`, and its third
//! derivative jumps by `-2 E'(a) [V(a⁺) - V(a⁻)]` wherever the potential
//! jumps. The same holds for `μ(r) = (ℓ + ½)²` on fixed-energy lines, and
//! `d³r/dE³` jumps by `-2 (dr/dE)³ [V(a⁺) - V(a⁻)]` on the original line.
//! Detection therefore looks for jumps of a third derivative.
//!
//! Detection runs in two passes. A scan compares one-sided least-squares
//! fits (values and, when available, exact slopes) on either side of every
//! sample and converts their third-derivative difference into a potential
//! jump. Runs of samples whose scan statistic clears the noise floor are then
//! refined by a change-point fit: one polynomial plus truncated powers
//! `(x - a)₊^m`, `m ≥ 3`, with `a` chosen to minimise the residual.

use crate::error::{Error, Result};
use crate::nodal_lines::{invert_segment, InverseLine, InverseOf, LinePath, LinePoint, Segment, ZeroLine};
use crate::ode::{integrate, Control, OdeSystem};
use crate::potentials::{PiecewiseConstantPotential, RadialPotential};
use crate::quad;
use crate::radial_solver::{series_start, Regular, SolverConfig};
use crate::special::free_zero;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Absolute lower bound on the noise floor, in units of the potential.
pub const MIN_NOISE_FLOOR: f64 = 1e-3;

/// Fewest samples a line needs before it is scanned at all.
pub const MIN_SAMPLES: usize = 20;

/// A detected jump of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscontinuityEvent {
    /// Radius `a` of the jump.
    pub location: f64,
    /// Jump of the third derivative of the fitted curve across the event,
    /// taken in the direction of increasing abscissa (`r` for inverse lines,
    /// `E` for `r(E)` lines).
    pub jump_e3: f64,
    /// First derivative of the fitted curve at the event.
    pub slope_e1: f64,
    /// `V(a⁺) - V(a⁻)`.
    pub inferred_jump: f64,
    /// `|inferred_jump|` divided by the noise floor used for detection.
    pub confidence: f64,
}

/// Detection output together with the floor that was applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub events: Vec<DiscontinuityEvent>,
    pub noise_floor: f64,
}

/// One sample of the profile `-E'''/(2E')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub r: f64,
    /// Estimate from samples at and below `r`.
    pub left: f64,
    /// Estimate from samples at and above `r`.
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JunctionEstimate {
    /// Junction radius `r_0`.
    pub r0: f64,
    /// `V(r_0⁻) - V(r_0⁺)`.
    pub v: f64,
    /// Bare origin value: minus the sum of all other recovered jumps.
    pub v0: f64,
    /// Potential next to the origin as fitted from the high-energy tail.
    pub origin_value: f64,
    /// Largest relative disagreement among the tail estimates.
    pub residual: f64,
    pub reliable: bool,
}

/// Full reconstruction from a mixed line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedReconstruction {
    pub potential: PiecewiseConstantPotential,
    pub events: Vec<DiscontinuityEvent>,
    pub junction: JunctionEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WronskianSample {
    pub ell: f64,
    pub energy: f64,
    pub r: f64,
    /// `ψ₁'ψ₂ - ψ₁ψ₂'` at `r`.
    pub wronskian: f64,
    /// `∫₀^r ΔV ψ₁ ψ₂`.
    pub integral: f64,
    /// `|wronskian - integral|` relative to the amplitude product of the two
    /// solutions at `r`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub r: f64,
    /// Line parameter at `r` (E on fixed-ℓ points, ℓ on fixed-E points).
    pub parameter: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub kernel_diag: Vec<KernelSample>,
    pub wronskian_residual: Vec<WronskianSample>,
    /// `sup |K_r(r, r') / K(r, r)|` over the probed rectangle.
    pub volterra_norm: f64,
}

impl UniquenessProbe {
    pub fn max_identity_residual(&self) -> f64 {
        self.wronskian_residual.iter().map(|w| w.residual).fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Least-squares machinery

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    y: f64,
    dy: Option<f64>,
}

/// What curve the samples describe, which fixes how a third-derivative jump
/// turns into `V(a⁺) - V(a⁻)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    /// `y = r² E(r)`; the factor `r²` takes out the `1/r²` growth of `E`
    /// near the origin, so the fits stay accurate at small radii.
    Energy,
    /// `y = μ(r)`.
    Mu,
    /// `y = 1/r(E)²`, which is linear in E for a constant potential.
    Direct,
}

impl Route {
    /// Third-derivative jump and first derivative of the underlying curve at
    /// `x` from derivatives `[y, y', y'', y''']` on either side.
    fn jump_and_slope(self, x: f64, left: &[f64; 4], right: &[f64; 4]) -> (f64, f64) {
        let d1 = 0.5 * (left[1] + right[1]);
        let d0 = 0.5 * (left[0] + right[0]);
        match self {
            Route::Energy => ((right[3] - left[3]) / (x * x), (d1 - 2.0 * d0 / x) / (x * x)),
            Route::Mu => (right[3] - left[3], d1),
            // r = G^{-1/2}: Δr''' = -½ G^{-3/2} ΔG''' and r' = -½ G^{-3/2} G'.
            Route::Direct => {
                let g = d0.powf(-1.5);
                (-0.5 * g * (right[3] - left[3]), -0.5 * g * d1)
            }
        }
    }

    fn inferred(self, jump: f64, slope: f64) -> f64 {
        match self {
            Route::Energy | Route::Mu => -jump / (2.0 * slope),
            Route::Direct => -jump / (2.0 * slope.powi(3)),
        }
    }

    fn statistic(self, x: f64, left: &[f64; 4], right: &[f64; 4]) -> f64 {
        let (j, d1) = self.jump_and_slope(x, left, right);
        self.inferred(j, d1)
    }
}

/// `-E'''/(2E')` from derivatives of `F = r² E`.
fn energy_profile(x: f64, d: &[f64; 4]) -> f64 {
    let x2 = x * x;
    let e1 = (d[1] - 2.0 * d[0] / x) / x2;
    let e3 = d[3] / x2 - 6.0 * d[2] / (x2 * x) + 18.0 * d[1] / (x2 * x2) - 24.0 * d[0] / (x2 * x2 * x);
    -e3 / (2.0 * e1)
}

/// Polynomial in `t = (x - c)/s` plus truncated powers `(t - α)₊^m`.
struct Fit {
    coef: Vec<f64>,
    rss: f64,
    c: f64,
    s: f64,
    degree: usize,
}

impl Fit {
    /// q-th derivative of the polynomial part at `x`.
    fn poly_derivative(&self, x: f64, q: usize) -> f64 {
        let t = (x - self.c) / self.s;
        let mut acc = 0.0;
        for k in q..=self.degree {
            let mut fall = 1.0;
            for j in 0..q {
                fall *= (k - j) as f64;
            }
            acc += self.coef[k] * fall * t.powi((k - q) as i32);
        }
        acc / self.s.powi(q as i32)
    }

    fn truncated(&self, m: usize) -> f64 {
        self.coef[self.degree + 1 + (m - 3)]
    }
}

fn fit_nodes(nodes: &[Node], c: f64, s: f64, degree: usize, knot: Option<(f64, usize)>) -> Option<Fit> {
    let n_trunc = knot.map_or(0, |(_, m)| m.saturating_sub(2));
    let cols = degree + 1 + n_trunc;
    let mut rows: Vec<f64> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let alpha = knot.map(|(a, _)| (a - c) / s);
    for nd in nodes {
        let t = (nd.x - c) / s;
        let mut row = vec![0.0; cols];
        let mut drow = vec![0.0; cols];
        for k in 0..=degree {
            row[k] = t.powi(k as i32);
            if k > 0 {
                drow[k] = k as f64 * t.powi(k as i32 - 1);
            }
        }
        if let Some(al) = alpha {
            let u = (t - al).max(0.0);
            for j in 0..n_trunc {
                let m = j + 3;
                row[degree + 1 + j] = u.powi(m as i32);
                drow[degree + 1 + j] = m as f64 * u.powi(m as i32 - 1);
            }
        }
        rows.extend_from_slice(&row);
        rhs.push(nd.y);
        if let Some(dy) = nd.dy {
            rows.extend_from_slice(&drow);
            rhs.push(dy * s);
        }
    }
    let m = rhs.len();
    if m < cols {
        return None;
    }
    let a = DMatrix::from_row_slice(m, cols, &rows);
    let b = DVector::from_vec(rhs);
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    let rss = (&a * &sol - &b).norm_squared();
    Some(Fit {
        coef: sol.iter().copied().collect(),
        rss,
        c,
        s,
        degree,
    })
}

struct ScanParams {
    side: usize,
    degree: usize,
}

fn scan_params(with_slopes: bool) -> ScanParams {
    if with_slopes {
        ScanParams { side: 6, degree: 5 }
    } else {
        ScanParams { side: 9, degree: 5 }
    }
}

/// One-sided derivatives `[y, y', y'', y''']` at every scannable sample.
fn scan(nodes: &[Node]) -> Vec<(usize, [f64; 4], [f64; 4])> {
    let with_slopes = nodes.iter().all(|n| n.dy.is_some());
    let p = scan_params(with_slopes);
    let mut out = Vec::new();
    if nodes.len() < 2 * p.side + 1 {
        return out;
    }
    let ders = |f: &Fit, c: f64| [0, 1, 2, 3].map(|q| f.poly_derivative(c, q));
    for i in p.side..nodes.len() - p.side {
        let c = nodes[i].x;
        let left = &nodes[i - p.side..=i];
        let right = &nodes[i..=i + p.side];
        let sl = (c - left[0].x).abs();
        let sr = (right[p.side].x - c).abs();
        let (Some(fl), Some(fr)) = (fit_nodes(left, c, sl, p.degree, None), fit_nodes(right, c, sr, p.degree, None)) else {
            continue;
        };
        out.push((i, ders(&fl, c), ders(&fr, c)));
    }
    out
}

fn default_floor(stats: &[f64]) -> f64 {
    let mut s: Vec<f64> = stats.iter().map(|v| v.abs()).filter(|v| v.is_finite()).collect();
    if s.is_empty() {
        return MIN_NOISE_FLOOR;
    }
    s.sort_by(|a, b| a.total_cmp(b));
    let quart = &s[..s.len().div_ceil(4)];
    let median = quart[quart.len() / 2];
    (10.0 * median).max(MIN_NOISE_FLOOR)
}

/// Change-point refinement of one cluster of flagged samples.
fn refine_cluster(nodes: &[Node], peak: usize, lo: usize, hi: usize) -> Option<(f64, Fit)> {
    let with_slopes = nodes.iter().all(|n| n.dy.is_some());
    let window = &nodes[lo..=hi];
    let eq_per_node = if with_slopes { 2 } else { 1 };
    let n_eq = window.len() * eq_per_node;
    // Independent polynomials of equal degree on both sides, joined C².
    let mut degree = 9usize;
    while degree > 3 && n_eq < 2 * (2 * degree - 1) {
        degree -= 1;
    }
    let trunc_max = degree;
    if n_eq < 2 * degree + 1 {
        return None;
    }
    let c = 0.5 * (window[0].x + window[window.len() - 1].x);
    let s = 0.5 * (window[window.len() - 1].x - window[0].x).abs();
    let rss_at = |a: f64| fit_nodes(window, c, s, degree, Some((a, trunc_max))).map_or(f64::INFINITY, |f| f.rss);
    let a_lo = nodes[peak.saturating_sub(3).max(lo + 1)].x;
    let a_hi = nodes[(peak + 3).min(hi - 1)].x;
    let n_scan = 60;
    let mut best = (f64::INFINITY, a_lo);
    let grid: Vec<f64> = (0..=n_scan).map(|k| a_lo + (a_hi - a_lo) * k as f64 / n_scan as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&a| rss_at(a)).collect();
    let mut kbest = 0;
    for (k, (&a, &v)) in grid.iter().zip(&vals).enumerate() {
        if v < best.0 {
            best = (v, a);
            kbest = k;
        }
    }
    let mut x0 = grid[kbest.saturating_sub(1)];
    let mut x1 = grid[(kbest + 1).min(n_scan)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut xa = x1 - g * (x1 - x0);
    let mut xb = x0 + g * (x1 - x0);
    let mut fa = rss_at(xa);
    let mut fb = rss_at(xb);
    for _ in 0..80 {
        if (x1 - x0).abs() < 1e-12 * c.abs().max(1.0) {
            break;
        }
        if fa < fb {
            x1 = xb;
            xb = xa;
            fb = fa;
            xa = x1 - g * (x1 - x0);
            fa = rss_at(xa);
        } else {
            x0 = xa;
            xa = xb;
            fa = fb;
            xb = x0 + g * (x1 - x0);
            fb = rss_at(xb);
        }
    }
    let a = if fa.min(fb) < best.0 { if fa < fb { xa } else { xb } } else { best.1 };
    let fit = fit_nodes(window, c, s, degree, Some((a, trunc_max)))?;
    Some((a, fit))
}

fn detect_nodes(nodes: &[Node], route: Route, noise_floor: Option<f64>) -> Result<(Vec<DiscontinuityEvent>, f64)> {
    if nodes.len() < MIN_SAMPLES {
        return Err(Error::Resolution {
            points: nodes.len(),
            needed: MIN_SAMPLES,
        });
    }
    let scanned = scan(nodes);
    if scanned.is_empty() {
        return Err(Error::Resolution {
            points: nodes.len(),
            needed: MIN_SAMPLES,
        });
    }
    let stats: Vec<f64> = scanned.iter().map(|(i, l, r)| route.statistic(nodes[*i].x, l, r)).collect();
    let floor = match noise_floor {
        Some(f) if f > 0.0 => f,
        Some(f) => return Err(Error::domain(format!("noise floor must be positive, got {f}"))),
        None => default_floor(&stats),
    };
    let side = scan_params(nodes.iter().all(|n| n.dy.is_some())).side;
    // With the default floor, each sample is also held against the median of
    // its neighbourhood, so a noisier stretch of line (steep, or close to a
    // threshold) does not swallow the events next to it.
    let threshold: Vec<f64> = if noise_floor.is_some() {
        vec![floor; stats.len()]
    } else {
        let half = 3 * side;
        (0..stats.len())
            .map(|k| {
                let lo = k.saturating_sub(half);
                let hi = (k + half).min(stats.len() - 1);
                let mut w: Vec<f64> = stats[lo..=hi].iter().map(|v| v.abs()).collect();
                w.sort_by(|a, b| a.total_cmp(b));
                floor.max(10.0 * w[w.len() / 2])
            })
            .collect()
    };
    // Runs of flagged samples, merged across single-sample gaps.
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for (k, s) in stats.iter().enumerate() {
        if s.abs() > threshold[k] || !s.is_finite() {
            match clusters.last_mut() {
                Some(last) if k <= last.1 + 2 => last.1 = k,
                _ => clusters.push((k, k)),
            }
        }
    }
    let peaks: Vec<(usize, f64)> = clusters
        .iter()
        .map(|&(a, b)| {
            let k = (a..=b).max_by(|&i, &j| stats[i].abs().total_cmp(&stats[j].abs())).unwrap();
            (scanned[k].0, threshold[k])
        })
        .collect();
    let reach = 2 * side;
    let mut events = Vec::new();
    for (ci, &(peak, thr)) in peaks.iter().enumerate() {
        let mut lo = peak.saturating_sub(reach);
        let mut hi = (peak + reach).min(nodes.len() - 1);
        if ci > 0 {
            lo = lo.max((peaks[ci - 1].0 + peak).div_ceil(2));
        }
        if ci + 1 < peaks.len() {
            hi = hi.min((peak + peaks[ci + 1].0) / 2);
        }
        if hi <= lo + 4 || peak <= lo || peak >= hi {
            continue;
        }
        let Some((a, fit)) = refine_cluster(nodes, peak, lo, hi) else {
            continue;
        };
        let at = [0, 1, 2, 3].map(|q| fit.poly_derivative(a, q));
        let mut after = at;
        after[3] += 6.0 * fit.truncated(3) / fit.s.powi(3);
        let (jump, slope) = route.jump_and_slope(a, &at, &after);
        let inferred = route.inferred(jump, slope);
        if !(inferred.abs() > thr) {
            continue;
        }
        let location = match route {
            Route::Energy | Route::Mu => a,
            Route::Direct => at[0].powf(-0.5),
        };
        events.push(DiscontinuityEvent {
            location,
            jump_e3: jump,
            slope_e1: slope,
            inferred_jump: inferred,
            confidence: inferred.abs() / thr,
        });
    }
    events.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok((events, floor))
}

fn inverse_nodes(line: &InverseLine) -> (Vec<Node>, Route) {
    let slopes = line.first_derivative.as_deref();
    let route = match line.of {
        InverseOf::Energy => Route::Energy,
        InverseOf::Ell => Route::Mu,
    };
    let nodes = line
        .r_grid
        .iter()
        .zip(&line.values)
        .enumerate()
        .map(|(i, (&r, &v))| {
            let d = slopes.map(|s| s[i]);
            match line.of {
                InverseOf::Energy => Node {
                    x: r,
                    y: r * r * v,
                    dy: d.map(|d| 2.0 * r * v + r * r * d),
                },
                InverseOf::Ell => {
                    // μ = (ℓ + ½)² enters the radial equation linearly.
                    let lam = v + 0.5;
                    Node {
                        x: r,
                        y: lam * lam,
                        dy: d.map(|d| 2.0 * lam * d),
                    }
                }
            }
        })
        .collect();
    (nodes, route)
}

/// Detects potential jumps from the third derivative of an inverse line.
///
/// `noise_floor` is in units of the potential; `None` takes ten times the
/// median scan statistic over the quietest quarter of the line, but never
/// less than [`MIN_NOISE_FLOOR`].
pub fn detect_discontinuities(line: &InverseLine, noise_floor: Option<f64>) -> Result<Vec<DiscontinuityEvent>> {
    Ok(detect_with_floor(line, noise_floor)?.events)
}

/// As [`detect_discontinuities`], also reporting the floor used.
pub fn detect_with_floor(line: &InverseLine, noise_floor: Option<f64>) -> Result<Detection> {
    let (nodes, route) = inverse_nodes(line);
    let (events, noise_floor) = detect_nodes(&nodes, route, noise_floor)?;
    Ok(Detection { events, noise_floor })
}

/// The scan profile `-y'''/(2y')` of an inverse line, from the left and right
/// one-sided fits at every interior sample.
pub fn third_derivative_profile(line: &InverseLine) -> Result<Vec<ProfileSample>> {
    let (nodes, route) = inverse_nodes(line);
    let scanned = scan(&nodes);
    if scanned.is_empty() {
        return Err(Error::Resolution {
            points: nodes.len(),
            needed: MIN_SAMPLES,
        });
    }
    let profile = |x: f64, d: &[f64; 4]| match route {
        Route::Energy => energy_profile(x, d),
        _ => -d[3] / (2.0 * d[1]),
    };
    Ok(scanned
        .into_iter()
        .map(|(i, l, r)| {
            let x = nodes[i].x;
            ProfileSample {
                r: x,
                left: profile(x, &l),
                right: profile(x, &r),
            }
        })
        .collect())
}

fn assemble(jumps: &[(f64, f64)]) -> Result<PiecewiseConstantPotential> {
    let mut sorted = jumps.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values = vec![0.0; sorted.len()];
    let mut right = 0.0;
    for (j, &(_, dv)) in sorted.iter().enumerate().rev() {
        right -= dv;
        values[j] = right;
    }
    PiecewiseConstantPotential::new(sorted.iter().map(|e| e.0).collect(), values)
}

/// Outside-in sweep: zero beyond the last event, `V(a⁻) = V(a⁺) - jump`.
///
/// Every event must lie inside the line's radius range and carry a
/// confidence of at least one.
pub fn reconstruct_piecewise(line: &InverseLine, events: &[DiscontinuityEvent]) -> Result<PiecewiseConstantPotential> {
    let (r_lo, r_hi) = (line.r_grid[0], line.r_grid[line.r_grid.len() - 1]);
    check_events(events, r_lo, r_hi)?;
    assemble(&events.iter().map(|e| (e.location, e.inferred_jump)).collect::<Vec<_>>())
}

fn check_events(events: &[DiscontinuityEvent], r_lo: f64, r_hi: f64) -> Result<()> {
    if events.windows(2).any(|w| !(w[1].location > w[0].location)) {
        return Err(Error::domain("events must be sorted by strictly increasing location"));
    }
    for e in events {
        if !(e.confidence >= 1.0) || !e.inferred_jump.is_finite() {
            return Err(Error::Reconstruction {
                location: e.location,
                reason: format!("jump {} below the noise floor (confidence {:.3})", e.inferred_jump, e.confidence),
            });
        }
        if e.location < r_lo || e.location > r_hi {
            return Err(Error::Reconstruction {
                location: e.location,
                reason: format!("outside the sampled range [{r_lo}, {r_hi}]"),
            });
        }
    }
    Ok(())
}

fn direct_nodes(line: &ZeroLine) -> Result<Vec<Node>> {
    if !matches!(line.path, LinePath::FixedEll { .. }) {
        return Err(Error::domain("r(E) reconstruction needs a fixed-ℓ line"));
    }
    let mut nodes: Vec<Node> = line
        .points
        .iter()
        .filter(|p| !p.diverged && p.r.is_finite())
        .map(|p| Node {
            x: p.energy,
            y: 1.0 / (p.r * p.r),
            dy: p.slope.is_finite().then_some(-2.0 * p.slope / p.r.powi(3)),
        })
        .collect();
    nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
    nodes.dedup_by(|a, b| a.x == b.x);
    if nodes.iter().any(|n| n.dy.is_none()) {
        for n in &mut nodes {
            n.dy = None;
        }
    }
    if let Some(i) = nodes.windows(2).position(|w| !(w[1].y > w[0].y)) {
        return Err(Error::NonMonotone {
            index: i + 1,
            reason: "r_n(E) must decrease with E".into(),
        });
    }
    Ok(nodes)
}

/// Detects jumps from `d³r/dE³` on a fixed-ℓ line.
pub fn detect_discontinuities_re(line: &ZeroLine, noise_floor: Option<f64>) -> Result<Detection> {
    let nodes = direct_nodes(line)?;
    let (events, noise_floor) = detect_nodes(&nodes, Route::Direct, noise_floor)?;
    Ok(Detection { events, noise_floor })
}

/// Reconstruction driven by jumps of `d³r/dE³` on the line itself.
pub fn reconstruct_from_re_line(line: &ZeroLine) -> Result<PiecewiseConstantPotential> {
    let det = detect_discontinuities_re(line, None)?;
    let radii: Vec<f64> = line.points.iter().filter(|p| p.r.is_finite()).map(|p| p.r).collect();
    let r_lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_hi = radii.iter().copied().fold(0.0, f64::max);
    check_events(&det.events, r_lo, r_hi)?;
    assemble(&det.events.iter().map(|e| (e.location, e.inferred_jump)).collect::<Vec<_>>())
}

/// Tolerance on the tail-fit residual of [`junction_discontinuity`].
pub const JUNCTION_TOLERANCE: f64 = 1e-6;

/// Recovers the jump sitting exactly at the junction of a mixed line.
///
/// `recovered` holds every other event of the line. On the high-energy end of
/// the fixed-ℓ part the zero sits inside the innermost constant piece, where
/// `d ln r_n/dE = -1/(2(E - Ṽ))`; each tail sample therefore gives `Ṽ`, the
/// potential next to the origin, and `v = Ṽ - V₀`.
pub fn junction_discontinuity(
    line: &ZeroLine,
    n: usize,
    ell0: f64,
    recovered: &[DiscontinuityEvent],
) -> Result<JunctionEstimate> {
    let LinePath::Mixed { ell0: path_ell0, .. } = line.path else {
        return Err(Error::domain("junction estimate needs a mixed line"));
    };
    if path_ell0 != ell0 || line.n != n {
        return Err(Error::domain(format!(
            "line is n = {} at ℓ0 = {path_ell0}, asked for n = {n} at ℓ0 = {ell0}",
            line.n
        )));
    }
    let r0 = line
        .junction()
        .ok_or_else(|| Error::domain("mixed line has no finite junction point"))?;
    let first_event = recovered.iter().map(|e| e.location).fold(f64::INFINITY, f64::min);
    let inner = 0.9 * first_event.min(r0);
    let mut tail: Vec<&LinePoint> = line
        .segment(Segment::FixedEll)
        .filter(|p| !p.diverged && p.r.is_finite() && p.r < inner)
        .collect();
    tail.sort_by(|a, b| a.r.total_cmp(&b.r));
    tail.truncate(8);
    if tail.len() < 2 {
        return Err(Error::Resolution {
            points: tail.len(),
            needed: 2,
        });
    }
    let mut estimates = Vec::new();
    if tail.iter().all(|p| p.slope.is_finite() && p.slope != 0.0) {
        for p in &tail {
            estimates.push(p.energy + p.r / (2.0 * p.slope));
        }
    } else {
        for w in tail.windows(2) {
            let dlog = (w[1].r.ln() - w[0].r.ln()) / (w[1].energy - w[0].energy);
            let e_mid = 0.5 * (w[0].energy + w[1].energy);
            estimates.push(e_mid + 0.5 / dlog);
        }
    }
    let origin_value = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let scale = origin_value.abs().max(1.0);
    let mut residual = estimates
        .iter()
        .map(|e| (e - origin_value).abs() / scale)
        .fold(0.0, f64::max);
    let j = free_zero(ell0, n);
    for p in &tail {
        let predicted = j / (p.energy - origin_value).sqrt();
        residual = residual.max((predicted - p.r).abs() / p.r);
    }
    let v0 = -recovered.iter().map(|e| e.inferred_jump).sum::<f64>();
    Ok(JunctionEstimate {
        r0,
        v: origin_value - v0,
        v0,
        origin_value,
        residual,
        reliable: residual.is_finite() && residual < JUNCTION_TOLERANCE,
    })
}

/// Reconstruction from a mixed line: jumps below `r_0` from the fixed-ℓ
/// part, jumps above `r_0` from the fixed-E part, and the junction jump from
/// the high-energy tail.
///
/// Errors are tagged with the failing step (`line`, `detection`, `junction`
/// or `reconstruction`), and the first two also with the part of the line.
pub fn reconstruct_mixed(line: &ZeroLine, noise_floor: Option<f64>) -> Result<MixedReconstruction> {
    let LinePath::Mixed { ell0, energy0 } = line.path else {
        return Err(Error::domain("reconstruct_mixed needs a mixed line"));
    };
    let fixed_ell = |e: Error, step| e.in_stage(step).in_stage("fixed-ℓ part");
    let fixed_e = |e: Error, step| e.in_stage(step).in_stage("fixed-E part");
    let part1 = invert_segment(line, Segment::FixedEll, InverseOf::Energy, ell0).map_err(|e| fixed_ell(e, "line"))?;
    let part2 = invert_segment(line, Segment::FixedEnergy, InverseOf::Ell, energy0).map_err(|e| fixed_e(e, "line"))?;
    let d1 = detect_with_floor(&part1, noise_floor).map_err(|e| fixed_ell(e, "detection"))?;
    let d2 = detect_with_floor(&part2, noise_floor).map_err(|e| fixed_e(e, "detection"))?;
    let mut events: Vec<DiscontinuityEvent> = d1.events.into_iter().chain(d2.events).collect();
    events.sort_by(|a, b| a.location.total_cmp(&b.location));
    let junction = junction_discontinuity(line, line.n, ell0, &events).map_err(|e| e.in_stage("junction"))?;
    let floor = d1.noise_floor.max(d2.noise_floor);
    let mut jumps: Vec<(f64, f64)> = events.iter().map(|e| (e.location, e.inferred_jump)).collect();
    if junction.v.abs() > floor {
        jumps.push((junction.r0, -junction.v));
        events.push(DiscontinuityEvent {
            location: junction.r0,
            jump_e3: f64::NAN,
            slope_e1: f64::NAN,
            inferred_jump: -junction.v,
            confidence: junction.v.abs() / floor,
        });
        events.sort_by(|a, b| a.location.total_cmp(&b.location));
    }
    let potential = assemble(&jumps).map_err(|e| e.in_stage("reconstruction"))?;
    Ok(MixedReconstruction {
        potential,
        events,
        junction,
    })
}

// ---------------------------------------------------------------------------
// Uniqueness probes

struct PairSystem<'a> {
    p1: &'a dyn RadialPotential,
    p2: &'a dyn RadialPotential,
    centrifugal: f64,
    energy: f64,
}

impl PairSystem<'_> {
    fn q(&self, r: f64) -> (f64, f64, f64, f64) {
        let c = self.centrifugal / (r * r) - self.energy;
        let v1 = self.p1.value(r);
        let v2 = self.p2.value(r);
        (v1 + c, v2 + c, v1, v2)
    }
}

impl OdeSystem<5> for PairSystem<'_> {
    fn rhs(&self, r: f64, y: &[f64; 5]) -> [f64; 5] {
        let (q1, q2, v1, v2) = self.q(r);
        [y[1], q1 * y[0], y[3], q2 * y[2], (v1 - v2) * y[0] * y[2]]
    }

    fn max_step(&self, r: f64, _y: &[f64; 5]) -> f64 {
        let (q1, q2, _, _) = self.q(r);
        0.8 / q1.abs().max(q2.abs()).sqrt()
    }

    fn error_scale(&self, r: f64, y0: &[f64; 5], y1: &[f64; 5]) -> [f64; 5] {
        let (q1, q2, _, _) = self.q(r);
        let kq = q1.abs().max(q2.abs()).sqrt().max(1e-3 / r);
        let amp = |y: &[f64; 5], a: usize| (y[a] * y[a] + y[a + 1] * y[a + 1] / (kq * kq)).sqrt();
        let a1 = amp(y0, 0).max(amp(y1, 0));
        let a2 = amp(y0, 2).max(amp(y1, 2));
        [a1, a1 * kq, a2, a2 * kq, a1 * a2 * kq]
    }
}

/// Integrates both regular solutions and `∫ΔVψ₁ψ₂` together, reporting the
/// state at each of `targets` (ascending, all beyond the start radius).
fn pair_states(
    p1: &dyn RadialPotential,
    p2: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    targets: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<[f64; 5]>> {
    let rs = Regular::new(p1, ell, energy, cfg, false)?
        .r_start()
        .min(Regular::new(p2, ell, energy, cfg, false)?.r_start());
    let norm = rs.powf(ell + 1.0);
    let s1 = series_start(ell, p1.value(rs) - energy, rs);
    let s2 = series_start(ell, p2.value(rs) - energy, rs);
    let dv0 = p1.value(rs) - p2.value(rs);
    let initial_integral = if dv0 == 0.0 {
        0.0
    } else {
        let v1 = p1.value(rs) - energy;
        let v2 = p2.value(rs) - energy;
        let prod = |r: f64| {
            let a = series_start(ell, v1, r)[0];
            let b = series_start(ell, v2, r)[0];
            a * b * r.powf(2.0 * ell + 2.0)
        };
        dv0 * quad::integrate(prod, 0.0, rs, 0.0, 1e-14)?.value
    };
    let y0 = [s1[0] * norm, s1[1] * norm, s2[0] * norm, s2[1] * norm, initial_integral];
    let sys = PairSystem {
        p1,
        p2,
        centrifugal: ell * (ell + 1.0),
        energy,
    };
    let mut stops: Vec<f64> = p1.breakpoints();
    stops.extend(p2.breakpoints());
    stops.extend(targets.iter().copied());
    let r_end = targets.iter().copied().fold(rs, f64::max);
    let mut out = vec![[f64::NAN; 5]; targets.len()];
    let mut next = 0;
    while next < targets.len() && targets[next] <= rs {
        out[next] = y0;
        next += 1;
    }
    if next == targets.len() {
        return Ok(out);
    }
    integrate(&sys, rs, y0, r_end, &stops, &cfg.ode_options(), |st| {
        while next < targets.len() && targets[next] <= st.r1 {
            out[next] = *st.y1;
            next += 1;
        }
        Control::Continue
    })?;
    Ok(out)
}

fn wronskian_sample(ell: f64, energy: f64, r: f64, y: &[f64; 5]) -> WronskianSample {
    let w = y[1] * y[2] - y[0] * y[3];
    let a1 = y[0].hypot(y[1]);
    let a2 = y[2].hypot(y[3]);
    let scale = (a1 * a2).max(f64::MIN_POSITIVE);
    WronskianSample {
        ell,
        energy,
        r,
        wronskian: w,
        integral: y[4],
        residual: (w - y[4]).abs() / scale,
    }
}

/// `(ψ₁, ψ₂)` at `targets` for the line parameter shifted by `m·h`,
/// `m = -2..=2`.
fn solution_stencil(
    p1: &dyn RadialPotential,
    p2: &dyn RadialPotential,
    pt: &LinePoint,
    h: f64,
    targets: &[f64],
    cfg: &SolverConfig,
) -> Result<[Vec<(f64, f64)>; 5]> {
    let mut out: [Vec<(f64, f64)>; 5] = Default::default();
    for (k, m) in (-2i32..=2).enumerate() {
        let (ell, energy) = match pt.segment {
            Segment::FixedEll => (pt.ell, pt.energy + m as f64 * h),
            Segment::FixedEnergy => (pt.ell + m as f64 * h, pt.energy),
        };
        let st = pair_states(p1, p2, ell, energy, targets, cfg)?;
        out[k] = st.iter().map(|y| (y[0], y[2])).collect();
    }
    Ok(out)
}

fn products(f: &[Vec<(f64, f64)>; 5]) -> [Vec<f64>; 5] {
    f.clone().map(|v| v.into_iter().map(|(a, b)| a * b).collect())
}

/// `2 ∂_pψ₁ ∂_pψ₂` at target `i`.
fn diagonal_kernel(f: &[Vec<(f64, f64)>; 5], i: usize, h: f64) -> f64 {
    let d = |sel: fn(&(f64, f64)) -> f64| {
        (-sel(&f[4][i]) + 8.0 * sel(&f[3][i]) - 8.0 * sel(&f[1][i]) + sel(&f[0][i])) / (12.0 * h)
    };
    2.0 * d(|p| p.0) * d(|p| p.1)
}

fn stencil_step(pt: &LinePoint) -> f64 {
    match pt.segment {
        Segment::FixedEll => 2e-3 * pt.energy.abs().max(1.0),
        Segment::FixedEnergy => 2e-3 * pt.ell.abs().max(1.0),
    }
}

fn third_difference(f: &[Vec<f64>; 5], i: usize, h: f64) -> f64 {
    (f[4][i] - 2.0 * f[3][i] + 2.0 * f[1][i] - f[0][i]) / (2.0 * h * h * h)
}

/// Numerical probe of the Wronskian identity and of the kernels of the
/// uniqueness proof along a line traced for `pot1`.
///
/// For every finite point `(ℓ, E, r)` of the line, both sides of
/// `ψ₁'ψ₂ - ψ₁ψ₂' = ∫₀^r ΔV ψ₁ψ₂` are evaluated independently; the
/// integral is the value whose vanishing the uniqueness theorem turns on.
/// `K(r, r) = 2 ∂_pψ₁ ∂_pψ₂` is sampled with five-point differences in the
/// line parameter `p` (E or ℓ), and the Volterra kernel `K_r(r, r')/K(r, r)`,
/// with `K(r, r') = ∂²_p(ψ₁ψ₂)(r')`, on up to eight probe radii and `r'`
/// from the first line radius to `r`.
pub fn wronskian_residual(
    pot1: &dyn RadialPotential,
    pot2: &dyn RadialPotential,
    ell: f64,
    line: &ZeroLine,
    config: &SolverConfig,
) -> Result<UniquenessProbe> {
    let pts: Vec<&LinePoint> = line.points.iter().filter(|p| !p.diverged && p.r.is_finite()).collect();
    let mut residuals = Vec::with_capacity(pts.len());
    let mut kernel = Vec::with_capacity(pts.len());
    for p in &pts {
        let point_ell = if p.segment == Segment::FixedEll { ell } else { p.ell };
        let st = pair_states(pot1, pot2, point_ell, p.energy, &[p.r], config)?;
        residuals.push(wronskian_sample(point_ell, p.energy, p.r, &st[0]));
        let h = stencil_step(p);
        let f = solution_stencil(pot1, pot2, p, h, &[p.r], config)?;
        kernel.push(KernelSample {
            r: p.r,
            parameter: match p.segment {
                Segment::FixedEll => p.energy,
                Segment::FixedEnergy => p.ell,
            },
            value: diagonal_kernel(&f, 0, h),
        });
    }
    let eps = pts.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
    let mut volterra: f64 = 0.0;
    let stride = pts.len().div_ceil(8).max(1);
    for p in pts.iter().step_by(stride) {
        if !(p.r > eps) || !(p.slope.is_finite()) || p.slope == 0.0 {
            continue;
        }
        let grid: Vec<f64> = (0..=24).map(|k| eps + (p.r - eps) * k as f64 / 24.0).collect();
        let h = stencil_step(p);
        let f = solution_stencil(pot1, pot2, p, h, &grid, config)?;
        let diag = diagonal_kernel(&f, grid.len() - 1, h);
        let f = products(&f);
        if diag == 0.0 {
            volterra = f64::INFINITY;
            continue;
        }
        let dp_dr = 1.0 / p.slope;
        for i in 0..grid.len() {
            let kr = dp_dr * third_difference(&f, i, h);
            volterra = volterra.max((kr / diag).abs());
        }
    }
    Ok(UniquenessProbe {
        kernel_diag: kernel,
        wronskian_residual: residuals,
        volterra_norm: volterra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodal_lines::{invert_line, trace_fixed_l_line_at_radii};

    fn radii(a: f64, b: f64, h: f64) -> Vec<f64> {
        let n = ((b - a) / h).round() as usize;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn zero_potential_has_no_events() {
        let pot = PiecewiseConstantPotential::zero();
        let line = trace_fixed_l_line_at_radii(&pot, 0.0, 1, &radii(0.5, 4.0, 0.05), &SolverConfig::default()).unwrap();
        let inv = invert_line(&line).unwrap();
        assert!(detect_discontinuities(&inv, None).unwrap().is_empty());
        let v = reconstruct_piecewise(&inv, &[]).unwrap();
        assert!(v.breakpoints().is_empty());
    }

    #[test]
    fn single_step_is_found() {
        let pot = PiecewiseConstantPotential::new(vec![1.0], vec![-1.0]).unwrap();
        let line = trace_fixed_l_line_at_radii(&pot, 0.0, 1, &radii(0.3, 3.0, 0.02), &SolverConfig::default()).unwrap();
        let inv = invert_line(&line).unwrap();
        let ev = detect_discontinuities(&inv, None).unwrap();
        assert_eq!(ev.len(), 1, "{ev:?}");
        assert!((ev[0].location - 1.0).abs() < 1e-3, "{ev:?}");
        assert!((ev[0].inferred_jump - 1.0).abs() < 1e-3, "{ev:?}");
    }

    #[test]
    fn undersampled_line_is_rejected() {
        let pot = PiecewiseConstantPotential::zero();
        let line = trace_fixed_l_line_at_radii(&pot, 0.0, 1, &radii(0.5, 4.0, 0.5), &SolverConfig::default()).unwrap();
        let inv = invert_line(&line).unwrap();
        assert!(matches!(detect_discontinuities(&inv, None), Err(Error::Resolution { .. })));
    }

    #[test]
    fn identical_potentials_give_zero_integral() {
        let pot = PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.0, -1.0]).unwrap();
        let line = trace_fixed_l_line_at_radii(&pot, 0.0, 1, &radii(0.5, 4.0, 0.5), &SolverConfig::default()).unwrap();
        let probe = wronskian_residual(&pot, &pot, 0.0, &line, &SolverConfig::default()).unwrap();
        for w in &probe.wronskian_residual {
            assert_eq!(w.integral, 0.0);
            assert!(w.residual < 1e-9);
        }
    }
}

//! Lines of zeros `r_n(ℓ, E)` of the regular solution.
//!
//! A point on a line is located by integrating from the origin and stopping
//! at the n-th sign change, so the zero index can never slip to a
//! neighbouring line; continuation between grid points is only used to
//! decide where the grid needs refining.

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::potentials::RadialPotential;
use crate::radial_solver::{Regular, RunSpec, SolverConfig, ZeroInfo};
use crate::special::free_zero;
use serde::Serialize;

/// Which parameter moves along a line segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// ℓ fixed, E varies.
    FixedEll,
    /// E fixed, ℓ varies.
    FixedEnergy,
}

impl Segment {
    pub fn index(self) -> u8 {
        match self {
            Segment::FixedEll => 0,
            Segment::FixedEnergy => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    pub segment: Segment,
    pub ell: f64,
    pub energy: f64,
    /// `r_n`, or `+∞` when the zero lies beyond the tracing cap.
    pub r: f64,
    pub diverged: bool,
    /// `∂r_n/∂E` on fixed-ℓ segments, `∂r_n/∂ℓ` on fixed-E segments.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum LinePath {
    FixedEll { ell: f64 },
    FixedEnergy { energy: f64 },
    Mixed { ell0: f64, energy0: f64 },
}

/// One line of zeros sampled along a parameter path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroLine {
    pub n: usize,
    pub path: LinePath,
    pub points: Vec<LinePoint>,
}

impl ZeroLine {
    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn segment(&self, seg: Segment) -> impl Iterator<Item = &LinePoint> {
        self.points.iter().filter(move |p| p.segment == seg)
    }

    /// The junction radius `r_0` of a mixed line.
    pub fn junction(&self) -> Option<f64> {
        match self.path {
            LinePath::Mixed { ell0, energy0 } => self
                .points
                .iter()
                .find(|p| p.ell == ell0 && p.energy == energy0 && !p.diverged)
                .map(|p| p.r),
            _ => None,
        }
    }
}

/// Exact first derivatives of a line at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineDerivatives {
    pub r: f64,
    pub dr_de: f64,
    pub dr_dl: f64,
}

fn nth_zero(
    pot: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    n: usize,
    r_cap: f64,
    cfg: &SolverConfig,
) -> Result<Option<ZeroInfo>> {
    if n == 0 {
        return Err(Error::domain("zero index n starts at 1"));
    }
    let reg = Regular::new(pot, ell, energy, cfg, false)?;
    if r_cap <= reg.r_start() {
        return Ok(None);
    }
    let res = reg.run(&RunSpec {
        r_end: r_cap,
        outputs: &[],
        stop_after_zeros: Some(n),
        free: false,
        record_steps: false,
    })?;
    Ok(res.zeros.get(n - 1).copied())
}

/// `r_n(ℓ, E)` and both exact derivatives; `None` if the zero lies beyond `r_cap`.
pub fn zero_with_derivatives(
    potential: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    n: usize,
    r_cap: f64,
    config: &SolverConfig,
) -> Result<Option<LineDerivatives>> {
    Ok(nth_zero(potential, ell, energy, n, r_cap, config)?.map(|z| LineDerivatives {
        r: z.r,
        dr_de: z.dr_de(),
        dr_dl: z.dr_dl(ell),
    }))
}

/// `∂r_n/∂E = -∫₀^{r_n}ψ² / ψ'(r_n)²` and `∂r_n/∂ℓ = (2ℓ+1)∫₀^{r_n}ψ²/r² / ψ'(r_n)²`.
pub fn line_derivative_exact(
    potential: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    n: usize,
    config: &SolverConfig,
) -> Result<LineDerivatives> {
    let cap = default_cap(potential).max(1e3);
    zero_with_derivatives(potential, ell, energy, n, cap, config)?.ok_or_else(|| {
        Error::Coverage(format!("zero {n} at (ℓ={ell}, E={energy}) lies beyond r = {cap}"))
    })
}

/// Default tracing cap: fifty times the support scale of the potential.
pub fn default_cap(potential: &dyn RadialPotential) -> f64 {
    let last_bp = potential.breakpoints().iter().copied().fold(0.0, f64::max);
    50.0 * last_bp.max(potential.support_radius()).max(1.0)
}

fn point_fixed_ell(
    pot: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    n: usize,
    r_cap: f64,
    cfg: &SolverConfig,
) -> Result<LinePoint> {
    let z = nth_zero(pot, ell, energy, n, r_cap, cfg)?;
    Ok(match z {
        Some(z) => LinePoint {
            segment: Segment::FixedEll,
            ell,
            energy,
            r: z.r,
            diverged: false,
            slope: z.dr_de(),
        },
        None => LinePoint {
            segment: Segment::FixedEll,
            ell,
            energy,
            r: f64::INFINITY,
            diverged: true,
            slope: f64::NAN,
        },
    })
}

fn point_fixed_energy(
    pot: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    n: usize,
    r_cap: f64,
    cfg: &SolverConfig,
) -> Result<LinePoint> {
    let z = nth_zero(pot, ell, energy, n, r_cap, cfg)?;
    Ok(LinePoint {
        segment: Segment::FixedEnergy,
        ell,
        energy,
        r: z.map_or(f64::INFINITY, |z| z.r),
        diverged: z.is_none(),
        slope: z.map_or(f64::NAN, |z| z.dr_dl(ell)),
    })
}

/// Inserts grid midpoints until neighbouring finite radii differ by less than
/// `max_rel` (relative), or the parameter gap becomes negligible.
fn refine<F>(mut pts: Vec<(f64, LinePoint)>, max_rel: f64, mut at: F) -> Result<Vec<LinePoint>>
where
    F: FnMut(f64) -> Result<LinePoint>,
{
    const MAX_POINTS: usize = 20_000;
    let mut i = 0;
    while i + 1 < pts.len() && pts.len() < MAX_POINTS {
        let (t0, a) = pts[i];
        let (t1, b) = pts[i + 1];
        let gap = (t1 - t0).abs();
        let need = !a.diverged
            && !b.diverged
            && (b.r - a.r).abs() > max_rel * a.r.min(b.r)
            && gap > 1e-9 * (t0.abs().max(t1.abs()).max(1e-3));
        if need {
            let tm = 0.5 * (t0 + t1);
            let p = at(tm)?;
            pts.insert(i + 1, (tm, p));
        } else {
            i += 1;
        }
    }
    Ok(pts.into_iter().map(|(_, p)| p).collect())
}

/// Traces `r_n(ℓ, E)` over an energy grid at fixed ℓ.
///
/// The grid is refined so that consecutive finite radii differ by less than
/// 5%. Points whose zero lies beyond `r_cap` are flagged as diverged.
pub fn trace_fixed_l_line(
    potential: &dyn RadialPotential,
    ell: f64,
    n: usize,
    e_grid: &[f64],
    r_cap: f64,
    config: &SolverConfig,
) -> Result<ZeroLine> {
    if n == 0 {
        return Err(Error::domain("zero index n starts at 1"));
    }
    let pts = e_grid
        .iter()
        .map(|&e| point_fixed_ell(potential, ell, e, n, r_cap, config).map(|p| (e, p)))
        .collect::<Result<Vec<_>>>()?;
    let points = refine(pts, 0.05, |e| point_fixed_ell(potential, ell, e, n, r_cap, config))?;
    Ok(ZeroLine {
        n,
        path: LinePath::FixedEll { ell },
        points,
    })
}

/// Traces `r_n(ℓ, E)` over an ℓ grid at fixed energy.
pub fn trace_fixed_e_line(
    potential: &dyn RadialPotential,
    energy: f64,
    n: usize,
    ell_grid: &[f64],
    r_cap: f64,
    config: &SolverConfig,
) -> Result<ZeroLine> {
    if n == 0 {
        return Err(Error::domain("zero index n starts at 1"));
    }
    let pts = ell_grid
        .iter()
        .map(|&l| point_fixed_energy(potential, l, energy, n, r_cap, config).map(|p| (l, p)))
        .collect::<Result<Vec<_>>>()?;
    let points = refine(pts, 0.05, |l| point_fixed_energy(potential, l, energy, n, r_cap, config))?;
    Ok(ZeroLine {
        n,
        path: LinePath::FixedEnergy { energy },
        points,
    })
}

/// Traces the two-part line on `{E ≥ E0, ℓ = ℓ0} ∪ {E = E0, ℓ ≥ ℓ0}`.
///
/// Part 1 (fixed ℓ0) is ordered by decreasing energy, so that the radius grows
/// along the path up to the junction `r_0 = r_n(ℓ0, E0)`; part 2 (fixed E0)
/// continues outward with increasing ℓ. Both parts contain the junction point.
#[allow(clippy::too_many_arguments)]
pub fn trace_mixed_line(
    potential: &dyn RadialPotential,
    ell0: f64,
    e0: f64,
    n: usize,
    e_grid: &[f64],
    ell_grid: &[f64],
    r_cap: f64,
    config: &SolverConfig,
) -> Result<ZeroLine> {
    if e_grid.iter().any(|&e| e < e0) || ell_grid.iter().any(|&l| l < ell0) {
        return Err(Error::domain("mixed grids must satisfy E ≥ E0 and ℓ ≥ ℓ0"));
    }
    let mut es: Vec<f64> = e_grid.iter().copied().filter(|&e| e > e0).collect();
    es.push(e0);
    es.sort_by(|a, b| b.total_cmp(a));
    es.dedup();
    let mut ls: Vec<f64> = ell_grid.iter().copied().filter(|&l| l > ell0).collect();
    ls.push(ell0);
    ls.sort_by(|a, b| a.total_cmp(b));
    ls.dedup();
    let part1 = trace_fixed_l_line(potential, ell0, n, &es, r_cap, config)?;
    let part2 = trace_fixed_e_line(potential, e0, n, &ls, r_cap, config)?;
    let mut points = part1.points;
    points.extend(part2.points);
    Ok(ZeroLine {
        n,
        path: LinePath::Mixed { ell0, energy0: e0 },
        points,
    })
}

/// Energy at which the n-th zero of the ℓ-wave sits exactly at `radius`.
///
/// Newton iteration on `r_n(E) - radius` with the exact derivative, guarded
/// by a bracket that is maintained from the monotone decrease of `r_n` in E.
pub fn energy_at_radius(
    potential: &dyn RadialPotential,
    ell: f64,
    n: usize,
    radius: f64,
    config: &SolverConfig,
) -> Result<(f64, LineDerivatives)> {
    if !(radius > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let cap = radius * 1.5 + 1.0;
    let eval = |e: f64| nth_zero(potential, ell, e, n, cap, config);
    // Upper bracket: energies high enough that the zero sits inside `radius`.
    let vmax = {
        let mut m = 0.0f64;
        for i in 0..=400 {
            m = m.max(potential.value(radius * i as f64 / 400.0));
        }
        m
    };
    let j = free_zero(ell, n);
    let mut hi = (j / radius).powi(2) + vmax.max(0.0) + 1.0;
    let mut z_hi = eval(hi)?;
    let mut guard = 0;
    while z_hi.is_none_or(|z| z.r >= radius) {
        hi = 2.0 * hi + 1.0;
        z_hi = eval(hi)?;
        guard += 1;
        if guard > 80 {
            return Err(Error::NoConvergence(format!("no energy puts zero {n} inside r = {radius}")));
        }
    }
    let mut lo = potential.min_value() - 1.0;
    let mut e = hi;
    let mut z = z_hi.unwrap();
    for _ in 0..200 {
        let f = z.r - radius;
        // Converged once the residual is at the integrator's accuracy or the
        // remaining Newton correction is below energy round-off.
        let collapsed = hi - lo <= 8.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0);
        if f.abs() <= 1e-14 * radius
            || (f / z.dr_de()).abs() <= 2e-16 * e.abs().max(1.0)
            || (collapsed && f.abs() <= 1e-10 * radius)
        {
            return Ok((
                e,
                LineDerivatives {
                    r: z.r,
                    dr_de: z.dr_de(),
                    dr_dl: z.dr_dl(ell),
                },
            ));
        }
        if f < 0.0 {
            hi = e;
        } else {
            lo = e;
        }
        let newton = e - f / z.dr_de();
        let mut cand = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        loop {
            match eval(cand)? {
                Some(zz) => {
                    e = cand;
                    z = zz;
                    break;
                }
                None => {
                    // Zero beyond the cap: this energy is a valid lower bracket.
                    lo = cand;
                    cand = 0.5 * (lo + hi);
                    if hi - lo < 1e-15 * hi.abs().max(1.0) {
                        return Err(Error::NoConvergence("energy bracket collapsed".into()));
                    }
                }
            }
        }
        if collapsed {
            return Err(Error::NoConvergence(format!("zero {n} cannot be placed at r = {radius}")));
        }
    }
    Err(Error::NoConvergence("energy_at_radius iteration limit".into()))
}

/// Samples a fixed-ℓ line at prescribed radii by solving for `E_n(r)`.
pub fn trace_fixed_l_line_at_radii(
    potential: &dyn RadialPotential,
    ell: f64,
    n: usize,
    radii: &[f64],
    config: &SolverConfig,
) -> Result<ZeroLine> {
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let (e, d) = energy_at_radius(potential, ell, n, r, config)?;
        points.push(LinePoint {
            segment: Segment::FixedEll,
            ell,
            energy: e,
            r: d.r,
            diverged: false,
            slope: d.dr_de,
        });
    }
    points.sort_by(|a, b| b.energy.total_cmp(&a.energy));
    Ok(ZeroLine {
        n,
        path: LinePath::FixedEll { ell },
        points,
    })
}

/// Partial wave ℓ at which the n-th zero at fixed energy sits at `radius`.
///
/// `ell_lo` must put the zero inside `radius`; the root is found by bracketed
/// Newton iteration on the increasing function `r_n(ℓ)`.
pub fn ell_at_radius(
    potential: &dyn RadialPotential,
    energy: f64,
    n: usize,
    radius: f64,
    ell_lo: f64,
    config: &SolverConfig,
) -> Result<(f64, LineDerivatives)> {
    if !(radius > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let cap = radius * 1.5 + 1.0;
    let eval = |l: f64| nth_zero(potential, l, energy, n, cap, config);
    let mut lo = ell_lo;
    let mut z = match eval(lo)? {
        Some(z) if z.r <= radius => z,
        _ => {
            return Err(Error::Coverage(format!(
                "zero {n} at ℓ = {ell_lo}, E = {energy} already lies beyond r = {radius}"
            )))
        }
    };
    let mut l = lo;
    let mut hi = lo.max(0.0) + 1.0;
    let mut guard = 0;
    while eval(hi)?.is_some_and(|z| z.r < radius) {
        lo = hi;
        hi = 2.0 * hi + 1.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NoConvergence(format!("no ℓ pushes zero {n} beyond r = {radius}")));
        }
    }
    if lo > l {
        l = lo;
        z = eval(l)?.expect("zero inside the cap at the lower bracket");
    }
    for _ in 0..200 {
        let f = z.r - radius;
        if f > 0.0 {
            hi = l;
        } else {
            lo = l;
        }
        let collapsed = hi - lo <= 8.0 * f64::EPSILON * hi.abs().max(1.0);
        let dr_dl = z.dr_dl(l);
        if f.abs() <= 1e-14 * radius || (f / dr_dl).abs() <= 2e-16 * l.abs().max(1.0) || (collapsed && f.abs() <= 1e-10 * radius)
        {
            return Ok((
                l,
                LineDerivatives {
                    r: z.r,
                    dr_de: z.dr_de(),
                    dr_dl,
                },
            ));
        }
        if collapsed {
            return Err(Error::NoConvergence(format!("zero {n} cannot be placed at r = {radius}")));
        }
        let newton = l - f / dr_dl;
        let mut cand = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        loop {
            match eval(cand)? {
                Some(zz) => {
                    l = cand;
                    z = zz;
                    break;
                }
                None => {
                    hi = cand;
                    cand = 0.5 * (lo + hi);
                    if hi - lo <= 8.0 * f64::EPSILON * hi.abs().max(1.0) {
                        return Err(Error::NoConvergence("ℓ bracket collapsed".into()));
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence("ell_at_radius iteration limit".into()))
}

/// Samples a mixed line at prescribed radii.
///
/// Radii inside the junction `r_0 = r_n(ℓ0, E0)` are placed on the fixed-ℓ
/// part by solving for E, radii beyond it on the fixed-E part by solving for
/// ℓ. Both parts include the junction point, in the same order as
/// [`trace_mixed_line`].
pub fn trace_mixed_line_at_radii(
    potential: &dyn RadialPotential,
    ell0: f64,
    e0: f64,
    n: usize,
    radii: &[f64],
    config: &SolverConfig,
) -> Result<ZeroLine> {
    let cap = default_cap(potential);
    let z0 = nth_zero(potential, ell0, e0, n, cap, config)?
        .ok_or_else(|| Error::Coverage(format!("zero {n} at (ℓ0={ell0}, E0={e0}) lies beyond r = {cap}")))?;
    let r0 = z0.r;
    let mut inner: Vec<f64> = radii.iter().copied().filter(|&r| r < r0 * (1.0 - 1e-9)).collect();
    let mut outer: Vec<f64> = radii.iter().copied().filter(|&r| r > r0 * (1.0 + 1e-9)).collect();
    inner.sort_by(|a, b| a.total_cmp(b));
    outer.sort_by(|a, b| a.total_cmp(b));
    let mut points = Vec::with_capacity(radii.len() + 2);
    for &r in &inner {
        let (e, d) = energy_at_radius(potential, ell0, n, r, config)?;
        points.push(LinePoint {
            segment: Segment::FixedEll,
            ell: ell0,
            energy: e,
            r: d.r,
            diverged: false,
            slope: d.dr_de,
        });
    }
    points.push(LinePoint {
        segment: Segment::FixedEll,
        ell: ell0,
        energy: e0,
        r: r0,
        diverged: false,
        slope: z0.dr_de(),
    });
    points.push(LinePoint {
        segment: Segment::FixedEnergy,
        ell: ell0,
        energy: e0,
        r: r0,
        diverged: false,
        slope: z0.dr_dl(ell0),
    });
    for &r in &outer {
        let (l, d) = ell_at_radius(potential, e0, n, r, ell0, config)?;
        points.push(LinePoint {
            segment: Segment::FixedEnergy,
            ell: l,
            energy: e0,
            r: d.r,
            diverged: false,
            slope: d.dr_dl,
        });
    }
    Ok(ZeroLine {
        n,
        path: LinePath::Mixed { ell0, energy0: e0 },
        points,
    })
}

/// Which parameter an inverse line returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseOf {
    Energy,
    Ell,
}

/// The inverse `r ↦ E_n(r)` (or `r ↦ ℓ_n(r)`) of one monotone line segment.
#[derive(Debug, Clone, Serialize)]
pub struct InverseLine {
    pub of: InverseOf,
    /// Fixed partner parameter (ℓ for `Energy`, E for `Ell`).
    pub fixed: f64,
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `dE/dr` (or `dℓ/dr`) at the samples, when exact slopes were available.
    pub first_derivative: Option<Vec<f64>>,
    #[serde(skip)]
    interp: Option<Pchip>,
}

impl InverseLine {
    pub fn new(of: InverseOf, fixed: f64, r_grid: Vec<f64>, values: Vec<f64>, first_derivative: Option<Vec<f64>>) -> Result<Self> {
        let interp = Pchip::new(r_grid.clone(), values.clone())?;
        Ok(InverseLine {
            of,
            fixed,
            r_grid,
            values,
            first_derivative,
            interp: Some(interp),
        })
    }

    fn pchip(&self) -> &Pchip {
        self.interp.as_ref().expect("inverse line built through InverseLine::new")
    }

    /// Interpolated value and slope at radius `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        self.pchip().eval_with_derivative(r)
    }

    /// Samples of the original line: `(parameter, r)` pairs.
    pub fn invert(&self) -> Vec<(f64, f64)> {
        self.values.iter().copied().zip(self.r_grid.iter().copied()).collect()
    }
}

/// Builds the inverse of a single-segment line.
///
/// Samples are sorted by radius; a monotonicity violation smaller than
/// `1e-9` relative is repaired by dropping the offending sample, anything
/// larger is an error.
pub fn invert_line(line: &ZeroLine) -> Result<InverseLine> {
    let (of, fixed, seg) = match line.path {
        LinePath::FixedEll { ell } => (InverseOf::Energy, ell, Segment::FixedEll),
        LinePath::FixedEnergy { energy } => (InverseOf::Ell, energy, Segment::FixedEnergy),
        LinePath::Mixed { .. } => {
            return Err(Error::domain("invert one segment of a mixed line at a time (see invert_segment)"))
        }
    };
    invert_segment(line, seg, of, fixed)
}

/// Inverse of one segment of a (possibly mixed) line.
pub fn invert_segment(line: &ZeroLine, seg: Segment, of: InverseOf, fixed: f64) -> Result<InverseLine> {
    let mut pts: Vec<(f64, f64, f64)> = line
        .segment(seg)
        .filter(|p| !p.diverged && p.r.is_finite())
        .map(|p| {
            let v = match of {
                InverseOf::Energy => p.energy,
                InverseOf::Ell => p.ell,
            };
            (p.r, v, 1.0 / p.slope)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sign = match of {
        InverseOf::Energy => -1.0,
        InverseOf::Ell => 1.0,
    };
    let mut clean: Vec<(f64, f64, f64)> = Vec::with_capacity(pts.len());
    for (i, p) in pts.into_iter().enumerate() {
        if let Some(last) = clean.last() {
            let dr = p.0 - last.0;
            let dv = (p.1 - last.1) * sign;
            if !(dr > 0.0) || !(dv > 0.0) {
                let scale = p.0.abs().max(1e-300);
                if dr.abs() <= 1e-9 * scale || dv.abs() <= 1e-9 * p.1.abs().max(1.0) {
                    continue;
                }
                return Err(Error::NonMonotone {
                    index: i,
                    reason: format!("r = {} breaks monotonicity of the line", p.0),
                });
            }
        }
        clean.push(p);
    }
    if clean.len() < 2 {
        return Err(Error::Resolution {
            points: clean.len(),
            needed: 2,
        });
    }
    let slopes: Vec<f64> = clean.iter().map(|p| p.2).collect();
    let have_slopes = slopes.iter().all(|s| s.is_finite());
    InverseLine::new(
        of,
        fixed,
        clean.iter().map(|p| p.0).collect(),
        clean.iter().map(|p| p.1).collect(),
        have_slopes.then_some(slopes),
    )
}

/// Dirichlet spectral data on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub r: f64,
    pub ell: f64,
    /// `E_n*` with `r_n(ℓ, E_n*) = R`.
    pub eigenvalues: Vec<f64>,
    /// `ρ_n = -∂r_n/∂E` at `E_n*`.
    pub norming: Vec<f64>,
}

/// Eigenvalues and norming constants of the Dirichlet problem on `[0, R]`.
///
/// Stops early (returning fewer than `n_max` entries) if a line cannot be
/// brought to `R`.
pub fn spectral_data_at(
    potential: &dyn RadialPotential,
    ell: f64,
    r: f64,
    n_max: usize,
    config: &SolverConfig,
) -> Result<SpectralData> {
    if !(r > 0.0) {
        return Err(Error::domain("interval length R must be positive"));
    }
    let mut eigenvalues = Vec::new();
    let mut norming = Vec::new();
    for n in 1..=n_max {
        match energy_at_radius(potential, ell, n, r, config) {
            Ok((e, d)) => {
                eigenvalues.push(e);
                norming.push(-d.dr_de);
            }
            Err(Error::NoConvergence(_)) | Err(Error::Coverage(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(SpectralData {
        r,
        ell,
        eigenvalues,
        norming,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{PiecewiseConstantPotential, Potential};
    use std::f64::consts::PI;

    #[test]
    fn free_line_and_slope() {
        let z = Potential::zero();
        let line = trace_fixed_l_line(&z, 0.0, 2, &[4.0, 1.0], 100.0, &SolverConfig::default()).unwrap();
        for p in &line.points {
            let k = p.energy.sqrt();
            assert!((p.r - 2.0 * PI / k).abs() < 1e-10 * p.r);
            assert!((p.slope + 2.0 * PI / (2.0 * p.energy.powf(1.5))).abs() < 1e-9);
        }
        // refinement keeps successive radii within 5%
        for w in line.points.windows(2) {
            assert!((w[1].r - w[0].r).abs() <= 0.05 * w[0].r.min(w[1].r) + 1e-12);
        }
    }

    #[test]
    fn energy_at_radius_free() {
        let z = Potential::zero();
        let (e, d) = energy_at_radius(&z, 0.0, 3, 2.0, &SolverConfig::default()).unwrap();
        assert!((e - (3.0 * PI / 2.0).powi(2)).abs() < 1e-9 * e);
        assert!((d.r - 2.0).abs() < 1e-13);
    }

    #[test]
    fn mixed_line_shares_junction() {
        let p = PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.0, -1.0]).unwrap();
        let line = trace_mixed_line(&p, 0.0, 1.0, 1, &[1.0, 2.0, 5.0], &[0.0, 1.0, 2.0], 100.0, &SolverConfig::default())
            .unwrap();
        let r0 = line.junction().unwrap();
        let ends: Vec<f64> = line.points.iter().filter(|q| q.ell == 0.0 && q.energy == 1.0).map(|q| q.r).collect();
        assert_eq!(ends.len(), 2);
        assert!((ends[0] - ends[1]).abs() < 1e-9 * r0);
        // globally increasing radius along the path
        for w in line.points.windows(2) {
            assert!(w[1].r >= w[0].r - 1e-12);
        }
    }
}

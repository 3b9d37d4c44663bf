//! Regular solution of the radial equation `ψ'' = (V + ℓ(ℓ+1)/r² - E) ψ`,
//! with `ψ ~ r^{ℓ+1}` at the origin (units ħ = 2m = 1, E = k²).
//!
//! Internally the solution is carried as `φ = ψ e^{-L}` where the log-scale
//! `L` is adjusted whenever `|φ|` grows large, so very high partial waves and
//! classically forbidden stretches neither overflow nor underflow. Alongside
//! `φ` the integrator accumulates `∫φ²` and `∫φ²/r²`, which the nodal-line
//! derivative formulas need, and optionally a free (V ≡ 0) solution used to
//! fix the branch of the phase shift by counting nodes.

use crate::error::{Error, Result};
use crate::ode::{self, Control, OdeOptions, OdeSystem, Step};
use crate::potentials::RadialPotential;
use crate::roots::{bisect, brent};
use crate::special::{decaying_log_derivative, riccati};
use serde::Serialize;
use std::f64::consts::PI;

const RESCALE_AT: f64 = 1e100;

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Smallest radius at which the power-series start is applied; raised
    /// automatically for high partial waves when that keeps the start exact.
    pub r_start: f64,
    /// Matching radius for phase shifts; `None` picks it from the potential.
    pub r_match: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Spacing of the output grid of [`integrate_regular`]; `None` records the
    /// integrator's own step endpoints.
    pub output_spacing: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_start: 1e-6,
            r_match: None,
            rtol: 1e-13,
            atol: 1e-300,
            max_step: 0.5,
            output_spacing: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.r_start > 0.0 && self.rtol > 0.0 && self.atol > 0.0 && self.max_step > 0.0) {
            return Err(Error::domain("solver tolerances, r_start and max_step must be positive"));
        }
        if let Some(rm) = self.r_match {
            if !(rm > self.r_start) {
                return Err(Error::domain("r_match must exceed r_start"));
            }
        }
        Ok(())
    }

    /// Same configuration with both tolerances scaled by `factor`.
    pub fn with_tolerance_scale(mut self, factor: f64) -> Self {
        self.rtol *= factor;
        self
    }

    pub(crate) fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            h_init: 1e-3,
            h_max: self.max_step,
            h_min: 1e-15,
        }
    }
}

/// Sampled regular solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularSolutionTrace {
    pub ell: f64,
    pub energy: f64,
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// Zeros on `(0, r_max]`, ascending.
    pub zeros: Vec<f64>,
    /// `∂ψ/∂r` at each zero.
    pub zero_slopes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseShiftSample {
    pub ell: f64,
    pub k: f64,
    /// Phase shift on the branch with `δ → 0` as `k → ∞`.
    pub delta: f64,
    /// Change in the extracted phase between two matching radii.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundStateSet {
    pub ell: f64,
    /// Ascending negative energies.
    pub energies: Vec<f64>,
}

impl BoundStateSet {
    pub fn count(&self) -> usize {
        self.energies.len()
    }
}

// State layout of the augmented system.
const PHI: usize = 0;
const DPHI: usize = 1;
const I0: usize = 2;
const I2: usize = 3;
const FREE: usize = 4;
const DFREE: usize = 5;

pub(crate) struct RadialSystem<'a> {
    pot: &'a dyn RadialPotential,
    centrifugal: f64,
    energy: f64,
    free: bool,
}

impl OdeSystem<6> for RadialSystem<'_> {
    #[inline]
    fn rhs(&self, r: f64, y: &[f64; 6]) -> [f64; 6] {
        let c = self.centrifugal / (r * r);
        let q = self.pot.value(r) + c - self.energy;
        let mut d = [y[DPHI], q * y[PHI], y[PHI] * y[PHI], y[PHI] * y[PHI] / (r * r), 0.0, 0.0];
        if self.free {
            d[FREE] = y[DFREE];
            d[DFREE] = (c - self.energy) * y[FREE];
        }
        d
    }

    fn max_step(&self, r: f64, _y: &[f64; 6]) -> f64 {
        let c = self.centrifugal / (r * r);
        let q = (self.pot.value(r) + c - self.energy).abs();
        let qf = if self.free { (c - self.energy).abs() } else { 0.0 };
        0.8 / q.max(qf).sqrt()
    }

    fn error_scale(&self, r: f64, y0: &[f64; 6], y1: &[f64; 6]) -> [f64; 6] {
        // Oscillatory components are measured against their local amplitude
        // so the tolerance does not collapse at nodes.
        let c = self.centrifugal / (r * r);
        let kq = (self.pot.value(r) + c - self.energy).abs().sqrt().max(1e-3 / r.max(1e-300));
        let amp = |a: usize, b: usize| {
            let m0 = (y0[a] * y0[a] + y0[b] * y0[b] / (kq * kq)).sqrt();
            let m1 = (y1[a] * y1[a] + y1[b] * y1[b] / (kq * kq)).sqrt();
            m0.max(m1)
        };
        let a = amp(PHI, DPHI);
        let f = amp(FREE, DFREE);
        [
            a,
            a * kq,
            y0[I0].abs().max(y1[I0].abs()),
            y0[I2].abs().max(y1[I2].abs()),
            f,
            f * kq,
        ]
    }
}

/// A zero of the regular solution with the data needed for its derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZeroInfo {
    pub r: f64,
    /// Scaled slope `φ'`; the true slope is `φ' e^{L}`.
    pub dphi: f64,
    /// Scaled `∫₀^r φ²` and `∫₀^r φ²/r²`.
    pub i0: f64,
    pub i2: f64,
    pub log_scale: f64,
}

impl ZeroInfo {
    /// `∂r_n/∂E = -∫ψ² / ψ'(r_n)²`.
    pub fn dr_de(&self) -> f64 {
        -self.i0 / (self.dphi * self.dphi)
    }

    /// `∂r_n/∂ℓ = (2ℓ+1) ∫ψ²/r² / ψ'(r_n)²`.
    pub fn dr_dl(&self, ell: f64) -> f64 {
        (2.0 * ell + 1.0) * self.i2 / (self.dphi * self.dphi)
    }

    pub fn slope(&self) -> f64 {
        self.dphi * self.log_scale.exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub r: f64,
    pub y: [f64; 6],
    pub log_scale: f64,
    /// Zeros of φ and of the free solution on `(0, r]`.
    pub zeros: usize,
    pub free_zeros: usize,
}

pub(crate) struct RunSpec<'a> {
    pub r_end: f64,
    pub outputs: &'a [f64],
    pub stop_after_zeros: Option<usize>,
    pub free: bool,
    pub record_steps: bool,
}

pub(crate) struct RunResult {
    pub zeros: Vec<ZeroInfo>,
    pub samples: Vec<Sample>,
    pub end: Sample,
}

/// Prepared integration of the regular solution at one `(ℓ, E)`.
pub(crate) struct Regular<'a> {
    sys: RadialSystem<'a>,
    ell: f64,
    r_start: f64,
    y_start: [f64; 6],
    log_start: f64,
    opts: OdeOptions,
    breakpoints: Vec<f64>,
}

/// Frobenius data of the regular solution at `r` for a locally constant
/// `V_eff = V - E`, in units where `ψ = r^{ℓ+1} Σ a_{2j} r^{2j}` is divided by
/// `r^{ℓ+1}`: returns `(φ, φ', ∫₀^r φ², ∫₀^r φ²/r²)` with the same scaling.
pub(crate) fn series_start(ell: f64, v_eff: f64, r: f64) -> [f64; 4] {
    let mut coeffs = vec![1.0];
    let r2 = r * r;
    let mut a = 1.0;
    let mut pow = 1.0;
    for j in 1..80 {
        let jf = j as f64;
        a *= v_eff / (2.0 * jf * (2.0 * jf + 2.0 * ell + 1.0));
        pow *= r2;
        coeffs.push(a);
        if (a * pow).abs() < 1e-18 {
            break;
        }
    }
    let mut val = 0.0;
    let mut slope = 0.0;
    let mut pw = 1.0;
    for (j, c) in coeffs.iter().enumerate() {
        val += c * pw;
        slope += c * pw * (ell + 1.0 + 2.0 * j as f64) / r;
        pw *= r2;
    }
    // Squared series: c_m = Σ_{i+j=m} a_i a_j, integrated term by term.
    let m_max = coeffs.len();
    let mut i0 = 0.0;
    let mut i2 = 0.0;
    let mut pw = 1.0;
    for m in 0..m_max {
        let cm: f64 = (0..=m).map(|i| coeffs[i] * coeffs[m - i]).sum();
        let mf = m as f64;
        i0 += cm * pw * r / (2.0 * ell + 3.0 + 2.0 * mf);
        i2 += cm * pw / (r * (2.0 * ell + 1.0 + 2.0 * mf));
        pw *= r2;
    }
    [val, slope, i0, i2]
}

impl<'a> Regular<'a> {
    pub fn new(pot: &'a dyn RadialPotential, ell: f64, energy: f64, cfg: &SolverConfig, free: bool) -> Result<Self> {
        cfg.validate()?;
        if !(2.0 * ell + 1.0 > 0.0) || !ell.is_finite() {
            return Err(Error::domain(format!("need 2ℓ+1 > 0, got ℓ = {ell}")));
        }
        if !energy.is_finite() {
            return Err(Error::domain("energy must be finite"));
        }
        let mut breakpoints = pot.breakpoints();
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        let v0 = pot.value(0.0);
        // The series is exact while V is constant; push the start outward for
        // high partial waves as long as that remains true to ~1e-12.
        let mut rs = cfg.r_start;
        let first_bp = breakpoints.first().copied().unwrap_or(f64::INFINITY);
        let lam = ell + 0.5;
        let cap = (0.25 * lam / (energy - v0).abs().max(1e-300).sqrt()).min(0.5 * first_bp);
        loop {
            let next = rs * 2.0;
            if next > cap {
                break;
            }
            let dv = (pot.value(next) - v0).abs();
            if dv * next * next / (4.0 * ell + 6.0) >= 1e-12 {
                break;
            }
            rs = next;
        }
        let rs = rs.min(0.5 * first_bp).max(cfg.r_start.min(0.5 * first_bp));
        let v_eff = pot.value(rs) - energy;
        let s = series_start(ell, v_eff, rs);
        let f = if free { series_start(ell, -energy, rs) } else { [0.0; 4] };
        let y_start = [s[0], s[1], s[2], s[3], f[0], f[1]];
        Ok(Regular {
            sys: RadialSystem {
                pot,
                centrifugal: ell * (ell + 1.0),
                energy,
                free,
            },
            ell,
            r_start: rs,
            y_start,
            log_start: (ell + 1.0) * rs.ln(),
            opts: cfg.ode_options(),
            breakpoints,
        })
    }

    pub fn r_start(&self) -> f64 {
        self.r_start
    }

    pub fn run(&self, spec: &RunSpec<'_>) -> Result<RunResult> {
        let r_end = spec.r_end;
        if !(r_end > self.r_start) {
            return Err(Error::domain(format!(
                "integration end {r_end} must exceed the start radius {}",
                self.r_start
            )));
        }
        let mut stops: Vec<f64> = self.breakpoints.clone();
        stops.extend(spec.outputs.iter().copied().filter(|&r| r > self.r_start && r <= r_end));
        let mut outputs: Vec<f64> = spec.outputs.iter().copied().filter(|&r| r > self.r_start && r <= r_end).collect();
        outputs.sort_by(|a, b| a.total_cmp(b));
        outputs.dedup();
        let mut next_out = 0;

        let mut zeros: Vec<ZeroInfo> = Vec::new();
        let mut samples: Vec<Sample> = Vec::new();
        let mut free_zeros = 0usize;
        let mut log_scale = self.log_start;
        let mut failure: Option<Error> = None;

        if spec.record_steps {
            samples.push(Sample {
                r: self.r_start,
                y: self.y_start,
                log_scale,
                zeros: 0,
                free_zeros: 0,
            });
        }

        let sys = &self.sys;
        let finish = ode::integrate(sys, self.r_start, self.y_start, r_end, &stops, &self.opts, |st: Step<'_, 6>| {
            let (p0, p1) = (st.y0[PHI], st.y1[PHI]);
            if p1 == 0.0 || p0 * p1 < 0.0 {
                match polish_zero(sys, &st, log_scale) {
                    Ok(z) => zeros.push(z),
                    Err(e) => {
                        failure = Some(e);
                        return Control::Stop;
                    }
                }
            }
            if spec.free {
                let (f0, f1) = (st.y0[FREE], st.y1[FREE]);
                if f1 == 0.0 || f0 * f1 < 0.0 {
                    free_zeros += 1;
                }
            }
            let at_output = next_out < outputs.len() && st.r1 >= outputs[next_out];
            if at_output || spec.record_steps {
                samples.push(Sample {
                    r: st.r1,
                    y: *st.y1,
                    log_scale,
                    zeros: zeros.len(),
                    free_zeros,
                });
                while next_out < outputs.len() && st.r1 >= outputs[next_out] {
                    next_out += 1;
                }
            }
            let big = st.y1[PHI].abs().max(st.y1[DPHI].abs()).max(st.y1[FREE].abs());
            if big > RESCALE_AT {
                for v in [PHI, DPHI, FREE, DFREE] {
                    st.y1[v] /= big;
                }
                st.y1[I0] /= big * big;
                st.y1[I2] /= big * big;
                log_scale += big.ln();
            }
            match spec.stop_after_zeros {
                Some(n) if zeros.len() >= n => Control::Stop,
                _ => Control::Continue,
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(RunResult {
            zeros,
            samples,
            end: Sample {
                r: finish.r,
                y: finish.y,
                log_scale,
                zeros: 0,
                free_zeros,
            },
        })
        .map(|mut res| {
            res.end.zeros = res.zeros.len();
            res
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
}

fn polish_zero(sys: &RadialSystem<'_>, st: &Step<'_, 6>, log_scale: f64) -> Result<ZeroInfo> {
    let (r0, y0, seg_end) = (st.r0, *st.y0, st.seg_end);
    let at = |r: f64| -> [f64; 6] {
        if r <= r0 {
            y0
        } else {
            ode::gbs_step(sys, r0, &y0, r - r0, seg_end).0
        }
    };
    let r = if st.y1[PHI] == 0.0 {
        st.r1
    } else {
        brent(|r| at(r)[PHI], r0, st.r1, 1e-15 * st.r1)?
    };
    let y = at(r);
    Ok(ZeroInfo {
        r,
        dphi: y[DPHI],
        i0: y[I0],
        i2: y[I2],
        log_scale,
    })
}

/// Regular solution on `(r_start, r_max]` with its zeros.
pub fn integrate_regular(
    potential: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    r_max: f64,
    config: &SolverConfig,
) -> Result<RegularSolutionTrace> {
    let reg = Regular::new(potential, ell, energy, config, false)?;
    if !(r_max > config.r_start) {
        return Err(Error::domain("r_max must exceed r_start"));
    }
    let outputs: Vec<f64> = match config.output_spacing {
        Some(h) if h > 0.0 => {
            let n = (r_max / h).floor() as usize;
            (1..=n).map(|i| i as f64 * h).chain(std::iter::once(r_max)).collect()
        }
        _ => Vec::new(),
    };
    let res = reg.run(&RunSpec {
        r_end: r_max,
        outputs: &outputs,
        stop_after_zeros: None,
        free: false,
        record_steps: config.output_spacing.is_none(),
    })?;
    let mut grid = Vec::with_capacity(res.samples.len());
    let mut psi = Vec::with_capacity(res.samples.len());
    let mut dpsi = Vec::with_capacity(res.samples.len());
    for s in &res.samples {
        let sc = s.log_scale.exp();
        grid.push(s.r);
        psi.push(s.y[PHI] * sc);
        dpsi.push(s.y[DPHI] * sc);
    }
    Ok(RegularSolutionTrace {
        ell: reg.ell(),
        energy,
        grid,
        psi,
        dpsi,
        zeros: res.zeros.iter().map(|z| z.r).collect(),
        zero_slopes: res.zeros.iter().map(|z| z.slope()).collect(),
    })
}

/// Default matching radius: five times the last breakpoint, or the radius
/// beyond which the potential is negligible, whichever is larger.
pub fn default_match_radius(potential: &dyn RadialPotential) -> f64 {
    let last_bp = potential.breakpoints().iter().copied().fold(0.0, f64::max);
    (5.0 * last_bp).max(potential.support_radius()).max(1.0)
}

/// Phase shift of the regular solution at wave number `k`.
///
/// The mod-π ambiguity of the matching is resolved by comparing node counts
/// of ψ and of the free solution, which selects the branch that tends to 0
/// at high energy and obeys Levinson's theorem at threshold.
pub fn phase_shift(potential: &dyn RadialPotential, ell: f64, k: f64, config: &SolverConfig) -> Result<PhaseShiftSample> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("phase shift needs k > 0, got {k}")));
    }
    if potential.is_identically_zero() {
        return Ok(PhaseShiftSample {
            ell,
            k,
            delta: 0.0,
            residual: 0.0,
        });
    }
    let rm = config.r_match.unwrap_or_else(|| default_match_radius(potential));
    let reg = Regular::new(potential, ell, k * k, config, true)?;
    let quarter = 0.25 * PI / k;
    let cands: Vec<f64> = (0..6).map(|i| rm + i as f64 * quarter).collect();
    let res = reg.run(&RunSpec {
        r_end: *cands.last().unwrap(),
        outputs: &cands,
        stop_after_zeros: None,
        free: true,
        record_steps: false,
    })?;
    let mut good: Vec<(f64, f64)> = Vec::new();
    for s in &res.samples {
        let y = &s.y;
        let amp_p = (y[PHI] * y[PHI] + (y[DPHI] / k).powi(2)).sqrt();
        let amp_f = (y[FREE] * y[FREE] + (y[DFREE] / k).powi(2)).sqrt();
        let ok = y[PHI].abs() > 0.1 * amp_p && y[FREE].abs() > 0.1 * amp_f;
        let d = match_phase(ell, k, s);
        if ok {
            good.push((s.r, d));
        }
    }
    if good.len() < 2 {
        return Err(Error::Integration {
            radius: rm,
            reason: "no well-conditioned matching radius found".into(),
        });
    }
    Ok(PhaseShiftSample {
        ell,
        k,
        delta: good[0].1,
        residual: (good[1].1 - good[0].1).abs(),
    })
}

fn match_phase(ell: f64, k: f64, s: &Sample) -> f64 {
    let y = &s.y;
    let p = riccati(ell, k * s.r);
    let a_sin = (k * y[PHI] * p.ds - y[DPHI] * p.s) / k;
    let a_cos = -(k * y[PHI] * p.dc - y[DPHI] * p.c) / k;
    let dp = a_sin.atan2(a_cos);
    let phi_m = p.s.atan2(p.c).rem_euclid(PI);
    let nodes = s.zeros as f64 - s.free_zeros as f64;
    PI * nodes + (phi_m + dp).rem_euclid(PI) - phi_m
}

/// Radius beyond which the potential is treated as exactly zero for
/// bound-state counting.
fn cut_radius(potential: &dyn RadialPotential) -> f64 {
    let last_bp = potential.breakpoints().iter().copied().fold(0.0, f64::max);
    last_bp.max(potential.support_radius()) * 1.0001 + 1e-9
}

/// Number of bound states with energy below `energy ≤ 0`.
pub(crate) fn states_below(
    potential: &dyn RadialPotential,
    ell: f64,
    energy: f64,
    config: &SolverConfig,
) -> Result<usize> {
    let r_cut = cut_radius(potential).max(config.r_start * 4.0);
    let reg = Regular::new(potential, ell, energy, config, false)?;
    let res = reg.run(&RunSpec {
        r_end: r_cut,
        outputs: &[],
        stop_after_zeros: None,
        free: false,
        record_steps: false,
    })?;
    let y = res.end.y;
    let mut n = res.zeros.len();
    if y[PHI] != 0.0 {
        let kappa = (-energy).max(0.0).sqrt();
        let target = decaying_log_derivative(ell, kappa, r_cut);
        if y[DPHI] / y[PHI] < target {
            n += 1;
        }
    }
    Ok(n)
}

/// Bound states at angular momentum ℓ: counted from the zero-energy node
/// count and located by bisection on the node count.
pub fn count_bound_states(potential: &dyn RadialPotential, ell: f64) -> Result<BoundStateSet> {
    count_bound_states_with(potential, ell, &SolverConfig::default())
}

pub fn count_bound_states_with(potential: &dyn RadialPotential, ell: f64, config: &SolverConfig) -> Result<BoundStateSet> {
    if !(2.0 * ell + 1.0 > 0.0) {
        return Err(Error::domain(format!("need 2ℓ+1 > 0, got ℓ = {ell}")));
    }
    let vmin = potential.min_value();
    if potential.is_identically_zero() || vmin >= 0.0 {
        return Ok(BoundStateSet {
            ell,
            energies: Vec::new(),
        });
    }
    let n = states_below(potential, ell, 0.0, config)?;
    let lo = vmin * (1.0 + 1e-9) - 1e-12;
    let mut energies = Vec::with_capacity(n);
    let mut failure = None;
    for j in 1..=n {
        let mut f = |e: f64| -> f64 {
            match states_below(potential, ell, e, config) {
                Ok(c) if c >= j => 1.0,
                Ok(_) => -1.0,
                Err(err) => {
                    failure.get_or_insert(err);
                    1.0
                }
            }
        };
        let e = bisect(&mut f, lo, 0.0, 1e-14 * vmin.abs().max(1.0))?;
        energies.push(e);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(BoundStateSet { ell, energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{bargmann_transparent, ClosedFormPotential, PiecewiseConstantPotential, Potential};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn free_s_wave_is_sine() {
        let t = integrate_regular(&Potential::zero(), 0.0, 1.0, 10.0, &cfg()).unwrap();
        for (i, z) in t.zeros.iter().enumerate() {
            assert!((z - (i + 1) as f64 * PI).abs() < 1e-11, "{z}");
        }
        assert_eq!(t.zeros.len(), 3);
        let c = SolverConfig {
            output_spacing: Some(PI / 2.0),
            ..cfg()
        };
        let t = integrate_regular(&Potential::zero(), 0.0, 1.0, PI / 2.0, &c).unwrap();
        assert!((t.psi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_p_wave_closed_form() {
        let c = SolverConfig {
            output_spacing: Some(PI),
            ..cfg()
        };
        let t = integrate_regular(&Potential::zero(), 1.0, 1.0, PI, &c).unwrap();
        assert!((t.psi[0] - 3.0).abs() < 1e-11, "{}", t.psi[0]);
    }

    #[test]
    fn square_well_phase_matches_closed_form() {
        let (v0, a) = (2.0, 2.0);
        let p = ClosedFormPotential::SquareWell { v0, a };
        for &k in &[0.2, 1.0, 3.0, 10.0] {
            let kp = (k * k + v0).sqrt();
            let s = phase_shift(&p, 0.0, k, &cfg()).unwrap();
            // tan(ka + δ) = (k/k') tan(k'a)
            let lhs = (k * a + s.delta).tan();
            let rhs = k / kp * (kp * a).tan();
            assert!((lhs.atan() - rhs.atan()).abs() < 1e-9, "k={k}: {} vs {}", lhs, rhs);
            assert!(s.residual < 1e-9);
        }
    }

    #[test]
    fn zero_potential_phase_is_zero() {
        let p = PiecewiseConstantPotential::new(vec![1.0], vec![0.0]).unwrap();
        let s = phase_shift(&p, 2.3, 1.7, &cfg()).unwrap();
        assert!(s.delta.abs() < 1e-12, "{}", s.delta);
    }

    #[test]
    fn square_well_bound_states() {
        // An s-wave well holds floor(√V0·a/π + 1/2) states.
        for &(v0, a) in &[(4.0, 2.0), (10.0, 2.0), (1.0, 1.0)] {
            let p = ClosedFormPotential::SquareWell { v0, a };
            let b = count_bound_states(&p, 0.0).unwrap();
            let expected = (v0.sqrt() * a / PI + 0.5).floor() as usize;
            assert_eq!(b.count(), expected, "v0={v0} a={a}");
            for e in &b.energies {
                let kappa = (-e).sqrt();
                let kp = (v0 + e).sqrt();
                // k' cot(k'a) = -κ
                assert!((kp / (kp * a).tan() + kappa).abs() < 1e-8, "{e}");
            }
        }
    }

    #[test]
    fn bargmann_has_one_state_at_minus_kappa_squared() {
        let p = bargmann_transparent(1.0, 1.0).unwrap();
        let b = count_bound_states(&p, 0.0).unwrap();
        assert_eq!(b.count(), 1);
        assert!((b.energies[0] + 1.0).abs() < 1e-8, "{:?}", b.energies);
    }
}

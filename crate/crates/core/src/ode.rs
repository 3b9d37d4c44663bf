//! Adaptive Gragg–Bulirsch–Stoer integration for small first-order systems.
//!
//! The integrator works on fixed-size state arrays and never steps across a
//! caller-supplied breakpoint, so piecewise-smooth right-hand sides keep the
//! full extrapolation order. At the right end of a step that finishes on a
//! breakpoint the right-hand side is evaluated one ulp to the left, which
//! gives the left limit of a piecewise-constant coefficient.

use crate::error::{Error, Result};

/// Modified-midpoint substep counts, one per extrapolation level.
const SEQUENCE: [usize; 6] = [2, 4, 6, 8, 10, 12];
const ORDER: f64 = (2 * SEQUENCE.len()) as f64;

pub(crate) trait OdeSystem<const N: usize> {
    fn rhs(&self, r: f64, y: &[f64; N]) -> [f64; N];

    /// Largest admissible step starting from `(r, y)`.
    fn max_step(&self, _r: f64, _y: &[f64; N]) -> f64 {
        f64::INFINITY
    }

    /// Magnitudes against which the relative tolerance is measured.
    fn error_scale(&self, _r: f64, y0: &[f64; N], y1: &[f64; N]) -> [f64; N] {
        let mut s = [0.0; N];
        for i in 0..N {
            s[i] = y0[i].abs().max(y1[i].abs());
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-13,
            atol: 1e-300,
            h_init: 1e-3,
            h_max: 0.5,
            h_min: 1e-14,
        }
    }
}

/// One accepted step, handed to the step observer.
pub(crate) struct Step<'a, const N: usize> {
    pub r0: f64,
    pub y0: &'a [f64; N],
    pub r1: f64,
    /// End state; the observer may rescale it in place.
    pub y1: &'a mut [f64; N],
    /// Right edge of the smooth segment containing the step.
    pub seg_end: f64,
}

pub(crate) enum Control {
    Continue,
    Stop,
}

/// Where integration ended.
pub(crate) struct Finish<const N: usize> {
    pub r: f64,
    pub y: [f64; N],
}

#[inline]
fn eval<S: OdeSystem<N>, const N: usize>(sys: &S, r: f64, seg_end: f64, y: &[f64; N]) -> [f64; N] {
    let r = if r >= seg_end { seg_end.next_down() } else { r };
    sys.rhs(r, y)
}

fn midpoint<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    r: f64,
    y: &[f64; N],
    f0: &[f64; N],
    big_h: f64,
    n: usize,
    seg_end: f64,
) -> [f64; N] {
    let h = big_h / n as f64;
    let mut z_prev = *y;
    let mut z = [0.0; N];
    for i in 0..N {
        z[i] = y[i] + h * f0[i];
    }
    for m in 1..n {
        let f = eval(sys, r + m as f64 * h, seg_end, &z);
        for i in 0..N {
            let next = z_prev[i] + 2.0 * h * f[i];
            z_prev[i] = z[i];
            z[i] = next;
        }
    }
    let f = eval(sys, r + big_h, seg_end, &z);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = 0.5 * (z[i] + z_prev[i] + h * f[i]);
    }
    out
}

/// A single extrapolated step of size `h`; returns the state and an error vector.
pub(crate) fn gbs_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    r: f64,
    y: &[f64; N],
    h: f64,
    seg_end: f64,
) -> ([f64; N], [f64; N]) {
    let f0 = eval(sys, r, seg_end, y);
    let k = SEQUENCE.len();
    let mut prev_row: Vec<[f64; N]> = Vec::with_capacity(k);
    let mut row: Vec<[f64; N]> = Vec::with_capacity(k);
    for j in 0..k {
        row.clear();
        row.push(midpoint(sys, r, y, &f0, h, SEQUENCE[j], seg_end));
        // Aitken–Neville extrapolation in h^2.
        for m in 1..=j {
            let ratio = (SEQUENCE[j] as f64 / SEQUENCE[j - m] as f64).powi(2) - 1.0;
            let a = row[m - 1];
            let b = prev_row[m - 1];
            let mut next = [0.0; N];
            for i in 0..N {
                next[i] = a[i] + (a[i] - b[i]) / ratio;
            }
            row.push(next);
        }
        std::mem::swap(&mut prev_row, &mut row);
    }
    let best = prev_row[k - 1];
    let lower = prev_row[k - 2];
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = best[i] - lower[i];
    }
    (best, err)
}

fn error_norm<const N: usize>(opts: &OdeOptions, scale: &[f64; N], err: &[f64; N]) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * scale[i];
        let e = err[i] / sc;
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

/// Integrates from `r0` to `r_end`, never crossing any of `breakpoints`.
pub(crate) fn integrate<S, C, const N: usize>(
    sys: &S,
    r0: f64,
    y0: [f64; N],
    r_end: f64,
    breakpoints: &[f64],
    opts: &OdeOptions,
    mut observer: C,
) -> Result<Finish<N>>
where
    S: OdeSystem<N>,
    C: FnMut(Step<'_, N>) -> Control,
{
    let mut r = r0;
    let mut y = y0;
    let mut h = opts.h_init.min(opts.h_max);
    let mut stops: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > r0 && b < r_end)
        .collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.push(r_end);
    let mut next_stop = 0;

    while r < r_end {
        while stops[next_stop] <= r {
            next_stop += 1;
        }
        let seg_end = stops[next_stop];
        let h_cap = opts.h_max.min(sys.max_step(r, &y));
        h = h.min(h_cap);
        let mut hits_end = false;
        if r + h >= seg_end || (seg_end - r - h) < 1e-9 * h {
            h = seg_end - r;
            hits_end = true;
        }
        let (y_new, err) = gbs_step(sys, r, &y, h, seg_end);
        let en = error_norm(opts, &sys.error_scale(r, &y, &y_new), &err);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < opts.h_min * r.abs().max(1.0) {
                return Err(Error::Integration {
                    radius: r,
                    reason: "non-finite state".into(),
                });
            }
            continue;
        }
        if en > 1.0 {
            let fac = (0.94 * (0.65 / en).powf(1.0 / (ORDER - 1.0))).clamp(0.1, 0.9);
            h *= fac;
            if h < opts.h_min * r.abs().max(1.0) {
                return Err(Error::Integration {
                    radius: r,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            continue;
        }
        let r_new = if hits_end { seg_end } else { r + h };
        let mut y_end = y_new;
        let ctl = observer(Step {
            r0: r,
            y0: &y,
            r1: r_new,
            y1: &mut y_end,
            seg_end,
        });
        let fac = if en == 0.0 {
            4.0
        } else {
            (0.94 * (0.65 / en).powf(1.0 / (ORDER - 1.0))).clamp(0.2, 4.0)
        };
        let h_used = h;
        r = r_new;
        y = y_end;
        h = (h_used * fac).min(opts.h_max);
        if matches!(ctl, Control::Stop) {
            return Ok(Finish { r, y });
        }
    }
    Ok(Finish { r, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator(f64);
    impl OdeSystem<2> for Oscillator {
        fn rhs(&self, _r: f64, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -self.0 * self.0 * y[0]]
        }
    }

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let sys = Oscillator(3.0);
        let out = integrate(&sys, 0.0, [0.0, 3.0], 10.0, &[], &OdeOptions::default(), |_| Control::Continue)
            .unwrap();
        assert!((out.y[0] - (30.0f64).sin()).abs() < 1e-11);
        assert!((out.y[1] - 3.0 * (30.0f64).cos()).abs() < 1e-10);
    }

    struct Step1;
    impl OdeSystem<1> for Step1 {
        fn rhs(&self, r: f64, _y: &[f64; 1]) -> [f64; 1] {
            [if r < 1.0 { 2.0 } else { -1.0 }]
        }
    }

    #[test]
    fn breakpoints_keep_piecewise_rhs_exact() {
        let out = integrate(&Step1, 0.0, [0.0], 3.0, &[1.0], &OdeOptions::default(), |_| Control::Continue)
            .unwrap();
        assert!((out.y[0] - 0.0).abs() < 1e-13, "{}", out.y[0]);
    }

    #[test]
    fn observer_can_stop() {
        let sys = Oscillator(1.0);
        let mut count = 0;
        let out = integrate(&sys, 0.0, [0.0, 1.0], 100.0, &[], &OdeOptions::default(), |s| {
            count += 1;
            if s.r1 > 2.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert!(out.r > 2.0 && out.r < 5.0);
    }
}

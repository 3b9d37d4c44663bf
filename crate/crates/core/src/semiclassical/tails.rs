//! Extrapolation models used past the end of tabulated data.

use crate::error::Result;
use crate::quad::integrate;

/// `y ≈ c x^{-p}` beyond the last sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerTail {
    pub c: f64,
    pub p: f64,
}

impl PowerTail {
    /// The exponent comes from a log-log least-squares fit over the last
    /// decade of samples; the amplitude is pinned so the model passes through
    /// `anchor` at the last abscissa. Returns `None` when the data do not
    /// span a full decade, when fewer than four samples lie in it, or when
    /// they do not share one non-zero sign.
    pub fn fit(xs: &[f64], ys: &[f64], anchor: f64) -> Option<PowerTail> {
        let x_end = *xs.last()?;
        if anchor == 0.0 || !anchor.is_finite() || xs[0] > 0.1 * x_end * (1.0 + 1e-9) {
            return None;
        }
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(ys)
            .filter(|(&x, _)| x >= 0.1 * x_end && x > 0.0)
            .map(|(&x, &y)| (x, y))
            .collect();
        if pts.len() < 4 || pts.iter().any(|&(_, y)| y == 0.0 || y.signum() != anchor.signum()) {
            return None;
        }
        let n = pts.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &pts {
            let (lx, ly) = (x.ln(), y.abs().ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        let den = n * sxx - sx * sx;
        if den <= 0.0 {
            return None;
        }
        let p = -(n * sxy - sx * sy) / den;
        Some(PowerTail {
            c: anchor * x_end.powf(p),
            p,
        })
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.p * self.c * x.powf(-self.p - 1.0)
    }
}

/// `∫_a^∞ f(x) dx` through `x = a / (1 - s)`, for integrands decaying at
/// least like `x^{-1-ε}`.
pub(crate) fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    integrate(
        |s| {
            let u = 1.0 - s;
            f(a / u) * a / (u * u)
        },
        0.0,
        1.0,
        tol,
        tol,
    )
    .map(|q| q.value)
}

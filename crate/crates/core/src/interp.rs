//! One-dimensional interpolants: piecewise linear, monotone cubic (PCHIP) and
//! cubic splines in second-derivative form (natural or smoothing).

use crate::error::{Error, Result};

fn locate(xs: &[f64], x: f64) -> usize {
    // Index i with xs[i] <= x < xs[i+1], clamped to the valid interval range.
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(xs.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(xs.len() - 2),
    }
}

fn check_abscissae(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::domain("abscissae and ordinates differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::Resolution {
            points: xs.len(),
            needed: 2,
        });
    }
    if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotone {
            index: i + 1,
            reason: "abscissae must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Linear interpolation on sorted abscissae, clamped to the end values.
pub fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = locate(xs, x);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Butland slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_abscissae(&xs, &ys)?;
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = del[0];
            ds[1] = del[0];
            return Ok(Pchip { xs, ys, ds });
        }
        for i in 1..n - 1 {
            if del[i - 1] * del[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        ds[0] = end_slope(h[0], h[1], del[0], del[1]);
        ds[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        Ok(Pchip { xs, ys, ds })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Value and first derivative at `x` (cubic extrapolation outside the data).
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1;
        (v, dv / h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Cubic spline stored as knot values and knot second derivatives.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    gs: Vec<f64>,
    gammas: Vec<f64>,
}

impl CubicSpline {
    /// Natural interpolating spline.
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_abscissae(&xs, &ys)?;
        if xs.len() < 3 {
            return Ok(CubicSpline {
                gammas: vec![0.0; xs.len()],
                gs: ys,
                xs,
            });
        }
        Ok(reinsch(&xs, &ys, 0.0).spline(xs))
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.gs
    }

    /// Value, first and second derivative. Linear extrapolation beyond the ends.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            let edge = if x < self.xs[0] { self.xs[0] } else { self.xs[n - 1] };
            let (v, d, _) = self.eval3(edge);
            return (v + d * (x - edge), d, 0.0);
        }
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (g0, g1, c0, c1) = (self.gs[i], self.gs[i + 1], self.gammas[i], self.gammas[i + 1]);
        let v = (1.0 - t) * g0 + t * g1 - h * h * t * (1.0 - t) / 6.0 * ((2.0 - t) * c0 + (1.0 + t) * c1);
        let d = (g1 - g0) / h - h / 6.0 * ((2.0 - 6.0 * t + 3.0 * t * t) * c0 + (1.0 - 3.0 * t * t) * c1);
        let dd = (1.0 - t) * c0 + t * c1;
        (v, d, dd)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval3(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval3(x).1
    }
}

struct ReinschFit {
    gs: Vec<f64>,
    gammas: Vec<f64>,
    rss: f64,
    trace_influence: f64,
}

impl ReinschFit {
    fn spline(self, xs: Vec<f64>) -> CubicSpline {
        CubicSpline {
            xs,
            gs: self.gs,
            gammas: self.gammas,
        }
    }
}

/// Reinsch's algorithm for the smoothing spline minimising
/// `Σ (y_i - g(x_i))² + α ∫ g''²`, with unit weights.
fn reinsch(xs: &[f64], ys: &[f64], alpha: f64) -> ReinschFit {
    let n = xs.len();
    let m = n - 2;
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Column j of Q (j = 0..m) touches rows j, j+1, j+2.
    let q = |j: usize| -> [f64; 3] { [1.0 / h[j], -1.0 / h[j] - 1.0 / h[j + 1], 1.0 / h[j + 1]] };
    // Band of M = R + α QᵀQ: diagonal, first and second super-diagonals.
    let mut b0 = vec![0.0; m];
    let mut b1 = vec![0.0; m];
    let mut b2 = vec![0.0; m];
    for j in 0..m {
        let qj = q(j);
        b0[j] = (h[j] + h[j + 1]) / 3.0 + alpha * (qj[0] * qj[0] + qj[1] * qj[1] + qj[2] * qj[2]);
        if j + 1 < m {
            let qk = q(j + 1);
            b1[j] = h[j + 1] / 6.0 + alpha * (qj[1] * qk[0] + qj[2] * qk[1]);
        }
        if j + 2 < m {
            let qk = q(j + 2);
            b2[j] = alpha * qj[2] * qk[0];
        }
    }
    // LDLᵀ with unit lower-triangular L of bandwidth two.
    let mut d = vec![0.0; m];
    let mut l1 = vec![0.0; m]; // L[j+1][j]
    let mut l2 = vec![0.0; m]; // L[j+2][j]
    for j in 0..m {
        let mut dj = b0[j];
        if j >= 1 {
            dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
        }
        if j >= 2 {
            dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
        }
        d[j] = dj;
        if j + 1 < m {
            let mut v = b1[j];
            if j >= 1 {
                v -= l1[j - 1] * l2[j - 1] * d[j - 1];
            }
            l1[j] = v / dj;
        }
        if j + 2 < m {
            l2[j] = b2[j] / dj;
        }
    }
    // Solve M γ = Qᵀ y.
    let mut z: Vec<f64> = (0..m)
        .map(|j| {
            let qj = q(j);
            qj[0] * ys[j] + qj[1] * ys[j + 1] + qj[2] * ys[j + 2]
        })
        .collect();
    for j in 0..m {
        if j >= 1 {
            z[j] -= l1[j - 1] * z[j - 1];
        }
        if j >= 2 {
            z[j] -= l2[j - 2] * z[j - 2];
        }
    }
    for j in 0..m {
        z[j] /= d[j];
    }
    for j in (0..m).rev() {
        if j + 1 < m {
            z[j] -= l1[j] * z[j + 1];
        }
        if j + 2 < m {
            z[j] -= l2[j] * z[j + 2];
        }
    }
    let mut gammas = vec![0.0; n];
    gammas[1..n - 1].copy_from_slice(&z);
    let mut gs = ys.to_vec();
    if alpha > 0.0 {
        for j in 0..m {
            let qj = q(j);
            for (k, c) in qj.iter().enumerate() {
                gs[j + k] -= alpha * c * z[j];
            }
        }
    }
    let rss = gs.iter().zip(ys).map(|(g, y)| (g - y) * (g - y)).sum();

    // Band of M⁻¹ (Hutchinson–de Hoog) to get tr(I - A) = α tr(Q M⁻¹ Qᵀ).
    let mut s0 = vec![0.0; m];
    let mut s1 = vec![0.0; m];
    let mut s2 = vec![0.0; m];
    for i in (0..m).rev() {
        let a1 = if i + 1 < m { l1[i] } else { 0.0 };
        let a2 = if i + 2 < m { l2[i] } else { 0.0 };
        let s_11 = if i + 1 < m { s0[i + 1] } else { 0.0 };
        let s_12 = if i + 2 < m { s1[i + 1] } else { 0.0 };
        let s_22 = if i + 2 < m { s0[i + 2] } else { 0.0 };
        s2[i] = -a1 * s_12 - a2 * s_22;
        s1[i] = -a1 * s_11 - a2 * s_12;
        s0[i] = 1.0 / d[i] - a1 * s1[i] - a2 * s2[i];
    }
    let band = |j: usize, k: usize| -> f64 {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        match b - a {
            0 => s0[a],
            1 => s1[a],
            2 => s2[a],
            _ => 0.0,
        }
    };
    let mut tr = 0.0;
    for row in 0..n {
        let lo = row.saturating_sub(2);
        let hi = row.min(m - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            let qj = q(j)[row - j];
            for k in lo..=hi {
                acc += qj * band(j, k) * q(k)[row - k];
            }
        }
        tr += acc;
    }
    ReinschFit {
        gs,
        gammas,
        rss,
        trace_influence: n as f64 - alpha * tr,
    }
}

/// Smoothing spline whose parameter minimises generalised cross-validation.
#[derive(Debug, Clone)]
pub struct SmoothingSpline {
    pub spline: CubicSpline,
    pub alpha: f64,
    pub gcv: f64,
}

impl SmoothingSpline {
    pub fn fit_gcv(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_abscissae(xs, ys)?;
        let n = xs.len();
        if n < 5 {
            return Err(Error::Resolution { points: n, needed: 5 });
        }
        let span = xs[n - 1] - xs[0];
        let score = |log_a: f64| -> f64 {
            let fit = reinsch(xs, ys, 10f64.powf(log_a));
            let denom = (n as f64 - fit.trace_influence) / n as f64;
            if denom <= 0.0 {
                return f64::INFINITY;
            }
            (fit.rss / n as f64) / (denom * denom)
        };
        // Scale-aware search range: α has units of span³.
        let base = 3.0 * span.log10();
        let (lo, hi) = (base - 16.0, base + 2.0);
        let steps = 37;
        let grid: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
        let scores: Vec<f64> = grid.iter().map(|&g| score(g)).collect();
        let best = (0..steps).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps - 1)]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (score(c), score(d));
        for _ in 0..40 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = score(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = score(d);
            }
        }
        let log_a = 0.5 * (a + b);
        let alpha = 10f64.powf(log_a);
        let gcv = score(log_a);
        Ok(SmoothingSpline {
            spline: reinsch(xs, ys, alpha).spline(xs.to_vec()),
            alpha,
            gcv,
        })
    }

    /// Fit with a caller-chosen smoothing parameter.
    pub fn fit_with(xs: &[f64], ys: &[f64], alpha: f64) -> Result<Self> {
        check_abscissae(xs, ys)?;
        if xs.len() < 3 {
            return Err(Error::Resolution {
                points: xs.len(),
                needed: 3,
            });
        }
        Ok(SmoothingSpline {
            spline: reinsch(xs, ys, alpha).spline(xs.to_vec()),
            alpha,
            gcv: f64::NAN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_is_monotone_and_interpolates() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 3.0, 3.1, 10.0];
        let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
        let mut prev = p.eval(0.0);
        for i in 1..=400 {
            let v = p.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn natural_spline_reproduces_cubic_interior_accuracy() {
        let xs: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::natural(xs, ys).unwrap();
        assert!((s.eval(3.05) - 3.05f64.sin()).abs() < 1e-6);
        assert!((s.derivative(3.05) - 3.05f64.cos()).abs() < 1e-4);
    }

    #[test]
    fn trace_matches_dense_computation() {
        // Influence-matrix trace by brute force: apply the smoother to unit vectors.
        let xs: Vec<f64> = (0..9).map(|i| (i as f64).powf(1.3)).collect();
        let alpha = 0.7;
        let fit = reinsch(&xs, &[0.0; 9], alpha);
        let mut tr = 0.0;
        for i in 0..9 {
            let mut e = vec![0.0; 9];
            e[i] = 1.0;
            tr += reinsch(&xs, &e, alpha).gs[i];
        }
        assert!((fit.trace_influence - tr).abs() < 1e-10, "{} vs {tr}", fit.trace_influence);
    }

    #[test]
    fn gcv_smooths_noise() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        // Deterministic pseudo-noise.
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| x.sin() + 0.01 * (((i * 7919) % 101) as f64 / 50.0 - 1.0))
            .collect();
        let s = SmoothingSpline::fit_gcv(&xs, &ys).unwrap();
        let err = (s.spline.derivative(5.0) - 5f64.cos()).abs();
        assert!(err < 0.05, "derivative error {err}");
    }
}

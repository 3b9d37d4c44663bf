//! Oracles shared by the integration tests.
#![allow(dead_code)]

use nodal_scatter::potentials::PiecewiseConstantPotential;

pub fn pcpot() -> PiecewiseConstantPotential {
    PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.0, -1.0]).unwrap()
}

/// Uniform grid on `[a, b]` with spacing close to `h`, both ends included.
pub fn radii(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = ((b - a) / h).round() as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `(sin(qx)/q, cos(qx))` continued through `q² ≤ 0` as `(sinh(κx)/κ, cosh(κx))`.
fn pair(q2: f64, x: f64) -> (f64, f64) {
    if q2 > 0.0 {
        let q = q2.sqrt();
        ((q * x).sin() / q, (q * x).cos())
    } else if q2 < 0.0 {
        let k = (-q2).sqrt();
        ((k * x).sinh() / k, (k * x).cosh())
    } else {
        (x, 1.0)
    }
}

/// s-wave regular solution of a step potential (zero tail) by exact matching
/// of the piecewise solutions, normalised as `ψ ~ r` at the origin.
/// Returns `(ψ, ψ')` at `r`.
pub fn step_solution(bps: &[f64], values: &[f64], energy: f64, r: f64) -> (f64, f64) {
    let (mut psi, mut dpsi, mut r0) = (0.0, 1.0, 0.0);
    for (j, &v) in values.iter().chain(std::iter::once(&0.0)).enumerate() {
        let end = bps.get(j).copied().unwrap_or(f64::INFINITY).min(r);
        let q2 = energy - v;
        let (s, c) = pair(q2, end - r0);
        let next = (psi * c + dpsi * s, dpsi * c - q2 * psi * s);
        psi = next.0;
        dpsi = next.1;
        r0 = end;
        if end >= r {
            break;
        }
    }
    (psi, dpsi)
}

/// Root of a sign-changing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on `[a, b]` located on a scan of step `h`.
pub fn scan_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = a;
    let mut fx = f(x);
    while x < b {
        let y = (x + h).min(b);
        let fy = f(y);
        if fx * fy < 0.0 {
            out.push(bisect(&f, x, y));
        }
        x = y;
        fx = fy;
    }
    out
}

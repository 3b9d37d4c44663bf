//! Riccati–Bessel functions of real order and zeros of the free regular solution.

use crate::roots::brent;
use std::f64::consts::PI;

/// Values and x-derivatives of the Riccati–Bessel pair for order ℓ.
///
/// `s(x) = sqrt(πx/2) J_{ℓ+1/2}(x)` and `c(x) = -sqrt(πx/2) Y_{ℓ+1/2}(x)`,
/// so that `s ~ sin(x - ℓπ/2)` and `c ~ cos(x - ℓπ/2)` for large x.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiPair {
    pub s: f64,
    pub ds: f64,
    pub c: f64,
    pub dc: f64,
}

pub fn riccati(ell: f64, x: f64) -> RiccatiPair {
    assert!(x > 0.0, "riccati functions need x > 0");
    let nu = ell + 0.5;
    if (ell - 0.0).abs() < 1e-15 {
        let (sn, cs) = x.sin_cos();
        return RiccatiPair {
            s: sn,
            ds: cs,
            c: cs,
            dc: -sn,
        };
    }
    let (j, y, jp, yp) = puruspe::besseljy(nu, x);
    let a = (0.5 * PI * x).sqrt();
    let da = 0.25 * PI / a;
    RiccatiPair {
        s: a * j,
        ds: da * j + a * jp,
        c: -a * y,
        dc: -(da * y + a * yp),
    }
}

/// Logarithmic derivative `d'/d` of the solution decaying as `exp(-κr)` for the
/// free equation at energy `-κ²` and angular momentum ℓ.
pub fn decaying_log_derivative(ell: f64, kappa: f64, r: f64) -> f64 {
    if kappa == 0.0 {
        return -ell / r;
    }
    let x = kappa * r;
    if x > 500.0 {
        let nu = ell + 0.5;
        // ln K_ν(x) ~ -x - ln(x)/2 + (4ν²-1)/(8x) + const
        return kappa * (-1.0 - (4.0 * nu * nu - 1.0) / (8.0 * x * x));
    }
    let (_, k, _, kp) = puruspe::besselik(ell + 0.5, x);
    kappa * (0.5 / x + kp / k)
}

/// The `n`-th positive zero (n ≥ 1) of the free regular solution of order ℓ,
/// i.e. the n-th zero of `J_{ℓ+1/2}`.
pub fn free_zero(ell: f64, n: usize) -> f64 {
    assert!(n >= 1);
    if ell == 0.0 {
        return n as f64 * PI;
    }
    let nu = ell + 0.5;
    let f = |x: f64| riccati(ell, x).s;
    // The first zero exceeds ν; zeros are at least ~π apart once past it.
    let step = 0.5;
    let mut x = nu.max(0.05);
    let mut fx = f(x);
    let mut found = 0;
    loop {
        let x2 = x + step;
        let f2 = f(x2);
        if fx == 0.0 || fx.signum() != f2.signum() {
            found += 1;
            if found == n {
                return brent(f, x, x2, 1e-15 * x2).expect("bracketed");
            }
        }
        x = x2;
        fx = f2;
    }
}

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series below x = 2, complex continued fraction (modified Lentz) above.
pub fn sici(x: f64) -> (f64, f64) {
    const EULER: f64 = 0.577_215_664_901_532_9;
    const EPS: f64 = 1e-16;
    assert!(x > 0.0, "sici needs x > 0");
    if x > 2.0 {
        // Complex arithmetic on (re, im) pairs.
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let inv = |a: (f64, f64)| {
            let d = a.0 * a.0 + a.1 * a.1;
            (a.0 / d, -a.1 / d)
        };
        let mut b = (1.0, x);
        let mut c = (1e300, 0.0);
        let mut d = inv(b);
        let mut h = d;
        for i in 2..200 {
            let a = -((i - 1) * (i - 1)) as f64;
            b.0 += 2.0;
            d = inv((a * d.0 + b.0, a * d.1 + b.1));
            let ac = inv(c);
            c = (b.0 + a * ac.0, b.1 + a * ac.1);
            let del = mul(c, d);
            h = mul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < EPS {
                break;
            }
        }
        let (sn, cs) = x.sin_cos();
        let h = mul((cs, -sn), h);
        return (0.5 * PI + h.1, -h.0);
    }
    let (mut sum_s, mut sum_c) = (0.0, 0.0);
    let mut fact = 1.0;
    for k in 1..100 {
        fact *= x / k as f64;
        let term = fact / k as f64;
        // Odd k feed Si with alternating signs, even k feed Ci.
        match k % 4 {
            1 => sum_s += term,
            2 => sum_c -= term,
            3 => sum_s -= term,
            _ => sum_c += term,
        }
        if term < EPS * sum_s.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    (sum_s, sum_c + x.ln() + EULER)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_matches_closed_form() {
        let x = 2.3f64;
        let p = riccati(1.0, x);
        assert!((p.s - (x.sin() / x - x.cos())).abs() < 1e-13);
        assert!((p.c - (x.cos() / x + x.sin())).abs() < 1e-13);
        let ds = x.cos() / x - x.sin() / (x * x) + x.sin();
        assert!((p.ds - ds).abs() < 1e-12);
    }

    #[test]
    fn wronskian_is_one() {
        for &(l, x) in &[(0.3, 0.7), (2.0, 5.0), (7.5, 3.0), (1.0, 40.0)] {
            let p = riccati(l, x);
            assert!((p.s * p.dc - p.ds * p.c + 1.0).abs() < 1e-10, "{l} {x}");
        }
    }

    #[test]
    fn zeros_of_first_order() {
        // tan x = x
        let z = free_zero(1.0, 1);
        assert!((z.tan() - z).abs() < 1e-9);
        assert!((z - 4.493409457909064).abs() < 1e-12);
        assert!((free_zero(0.0, 3) - 3.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn decaying_derivative_s_wave() {
        assert!((decaying_log_derivative(0.0, 2.0, 1.3) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sine_cosine_integrals() {
        // Reference values from standard tables.
        let cases = [
            (0.5, 0.493_107_418_043_066_6, -0.177_784_078_806_612_4),
            (1.0, 0.946_083_070_367_183, 0.337_403_922_900_968_1),
            (2.0, 1.605_412_976_802_695, 0.422_980_828_774_865),
            (5.0, 1.549_931_244_944_674, -0.190_029_749_656_643_9),
            (20.0, 1.548_241_701_043_44, 0.044_419_820_845_353_3),
        ];
        for (x, si, ci) in cases {
            let (s, c) = sici(x);
            assert!((s - si).abs() < 1e-13, "Si({x}) = {s}");
            assert!((c - ci).abs() < 1e-13, "Ci({x}) = {c}");
        }
    }
}

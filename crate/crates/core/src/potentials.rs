//! Radial potentials: piecewise-constant, closed-form and tabulated.
//!
//! Every potential implements [`RadialPotential`]. The serialisable
//! [`Potential`] enum is what files and the command line deal in; test code
//! may also wrap arbitrary closures with [`FnPotential`].

use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};

/// A real radial potential `V(r)` on `r ≥ 0`, in units of 1/L².
pub trait RadialPotential: Send + Sync {
    /// Value at `r ≥ 0`; at a discontinuity the right limit.
    fn value(&self, r: f64) -> f64;

    /// Radii where `V` or one of its low derivatives is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Radius beyond which `|V|` is negligible (below about 1e-18 relative to
    /// its scale) or exactly zero.
    fn support_radius(&self) -> f64;

    /// A lower bound (up to sampling) for `V` on `[0, ∞)`.
    fn min_value(&self) -> f64 {
        let rs = self.support_radius().max(1e-6);
        let mut m = 0.0f64;
        for i in 0..=4000 {
            m = m.min(self.value(rs * i as f64 / 4000.0));
        }
        for b in self.breakpoints() {
            m = m.min(self.value(b)).min(self.value(b.next_down().max(0.0)));
        }
        m
    }

    fn is_identically_zero(&self) -> bool {
        false
    }
}

/// `V(r)` with the right-limit convention; negative radii are rejected.
pub fn evaluate(potential: &dyn RadialPotential, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("potential evaluated at negative radius {r}")));
    }
    Ok(potential.value(r))
}

/// Piecewise-constant potential vanishing beyond its last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantPotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantPotential {
    /// `values[j]` holds on `(breakpoints[j-1], breakpoints[j])`, with an
    /// implicit leading breakpoint at 0 and a zero tail.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::domain(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.first().is_some_and(|&b| !(b > 0.0)) {
            return Err(Error::domain("breakpoints must be positive"));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!("breakpoints not strictly increasing at index {}", i + 1)));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite breakpoint or value"));
        }
        Ok(PiecewiseConstantPotential { breakpoints, values })
    }

    pub fn zero() -> Self {
        PiecewiseConstantPotential {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        0.0
    }
}

impl RadialPotential for PiecewiseConstantPotential {
    fn value(&self, r: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= r);
        self.values.get(idx).copied().unwrap_or(0.0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
    fn support_radius(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }
    fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::min)
    }
    fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Analytic potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormPotential {
    Zero,
    /// `-v0` for `r < a`, zero beyond.
    SquareWell { v0: f64, a: f64 },
    /// `A exp(-μ r)`.
    Exponential { amplitude: f64, mu: f64 },
    /// `A exp(-r²/σ²)`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// One-bound-state Bargmann potential `-2 (ln(1 + c ∫₀ʳ sinh²(κt) dt))''`.
    BargmannTransparent { kappa: f64, c: f64 },
}

/// Builds the Bargmann potential with a single s-wave bound state at `-κ²`.
pub fn bargmann_transparent(kappa: f64, c: f64) -> Result<ClosedFormPotential> {
    if !(kappa > 0.0 && c > 0.0) || !kappa.is_finite() || !c.is_finite() {
        return Err(Error::domain(format!("bargmann parameters must be positive, got κ={kappa}, c={c}")));
    }
    Ok(ClosedFormPotential::BargmannTransparent { kappa, c })
}

fn bargmann_value(kappa: f64, c: f64, r: f64) -> f64 {
    // Everything is multiplied by u = exp(-2κr) to stay finite at large r.
    let u = (-2.0 * kappa * r).exp();
    let one_minus_u = -(-2.0 * kappa * r).exp_m1();
    let one_minus_u2 = -(-4.0 * kappa * r).exp_m1();
    // ∫₀ʳ sinh² = sinh(2κr)/(4κ) - r/2; the series avoids cancellation near 0.
    let x = kappa * r;
    let integral_u = if x < 1e-3 {
        let x2 = x * x;
        (x * x2 / (3.0 * kappa)) * (1.0 + x2 / 5.0 + 2.0 * x2 * x2 / 105.0) * u
    } else {
        one_minus_u2 / (8.0 * kappa) - 0.5 * r * u
    };
    let f = u + c * integral_u;
    let fp = 0.25 * c * one_minus_u * one_minus_u;
    let fpp = 0.5 * c * kappa * one_minus_u2;
    let a = fp / f;
    -2.0 * (fpp / f - a * a)
}

impl RadialPotential for ClosedFormPotential {
    fn value(&self, r: f64) -> f64 {
        match *self {
            ClosedFormPotential::Zero => 0.0,
            ClosedFormPotential::SquareWell { v0, a } => {
                if r < a {
                    -v0
                } else {
                    0.0
                }
            }
            ClosedFormPotential::Exponential { amplitude, mu } => amplitude * (-mu * r).exp(),
            ClosedFormPotential::Gaussian { amplitude, sigma } => amplitude * (-(r / sigma).powi(2)).exp(),
            ClosedFormPotential::BargmannTransparent { kappa, c } => bargmann_value(kappa, c, r),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            ClosedFormPotential::SquareWell { a, .. } => vec![a],
            _ => Vec::new(),
        }
    }

    fn support_radius(&self) -> f64 {
        const TINY: f64 = 1e-18;
        match *self {
            ClosedFormPotential::Zero => 0.0,
            ClosedFormPotential::SquareWell { a, .. } => a,
            ClosedFormPotential::Exponential { amplitude, mu } => (amplitude.abs() / TINY).max(1.0).ln() / mu,
            ClosedFormPotential::Gaussian { amplitude, sigma } => sigma * (amplitude.abs() / TINY).max(1.0).ln().sqrt(),
            ClosedFormPotential::BargmannTransparent { kappa, .. } => {
                // |V| ~ C r exp(-2κr); walk outward until it is negligible.
                let scale = self.value(1.0 / kappa).abs().max(kappa * kappa);
                let mut r = 1.0 / kappa;
                while self.value(r).abs() > TINY * scale || self.value(1.5 * r).abs() > TINY * scale {
                    r *= 1.25;
                }
                r
            }
        }
    }

    fn min_value(&self) -> f64 {
        match *self {
            ClosedFormPotential::Zero => 0.0,
            ClosedFormPotential::SquareWell { v0, .. } => (-v0).min(0.0),
            ClosedFormPotential::Exponential { amplitude, .. } | ClosedFormPotential::Gaussian { amplitude, .. } => {
                amplitude.min(0.0)
            }
            ClosedFormPotential::BargmannTransparent { kappa, .. } => {
                let rs = self.support_radius();
                let mut m = 0.0f64;
                for i in 0..=8000 {
                    m = m.min(self.value(rs * i as f64 / 8000.0));
                }
                // Sampling can miss the exact minimum slightly.
                m - 1e-3 * kappa * kappa
            }
        }
    }

    fn is_identically_zero(&self) -> bool {
        match *self {
            ClosedFormPotential::Zero => true,
            ClosedFormPotential::SquareWell { v0, .. } => v0 == 0.0,
            ClosedFormPotential::Exponential { amplitude, .. } | ClosedFormPotential::Gaussian { amplitude, .. } => {
                amplitude == 0.0
            }
            ClosedFormPotential::BargmannTransparent { .. } => false,
        }
    }
}

/// Potential given by samples, linearly interpolated and zero beyond the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPotential {
    r: Vec<f64>,
    v: Vec<f64>,
}

impl TabulatedPotential {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.is_empty() {
            return Err(Error::domain("tabulated potential needs equal-length, non-empty columns"));
        }
        if !(r[0] >= 0.0) {
            return Err(Error::domain("first tabulated radius must be non-negative"));
        }
        if let Some(i) = r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!("tabulated radii not strictly increasing at index {}", i + 1)));
        }
        if r.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite tabulated sample"));
        }
        Ok(TabulatedPotential { r, v })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }
}

impl RadialPotential for TabulatedPotential {
    fn value(&self, r: f64) -> f64 {
        let last = *self.r.last().unwrap();
        if r > last {
            return 0.0;
        }
        if self.r.len() == 1 {
            return self.v[0];
        }
        crate::interp::linear(&self.r, &self.v, r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.r.iter().copied().filter(|&x| x > 0.0).collect()
    }
    fn support_radius(&self) -> f64 {
        *self.r.last().unwrap()
    }
    fn min_value(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::min)
    }
    fn is_identically_zero(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0)
    }
}

/// Any potential that can appear in a description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialFile", into = "PotentialFile")]
pub enum Potential {
    PiecewiseConstant(PiecewiseConstantPotential),
    ClosedForm(ClosedFormPotential),
    Tabulated(TabulatedPotential),
}

impl Potential {
    pub fn zero() -> Self {
        Potential::ClosedForm(ClosedFormPotential::Zero)
    }

    fn inner(&self) -> &dyn RadialPotential {
        match self {
            Potential::PiecewiseConstant(p) => p,
            Potential::ClosedForm(p) => p,
            Potential::Tabulated(p) => p,
        }
    }
}

impl From<PiecewiseConstantPotential> for Potential {
    fn from(p: PiecewiseConstantPotential) -> Self {
        Potential::PiecewiseConstant(p)
    }
}

impl From<ClosedFormPotential> for Potential {
    fn from(p: ClosedFormPotential) -> Self {
        Potential::ClosedForm(p)
    }
}

impl From<TabulatedPotential> for Potential {
    fn from(p: TabulatedPotential) -> Self {
        Potential::Tabulated(p)
    }
}

impl RadialPotential for Potential {
    fn value(&self, r: f64) -> f64 {
        self.inner().value(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner().breakpoints()
    }
    fn support_radius(&self) -> f64 {
        self.inner().support_radius()
    }
    fn min_value(&self) -> f64 {
        self.inner().min_value()
    }
    fn is_identically_zero(&self) -> bool {
        self.inner().is_identically_zero()
    }
}

/// On-disk shape of a potential description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialFile {
    Zero,
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    SquareWell { v0: f64, a: f64 },
    Exponential { amplitude: f64, mu: f64 },
    Gaussian { amplitude: f64, sigma: f64 },
    BargmannTransparent { kappa: f64, c: f64 },
    Tabulated { samples: Vec<(f64, f64)> },
}

impl TryFrom<PotentialFile> for Potential {
    type Error = Error;
    fn try_from(f: PotentialFile) -> Result<Self> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive and finite, got {x}")))
            }
        };
        Ok(match f {
            PotentialFile::Zero => Potential::zero(),
            PotentialFile::PiecewiseConstant { breakpoints, values } => {
                PiecewiseConstantPotential::new(breakpoints, values)?.into()
            }
            PotentialFile::SquareWell { v0, a } => {
                positive("a", a)?;
                if !v0.is_finite() {
                    return Err(Error::domain("v0 must be finite"));
                }
                ClosedFormPotential::SquareWell { v0, a }.into()
            }
            PotentialFile::Exponential { amplitude, mu } => {
                positive("mu", mu)?;
                ClosedFormPotential::Exponential { amplitude, mu }.into()
            }
            PotentialFile::Gaussian { amplitude, sigma } => {
                positive("sigma", sigma)?;
                ClosedFormPotential::Gaussian { amplitude, sigma }.into()
            }
            PotentialFile::BargmannTransparent { kappa, c } => bargmann_transparent(kappa, c)?.into(),
            PotentialFile::Tabulated { samples } => {
                let (r, v) = samples.into_iter().unzip();
                TabulatedPotential::new(r, v)?.into()
            }
        })
    }
}

impl From<Potential> for PotentialFile {
    fn from(p: Potential) -> Self {
        match p {
            Potential::PiecewiseConstant(p) => PotentialFile::PiecewiseConstant {
                breakpoints: p.breakpoints,
                values: p.values,
            },
            Potential::ClosedForm(c) => match c {
                ClosedFormPotential::Zero => PotentialFile::Zero,
                ClosedFormPotential::SquareWell { v0, a } => PotentialFile::SquareWell { v0, a },
                ClosedFormPotential::Exponential { amplitude, mu } => PotentialFile::Exponential { amplitude, mu },
                ClosedFormPotential::Gaussian { amplitude, sigma } => PotentialFile::Gaussian { amplitude, sigma },
                ClosedFormPotential::BargmannTransparent { kappa, c } => {
                    PotentialFile::BargmannTransparent { kappa, c }
                }
            },
            Potential::Tabulated(t) => PotentialFile::Tabulated {
                samples: t.r.into_iter().zip(t.v).collect(),
            },
        }
    }
}

/// A potential defined by a closure, for experiments and tests.
pub struct FnPotential<F> {
    f: F,
    breakpoints: Vec<f64>,
    support: f64,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnPotential<F> {
    pub fn new(f: F, support: f64) -> Self {
        FnPotential {
            f,
            breakpoints: Vec::new(),
            support,
        }
    }

    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        self.breakpoints = breakpoints;
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialPotential for FnPotential<F> {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
    fn support_radius(&self) -> f64 {
        self.support
    }
}

/// The two integrals of the integrability condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    /// `∫_b^∞ |V| dr`, infinite when judged divergent.
    pub tail_integral: f64,
    /// `∫₀^∞ r |V| dr`, infinite when judged divergent.
    pub origin_integral: f64,
    pub passes: bool,
    pub diagnostics: String,
}

/// Checks `∫₀^b r|V| < ∞` and `∫_b^∞ |V| < ∞`.
///
/// Both integrals are evaluated on shrinking inner cutoffs `b/2^m` and growing
/// outer cutoffs `r_cut·2^m` (m = 0..3); an integral whose value grows by more
/// than 10% at each of the three refinements is declared divergent. Closed-form
/// potentials are additionally integrated out to their support radius, so the
/// reported values include the exponentially small tail.
pub fn check_integrability(potential: &dyn RadialPotential, b: f64, r_cut: f64) -> IntegrabilityReport {
    let mut diag = Vec::new();
    if !(b > 0.0 && r_cut > b) {
        return IntegrabilityReport {
            tail_integral: f64::NAN,
            origin_integral: f64::NAN,
            passes: false,
            diagnostics: format!("need 0 < b < r_cut, got b={b}, r_cut={r_cut}"),
        };
    }
    if potential.is_identically_zero() {
        return IntegrabilityReport {
            tail_integral: 0.0,
            origin_integral: 0.0,
            passes: true,
            diagnostics: "identically zero".into(),
        };
    }
    let bps = potential.breakpoints();
    let integral = |weight: bool, lo: f64, hi: f64| -> Option<f64> {
        let pts = quad::partition(lo, hi, &bps);
        let f = |r: f64| {
            let v = potential.value(r).abs();
            if weight {
                r * v
            } else {
                v
            }
        };
        quad::integrate_pieces(f, &pts, 1e-13, 1e-11).ok().map(|q| q.value)
    };
    let diverges = |seq: &[f64]| -> bool { seq.windows(2).all(|w| w[0] > 0.0 && w[1] > 1.1 * w[0]) };

    // Tail integral: only the outer cutoff moves.
    let tail_seq: Vec<Option<f64>> = (0..4).map(|m| integral(false, b, r_cut * 2f64.powi(m))).collect();
    // Origin integral: both cutoffs move together.
    let origin_seq: Vec<Option<f64>> = (0..4)
        .map(|m| {
            let s = 2f64.powi(m);
            integral(true, b / s, r_cut * s)
        })
        .collect();

    let finish = |name: &str, seq: &[Option<f64>], weight: bool, lo: f64, diag: &mut Vec<String>| -> f64 {
        if seq.iter().any(|v| v.is_none()) {
            diag.push(format!("{name}: quadrature failed to converge; treated as divergent"));
            return f64::INFINITY;
        }
        let vals: Vec<f64> = seq.iter().map(|v| v.unwrap()).collect();
        if diverges(&vals) {
            diag.push(format!("{name}: grows under refinement {vals:?}; divergent"));
            return f64::INFINITY;
        }
        let far = r_cut.max(potential.support_radius());
        match integral(weight, lo, far) {
            Some(v) => v,
            None => {
                diag.push(format!("{name}: quadrature to the support radius failed"));
                f64::INFINITY
            }
        }
    };
    let tail_integral = finish("tail", &tail_seq, false, b, &mut diag);
    let origin_integral = finish("origin", &origin_seq, true, 0.0, &mut diag);
    let passes = tail_integral.is_finite() && origin_integral.is_finite();
    if passes {
        diag.push("both integrals converge".into());
    }
    IntegrabilityReport {
        tail_integral,
        origin_integral,
        passes,
        diagnostics: diag.join("; "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcpot() -> PiecewiseConstantPotential {
        PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.0, -1.0]).unwrap()
    }

    #[test]
    fn pcpot_values_use_right_limits() {
        let p = pcpot();
        assert_eq!(evaluate(&p, 1.0).unwrap(), -2.0);
        assert_eq!(evaluate(&p, 2.5).unwrap(), -1.0);
        assert_eq!(p.value(2.0), -1.0);
        assert_eq!(p.value(3.0), 0.0);
        assert!(evaluate(&p, -0.1).is_err());
    }

    #[test]
    fn integrability_of_pcpot_is_exact() {
        let rep = check_integrability(&pcpot(), 1.0, 10.0);
        assert!(rep.passes, "{}", rep.diagnostics);
        assert!((rep.tail_integral - 3.0).abs() < 3e-10);
        assert!((rep.origin_integral - 6.5).abs() < 6.5e-10);
    }

    #[test]
    fn inverse_square_fails() {
        let p = FnPotential::new(|r: f64| 1.0 / (r * r), 1.0);
        let rep = check_integrability(&p, 1.0, 10.0);
        assert!(!rep.passes);
        assert!(rep.origin_integral.is_infinite());
        assert!(rep.tail_integral.is_finite());
    }

    #[test]
    fn zero_potential_passes() {
        let rep = check_integrability(&Potential::zero(), 1.0, 10.0);
        assert!(rep.passes);
        assert_eq!(rep.tail_integral, 0.0);
        assert_eq!(rep.origin_integral, 0.0);
    }

    #[test]
    fn bargmann_matches_direct_formula() {
        // Direct second derivative of ln F by the quotient rule at moderate r.
        let (k, c) = (1.0f64, 1.0f64);
        let p = bargmann_transparent(k, c).unwrap();
        for &r in &[0.2, 1.0, 2.5, 6.0] {
            let f = 1.0 + c * ((2.0 * k * r).sinh() / (4.0 * k) - r / 2.0);
            let fp = c * (k * r).sinh().powi(2);
            let fpp = c * k * (2.0 * k * r).sinh();
            let direct = -2.0 * (fpp / f - (fp / f).powi(2));
            assert!((p.value(r) - direct).abs() < 1e-12 * (1.0 + direct.abs()), "r={r}");
        }
        assert!(p.value(0.0).abs() < 1e-15);
        assert!(bargmann_transparent(0.0, 1.0).is_err());
        assert!(bargmann_transparent(1.0, -1.0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p: Potential = serde_json::from_str(r#"{"kind":"piecewise_constant","breakpoints":[2,3],"values":[-2,-1]}"#)
            .unwrap();
        assert_eq!(p.value(2.5), -1.0);
        let s = serde_json::to_string(&p).unwrap();
        let q: Potential = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = serde_json::from_str::<Potential>(r#"{"kind":"piecewise_constant","breakpoints":[3,2],"values":[-2,-1]}"#);
        assert!(bad.is_err());
        let g: Potential = serde_json::from_str(r#"{"kind":"gaussian","amplitude":0.2,"sigma":1}"#).unwrap();
        assert!((g.value(1.0) - 0.2 * (-1f64).exp()).abs() < 1e-15);
    }
}

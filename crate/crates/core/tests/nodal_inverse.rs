use nodal_scatter::error::Error;
use nodal_scatter::nodal_inverse::{
    detect_discontinuities, detect_discontinuities_re, junction_discontinuity, reconstruct_from_re_line,
    reconstruct_mixed, reconstruct_piecewise, third_derivative_profile, wronskian_residual,
};
use nodal_scatter::nodal_lines::{
    energy_at_radius, invert_line, trace_fixed_l_line_at_radii, trace_mixed_line_at_radii, ZeroLine,
};
use nodal_scatter::potentials::{ClosedFormPotential, PiecewiseConstantPotential, Potential, RadialPotential};
use nodal_scatter::radial_solver::SolverConfig;
use proptest::prelude::*;

mod common;
use common::{pcpot, radii};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn fixed_l_line(pot: &dyn RadialPotential, n: usize, r_hi: f64, h: f64) -> ZeroLine {
    trace_fixed_l_line_at_radii(pot, 0.0, n, &radii(0.3, r_hi, h), &cfg()).unwrap()
}

fn reconstruct(pot: &dyn RadialPotential, n: usize, r_hi: f64) -> PiecewiseConstantPotential {
    let inv = invert_line(&fixed_l_line(pot, n, r_hi, 0.02)).unwrap();
    let events = detect_discontinuities(&inv, None).unwrap();
    reconstruct_piecewise(&inv, &events).unwrap()
}

fn assert_same_steps(got: &PiecewiseConstantPotential, want: &PiecewiseConstantPotential, tol_v: f64, tol_b: f64) {
    assert_eq!(got.breakpoints().len(), want.breakpoints().len(), "{got:?} vs {want:?}");
    for (a, b) in got.breakpoints().iter().zip(want.breakpoints()) {
        assert!((a - b).abs() < tol_b, "breakpoint {a} vs {b}");
    }
    for (a, b) in got.values().iter().zip(want.values()) {
        assert!((a - b).abs() < tol_v, "value {a} vs {b}");
    }
}

#[test]
fn pcpot_is_recovered_from_its_first_line() {
    let inv = invert_line(&fixed_l_line(&pcpot(), 1, 4.0, 0.02)).unwrap();
    let events = detect_discontinuities(&inv, None).unwrap();
    assert_eq!(events.len(), 2, "{events:?}");
    assert!((events[0].location - 2.0).abs() < 1e-3 && (events[1].location - 3.0).abs() < 1e-3);
    // V(2⁺) - V(2⁻) = +1 and V(3⁺) - V(3⁻) = +1
    for e in &events {
        assert!((e.inferred_jump - 1.0).abs() < 1e-3, "{e:?}");
        assert!((e.inferred_jump + e.jump_e3 / (2.0 * e.slope_e1)).abs() < 1e-12);
        assert!(e.confidence > 1.0);
    }
    let v = reconstruct_piecewise(&inv, &events).unwrap();
    assert_same_steps(&v, &pcpot(), 1e-3, 1e-3);
    assert_eq!(v.tail(), 0.0);
}

#[test]
fn profile_separates_at_the_jumps() {
    let inv = invert_line(&fixed_l_line(&pcpot(), 1, 4.0, 0.02)).unwrap();
    let prof = third_derivative_profile(&inv).unwrap();
    let near = |a: f64| prof.iter().filter(|p| (p.r - a).abs() < 0.011).map(|p| (p.left - p.right).abs()).fold(0.0, f64::max);
    let far = prof
        .iter()
        .filter(|p| (p.r - 2.0).abs() > 0.2 && (p.r - 3.0).abs() > 0.2)
        .map(|p| (p.left - p.right).abs())
        .fold(0.0, f64::max);
    assert!(near(2.0) > 0.5 && near(3.0) > 0.5);
    assert!(far < 0.05, "far {far}");
}

#[test]
fn zero_potential_reconstructs_to_zero() {
    let z = Potential::zero();
    let v = reconstruct(&z, 1, 4.0);
    assert!(v.breakpoints().is_empty());
    let line = fixed_l_line(&z, 1, 4.0, 0.02);
    let v = reconstruct_from_re_line(&line).unwrap();
    assert!(v.breakpoints().is_empty());
}

#[test]
fn single_step_both_routes() {
    let step = PiecewiseConstantPotential::new(vec![1.0], vec![-1.0]).unwrap();
    let v = reconstruct(&step, 1, 3.0);
    assert_same_steps(&v, &step, 1e-3, 1e-3);
    let line = fixed_l_line(&step, 1, 3.0, 0.02);
    let det = detect_discontinuities_re(&line, None).unwrap();
    assert_eq!(det.events.len(), 1, "{:?}", det.events);
    let v = reconstruct_from_re_line(&line).unwrap();
    assert_same_steps(&v, &step, 1e-3, 1e-3);
}

#[test]
fn both_routes_agree_on_dense_lines() {
    let line = fixed_l_line(&pcpot(), 1, 4.0, 0.005);
    let a = reconstruct_from_re_line(&line).unwrap();
    let inv = invert_line(&line).unwrap();
    let b = reconstruct_piecewise(&inv, &detect_discontinuities(&inv, None).unwrap()).unwrap();
    assert_same_steps(&a, &b, 1e-6, 1e-6);
}

#[test]
fn undersampled_lines_are_a_resolution_error() {
    let line = trace_fixed_l_line_at_radii(&pcpot(), 0.0, 1, &radii(0.5, 4.0, 0.25), &cfg()).unwrap();
    let inv = invert_line(&line).unwrap();
    assert!(matches!(detect_discontinuities(&inv, None), Err(Error::Resolution { .. })));
}

#[test]
fn lemma_one_lines_agree() {
    let a = reconstruct(&pcpot(), 1, 4.0);
    let b = reconstruct(&pcpot(), 2, 4.0);
    assert_same_steps(&a, &b, 1e-2, 1e-2);
}

#[test]
fn junction_step_is_recovered() {
    // V = -2 on (0, 1), -1 on (1, r0), 0 beyond, with E0 chosen so that the
    // first zero sits exactly at the outer step r0 = 2.5.
    let r0 = 2.5;
    let pot = PiecewiseConstantPotential::new(vec![1.0, r0], vec![-2.0, -1.0]).unwrap();
    let (e0, _) = energy_at_radius(&pot, 0.0, 1, r0, &cfg()).unwrap();
    let line = trace_mixed_line_at_radii(&pot, 0.0, e0, 1, &radii(0.3, 4.5, 0.02), &cfg()).unwrap();
    assert!((line.junction().unwrap() - r0).abs() < 1e-9);
    let rec = reconstruct_mixed(&line, None).unwrap();
    assert!(rec.junction.reliable, "{:?}", rec.junction);
    assert!((rec.junction.v - (-1.0)).abs() < 1e-2, "{:?}", rec.junction);
    assert_same_steps(&rec.potential, &pot, 1e-2, 1e-2);
}

#[test]
fn junction_of_smooth_points_is_zero() {
    let z = Potential::zero();
    let line = trace_mixed_line_at_radii(&z, 0.0, 1.0, 1, &radii(0.3, 5.0, 0.05), &cfg()).unwrap();
    let j = junction_discontinuity(&line, 1, 0.0, &[]).unwrap();
    assert!(j.v.abs() < 1e-8 && j.v0 == 0.0, "{j:?}");

    // pcpot with r0 = r_1(0, 1.5) away from 2 and 3
    let line = trace_mixed_line_at_radii(&pcpot(), 0.0, 1.5, 1, &radii(0.3, 4.5, 0.02), &cfg()).unwrap();
    let r0 = line.junction().unwrap();
    assert!((r0 - 2.0).abs() > 0.1 && (r0 - 3.0).abs() > 0.1, "r0 = {r0}");
    let rec = reconstruct_mixed(&line, None).unwrap();
    assert!(rec.junction.v.abs() < 1e-2, "{:?}", rec.junction);
    assert_same_steps(&rec.potential, &pcpot(), 1e-2, 1e-2);
    assert!(junction_discontinuity(&line, 2, 0.0, &[]).is_err());
}

#[test]
fn wronskian_identity_and_theorem_integral() {
    let z = Potential::zero();
    let line = trace_fixed_l_line_at_radii(&z, 0.0, 1, &radii(0.4, 6.0, 5.6 / 29.0), &cfg()).unwrap();
    assert_eq!(line.points.len(), 30);

    let same = wronskian_residual(&pcpot(), &pcpot(), 0.0, &line, &cfg()).unwrap();
    assert!(same.wronskian_residual.iter().all(|w| w.integral == 0.0 && w.residual < 1e-9));

    let probe = wronskian_residual(&z, &pcpot(), 0.0, &line, &cfg()).unwrap();
    assert_eq!(probe.wronskian_residual.len(), 30);
    assert!(probe.max_identity_residual() < 1e-7);

    // Along the free line ψ₁(r(E)) = 0, so the Wronskian reduces to ψ₁'ψ₂,
    // which for a different potential cannot vanish on a whole interval.
    let well = ClosedFormPotential::SquareWell { v0: 0.5, a: 1.0 };
    let probe = wronskian_residual(&z, &well, 0.0, &line, &cfg()).unwrap();
    let inner: Vec<f64> = probe.wronskian_residual.iter().filter(|w| w.r < 1.0).map(|w| w.integral.abs()).collect();
    assert!(!inner.is_empty());
    let smallest = inner.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(smallest > 1e-4, "smallest |∫ΔVψ₁ψ₂| on r < 1 is {smallest}");
}

#[test]
fn diagonal_kernel_keeps_its_sign() {
    let pairs: Vec<(Box<dyn RadialPotential>, Box<dyn RadialPotential>)> = vec![
        (Box::new(pcpot()), Box::new(pcpot())),
        (
            Box::new(pcpot()),
            Box::new(PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.02, -1.0]).unwrap()),
        ),
        (
            Box::new(ClosedFormPotential::Gaussian { amplitude: -1.0, sigma: 1.0 }),
            Box::new(ClosedFormPotential::Gaussian { amplitude: -1.01, sigma: 1.0 }),
        ),
    ];
    for (p1, p2) in &pairs {
        let line = trace_fixed_l_line_at_radii(p1.as_ref(), 0.0, 1, &radii(0.3, 5.0, 0.25), &cfg()).unwrap();
        let probe = wronskian_residual(p1.as_ref(), p2.as_ref(), 0.0, &line, &cfg()).unwrap();
        let signs: Vec<f64> = probe.kernel_diag.iter().map(|k| k.value.signum()).collect();
        assert!(signs.iter().all(|&s| s == signs[0] && s != 0.0), "{:?}", probe.kernel_diag);
        assert!(probe.volterra_norm.is_finite());
    }
}

fn three_steps() -> impl Strategy<Value = PiecewiseConstantPotential> {
    // breakpoints at least 0.5 apart inside [0.5, 4], jumps of at least 0.3
    (0.5f64..1.2, 0.5f64..1.1, 0.5f64..1.1, -3.0f64..0.0, 0.3f64..1.5, 0.3f64..1.5).prop_map(|(a, g1, g2, v3, j1, j2)| {
        let b = vec![a, a + g1, a + g1 + g2];
        let v3 = if v3.abs() < 0.3 { -0.3 } else { v3 };
        let v2 = if v3 + j2 > 0.0 { v3 - j2 } else { v3 + j2 };
        let v1 = if v2 - j1 >= -3.0 { v2 - j1 } else { v2 + j1 };
        PiecewiseConstantPotential::new(b, vec![v1, v2, v3]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]
    #[test]
    fn random_three_step_round_trip(pot in three_steps()) {
        let r_hi = pot.breakpoints()[2] + 1.0;
        let inv = invert_line(&fixed_l_line(&pot, 1, r_hi, 0.02)).unwrap();
        let events = detect_discontinuities(&inv, None).unwrap();
        // each inferred jump reproduces the constructed V-jump
        prop_assert_eq!(events.len(), 3);
        let vals = pot.values();
        let jumps = [vals[1] - vals[0], vals[2] - vals[1], -vals[2]];
        for (e, j) in events.iter().zip(jumps) {
            prop_assert!((e.inferred_jump - j).abs() < 1e-2 * j.abs(), "{} vs {}", e.inferred_jump, j);
        }
        let rec = reconstruct_piecewise(&inv, &events).unwrap();
        assert_same_steps(&rec, &pot, 1e-2, 0.02);
    }
}

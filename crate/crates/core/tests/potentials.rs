use nodal_scatter::potentials::{
    bargmann_transparent, check_integrability, evaluate, ClosedFormPotential, FnPotential, PiecewiseConstantPotential,
    Potential, RadialPotential, TabulatedPotential,
};
use nodal_scatter::radial_solver::count_bound_states;
use proptest::prelude::*;

fn pcpot() -> PiecewiseConstantPotential {
    PiecewiseConstantPotential::new(vec![2.0, 3.0], vec![-2.0, -1.0]).unwrap()
}

#[test]
fn pcpot_examples() {
    assert_eq!(evaluate(&pcpot(), 1.0).unwrap(), -2.0);
    assert_eq!(evaluate(&pcpot(), 2.5).unwrap(), -1.0);
    assert_eq!(evaluate(&pcpot(), 17.0).unwrap(), 0.0);
    assert_eq!(evaluate(&Potential::zero(), 7.3).unwrap(), 0.0);
    assert!(evaluate(&pcpot(), f64::NAN).is_err());
}

#[test]
fn constructor_rejects_bad_layouts() {
    assert!(PiecewiseConstantPotential::new(vec![1.0], vec![]).is_err());
    assert!(PiecewiseConstantPotential::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    assert!(PiecewiseConstantPotential::new(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
    assert!(PiecewiseConstantPotential::new(vec![1.0], vec![f64::INFINITY]).is_err());
    assert!(TabulatedPotential::new(vec![0.0, 1.0, 0.5], vec![0.0; 3]).is_err());
    assert_eq!(pcpot().tail(), 0.0);
}

#[test]
fn integrability_oracle() {
    let rep = check_integrability(&pcpot(), 1.0, 10.0);
    assert!(rep.passes);
    assert!((rep.tail_integral - 3.0).abs() <= 3.0 * 1e-10);
    assert!((rep.origin_integral - 6.5).abs() <= 6.5 * 1e-10);

    let inv_sq = FnPotential::new(|r: f64| r.powi(-2), 1.0);
    let rep = check_integrability(&inv_sq, 1.0, 10.0);
    assert!(!rep.passes, "{}", rep.diagnostics);
    assert!(rep.origin_integral.is_infinite());

    // 1/r is integrable at the origin but not at infinity.
    let coulomb = FnPotential::new(|r: f64| 1.0 / r.max(1e-300), 1.0);
    let rep = check_integrability(&coulomb, 1.0, 10.0);
    assert!(!rep.passes);
    assert!(rep.tail_integral.is_infinite());

    // ∫₀^∞ r e^{-r} = 1 and ∫₁^∞ e^{-r} = 1/e.
    let exp = ClosedFormPotential::Exponential { amplitude: 1.0, mu: 1.0 };
    let rep = check_integrability(&exp, 1.0, 10.0);
    assert!(rep.passes);
    assert!((rep.origin_integral - 1.0).abs() < 1e-10);
    assert!((rep.tail_integral - (-1f64).exp()).abs() < 1e-10);
}

#[test]
fn bargmann_decays_exponentially() {
    let v = bargmann_transparent(1.0, 1.0).unwrap();
    // |V| ~ 8κ² c' r e^{-2κr}; allow the linear prefactor with a generous C.
    let c = (1..=40)
        .map(|i| {
            let r = 5.0 + i as f64 * 0.5;
            v.value(r).abs() * (2.0 * r).exp() / r
        })
        .fold(0.0, f64::max);
    assert!(c.is_finite() && c < 100.0);
    for i in 0..=60 {
        let r = 5.0 + i as f64 * 0.5;
        assert!(v.value(r).abs() <= 100.0 * r * (-2.0 * r).exp());
    }
}

#[test]
fn bargmann_small_c_limit() {
    // The limit is pointwise: the well drifts outward like ln(1/c)/(2κ), so
    // the check uses a fixed window.
    let mut prev = f64::INFINITY;
    for &c in &[1e-2, 1e-4, 1e-6, 1e-8] {
        let v = bargmann_transparent(1.0, c).unwrap();
        let m = (0..=60).map(|i| v.value(i as f64 * 0.05).abs()).fold(0.0, f64::max);
        // To first order V ≈ -2cκ sinh(2κr), at most about 400c on [0, 3].
        assert!(m < prev && m < 500.0 * c, "c={c}: max |V| = {m}");
        prev = m;
    }
}

#[test]
fn bargmann_bound_state() {
    let v = bargmann_transparent(1.0, 1.0).unwrap();
    let set = count_bound_states(&v, 0.0).unwrap();
    assert_eq!(set.count(), 1);
    assert!((set.energies[0] + 1.0).abs() < 1e-6, "{:?}", set.energies);
}

#[test]
fn json_descriptions_round_trip() {
    let docs = [
        r#"{"kind":"zero"}"#,
        r#"{"kind":"square_well","v0":4,"a":2}"#,
        r#"{"kind":"exponential","amplitude":-1.5,"mu":0.7}"#,
        r#"{"kind":"bargmann_transparent","kappa":1,"c":1}"#,
        r#"{"kind":"tabulated","samples":[[0,-1],[1,-0.5],[2,0]]}"#,
    ];
    for d in docs {
        let p: Potential = serde_json::from_str(d).unwrap();
        let back: Potential = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
    }
    assert!(serde_json::from_str::<Potential>(r#"{"kind":"gaussian","amplitude":1,"sigma":0}"#).is_err());
    assert!(serde_json::from_str::<Potential>(r#"{"kind":"bargmann_transparent","kappa":1,"c":0}"#).is_err());
    assert!(serde_json::from_str::<Potential>(r#"{"kind":"square_well","v0":1,"a":1,"extra":2}"#).is_err());
}

fn step_potential() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.5, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(|(gaps, values)| {
                let mut acc = 0.0;
                let bps = gaps
                    .into_iter()
                    .map(|g| {
                        acc += g;
                        acc
                    })
                    .collect();
                (bps, values)
            })
    })
}

proptest! {
    #[test]
    fn piecewise_evaluation_matches_interval(
        (bps, values) in step_potential(),
        rs in prop::collection::vec(0.0f64..10.0, 1000),
    ) {
        let p = PiecewiseConstantPotential::new(bps.clone(), values.clone()).unwrap();
        for r in rs {
            let expected = match bps.iter().position(|&b| r < b) {
                Some(j) => values[j],
                None => 0.0,
            };
            let got = evaluate(&p, r).unwrap();
            prop_assert_eq!(got, expected);
            prop_assert_eq!(evaluate(&p, r).unwrap(), got);
        }
    }

    #[test]
    fn piecewise_integrals_match_exact_sums((bps, values) in step_potential()) {
        let p = PiecewiseConstantPotential::new(bps.clone(), values.clone()).unwrap();
        let b = 0.5 * bps[0];
        let mut lo = 0.0;
        let (mut origin, mut tail) = (0.0, 0.0);
        for (&hi, &v) in bps.iter().zip(&values) {
            origin += v.abs() * (hi * hi - lo * lo) / 2.0;
            tail += v.abs() * (hi - lo.max(b)).max(0.0);
            lo = hi;
        }
        let rep = check_integrability(&p, b, 2.0 * bps[bps.len() - 1] + 1.0);
        prop_assert!(rep.passes);
        prop_assert!((rep.origin_integral - origin).abs() <= 1e-10 * origin.max(1e-12));
        prop_assert!((rep.tail_integral - tail).abs() <= 1e-10 * tail.max(1e-12));
    }
}

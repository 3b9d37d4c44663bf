use nodal_scatter_web::{phase_shifts_json, reconstruct_json, trace_lines_json};
use serde_json::Value;
use std::f64::consts::PI;

const PCPOT: &str = r#"{"kind":"piecewise_constant","breakpoints":[2,3],"values":[-2,-1]}"#;

#[test]
fn free_lines_follow_n_pi_over_root_e() {
    let out: Value = serde_json::from_str(&trace_lines_json(r#"{"kind":"zero"}"#, 0.0, 3, 1.0, 9.0, 9).unwrap()).unwrap();
    let lines = out.as_array().unwrap();
    assert_eq!(lines.len(), 3);
    for line in lines {
        let n = line["n"].as_f64().unwrap();
        for (e, r) in line["energy"].as_array().unwrap().iter().zip(line["r"].as_array().unwrap()) {
            let (e, r) = (e.as_f64().unwrap(), r.as_f64().unwrap());
            assert!((r - n * PI / e.sqrt()).abs() < 1e-8 * r);
        }
    }
}

#[test]
fn reconstruction_finds_both_steps() {
    let out: Value = serde_json::from_str(&reconstruct_json(PCPOT, 0.3, 4.0, 186).unwrap()).unwrap();
    let bps: Vec<f64> = out["breakpoints"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let vals: Vec<f64> = out["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(bps.len(), 2);
    assert!((bps[0] - 2.0).abs() < 0.02 && (bps[1] - 3.0).abs() < 0.02);
    assert!((vals[0] + 2.0).abs() < 0.02 && (vals[1] + 1.0).abs() < 0.02);
}

#[test]
fn zero_potential_has_zero_phases() {
    let out: Value = serde_json::from_str(&phase_shifts_json(r#"{"kind":"zero"}"#, 1.0, 0.5, 5.0, 10).unwrap()).unwrap();
    for d in out["exact"].as_array().unwrap() {
        assert!(d.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn bad_requests_are_errors() {
    assert!(trace_lines_json("{", 0.0, 1, 1.0, 2.0, 5).is_err());
    assert!(trace_lines_json(PCPOT, 0.0, 1, 2.0, 1.0, 5).is_err());
    assert!(reconstruct_json(PCPOT, 0.0, 4.0, 100).is_err());
    assert!(phase_shifts_json(PCPOT, 0.0, 1.0, 2.0, 1_000_000).is_err());
}

use crate::args::JwkbArgs;
use crate::error::{CliError, CliResult};
use crate::io::{Run, RunManifest};
use crate::table::{num, CsvBuilder, CsvFile};
use nodal_scatter::potentials::Potential;
use nodal_scatter::semiclassical::{mixed_jwkb_invert, PhaseShiftTable, TurningPointCurve};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(args: &JwkbArgs, out: &Path) -> CliResult<RunManifest> {
    let mut run = Run::new(out, "invert jwkb", args)?;
    let file = CsvFile::read(&args.table)?;
    run.digest_input(&args.table)?;
    let table = read_table(&file)?;
    let res = run
        .time("mixed inversion", || mixed_jwkb_invert(&table))
        .map_err(|e| CliError::stage(e, "stitch"))?;

    let mut csv = CsvBuilder::new(&["r", "V"]);
    for (&r, &v) in res.potential.radii().iter().zip(res.potential.values()) {
        csv.row(vec![r.into(), v.into()]);
    }
    run.write("potential.csv", &csv.finish())?;
    let mut json = serde_json::to_vec_pretty(&Potential::from(res.potential.clone())).expect("potential serialises");
    json.push(b'\n');
    run.write("potential.json", &json)?;
    run.write("turning_fixed_energy.csv", &curve_csv(&res.fixed_energy_curve, "lambda"))?;
    run.write("turning_fixed_ell.csv", &curve_csv(&res.fixed_ell_curve, "k"))?;
    let mut low = CsvBuilder::new(&["k", "delta"]).meta_num("ell0", table.ell0);
    for &(k, d) in &res.low_k_phase {
        low.row(vec![k.into(), d.into()]);
    }
    run.write("low_k_phase.csv", &low.finish())?;

    let mut s = String::new();
    let _ = writeln!(s, "[input]");
    let _ = writeln!(s, "table: {}", args.table.display());
    let _ = writeln!(s, "ell0: {}", num(table.ell0));
    let _ = writeln!(s, "k0: {}", num(table.k0));
    let _ = writeln!(s, "fixed_l_samples: {}", table.fixed_l.len());
    let _ = writeln!(s, "fixed_e_samples: {}", table.fixed_e.len());
    let c = &table.continuity;
    let _ = writeln!(s, "max_step_fixed_l: {}", num(c.max_step_fixed_l));
    let _ = writeln!(s, "max_step_fixed_e: {}", num(c.max_step_fixed_e));
    if let Some(m) = c.corner_mismatch {
        let _ = writeln!(s, "corner_mismatch: {}", num(m));
    }
    let _ = writeln!(s, "\n[seam]");
    let _ = writeln!(s, "radius_fixed_energy: {}", num(res.seam_radius));
    let _ = writeln!(s, "radius_fixed_ell: {}", num(res.seam_radius_fixed_ell));
    let _ = writeln!(s, "residual: {}", num(res.seam_residual));
    let _ = writeln!(s, "\n[diagnostics]");
    let _ = writeln!(s, "fixed_energy_curve_monotone: {}", res.fixed_energy_curve.monotone);
    let _ = writeln!(s, "fixed_ell_curve_monotone: {}", res.fixed_ell_curve.monotone);
    if let Some(k) = res.zero_phase_below {
        let _ = writeln!(s, "zero_phase_below_k: {}", num(k));
    }
    let worst_tail = res
        .fixed_energy_curve
        .tail_error
        .iter()
        .chain(&res.fixed_ell_curve.tail_error)
        .fold(0.0f64, |a, &b| a.max(b));
    let _ = writeln!(s, "max_tail_error: {}", num(worst_tail));
    run.write("report.txt", s.as_bytes())?;
    run.finish()
}

fn curve_csv(c: &TurningPointCurve, parameter: &'static str) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&[parameter, "r", "r_free", "tail_error"]).meta("monotone", c.monotone);
    for i in 0..c.parameter.len() {
        csv.row(vec![
            c.parameter[i].into(),
            c.radii[i].into(),
            c.free_reference[i].into(),
            c.tail_error[i].into(),
        ]);
    }
    csv.finish()
}

/// Reads a phase table. Rows of branch `fixed_l` give `(k, δ(ℓ0, k))`; rows
/// of branch `fixed_e` give `(ℓ + 1/2, δ(ℓ, k0))`. `ℓ0` and `k0` come from
/// the metadata when present and from the rows otherwise.
fn read_table(file: &CsvFile) -> CliResult<PhaseShiftTable> {
    let bad = |msg: String| CliError::input(format!("{}: {msg}", file.path));
    let branch = file.column_text("branch")?;
    let ell = file.column_f64("ell")?;
    let k = file.column_f64("k")?;
    let delta = file.column_f64("delta")?;
    let (mut fixed_l, mut fixed_e) = (Vec::new(), Vec::new());
    let (mut ell0, mut k0) = (file.meta_f64("ell0").ok(), file.meta_f64("k0").ok());
    for i in 0..file.len() {
        match branch[i].as_str() {
            "fixed_l" => {
                let e0 = *ell0.get_or_insert(ell[i]);
                if ell[i] != e0 {
                    return Err(bad(format!("row {}: fixed_l rows must share ℓ0 = {e0}", i + 1)));
                }
                fixed_l.push((k[i], delta[i]));
            }
            "fixed_e" => {
                let kk = *k0.get_or_insert(k[i]);
                if k[i] != kk {
                    return Err(bad(format!("row {}: fixed_e rows must share k0 = {kk}", i + 1)));
                }
                fixed_e.push((ell[i] + 0.5, delta[i]));
            }
            other => return Err(bad(format!("row {}: unknown branch `{other}`", i + 1))),
        }
    }
    let (Some(ell0), Some(k0)) = (ell0, k0) else {
        return Err(bad("table needs both fixed_l and fixed_e rows".into()));
    };
    fixed_l.sort_by(|a, b| a.0.total_cmp(&b.0));
    fixed_e.sort_by(|a, b| a.0.total_cmp(&b.0));
    PhaseShiftTable::new(ell0, k0, fixed_l, fixed_e).map_err(|e| bad(format!("invalid phase table: {e}")))
}

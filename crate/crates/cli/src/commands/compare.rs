use super::{file_name, potential_input};
use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::grid::{ascending, parse_grid};
use crate::io::{Run, RunManifest};
use crate::table::{num, CsvBuilder};
use nodal_scatter::potentials::evaluate;
use std::fmt::Write as _;
use std::path::Path;

pub fn run(args: &CompareArgs, out: &Path) -> CliResult<RunManifest> {
    let radii = ascending(parse_grid(&args.grid)?);
    if radii.iter().any(|&r| r < 0.0) {
        return Err(CliError::input("comparison radii must be non-negative"));
    }
    let mut run = Run::new(out, "compare", args)?;
    let a = potential_input(&mut run, &args.a)?;
    let b = potential_input(&mut run, &args.b)?;
    let rows = run.time("evaluate", || {
        radii
            .iter()
            .map(|&r| {
                let va = evaluate(&a, r).map_err(|e| CliError::solver(format!("potential a at r = {r}"), e))?;
                let vb = evaluate(&b, r).map_err(|e| CliError::solver(format!("potential b at r = {r}"), e))?;
                Ok((r, va, vb))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let mut csv = CsvBuilder::new(&["r", "a", "b", "diff"])
        .meta("a", file_name(&args.a))
        .meta("b", file_name(&args.b));
    let (mut worst, mut at, mut sq) = (0.0f64, f64::NAN, 0.0);
    for &(r, va, vb) in &rows {
        let d = va - vb;
        if d.abs() > worst || at.is_nan() {
            worst = d.abs();
            at = r;
        }
        sq += d * d;
        csv.row(vec![r.into(), va.into(), vb.into(), d.into()]);
    }
    let rms = (sq / rows.len() as f64).sqrt();
    let mut report = String::new();
    let _ = writeln!(report, "a: {}", args.a.display());
    let _ = writeln!(report, "b: {}", args.b.display());
    let _ = writeln!(report, "points: {}", rows.len());
    let _ = writeln!(report, "max_abs_diff: {}", num(worst));
    let _ = writeln!(report, "max_abs_diff_at: {}", num(at));
    let _ = writeln!(report, "rms_diff: {}", num(rms));
    run.write("compare.csv", &csv.finish())?;
    run.write("compare_report.txt", report.as_bytes())?;
    eprintln!("max |a - b| = {worst:.3e} at r = {at}; rms {rms:.3e}");
    run.finish()
}

use super::{file_name, potential_input};
use crate::args::{TraceArgs, TraceMode};
use crate::error::{CliError, CliResult};
use crate::grid::{ascending, parse_grid};
use crate::io::{Run, RunManifest};
use crate::table::{num, CsvBuilder, CsvFile};
use nodal_scatter::nodal_lines::{
    default_cap, trace_fixed_e_line, trace_fixed_l_line, trace_fixed_l_line_at_radii, trace_mixed_line,
    trace_mixed_line_at_radii, LinePath, LinePoint, Segment, ZeroLine,
};
use nodal_scatter::radial_solver::SolverConfig;
use rayon::prelude::*;
use std::path::Path;

pub fn run(args: &TraceArgs, out: &Path) -> CliResult<RunManifest> {
    let ns = zero_indices(&args.n)?;
    let needs_energy = args.mode != TraceMode::FixedL;
    let energy0 = match (needs_energy, args.energy0) {
        (true, None) => return Err(CliError::input("--E0 is required for fixed-e and mixed lines")),
        (_, e) => e.unwrap_or(f64::NAN),
    };
    let grid = |spec: &Option<String>, flag: &str| -> CliResult<Vec<f64>> {
        let s = spec
            .as_ref()
            .ok_or_else(|| CliError::input(format!("--{flag} is required for this mode (or use --r-grid)")))?;
        Ok(ascending(parse_grid(s)?))
    };
    enum Sampling {
        Radii(Vec<f64>),
        Params { e: Vec<f64>, ell: Vec<f64> },
    }
    let sampling = match (&args.r_grid, args.mode) {
        (Some(_), TraceMode::FixedE) => {
            return Err(CliError::input("--r-grid is available for fixed-l and mixed lines only"));
        }
        (Some(r), _) => Sampling::Radii(ascending(parse_grid(r)?)),
        (None, TraceMode::FixedL) => Sampling::Params {
            e: grid(&args.e_grid, "E-grid")?,
            ell: Vec::new(),
        },
        (None, TraceMode::FixedE) => Sampling::Params {
            e: Vec::new(),
            ell: grid(&args.ell_grid, "ell-grid")?,
        },
        (None, TraceMode::Mixed) => Sampling::Params {
            e: grid(&args.e_grid, "E-grid")?,
            ell: grid(&args.ell_grid, "ell-grid")?,
        },
    };

    let mut run = Run::new(out, "trace", args)?;
    let pot = potential_input(&mut run, &args.potential)?;
    let cap = args.rcap.unwrap_or_else(|| default_cap(&pot));
    let cfg = SolverConfig::default();
    let lines = run.time("trace", || {
        ns.par_iter()
            .map(|&n| {
                let line = match (&sampling, args.mode) {
                    (Sampling::Radii(r), TraceMode::FixedL) => trace_fixed_l_line_at_radii(&pot, args.ell, n, r, &cfg),
                    (Sampling::Radii(r), _) => trace_mixed_line_at_radii(&pot, args.ell, energy0, n, r, &cfg),
                    (Sampling::Params { e, .. }, TraceMode::FixedL) => trace_fixed_l_line(&pot, args.ell, n, e, cap, &cfg),
                    (Sampling::Params { ell, .. }, TraceMode::FixedE) => {
                        trace_fixed_e_line(&pot, energy0, n, ell, cap, &cfg)
                    }
                    (Sampling::Params { e, ell }, TraceMode::Mixed) => {
                        trace_mixed_line(&pot, args.ell, energy0, n, e, ell, cap, &cfg)
                    }
                };
                line.map_err(|e| CliError::solver(format!("line n = {n}"), e))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let source = file_name(&args.potential);
    for line in &lines {
        run.write(&format!("line_n{}.csv", line.n), &line_csv(line, &source, cap))?;
    }
    run.finish()
}

fn zero_indices(spec: &str) -> CliResult<Vec<usize>> {
    let mut ns: Vec<usize> = parse_grid(spec)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(CliError::input(format!("zero index must be a positive integer, got {x}")))
            }
        })
        .collect::<CliResult<_>>()?;
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}

pub fn segment_name(s: Segment) -> &'static str {
    match s {
        Segment::FixedEll => "fixed_ell",
        Segment::FixedEnergy => "fixed_energy",
    }
}

/// Serialises a line; [`read_line`] is the inverse.
pub fn line_csv(line: &ZeroLine, source: &str, cap: f64) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&["segment", "ell", "E", "r", "diverged", "slope"])
        .meta("potential", source)
        .meta("n", line.n)
        .meta_num("rcap", cap);
    csv = match line.path {
        LinePath::FixedEll { ell } => csv.meta("path", "fixed_ell").meta("ell", num(ell)),
        LinePath::FixedEnergy { energy } => csv.meta("path", "fixed_energy").meta("E", num(energy)),
        LinePath::Mixed { ell0, energy0 } => csv
            .meta("path", "mixed")
            .meta("ell0", num(ell0))
            .meta("E0", num(energy0)),
    };
    for p in &line.points {
        csv.row(vec![
            segment_name(p.segment).into(),
            p.ell.into(),
            p.energy.into(),
            p.r.into(),
            p.diverged.into(),
            p.slope.into(),
        ]);
    }
    csv.finish()
}

/// Rebuilds a line from its CSV form. The `slope` column is optional.
pub fn read_line(file: &CsvFile) -> CliResult<ZeroLine> {
    let bad = |msg: String| CliError::input(format!("{}: {msg}", file.path));
    let n_text = file.meta_str("n")?;
    let n: usize = n_text
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| bad(format!("metadata `n`: `{n_text}` is not a positive integer")))?;
    let path = match file.meta_str("path")? {
        "fixed_ell" => LinePath::FixedEll {
            ell: file.meta_f64("ell")?,
        },
        "fixed_energy" => LinePath::FixedEnergy {
            energy: file.meta_f64("E")?,
        },
        "mixed" => LinePath::Mixed {
            ell0: file.meta_f64("ell0")?,
            energy0: file.meta_f64("E0")?,
        },
        other => return Err(bad(format!("unknown path `{other}`"))),
    };
    let segments = file.column_text("segment")?;
    let ell = file.column_f64("ell")?;
    let e = file.column_f64("E")?;
    let r = file.column_f64("r")?;
    let diverged = file.column_f64("diverged")?;
    let slope = if file.has_column("slope") {
        file.column_f64("slope")?
    } else {
        vec![f64::NAN; file.len()]
    };
    let points = (0..file.len())
        .map(|i| {
            let segment = match segments[i].as_str() {
                "fixed_ell" => Segment::FixedEll,
                "fixed_energy" => Segment::FixedEnergy,
                s => return Err(bad(format!("row {}: unknown segment `{s}`", i + 1))),
            };
            Ok(LinePoint {
                segment,
                ell: ell[i],
                energy: e[i],
                r: r[i],
                diverged: diverged[i] != 0.0,
                slope: slope[i],
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if points.is_empty() {
        return Err(bad("line has no samples".into()));
    }
    Ok(ZeroLine { n, path, points })
}

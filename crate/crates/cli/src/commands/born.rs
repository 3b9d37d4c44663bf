use super::forward::source_name;
use crate::args::BornArgs;
use crate::error::{CliError, CliResult};
use crate::grid::{ascending, parse_grid};
use crate::io::{Run, RunManifest};
use crate::table::{num, CsvBuilder, CsvFile};
use nodal_scatter::semiclassical::{born_extend_and_invert, born_invert, BornSource, BornTransform};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(args: &BornArgs, out: &Path) -> CliResult<RunManifest> {
    let radii = ascending(parse_grid(&args.radii)?);
    let mut run = Run::new(out, "invert born", args)?;
    let gfile = CsvFile::read(&args.gq)?;
    run.digest_input(&args.gq)?;
    let source = match gfile.meta.get("source").map(String::as_str) {
        Some("from_potential") => BornSource::FromPotential,
        _ => BornSource::FromFixedEData,
    };
    let transform = BornTransform {
        q_grid: gfile.column_f64("q")?,
        g: gfile.column_f64("g")?,
        source,
    };
    let fixed_l = match &args.delta0 {
        None => None,
        Some(path) => {
            let f = CsvFile::read(path)?;
            run.digest_input(path)?;
            if f.has_column("ell") && f.column_f64("ell")?.iter().any(|&l| l != 0.0) {
                return Err(CliError::input(format!("{}: --delta0 expects s-wave phases (ell = 0)", path.display())));
            }
            let ks = f.column_f64("k")?;
            let ds = f.column_f64("delta")?;
            let mut pairs: Vec<(f64, f64)> = ks.into_iter().zip(ds).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Some(pairs)
        }
    };
    let inv = run
        .time("born inversion", || match &fixed_l {
            None => born_invert(&transform, &radii),
            Some(fl) => born_extend_and_invert(&transform, fl, &radii),
        })
        .map_err(|e| CliError::stage(e, "transform inversion"))?;

    let mut pot = CsvBuilder::new(&["r", "V"]);
    for (&r, &v) in inv.potential.radii().iter().zip(inv.potential.values()) {
        pot.row(vec![r.into(), v.into()]);
    }
    run.write("potential.csv", &pot.finish())?;
    let mut rv = CsvBuilder::new(&["r", "rV"]);
    for &(r, x) in &inv.r_v {
        rv.row(vec![r.into(), x.into()]);
    }
    run.write("rv.csv", &rv.finish())?;
    let mut g = CsvBuilder::new(&["q", "g"]).meta("source", source_name(inv.transform.source));
    for (&q, &x) in inv.transform.q_grid.iter().zip(&inv.transform.g) {
        g.row(vec![q.into(), x.into()]);
    }
    run.write("transform_used.csv", &g.finish())?;

    let mut s = String::new();
    let _ = writeln!(s, "[input]");
    let _ = writeln!(s, "gq: {}", args.gq.display());
    if let Some(p) = &args.delta0 {
        let _ = writeln!(s, "delta0: {}", p.display());
    }
    let _ = writeln!(s, "transform_samples: {}", inv.transform.q_grid.len());
    let _ = writeln!(s, "\n[seam]");
    match inv.seam_mismatch {
        Some(m) => {
            let _ = writeln!(s, "mismatch: {}", num(m));
        }
        None => {
            let _ = writeln!(s, "mismatch: none");
        }
    }
    let _ = writeln!(s, "\n[tail]");
    let _ = writeln!(s, "oscillatory_terms: {}", inv.tail.len());
    for t in &inv.tail {
        let _ = writeln!(
            s,
            "frequency = {}  cos_amplitude = {}  sin_amplitude = {}",
            num(t.frequency),
            num(t.cos_amplitude),
            num(t.sin_amplitude)
        );
    }
    let _ = writeln!(s, "\n[warnings]");
    for w in &inv.warnings {
        let _ = writeln!(s, "{w}");
    }
    for w in &inv.warnings {
        eprintln!("warning: {w}");
    }
    run.write("report.txt", s.as_bytes())?;
    run.finish()
}

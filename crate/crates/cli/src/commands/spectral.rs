use super::{file_name, potential_input};
use crate::args::SpectralArgs;
use crate::error::{CliError, CliResult};
use crate::io::{Run, RunManifest};
use crate::table::CsvBuilder;
use nodal_scatter::nodal_lines::spectral_data_at;
use nodal_scatter::radial_solver::SolverConfig;
use std::path::Path;

pub fn run(args: &SpectralArgs, out: &Path) -> CliResult<RunManifest> {
    if args.nmax == 0 {
        return Err(CliError::input("--nmax must be at least 1"));
    }
    let mut run = Run::new(out, "spectral", args)?;
    let pot = potential_input(&mut run, &args.potential)?;
    let data = run
        .time("eigenvalues", || spectral_data_at(&pot, args.ell, args.radius, args.nmax, &SolverConfig::default()))
        .map_err(|e| CliError::solver("spectral data", e))?;
    let mut csv = CsvBuilder::new(&["n", "E", "rho"])
        .meta("potential", file_name(&args.potential))
        .meta_num("ell", args.ell)
        .meta_num("R", args.radius);
    for (i, (&e, &rho)) in data.eigenvalues.iter().zip(&data.norming).enumerate() {
        csv.row(vec![(i + 1).into(), e.into(), rho.into()]);
    }
    run.write("spectral.csv", &csv.finish())?;
    run.finish()
}

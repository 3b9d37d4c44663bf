use super::{file_name, potential_input};
use crate::args::{ForwardArgs, PhaseMethod};
use crate::error::{CliError, CliResult};
use crate::grid::{ascending, parse_grid};
use crate::io::{Run, RunManifest};
use crate::table::CsvBuilder;
use nodal_scatter::potentials::Potential;
use nodal_scatter::radial_solver::{count_bound_states, integrate_regular, phase_shift, SolverConfig};
use nodal_scatter::semiclassical::{
    born_g_from_fixed_energy, born_g_from_potential, jwkb_phase_shift, BornSource, PhaseShiftTable,
};
use rayon::prelude::*;
use std::path::Path;

pub fn run(args: &ForwardArgs, out: &Path) -> CliResult<RunManifest> {
    let wants_table = args.table_k.is_some();
    if args.energies.is_none() && args.k.is_none() && !args.bound && args.q.is_none() && !wants_table {
        return Err(CliError::input(
            "nothing to do: give at least one of --E, --k, --bound, --q or --table-k/--table-lambda",
        ));
    }
    if !(args.rmax > 0.0 && args.spacing > 0.0) {
        return Err(CliError::input("--rmax and --spacing must be positive"));
    }
    let mut run = Run::new(out, "forward", args)?;
    let pot = potential_input(&mut run, &args.potential)?;
    let source = file_name(&args.potential);
    let cfg = SolverConfig::default();

    if let Some(spec) = &args.energies {
        let energies = parse_grid(spec)?;
        let traces = run.time("regular solutions", || {
            let cfg = SolverConfig {
                output_spacing: Some(args.spacing),
                ..cfg
            };
            energies
                .par_iter()
                .map(|&e| integrate_regular(&pot, args.ell, e, args.rmax, &cfg).map_err(|err| CliError::solver(format!("E = {e}"), err)))
                .collect::<CliResult<Vec<_>>>()
        })?;
        let mut zeros = CsvBuilder::new(&["ell", "E", "n", "r", "dpsi"])
            .meta("potential", &source)
            .meta_num("rmax", args.rmax);
        let mut trace = CsvBuilder::new(&["ell", "E", "r", "psi", "dpsi"])
            .meta("potential", &source)
            .meta("normalisation", "psi ~ r^(ell+1) at the origin");
        for t in &traces {
            for (i, (&r, &s)) in t.zeros.iter().zip(&t.zero_slopes).enumerate() {
                zeros.row(vec![t.ell.into(), t.energy.into(), (i + 1).into(), r.into(), s.into()]);
            }
            for ((&r, &p), &dp) in t.grid.iter().zip(&t.psi).zip(&t.dpsi) {
                trace.row(vec![t.ell.into(), t.energy.into(), r.into(), p.into(), dp.into()]);
            }
        }
        run.write("forward_zeros.csv", &zeros.finish())?;
        run.write("forward_trace.csv", &trace.finish())?;
    }

    if let Some(spec) = &args.k {
        let ks = parse_grid(spec)?;
        let rows = run.time("phase shifts", || {
            ks.par_iter()
                .map(|&k| phase_row(&pot, args.method, args.ell, k, &cfg))
                .collect::<CliResult<Vec<_>>>()
        })?;
        let mut csv = CsvBuilder::new(&["ell", "k", "delta", "residual"])
            .meta("potential", &source)
            .meta("method", method_name(args.method));
        for (k, d, res) in rows {
            csv.row(vec![args.ell.into(), k.into(), d.into(), res.into()]);
        }
        run.write("forward_phase.csv", &csv.finish())?;
    }

    if args.bound {
        let set = run.time("bound states", || count_bound_states(&pot, args.ell))
            .map_err(|e| CliError::solver("bound states", e))?;
        let mut csv = CsvBuilder::new(&["ell", "n", "E"]).meta("potential", &source);
        for (i, &e) in set.energies.iter().enumerate() {
            csv.row(vec![args.ell.into(), (i + 1).into(), e.into()]);
        }
        run.write("bound_states.csv", &csv.finish())?;
    }

    if let Some(spec) = &args.q {
        let q = ascending(parse_grid(spec)?);
        let t = match args.k0 {
            None => run.time("born transform", || born_g_from_potential(&pot, &q)),
            Some(k0) => run.time("born transform", || {
                let deltas = (0..=args.lmax)
                    .into_par_iter()
                    .map(|l| phase_shift(&pot, l as f64, k0, &cfg).map(|s| s.delta))
                    .collect::<Result<Vec<_>, _>>()?;
                born_g_from_fixed_energy(k0, &deltas, &q)
            }),
        }
        .map_err(|e| CliError::solver("Born transform", e))?;
        let mut csv = CsvBuilder::new(&["q", "g"])
            .meta("potential", &source)
            .meta("source", source_name(t.source));
        if let Some(k0) = args.k0 {
            csv = csv.meta_num("k0", k0).meta("lmax", args.lmax);
        }
        for (&q, &g) in t.q_grid.iter().zip(&t.g) {
            csv.row(vec![q.into(), g.into()]);
        }
        run.write("born_g.csv", &csv.finish())?;
    }

    if let (Some(ks), Some(lambdas)) = (&args.table_k, &args.table_lambda) {
        let k0 = args.k0.expect("clap enforces --k0 with the table grids");
        let ks = ascending(parse_grid(ks)?);
        let lambdas = ascending(parse_grid(lambdas)?);
        let table = run.time("phase table", || -> CliResult<PhaseShiftTable> {
            let fixed_l = ks
                .par_iter()
                .map(|&k| phase_row(&pot, args.method, args.ell, k, &cfg).map(|r| (k, r.1)))
                .collect::<CliResult<Vec<_>>>()?;
            let fixed_e = lambdas
                .par_iter()
                .map(|&l| phase_row(&pot, args.method, l - 0.5, k0, &cfg).map(|r| (l, r.1)))
                .collect::<CliResult<Vec<_>>>()?;
            PhaseShiftTable::new(args.ell, k0, fixed_l, fixed_e).map_err(|e| CliError::solver("phase table", e))
        })?;
        let mut csv = CsvBuilder::new(&["branch", "ell", "k", "delta"])
            .meta("potential", &source)
            .meta("method", method_name(args.method))
            .meta_num("ell0", args.ell)
            .meta_num("k0", k0);
        for &(k, d) in &table.fixed_l {
            csv.row(vec!["fixed_l".into(), args.ell.into(), k.into(), d.into()]);
        }
        for &(l, d) in &table.fixed_e {
            csv.row(vec!["fixed_e".into(), (l - 0.5).into(), k0.into(), d.into()]);
        }
        run.write("phase_table.csv", &csv.finish())?;
    }

    run.finish()
}

/// `(k, δ, residual)`; the JWKB phase has no residual and reports NaN.
fn phase_row(pot: &Potential, method: PhaseMethod, ell: f64, k: f64, cfg: &SolverConfig) -> CliResult<(f64, f64, f64)> {
    match method {
        PhaseMethod::Exact => phase_shift(pot, ell, k, cfg)
            .map(|s| (k, s.delta, s.residual))
            .map_err(|e| CliError::solver(format!("phase shift at ℓ = {ell}, k = {k}"), e)),
        PhaseMethod::Jwkb => jwkb_phase_shift(pot, ell + 0.5, k)
            .map(|d| (k, d, f64::NAN))
            .map_err(|e| CliError::solver(format!("JWKB phase at ℓ = {ell}, k = {k}"), e)),
    }
}

fn method_name(m: PhaseMethod) -> &'static str {
    match m {
        PhaseMethod::Exact => "exact",
        PhaseMethod::Jwkb => "jwkb",
    }
}

pub fn source_name(s: BornSource) -> &'static str {
    match s {
        BornSource::FromPotential => "from_potential",
        BornSource::FromFixedEData => "from_fixed_e_data",
        BornSource::ExtendedByFixedLData => "extended_by_fixed_l_data",
    }
}

use super::trace::read_line;
use crate::args::{NodalArgs, NodalRoute};
use crate::error::{CliError, CliResult};
use crate::io::{Run, RunManifest};
use crate::table::{num, CsvBuilder, CsvFile};
use nodal_scatter::nodal_inverse::{
    detect_discontinuities_re, detect_with_floor, reconstruct_mixed, reconstruct_piecewise, third_derivative_profile,
    DiscontinuityEvent, JunctionEstimate, ProfileSample,
};
use nodal_scatter::nodal_lines::{invert_line, invert_segment, InverseOf, LinePath, Segment};
use nodal_scatter::potentials::{PiecewiseConstantPotential, Potential};
use std::fmt::Write as _;
use std::path::Path;

struct Outcome {
    potential: PiecewiseConstantPotential,
    events: Vec<DiscontinuityEvent>,
    noise_floor: Option<f64>,
    profile: Vec<ProfileSample>,
    junction: Option<JunctionEstimate>,
}

pub fn run(args: &NodalArgs, out: &Path) -> CliResult<RunManifest> {
    if args.noise_floor.is_some_and(|f| f.is_nan() || f <= 0.0) {
        return Err(CliError::input("--noise-floor must be positive"));
    }
    let mut run = Run::new(out, "invert nodal", args)?;
    let file = CsvFile::read(&args.line)?;
    run.digest_input(&args.line)?;
    let line = read_line(&file)?;
    let stage = |name: &'static str| move |e: nodal_scatter::error::Error| CliError::stage(e, name);

    let outcome = match (line.path, args.route) {
        (LinePath::Mixed { .. }, NodalRoute::Direct) => {
            return Err(CliError::input("the direct route needs a single fixed-ℓ line"));
        }
        (LinePath::Mixed { ell0, .. }, NodalRoute::Inverse) => {
            let part1 = run
                .time("invert line", || invert_segment(&line, Segment::FixedEll, InverseOf::Energy, ell0))
                .map_err(stage("line"))?;
            let profile = run.time("profile", || third_derivative_profile(&part1)).map_err(stage("detection"))?;
            // Tags set inside the mixed pipeline take precedence over this default.
            let rec = run
                .time("reconstruct", || reconstruct_mixed(&line, args.noise_floor))
                .map_err(|e| CliError::stage(e, "reconstruction"))?;
            Outcome {
                potential: rec.potential,
                events: rec.events,
                noise_floor: None,
                profile,
                junction: Some(rec.junction),
            }
        }
        (_, route) => {
            let inv = run.time("invert line", || invert_line(&line)).map_err(stage("line"))?;
            let profile = run.time("profile", || third_derivative_profile(&inv)).map_err(stage("detection"))?;
            let det = run
                .time("detection", || match route {
                    NodalRoute::Inverse => detect_with_floor(&inv, args.noise_floor),
                    NodalRoute::Direct => detect_discontinuities_re(&line, args.noise_floor),
                })
                .map_err(stage("detection"))?;
            let potential = run
                .time("reconstruction", || reconstruct_piecewise(&inv, &det.events))
                .map_err(stage("reconstruction"))?;
            Outcome {
                potential,
                events: det.events,
                noise_floor: Some(det.noise_floor),
                profile,
                junction: None,
            }
        }
    };

    let pot = Potential::from(outcome.potential.clone());
    let mut json = serde_json::to_vec_pretty(&pot).expect("potential serialises");
    json.push(b'\n');
    run.write("potential.json", &json)?;
    run.write("potential.csv", &steps_csv(&outcome.potential))?;
    run.write("events.csv", &events_csv(&outcome.events))?;

    let mut profile = CsvBuilder::new(&["r", "left", "right"]).meta("quantity", "-E'''/(2E')");
    for p in &outcome.profile {
        profile.row(vec![p.r.into(), p.left.into(), p.right.into()]);
    }
    run.write("profile.csv", &profile.finish())?;
    run.write("report.txt", report(&args.line, &line.path, line.n, &outcome).as_bytes())?;
    run.finish()
}

fn steps_csv(p: &PiecewiseConstantPotential) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&["r_from", "r_to", "V"]);
    let mut lo = 0.0;
    for (&b, &v) in p.breakpoints().iter().zip(p.values()) {
        csv.row(vec![lo.into(), b.into(), v.into()]);
        lo = b;
    }
    csv.row(vec![lo.into(), f64::INFINITY.into(), p.tail().into()]);
    csv.finish()
}

fn events_csv(events: &[DiscontinuityEvent]) -> Vec<u8> {
    let mut csv = CsvBuilder::new(&["location", "jump_e3", "slope_e1", "inferred_jump", "confidence"]);
    for e in events {
        csv.row(vec![
            e.location.into(),
            e.jump_e3.into(),
            e.slope_e1.into(),
            e.inferred_jump.into(),
            e.confidence.into(),
        ]);
    }
    csv.finish()
}

fn report(source: &Path, path: &LinePath, n: usize, o: &Outcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[input]");
    let _ = writeln!(s, "line: {}", source.display());
    let _ = writeln!(s, "n: {n}");
    let _ = match path {
        LinePath::FixedEll { ell } => writeln!(s, "path: fixed_ell (ell = {ell})"),
        LinePath::FixedEnergy { energy } => writeln!(s, "path: fixed_energy (E = {energy})"),
        LinePath::Mixed { ell0, energy0 } => writeln!(s, "path: mixed (ell0 = {ell0}, E0 = {energy0})"),
    };
    if let Some(f) = o.noise_floor {
        let _ = writeln!(s, "noise_floor: {}", num(f));
    }
    let _ = writeln!(s, "\n[events]");
    let _ = writeln!(s, "count: {}", o.events.len());
    for e in &o.events {
        let _ = writeln!(
            s,
            "r = {}  jump = {}  confidence = {}",
            num(e.location),
            num(e.inferred_jump),
            num(e.confidence)
        );
    }
    if let Some(j) = &o.junction {
        let _ = writeln!(s, "\n[junction]");
        let _ = writeln!(s, "r0: {}", num(j.r0));
        let _ = writeln!(s, "jump: {}", num(j.v));
        let _ = writeln!(s, "origin_value: {}", num(j.origin_value));
        let _ = writeln!(s, "tail_residual: {}", num(j.residual));
        let _ = writeln!(s, "reliable: {}", j.reliable);
    }
    let p = &o.potential;
    let _ = writeln!(s, "\n[potential]");
    let _ = writeln!(s, "breakpoints: {}", join(p.breakpoints()));
    let _ = writeln!(s, "values: {}", join(p.values()));
    let _ = writeln!(s, "tail: {}", num(p.tail()));
    let _ = writeln!(s, "\n[residuals]");
    let worst = o
        .profile
        .iter()
        .map(|q| (q.left - q.right).abs())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let _ = writeln!(s, "max_profile_left_right_gap: {}", num(worst));
    s
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

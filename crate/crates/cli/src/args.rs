use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

const EXIT_CODES: &str = "\
Exit codes:
  0   success
  1   an output file could not be written
  2   bad arguments, unreadable or malformed input
  3   forward solver failure
  10  nodal: line cannot be inverted        11  nodal: discontinuity detection
  12  nodal: potential reconstruction       13  nodal: junction estimate
  14  jwkb: fixed-energy inversion          15  jwkb: low-k completion
  16  jwkb: fixed-ell inversion             17  jwkb: stitching
  18  born: extension by fixed-ell data     19  born: transform inversion

Grids are comma lists of values, `start:stop:count` or `log:start:stop:count`.
SCATTER_THREADS caps the worker pool.";

#[derive(Debug, Parser)]
#[command(name = "scatter", version, about = "Forward and inverse radial scattering", after_help = EXIT_CODES)]
pub struct Cli {
    /// Directory receiving the output files and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular solutions, zeros, phase shifts, bound states and Born data.
    Forward(ForwardArgs),
    /// Lines of zeros r_n along fixed-ℓ, fixed-E or mixed paths.
    Trace(TraceArgs),
    /// Dirichlet eigenvalues and norming constants on [0, R].
    Spectral(SpectralArgs),
    /// Reconstruct a potential from nodal, phase-shift or Born data.
    #[command(subcommand)]
    Invert(InvertCommand),
    /// Tabulate two potentials and their difference.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum InvertCommand {
    /// From a traced line of zeros (CSV written by `trace`).
    Nodal(NodalArgs),
    /// From a mixed phase-shift table through the semiclassical pipeline.
    Jwkb(JwkbArgs),
    /// From a Born sine transform, optionally extended by s-wave phases.
    Born(BornArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMethod {
    Exact,
    Jwkb,
}

#[derive(Debug, Args, Serialize)]
pub struct ForwardArgs {
    /// Potential description (JSON).
    #[arg(long)]
    pub potential: PathBuf,
    /// Angular momentum ℓ (ℓ0 for --table-k/--table-lambda).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ell: f64,
    /// Energies for regular solutions and their zeros.
    #[arg(long = "E", allow_hyphen_values = true)]
    pub energies: Option<String>,
    /// Outer radius of the regular solutions.
    #[arg(long, default_value_t = 20.0)]
    pub rmax: f64,
    /// Sampling step of the written solutions.
    #[arg(long, default_value_t = 0.05)]
    pub spacing: f64,
    /// Wave numbers for phase shifts.
    #[arg(long)]
    pub k: Option<String>,
    /// Phase-shift method for --k and the phase table.
    #[arg(long, value_enum, default_value_t = PhaseMethod::Exact)]
    pub method: PhaseMethod,
    /// Also list the bound states of partial wave ℓ.
    #[arg(long)]
    pub bound: bool,
    /// Momentum transfers for the Born sine transform g(q).
    #[arg(long)]
    pub q: Option<String>,
    /// Fixed wave number: with --q, g(q) comes from the phase shifts δ_ℓ(k0),
    /// ℓ = 0..=lmax, instead of the potential; also the corner of the table.
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub lmax: usize,
    /// Wave numbers of the fixed-ℓ branch of a mixed phase table.
    #[arg(long, requires_all = ["k0", "table_lambda"])]
    pub table_k: Option<String>,
    /// Values λ = ℓ + 1/2 of the fixed-energy branch of a mixed phase table.
    #[arg(long, requires_all = ["k0", "table_k"])]
    pub table_lambda: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    FixedL,
    FixedE,
    Mixed,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long)]
    pub potential: PathBuf,
    #[arg(long, value_enum, default_value_t = TraceMode::FixedL)]
    pub mode: TraceMode,
    /// Zero indices, e.g. `1,2,3,4` or `1:4:4`.
    #[arg(long, default_value = "1")]
    pub n: String,
    /// ℓ on fixed-ℓ lines, ℓ0 on mixed lines.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ell: f64,
    /// E on fixed-E lines, E0 on mixed lines.
    #[arg(long = "E0", allow_negative_numbers = true)]
    pub energy0: Option<f64>,
    /// Energies of the fixed-ℓ part.
    #[arg(long = "E-grid", allow_hyphen_values = true)]
    pub e_grid: Option<String>,
    /// Angular momenta of the fixed-E part.
    #[arg(long = "ell-grid")]
    pub ell_grid: Option<String>,
    /// Sample the line at these radii instead (fixed-l and mixed modes).
    #[arg(long = "r-grid", conflicts_with_all = ["e_grid", "ell_grid"])]
    pub r_grid: Option<String>,
    /// Zeros beyond this radius are reported as diverged.
    #[arg(long)]
    pub rcap: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectralArgs {
    #[arg(long)]
    pub potential: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub ell: f64,
    /// Interval length R.
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodalRoute {
    /// Through the inverse E_n(r) of the line.
    Inverse,
    /// Directly from r_n(E).
    Direct,
}

#[derive(Debug, Args, Serialize)]
pub struct NodalArgs {
    /// Line CSV with columns segment, ell, E, r, diverged and optionally slope.
    #[arg(long)]
    pub line: PathBuf,
    /// Smallest jump reported as a discontinuity; estimated when omitted.
    #[arg(long)]
    pub noise_floor: Option<f64>,
    #[arg(long, value_enum, default_value_t = NodalRoute::Inverse)]
    pub route: NodalRoute,
}

#[derive(Debug, Args, Serialize)]
pub struct JwkbArgs {
    /// Phase table CSV with columns branch, ell, k, delta.
    #[arg(long)]
    pub table: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BornArgs {
    /// Sine transform CSV with columns q, g.
    #[arg(long)]
    pub gq: PathBuf,
    /// s-wave phase shifts (columns k, delta) extending g beyond the last q.
    #[arg(long)]
    pub delta0: Option<PathBuf>,
    /// Radii at which V is reconstructed.
    #[arg(long, default_value = "0.05:6:120")]
    pub radii: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value = "0.01:10:1000")]
    pub grid: String,
}

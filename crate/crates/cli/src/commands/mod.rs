pub mod born;
pub mod compare;
pub mod forward;
pub mod jwkb;
pub mod nodal;
pub mod spectral;
pub mod trace;

use crate::error::CliResult;
use crate::io::{load_potential, Run};
use nodal_scatter::potentials::Potential;
use std::path::Path;

/// Loads a potential file and adds its bytes to the run digest.
fn potential_input(run: &mut Run, path: &Path) -> CliResult<Potential> {
    let p = load_potential(path)?;
    run.digest_input(path)?;
    Ok(p)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

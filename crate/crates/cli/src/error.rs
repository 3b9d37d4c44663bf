use nodal_scatter::error::Error as CoreError;
use std::fmt;
use std::path::Path;

/// Process exit codes. Inversion stages occupy 10 to 19.
pub mod code {
    pub const OUTPUT: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const SOLVER: u8 = 3;
    pub const LINE: u8 = 10;
    pub const DETECTION: u8 = 11;
    pub const RECONSTRUCTION: u8 = 12;
    pub const JUNCTION: u8 = 13;
    pub const FIXED_ENERGY: u8 = 14;
    pub const LOW_K: u8 = 15;
    pub const FIXED_ELL: u8 = 16;
    pub const STITCH: u8 = 17;
    pub const EXTENSION: u8 = 18;
    pub const TRANSFORM_INVERSION: u8 = 19;
}

/// Stage names as they appear in error messages, with their exit codes.
pub const STAGES: &[(&str, u8)] = &[
    ("line", code::LINE),
    ("detection", code::DETECTION),
    ("reconstruction", code::RECONSTRUCTION),
    ("junction", code::JUNCTION),
    ("fixed-energy inversion", code::FIXED_ENERGY),
    ("low-k completion", code::LOW_K),
    ("fixed-ell inversion", code::FIXED_ELL),
    ("stitch", code::STITCH),
    ("extension", code::EXTENSION),
    ("transform inversion", code::TRANSFORM_INVERSION),
];

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: code::INPUT,
            message: message.into(),
        }
    }

    pub fn input_at(path: &Path, message: impl fmt::Display) -> Self {
        Self::input(format!("{}: {message}", path.display()))
    }

    pub fn output(path: &Path, err: impl fmt::Display) -> Self {
        CliError {
            code: code::OUTPUT,
            message: format!("cannot write {}: {err}", path.display()),
        }
    }

    pub fn solver(context: impl fmt::Display, err: CoreError) -> Self {
        CliError {
            code: code::SOLVER,
            message: format!("{context}: {err}"),
        }
    }

    /// Maps a core error raised inside an inversion pipeline. The innermost
    /// stage tag wins; untagged errors fall back to `default_stage`.
    pub fn stage(err: CoreError, default_stage: &str) -> Self {
        let name = err.stage().unwrap_or(default_stage);
        let code = STAGES
            .iter()
            .find(|(s, _)| *s == name)
            .map(|&(_, c)| c)
            .unwrap_or(code::SOLVER);
        let message = match err {
            CoreError::Stage { .. } => format!("inversion {err}"),
            _ => format!("inversion stage `{name}` failed: {err}"),
        };
        CliError { code, message }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

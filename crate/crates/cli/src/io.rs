use crate::error::{CliError, CliResult};
use nodal_scatter::potentials::Potential;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input_at(path, format!("cannot read: {e}")))
}

pub fn load_potential(path: &Path) -> CliResult<Potential> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::input_at(path, format!("line {}, column {}: {e}", e.line(), e.column()))
    })
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub outputs: Vec<OutputRecord>,
    pub timings: Vec<StageTiming>,
    pub tool_version: String,
}

/// Collects the outputs of one run and writes them atomically into `dir`.
pub struct Run {
    dir: PathBuf,
    command: String,
    hasher: Sha256,
    outputs: Vec<OutputRecord>,
    timings: Vec<StageTiming>,
}

impl Run {
    /// `config` is any serialisable description of the parsed arguments; it
    /// enters the digest together with the bytes of every input file.
    pub fn new(dir: &Path, command: &str, config: &impl Serialize) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0]);
        hasher.update(serde_json::to_vec(config).expect("arguments serialise"));
        Ok(Run {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            hasher,
            outputs: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn digest_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::input_at(path, format!("cannot read: {e}")))?;
        self.hasher.update([0]);
        self.hasher.update(&bytes);
        Ok(())
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let target = self.dir.join(name);
        atomic_write(&self.dir, &target, bytes)?;
        self.outputs.push(OutputRecord {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            config_digest: hex::encode(self.hasher.finalize()),
            outputs: self.outputs,
            timings: self.timings,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
        text.push(b'\n');
        atomic_write(&self.dir, &self.dir.join("manifest.json"), &text)?;
        Ok(manifest)
    }
}

fn atomic_write(dir: &Path, target: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::output(target, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::output(target, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::output(target, e))?;
    tmp.persist(target).map_err(|e| CliError::output(target, e.error))?;
    Ok(())
}

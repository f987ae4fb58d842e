//! Library side of the `cdf-mise` command-line tool: configuration, the
//! commands, CSV tables and SVG charts.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use commands::run;
pub use config::{Cli, Command, Format, HGrid, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] cdf_mise::Error),
    #[error("output: {0}")]
    Output(String),
}

/// What a command produced.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub stdout: String,
    /// Validation failures; nonempty means exit code 2.
    pub failures: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory and a rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Output(format!("{what} {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(|e| io("cannot create", e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io("cannot write in", e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io("cannot write in", e))?;
    let path = dir.join(name);
    tmp.persist(&path)
        .map_err(|e| CliError::Output(format!("cannot rename into {}: {}", path.display(), e.error)))?;
    Ok(path)
}

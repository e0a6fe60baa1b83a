//! File formats, the command-line driver and the fuzzing harness around
//! `arrayless-core`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

pub mod cli;
pub mod fixtures;
pub mod fuzz;
pub mod report;
pub mod trace;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{error}", path.display())]
    Parse { path: PathBuf, error: arrayless_core::ParseError },
    #[error("{0}")]
    Analysis(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    fn stdout(source: std::io::Error) -> Self {
        Error::Io { path: PathBuf::from("<stdout>"), source }
    }
}

/// Write through a temporary file in the destination directory, then rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

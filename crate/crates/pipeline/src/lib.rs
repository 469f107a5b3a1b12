//! Content pipeline: CSV workbook → cleaned rows → canonical questionnaire
//! JSON → backend.
//!
//! ```no_run
//! use std::path::Path;
//!
//! let conversion = ema_pipeline::compile_dir(Path::new("studies/mood"))?;
//! ema_pipeline::emit_json(&conversion.document, Path::new("out/mood.json"))?;
//! # Ok::<(), ema_pipeline::PipelineError>(())
//! ```

mod clean;
mod convert;
mod emit;
pub mod seed;
pub mod table;
mod workbook;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ema_core::validate::Issue;
use thiserror::Error;

pub use clean::{clean_strings, clean_text};
pub use convert::{convert, questionnaire_id, Conversion};
pub use ema_core::model::{SeedAction, SeedResult};
pub use emit::emit_json;
pub use seed::{seed, SeedError};
pub use workbook::{parse_workbook, write_workbook, ElementRow, FeedbackRow, Workbook, STUDY_FILE};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{} validation error(s), first: {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    Invalid(Vec<Issue>),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Invalid(_) => "E_VALIDATION",
            Self::Io { .. } => "E_IO",
        }
    }
}

/// parse → clean → convert for one workbook directory.
pub fn compile_dir(dir: &Path) -> Result<Conversion, PipelineError> {
    let workbook = clean_strings(parse_workbook(dir)?);
    convert(&workbook).map_err(PipelineError::Invalid)
}

pub fn is_workbook_dir(dir: &Path) -> bool {
    dir.join(STUDY_FILE).is_file()
}

/// Workbook subdirectories of a corpus directory, sorted by name.
pub fn workbook_dirs(corpus: &Path) -> io::Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(corpus)? {
        let path = entry?.path();
        if path.is_dir() && is_workbook_dir(&path) {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

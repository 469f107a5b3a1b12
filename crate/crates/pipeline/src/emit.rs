use std::fs;
use std::path::Path;

use ema_core::model::QuestionnaireDocument;

use crate::PipelineError;

/// Writes the canonical (pretty, key-sorted) JSON of `doc`.
pub fn emit_json(doc: &QuestionnaireDocument, path: &Path) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, doc.to_canonical_json()).map_err(io)
}

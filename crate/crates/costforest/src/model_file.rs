//! Model files.
//!
//! A model file is a JSON document:
//!
//! ```text
//! {
//!   "format_version": "costforest-model/1",
//!   "feature_names": ["x0", "x1"],
//!   "model": { "type": "csdt", "k": 2, "config": {...}, "root": {...} }
//! }
//! ```
//!
//! `model.type` is `csdt` for a single tree, whose nodes are nested
//! `{"type": "internal", "rule": {...}, "left": ..., "right": ...}` and
//! `{"type": "leaf", "predicted_class": ...}` records, or `ensemble` with
//! every base tree, the per-tree out-of-bag scores and the fitted combiner.
//! Numbers are written in shortest round-trip form, so thresholds survive
//! a save/load cycle bit for bit.

use std::path::Path;

use costforest_core::csdt::CsdtModel;
use costforest_core::ensemble::EnsembleModel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: &str = "costforest-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Csdt(CsdtModel),
    Ensemble(Box<EnsembleModel>),
}

impl Model {
    pub fn k(&self) -> usize {
        match self {
            Self::Csdt(m) => m.k(),
            Self::Ensemble(m) => m.k,
        }
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> CliResult<Vec<u8>> {
        Ok(match self {
            Self::Csdt(m) => rows.iter().map(|r| m.predict(r)).collect::<costforest_core::Result<_>>()?,
            Self::Ensemble(m) => m.predict_rows(rows)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: String,
    pub feature_names: Vec<String>,
    pub model: Model,
}

impl ModelFile {
    pub fn new(feature_names: Vec<String>, model: Model) -> Self {
        Self { format_version: FORMAT_VERSION.into(), feature_names, model }
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(format!("cannot encode model: {e}")))
    }

    pub fn from_json(text: &str, origin: &str) -> CliResult<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: String,
        }
        let header: Header = serde_json::from_str(text)
            .map_err(|e| CliError::Data(format!("{origin}: not a model file: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "{origin}: unsupported format_version `{}` (expected `{FORMAT_VERSION}`)",
                header.format_version
            )));
        }
        let file: Self =
            serde_json::from_str(text).map_err(|e| CliError::Data(format!("{origin}: malformed model: {e}")))?;
        if file.feature_names.len() != file.model.k() {
            return Err(CliError::Data(format!(
                "{origin}: {} feature names for a model of {} features",
                file.feature_names.len(),
                file.model.k()
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

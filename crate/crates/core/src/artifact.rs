//! Versioned bank + gallery artifact written by `ingest` and read by
//! `serve`, `recognize`, `search` and `eval`.

use crate::matcher::{GalleryIndex, MatchError, NormalizationParams};
use crate::signbank::{import_bank, Bank, ImportError};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("artifact schema version {found} is not supported (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("artifact was normalized with {found:?}, caller requires {expected:?}")]
    ParamsMismatch {
        found: NormalizationParams,
        expected: NormalizationParams,
    },
    #[error("malformed artifact: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub schema_version: u32,
    pub normalization: NormalizationParams,
    pub bank: Bank,
    pub index: GalleryIndex,
}

#[derive(Deserialize)]
struct Header {
    schema_version: u32,
}

impl Artifact {
    pub fn build(bank: Bank, normalization: NormalizationParams) -> Result<Self, ArtifactError> {
        let index = GalleryIndex::build(&bank, normalization)?;
        Ok(Self {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            normalization,
            bank,
            index,
        })
    }

    /// Imports a manifest and builds the gallery index from it.
    pub fn ingest(manifest: &Path, normalization: NormalizationParams) -> Result<Self, ArtifactError> {
        Self::build(import_bank(manifest)?, normalization)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("artifacts always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ArtifactError> {
        let header: Header = serde_json::from_str(text).map_err(|e| ArtifactError::Parse(e.to_string()))?;
        if header.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(ArtifactError::Schema {
                found: header.schema_version,
                expected: ARTIFACT_SCHEMA_VERSION,
            });
        }
        let a: Artifact = serde_json::from_str(text).map_err(|e| ArtifactError::Parse(e.to_string()))?;
        if a.index.params() != a.normalization {
            return Err(ArtifactError::ParamsMismatch {
                found: a.index.params(),
                expected: a.normalization,
            });
        }
        Ok(a)
    }

    /// Writes to a sibling temp file and renames it into place, so readers
    /// never observe a partial artifact.
    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        let io = |source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        };
        let tmp = path.with_extension("partial");
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(self.to_json().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        drop(f);
        std::fs::rename(&tmp, path).map_err(|e| {
            let _ = std::fs::remove_file(&tmp);
            io(e)
        })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let text = std::fs::read_to_string(path).map_err(|source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Refuses the artifact when it was normalized differently from `expected`.
    pub fn require_params(&self, expected: NormalizationParams) -> Result<(), ArtifactError> {
        if self.normalization != expected {
            return Err(ArtifactError::ParamsMismatch {
                found: self.normalization,
                expected,
            });
        }
        Ok(())
    }
}

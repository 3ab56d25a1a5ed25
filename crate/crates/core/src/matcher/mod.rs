//! Recognition engine: pose-sequence normalization, banded DTW, gallery
//! scoring and top-k candidate ranking, plus the pluggable recognizer
//! contract the service calls through.

mod dtw;
mod index;
mod normalize;
mod rank;
mod recognizer;

pub use dtw::{default_band, dtw, frame_distance, Alignment};
pub use index::{GalleryIndex, IndexedEntry, IndexedExemplar, IndexedVariant};
pub use normalize::{normalize, NormalizationParams};
pub use rank::{rank, score_variant, Candidate, CandidateList, MatchConfig, VariantScore, DEFAULT_K};
pub use recognizer::{DtwRecognizer, RecognitionError, Recognizer};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown {kind} {id:?}")]
    NotFound { kind: &'static str, id: String },
    #[error("gallery is empty")]
    EmptyGallery,
}

/// How the query clip was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// A sign produced in isolation.
    Citation,
    /// A sign clipped out of continuous signing.
    Segmented,
}

impl QueryMode {
    pub const ALL: [QueryMode; 2] = [QueryMode::Citation, QueryMode::Segmented];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Citation => "citation",
            QueryMode::Segmented => "segmented",
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "citation" => Ok(QueryMode::Citation),
            "segmented" => Ok(QueryMode::Segmented),
            other => Err(format!("unknown sign type {other:?} (expected citation or segmented)")),
        }
    }
}

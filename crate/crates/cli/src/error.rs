//! Exit codes.
//!
//! | Code | Meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | other failure (server error, unexpected) |
//! | 2 | usage error (bad flags, missing artifact source) |
//! | 3 | I/O error (missing or unreadable file, unwritable output) |
//! | 4 | import or parse error (manifest, artifact, features, annotation document) |
//! | 5 | not found (entry, variant, utterance) |
//! | 6 | invalid query (empty search, bad frame range, overlap, unlabeled eval query) |
//! | 7 | recognition failed (empty gallery, keypoint mismatch, recognizer contract) |

use signlookup_core::annotation::AnnotationError;
use signlookup_core::artifact::ArtifactError;
use signlookup_core::eval::EvalError;
use signlookup_core::features::FeatureError;
use signlookup_core::matcher::RecognitionError;
use signlookup_core::signbank::{ImportError, SignBankError};
use signlookup_service::config::ConfigError;
use signlookup_service::state::StartupError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Other = 1,
    Usage = 2,
    Io = 3,
    Parse = 4,
    NotFound = 5,
    Query = 6,
    Recognition = 7,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::new(ExitKind::Io, format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ImportError> for CliError {
    fn from(e: ImportError) -> Self {
        let kind = match &e {
            ImportError::Io { .. } => ExitKind::Io,
            ImportError::Features { source: FeatureError::Io { .. }, .. } => ExitKind::Io,
            _ => ExitKind::Parse,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        let kind = if matches!(e, FeatureError::Io { .. }) { ExitKind::Io } else { ExitKind::Parse };
        Self::new(kind, e.to_string())
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        match e {
            ArtifactError::Import(e) => e.into(),
            ArtifactError::Io { .. } => Self::new(ExitKind::Io, e.to_string()),
            _ => Self::new(ExitKind::Parse, e.to_string()),
        }
    }
}

impl From<RecognitionError> for CliError {
    fn from(e: RecognitionError) -> Self {
        Self::new(ExitKind::Recognition, e.to_string())
    }
}

impl From<SignBankError> for CliError {
    fn from(e: SignBankError) -> Self {
        let kind = match e {
            SignBankError::EmptyQuery => ExitKind::Query,
            SignBankError::NotFound { .. } => ExitKind::NotFound,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<AnnotationError> for CliError {
    fn from(e: AnnotationError) -> Self {
        match e {
            AnnotationError::Recognition(e) => e.into(),
            AnnotationError::NotFound { .. } => Self::new(ExitKind::NotFound, e.to_string()),
            AnnotationError::Parse(_) => Self::new(ExitKind::Parse, e.to_string()),
            AnnotationError::Range(_) | AnnotationError::Overlap { .. } => Self::new(ExitKind::Query, e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Manifest(_) => Self::new(ExitKind::Query, e.to_string()),
            EvalError::Features { ref source, .. } => {
                let kind = if matches!(source, FeatureError::Io { .. }) { ExitKind::Io } else { ExitKind::Parse };
                Self::new(kind, e.to_string())
            }
            EvalError::Recognition { .. } => Self::new(ExitKind::Recognition, e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let kind = match e {
            ConfigError::Read { .. } => ExitKind::Io,
            ConfigError::Invalid(_) => ExitKind::Usage,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<StartupError> for CliError {
    fn from(e: StartupError) -> Self {
        match e {
            StartupError::Config(e) => e.into(),
            StartupError::Artifact(e) => e.into(),
            other => Self::new(ExitKind::Io, other.to_string()),
        }
    }
}

use super::{rank, CandidateList, GalleryIndex, MatchConfig, MatchError, QueryMode};
use crate::features::FeatureSequence;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognitionError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("recognizer returned an invalid candidate list: {0}")]
    Contract(String),
    #[error("recognizer failed: {0}")]
    Backend(String),
}

impl RecognitionError {
    pub fn is_empty_gallery(&self) -> bool {
        matches!(self, RecognitionError::Match(MatchError::EmptyGallery))
    }
}

/// Anything that turns a query clip into ranked candidate signs.
///
/// Implementations must return lists that pass [`CandidateList::check`] for
/// their own `k`. A trained model plugs in here in place of [`DtwRecognizer`].
pub trait Recognizer: Send + Sync {
    fn recognize(&self, query: &FeatureSequence, mode: QueryMode) -> Result<CandidateList, RecognitionError>;

    /// Upper bound on candidates returned.
    fn k(&self) -> usize {
        super::DEFAULT_K
    }
}

/// DTW nearest-neighbour recognizer over a gallery index.
#[derive(Debug, Clone)]
pub struct DtwRecognizer {
    index: Arc<GalleryIndex>,
    config: MatchConfig,
}

impl DtwRecognizer {
    pub fn new(index: Arc<GalleryIndex>, config: MatchConfig) -> Self {
        Self { index, config }
    }

    pub fn index(&self) -> &GalleryIndex {
        &self.index
    }

    pub fn config(&self) -> &MatchConfig {
        &self.config
    }
}

impl Recognizer for DtwRecognizer {
    fn recognize(&self, query: &FeatureSequence, mode: QueryMode) -> Result<CandidateList, RecognitionError> {
        Ok(rank(&self.index, query, mode, &self.config)?)
    }

    fn k(&self) -> usize {
        self.config.k
    }
}

impl<R: Recognizer + ?Sized> Recognizer for Arc<R> {
    fn recognize(&self, query: &FeatureSequence, mode: QueryMode) -> Result<CandidateList, RecognitionError> {
        (**self).recognize(query, mode)
    }

    fn k(&self) -> usize {
        (**self).k()
    }
}

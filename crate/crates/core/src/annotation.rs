//! Annotation documents and the lookup/insert bridge.
//!
//! A document holds utterances, each with a feature track and a sorted list
//! of non-overlapping sign tokens. Looking up a segment runs the recognizer
//! in segmented mode over the chosen frames; inserting copies the confirmed
//! variant's full property record into a new token. Both operations leave
//! the input document untouched.
//!
//! File format (JSON, UTF-8):
//!
//! ```json
//! {
//!   "format": "signlookup-annotation",
//!   "version": 1,
//!   "doc_id": "story-12",
//!   "utterances": [
//!     {
//!       "utterance_id": "u1",
//!       "media_ref": "story-12.mp4",
//!       "features": { "kpcount": 2, "fps": 30.0, "frames": [...] },
//!       "sign_tokens": [ { "start_frame": 10, "end_frame": 42, "properties": { ... } } ]
//!     }
//!   ]
//! }
//! ```

use crate::features::{FeatureSequence, DEFAULT_FPS};
use crate::matcher::{CandidateList, QueryMode, RecognitionError, Recognizer};
use crate::signbank::{Bank, SignClass};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_NAME: &str = "signlookup-annotation";
pub const FORMAT_VERSION: u32 = 1;

/// Shortest segment, in frames, that can be looked up.
pub const MIN_SEGMENT_FRAMES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("bad frame range: {0}")]
    Range(String),
    #[error("unknown {kind} {id:?}")]
    NotFound { kind: &'static str, id: String },
    #[error("segment [{start}, {end}) overlaps existing token [{other_start}, {other_end})")]
    Overlap {
        start: usize,
        end: usize,
        other_start: usize,
        other_end: usize,
    },
    #[error("malformed annotation document: {0}")]
    Parse(String),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

/// Sign properties copied from the bank when a lookup is confirmed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPropertiesRecord {
    pub base_gloss: String,
    pub variant_label: String,
    pub variant_id: String,
    pub sign_class: SignClass,
    pub start_handshape_dom: String,
    pub end_handshape_dom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_handshape_nondom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_handshape_nondom: Option<String>,
    pub related_english_words: Vec<String>,
}

impl SignPropertiesRecord {
    pub fn from_bank(bank: &Bank, variant_id: &str) -> Result<Self, AnnotationError> {
        let variant = bank.variant(variant_id).ok_or_else(|| AnnotationError::NotFound {
            kind: "variant",
            id: variant_id.to_string(),
        })?;
        let entry = bank.entry(&variant.entry_id).ok_or_else(|| AnnotationError::NotFound {
            kind: "entry",
            id: variant.entry_id.clone(),
        })?;
        Ok(Self {
            base_gloss: entry.base_gloss.clone(),
            variant_label: variant.label.clone(),
            variant_id: variant.variant_id.clone(),
            sign_class: entry.sign_class,
            start_handshape_dom: variant.start_handshape_dom.clone(),
            end_handshape_dom: variant.end_handshape_dom.clone(),
            start_handshape_nondom: variant.start_handshape_nondom.clone(),
            end_handshape_nondom: variant.end_handshape_nondom.clone(),
            related_english_words: variant.related_english_words.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignToken {
    pub start_frame: usize,
    pub end_frame: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub properties: Option<SignPropertiesRecord>,
}

impl SignToken {
    fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start_frame < end && start < self.end_frame
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub utterance_id: String,
    pub media_ref: String,
    pub features: FeatureSequence,
    #[serde(default)]
    pub sign_tokens: Vec<SignToken>,
}

impl Utterance {
    /// Frame index nearest to `seconds` on this track's clock.
    pub fn frame_at(&self, seconds: f64) -> usize {
        let fps = self.features.fps().unwrap_or(DEFAULT_FPS);
        (seconds * fps).round().max(0.0) as usize
    }

    fn check_range(&self, start: usize, end: usize) -> Result<(), AnnotationError> {
        if start >= end || end > self.features.len() {
            return Err(AnnotationError::Range(format!(
                "[{start}, {end}) is not a nonempty range within {} frames",
                self.features.len()
            )));
        }
        Ok(())
    }

    fn check_tokens(&self) -> Result<(), AnnotationError> {
        for t in &self.sign_tokens {
            self.check_range(t.start_frame, t.end_frame)?;
        }
        for w in self.sign_tokens.windows(2) {
            if w[1].start_frame < w[0].end_frame {
                return Err(AnnotationError::Parse(format!(
                    "utterance {:?}: tokens [{}, {}) and [{}, {}) overlap or are unsorted",
                    self.utterance_id, w[0].start_frame, w[0].end_frame, w[1].start_frame, w[1].end_frame
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DocFile", into = "DocFile")]
pub struct AnnotationDoc {
    pub doc_id: String,
    pub utterances: Vec<Utterance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocFile {
    format: String,
    version: u32,
    doc_id: String,
    utterances: Vec<Utterance>,
}

impl TryFrom<DocFile> for AnnotationDoc {
    type Error = AnnotationError;

    fn try_from(f: DocFile) -> Result<Self, Self::Error> {
        if f.format != FORMAT_NAME {
            return Err(AnnotationError::Parse(format!("unexpected format {:?}", f.format)));
        }
        if f.version != FORMAT_VERSION {
            return Err(AnnotationError::Parse(format!("unsupported version {}", f.version)));
        }
        let doc = AnnotationDoc {
            doc_id: f.doc_id,
            utterances: f.utterances,
        };
        doc.check()?;
        Ok(doc)
    }
}

impl From<AnnotationDoc> for DocFile {
    fn from(d: AnnotationDoc) -> Self {
        DocFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            doc_id: d.doc_id,
            utterances: d.utterances,
        }
    }
}

impl AnnotationDoc {
    pub fn check(&self) -> Result<(), AnnotationError> {
        let mut seen = std::collections::HashSet::new();
        for u in &self.utterances {
            if !seen.insert(u.utterance_id.as_str()) {
                return Err(AnnotationError::Parse(format!("duplicate utterance {:?}", u.utterance_id)));
            }
            u.check_tokens()?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, AnnotationError> {
        serde_json::from_str(text).map_err(|e| AnnotationError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotation documents always serialize")
    }

    pub fn utterance(&self, utterance_id: &str) -> Result<&Utterance, AnnotationError> {
        self.utterances
            .iter()
            .find(|u| u.utterance_id == utterance_id)
            .ok_or_else(|| AnnotationError::NotFound {
                kind: "utterance",
                id: utterance_id.to_string(),
            })
    }
}

/// Runs a segmented-mode lookup over frames `[start_frame, end_frame)`.
pub fn lookup_segment(
    doc: &AnnotationDoc,
    utterance_id: &str,
    start_frame: usize,
    end_frame: usize,
    recognizer: &dyn Recognizer,
) -> Result<CandidateList, AnnotationError> {
    let u = doc.utterance(utterance_id)?;
    u.check_range(start_frame, end_frame)?;
    if end_frame - start_frame < MIN_SEGMENT_FRAMES {
        return Err(AnnotationError::Range(format!(
            "segment must span at least {MIN_SEGMENT_FRAMES} frames"
        )));
    }
    let segment = u
        .features
        .slice(start_frame, end_frame)
        .map_err(|e| AnnotationError::Range(e.to_string()))?;
    Ok(recognizer.recognize(&segment, QueryMode::Segmented)?)
}

/// Returns a copy of `doc` with a new token over `[start_frame, end_frame)`
/// carrying the properties of `variant_id`.
pub fn insert_all_data(
    doc: &AnnotationDoc,
    utterance_id: &str,
    start_frame: usize,
    end_frame: usize,
    variant_id: &str,
    bank: &Bank,
) -> Result<AnnotationDoc, AnnotationError> {
    let u = doc.utterance(utterance_id)?;
    u.check_range(start_frame, end_frame)?;
    if let Some(t) = u.sign_tokens.iter().find(|t| t.overlaps(start_frame, end_frame)) {
        return Err(AnnotationError::Overlap {
            start: start_frame,
            end: end_frame,
            other_start: t.start_frame,
            other_end: t.end_frame,
        });
    }
    let record = SignPropertiesRecord::from_bank(bank, variant_id)?;

    let mut out = doc.clone();
    let u = out
        .utterances
        .iter_mut()
        .find(|u| u.utterance_id == utterance_id)
        .expect("utterance found above");
    let at = u.sign_tokens.partition_point(|t| t.start_frame < start_frame);
    u.sign_tokens.insert(
        at,
        SignToken {
            start_frame,
            end_frame,
            properties: Some(record),
        },
    );
    Ok(out)
}

//! Top-1 / Top-5 accuracy over a labelled query set.
//!
//! Queries manifest (JSON; feature paths relative to the manifest):
//!
//! ```json
//! { "version": 1, "queries": [ { "query_id": "q1", "features": "q1.json", "entry_id": "e007" } ] }
//! ```

use crate::features::{FeatureError, FeatureSequence};
use crate::matcher::{QueryMode, RecognitionError, Recognizer};
use crate::signbank::Bank;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const QUERIES_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

/// Placeholder gloss in the confusion table when a query yields no candidates.
pub const NO_CANDIDATE: &str = "<none>";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("queries manifest: {0}")]
    Manifest(String),
    #[error("query {query_id:?}: {source}")]
    Features {
        query_id: String,
        #[source]
        source: FeatureError,
    },
    #[error("query {query_id:?}: {source}")]
    Recognition {
        query_id: String,
        #[source]
        source: RecognitionError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueriesManifest {
    pub version: u32,
    pub queries: Vec<QueryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub query_id: String,
    pub features: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledQuery {
    pub query_id: String,
    /// Ground-truth entry.
    pub entry_id: String,
    pub features: FeatureSequence,
}

pub fn load_queries(path: &Path) -> Result<Vec<LabeledQuery>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Manifest(format!("{}: {e}", path.display())))?;
    let manifest: QueriesManifest = serde_json::from_str(&text).map_err(|e| EvalError::Manifest(e.to_string()))?;
    if manifest.version != QUERIES_VERSION {
        return Err(EvalError::Manifest(format!("unsupported version {}", manifest.version)));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    manifest
        .queries
        .into_iter()
        .map(|r| {
            let entry_id = r
                .entry_id
                .ok_or_else(|| EvalError::Manifest(format!("query {:?} has no entry_id label", r.query_id)))?;
            let features = FeatureSequence::load(&base.join(&r.features)).map_err(|source| EvalError::Features {
                query_id: r.query_id.clone(),
                source,
            })?;
            Ok(LabeledQuery {
                query_id: r.query_id,
                entry_id,
                features,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub n_queries: usize,
    pub top1_correct: usize,
    pub top5_correct: usize,
    pub top1_acc: f64,
    pub top5_acc: f64,
    /// truth gloss -> top-1 gloss -> count
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub modes: BTreeMap<QueryMode, ModeReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Outcome of a single query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    /// 1-based position of the true entry among the candidates.
    pub rank_of_truth: Option<usize>,
    pub top1_gloss: Option<String>,
}

fn accuracy(correct: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        correct as f64 / n as f64
    }
}

/// Runs every query in every mode and tallies Top-1 and Top-5 hits.
///
/// Queries are scored in parallel; results are reduced in query order, so
/// the report is identical across runs.
pub fn evaluate(
    recognizer: &dyn Recognizer,
    bank: &Bank,
    queries: &[LabeledQuery],
    modes: &[QueryMode],
) -> Result<EvalReport, EvalError> {
    for q in queries {
        if bank.entry(&q.entry_id).is_none() {
            return Err(EvalError::Manifest(format!(
                "query {:?} is labelled with unknown entry {:?}",
                q.query_id, q.entry_id
            )));
        }
    }
    let mut out = BTreeMap::new();
    for &mode in modes {
        let outcomes: Vec<QueryOutcome> = queries
            .par_iter()
            .map(|q| {
                let list = recognizer.recognize(&q.features, mode).map_err(|source| EvalError::Recognition {
                    query_id: q.query_id.clone(),
                    source,
                })?;
                Ok(QueryOutcome {
                    rank_of_truth: list.position_of(&q.entry_id).map(|p| p + 1),
                    top1_gloss: list.candidates.first().map(|c| c.base_gloss.clone()),
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;

        let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        let (mut top1, mut top5) = (0, 0);
        for (q, o) in queries.iter().zip(&outcomes) {
            if o.rank_of_truth == Some(1) {
                top1 += 1;
            }
            if o.rank_of_truth.is_some_and(|r| r <= 5) {
                top5 += 1;
            }
            let truth = bank.entry(&q.entry_id).expect("checked above").base_gloss.clone();
            let predicted = o.top1_gloss.clone().unwrap_or_else(|| NO_CANDIDATE.to_string());
            *confusion.entry(truth).or_default().entry(predicted).or_default() += 1;
        }
        out.insert(
            mode,
            ModeReport {
                n_queries: queries.len(),
                top1_correct: top1,
                top5_correct: top5,
                top1_acc: accuracy(top1, queries.len()),
                top5_acc: accuracy(top5, queries.len()),
                confusion,
            },
        );
    }
    Ok(EvalReport {
        version: REPORT_VERSION,
        modes: out,
    })
}

use super::{default_band, dtw, normalize, GalleryIndex, MatchError, QueryMode};
use crate::features::FeatureSequence;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Sakoe-Chiba band as a fraction of the longer sequence; `None` disables the band.
    pub band_fraction: Option<f64>,
    /// Number of candidate signs returned.
    pub k: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            band_fraction: Some(0.2),
            k: DEFAULT_K,
        }
    }
}

impl MatchConfig {
    pub fn band(&self, m: usize, n: usize) -> Option<usize> {
        self.band_fraction.map(|f| default_band(m, n, f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantScore {
    pub variant_id: String,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub entry_id: String,
    pub base_gloss: String,
    pub score: f64,
    pub variants: Vec<VariantScore>,
}

/// Ranked candidate signs, best (smallest distance) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub mode: QueryMode,
    pub candidates: Vec<Candidate>,
}

impl CandidateList {
    /// Checks ordering and aggregation invariants; returns the first violation.
    pub fn check(&self, k: usize) -> Result<(), String> {
        if self.candidates.len() > k {
            return Err(format!("{} candidates exceed k = {k}", self.candidates.len()));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if !(c.score.is_finite() && c.score >= 0.0) {
                return Err(format!("candidate {i} has invalid score {}", c.score));
            }
            if c.variants.is_empty() {
                return Err(format!("candidate {i} ({}) carries no variants", c.base_gloss));
            }
            let min = c.variants.iter().map(|v| v.score).fold(f64::INFINITY, f64::min);
            if min != c.score {
                return Err(format!("candidate {i} score {} differs from best variant score {min}", c.score));
            }
            if c.variants.windows(2).any(|w| w[0].score > w[1].score) {
                return Err(format!("candidate {i} variants out of order"));
            }
            if let Some(prev) = i.checked_sub(1).map(|p| &self.candidates[p]) {
                match prev.score.total_cmp(&c.score) {
                    Ordering::Greater => return Err(format!("candidates {} and {i} out of order", i - 1)),
                    Ordering::Equal if prev.base_gloss >= c.base_gloss => {
                        return Err(format!("tie between {} and {i} not broken by gloss", i - 1))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn glosses(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.base_gloss.as_str()).collect()
    }

    pub fn position_of(&self, entry_id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.entry_id == entry_id)
    }
}

fn check_query(index: &GalleryIndex, query: &FeatureSequence) -> Result<FeatureSequence, MatchError> {
    if query.kpcount() != index.kpcount() {
        return Err(MatchError::InvalidInput(format!(
            "query has {} keypoints, gallery has {}",
            query.kpcount(),
            index.kpcount()
        )));
    }
    normalize(query, index.params())
}

fn pair_score(query: &FeatureSequence, exemplar: &FeatureSequence, mode: QueryMode, config: &MatchConfig) -> Result<f64, MatchError> {
    let a = dtw(query, exemplar, config.band(query.len(), exemplar.len()))?;
    Ok(match mode {
        QueryMode::Citation => a.distance,
        QueryMode::Segmented => a.distance / a.path_len as f64,
    })
}

fn best_exemplar_score(
    normalized_query: &FeatureSequence,
    variant: &super::IndexedVariant,
    mode: QueryMode,
    config: &MatchConfig,
) -> Result<f64, MatchError> {
    variant.exemplars.iter().try_fold(f64::INFINITY, |best, x| {
        Ok(best.min(pair_score(normalized_query, &x.features, mode, config)?))
    })
}

/// Best score of `query` against any exemplar of one variant.
///
/// Citation mode uses the raw DTW distance; segmented mode divides it by the
/// warping path length.
pub fn score_variant(
    index: &GalleryIndex,
    query: &FeatureSequence,
    variant_id: &str,
    mode: QueryMode,
    config: &MatchConfig,
) -> Result<f64, MatchError> {
    let (_, variant) = index.variant(variant_id).ok_or_else(|| MatchError::NotFound {
        kind: "variant",
        id: variant_id.to_string(),
    })?;
    let q = check_query(index, query)?;
    best_exemplar_score(&q, variant, mode, config)
}

/// Returns the `config.k` closest entries to `query`, ascending by score.
///
/// An entry scores the minimum over its variants. Ties go to the
/// lexicographically smaller base gloss.
pub fn rank(
    index: &GalleryIndex,
    query: &FeatureSequence,
    mode: QueryMode,
    config: &MatchConfig,
) -> Result<CandidateList, MatchError> {
    if index.is_empty() {
        return Err(MatchError::EmptyGallery);
    }
    if config.k == 0 {
        return Err(MatchError::InvalidInput("k must be at least 1".into()));
    }
    let q = check_query(index, query)?;

    let mut candidates = index
        .entries()
        .iter()
        .map(|entry| {
            let mut variants = entry
                .variants
                .iter()
                .map(|v| {
                    Ok(VariantScore {
                        variant_id: v.variant_id.clone(),
                        label: v.label.clone(),
                        score: best_exemplar_score(&q, v, mode, config)?,
                    })
                })
                .collect::<Result<Vec<_>, MatchError>>()?;
            variants.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.label.cmp(&b.label)));
            Ok(Candidate {
                entry_id: entry.entry_id.clone(),
                base_gloss: entry.base_gloss.clone(),
                score: variants[0].score,
                variants,
            })
        })
        .collect::<Result<Vec<_>, MatchError>>()?;
    candidates.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.base_gloss.cmp(&b.base_gloss)));
    candidates.truncate(config.k);
    Ok(CandidateList { mode, candidates })
}

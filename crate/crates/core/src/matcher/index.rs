use super::{normalize, MatchError, NormalizationParams};
use crate::features::FeatureSequence;
use crate::signbank::Bank;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedExemplar {
    pub exemplar_id: String,
    /// Normalized with the index's parameters.
    pub features: FeatureSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedVariant {
    pub variant_id: String,
    pub label: String,
    pub exemplars: Vec<IndexedExemplar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedEntry {
    pub entry_id: String,
    pub base_gloss: String,
    pub variants: Vec<IndexedVariant>,
}

/// Normalized gallery exemplars grouped by variant and entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexData", into = "IndexData")]
pub struct GalleryIndex {
    data: IndexData,
    variant_ix: HashMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexData {
    params: NormalizationParams,
    kpcount: usize,
    entries: Vec<IndexedEntry>,
}

impl TryFrom<IndexData> for GalleryIndex {
    type Error = MatchError;

    fn try_from(data: IndexData) -> Result<Self, Self::Error> {
        let mut variant_ix = HashMap::new();
        for (ei, e) in data.entries.iter().enumerate() {
            for (vi, v) in e.variants.iter().enumerate() {
                if v.exemplars.is_empty() {
                    return Err(MatchError::InvalidInput(format!("variant {:?} has no exemplars", v.variant_id)));
                }
                if let Some(x) = v.exemplars.iter().find(|x| x.features.kpcount() != data.kpcount) {
                    return Err(MatchError::InvalidInput(format!(
                        "exemplar {:?} has {} keypoints, index declares {}",
                        x.exemplar_id,
                        x.features.kpcount(),
                        data.kpcount
                    )));
                }
                if variant_ix.insert(v.variant_id.clone(), (ei, vi)).is_some() {
                    return Err(MatchError::InvalidInput(format!("duplicate variant {:?}", v.variant_id)));
                }
            }
        }
        Ok(Self { data, variant_ix })
    }
}

impl From<GalleryIndex> for IndexData {
    fn from(ix: GalleryIndex) -> Self {
        ix.data
    }
}

impl GalleryIndex {
    /// Normalizes every exemplar of `bank` with `params`.
    pub fn build(bank: &Bank, params: NormalizationParams) -> Result<Self, MatchError> {
        let entries = bank
            .entries()
            .iter()
            .map(|entry| {
                let variants = bank
                    .variants_of(entry)
                    .map(|v| {
                        let exemplars = bank
                            .exemplars_of(v)
                            .map(|x| {
                                Ok(IndexedExemplar {
                                    exemplar_id: x.exemplar_id.clone(),
                                    features: normalize(&x.features, params)?,
                                })
                            })
                            .collect::<Result<Vec<_>, MatchError>>()?;
                        Ok(IndexedVariant {
                            variant_id: v.variant_id.clone(),
                            label: v.label.clone(),
                            exemplars,
                        })
                    })
                    .collect::<Result<Vec<_>, MatchError>>()?;
                Ok(IndexedEntry {
                    entry_id: entry.entry_id.clone(),
                    base_gloss: entry.base_gloss.clone(),
                    variants,
                })
            })
            .collect::<Result<Vec<_>, MatchError>>()?;
        IndexData {
            params,
            kpcount: bank.kpcount(),
            entries,
        }
        .try_into()
    }

    pub fn params(&self) -> NormalizationParams {
        self.data.params
    }

    pub fn kpcount(&self) -> usize {
        self.data.kpcount
    }

    pub fn entries(&self) -> &[IndexedEntry] {
        &self.data.entries
    }

    pub fn is_empty(&self) -> bool {
        self.data.entries.is_empty()
    }

    pub fn exemplar_count(&self) -> usize {
        self.data
            .entries
            .iter()
            .flat_map(|e| &e.variants)
            .map(|v| v.exemplars.len())
            .sum()
    }

    pub fn variant(&self, variant_id: &str) -> Option<(&IndexedEntry, &IndexedVariant)> {
        self.variant_ix.get(variant_id).map(|&(ei, vi)| {
            let e = &self.data.entries[ei];
            (e, &e.variants[vi])
        })
    }
}

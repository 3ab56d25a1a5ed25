//! The sign bank: entries grouping uniquely labelled variants, each variant
//! owning one or more exemplar feature sequences.
//!
//! A bank is built once from a manifest and is immutable afterwards; a
//! reload produces a fresh snapshot. See [`BankManifest`] for the on-disk
//! layout.

use crate::features::{FeatureError, FeatureSequence};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImportError {
    #[error("duplicate {kind} {value:?}")]
    Duplicate { kind: &'static str, value: String },
    #[error("entry {entry:?}: sign class {class:?} is not accepted")]
    Class { entry: String, class: String },
    #[error("dangling reference: {0}")]
    Reference(String),
    #[error("variant {variant:?}: handshape {label:?} is not in the inventory")]
    Handshape { variant: String, label: String },
    #[error("invalid bank data: {0}")]
    Invalid(String),
    #[error("exemplar {exemplar:?}: {source}")]
    Features {
        exemplar: String,
        #[source]
        source: FeatureError,
    },
    #[error("exemplar {exemplar:?} has {found} keypoints, bank declares {expected}")]
    KeypointMismatch {
        exemplar: String,
        expected: usize,
        found: usize,
    },
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("malformed manifest: {0}")]
    Parse(String),
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignBankError {
    #[error("search query has no criteria")]
    EmptyQuery,
    #[error("unknown {kind} {id:?}")]
    NotFound { kind: &'static str, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Lexical,
    Loan,
    Number,
    Compound,
}

/// Sign classes that the recognizer vocabulary leaves out.
pub const EXCLUDED_CLASSES: [&str; 4] = ["fingerspelled", "classifier", "index", "gesture"];

impl SignClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SignClass::Lexical => "lexical",
            SignClass::Loan => "loan",
            SignClass::Number => "number",
            SignClass::Compound => "compound",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lexical" => Some(SignClass::Lexical),
            "loan" => Some(SignClass::Loan),
            "number" => Some(SignClass::Number),
            "compound" => Some(SignClass::Compound),
            _ => None,
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Isolated,
    FromSentence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    pub entry_id: String,
    pub base_gloss: String,
    pub sign_class: SignClass,
    pub variant_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignVariant {
    pub variant_id: String,
    pub label: String,
    pub entry_id: String,
    pub start_handshape_dom: String,
    pub end_handshape_dom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_handshape_nondom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_handshape_nondom: Option<String>,
    pub related_english_words: Vec<String>,
    pub exemplar_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub exemplar_id: String,
    pub variant_id: String,
    pub provenance: Provenance,
    /// Path of the feature file as written in the manifest.
    pub features_ref: String,
    pub features: FeatureSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_utterance: Option<String>,
    /// Preview clip, relative to the media root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<String>,
}

/// Allowed handshape labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HandshapeInventory(Vec<String>);

impl HandshapeInventory {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(labels.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.iter().any(|l| l == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn load(path: &Path) -> Result<Self, ImportError> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ImportError::Parse(format!("{}: {e}", path.display())))
    }
}

/// Search criteria; every present field must match.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss_substring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub english_word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_handshape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_handshape: Option<String>,
}

impl SearchQuery {
    pub fn gloss(s: impl Into<String>) -> Self {
        Self {
            gloss_substring: Some(s.into()),
            ..Self::default()
        }
    }

    pub fn word(s: impl Into<String>) -> Self {
        Self {
            english_word: Some(s.into()),
            ..Self::default()
        }
    }

    pub fn criteria_count(&self) -> usize {
        [
            &self.gloss_substring,
            &self.english_word,
            &self.start_handshape,
            &self.end_handshape,
        ]
        .iter()
        .filter(|c| c.is_some())
        .count()
    }

    /// Splits the query into one single-criterion query per present field.
    pub fn split(&self) -> Vec<SearchQuery> {
        let mut out = Vec::new();
        if let Some(v) = &self.gloss_substring {
            out.push(SearchQuery { gloss_substring: Some(v.clone()), ..Default::default() });
        }
        if let Some(v) = &self.english_word {
            out.push(SearchQuery { english_word: Some(v.clone()), ..Default::default() });
        }
        if let Some(v) = &self.start_handshape {
            out.push(SearchQuery { start_handshape: Some(v.clone()), ..Default::default() });
        }
        if let Some(v) = &self.end_handshape {
            out.push(SearchQuery { end_handshape: Some(v.clone()), ..Default::default() });
        }
        out
    }

    fn matches(&self, v: &SignVariant) -> bool {
        if let Some(sub) = &self.gloss_substring {
            if !v.label.to_lowercase().contains(&sub.to_lowercase()) {
                return false;
            }
        }
        if let Some(word) = &self.english_word {
            let word = word.to_lowercase();
            if !v.related_english_words.iter().any(|w| *w == word) {
                return false;
            }
        }
        if let Some(hs) = &self.start_handshape {
            if v.start_handshape_dom != *hs {
                return false;
            }
        }
        if let Some(hs) = &self.end_handshape {
            if v.end_handshape_dom != *hs {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarView {
    pub exemplar_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_utterance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantView {
    pub variant_id: String,
    pub label: String,
    pub start_handshape_dom: String,
    pub end_handshape_dom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_handshape_nondom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_handshape_nondom: Option<String>,
    pub related_english_words: Vec<String>,
    pub isolated: Vec<ExemplarView>,
    pub from_sentence: Vec<ExemplarView>,
}

/// Everything shown on one sign-bank entry page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryView {
    pub entry_id: String,
    pub base_gloss: String,
    pub sign_class: SignClass,
    pub variants: Vec<VariantView>,
}

/// An immutable, validated sign bank snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BankData", into = "BankData")]
pub struct Bank {
    data: BankData,
    entry_ix: HashMap<String, usize>,
    variant_ix: HashMap<String, usize>,
    exemplar_ix: HashMap<String, usize>,
}

/// Serialized form of a [`Bank`]; deserializing re-runs every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankData {
    pub kpcount: usize,
    pub handshapes: HandshapeInventory,
    pub entries: Vec<SignEntry>,
    pub variants: Vec<SignVariant>,
    pub exemplars: Vec<Exemplar>,
}

impl TryFrom<BankData> for Bank {
    type Error = ImportError;

    fn try_from(data: BankData) -> Result<Self, Self::Error> {
        Bank::assemble(data)
    }
}

impl From<Bank> for BankData {
    fn from(bank: Bank) -> Self {
        bank.data
    }
}

fn index_unique<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<HashMap<String, usize>, ImportError> {
    let mut ix = HashMap::new();
    for (i, id) in ids.enumerate() {
        if ix.insert(id.to_string(), i).is_some() {
            return Err(ImportError::Duplicate {
                kind,
                value: id.to_string(),
            });
        }
    }
    Ok(ix)
}

impl Bank {
    pub fn empty(kpcount: usize) -> Self {
        Self::assemble(BankData {
            kpcount,
            handshapes: HandshapeInventory::default(),
            entries: vec![],
            variants: vec![],
            exemplars: vec![],
        })
        .expect("empty bank is valid")
    }

    /// Validates every bank invariant and builds the lookup tables.
    pub fn assemble(data: BankData) -> Result<Self, ImportError> {
        if data.kpcount == 0 {
            return Err(ImportError::Invalid("kpcount must be at least 1".into()));
        }
        let entry_ix = index_unique("entry id", data.entries.iter().map(|e| e.entry_id.as_str()))?;
        let variant_ix = index_unique("variant id", data.variants.iter().map(|v| v.variant_id.as_str()))?;
        let exemplar_ix = index_unique("exemplar id", data.exemplars.iter().map(|x| x.exemplar_id.as_str()))?;
        index_unique("base gloss", data.entries.iter().map(|e| e.base_gloss.as_str()))?;
        index_unique("variant label", data.variants.iter().map(|v| v.label.as_str()))?;

        for e in &data.entries {
            if e.base_gloss.trim().is_empty() {
                return Err(ImportError::Invalid(format!("entry {:?} has an empty base gloss", e.entry_id)));
            }
            if e.base_gloss.chars().any(char::is_lowercase) {
                return Err(ImportError::Invalid(format!(
                    "base gloss {:?} must follow the uppercase convention",
                    e.base_gloss
                )));
            }
            if e.variant_ids.is_empty() {
                return Err(ImportError::Invalid(format!("entry {:?} has no variants", e.entry_id)));
            }
            for vid in &e.variant_ids {
                let v = variant_ix
                    .get(vid)
                    .map(|&i| &data.variants[i])
                    .ok_or_else(|| ImportError::Reference(format!("entry {:?} lists unknown variant {vid:?}", e.entry_id)))?;
                if v.entry_id != e.entry_id {
                    return Err(ImportError::Reference(format!(
                        "variant {vid:?} is listed by entry {:?} but belongs to {:?}",
                        e.entry_id, v.entry_id
                    )));
                }
            }
        }

        for v in &data.variants {
            if v.label.trim().is_empty() {
                return Err(ImportError::Invalid(format!("variant {:?} has an empty label", v.variant_id)));
            }
            let owner = entry_ix
                .get(&v.entry_id)
                .map(|&i| &data.entries[i])
                .ok_or_else(|| ImportError::Reference(format!("variant {:?} names unknown entry {:?}", v.variant_id, v.entry_id)))?;
            if !owner.variant_ids.contains(&v.variant_id) {
                return Err(ImportError::Reference(format!(
                    "variant {:?} is not listed by its entry {:?}",
                    v.variant_id, v.entry_id
                )));
            }
            let handshapes = [
                Some(&v.start_handshape_dom),
                Some(&v.end_handshape_dom),
                v.start_handshape_nondom.as_ref(),
                v.end_handshape_nondom.as_ref(),
            ];
            for label in handshapes.into_iter().flatten() {
                if !data.handshapes.contains(label) {
                    return Err(ImportError::Handshape {
                        variant: v.variant_id.clone(),
                        label: label.clone(),
                    });
                }
            }
            if let Some(w) = v.related_english_words.iter().find(|w| w.chars().any(char::is_uppercase)) {
                return Err(ImportError::Invalid(format!("variant {:?}: related word {w:?} is not lowercase", v.variant_id)));
            }
            if v.exemplar_ids.is_empty() {
                return Err(ImportError::Invalid(format!("variant {:?} has no exemplars", v.variant_id)));
            }
            for xid in &v.exemplar_ids {
                let x = exemplar_ix
                    .get(xid)
                    .map(|&i| &data.exemplars[i])
                    .ok_or_else(|| ImportError::Reference(format!("variant {:?} lists unknown exemplar {xid:?}", v.variant_id)))?;
                if x.variant_id != v.variant_id {
                    return Err(ImportError::Reference(format!(
                        "exemplar {xid:?} is listed by variant {:?} but belongs to {:?}",
                        v.variant_id, x.variant_id
                    )));
                }
            }
        }

        for x in &data.exemplars {
            let owner = variant_ix
                .get(&x.variant_id)
                .map(|&i| &data.variants[i])
                .ok_or_else(|| ImportError::Reference(format!("exemplar {:?} names unknown variant {:?}", x.exemplar_id, x.variant_id)))?;
            if !owner.exemplar_ids.contains(&x.exemplar_id) {
                return Err(ImportError::Reference(format!(
                    "exemplar {:?} is not listed by its variant {:?}",
                    x.exemplar_id, x.variant_id
                )));
            }
            if x.provenance == Provenance::FromSentence && x.source_utterance.is_none() {
                return Err(ImportError::Invalid(format!(
                    "exemplar {:?} comes from a sentence but has no source utterance",
                    x.exemplar_id
                )));
            }
            if x.features.kpcount() != data.kpcount {
                return Err(ImportError::KeypointMismatch {
                    exemplar: x.exemplar_id.clone(),
                    expected: data.kpcount,
                    found: x.features.kpcount(),
                });
            }
        }

        Ok(Self {
            data,
            entry_ix,
            variant_ix,
            exemplar_ix,
        })
    }

    /// Builds a bank from a parsed manifest, loading feature files through `load`.
    pub fn from_manifest<F>(
        manifest: &BankManifest,
        handshapes: HandshapeInventory,
        mut load: F,
    ) -> Result<Self, ImportError>
    where
        F: FnMut(&str) -> Result<FeatureSequence, FeatureError>,
    {
        if manifest.version != MANIFEST_VERSION {
            return Err(ImportError::Version(manifest.version));
        }
        let entries = manifest
            .entries
            .iter()
            .map(|e| {
                let sign_class = SignClass::parse(&e.sign_class).ok_or_else(|| ImportError::Class {
                    entry: e.entry_id.clone(),
                    class: e.sign_class.clone(),
                })?;
                Ok(SignEntry {
                    entry_id: e.entry_id.clone(),
                    base_gloss: e.base_gloss.clone(),
                    sign_class,
                    variant_ids: e.variant_ids.clone(),
                })
            })
            .collect::<Result<Vec<_>, ImportError>>()?;
        let variants = manifest
            .variants
            .iter()
            .map(|v| SignVariant {
                variant_id: v.variant_id.clone(),
                label: v.label.clone(),
                entry_id: v.entry_id.clone(),
                start_handshape_dom: v.start_handshape_dom.clone(),
                end_handshape_dom: v.end_handshape_dom.clone(),
                start_handshape_nondom: v.start_handshape_nondom.clone(),
                end_handshape_nondom: v.end_handshape_nondom.clone(),
                related_english_words: v.related_english_words.iter().map(|w| w.to_lowercase()).collect(),
                exemplar_ids: v.exemplar_ids.clone(),
            })
            .collect();
        let exemplars = manifest
            .exemplars
            .iter()
            .map(|x| {
                let features = load(&x.features).map_err(|source| match source {
                    FeatureError::Io { .. } => ImportError::Reference(format!(
                        "exemplar {:?}: feature file {:?} cannot be read ({source})",
                        x.exemplar_id, x.features
                    )),
                    source => ImportError::Features {
                        exemplar: x.exemplar_id.clone(),
                        source,
                    },
                })?;
                Ok(Exemplar {
                    exemplar_id: x.exemplar_id.clone(),
                    variant_id: x.variant_id.clone(),
                    provenance: x.provenance,
                    features_ref: x.features.clone(),
                    features,
                    source_utterance: x.source_utterance.clone(),
                    media: x.media.clone(),
                })
            })
            .collect::<Result<Vec<_>, ImportError>>()?;
        Self::assemble(BankData {
            kpcount: manifest.kpcount,
            handshapes,
            entries,
            variants,
            exemplars,
        })
    }

    pub fn kpcount(&self) -> usize {
        self.data.kpcount
    }

    pub fn handshapes(&self) -> &HandshapeInventory {
        &self.data.handshapes
    }

    pub fn entries(&self) -> &[SignEntry] {
        &self.data.entries
    }

    pub fn variants(&self) -> &[SignVariant] {
        &self.data.variants
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.data.exemplars
    }

    pub fn is_empty(&self) -> bool {
        self.data.entries.is_empty()
    }

    pub fn entry(&self, entry_id: &str) -> Option<&SignEntry> {
        self.entry_ix.get(entry_id).map(|&i| &self.data.entries[i])
    }

    pub fn variant(&self, variant_id: &str) -> Option<&SignVariant> {
        self.variant_ix.get(variant_id).map(|&i| &self.data.variants[i])
    }

    pub fn exemplar(&self, exemplar_id: &str) -> Option<&Exemplar> {
        self.exemplar_ix.get(exemplar_id).map(|&i| &self.data.exemplars[i])
    }

    pub fn variants_of<'a>(&'a self, entry: &'a SignEntry) -> impl Iterator<Item = &'a SignVariant> + 'a {
        entry.variant_ids.iter().filter_map(move |id| self.variant(id))
    }

    pub fn exemplars_of<'a>(&'a self, variant: &'a SignVariant) -> impl Iterator<Item = &'a Exemplar> + 'a {
        variant.exemplar_ids.iter().filter_map(move |id| self.exemplar(id))
    }

    /// Variants satisfying every criterion of `q`, sorted by label.
    pub fn search(&self, q: &SearchQuery) -> Result<Vec<&SignVariant>, SignBankError> {
        if q.criteria_count() == 0 {
            return Err(SignBankError::EmptyQuery);
        }
        let mut hits: Vec<&SignVariant> = self.data.variants.iter().filter(|v| q.matches(v)).collect();
        hits.sort_by(|a, b| a.label.cmp(&b.label));
        Ok(hits)
    }

    pub fn related_words(&self, variant_id: &str) -> Result<&[String], SignBankError> {
        self.variant(variant_id)
            .map(|v| v.related_english_words.as_slice())
            .ok_or_else(|| SignBankError::NotFound {
                kind: "variant",
                id: variant_id.to_string(),
            })
    }

    pub fn entry_view(&self, entry_id: &str) -> Result<EntryView, SignBankError> {
        let entry = self.entry(entry_id).ok_or_else(|| SignBankError::NotFound {
            kind: "entry",
            id: entry_id.to_string(),
        })?;
        let variants = self
            .variants_of(entry)
            .map(|v| {
                let (isolated, from_sentence): (Vec<&Exemplar>, Vec<&Exemplar>) =
                    self.exemplars_of(v).partition(|x| x.provenance == Provenance::Isolated);
                let view = |x: &Exemplar| ExemplarView {
                    exemplar_id: x.exemplar_id.clone(),
                    media: x.media.clone(),
                    source_utterance: x.source_utterance.clone(),
                };
                VariantView {
                    variant_id: v.variant_id.clone(),
                    label: v.label.clone(),
                    start_handshape_dom: v.start_handshape_dom.clone(),
                    end_handshape_dom: v.end_handshape_dom.clone(),
                    start_handshape_nondom: v.start_handshape_nondom.clone(),
                    end_handshape_nondom: v.end_handshape_nondom.clone(),
                    related_english_words: v.related_english_words.clone(),
                    isolated: isolated.into_iter().map(view).collect(),
                    from_sentence: from_sentence.into_iter().map(view).collect(),
                }
            })
            .collect();
        Ok(EntryView {
            entry_id: entry.entry_id.clone(),
            base_gloss: entry.base_gloss.clone(),
            sign_class: entry.sign_class,
            variants,
        })
    }
}

/// Bank manifest document (JSON).
///
/// Entries, variants and exemplars are flat lists cross-referenced by id.
/// Feature paths and the handshape inventory path are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankManifest {
    pub version: u32,
    pub kpcount: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handshape_inventory: Option<String>,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub variants: Vec<ManifestVariant>,
    #[serde(default)]
    pub exemplars: Vec<ManifestExemplar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub entry_id: String,
    pub base_gloss: String,
    pub sign_class: String,
    pub variant_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestVariant {
    pub variant_id: String,
    pub label: String,
    pub entry_id: String,
    pub start_handshape_dom: String,
    pub end_handshape_dom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_handshape_nondom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_handshape_nondom: Option<String>,
    #[serde(default)]
    pub related_english_words: Vec<String>,
    pub exemplar_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestExemplar {
    pub exemplar_id: String,
    pub variant_id: String,
    pub provenance: Provenance,
    pub features: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_utterance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<String>,
}

impl BankManifest {
    pub fn empty(kpcount: usize) -> Self {
        Self {
            version: MANIFEST_VERSION,
            kpcount,
            handshape_inventory: None,
            entries: vec![],
            variants: vec![],
            exemplars: vec![],
        }
    }

    pub fn parse(text: &str) -> Result<Self, ImportError> {
        serde_json::from_str(text).map_err(|e| ImportError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest always serializes")
    }
}

fn read_to_string(path: &Path) -> Result<String, ImportError> {
    std::fs::read_to_string(path).map_err(|e| ImportError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads a manifest from disk and builds the bank it describes.
pub fn import_bank(manifest_path: &Path) -> Result<Bank, ImportError> {
    let manifest = BankManifest::parse(&read_to_string(manifest_path)?)?;
    let base: PathBuf = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let handshapes = match &manifest.handshape_inventory {
        Some(rel) => HandshapeInventory::load(&base.join(rel)).map_err(|e| match e {
            ImportError::Io { path, .. } => ImportError::Reference(format!("handshape inventory {path} cannot be read")),
            other => other,
        })?,
        None => HandshapeInventory::default(),
    };
    Bank::from_manifest(&manifest, handshapes, |rel| FeatureSequence::load(&base.join(rel)))
}

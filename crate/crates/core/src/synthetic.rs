//! Seeded synthetic galleries for tests, demos and the accuracy harness.
//!
//! Each entry gets a random smooth keypoint trajectory; exemplars are
//! time-warped, rescaled, translated and jittered renditions of it. The
//! generator is fully determined by [`SyntheticSpec`], so a committed seed
//! reproduces the same gallery bit for bit.

use crate::eval::{LabeledQuery, QueriesManifest, QueryRecord, QUERIES_VERSION};
use crate::features::{FeatureSequence, Keypoint, PoseFrame};
use crate::matcher::{normalize, MatchError, NormalizationParams};
use crate::signbank::{
    Bank, BankManifest, HandshapeInventory, ImportError, ManifestEntry, ManifestExemplar, ManifestVariant, Provenance,
    MANIFEST_VERSION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io;
use std::path::{Path, PathBuf};

/// Seed of the committed accuracy harness.
pub const HARNESS_SEED: u64 = 20_240_715;
/// Seed for the query noise of the committed accuracy harness.
pub const HARNESS_NOISE_SEED: u64 = 7;
/// Query noise (standard deviation, normalized coordinates) of the harness.
pub const HARNESS_NOISE_SIGMA: f64 = 0.01;

const HANDSHAPES: [&str; 10] = ["1", "5", "A", "B", "C", "L", "O", "S", "V", "Y"];
const CLASSES: [&str; 4] = ["lexical", "loan", "number", "compound"];
const HARMONICS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub entries: usize,
    pub exemplars_per_entry: usize,
    /// Every n-th entry gets a second variant; 0 disables.
    pub two_variant_every: usize,
    pub kpcount: usize,
    pub min_frames: usize,
    pub max_frames: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            entries: 50,
            exemplars_per_entry: 3,
            two_variant_every: 3,
            kpcount: 12,
            min_frames: 24,
            max_frames: 48,
            seed: HARNESS_SEED,
        }
    }
}

#[derive(Debug, Clone)]
struct Trajectory {
    /// Per keypoint: base position and `HARMONICS` (amp_x, phase_x, amp_y, phase_y).
    keypoints: Vec<((f64, f64), Vec<(f64, f64, f64, f64)>)>,
}

impl Trajectory {
    fn random(rng: &mut ChaCha8Rng, kpcount: usize) -> Self {
        let keypoints = (0..kpcount)
            .map(|k| {
                let base = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                let amp_cap = if k == 0 { 0.05 } else { 0.6 };
                let harmonics = (1..=HARMONICS)
                    .map(|h| {
                        (
                            rng.random_range(0.0..amp_cap) / h as f64,
                            rng.random_range(0.0..TAU),
                            rng.random_range(0.0..amp_cap) / h as f64,
                            rng.random_range(0.0..TAU),
                        )
                    })
                    .collect();
                (base, harmonics)
            })
            .collect();
        Self { keypoints }
    }

    /// A lexical variant: same base layout, reshuffled first-harmonic phases.
    fn variant_of(&self, rng: &mut ChaCha8Rng) -> Self {
        let mut v = self.clone();
        for (_, harmonics) in v.keypoints.iter_mut().skip(1) {
            harmonics[0].1 = rng.random_range(0.0..TAU);
            harmonics[0].3 = rng.random_range(0.0..TAU);
        }
        v
    }

    fn at(&self, t: f64) -> Vec<(f64, f64)> {
        self.keypoints
            .iter()
            .map(|((bx, by), hs)| {
                hs.iter().enumerate().fold((*bx, *by), |(x, y), (i, (ax, px, ay, py))| {
                    let w = TAU * (i + 1) as f64 * t;
                    (x + ax * (w + px).sin(), y + ay * (w + py).sin())
                })
            })
            .collect()
    }
}

fn render(traj: &Trajectory, rng: &mut ChaCha8Rng, spec: &SyntheticSpec) -> FeatureSequence {
    let frames = rng.random_range(spec.min_frames..=spec.max_frames).max(2);
    let gamma: f64 = rng.random_range(0.8..1.25);
    let scale: f64 = rng.random_range(0.8..1.2);
    let (tx, ty): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let jitter = Normal::new(0.0, 0.02).expect("valid sigma");
    let out: Vec<PoseFrame> = (0..frames)
        .map(|f| {
            let t = (f as f64 / (frames - 1) as f64).powf(gamma);
            PoseFrame::new(
                traj.at(t)
                    .into_iter()
                    .map(|(x, y)| {
                        let conf = if rng.random_bool(0.05) { rng.random_range(0.2..0.9) } else { 1.0 };
                        Keypoint::new(
                            scale * (x + jitter.sample(rng)) + tx,
                            scale * (y + jitter.sample(rng)) + ty,
                            conf,
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    FeatureSequence::new(out, Some(30.0)).expect("generated frames are valid")
}

/// A generated manifest together with the feature sequences it references.
#[derive(Debug, Clone)]
pub struct SyntheticGallery {
    pub spec: SyntheticSpec,
    pub manifest: BankManifest,
    pub handshapes: HandshapeInventory,
    /// Feature sequences keyed by the manifest's feature path.
    pub features: BTreeMap<String, FeatureSequence>,
}

impl SyntheticGallery {
    pub fn generate(spec: SyntheticSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut manifest = BankManifest::empty(spec.kpcount);
        manifest.handshape_inventory = Some("handshapes.json".into());
        let mut features = BTreeMap::new();

        for i in 0..spec.entries {
            let gloss = format!("SIGN-{i:03}");
            let entry_id = format!("e{i:03}");
            let nvariants = if spec.two_variant_every > 0 && i % spec.two_variant_every == 0 { 2 } else { 1 };
            let base = Trajectory::random(&mut rng, spec.kpcount);
            let trajectories: Vec<Trajectory> = (0..nvariants)
                .map(|v| if v == 0 { base.clone() } else { base.variant_of(&mut rng) })
                .collect();
            let variant_ids: Vec<String> = (0..nvariants).map(|v| format!("v{i:03}-{v}")).collect();
            let mut exemplar_ids: Vec<Vec<String>> = vec![Vec::new(); nvariants];

            for j in 0..spec.exemplars_per_entry {
                let v = j % nvariants;
                let xid = format!("x{i:03}-{j}");
                let path = format!("features/{xid}.json");
                features.insert(path.clone(), render(&trajectories[v], &mut rng, &spec));
                let from_sentence = j % 2 == 1;
                manifest.exemplars.push(ManifestExemplar {
                    exemplar_id: xid.clone(),
                    variant_id: variant_ids[v].clone(),
                    provenance: if from_sentence { Provenance::FromSentence } else { Provenance::Isolated },
                    features: path,
                    source_utterance: from_sentence.then(|| format!("utt-{i:03}-{j}")),
                    media: None,
                });
                exemplar_ids[v].push(xid);
            }

            for (v, vid) in variant_ids.iter().enumerate() {
                let hs = |rng: &mut ChaCha8Rng| HANDSHAPES[rng.random_range(0..HANDSHAPES.len())].to_string();
                manifest.variants.push(ManifestVariant {
                    variant_id: vid.clone(),
                    label: if v == 0 { gloss.clone() } else { format!("{gloss}_{}", v + 1) },
                    entry_id: entry_id.clone(),
                    start_handshape_dom: hs(&mut rng),
                    end_handshape_dom: hs(&mut rng),
                    start_handshape_nondom: rng.random_bool(0.5).then(|| hs(&mut rng)),
                    end_handshape_nondom: None,
                    related_english_words: vec![format!("word{i}"), format!("meaning{}", i % 7)],
                    exemplar_ids: exemplar_ids[v].clone(),
                });
            }
            manifest.entries.push(ManifestEntry {
                entry_id,
                base_gloss: gloss,
                sign_class: CLASSES[i % CLASSES.len()].to_string(),
                variant_ids,
            });
        }
        debug_assert_eq!(manifest.version, MANIFEST_VERSION);

        Self {
            spec,
            manifest,
            handshapes: HandshapeInventory::new(HANDSHAPES),
            features,
        }
    }

    pub fn bank(&self) -> Result<Bank, ImportError> {
        Bank::from_manifest(&self.manifest, self.handshapes.clone(), |path| {
            self.features
                .get(path)
                .cloned()
                .ok_or_else(|| crate::features::FeatureError::Io {
                    path: path.to_string(),
                    message: "not generated".into(),
                })
        })
    }

    fn entry_of(&self, exemplar: &ManifestExemplar) -> &str {
        let variant = self
            .manifest
            .variants
            .iter()
            .find(|v| v.variant_id == exemplar.variant_id)
            .expect("generated exemplar has a variant");
        &variant.entry_id
    }

    /// Every exemplar as its own query, unchanged.
    pub fn exact_queries(&self) -> Vec<LabeledQuery> {
        self.manifest
            .exemplars
            .iter()
            .map(|x| LabeledQuery {
                query_id: format!("q-{}", x.exemplar_id),
                entry_id: self.entry_of(x).to_string(),
                features: self.features[&x.features].clone(),
            })
            .collect()
    }

    /// Every exemplar, normalized, with Gaussian noise of `sigma` added to each coordinate.
    pub fn noisy_queries(&self, sigma: f64, seed: u64, params: NormalizationParams) -> Result<Vec<LabeledQuery>, MatchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).map_err(|e| MatchError::InvalidInput(e.to_string()))?;
        self.exact_queries()
            .into_iter()
            .map(|q| {
                let features = normalize(&q.features, params)?
                    .map_keypoints(|_, _, k| Keypoint::new(k.x + noise.sample(&mut rng), k.y + noise.sample(&mut rng), k.conf));
                Ok(LabeledQuery { features, ..q })
            })
            .collect()
    }

    /// Writes `manifest.json`, `handshapes.json` and the feature files under
    /// `dir`; returns the manifest path.
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir.join("features"))?;
        std::fs::write(dir.join("handshapes.json"), serde_json::to_string_pretty(&self.handshapes)?)?;
        for (rel, seq) in &self.features {
            std::fs::write(dir.join(rel), seq.to_json())?;
        }
        let manifest_path = dir.join("manifest.json");
        std::fs::write(&manifest_path, self.manifest.to_json())?;
        Ok(manifest_path)
    }

    /// Writes `queries` as feature files plus a queries manifest under `dir`.
    pub fn write_queries(queries: &[LabeledQuery], dir: &Path) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir.join("queries"))?;
        let mut records = Vec::with_capacity(queries.len());
        for q in queries {
            let rel = format!("queries/{}.json", q.query_id);
            std::fs::write(dir.join(&rel), q.features.to_json())?;
            records.push(QueryRecord {
                query_id: q.query_id.clone(),
                features: rel,
                entry_id: Some(q.entry_id.clone()),
            });
        }
        let path = dir.join("queries.json");
        let doc = QueriesManifest {
            version: QUERIES_VERSION,
            queries: records,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
        Ok(path)
    }
}

#![allow(dead_code)]

use signlookup_core::features::{FeatureSequence, PoseFrame};
use signlookup_core::synthetic::{SyntheticGallery, SyntheticSpec};
use std::collections::HashMap;

/// Synthetic gallery whose entries carry the given glosses (one variant each).
pub fn gallery_with_glosses(glosses: &[&str], exemplars_per_entry: usize, seed: u64) -> SyntheticGallery {
    let mut g = SyntheticGallery::generate(SyntheticSpec {
        entries: glosses.len(),
        exemplars_per_entry,
        two_variant_every: 0,
        seed,
        ..Default::default()
    });
    let mut renamed = HashMap::new();
    for (e, gloss) in g.manifest.entries.iter_mut().zip(glosses) {
        renamed.insert(e.entry_id.clone(), gloss.to_string());
        e.base_gloss = gloss.to_string();
    }
    for v in &mut g.manifest.variants {
        v.label = renamed[&v.entry_id].clone();
    }
    g
}

fn oracle_frame_distance(a: &PoseFrame, b: &PoseFrame) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, q) in a.keypoints.iter().zip(&b.keypoints) {
        let w = if p.conf < q.conf { p.conf } else { q.conf };
        num += w * ((p.x - q.x).powi(2) + (p.y - q.y).powi(2));
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Banded DTW by memoized recursion from the end cell; independent of the
/// library's forward table fill.
pub fn oracle_dtw(a: &FeatureSequence, b: &FeatureSequence, band: Option<usize>) -> f64 {
    fn go(
        a: &[PoseFrame],
        b: &[PoseFrame],
        i: usize,
        j: usize,
        band: usize,
        memo: &mut HashMap<(usize, usize), f64>,
    ) -> f64 {
        if i.abs_diff(j) > band {
            return f64::INFINITY;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let here = oracle_frame_distance(&a[i], &b[j]);
        let rest = match (i, j) {
            (0, 0) => 0.0,
            (0, _) => go(a, b, 0, j - 1, band, memo),
            (_, 0) => go(a, b, i - 1, 0, band, memo),
            _ => go(a, b, i - 1, j - 1, band, memo)
                .min(go(a, b, i - 1, j, band, memo))
                .min(go(a, b, i, j - 1, band, memo)),
        };
        memo.insert((i, j), here + rest);
        here + rest
    }
    let mut memo = HashMap::new();
    go(
        a.frames(),
        b.frames(),
        a.len() - 1,
        b.len() - 1,
        band.unwrap_or(usize::MAX),
        &mut memo,
    )
}

use signlookup_core::signbank::{
    Bank, BankManifest, HandshapeInventory, ManifestEntry, ManifestExemplar, ManifestVariant, Provenance,
};
use std::collections::BTreeMap;

/// Variant spec for [`bank_of`]: label, dominant start/end handshapes, words, exemplar tracks.
pub struct V<'a> {
    pub id: &'a str,
    pub label: &'a str,
    pub hs: (&'a str, &'a str),
    pub words: &'a [&'a str],
    pub exemplars: Vec<FeatureSequence>,
}

/// Builds a bank from `(entry_id, gloss, variants)` triples.
pub fn bank_of(kpcount: usize, entries: Vec<(&str, &str, Vec<V>)>) -> Bank {
    let mut m = BankManifest::empty(kpcount);
    let mut features = BTreeMap::new();
    let mut shapes = vec![];
    for (eid, gloss, variants) in entries {
        m.entries.push(ManifestEntry {
            entry_id: eid.into(),
            base_gloss: gloss.into(),
            sign_class: "lexical".into(),
            variant_ids: variants.iter().map(|v| v.id.to_string()).collect(),
        });
        for v in variants {
            shapes.extend([v.hs.0.to_string(), v.hs.1.to_string()]);
            let mut ids = vec![];
            for (j, seq) in v.exemplars.into_iter().enumerate() {
                let xid = format!("{}-x{j}", v.id);
                let path = format!("{xid}.json");
                features.insert(path.clone(), seq);
                m.exemplars.push(ManifestExemplar {
                    exemplar_id: xid.clone(),
                    variant_id: v.id.into(),
                    provenance: Provenance::Isolated,
                    features: path,
                    source_utterance: None,
                    media: None,
                });
                ids.push(xid);
            }
            m.variants.push(ManifestVariant {
                variant_id: v.id.into(),
                label: v.label.into(),
                entry_id: eid.into(),
                start_handshape_dom: v.hs.0.into(),
                end_handshape_dom: v.hs.1.into(),
                start_handshape_nondom: None,
                end_handshape_nondom: None,
                related_english_words: v.words.iter().map(|w| w.to_string()).collect(),
                exemplar_ids: ids,
            });
        }
    }
    shapes.sort();
    shapes.dedup();
    Bank::from_manifest(&m, HandshapeInventory::new(shapes), |p| Ok(features[p].clone())).unwrap()
}

/// Two-keypoint track: keypoint 0 fixed at the origin, keypoint 1 at the given angles (radians).
pub fn angles(thetas: &[f64]) -> FeatureSequence {
    let frames: Vec<Vec<(f64, f64, f64)>> = thetas
        .iter()
        .map(|t| vec![(0.0, 0.0, 1.0), (t.cos(), t.sin(), 1.0)])
        .collect();
    FeatureSequence::from_triples(&frames, None).unwrap()
}

/// Default Sakoe-Chiba band, computed from first principles.
pub fn band_for(m: usize, n: usize) -> usize {
    let w = (0.2 * m.max(n) as f64).ceil() as usize;
    w.max(m.abs_diff(n)).max(1)
}

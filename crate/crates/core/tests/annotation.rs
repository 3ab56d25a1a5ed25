mod common;

use common::{angles, bank_of, gallery_with_glosses, V};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use signlookup_core::annotation::{
    insert_all_data, lookup_segment, AnnotationDoc, AnnotationError, SignPropertiesRecord, SignToken, Utterance,
};
use signlookup_core::features::{FeatureSequence, Keypoint};
use signlookup_core::matcher::{rank, DtwRecognizer, GalleryIndex, MatchConfig, NormalizationParams, QueryMode};
use signlookup_core::signbank::SignClass;
use signlookup_core::Bank;
use std::sync::Arc;

fn compare_bank() -> Bank {
    bank_of(
        2,
        vec![(
            "e-compare",
            "COMPARE",
            vec![V {
                id: "833",
                label: "COMPARE",
                hs: ("B", "B"),
                words: &["compare", "comparison", "contrast"],
                exemplars: vec![angles(&[0.0, 0.3, 0.6])],
            }],
        )],
    )
}

fn story(frames: usize) -> AnnotationDoc {
    let thetas: Vec<f64> = (0..frames).map(|i| i as f64 * 0.05).collect();
    AnnotationDoc {
        doc_id: "story-12".into(),
        utterances: vec![Utterance {
            utterance_id: "u1".into(),
            media_ref: "story-12.mp4".into(),
            features: angles(&thetas),
            sign_tokens: vec![],
        }],
    }
}

#[test]
fn insert_copies_the_full_property_record() {
    let bank = compare_bank();
    let doc = story(60);
    let before = doc.clone();
    let out = insert_all_data(&doc, "u1", 10, 42, "833", &bank).unwrap();
    assert_eq!(doc, before);
    let tokens = &out.utterance("u1").unwrap().sign_tokens;
    assert_eq!(tokens.len(), 1);
    assert_eq!((tokens[0].start_frame, tokens[0].end_frame), (10, 42));
    let p = tokens[0].properties.as_ref().unwrap();
    assert_eq!(p.base_gloss, "COMPARE");
    assert_eq!(p.variant_id, "833");
    assert_eq!(p.variant_label, "COMPARE");
    assert_eq!(p.sign_class, SignClass::Lexical);
    assert_eq!(p.related_english_words, ["compare", "comparison", "contrast"]);
    assert_eq!((p.start_handshape_dom.as_str(), p.end_handshape_dom.as_str()), ("B", "B"));
    assert_eq!(p, &SignPropertiesRecord::from_bank(&bank, "833").unwrap());
}

#[test]
fn tokens_stay_sorted_and_never_overlap() {
    let bank = compare_bank();
    let doc = insert_all_data(&story(60), "u1", 30, 40, "833", &bank).unwrap();
    let doc = insert_all_data(&doc, "u1", 5, 12, "833", &bank).unwrap();
    let doc = insert_all_data(&doc, "u1", 40, 45, "833", &bank).unwrap();
    let starts: Vec<usize> = doc.utterance("u1").unwrap().sign_tokens.iter().map(|t| t.start_frame).collect();
    assert_eq!(starts, [5, 30, 40]);
    let err = insert_all_data(&doc, "u1", 35, 50, "833", &bank).unwrap_err();
    assert_eq!(
        err,
        AnnotationError::Overlap { start: 35, end: 50, other_start: 30, other_end: 40 }
    );
    assert!(matches!(insert_all_data(&doc, "u1", 11, 13, "833", &bank), Err(AnnotationError::Overlap { .. })));
}

#[test]
fn bad_ranges_and_ids_are_rejected() {
    let bank = compare_bank();
    let doc = story(60);
    let rec = DtwRecognizer::new(
        Arc::new(GalleryIndex::build(&bank, NormalizationParams::default()).unwrap()),
        MatchConfig::default(),
    );
    assert!(matches!(lookup_segment(&doc, "u1", 20, 20, &rec), Err(AnnotationError::Range(_))));
    assert!(matches!(lookup_segment(&doc, "u1", 20, 21, &rec), Err(AnnotationError::Range(_))));
    assert!(matches!(lookup_segment(&doc, "u1", 30, 20, &rec), Err(AnnotationError::Range(_))));
    assert!(matches!(lookup_segment(&doc, "u1", 50, 61, &rec), Err(AnnotationError::Range(_))));
    assert!(matches!(lookup_segment(&doc, "u9", 0, 10, &rec), Err(AnnotationError::NotFound { .. })));
    assert!(matches!(insert_all_data(&doc, "u1", 7, 7, "833", &bank), Err(AnnotationError::Range(_))));
    assert!(matches!(
        insert_all_data(&doc, "u1", 0, 5, "999", &bank),
        Err(AnnotationError::NotFound { kind: "variant", .. })
    ));
}

#[test]
fn documents_round_trip_byte_for_byte() {
    let bank = compare_bank();
    let doc = insert_all_data(&story(60), "u1", 10, 42, "833", &bank).unwrap();
    let text = doc.to_json();
    let back = AnnotationDoc::parse(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_json(), text);
}

#[test]
fn malformed_documents_are_refused() {
    let mut doc = story(60);
    doc.utterances[0].sign_tokens = vec![
        SignToken { start_frame: 10, end_frame: 20, properties: None },
        SignToken { start_frame: 15, end_frame: 25, properties: None },
    ];
    assert!(matches!(AnnotationDoc::parse(&doc.to_json()), Err(AnnotationError::Parse(_))));
    let text = story(4).to_json().replace("signlookup-annotation", "other-format");
    assert!(matches!(AnnotationDoc::parse(&text), Err(AnnotationError::Parse(_))));
}

#[test]
fn whole_track_lookup_equals_segmented_rank() {
    let g = gallery_with_glosses(&["HONOR", "DANCE", "STIR", "SAUCE"], 2, 31);
    let bank = g.bank().unwrap();
    let index = Arc::new(GalleryIndex::build(&bank, NormalizationParams::default()).unwrap());
    let rec = DtwRecognizer::new(index.clone(), MatchConfig::default());
    let track = g.exact_queries()[2].features.clone();
    let doc = AnnotationDoc {
        doc_id: "d".into(),
        utterances: vec![Utterance { utterance_id: "u".into(), media_ref: "d.mp4".into(), features: track.clone(), sign_tokens: vec![] }],
    };
    let via_doc = lookup_segment(&doc, "u", 0, track.len(), &rec).unwrap();
    let direct = rank(&index, &track, QueryMode::Segmented, &MatchConfig::default()).unwrap();
    assert_eq!(via_doc, direct);
}

fn filler(frames: usize, kpcount: usize, seed: u64) -> Vec<signlookup_core::PoseFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, 1.0).unwrap();
    (0..frames)
        .map(|_| {
            signlookup_core::PoseFrame::new(
                (0..kpcount).map(|_| Keypoint::new(n.sample(&mut rng), n.sample(&mut rng), 1.0)).collect(),
            )
        })
        .collect()
}

#[test]
fn honor_inside_a_sentence_is_found_and_inserted() {
    let g = gallery_with_glosses(&["HONOR", "DANCE", "IRON-CLOTHES", "STIR", "BAKING-SPRINKLES", "SAUCE", "COMPARE"], 2, 5);
    let bank = g.bank().unwrap();
    let index = Arc::new(GalleryIndex::build(&bank, NormalizationParams::default()).unwrap());
    let rec = DtwRecognizer::new(index, MatchConfig::default());

    let honor = g.exact_queries().into_iter().find(|q| q.entry_id == "e000").unwrap().features;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 0.005).unwrap();
    let noisy = honor.map_keypoints(|_, _, k| Keypoint::new(k.x + noise.sample(&mut rng), k.y + noise.sample(&mut rng), k.conf));

    let kp = bank.kpcount();
    let mut frames = filler(20, kp, 1);
    frames.extend(noisy.frames().iter().cloned());
    frames.extend(filler(15, kp, 2));
    let (start, end) = (20, 20 + honor.len());
    let doc = AnnotationDoc {
        doc_id: "honor-story".into(),
        utterances: vec![Utterance {
            utterance_id: "u1".into(),
            media_ref: "honor-story.mp4".into(),
            features: FeatureSequence::new(frames, Some(30.0)).unwrap(),
            sign_tokens: vec![],
        }],
    };

    let list = lookup_segment(&doc, "u1", start, end, &rec).unwrap();
    assert!(list.glosses().iter().take(5).any(|g| *g == "HONOR"));
    assert_eq!(list.candidates[0].base_gloss, "HONOR");
    list.check(5).unwrap();

    let chosen = &list.candidates[0].variants[0].variant_id;
    let out = insert_all_data(&doc, "u1", start, end, chosen, &bank).unwrap();
    let token = &out.utterances[0].sign_tokens[0];
    assert_eq!(token.properties.as_ref().unwrap().base_gloss, "HONOR");
    assert_eq!(doc.utterances[0].sign_tokens.len(), 0);
}

#[test]
fn frame_at_uses_track_rate() {
    let u = &story(60).utterances[0];
    assert_eq!(u.frame_at(1.0), 30);
    assert_eq!(u.frame_at(0.0), 0);
}

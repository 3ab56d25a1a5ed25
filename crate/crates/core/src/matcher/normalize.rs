use super::MatchError;
use crate::features::{FeatureSequence, Keypoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationParams {
    /// Keypoint moved to the origin in every frame.
    pub reference_keypoint: usize,
}

impl Default for NormalizationParams {
    fn default() -> Self {
        Self { reference_keypoint: 0 }
    }
}

/// Puts a sequence in translation- and scale-canonical form.
///
/// Each frame is shifted so the reference keypoint sits at the origin, then
/// every coordinate is divided by the sequence-wide RMS point magnitude taken
/// over keypoints with positive confidence. A zero RMS leaves the scale at 1.
/// Confidences are untouched.
pub fn normalize(seq: &FeatureSequence, params: NormalizationParams) -> Result<FeatureSequence, MatchError> {
    let r = params.reference_keypoint;
    if r >= seq.kpcount() {
        return Err(MatchError::InvalidInput(format!(
            "reference keypoint {r} out of range for {} keypoints",
            seq.kpcount()
        )));
    }
    let origins: Vec<(f64, f64)> = seq
        .frames()
        .iter()
        .map(|f| (f.keypoints[r].x, f.keypoints[r].y))
        .collect();

    let (mut sum_sq, mut n) = (0.0, 0usize);
    for (frame, &(ox, oy)) in seq.frames().iter().zip(&origins) {
        for kp in frame.keypoints.iter().filter(|k| k.conf > 0.0) {
            let (dx, dy) = (kp.x - ox, kp.y - oy);
            sum_sq += dx * dx + dy * dy;
            n += 1;
        }
    }
    let rms = if n == 0 { 0.0 } else { (sum_sq / n as f64).sqrt() };
    let scale = if rms > 0.0 { rms } else { 1.0 };

    Ok(seq.map_keypoints(|fi, _, kp| {
        let (ox, oy) = origins[fi];
        Keypoint::new((kp.x - ox) / scale, (kp.y - oy) / scale, kp.conf)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: NormalizationParams = NormalizationParams { reference_keypoint: 0 };

    fn max_abs_diff(a: &FeatureSequence, b: &FeatureSequence) -> f64 {
        a.frames()
            .iter()
            .zip(b.frames())
            .flat_map(|(fa, fb)| fa.keypoints.iter().zip(&fb.keypoints))
            .map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs()).max((p.conf - q.conf).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn centered_unit_rms_sequence_is_unchanged() {
        // Reference at origin; the other point has magnitude sqrt(2) so the
        // RMS over both points is 1.
        let s = FeatureSequence::from_triples(
            &[vec![(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)], vec![(0.0, 0.0, 1.0), (-1.0, 1.0, 1.0)]],
            None,
        )
        .unwrap();
        let n = normalize(&s, P).unwrap();
        assert_eq!(n, s);
    }

    #[test]
    fn all_zero_coordinates_pass_through() {
        let s = FeatureSequence::from_triples(&vec![vec![(0.0, 0.0, 1.0); 3]; 4], None).unwrap();
        assert_eq!(normalize(&s, P).unwrap(), s);
    }

    #[test]
    fn zero_confidence_keypoints_do_not_contribute_to_scale() {
        let s = FeatureSequence::from_triples(&[vec![(0.0, 0.0, 1.0), (2.0, 0.0, 1.0), (100.0, 0.0, 0.0)]], None).unwrap();
        let n = normalize(&s, P).unwrap();
        // RMS over the two confident points: sqrt((0 + 4) / 2) = sqrt(2).
        let k = &n.frames()[0].keypoints;
        assert!((k[1].x - 2.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((k[2].x - 100.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(k[2].conf, 0.0);
    }

    #[test]
    fn reference_keypoint_out_of_range() {
        let s = FeatureSequence::from_triples(&[vec![(0.0, 0.0, 1.0)]], None).unwrap();
        let bad = NormalizationParams { reference_keypoint: 1 };
        assert!(matches!(normalize(&s, bad), Err(MatchError::InvalidInput(_))));
    }

    #[test]
    fn scaled_and_translated_copy_normalizes_identically() {
        let raw: Vec<Vec<(f64, f64, f64)>> = (0..12)
            .map(|f| {
                (0..5)
                    .map(|k| ((f * 7 + k * 3) as f64 * 0.13 - 1.0, (f * k) as f64 * 0.07 + 0.3, if k == 4 { 0.5 } else { 1.0 }))
                    .collect()
            })
            .collect();
        let s = FeatureSequence::from_triples(&raw, None).unwrap();
        let moved = s.map_keypoints(|_, _, k| Keypoint::new(2.0 * k.x + 5.0, 2.0 * k.y + 5.0, k.conf));
        let a = normalize(&s, P).unwrap();
        let b = normalize(&moved, P).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-9);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(
            frames in prop::collection::vec(
                prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0, 0.0f64..=1.0), 4),
                1..10,
            ),
        ) {
            let s = FeatureSequence::from_triples(&frames, None).unwrap();
            let once = normalize(&s, P).unwrap();
            let twice = normalize(&once, P).unwrap();
            prop_assert!(max_abs_diff(&once, &twice) < 1e-9);
        }
    }
}

use super::MatchError;
use crate::features::{FeatureSequence, PoseFrame};
use serde::{Deserialize, Serialize};

/// Confidence-weighted RMS distance between two frames.
///
/// Each keypoint is weighted by the smaller of its two confidences. When all
/// weights are zero the frames are considered identical.
pub fn frame_distance(a: &PoseFrame, b: &PoseFrame) -> Result<f64, MatchError> {
    if a.kpcount() != b.kpcount() {
        return Err(MatchError::InvalidInput(format!(
            "keypoint count mismatch: {} vs {}",
            a.kpcount(),
            b.kpcount()
        )));
    }
    Ok(frame_distance_unchecked(a, b))
}

#[inline]
fn frame_distance_unchecked(a: &PoseFrame, b: &PoseFrame) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (p, q) in a.keypoints.iter().zip(&b.keypoints) {
        let w = p.conf.min(q.conf);
        if w > 0.0 {
            let (dx, dy) = (p.x - q.x, p.y - q.y);
            num += w * (dx * dx + dy * dy);
            den += w;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub distance: f64,
    /// Cells on the recovered optimal warping path.
    pub path_len: usize,
}

/// Sakoe-Chiba half-width used when the caller configures a band fraction:
/// `max(|m - n|, ceil(fraction * max(m, n)))`.
pub fn default_band(m: usize, n: usize, fraction: f64) -> usize {
    let widest = m.max(n);
    let frac = (fraction * widest as f64).ceil() as usize;
    m.abs_diff(n).max(frac).max(1)
}

/// Dynamic time warping between two sequences.
///
/// `band` restricts cells to `|i - j| <= band`; `None` aligns over the full
/// grid. The band must be at least `|len(a) - len(b)|` so the end cell is
/// reachable.
///
/// The path length comes from backtracking one optimal path. At each step
/// the cheapest predecessor wins; on equal cost the diagonal is preferred,
/// then the vertical step.
pub fn dtw(a: &FeatureSequence, b: &FeatureSequence, band: Option<usize>) -> Result<Alignment, MatchError> {
    if a.kpcount() != b.kpcount() {
        return Err(MatchError::InvalidInput(format!(
            "keypoint count mismatch: {} vs {}",
            a.kpcount(),
            b.kpcount()
        )));
    }
    let (m, n) = (a.len(), b.len());
    let w = match band {
        Some(0) => return Err(MatchError::InvalidInput("band must be positive".into())),
        Some(w) if w < m.abs_diff(n) => {
            return Err(MatchError::InvalidInput(format!(
                "band {w} is narrower than the length difference {}",
                m.abs_diff(n)
            )))
        }
        Some(w) => w,
        None => m.max(n),
    };

    let (fa, fb) = (a.frames(), b.frames());
    let mut acc = vec![f64::INFINITY; m * n];
    let at = |i: usize, j: usize| i * n + j;
    for i in 0..m {
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(n - 1);
        for j in lo..=hi {
            let cost = frame_distance_unchecked(&fa[i], &fb[j]);
            let best_prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[at(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { acc[at(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = cost + best_prev;
        }
    }

    let (mut i, mut j, mut path_len) = (m - 1, n - 1, 1usize);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { f64::INFINITY };
        let up = if i > 0 { acc[at(i - 1, j)] } else { f64::INFINITY };
        let left = if j > 0 { acc[at(i, j - 1)] } else { f64::INFINITY };
        let best = diag.min(up).min(left);
        if diag == best {
            i -= 1;
            j -= 1;
        } else if up == best {
            i -= 1;
        } else {
            j -= 1;
        }
        path_len += 1;
    }

    Ok(Alignment {
        distance: acc[at(m - 1, n - 1)],
        path_len,
    })
}

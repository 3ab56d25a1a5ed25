//! Pose-keypoint feature sequences and their on-disk file format.
//!
//! A feature file is a UTF-8 JSON document:
//!
//! ```json
//! { "kpcount": 2, "fps": 30.0, "frames": [ [[0.1, 0.2, 1.0], [0.3, 0.4, 0.9]] ] }
//! ```
//!
//! `frames` holds one array per frame, each with exactly `kpcount`
//! `[x, y, conf]` triples. `fps` is optional.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Frame rate assumed when a sequence carries none.
pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("feature sequence has no frames")]
    Empty,
    #[error("frame {frame} has {found} keypoints, expected {expected}")]
    KeypointCount {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("keypoint count must be at least 1")]
    ZeroKeypoints,
    #[error("frame {frame} keypoint {keypoint}: confidence {conf} outside [0, 1]")]
    Confidence {
        frame: usize,
        keypoint: usize,
        conf: f64,
    },
    #[error("frame {frame} keypoint {keypoint}: non-finite coordinate")]
    NonFinite { frame: usize, keypoint: usize },
    #[error("fps must be a positive finite number, got {0}")]
    Fps(f64),
    #[error("malformed feature document: {0}")]
    Parse(String),
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub conf: f64,
}

impl Keypoint {
    pub const fn new(x: f64, y: f64, conf: f64) -> Self {
        Self { x, y, conf }
    }
}

/// One video frame worth of pose keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub keypoints: Vec<Keypoint>,
}

impl PoseFrame {
    pub fn new(keypoints: Vec<Keypoint>) -> Self {
        Self { keypoints }
    }

    pub fn kpcount(&self) -> usize {
        self.keypoints.len()
    }
}

/// A validated, nonempty clip of pose frames sharing one keypoint count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeatureFile", into = "FeatureFile")]
pub struct FeatureSequence {
    frames: Vec<PoseFrame>,
    fps: Option<f64>,
}

impl FeatureSequence {
    pub fn new(frames: Vec<PoseFrame>, fps: Option<f64>) -> Result<Self, FeatureError> {
        let first = frames.first().ok_or(FeatureError::Empty)?;
        let expected = first.kpcount();
        if expected == 0 {
            return Err(FeatureError::ZeroKeypoints);
        }
        if let Some(fps) = fps {
            if !(fps.is_finite() && fps > 0.0) {
                return Err(FeatureError::Fps(fps));
            }
        }
        for (fi, frame) in frames.iter().enumerate() {
            if frame.kpcount() != expected {
                return Err(FeatureError::KeypointCount {
                    frame: fi,
                    expected,
                    found: frame.kpcount(),
                });
            }
            for (ki, kp) in frame.keypoints.iter().enumerate() {
                if !(kp.x.is_finite() && kp.y.is_finite()) {
                    return Err(FeatureError::NonFinite {
                        frame: fi,
                        keypoint: ki,
                    });
                }
                if !(0.0..=1.0).contains(&kp.conf) {
                    return Err(FeatureError::Confidence {
                        frame: fi,
                        keypoint: ki,
                        conf: kp.conf,
                    });
                }
            }
        }
        Ok(Self { frames, fps })
    }

    /// Builds a sequence from per-frame `(x, y, conf)` triples.
    pub fn from_triples(frames: &[Vec<(f64, f64, f64)>], fps: Option<f64>) -> Result<Self, FeatureError> {
        let frames = frames
            .iter()
            .map(|f| PoseFrame::new(f.iter().map(|&(x, y, c)| Keypoint::new(x, y, c)).collect()))
            .collect();
        Self::new(frames, fps)
    }

    pub fn frames(&self) -> &[PoseFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn kpcount(&self) -> usize {
        self.frames[0].kpcount()
    }

    pub fn fps(&self) -> Option<f64> {
        self.fps
    }

    /// Clip duration in seconds, using [`DEFAULT_FPS`] when no rate is recorded.
    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps.unwrap_or(DEFAULT_FPS)
    }

    /// Frames `[start, end)` as a new sequence with the same frame rate.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self, FeatureError> {
        if start >= end || end > self.frames.len() {
            return Err(FeatureError::Empty);
        }
        Ok(Self {
            frames: self.frames[start..end].to_vec(),
            fps: self.fps,
        })
    }

    /// Applies `f` to every keypoint, keeping the frame structure.
    pub fn map_keypoints(&self, mut f: impl FnMut(usize, usize, Keypoint) -> Keypoint) -> Self {
        let frames = self
            .frames
            .iter()
            .enumerate()
            .map(|(fi, frame)| {
                PoseFrame::new(
                    frame
                        .keypoints
                        .iter()
                        .enumerate()
                        .map(|(ki, kp)| f(fi, ki, *kp))
                        .collect(),
                )
            })
            .collect();
        Self {
            frames,
            fps: self.fps,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        serde_json::from_str(text).map_err(|e| FeatureError::Parse(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FeatureError> {
        serde_json::from_slice(bytes).map_err(|e| FeatureError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("feature sequences always serialize")
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let bytes = std::fs::read(path).map_err(|e| FeatureError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_json()).map_err(|e| FeatureError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Wire form of [`FeatureSequence`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureFile {
    pub kpcount: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    pub frames: Vec<Vec<[f64; 3]>>,
}

impl TryFrom<FeatureFile> for FeatureSequence {
    type Error = FeatureError;

    fn try_from(file: FeatureFile) -> Result<Self, Self::Error> {
        if file.kpcount == 0 {
            return Err(FeatureError::ZeroKeypoints);
        }
        let frames = file
            .frames
            .into_iter()
            .enumerate()
            .map(|(fi, frame)| {
                if frame.len() != file.kpcount {
                    return Err(FeatureError::KeypointCount {
                        frame: fi,
                        expected: file.kpcount,
                        found: frame.len(),
                    });
                }
                Ok(PoseFrame::new(
                    frame.into_iter().map(|[x, y, c]| Keypoint::new(x, y, c)).collect(),
                ))
            })
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSequence::new(frames, file.fps)
    }
}

impl From<FeatureSequence> for FeatureFile {
    fn from(seq: FeatureSequence) -> Self {
        FeatureFile {
            kpcount: seq.kpcount(),
            fps: seq.fps,
            frames: seq
                .frames
                .into_iter()
                .map(|f| f.keypoints.into_iter().map(|k| [k.x, k.y, k.conf]).collect())
                .collect(),
        }
    }
}

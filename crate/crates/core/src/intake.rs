//! Upload intake: rule checks on the upload descriptor, a spool directory
//! that holds payload bytes only while a request is in flight, and the
//! extractor contract that turns a payload into a feature sequence.

use crate::features::{FeatureError, FeatureSequence};
use crate::matcher::QueryMode;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Longest accepted clip, in seconds (inclusive).
pub const MAX_DURATION_S: f64 = 7.0;
pub const DEFAULT_MAX_PAYLOAD_BYTES: u64 = 64 * 1024 * 1024;

const SPOOL_SUFFIX: &str = ".upload";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntakeError {
    #[error("feature payload is malformed: {0}")]
    Parse(#[from] FeatureError),
    #[error("no feature extractor is configured for {0} uploads")]
    ExtractorUnavailable(UploadKind),
    #[error("feature extraction failed: {0}")]
    Extractor(String),
    #[error("payload exceeds the {limit}-byte limit")]
    TooLarge { limit: u64 },
    #[error("spool I/O: {0}")]
    Io(String),
    #[error("could not purge {path}: {message}")]
    Purge { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UploadKind {
    VideoMp4,
    VideoMov,
    /// Pre-extracted feature-sequence document.
    Features,
}

impl UploadKind {
    pub fn extension(self) -> &'static str {
        match self {
            UploadKind::VideoMp4 => ".mp4",
            UploadKind::VideoMov => ".mov",
            UploadKind::Features => ".features",
        }
    }

    pub fn is_video(self) -> bool {
        !matches!(self, UploadKind::Features)
    }

    pub fn from_filename(name: &str) -> Option<Self> {
        let lower = name.to_ascii_lowercase();
        [UploadKind::VideoMp4, UploadKind::VideoMov, UploadKind::Features]
            .into_iter()
            .find(|k| lower.ends_with(k.extension()))
    }

    pub fn from_content_type(ct: &str) -> Option<Self> {
        match ct.split(';').next().unwrap_or("").trim() {
            "video/mp4" => Some(UploadKind::VideoMp4),
            "video/quicktime" => Some(UploadKind::VideoMov),
            "application/vnd.signlookup.features+json" => Some(UploadKind::Features),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "video_mp4" => Some(UploadKind::VideoMp4),
            "video_mov" => Some(UploadKind::VideoMov),
            "features" => Some(UploadKind::Features),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UploadKind::VideoMp4 => "video_mp4",
            UploadKind::VideoMov => "video_mov",
            UploadKind::Features => "features",
        }
    }
}

impl fmt::Display for UploadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the client sent, minus the bytes themselves (those live in a
/// [`SpoolEntry`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadDescriptor {
    pub filename: String,
    pub payload_len: u64,
    pub declared_kind: UploadKind,
    pub sign_type: QueryMode,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    Filename { filename: String },
    Extension { filename: String, expected: String },
    Duration { seconds: f64, limit: f64 },
    EmptyPayload,
}

impl Violation {
    pub fn message(&self) -> String {
        match self {
            Violation::Filename { filename } => format!(
                "filename {filename:?} may only contain letters, numbers, '-', '_' and '.', and must start with a letter or number"
            ),
            Violation::Extension { filename, expected } => {
                format!("filename {filename:?} must end in {expected} for the declared upload kind")
            }
            Violation::Duration { seconds, limit } => {
                format!("clip lasts {seconds:.2} s; keep it at or under {limit} s")
            }
            Violation::EmptyPayload => "uploaded file is empty".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

fn filename_ok(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Checks every upload rule and reports all that fail.
pub fn validate(desc: &UploadDescriptor) -> ValidationReport {
    let mut violations = Vec::new();
    if !filename_ok(&desc.filename) {
        violations.push(Violation::Filename {
            filename: desc.filename.clone(),
        });
    }
    if UploadKind::from_filename(&desc.filename) != Some(desc.declared_kind) {
        violations.push(Violation::Extension {
            filename: desc.filename.clone(),
            expected: desc.declared_kind.extension().to_string(),
        });
    }
    if !(desc.duration_s.is_finite() && desc.duration_s >= 0.0 && desc.duration_s <= MAX_DURATION_S) {
        violations.push(Violation::Duration {
            seconds: desc.duration_s,
            limit: MAX_DURATION_S,
        });
    }
    if desc.payload_len == 0 {
        violations.push(Violation::EmptyPayload);
    }
    ValidationReport {
        accepted: violations.is_empty(),
        violations,
    }
}

/// Pose-estimation plug-in boundary for raw video uploads.
///
/// Implementations read the spooled payload at `payload` and must not copy
/// it anywhere else or keep it open after returning.
pub trait FeatureExtractor: Send + Sync {
    fn extract(&self, payload: &Path, kind: UploadKind) -> Result<FeatureSequence, IntakeError>;

    /// Clip duration from container metadata.
    fn probe_duration(&self, payload: &Path, kind: UploadKind) -> Result<f64, IntakeError>;
}

/// The shipped extractor: no pose estimation, so every video is refused.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoVideoExtractor;

impl FeatureExtractor for NoVideoExtractor {
    fn extract(&self, _payload: &Path, kind: UploadKind) -> Result<FeatureSequence, IntakeError> {
        Err(IntakeError::ExtractorUnavailable(kind))
    }

    fn probe_duration(&self, _payload: &Path, kind: UploadKind) -> Result<f64, IntakeError> {
        Err(IntakeError::ExtractorUnavailable(kind))
    }
}

fn read_features(entry: &SpoolEntry) -> Result<FeatureSequence, IntakeError> {
    let bytes = fs::read(entry.path()).map_err(|e| IntakeError::Io(e.to_string()))?;
    Ok(FeatureSequence::from_bytes(&bytes)?)
}

/// Duration of the spooled clip: frames / fps for feature uploads (30 fps
/// when unstated), container metadata via the extractor for video.
pub fn probe_duration(kind: UploadKind, entry: &SpoolEntry, extractor: &dyn FeatureExtractor) -> Result<f64, IntakeError> {
    match kind {
        UploadKind::Features => Ok(read_features(entry)?.duration_s()),
        video => extractor.probe_duration(entry.path(), video),
    }
}

pub fn extract_features(
    desc: &UploadDescriptor,
    entry: &SpoolEntry,
    extractor: &dyn FeatureExtractor,
) -> Result<FeatureSequence, IntakeError> {
    match desc.declared_kind {
        UploadKind::Features => read_features(entry),
        video => extractor.extract(entry.path(), video),
    }
}

type PurgeObserver = Arc<dyn Fn(&Path) + Send + Sync>;

/// Directory holding in-flight upload payloads.
pub struct Spool {
    dir: PathBuf,
    max_bytes: u64,
    retry: Mutex<Vec<PathBuf>>,
    observer: Option<PurgeObserver>,
}

impl fmt::Debug for Spool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spool")
            .field("dir", &self.dir)
            .field("max_bytes", &self.max_bytes)
            .finish_non_exhaustive()
    }
}

impl Spool {
    pub fn new(dir: impl Into<PathBuf>, max_bytes: u64) -> Result<Self, IntakeError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| IntakeError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            max_bytes,
            retry: Mutex::new(Vec::new()),
            observer: None,
        })
    }

    /// Calls `f` with the spool path after every successful purge.
    pub fn with_observer(mut self, f: impl Fn(&Path) + Send + Sync + 'static) -> Self {
        self.observer = Some(Arc::new(f));
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn max_bytes(&self) -> u64 {
        self.max_bytes
    }

    /// Opens a fresh, uniquely named spool file.
    pub fn create(&self) -> Result<SpoolEntry, IntakeError> {
        let path = self.dir.join(format!("{}{SPOOL_SUFFIX}", uuid::Uuid::new_v4().simple()));
        let file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| IntakeError::Io(format!("{}: {e}", path.display())))?;
        Ok(SpoolEntry {
            path,
            file: Some(file),
            written: 0,
            max_bytes: self.max_bytes,
            purged: false,
        })
    }

    /// Deletes the entry's file. On failure the path is queued for
    /// [`Spool::retry_pending`] and the error is returned.
    pub fn purge(&self, mut entry: SpoolEntry) -> Result<(), IntakeError> {
        entry.file.take();
        entry.purged = true;
        match fs::remove_file(&entry.path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                tracing::error!(path = %entry.path.display(), error = %e, "spool purge failed; queued for retry");
                self.retry.lock().expect("spool retry lock").push(entry.path.clone());
                return Err(IntakeError::Purge {
                    path: entry.path.display().to_string(),
                    message: e.to_string(),
                });
            }
        }
        if let Some(obs) = &self.observer {
            obs(&entry.path);
        }
        Ok(())
    }

    /// Retries queued deletions; returns how many paths are still pending.
    pub fn retry_pending(&self) -> usize {
        let mut queue = self.retry.lock().expect("spool retry lock");
        queue.retain(|p| match fs::remove_file(p) {
            Ok(()) => false,
            Err(e) => e.kind() != std::io::ErrorKind::NotFound,
        });
        queue.len()
    }

    /// Spool files currently on disk with their sizes.
    pub fn scan(&self) -> Result<Vec<(PathBuf, u64)>, IntakeError> {
        let mut out = Vec::new();
        let rd = fs::read_dir(&self.dir).map_err(|e| IntakeError::Io(e.to_string()))?;
        for item in rd {
            let item = item.map_err(|e| IntakeError::Io(e.to_string()))?;
            let meta = item.metadata().map_err(|e| IntakeError::Io(e.to_string()))?;
            if meta.is_file() {
                out.push((item.path(), meta.len()));
            }
        }
        out.sort();
        Ok(out)
    }
}

/// One upload's bytes on disk.
///
/// Dropping an entry without purging it still removes the file.
#[derive(Debug)]
pub struct SpoolEntry {
    path: PathBuf,
    file: Option<File>,
    written: u64,
    max_bytes: u64,
    purged: bool,
}

impl SpoolEntry {
    pub fn write_chunk(&mut self, chunk: &[u8]) -> Result<(), IntakeError> {
        if self.written + chunk.len() as u64 > self.max_bytes {
            return Err(IntakeError::TooLarge { limit: self.max_bytes });
        }
        let file = self
            .file
            .as_mut()
            .ok_or_else(|| IntakeError::Io("spool entry already closed".into()))?;
        file.write_all(chunk).map_err(|e| IntakeError::Io(e.to_string()))?;
        self.written += chunk.len() as u64;
        Ok(())
    }

    /// Flushes and closes the write handle.
    pub fn finish(&mut self) -> Result<(), IntakeError> {
        if let Some(mut f) = self.file.take() {
            f.flush().map_err(|e| IntakeError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> u64 {
        self.written
    }

    pub fn is_empty(&self) -> bool {
        self.written == 0
    }
}

impl Drop for SpoolEntry {
    fn drop(&mut self) {
        if !self.purged {
            self.file.take();
            let _ = fs::remove_file(&self.path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(name: &str, kind: UploadKind, secs: f64) -> UploadDescriptor {
        UploadDescriptor {
            filename: name.into(),
            payload_len: 100,
            declared_kind: kind,
            sign_type: QueryMode::Citation,
            duration_s: secs,
        }
    }

    #[test]
    fn accepts_allowed_charset() {
        let r = validate(&desc("sign_clip-01.mp4", UploadKind::VideoMp4, 3.2));
        assert!(r.accepted, "{r:?}");
    }

    #[test]
    fn rejects_space_and_bang() {
        let r = validate(&desc("my sign!.mp4", UploadKind::VideoMp4, 1.0));
        assert!(!r.accepted);
        assert_eq!(r.violations, vec![Violation::Filename { filename: "my sign!.mp4".into() }]);
    }

    #[test]
    fn rejects_long_clip() {
        let r = validate(&desc("slow.mov", UploadKind::VideoMov, 7.5));
        assert_eq!(r.violations, vec![Violation::Duration { seconds: 7.5, limit: 7.0 }]);
        assert!(validate(&desc("edge.mov", UploadKind::VideoMov, 7.0)).accepted);
    }

    #[test]
    fn reports_every_violation() {
        let mut d = desc(".hidden.avi", UploadKind::VideoMp4, f64::NAN);
        d.payload_len = 0;
        let r = validate(&d);
        assert_eq!(r.violations.len(), 4);
        assert!(!r.accepted);
        for v in &r.violations {
            assert!(!v.message().is_empty());
        }
    }

    #[test]
    fn kind_helpers() {
        assert_eq!(UploadKind::from_filename("A.MP4"), Some(UploadKind::VideoMp4));
        assert_eq!(UploadKind::from_filename("a.features"), Some(UploadKind::Features));
        assert_eq!(UploadKind::from_filename("a.avi"), None);
        assert_eq!(UploadKind::from_content_type("video/quicktime"), Some(UploadKind::VideoMov));
        assert_eq!(UploadKind::parse("features"), Some(UploadKind::Features));
    }

    #[test]
    fn video_without_plugin_is_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Spool::new(dir.path(), 1024).unwrap();
        let mut e = spool.create().unwrap();
        e.write_chunk(b"\0\0\0\x18ftypmp42").unwrap();
        e.finish().unwrap();
        let d = desc("clip.mp4", UploadKind::VideoMp4, 1.0);
        assert_eq!(
            extract_features(&d, &e, &NoVideoExtractor),
            Err(IntakeError::ExtractorUnavailable(UploadKind::VideoMp4))
        );
        assert!(probe_duration(UploadKind::VideoMp4, &e, &NoVideoExtractor).is_err());
        spool.purge(e).unwrap();
        assert!(spool.scan().unwrap().is_empty());
    }

    #[test]
    fn feature_payload_is_parsed_from_spool() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Spool::new(dir.path(), 1 << 20).unwrap();
        let seq = FeatureSequence::from_triples(&vec![vec![(0.0, 0.0, 1.0); 10]; 40], Some(20.0)).unwrap();
        let mut e = spool.create().unwrap();
        e.write_chunk(seq.to_json().as_bytes()).unwrap();
        e.finish().unwrap();
        assert_eq!(probe_duration(UploadKind::Features, &e, &NoVideoExtractor).unwrap(), 2.0);
        let got = extract_features(&desc("q.features", UploadKind::Features, 2.0), &e, &NoVideoExtractor).unwrap();
        assert_eq!(got.len(), 40);

        let mut bad = spool.create().unwrap();
        bad.write_chunk(&seq.to_json().as_bytes()[..50]).unwrap();
        bad.finish().unwrap();
        assert!(matches!(
            extract_features(&desc("q.features", UploadKind::Features, 2.0), &bad, &NoVideoExtractor),
            Err(IntakeError::Parse(_))
        ));
        spool.purge(e).unwrap();
        spool.purge(bad).unwrap();
        assert!(spool.scan().unwrap().is_empty());
    }

    #[test]
    fn size_cap_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Spool::new(dir.path(), 8).unwrap();
        let mut e = spool.create().unwrap();
        e.write_chunk(b"12345").unwrap();
        assert_eq!(e.write_chunk(b"6789"), Err(IntakeError::TooLarge { limit: 8 }));
        assert_eq!(e.len(), 5);
    }

    #[test]
    fn purge_removes_only_its_own_entry() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Arc::new(Spool::new(dir.path(), 1 << 20).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let spool = Arc::clone(&spool);
                std::thread::spawn(move || {
                    let mut e = spool.create().unwrap();
                    e.write_chunk(format!("payload {i}").as_bytes()).unwrap();
                    e.finish().unwrap();
                    let mine = e.path().to_path_buf();
                    let before = spool.scan().unwrap();
                    assert!(before.iter().any(|(p, _)| *p == mine));
                    spool.purge(e).unwrap();
                    assert!(spool.scan().unwrap().iter().all(|(p, _)| *p != mine));
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(spool.scan().unwrap().is_empty());
    }

    #[test]
    fn dropped_entry_is_removed() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Spool::new(dir.path(), 64).unwrap();
        {
            let mut e = spool.create().unwrap();
            e.write_chunk(b"abc").unwrap();
        }
        assert!(spool.scan().unwrap().is_empty());
    }

    #[test]
    fn failed_purge_is_queued() {
        let dir = tempfile::tempdir().unwrap();
        let spool = Spool::new(dir.path(), 64).unwrap();
        let e = spool.create().unwrap();
        // Replace the file with a non-empty directory so remove_file fails.
        let p = e.path().to_path_buf();
        fs::remove_file(&p).unwrap();
        fs::create_dir(&p).unwrap();
        fs::write(p.join("x"), b"x").unwrap();
        assert!(matches!(spool.purge(e), Err(IntakeError::Purge { .. })));
        assert_eq!(spool.retry_pending(), 1);
        fs::remove_dir_all(&p).unwrap();
        assert_eq!(spool.retry_pending(), 0);
    }
}

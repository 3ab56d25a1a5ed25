#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use parking_lot::Mutex;
use serde_json::Value;
use signlookup_core::artifact::Artifact;
use signlookup_core::features::FeatureSequence;
use signlookup_core::matcher::{MatchConfig, NormalizationParams};
use signlookup_core::synthetic::{SyntheticGallery, SyntheticSpec};
use signlookup_core::{Bank, Recognizer};
use signlookup_service::clock::ManualClock;
use signlookup_service::stats::StatsLog;
use signlookup_service::{router, AppState, LifecycleEvent, Snapshot};
use signlookup_core::intake::Spool;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use tempfile::TempDir;
use tower::ServiceExt;

pub const GLOSSES: [&str; 8] = [
    "STIR",
    "DANCE",
    "IRON-CLOTHES",
    "BAKING-SPRINKLES",
    "SAUCE",
    "COMPARE",
    "HONOR",
    "BAKE",
];
pub const HANDSHAPES: [&str; 4] = ["B", "A", "5", "S"];
pub const WORDS: [&[&str]; 8] = [
    &["stir", "mix"],
    &["dance", "ball"],
    &["iron", "clothes"],
    &["sprinkle", "bake"],
    &["sauce", "gravy"],
    &["compare", "comparison", "contrast"],
    &["honor", "respect"],
    &["bake", "oven"],
];

/// The seeded fixture: eight signs, two exemplars each. STIR,
/// BAKING-SPRINKLES and HONOR have two variants; COMPARE's only variant is
/// `833`.
pub fn fixture() -> SyntheticGallery {
    let mut g = SyntheticGallery::generate(SyntheticSpec {
        entries: GLOSSES.len(),
        exemplars_per_entry: 2,
        two_variant_every: 3,
        seed: 2024,
        ..Default::default()
    });
    let m = &mut g.manifest;
    let mut vid_map = HashMap::new();
    for (i, e) in m.entries.iter_mut().enumerate() {
        e.base_gloss = GLOSSES[i].into();
        if e.base_gloss == "COMPARE" {
            assert_eq!(e.variant_ids.len(), 1);
            vid_map.insert(e.variant_ids[0].clone(), "833".to_string());
            e.variant_ids = vec!["833".into()];
        }
    }
    let gloss_of: HashMap<String, (usize, String)> =
        m.entries.iter().enumerate().map(|(i, e)| (e.entry_id.clone(), (i, e.base_gloss.clone()))).collect();
    for (j, v) in m.variants.iter_mut().enumerate() {
        let (i, gloss) = &gloss_of[&v.entry_id];
        let second = v.label.ends_with("_2");
        v.label = if second { format!("{gloss}_2") } else { gloss.clone() };
        v.related_english_words = WORDS[*i].iter().map(|w| w.to_string()).collect();
        if second {
            v.related_english_words.truncate(1);
        }
        v.start_handshape_dom = HANDSHAPES[j % 4].into();
        v.end_handshape_dom = HANDSHAPES[(j / 2) % 4].into();
        v.start_handshape_nondom = None;
        if let Some(new) = vid_map.get(&v.variant_id) {
            v.variant_id = new.clone();
        }
    }
    for x in &mut m.exemplars {
        if let Some(new) = vid_map.get(&x.variant_id) {
            x.variant_id = new.clone();
        }
        x.media = Some(format!("{}.mp4", x.exemplar_id));
    }
    g.handshapes = signlookup_core::signbank::HandshapeInventory::new(HANDSHAPES);
    g
}

pub fn fixture_bank() -> Bank {
    fixture().bank().unwrap()
}

/// Exemplar track of the first exemplar of `gloss`.
pub fn exemplar_of(bank: &Bank, gloss: &str) -> FeatureSequence {
    let e = bank.entries().iter().find(|e| e.base_gloss == gloss).unwrap();
    let v = bank.variants_of(e).next().unwrap();
    bank.exemplars_of(v).next().unwrap().features.clone()
}

pub fn dtw_snapshot(bank: Bank) -> Snapshot {
    Snapshot::from_artifact(Artifact::build(bank, NormalizationParams::default()).unwrap(), MatchConfig::default())
}

pub type Events = Arc<Mutex<Vec<LifecycleEvent>>>;

pub struct TestServer {
    pub dir: TempDir,
    pub state: Arc<AppState>,
    pub app: Router,
    pub clock: Arc<ManualClock>,
    pub events: Events,
    pub max_bytes: u64,
}

pub const TTL_MS: u64 = 60 * 60 * 1000;

impl TestServer {
    pub fn new() -> Self {
        Self::with_snapshot(dtw_snapshot(fixture_bank()))
    }

    pub fn with_snapshot(snapshot: Snapshot) -> Self {
        Self::build(tempfile::tempdir().unwrap(), snapshot, 64 * 1024 * 1024)
    }

    pub fn with_limit(max_bytes: u64) -> Self {
        Self::build(tempfile::tempdir().unwrap(), dtw_snapshot(fixture_bank()), max_bytes)
    }

    pub fn with_recognizer(r: Arc<dyn Recognizer>) -> Self {
        Self::with_snapshot(Snapshot::new(Arc::new(fixture_bank()), r))
    }

    fn build(dir: TempDir, snapshot: Snapshot, max_bytes: u64) -> Self {
        let media = dir.path().join("media");
        std::fs::create_dir_all(&media).unwrap();
        std::fs::write(media.join("x005-0.mp4"), b"fake mp4 bytes").unwrap();
        let spool = Spool::new(dir.path().join("spool"), max_bytes).unwrap();
        let stats = StatsLog::open(&dir.path().join("stats.jsonl")).unwrap();
        let clock = Arc::new(ManualClock::new(1_700_000_000_000));
        let events: Events = Arc::default();
        let sink = events.clone();
        let state = Arc::new(
            AppState::new(snapshot, spool, stats, TTL_MS)
                .with_clock(clock.clone())
                .with_media_dir(media)
                .with_observer(Arc::new(move |e: &LifecycleEvent| sink.lock().push(e.clone()))),
        );
        Self {
            app: router(state.clone()),
            dir,
            state,
            clock,
            events,
            max_bytes,
        }
    }

    /// A fresh process over the same directory (stats log and spool).
    pub fn restart(self) -> Self {
        let TestServer { dir, max_bytes, .. } = self;
        Self::build(dir, dtw_snapshot(fixture_bank()), max_bytes)
    }

    pub fn spool_dir(&self) -> PathBuf {
        self.dir.path().join("spool")
    }

    pub fn spool_bytes(&self) -> u64 {
        spool_bytes(&self.spool_dir())
    }

    pub async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, body)
    }

    pub async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let (s, b) = self.send(Request::get(uri).body(Body::empty()).unwrap()).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    pub async fn post_json(&self, uri: &str, body: &Value) -> (StatusCode, Value) {
        let req = Request::post(uri)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let (s, b) = self.send(req).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    pub async fn upload(&self, parts: &[Part<'_>]) -> (StatusCode, Value) {
        let (ct, body) = multipart(parts);
        let req = Request::post("/api/recognize").header("content-type", ct).body(Body::from(body)).unwrap();
        let (s, b) = self.send(req).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    pub async fn recognize_features(&self, filename: &str, seq: &FeatureSequence, sign_type: &str) -> (StatusCode, Value) {
        self.upload(&[
            Part::file(filename, seq.to_json().as_bytes()),
            Part::text("sign_type", sign_type),
        ])
        .await
    }

    pub async fn confirm(&self, token: &str, selection: Value) -> (StatusCode, Value) {
        self.post_json(&format!("/api/sessions/{token}/confirm"), &serde_json::json!({ "selection": selection }))
            .await
    }

    pub fn take_events(&self) -> Vec<LifecycleEvent> {
        std::mem::take(&mut *self.events.lock())
    }
}

pub fn spool_bytes(dir: &Path) -> u64 {
    std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok()?.metadata().ok()).map(|m| m.len()).sum())
        .unwrap_or(0)
}

pub fn spool_files(dir: &Path) -> usize {
    std::fs::read_dir(dir).map(|rd| rd.count()).unwrap_or(0)
}

pub enum Part<'a> {
    Text(&'a str, &'a str),
    File {
        name: &'a str,
        filename: &'a str,
        content_type: Option<&'a str>,
        bytes: &'a [u8],
    },
}

impl<'a> Part<'a> {
    pub fn text(name: &'a str, value: &'a str) -> Self {
        Part::Text(name, value)
    }

    pub fn file(filename: &'a str, bytes: &'a [u8]) -> Self {
        Part::File {
            name: "file",
            filename,
            content_type: None,
            bytes,
        }
    }
}

pub fn multipart(parts: &[Part<'_>]) -> (String, Vec<u8>) {
    let boundary = "----signlookup-test-boundary-7MA4YWxkTrZu0gW";
    let mut body = Vec::new();
    for p in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        match p {
            Part::Text(name, value) => {
                body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes());
                body.extend_from_slice(value.as_bytes());
            }
            Part::File {
                name,
                filename,
                content_type,
                bytes,
            } => {
                body.extend_from_slice(
                    format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{filename}\"\r\n").as_bytes(),
                );
                let ct = content_type.unwrap_or("application/octet-stream");
                body.extend_from_slice(format!("Content-Type: {ct}\r\n\r\n").as_bytes());
                body.extend_from_slice(bytes);
            }
        }
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

/// Writes the fixture as a manifest tree under `dir`; returns the manifest path.
pub fn write_fixture(dir: &Path) -> PathBuf {
    fixture().write(dir).unwrap()
}

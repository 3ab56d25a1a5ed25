use crate::clock::{Clock, SystemClock};
use crate::config::{ConfigError, ServiceConfig};
use crate::session::SessionStore;
use crate::stats::{ConfirmationStats, StatsError, StatsLog};
use parking_lot::{Mutex, RwLock};
use signlookup_core::artifact::{Artifact, ArtifactError};
use signlookup_core::intake::{FeatureExtractor, IntakeError, NoVideoExtractor, Spool};
use signlookup_core::matcher::{DtwRecognizer, MatchConfig};
use signlookup_core::{Bank, Recognizer};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Spool(#[from] IntakeError),
}

/// Points in an upload's life, reported to an optional observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LifecycleEvent {
    Spooled { path: PathBuf },
    Purged { path: PathBuf },
    PurgeFailed { path: PathBuf, message: String },
    /// The recognize response is about to leave the service.
    Responded { status: u16 },
}

pub type Observer = Arc<dyn Fn(&LifecycleEvent) + Send + Sync>;

/// An immutable bank together with the recognizer built over it.
pub struct Snapshot {
    pub bank: Arc<Bank>,
    pub recognizer: Arc<dyn Recognizer>,
}

impl Snapshot {
    pub fn new(bank: Arc<Bank>, recognizer: Arc<dyn Recognizer>) -> Self {
        Self { bank, recognizer }
    }

    pub fn from_artifact(artifact: Artifact, config: MatchConfig) -> Self {
        let recognizer = DtwRecognizer::new(Arc::new(artifact.index), config);
        Self::new(Arc::new(artifact.bank), Arc::new(recognizer))
    }
}

/// Session store and stats log; always locked together so a confirmation
/// and its stats record happen as one step.
#[derive(Debug)]
pub struct Ledger {
    pub sessions: SessionStore,
    pub stats: StatsLog,
}

pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    ledger: Mutex<Ledger>,
    spool: Spool,
    extractor: Arc<dyn FeatureExtractor>,
    clock: Arc<dyn Clock>,
    observer: Option<Observer>,
    media_dir: Option<PathBuf>,
    webui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot: Snapshot, spool: Spool, stats: StatsLog, session_ttl_ms: u64) -> Self {
        Self {
            snapshot: RwLock::new(Arc::new(snapshot)),
            ledger: Mutex::new(Ledger {
                sessions: SessionStore::new(session_ttl_ms),
                stats,
            }),
            spool,
            extractor: Arc::new(NoVideoExtractor),
            clock: Arc::new(SystemClock),
            observer: None,
            media_dir: None,
            webui_dir: None,
        }
    }

    /// Loads the bank, opens the stats log and clears stale spool files.
    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, StartupError> {
        cfg.check()?;
        let artifact = match (&cfg.artifact, &cfg.bank_manifest) {
            (Some(a), None) => Artifact::load(a)?,
            (None, Some(m)) => Artifact::ingest(m, cfg.normalization())?,
            _ => {
                return Err(ConfigError::Invalid("exactly one of artifact or bank_manifest is required".into()).into())
            }
        };
        artifact.require_params(cfg.normalization())?;
        let spool = Spool::new(&cfg.spool_dir, cfg.max_payload_bytes)?;
        clear_stale_spool(&spool)?;
        let stats = StatsLog::open(&cfg.stats_log)?;
        let mut state = Self::new(
            Snapshot::from_artifact(artifact, cfg.match_config()),
            spool,
            stats,
            cfg.session_ttl_ms(),
        );
        state.media_dir = cfg.media_dir.clone();
        state.webui_dir = cfg.webui_dir.clone();
        Ok(state)
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_extractor(mut self, extractor: Arc<dyn FeatureExtractor>) -> Self {
        self.extractor = extractor;
        self
    }

    pub fn with_observer(mut self, observer: Observer) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn with_media_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.media_dir = Some(dir.into());
        self
    }

    pub fn with_webui_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.webui_dir = Some(dir.into());
        self
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().clone()
    }

    /// Swaps in a new bank; in-flight requests finish on the old one.
    pub fn replace_snapshot(&self, snapshot: Snapshot) {
        *self.snapshot.write() = Arc::new(snapshot);
    }

    pub fn ledger(&self) -> parking_lot::MutexGuard<'_, Ledger> {
        self.ledger.lock()
    }

    pub fn stats(&self) -> ConfirmationStats {
        self.ledger.lock().stats.stats().clone()
    }

    pub fn spool(&self) -> &Spool {
        &self.spool
    }

    pub fn extractor(&self) -> &dyn FeatureExtractor {
        self.extractor.as_ref()
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    pub fn media_dir(&self) -> Option<&Path> {
        self.media_dir.as_deref()
    }

    pub fn webui_dir(&self) -> Option<&Path> {
        self.webui_dir.as_deref()
    }

    pub fn emit(&self, event: LifecycleEvent) {
        if let Some(obs) = &self.observer {
            obs(&event);
        }
    }

    /// Expires overdue sessions, forgets ones older than twice the TTL and
    /// retries failed spool deletions.
    pub fn housekeeping(&self) {
        let now = self.now_ms();
        {
            let mut ledger = self.ledger.lock();
            let retain = ledger.sessions.ttl_ms().saturating_mul(2);
            ledger.sessions.sweep(now, retain);
        }
        let pending = self.spool.retry_pending();
        if pending > 0 {
            tracing::warn!(pending, "spool files still awaiting deletion");
        }
    }
}

fn clear_stale_spool(spool: &Spool) -> Result<(), IntakeError> {
    for (path, _) in spool.scan()? {
        if path.extension().is_some_and(|e| e == "upload") {
            tracing::warn!(path = %path.display(), "removing spool file left by an earlier run");
            std::fs::remove_file(&path).map_err(|e| IntakeError::Purge {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
    }
    Ok(())
}

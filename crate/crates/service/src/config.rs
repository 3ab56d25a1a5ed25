//! Service configuration (TOML). Relative paths are resolved against the
//! directory holding the configuration file.
//!
//! ```toml
//! artifact = "gallery.artifact.json"   # or: bank_manifest = "bank/manifest.json"
//! spool_dir = "spool"
//! stats_log = "stats.jsonl"
//! media_dir = "media"                  # optional; served at /media
//! webui_dir = "webui/dist"             # optional; served at /
//! session_ttl_secs = 3600
//! band_fraction = 0.2
//! unbanded = false
//! k = 5
//! reference_keypoint = 0
//! max_payload_bytes = 67108864
//! bind = "127.0.0.1"
//! port = 8080
//! ```

use serde::{Deserialize, Serialize};
use signlookup_core::intake::DEFAULT_MAX_PAYLOAD_BYTES;
use signlookup_core::matcher::{MatchConfig, NormalizationParams, DEFAULT_K};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub artifact: Option<PathBuf>,
    pub bank_manifest: Option<PathBuf>,
    pub spool_dir: PathBuf,
    pub stats_log: PathBuf,
    pub media_dir: Option<PathBuf>,
    pub webui_dir: Option<PathBuf>,
    pub session_ttl_secs: u64,
    pub band_fraction: f64,
    pub unbanded: bool,
    pub k: usize,
    pub reference_keypoint: usize,
    pub max_payload_bytes: u64,
    pub bind: String,
    pub port: u16,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            artifact: None,
            bank_manifest: None,
            spool_dir: std::env::temp_dir().join("signlookup-spool"),
            stats_log: PathBuf::from("stats.jsonl"),
            media_dir: None,
            webui_dir: None,
            session_ttl_secs: 60 * 60,
            band_fraction: 0.2,
            unbanded: false,
            k: DEFAULT_K,
            reference_keypoint: 0,
            max_payload_bytes: DEFAULT_MAX_PAYLOAD_BYTES,
            bind: "127.0.0.1".into(),
            port: 8080,
        }
    }
}

impl ServiceConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.resolve_relative_to(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.artifact, &mut self.bank_manifest, &mut self.media_dir, &mut self.webui_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.spool_dir);
        fix(&mut self.stats_log);
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.artifact.is_some() && self.bank_manifest.is_some() {
            return Err(ConfigError::Invalid("set either artifact or bank_manifest, not both".into()));
        }
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1".into()));
        }
        if !(self.band_fraction.is_finite() && self.band_fraction > 0.0) {
            return Err(ConfigError::Invalid("band_fraction must be a positive number".into()));
        }
        if self.session_ttl_secs == 0 {
            return Err(ConfigError::Invalid("session_ttl_secs must be positive".into()));
        }
        if self.max_payload_bytes == 0 {
            return Err(ConfigError::Invalid("max_payload_bytes must be positive".into()));
        }
        Ok(())
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            band_fraction: (!self.unbanded).then_some(self.band_fraction),
            k: self.k,
        }
    }

    pub fn normalization(&self) -> NormalizationParams {
        NormalizationParams {
            reference_keypoint: self.reference_keypoint,
        }
    }

    pub fn session_ttl_ms(&self) -> u64 {
        self.session_ttl_secs.saturating_mul(1000)
    }
}

//! Confirmation histogram and its append-only event log.
//!
//! Log format: one JSON object per line, one line per terminal session,
//! e.g. `{"sign_type":"citation","outcome":"3","at_ms":1718000000000}`.
//! The histogram is rebuilt by replaying the log at startup. A trailing
//! line without a newline (torn write) is discarded and truncated away.

use serde::{Deserialize, Serialize};
use signlookup_core::QueryMode;
use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Highest confirmable candidate rank.
pub const MAX_RANK: u8 = 5;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("stats log {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("stats log {path} line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
}

/// How a session ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Rank(u8),
    None,
}

impl Outcome {
    pub fn key(self) -> String {
        match self {
            Outcome::Rank(r) => r.to_string(),
            Outcome::None => "none".to_string(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s == "none" {
            return Some(Outcome::None);
        }
        match s.parse::<u8>() {
            Ok(r) if (1..=MAX_RANK).contains(&r) => Some(Outcome::Rank(r)),
            _ => None,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Outcome::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid outcome {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsEvent {
    pub sign_type: QueryMode,
    pub outcome: Outcome,
    pub at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCounts {
    /// Keys `"1"`..`"5"` and `"none"`.
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl Default for ModeCounts {
    fn default() -> Self {
        let mut counts: BTreeMap<String, u64> = (1..=MAX_RANK).map(|r| (r.to_string(), 0)).collect();
        counts.insert("none".into(), 0);
        Self { counts, total: 0 }
    }
}

impl ModeCounts {
    pub fn get(&self, outcome: Outcome) -> u64 {
        self.counts[&outcome.key()]
    }
}

/// Per-sign-type histogram of confirmed ranks and "none of those".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationStats {
    pub modes: BTreeMap<QueryMode, ModeCounts>,
    pub total: u64,
}

impl Default for ConfirmationStats {
    fn default() -> Self {
        Self {
            modes: QueryMode::ALL.iter().map(|&m| (m, ModeCounts::default())).collect(),
            total: 0,
        }
    }
}

impl ConfirmationStats {
    pub fn record(&mut self, sign_type: QueryMode, outcome: Outcome) {
        let m = self.modes.entry(sign_type).or_default();
        *m.counts.entry(outcome.key()).or_default() += 1;
        m.total += 1;
        self.total += 1;
    }

    pub fn mode(&self, sign_type: QueryMode) -> &ModeCounts {
        &self.modes[&sign_type]
    }
}

/// Append-only stats log plus the histogram it implies.
#[derive(Debug)]
pub struct StatsLog {
    path: PathBuf,
    file: File,
    stats: ConfirmationStats,
}

impl StatsLog {
    /// Opens (creating if needed) and replays the log at `path`.
    pub fn open(path: &Path) -> Result<Self, StatsError> {
        let io = |source| StatsError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;

        let mut stats = ConfirmationStats::default();
        let mut good_len = 0u64;
        let mut reader = BufReader::new(&mut file);
        let mut line = String::new();
        let mut lineno = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 {
                break;
            }
            lineno += 1;
            if !line.ends_with('\n') {
                tracing::warn!(path = %path.display(), line = lineno, "discarding torn trailing stats record");
                break;
            }
            if line.trim().is_empty() {
                good_len += n as u64;
                continue;
            }
            let ev: StatsEvent = serde_json::from_str(&line).map_err(|e| StatsError::Corrupt {
                path: path.display().to_string(),
                line: lineno,
                message: e.to_string(),
            })?;
            stats.record(ev.sign_type, ev.outcome);
            good_len += n as u64;
        }
        drop(reader);
        if file.metadata().map_err(io)?.len() != good_len {
            file.set_len(good_len).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            file,
            stats,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn stats(&self) -> &ConfirmationStats {
        &self.stats
    }

    /// Durably appends one event, then counts it.
    pub fn append(&mut self, ev: &StatsEvent) -> Result<(), StatsError> {
        let mut line = serde_json::to_string(ev).expect("events always serialize");
        line.push('\n');
        let io = |source| StatsError::Io {
            path: self.path.display().to_string(),
            source,
        };
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)?;
        self.stats.record(ev.sign_type, ev.outcome);
        Ok(())
    }
}

//! Lookup sessions: one per recognized upload, confirmed at most once.

use crate::stats::{Outcome, MAX_RANK};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use signlookup_core::{CandidateList, QueryMode};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Pending,
    Confirmed,
    RejectedNone,
    Expired,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        !matches!(self, SessionState::Pending)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupSession {
    pub token: String,
    pub candidates: CandidateList,
    pub sign_type: QueryMode,
    pub created_at_ms: u64,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_rank: Option<u8>,
}

/// The user's final choice for a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    None(NoneMarker),
    Pick { rank: u8, variant_id: String },
}

/// The literal string `"none"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoneMarker {
    None,
}

impl Selection {
    pub fn none() -> Self {
        Selection::None(NoneMarker::None)
    }

    pub fn pick(rank: u8, variant_id: impl Into<String>) -> Self {
        Selection::Pick {
            rank,
            variant_id: variant_id.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfirmError<E> {
    #[error("unknown session")]
    NotFound,
    #[error("session already {0:?}")]
    AlreadyTerminal(SessionState),
    #[error("session expired")]
    Expired,
    #[error("{0}")]
    BadSelection(String),
    #[error("recording the outcome failed: {0}")]
    Commit(E),
}

/// 128 random bits, URL-safe base64 without padding (22 characters).
pub fn new_token() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

#[derive(Debug)]
pub struct SessionStore {
    sessions: HashMap<String, LookupSession>,
    ttl_ms: u64,
}

impl SessionStore {
    pub fn new(ttl_ms: u64) -> Self {
        Self {
            sessions: HashMap::new(),
            ttl_ms,
        }
    }

    pub fn ttl_ms(&self) -> u64 {
        self.ttl_ms
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&LookupSession> {
        self.sessions.get(token)
    }

    pub fn create(&mut self, candidates: CandidateList, sign_type: QueryMode, now_ms: u64) -> &LookupSession {
        let token = loop {
            let t = new_token();
            if !self.sessions.contains_key(&t) {
                break t;
            }
        };
        self.sessions.entry(token.clone()).or_insert(LookupSession {
            token,
            candidates,
            sign_type,
            created_at_ms: now_ms,
            state: SessionState::Pending,
            confirmed_variant: None,
            confirmed_rank: None,
        })
    }

    fn expired(&self, s: &LookupSession, now_ms: u64) -> bool {
        now_ms.saturating_sub(s.created_at_ms) >= self.ttl_ms
    }

    /// Applies `selection` to a pending session.
    ///
    /// `commit` runs after every check passes and before the state changes;
    /// if it fails the session stays pending.
    pub fn confirm<E>(
        &mut self,
        token: &str,
        selection: &Selection,
        now_ms: u64,
        commit: impl FnOnce(&LookupSession, Outcome) -> Result<(), E>,
    ) -> Result<LookupSession, ConfirmError<E>> {
        let expired = match self.sessions.get(token) {
            None => return Err(ConfirmError::NotFound),
            Some(s) if s.state.is_terminal() => return Err(ConfirmError::AlreadyTerminal(s.state)),
            Some(s) => self.expired(s, now_ms),
        };
        let s = self.sessions.get_mut(token).expect("looked up above");
        if expired {
            s.state = SessionState::Expired;
            return Err(ConfirmError::Expired);
        }
        let outcome = match selection {
            Selection::None(_) => Outcome::None,
            Selection::Pick { rank, variant_id } => {
                let cand = (1..=MAX_RANK)
                    .contains(rank)
                    .then(|| s.candidates.candidates.get(*rank as usize - 1))
                    .flatten()
                    .ok_or_else(|| {
                        ConfirmError::BadSelection(format!(
                            "rank {rank} is outside 1..={}",
                            s.candidates.candidates.len()
                        ))
                    })?;
                if !cand.variants.iter().any(|v| v.variant_id == *variant_id) {
                    return Err(ConfirmError::BadSelection(format!(
                        "variant {variant_id:?} does not belong to candidate {rank} ({})",
                        cand.base_gloss
                    )));
                }
                Outcome::Rank(*rank)
            }
        };
        commit(s, outcome).map_err(ConfirmError::Commit)?;
        match (selection, outcome) {
            (Selection::Pick { variant_id, .. }, Outcome::Rank(r)) => {
                s.state = SessionState::Confirmed;
                s.confirmed_rank = Some(r);
                s.confirmed_variant = Some(variant_id.clone());
            }
            _ => s.state = SessionState::RejectedNone,
        }
        Ok(s.clone())
    }

    /// Marks overdue pending sessions expired and forgets sessions older
    /// than `retain_ms`. Returns how many were forgotten.
    pub fn sweep(&mut self, now_ms: u64, retain_ms: u64) -> usize {
        let ttl = self.ttl_ms;
        let before = self.sessions.len();
        self.sessions.retain(|_, s| {
            let age = now_ms.saturating_sub(s.created_at_ms);
            if s.state == SessionState::Pending && age >= ttl {
                s.state = SessionState::Expired;
            }
            age < retain_ms
        });
        before - self.sessions.len()
    }
}

//! In-memory session store with idle-TTL eviction.
//!
//! Sessions are memory-resident only; evicting one drops its pseudonym map
//! with it. Distinct sessions are accessed concurrently; requests within a
//! session serialize on the per-session lock.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use camp_core::ChatSession;
use parking_lot::{Mutex, RwLock};

pub struct SessionEntry {
    pub session: ChatSession,
    pub last_activity: Instant,
}

impl SessionEntry {
    pub fn touch(&mut self) {
        self.last_activity = Instant::now();
    }
}

pub type SessionHandle = Arc<Mutex<SessionEntry>>;

pub struct SessionStore {
    sessions: RwLock<HashMap<String, SessionHandle>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore { sessions: RwLock::new(HashMap::new()), ttl }
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.read().is_empty()
    }

    fn expired(&self, handle: &SessionHandle) -> bool {
        handle.lock().last_activity.elapsed() > self.ttl
    }

    /// Look up a live session; an expired one is evicted and reported as
    /// absent.
    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        let handle = self.sessions.read().get(id).cloned()?;
        if self.expired(&handle) {
            self.sessions.write().remove(id);
            tracing::debug!(session = %id, "session expired on access");
            return None;
        }
        Some(handle)
    }

    /// Fetch the session for `id`, or mint a fresh one when the id is
    /// absent, unknown, or expired. Returns (id, handle, created).
    pub fn get_or_create(
        &self,
        id: Option<&str>,
        make: impl FnOnce(&str) -> ChatSession,
    ) -> (String, SessionHandle, bool) {
        if let Some(id) = id {
            if let Some(handle) = self.get(id) {
                return (id.to_string(), handle, false);
            }
        }
        let new_id = uuid::Uuid::new_v4().to_string();
        let entry = SessionEntry { session: make(&new_id), last_activity: Instant::now() };
        let handle: SessionHandle = Arc::new(Mutex::new(entry));
        self.sessions.write().insert(new_id.clone(), handle.clone());
        tracing::info!(session = %new_id, "session created");
        (new_id, handle, true)
    }

    /// Drop every session idle past the TTL. Returns how many were evicted.
    pub fn evict_expired(&self) -> usize {
        let expired: Vec<String> = {
            let sessions = self.sessions.read();
            sessions
                .iter()
                .filter(|(_, h)| h.lock().last_activity.elapsed() > self.ttl)
                .map(|(id, _)| id.clone())
                .collect()
        };
        if expired.is_empty() {
            return 0;
        }
        let mut sessions = self.sessions.write();
        let mut evicted = 0;
        for id in expired {
            if sessions
                .get(&id)
                .is_some_and(|h| h.lock().last_activity.elapsed() > self.ttl)
            {
                sessions.remove(&id);
                evicted += 1;
                tracing::info!(session = %id, "session evicted");
            }
        }
        evicted
    }
}

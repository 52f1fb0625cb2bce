use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use sha2::{Digest, Sha256};

use super::{BackendError, RewriteBackend, RewriteRequest, RewriteResponse};
use crate::error::{Error, Result};

/// Responses keyed by a hash of the full request (text, mode, languages,
/// sampling). Persisted as a JSON object `{hash: text}`.
#[derive(Debug, Default)]
pub struct RewriteCache {
    entries: Mutex<BTreeMap<String, String>>,
    hits: AtomicUsize,
}

impl RewriteCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a cache file; a missing file gives an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = match fs::read_to_string(path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => return Err(Error::io(path, e)),
        };
        let entries: BTreeMap<String, String> =
            serde_json::from_str(&raw).map_err(|e| Error::parse(path, "cache", e))?;
        Ok(RewriteCache {
            entries: Mutex::new(entries),
            hits: AtomicUsize::new(0),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let entries = self.entries.lock();
        let mut json = serde_json::to_string_pretty(&*entries).expect("string map serializes");
        json.push('\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn key(request: &RewriteRequest) -> String {
        let canonical = serde_json::to_vec(request).expect("request serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn get(&self, request: &RewriteRequest) -> Option<String> {
        let hit = self.entries.lock().get(&Self::key(request)).cloned();
        if hit.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        hit
    }

    pub fn insert(&self, request: &RewriteRequest, text: String) {
        self.entries.lock().insert(Self::key(request), text);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }
}

/// Serves repeated requests from a [`RewriteCache`]; only successful
/// responses are stored.
pub struct CachedBackend<B> {
    inner: B,
    cache: Arc<RewriteCache>,
}

impl<B: RewriteBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: Arc<RewriteCache>) -> Self {
        CachedBackend { inner, cache }
    }
}

impl<B: RewriteBackend> RewriteBackend for CachedBackend<B> {
    fn rewrite(&self, request: &RewriteRequest) -> Result<RewriteResponse, BackendError> {
        if let Some(text) = self.cache.get(request) {
            return Ok(RewriteResponse { text });
        }
        let response = self.inner.rewrite(request)?;
        self.cache.insert(request, response.text.clone());
        Ok(response)
    }
}

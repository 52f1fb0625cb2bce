//! Sentence-level augmentation through an external rewrite backend.
//!
//! Slot values are swapped for `XSLOT{i}X` placeholders before text leaves
//! the process and swapped back afterwards. A rewrite that loses, repeats
//! or invents a placeholder, or a backend that keeps failing, falls back to
//! the original utterance so corpus multiplicities never change.

mod cache;
mod http;
mod mock;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, LazyLock};
use std::thread;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use url::Url;

use crate::corpus::Method;
use crate::error::{Error, Result};
use crate::text;
use crate::wordaug::{TokenizedUtterance, Variant};

pub use cache::{CachedBackend, RewriteCache};
pub use http::HttpBackend;
pub use mock::{mock_backend, MockBackend, MockMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewriteMode {
    Translate,
    Paraphrase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub greedy: bool,
    pub temperature: f64,
    pub seed: u64,
}

impl Sampling {
    pub fn greedy(seed: u64) -> Self {
        Sampling {
            greedy: true,
            temperature: 1.0,
            seed,
        }
    }
}

/// Body of `POST {endpoint}/rewrite`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteRequest {
    pub text: String,
    pub mode: RewriteMode,
    pub source_lang: String,
    pub target_lang: String,
    pub sampling: Sampling,
}

impl RewriteRequest {
    pub fn translate(text: &str, from: &str, to: &str, sampling: Sampling) -> Result<Self> {
        if from == to {
            return Err(Error::Argument(format!(
                "translation needs two languages, got {from} -> {to}"
            )));
        }
        Self::new(text, RewriteMode::Translate, from, to, sampling)
    }

    /// Paraphrase requests carry the utterance language in both fields.
    pub fn paraphrase(text: &str, lang: &str, sampling: Sampling) -> Result<Self> {
        Self::new(text, RewriteMode::Paraphrase, lang, lang, sampling)
    }

    fn new(
        text: &str,
        mode: RewriteMode,
        from: &str,
        to: &str,
        sampling: Sampling,
    ) -> Result<Self> {
        if sampling.temperature.is_nan() || sampling.temperature <= 0.0 {
            return Err(Error::Argument("sampling temperature must be positive".into()));
        }
        Ok(RewriteRequest {
            text: text.to_string(),
            mode,
            source_lang: from.to_string(),
            target_lang: to.to_string(),
            sampling,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteResponse {
    pub text: String,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("backend answered HTTP {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// Something that rewrites text: an HTTP service, the in-process mock, or a
/// test double.
pub trait RewriteBackend: Send + Sync {
    fn rewrite(&self, request: &RewriteRequest) -> Result<RewriteResponse, BackendError>;
}

impl<T: RewriteBackend + ?Sized> RewriteBackend for Arc<T> {
    fn rewrite(&self, request: &RewriteRequest) -> Result<RewriteResponse, BackendError> {
        (**self).rewrite(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: Url,
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_inflight: usize,
    #[serde(with = "millis")]
    pub backoff_base: Duration,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: Url::parse("http://127.0.0.1:8080").expect("static url"),
            timeout: Duration::from_secs(30),
            max_retries: 3,
            max_inflight: 8,
            backoff_base: Duration::from_millis(200),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_inflight == 0 {
            return Err(Error::Argument("max_inflight must be at least 1".into()));
        }
        Ok(())
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

/// Ordered pivot languages for back-translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct PivotSet(Vec<String>);

impl PivotSet {
    pub fn new<I, S>(langs: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let langs: Vec<String> = langs.into_iter().map(|l| l.into().trim().to_string()).collect();
        if langs.is_empty() || langs.iter().any(String::is_empty) {
            return Err(Error::Argument("pivot languages must be non-empty codes".into()));
        }
        for (i, l) in langs.iter().enumerate() {
            if langs[..i].contains(l) {
                return Err(Error::Argument(format!("pivot language {l} listed twice")));
            }
        }
        Ok(PivotSet(langs))
    }

    pub fn langs(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for PivotSet {
    /// Chinese, Japanese, French, German.
    fn default() -> Self {
        PivotSet(["zh", "ja", "fr", "de"].map(String::from).to_vec())
    }
}

impl TryFrom<Vec<String>> for PivotSet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        PivotSet::new(v)
    }
}

impl From<PivotSet> for Vec<String> {
    fn from(p: PivotSet) -> Vec<String> {
        p.0
    }
}

impl FromStr for PivotSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PivotSet::new(s.split(',').filter(|x| !x.trim().is_empty()))
    }
}

impl fmt::Display for PivotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"XSLOT(\d+)X").expect("placeholder pattern"));

pub fn placeholder_token(i: usize) -> String {
    format!("XSLOT{i}X")
}

/// Placeholder index -> original surface.
pub type PlaceholderMap = BTreeMap<usize, String>;

/// Replaces the i-th protected span (left to right) with `XSLOT{i}X`.
pub fn placeholder(tu: &TokenizedUtterance) -> (String, PlaceholderMap) {
    let mut words: Vec<String> = Vec::with_capacity(tu.tokens.len());
    let mut map = PlaceholderMap::new();
    let mut spans = tu.spans.iter().peekable();
    let mut i = 0;
    while i < tu.tokens.len() {
        match spans.peek() {
            Some(span) if span.start == i => {
                let n = map.len();
                let surface = tu.tokens[(*span).clone()]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                map.insert(n, surface);
                words.push(placeholder_token(n));
                i = span.end;
                spans.next();
            }
            _ => {
                words.push(tu.tokens[i].surface.clone());
                i += 1;
            }
        }
    }
    (words.join(" "), map)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestoreError {
    #[error("placeholder {0} missing")]
    Missing(usize),
    #[error("placeholder {0} occurs {1} times")]
    Repeated(usize, usize),
    #[error("unknown placeholder {0}")]
    Unknown(usize),
}

/// Puts the original surfaces back. Succeeds only if each placeholder of
/// `map` occurs exactly once and no other placeholder occurs. The result is
/// lowercased and in tokenized form.
pub fn restore(text: &str, map: &PlaceholderMap) -> Result<String, RestoreError> {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for cap in PLACEHOLDER.captures_iter(text) {
        let idx: usize = cap[1].parse().unwrap_or(usize::MAX);
        if !map.contains_key(&idx) {
            return Err(RestoreError::Unknown(idx));
        }
        *seen.entry(idx).or_default() += 1;
    }
    for &idx in map.keys() {
        match seen.get(&idx).copied().unwrap_or(0) {
            0 => return Err(RestoreError::Missing(idx)),
            1 => {}
            n => return Err(RestoreError::Repeated(idx, n)),
        }
    }
    let replaced = PLACEHOLDER.replace_all(text, |cap: &regex::Captures<'_>| {
        let idx: usize = cap[1].parse().expect("checked above");
        format!(" {} ", map[&idx])
    });
    Ok(text::normalize(&replaced).to_lowercase())
}

/// Drives a backend for sentence-level augmentation: caching, retries with
/// exponential backoff, placeholder discipline and fallback accounting.
pub struct Rewriter {
    backend: Box<dyn RewriteBackend>,
    max_retries: u32,
    backoff_base: Duration,
    lang: String,
    fallbacks: AtomicUsize,
    requests: AtomicUsize,
}

impl Rewriter {
    pub fn new(backend: impl RewriteBackend + 'static, max_retries: u32, backoff_base: Duration) -> Self {
        Rewriter {
            backend: Box::new(backend),
            max_retries,
            backoff_base,
            lang: "en".to_string(),
            fallbacks: AtomicUsize::new(0),
            requests: AtomicUsize::new(0),
        }
    }

    pub fn with_config(backend: impl RewriteBackend + 'static, config: &BackendConfig) -> Self {
        Self::new(backend, config.max_retries, config.backoff_base)
    }

    /// Language of the corpus text (default `en`).
    pub fn language(mut self, lang: impl Into<String>) -> Self {
        self.lang = lang.into();
        self
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    /// Backend calls attempted, retries included.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    fn call(&self, request: &RewriteRequest) -> Result<String, BackendError> {
        let mut attempt = 0;
        loop {
            self.requests.fetch_add(1, Ordering::Relaxed);
            let outcome = self.backend.rewrite(request).and_then(|r| {
                if r.text.trim().is_empty() {
                    Err(BackendError::Malformed("empty text".into()))
                } else {
                    Ok(r.text)
                }
            });
            match outcome {
                Ok(text) => return Ok(text),
                Err(e) if attempt < self.max_retries => {
                    let delay = self.backoff_base.saturating_mul(1 << attempt.min(16));
                    log::debug!("rewrite attempt {} failed ({e}); retrying in {delay:?}", attempt + 1);
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn fallback(&self, tu: &TokenizedUtterance, method: Method, index: u32, why: String) -> Variant {
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        log::debug!("{method} fallback for {:?}: {why}", tu.source_text);
        let mut meta = BTreeMap::new();
        meta.insert("fallback".into(), Value::Bool(true));
        meta.insert("reason".into(), Value::String(why));
        Variant {
            text: tu.source_text.clone(),
            method,
            variant_index: index,
            meta,
        }
    }

    /// Round trip through `pivot`. Never fails: on error the original
    /// utterance comes back with `meta.fallback = true`.
    pub fn backtranslate(
        &self,
        tu: &TokenizedUtterance,
        pivot: &str,
        seed: u64,
        variant_index: u32,
    ) -> Variant {
        let method = Method::Backtranslate;
        let (masked, map) = placeholder(tu);
        let sampling = Sampling::greedy(seed);
        let round_trip = || -> std::result::Result<String, String> {
            let there = RewriteRequest::translate(&masked, &self.lang, pivot, sampling)
                .map_err(|e| e.to_string())?;
            let foreign = self.call(&there).map_err(|e| e.to_string())?;
            let back = RewriteRequest::translate(&foreign, pivot, &self.lang, sampling)
                .map_err(|e| e.to_string())?;
            let text = self.call(&back).map_err(|e| e.to_string())?;
            restore(&text, &map).map_err(|e| e.to_string())
        };
        match round_trip() {
            Ok(text) => {
                let mut meta = BTreeMap::new();
                meta.insert("pivot".into(), Value::String(pivot.to_string()));
                Variant {
                    text,
                    method,
                    variant_index,
                    meta,
                }
            }
            Err(why) => {
                let mut v = self.fallback(tu, method, variant_index, why);
                v.meta.insert("pivot".into(), Value::String(pivot.to_string()));
                v
            }
        }
    }

    /// One paraphrase with exactly the given sampling parameters.
    pub fn paraphrase_one(&self, tu: &TokenizedUtterance, sampling: Sampling, variant_index: u32) -> Variant {
        let method = Method::Paraphrase;
        let (masked, map) = placeholder(tu);
        let result = || -> std::result::Result<String, String> {
            let req = RewriteRequest::paraphrase(&masked, &self.lang, sampling)
                .map_err(|e| e.to_string())?;
            let text = self.call(&req).map_err(|e| e.to_string())?;
            restore(&text, &map).map_err(|e| e.to_string())
        };
        match result() {
            Ok(text) => Variant {
                text,
                method,
                variant_index,
                meta: BTreeMap::new(),
            },
            Err(why) => self.fallback(tu, method, variant_index, why),
        }
    }

    /// `k` paraphrases. Greedy decoding repeats the same request; sampling
    /// uses seed `sampling.seed + i` for the i-th variant (0-based).
    pub fn paraphrase(&self, tu: &TokenizedUtterance, k: usize, sampling: Sampling) -> Result<Vec<Variant>> {
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        Ok((0..k)
            .map(|i| {
                let mut s = sampling;
                if !s.greedy {
                    s.seed = sampling.seed.wrapping_add(i as u64);
                }
                self.paraphrase_one(tu, s, i as u32 + 1)
            })
            .collect())
    }
}

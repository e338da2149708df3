//! Translation backends, retry policy and cache-aware corpus translation.

mod cache;
mod http;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{render_prefix, GrammarError, HintCondition, PrefixTemplateSet};
use crate::wrap::{passthrough, strip, wrap, StripOutcome, StripRuleSet, WrapError};

pub use cache::{CacheKey, TranslationCache};
pub use http::{HttpAdapter, HttpTranslator};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("quota exceeded (retry after {retry_after:?})")]
    Quota { retry_after: Option<Duration> },
    #[error("network error: {0}")]
    Network(String),
    #[error("no fixture translation for `{0}`")]
    MissingFixture(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

impl BackendError {
    fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Quota { .. } | BackendError::Network(_))
    }
}

/// Anything that turns one source-language string into target-language text.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str) -> Result<String, BackendError>;
}

/// Returns its input unchanged.
pub struct EchoTranslator;

impl Translator for EchoTranslator {
    fn translate(&self, text: &str) -> Result<String, BackendError> {
        Ok(text.to_string())
    }
}

/// Fixed lookup table from wrapped source text to translation.
#[derive(Debug, Default)]
pub struct TableTranslator {
    rows: HashMap<String, String>,
}

impl TableTranslator {
    pub fn new(rows: HashMap<String, String>) -> Self {
        TableTranslator { rows }
    }

    /// Parses a headerless TSV: wrapped text, tab, translation.
    pub fn from_tsv(text: &str) -> Result<Self, BackendError> {
        let mut rows = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            let (src, tgt) = line.split_once('\t').ok_or_else(|| {
                BackendError::Config(format!("fixture line {}: missing tab separator", n + 1))
            })?;
            rows.insert(src.to_string(), tgt.to_string());
        }
        Ok(TableTranslator { rows })
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            BackendError::Config(format!("cannot read fixture {}: {e}", path.display()))
        })?;
        Self::from_tsv(&text)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Translator for TableTranslator {
    fn translate(&self, text: &str) -> Result<String, BackendError> {
        self.rows
            .get(text)
            .cloned()
            .ok_or_else(|| BackendError::MissingFixture(text.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Table,
    Echo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 4,
            initial_backoff_ms: 1000,
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32, err: &BackendError) -> Duration {
        if let BackendError::Quota {
            retry_after: Some(after),
        } = err
        {
            return *after;
        }
        Duration::from_millis(
            self.initial_backoff_ms
                .saturating_mul(1 << (attempt - 1).min(20)),
        )
    }
}

fn default_max_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub name: String,
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    pub source_lang: String,
    pub target_lang: String,
    /// Environment variable holding the API key. Keys never live in config.
    #[serde(default)]
    pub credentials_env: Option<String>,
    /// TSV fixture for `table` backends.
    #[serde(default)]
    pub fixture: Option<PathBuf>,
    #[serde(default)]
    pub http: HttpAdapter,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

impl BackendSpec {
    pub fn new(name: &str, kind: BackendKind, source_lang: &str, target_lang: &str) -> Self {
        BackendSpec {
            name: name.to_string(),
            kind,
            endpoint: None,
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            credentials_env: None,
            fixture: None,
            http: HttpAdapter::default(),
            retry: RetryPolicy::default(),
            max_in_flight: default_max_in_flight(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        match self.kind {
            BackendKind::Http if self.endpoint.is_none() => Err(BackendError::Config(format!(
                "backend `{}`: http backends need an endpoint",
                self.name
            ))),
            BackendKind::Table if self.fixture.is_none() => Err(BackendError::Config(format!(
                "backend `{}`: table backends need a fixture file",
                self.name
            ))),
            _ if self.max_in_flight == 0 => Err(BackendError::Config(format!(
                "backend `{}`: max_in_flight must be >= 1",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

/// A configured backend: its spec, the translator behind it, and a counter of
/// calls that actually reached the translator.
pub struct Backend {
    spec: BackendSpec,
    translator: Box<dyn Translator>,
    calls: AtomicUsize,
}

impl Backend {
    /// Builds the translator named by `spec`. Relative fixture paths resolve
    /// against `base_dir`.
    pub fn from_spec(spec: &BackendSpec, base_dir: &Path) -> Result<Self, BackendError> {
        spec.validate()?;
        let translator: Box<dyn Translator> = match spec.kind {
            BackendKind::Echo => Box::new(EchoTranslator),
            BackendKind::Table => {
                let fixture = spec.fixture.as_ref().expect("validated");
                Box::new(TableTranslator::load(&base_dir.join(fixture))?)
            }
            BackendKind::Http => {
                let var = spec.credentials_env.as_deref().ok_or_else(|| {
                    BackendError::Auth(format!("backend `{}` names no credentials_env", spec.name))
                })?;
                let key = std::env::var(var).map_err(|_| {
                    BackendError::Auth(format!("environment variable {var} is not set"))
                })?;
                Box::new(HttpTranslator::new(
                    spec.endpoint.as_deref().expect("validated"),
                    key,
                    &spec.source_lang,
                    &spec.target_lang,
                    spec.http.clone(),
                )?)
            }
        };
        Ok(Self::with_translator(spec.clone(), translator))
    }

    pub fn with_translator(spec: BackendSpec, translator: Box<dyn Translator>) -> Self {
        Backend {
            spec,
            translator,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Number of translator invocations so far, retries included.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn cache_key(&self, wrapped: &str) -> CacheKey {
        CacheKey::new(
            &self.spec.name,
            &self.spec.source_lang,
            &self.spec.target_lang,
            wrapped,
        )
    }

    /// Translates one wrapped sentence, retrying quota and network failures.
    pub fn translate_one(&self, wrapped: &str) -> Result<String, BackendError> {
        let policy = &self.spec.retry;
        let mut attempt = 1;
        loop {
            self.calls.fetch_add(1, Ordering::SeqCst);
            match self.translator.translate(wrapped) {
                Ok(text) => return Ok(text),
                Err(err) if err.is_retryable() && attempt < policy.max_attempts => {
                    let delay = policy.delay(attempt, &err);
                    log::warn!(
                        "{}: attempt {attempt} failed ({err}); retrying in {delay:?}",
                        self.spec.name
                    );
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(err) => return Err(err),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source: String,
    pub condition_label: String,
    pub wrapped: String,
    pub raw_translation: String,
    pub strip: StripOutcome,
    pub backend_name: String,
    pub from_cache: bool,
    pub timestamp: u64,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("sentence {index}: {source}")]
    Wrap { index: usize, source: WrapError },
    #[error("sentence {index}: {source}")]
    Backend { index: usize, source: BackendError },
    #[error("cache write failed: {0}")]
    Cache(#[from] std::io::Error),
}

/// Wraps, translates and strips every sentence under one condition.
///
/// The cache is consulted before any backend call and every fresh result is
/// appended to it as soon as it arrives. Backend calls run on up to
/// `max_in_flight` worker threads; records come back in input order.
pub fn translate_corpus(
    sentences: &[String],
    condition: &HintCondition,
    backend: &Backend,
    cache: &mut TranslationCache,
    templates: &PrefixTemplateSet,
    rules: &StripRuleSet,
) -> Result<Vec<TranslationRecord>, CorpusError> {
    if sentences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let prefix = render_prefix(condition, templates)?;
    let wrapped: Vec<String> = sentences
        .iter()
        .enumerate()
        .map(|(index, s)| {
            wrap(s, prefix, &templates.separator)
                .map(|w| w.wrapped)
                .map_err(|source| CorpusError::Wrap { index, source })
        })
        .collect::<Result<_, _>>()?;

    // unique misses, each remembered with the first sentence index using it
    let mut misses: Vec<(usize, &str)> = Vec::new();
    let mut pending: HashMap<&str, ()> = HashMap::new();
    for (i, w) in wrapped.iter().enumerate() {
        if cache.get(&backend.cache_key(w)).is_none() && pending.insert(w, ()).is_none() {
            misses.push((i, w));
        }
    }

    let mut fresh: HashMap<&str, String> = HashMap::new();
    let mut failure: Option<(usize, BackendError)> = None;
    if !misses.is_empty() {
        let workers = backend.spec().max_in_flight.clamp(1, misses.len());
        let next = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let (next, abort, misses) = (&next, &abort, &misses);
                scope.spawn(move || loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let slot = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&(index, text)) = misses.get(slot) else {
                        break;
                    };
                    let result = backend.translate_one(text);
                    if tx.send((index, text, result)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // single writer: only this thread touches the cache
            for (index, text, result) in rx {
                match result {
                    Ok(translation) => {
                        if let Err(e) = cache.put(backend.cache_key(text), text, &translation) {
                            abort.store(true, Ordering::SeqCst);
                            failure.get_or_insert((index, BackendError::Config(e.to_string())));
                            continue;
                        }
                        fresh.insert(text, translation);
                    }
                    Err(err) => {
                        abort.store(true, Ordering::SeqCst);
                        if failure.as_ref().is_none_or(|(i, _)| index < *i) {
                            failure = Some((index, err));
                        }
                    }
                }
            }
        });
    }
    if let Some((index, source)) = failure {
        return Err(CorpusError::Backend { index, source });
    }

    let timestamp = now_secs();
    let label = condition.label();
    let records = sentences
        .iter()
        .zip(&wrapped)
        .map(|(source, w)| {
            let (raw, from_cache) = match fresh.get(w.as_str()) {
                Some(t) => (t.clone(), false),
                None => (
                    cache
                        .get(&backend.cache_key(w))
                        .expect("cached or fetched")
                        .to_string(),
                    true,
                ),
            };
            TranslationRecord {
                source: source.clone(),
                condition_label: label.clone(),
                wrapped: w.clone(),
                strip: if prefix.is_empty() {
                    passthrough(&raw)
                } else {
                    strip(&raw, rules)
                },
                raw_translation: raw,
                backend_name: backend.name().to_string(),
                from_cache,
                timestamp,
            }
        })
        .collect();
    Ok(records)
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

//! Append-only JSON-lines translation cache.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub backend: String,
    pub source_lang: String,
    pub target_lang: String,
    /// Hex SHA-256 of the exact wrapped text bytes.
    pub digest: String,
}

impl CacheKey {
    pub fn new(backend: &str, source_lang: &str, target_lang: &str, wrapped: &str) -> Self {
        CacheKey {
            backend: backend.to_string(),
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            digest: hex::encode(Sha256::digest(wrapped.as_bytes())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    #[serde(flatten)]
    key: CacheKey,
    #[serde(default)]
    wrapped: Option<String>,
    translation: String,
}

#[derive(Debug, Default)]
pub struct TranslationCache {
    entries: HashMap<CacheKey, String>,
    path: Option<PathBuf>,
    writer: Option<File>,
    skipped_lines: usize,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists and opens it for appending. Unparseable lines
    /// are skipped with a warning; later lines win over earlier ones.
    pub fn open(path: &Path) -> io::Result<Self> {
        let mut cache = TranslationCache {
            path: Some(path.to_path_buf()),
            ..Default::default()
        };
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(entry) => {
                        cache.entries.insert(entry.key, entry.translation);
                    }
                    Err(e) => {
                        log::warn!(
                            "{}:{}: skipping corrupt cache line: {e}",
                            path.display(),
                            n + 1
                        );
                        cache.skipped_lines += 1;
                    }
                }
            }
        } else if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        cache.writer = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(cache)
    }

    pub fn get(&self, key: &CacheKey) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Inserts and, for file-backed caches, appends and flushes one line.
    pub fn put(&mut self, key: CacheKey, wrapped: &str, translation: &str) -> io::Result<()> {
        if let Some(file) = self.writer.as_mut() {
            let line = CacheLine {
                key: key.clone(),
                wrapped: Some(wrapped.to_string()),
                translation: translation.to_string(),
            };
            let mut text = serde_json::to_string(&line).map_err(io::Error::other)?;
            text.push('\n');
            file.write_all(text.as_bytes())?;
            file.flush()?;
        }
        self.entries.insert(key, translation.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(text: &str) -> CacheKey {
        CacheKey::new("echo", "en", "he", text)
    }

    #[test]
    fn put_then_get() {
        let mut c = TranslationCache::in_memory();
        assert!(c.get(&key("a")).is_none());
        c.put(key("a"), "a", "A").unwrap();
        assert_eq!(c.get(&key("a")), Some("A"));
        assert!(c.get(&CacheKey::new("other", "en", "he", "a")).is_none());
    }

    #[test]
    fn persists_and_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        {
            let mut c = TranslationCache::open(&path).unwrap();
            c.put(key("a"), "a", "first").unwrap();
            c.put(key("a"), "a", "second").unwrap();
            c.put(key("b"), "b", "B").unwrap();
        }
        let c = TranslationCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(&key("a")), Some("second"));
    }

    #[test]
    fn corrupt_line_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut text = String::new();
        for i in 0..100 {
            if i == 37 {
                text.push_str("{\"backend\": \"echo\", truncated\n");
                continue;
            }
            let line = CacheLine {
                key: key(&i.to_string()),
                wrapped: None,
                translation: format!("t{i}"),
            };
            text.push_str(&serde_json::to_string(&line).unwrap());
            text.push('\n');
        }
        std::fs::write(&path, text).unwrap();
        let c = TranslationCache::open(&path).unwrap();
        assert_eq!(c.len(), 99);
        assert_eq!(c.skipped_lines(), 1);
        assert_eq!(c.get(&key("36")), Some("t36"));
    }

    #[test]
    fn digest_is_sha256_of_bytes() {
        let k = key("abc");
        assert_eq!(
            k.digest,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

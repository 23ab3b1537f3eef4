//! Content-addressed disk cache of serialized results.
//!
//! Keys are SHA-256 digests over the schema version, the crate version and
//! the request. Writes go through a temp file renamed into place, so a
//! reader never sees a partial entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Bump when any cached payload format changes.
pub const SCHEMA_VERSION: u32 = 1;

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir: Some(dir) }
    }

    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    pub fn key(kind: &str, parts: &[String]) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "schema={SCHEMA_VERSION}\nversion={}\nkind={kind}\n",
            env!("CARGO_PKG_VERSION")
        ));
        for p in parts {
            h.update(p.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(kind).join(format!("{key}.json")))
    }

    pub fn get(&self, kind: &str, key: &str) -> Option<String> {
        fs::read_to_string(self.path(kind, key)?).ok()
    }

    pub fn put(&self, kind: &str, key: &str, payload: &str) -> Result<()> {
        let Some(path) = self.path(kind, key) else {
            return Ok(());
        };
        let parent = path.parent().expect("cache path has a parent");
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        write_atomic(parent, &path, payload)
    }

    /// Cached payload if present and accepted by `validate`, else compute,
    /// store and return it.
    pub fn get_or_compute(
        &self,
        kind: &str,
        key: &str,
        validate: impl Fn(&str) -> bool,
        compute: impl FnOnce() -> Result<String>,
    ) -> Result<String> {
        if let Some(s) = self.get(kind, key) {
            if validate(&s) {
                return Ok(s);
            }
        }
        let s = compute()?;
        self.put(kind, key, &s)?;
        Ok(s)
    }
}

pub fn write_atomic(dir: &Path, path: &Path, payload: &str) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(payload.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_key_separation() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path().to_path_buf());
        let k1 = Cache::key("x", &["a".into()]);
        let k2 = Cache::key("x", &["b".into()]);
        assert_ne!(k1, k2);
        assert_ne!(k1, Cache::key("y", &["a".into()]));
        c.put("x", &k1, "payload").unwrap();
        assert_eq!(c.get("x", &k1).as_deref(), Some("payload"));
        assert_eq!(c.get("x", &k2), None);
        let mut calls = 0;
        let out = c
            .get_or_compute(
                "x",
                &k1,
                |_| true,
                || {
                    calls += 1;
                    Ok("other".into())
                },
            )
            .unwrap();
        assert_eq!(out, "payload");
        assert_eq!(calls, 0);
        let out = c
            .get_or_compute("x", &k1, |_| false, || Ok("fresh".into()))
            .unwrap();
        assert_eq!(out, "fresh");
    }
}

//! Name and value pools backing entity creation and literal sampling.
//!
//! Built-in pools are compiled into the binary so default generation is
//! hermetic; a directory of `<pool>.txt` files (one value per line) can
//! override any of them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("unknown pool '{0}'")]
    UnknownPool(String),
    #[error("pool '{0}' is empty")]
    EmptyPool(String),
    #[error("failed to read pool file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

macro_rules! embedded {
    ($($name:literal),+ $(,)?) => {
        &[$(($name, include_str!(concat!("../../../../pools/", $name, ".txt")))),+]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded![
    "people",
    "meeting_names",
    "topics",
    "dates",
    "times",
    "rooms",
    "emails",
    "courses",
    "assignments",
    "grades",
    "projects",
    "tickets",
    "stages",
    "priorities",
    "items",
    "stores",
    "prices",
    "occasions",
];

/// Where pool values come from.
#[derive(Clone, Debug, Default)]
pub enum PoolSource {
    /// Compiled-in pools only.
    #[default]
    Embedded,
    /// `<dir>/<pool>.txt` when present, embedded values otherwise.
    Dir(PathBuf),
}

impl PoolSource {
    pub fn from_dir(dir: impl AsRef<Path>) -> Self {
        PoolSource::Dir(dir.as_ref().to_path_buf())
    }

    pub fn load(&self, name: &str) -> Result<Vec<String>, PoolError> {
        if let PoolSource::Dir(dir) = self {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                let raw = std::fs::read_to_string(&path)
                    .map_err(|source| PoolError::Io { path: path.clone(), source })?;
                return parse_pool(name, &raw);
            }
        }
        let raw = EMBEDDED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, body)| *body)
            .ok_or_else(|| PoolError::UnknownPool(name.to_string()))?;
        parse_pool(name, raw)
    }
}

fn parse_pool(name: &str, raw: &str) -> Result<Vec<String>, PoolError> {
    let values: Vec<String> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if values.is_empty() {
        return Err(PoolError::EmptyPool(name.to_string()));
    }
    Ok(values)
}

/// All pools a world references, fully resolved.
pub type PoolSet = BTreeMap<String, Vec<String>>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_pools_resolve() {
        let people = PoolSource::Embedded.load("people").unwrap();
        assert!(people.len() >= 1500, "people pool has {} names", people.len());
        assert!(PoolSource::Embedded.load("nonexistent").is_err());
    }

    #[test]
    fn dir_override_wins() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("people.txt"), "Solo Tester\n\n").unwrap();
        let src = PoolSource::from_dir(dir.path());
        assert_eq!(src.load("people").unwrap(), vec!["Solo Tester".to_string()]);
        // Missing files fall back to the embedded pool.
        assert!(src.load("dates").unwrap().len() > 3);
    }
}

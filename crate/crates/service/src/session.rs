//! Fitted sessions: a dataset, the projector fitted on it and the settings
//! that produced both, persisted as one JSON file per session.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dimcf::bench::DatasetSource;
use dimcf::{Dataset, Error, Projector, ProjectorConfig, Result};
use serde::{Deserialize, Serialize};

pub const SESSION_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default session directory.
pub const SESSION_DIR_ENV: &str = "DIMCF_SESSION_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub data: DatasetSource,
    pub projector: ProjectorConfig,
    pub seed: u64,
}

/// Immutable once fitted; refitting produces a new session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub version: u32,
    pub settings: FitSettings,
    pub dataset: Dataset,
    pub projector: Projector,
}

impl Session {
    pub fn fit(settings: FitSettings) -> Result<Self> {
        let dataset = settings.data.load(settings.seed)?;
        let projector = settings.projector.fit(&dataset.x, settings.seed)?;
        let session = Self {
            version: SESSION_FORMAT_VERSION,
            settings,
            dataset,
            projector,
        };
        session.validate()?;
        Ok(session)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SESSION_FORMAT_VERSION {
            return Err(Error::Input(format!("unsupported session version {}", self.version)));
        }
        if self.projector.input_dim() != self.dataset.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.n_features(),
                got: self.projector.input_dim(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        if let Some(dir) = path.as_ref().parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let session: Session = serde_json::from_str(&text)?;
        session.validate()?;
        Ok(session)
    }
}

/// Read-only map from session id (the file stem) to session.
#[derive(Debug, Default)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: BTreeMap<String, Arc<Session>>,
}

impl SessionStore {
    /// Loads every `*.json` file in `dir`. Any unreadable session fails the whole load.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let mut sessions = BTreeMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                continue;
            };
            let session = Session::load(&path)
                .map_err(|e| Error::Input(format!("session file {}: {e}", path.display())))?;
            sessions.insert(id, Arc::new(session));
        }
        Ok(Self { dir, sessions })
    }

    pub fn from_sessions(sessions: impl IntoIterator<Item = (String, Session)>) -> Self {
        Self {
            dir: PathBuf::new(),
            sessions: sessions.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.get(id).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Session)> {
        self.sessions.iter().map(|(k, v)| (k.as_str(), v.as_ref()))
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(method: &str) -> FitSettings {
        FitSettings {
            data: DatasetSource::Toy { n: 40, d: 5, seed: None },
            projector: ProjectorConfig::from_method(method).unwrap(),
            seed: 3,
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = Session::fit(settings("linear")).unwrap();
        s.save(dir.path().join("a.json")).unwrap();
        assert_eq!(Session::load(dir.path().join("a.json")).unwrap(), s);
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert_eq!(store.len(), 1);
        assert!(store.get("a").is_some());
        assert!(store.get("b").is_none());
    }

    #[test]
    fn mismatched_projector_is_rejected() {
        let mut s = Session::fit(settings("linear")).unwrap();
        let other = Session::fit(FitSettings {
            data: DatasetSource::Toy { n: 40, d: 6, seed: None },
            ..settings("linear")
        })
        .unwrap();
        s.projector = other.projector;
        assert!(matches!(s.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn corrupt_file_fails_the_store() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.json"), "{").unwrap();
        assert!(SessionStore::open(dir.path()).is_err());
    }
}

//! Shipped scenarios plus any user scenario directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ConfigError, Origin, ScenarioConfig, Solver};

const SHIPPED: [(&str, &str); 5] = [
    (
        "tumor_immune",
        include_str!("../scenarios/tumor_immune.cfg"),
    ),
    (
        "opinion_consensus",
        include_str!("../scenarios/opinion_consensus.cfg"),
    ),
    (
        "wealth_exchange",
        include_str!("../scenarios/wealth_exchange.cfg"),
    ),
    (
        "corridor_evacuation",
        include_str!("../scenarios/corridor_evacuation.cfg"),
    ),
    (
        "two_state_toy",
        include_str!("../scenarios/two_state_toy.cfg"),
    ),
];

const MAPS: [(&str, &str); 1] = [("corridor.map", include_str!("../scenarios/corridor.map"))];

pub fn builtin_map(name: &str) -> Option<&'static str> {
    MAPS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Raw text of a shipped scenario.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn builtin(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let (name, text) = SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ConfigError::Unknown(name.to_string()))?;
    ScenarioConfig::parse(text, &Origin::Builtin(name))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub solver: Option<Solver>,
    pub description: String,
    pub source: Source,
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    dirs: Vec<PathBuf>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a directory whose `*.cfg` files register under their file stem.
    /// Later directories shadow earlier ones, and all shadow the shipped set.
    pub fn with_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dirs.push(dir.into());
        self
    }

    fn user_files(&self) -> Result<BTreeMap<String, PathBuf>, ConfigError> {
        let mut found = BTreeMap::new();
        for dir in &self.dirs {
            let entries = fs::read_dir(dir).map_err(|source| ConfigError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
                .collect();
            paths.sort();
            for p in paths {
                if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                    found.insert(stem.to_string(), p);
                }
            }
        }
        Ok(found)
    }

    /// Every registered scenario sorted by name. User files that fail to
    /// load are listed with the error as their description.
    pub fn list(&self) -> Result<Vec<Entry>, ConfigError> {
        let mut all: BTreeMap<String, Entry> = BTreeMap::new();
        for (name, _) in SHIPPED {
            let cfg = builtin(name)?;
            all.insert(
                name.to_string(),
                Entry {
                    name: name.to_string(),
                    solver: Some(cfg.scenario.solver),
                    description: cfg.scenario.description,
                    source: Source::Builtin,
                },
            );
        }
        for (name, path) in self.user_files()? {
            let entry = match ScenarioConfig::load(&path) {
                Ok(cfg) => Entry {
                    name: name.clone(),
                    solver: Some(cfg.scenario.solver),
                    description: cfg.scenario.description,
                    source: Source::File(path),
                },
                Err(e) => Entry {
                    name: name.clone(),
                    solver: None,
                    description: format!("invalid: {e}"),
                    source: Source::File(path),
                },
            };
            all.insert(name, entry);
        }
        Ok(all.into_values().collect())
    }

    /// An existing file path, else a user scenario name, else a shipped one.
    pub fn resolve(&self, reference: &str) -> Result<ScenarioConfig, ConfigError> {
        let path = Path::new(reference);
        if path.is_file() {
            return ScenarioConfig::load(path);
        }
        if let Some(p) = self.user_files()?.get(reference) {
            return ScenarioConfig::load(p);
        }
        builtin(reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_registry_lists_the_shipped_five() {
        let names: Vec<String> = Registry::new()
            .list()
            .unwrap()
            .into_iter()
            .map(|e| e.name)
            .collect();
        assert_eq!(
            names,
            [
                "corridor_evacuation",
                "opinion_consensus",
                "tumor_immune",
                "two_state_toy",
                "wealth_exchange"
            ]
        );
    }

    #[test]
    fn shipped_scenarios_load_and_name_themselves() {
        for (name, _) in SHIPPED {
            let cfg = builtin(name).unwrap();
            assert_eq!(cfg.scenario.name, name);
            assert!(!cfg.scenario.description.is_empty());
        }
    }

    #[test]
    fn user_directory_extends_the_listing() {
        let dir = tempfile::tempdir().unwrap();
        let text = builtin_text("two_state_toy")
            .unwrap()
            .replace("two_state_toy", "mine");
        fs::write(dir.path().join("mine.cfg"), text).unwrap();
        fs::write(dir.path().join("broken.cfg"), "[scenario]\nname = 1\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let reg = Registry::new().with_dir(dir.path());
        let list = reg.list().unwrap();
        assert_eq!(list.len(), 7);
        let broken = list.iter().find(|e| e.name == "broken").unwrap();
        assert!(broken.solver.is_none() && broken.description.starts_with("invalid"));
        assert_eq!(reg.resolve("mine").unwrap().scenario.name, "mine");
        assert!(matches!(
            reg.resolve("nothing"),
            Err(ConfigError::Unknown(_))
        ));
    }
}

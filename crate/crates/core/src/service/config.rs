use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::Thresholds;
use crate::parse::DEFAULT_LLM_MARKERS;
use crate::sources::{SearchPlan, SourcesConfig};

pub const ENV_CONTACT: &str = "CITEVERIFY_CONTACT";
pub const ENV_CACHE_DIR: &str = "CITEVERIFY_CACHE_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("a contact identifier is required for online runs (set `contact`, --contact or {ENV_CONTACT})")]
    MissingContact,
    #[error("no input paths given")]
    NoInputs,
    #[error("threshold `{0}` must lie in [0, 1] with rephrase <= minor")]
    BadThresholds(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Paper files, or directories of `.pdf` / `.txt` papers.
    pub inputs: Vec<PathBuf>,
    /// Defaults to the name of the first input.
    pub corpus_id: Option<String>,
    /// Parent directory for run directories.
    pub out_dir: PathBuf,
    pub run_id: Option<String>,
    /// No network: cache and recorded fixtures only.
    pub offline: bool,
    pub cache_dir: Option<PathBuf>,
    /// Recorded aggregator exchanges to replay.
    pub fixtures_dir: Option<PathBuf>,
    /// Write every live exchange to this file.
    pub record_to: Option<PathBuf>,
    pub contact: Option<String>,
    #[serde(skip_serializing)]
    pub anonymize_salt: Option<String>,
    pub thresholds: Thresholds,
    pub plan: SearchPlan,
    pub sources: SourcesConfig,
    /// Replacement grammar table (TOML).
    pub grammar_path: Option<PathBuf>,
    pub llm_markers: Vec<String>,
    /// Worker threads across papers; 0 picks one per core.
    pub workers: usize,
    pub debug_artifacts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            corpus_id: None,
            out_dir: PathBuf::from("runs"),
            run_id: None,
            offline: false,
            cache_dir: None,
            fixtures_dir: None,
            record_to: None,
            contact: None,
            anonymize_salt: None,
            thresholds: Thresholds::default(),
            plan: SearchPlan::default(),
            sources: SourcesConfig::default(),
            grammar_path: None,
            llm_markers: DEFAULT_LLM_MARKERS.iter().map(|s| s.to_string()).collect(),
            workers: 0,
            debug_artifacts: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Toml { path: path.to_owned(), source })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml_str(&text, path)
    }

    /// Fills contact and cache dir from the environment when the config leaves them unset.
    pub fn apply_env(&mut self) {
        self.apply_env_from(|k| std::env::var(k).ok());
    }

    pub fn apply_env_from(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(c) = get(ENV_CONTACT).filter(|c| !c.trim().is_empty()) {
            self.contact = Some(c);
        }
        if let Some(d) = get(ENV_CACHE_DIR).filter(|d| !d.trim().is_empty()) {
            self.cache_dir = Some(PathBuf::from(d));
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.inputs.is_empty() {
            return Err(ConfigError::NoInputs);
        }
        if !self.offline && self.contact.as_deref().is_none_or(|c| c.trim().is_empty()) {
            return Err(ConfigError::MissingContact);
        }
        let th = &self.thresholds;
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(th.minor) {
            return Err(ConfigError::BadThresholds("minor"));
        }
        if !unit(th.rephrase) || th.rephrase > th.minor {
            return Err(ConfigError::BadThresholds("rephrase"));
        }
        Ok(())
    }

    /// Source settings with run-level overrides folded in.
    pub fn effective_sources(&self) -> SourcesConfig {
        let mut s = self.sources.clone();
        s.contact = self.contact.clone();
        if self.offline {
            s.serve_stale = true;
        }
        s
    }
}

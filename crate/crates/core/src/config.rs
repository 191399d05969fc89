//! TOML configuration. Every key is optional; missing keys take defaults.
//!
//! ```toml
//! [service]
//! port = 8080
//! journal_path = "stories.jsonl"
//!
//! [cluster]
//! theta_hac = 0.75
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cache::CacheConfig;
use crate::cluster::{DEFAULT_ONLINE_WINDOW_SECONDS, DEFAULT_THETA_HAC, DEFAULT_THETA_ONLINE};
use crate::embed::EmbedderConfig;
use crate::index::{DEFAULT_K_FACETS, DEFAULT_N_STORIES};
use crate::themes::ThemeConfig;
use crate::Error;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Story journal, replayed at startup and appended on ingest.
    pub journal_path: Option<PathBuf>,
    pub feedback_path: Option<PathBuf>,
    pub popular_keys_path: Option<PathBuf>,
    pub ranker_path: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            journal_path: None,
            feedback_path: None,
            popular_keys_path: None,
            ranker_path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub theta_online: f64,
    pub theta_hac: f64,
    pub online_window_seconds: i64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            theta_online: DEFAULT_THETA_ONLINE,
            theta_hac: DEFAULT_THETA_HAC,
            online_window_seconds: DEFAULT_ONLINE_WINDOW_SECONDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub k_facets: usize,
    pub n_stories: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { k_facets: DEFAULT_K_FACETS, n_stories: DEFAULT_N_STORIES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub service: ServiceConfig,
    pub embed: EmbedderConfig,
    pub cluster: ClusterConfig,
    pub index: IndexConfig,
    pub themes: ThemeConfig,
    pub cache: CacheConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Loads `path` when given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, Error> {
        path.map_or_else(|| Ok(Config::default()), Self::load)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.embed.validate()?;
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("cluster.theta_online", self.cluster.theta_online)?;
        unit("cluster.theta_hac", self.cluster.theta_hac)?;
        if self.cluster.online_window_seconds <= 0 {
            return Err(Error::Config("cluster.online_window_seconds must be positive".into()));
        }
        if self.index.k_facets == 0 || self.index.n_stories == 0 {
            return Err(Error::Config("index.k_facets and index.n_stories must be positive".into()));
        }
        if self.themes.max_themes == 0 || self.themes.p_subclusters == 0 {
            return Err(Error::Config("themes.max_themes and themes.p_subclusters must be positive".into()));
        }
        self.cache.validate().map_err(Error::Config)
    }
}

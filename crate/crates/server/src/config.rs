//! Service configuration: built-in defaults, overridden by a TOML file,
//! overridden in turn by `SIMILE_*` environment variables.
//!
//! | key            | environment             | default            |
//! |----------------|-------------------------|--------------------|
//! | `bind`         | `SIMILE_BIND`           | `127.0.0.1:8080`   |
//! | `store`        | `SIMILE_STORE`          | `similes.store`    |
//! | `credential`   | `SIMILE_CREDENTIAL`     | none (login off)   |
//! | `rate_limit`   | `SIMILE_RATE_LIMIT`     | `30` adds/min/IP   |
//! | `threshold`    | `SIMILE_THRESHOLD`      | `0.6`              |
//! | `token_ttl_secs` | `SIMILE_TOKEN_TTL_SECS` | `28800`          |
//!
//! A `rate_limit` of 0 disables the limiter.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use simile_core::dedup::DEFAULT_THRESHOLD;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("environment variable {var}: cannot parse {value:?}")]
    Env { var: &'static str, value: String },
    #[error("threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub bind: String,
    pub store: PathBuf,
    /// Curator password. Without one, every curator endpoint answers 401.
    pub credential: Option<String>,
    /// Public additions allowed per client IP per minute.
    pub rate_limit: u32,
    pub threshold: f64,
    pub token_ttl_secs: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: "127.0.0.1:8080".into(),
            store: PathBuf::from("similes.store"),
            credential: None,
            rate_limit: 30,
            threshold: DEFAULT_THRESHOLD,
            token_ttl_secs: 8 * 60 * 60,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bind: Option<String>,
    store: Option<PathBuf>,
    credential: Option<String>,
    rate_limit: Option<u32>,
    threshold: Option<f64>,
    token_ttl_secs: Option<u64>,
}

fn env_parse<T: FromStr>(env: &dyn Fn(&str) -> Option<String>, var: &'static str) -> Result<Option<T>, ConfigError> {
    match env(var) {
        None => Ok(None),
        Some(value) => value
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Env { var, value }),
    }
}

impl Config {
    /// Resolves the configuration from an optional file and an environment
    /// lookup (`std::env::var(..).ok()` in production).
    pub fn resolve(file: Option<&Path>, env: &dyn Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: path.to_path_buf(),
                source,
            })?;
            let f: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            c.bind = f.bind.unwrap_or(c.bind);
            c.store = f.store.unwrap_or(c.store);
            c.credential = f.credential.or(c.credential);
            c.rate_limit = f.rate_limit.unwrap_or(c.rate_limit);
            c.threshold = f.threshold.unwrap_or(c.threshold);
            c.token_ttl_secs = f.token_ttl_secs.unwrap_or(c.token_ttl_secs);
        }
        if let Some(v) = env("SIMILE_BIND") {
            c.bind = v;
        }
        if let Some(v) = env("SIMILE_STORE") {
            c.store = PathBuf::from(v);
        }
        if let Some(v) = env("SIMILE_CREDENTIAL") {
            c.credential = Some(v);
        }
        c.rate_limit = env_parse(env, "SIMILE_RATE_LIMIT")?.unwrap_or(c.rate_limit);
        c.threshold = env_parse(env, "SIMILE_THRESHOLD")?.unwrap_or(c.threshold);
        c.token_ttl_secs = env_parse(env, "SIMILE_TOKEN_TTL_SECS")?.unwrap_or(c.token_ttl_secs);
        if !(c.threshold > 0.0 && c.threshold <= 1.0) {
            return Err(ConfigError::Threshold(c.threshold));
        }
        if c.credential.as_deref().is_some_and(str::is_empty) {
            c.credential = None;
        }
        Ok(c)
    }

    /// Reads overrides from the process environment.
    pub fn from_env(file: Option<&Path>) -> Result<Self, ConfigError> {
        Config::resolve(file, &|k| std::env::var(k).ok())
    }
}

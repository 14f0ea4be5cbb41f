use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde_json::Value;

use crate::args::GlobalArgs;

pub const SEED_ENV: &str = "CRF_ATLAS_SEED";

/// Bad flags or configuration; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Resolved global options plus the optional config document.
#[derive(Debug)]
pub struct Settings {
    pub seed: u64,
    pub workers: Option<usize>,
    pub no_timestamp: bool,
    pub dorf: Option<PathBuf>,
    pub assets: Option<PathBuf>,
    config: Value,
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(value_text).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn parse_text<T: FromStr>(text: &str, key: &str) -> anyhow::Result<T>
where
    T::Err: fmt::Display,
{
    text.parse()
        .map_err(|e| usage(format!("invalid value '{text}' for {key}: {e}")))
}

impl Settings {
    pub fn load(global: &GlobalArgs) -> anyhow::Result<Self> {
        let config = match &global.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                let value: Value =
                    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
                if !value.is_object() {
                    return Err(usage("config file must hold a JSON object"));
                }
                value
            }
            None => Value::Object(Default::default()),
        };
        let mut settings = Self {
            seed: 0,
            workers: None,
            no_timestamp: false,
            dorf: None,
            assets: None,
            config,
        };
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(parse_text::<u64>(s.trim(), SEED_ENV)?),
            _ => None,
        };
        settings.seed = match global.seed {
            Some(s) => s,
            None => match settings.lookup(None, "seed") {
                Some(text) => parse_text(&text, "seed")?,
                None => env_seed.unwrap_or(0),
            },
        };
        settings.workers = settings.get(None, "workers", global.workers)?;
        if settings.workers == Some(0) {
            return Err(usage("--workers must be at least 1"));
        }
        settings.no_timestamp = settings.flag(None, "no_timestamp", global.no_timestamp)?;
        settings.dorf = settings.get(None, "dorf", global.dorf.clone())?;
        settings.assets = settings.get(None, "assets", global.assets.clone())?;
        Ok(settings)
    }

    /// Config text for `key`, looked up in the command section first and
    /// then at the top level. Dashes and underscores are interchangeable.
    fn lookup(&self, section: Option<&str>, key: &str) -> Option<String> {
        let keys = [key.replace('-', "_"), key.replace('_', "-")];
        let find = |obj: &Value| {
            keys.iter()
                .find_map(|k| obj.get(k))
                .filter(|v| !v.is_null())
                .map(value_text)
        };
        section
            .and_then(|s| self.config.get(s))
            .and_then(find)
            .or_else(|| find(&self.config))
    }

    /// Flag value, else config value, else `None`.
    pub fn get<T: FromStr>(&self, section: Option<&str>, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.lookup(section, key).map(|t| parse_text(&t, key)).transpose()
    }

    /// Flag value, else config value, else `default`.
    pub fn pick<T: FromStr>(&self, section: &str, key: &str, flag: Option<T>, default: T) -> anyhow::Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(Some(section), key, flag)?.unwrap_or(default))
    }

    /// Boolean switch: set on the command line, or `true` in the config.
    pub fn flag(&self, section: Option<&str>, key: &str, flag: bool) -> anyhow::Result<bool> {
        if flag {
            return Ok(true);
        }
        Ok(self.get(section, key, None::<bool>)?.unwrap_or(false))
    }

    /// Seconds since the epoch, or `None` under `--no-timestamp`.
    pub fn timestamp(&self) -> Option<u64> {
        if self.no_timestamp {
            None
        } else {
            SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
        }
    }

    /// Wall time in milliseconds, zeroed under `--no-timestamp`.
    pub fn wall_ms(&self, ms: f64) -> f64 {
        if self.no_timestamp {
            0.0
        } else {
            ms
        }
    }
}

/// Comma-separated list of values.
pub fn parse_list<T: FromStr>(text: &str, key: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_text(s, key))
        .collect::<anyhow::Result<_>>()?;
    if items.is_empty() {
        return Err(usage(format!("{key} needs at least one value")));
    }
    Ok(items)
}

pub fn write_file(path: &std::path::Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(config: Value) -> Settings {
        Settings {
            seed: 0,
            workers: None,
            no_timestamp: false,
            dorf: None,
            assets: None,
            config,
        }
    }

    #[test]
    fn flags_beat_config_beats_default() {
        let s = settings(serde_json::json!({"epochs": 5, "train": {"epochs": 7, "arch": [50, 20]}}));
        assert_eq!(s.pick("train", "epochs", Some(3usize), 1).unwrap(), 3);
        assert_eq!(s.pick("train", "epochs", None, 1usize).unwrap(), 7);
        assert_eq!(s.pick("nas", "epochs", None, 1usize).unwrap(), 5);
        assert_eq!(s.pick("nas", "folds", None, 3usize).unwrap(), 3);
        assert_eq!(s.pick("train", "arch", None, String::new()).unwrap(), "50,20");
    }

    #[test]
    fn bad_config_value_is_usage_error() {
        let s = settings(serde_json::json!({"train": {"epochs": "many"}}));
        let err = s.pick("train", "epochs", None, 1usize).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("3, 6,12", "noccp").unwrap(), vec![3, 6, 12]);
        assert!(parse_list::<usize>("", "noccp").is_err());
        assert!(parse_list::<usize>("3,x", "noccp").is_err());
    }
}

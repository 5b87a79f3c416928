//! Flat `key = value` config files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const CACHE_ENV: &str = "IDEAL_LIMITS_CACHE";

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg =
            Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    /// Blank lines and lines starting with `#` are ignored; keys accept `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            values.insert(key, v.trim().trim_matches('"').to_string());
        }
        Ok(ConfigFile { path: None, values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let origin = self
                    .path
                    .as_ref()
                    .map_or("config".to_string(), |p| p.display().to_string());
                anyhow::anyhow!("{origin}: bad value for `{key}`: {e}")
            }),
        }
    }

    /// Flag if given, else the config entry, else `default`.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => Some(v),
            None => self.get(key)?,
        })
    }

    /// Flag, then the environment override, then the config file.
    pub fn cache_dir(&self, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        if flag.is_some() {
            return Ok(flag);
        }
        if let Some(env) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Ok(Some(PathBuf::from(env)));
        }
        self.get("cache-dir")
    }
}

/// Comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{t}` in list `{s}`"))
        })
        .collect()
}

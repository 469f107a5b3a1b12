use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use ema_core::time::UtcOffset;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    pub database: PathBuf,
    /// Offset that splits days for notification windows.
    pub timezone: UtcOffset,
    /// File with one tracked package name per line; `#` starts a comment.
    pub tracked_packages: Option<PathBuf>,
    pub admin_token: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            database: "ema.sqlite3".into(),
            timezone: UtcOffset::UTC,
            tracked_packages: None,
            admin_token: None,
        }
    }
}

impl Config {
    /// Reads `path`, or returns the defaults when no path is given.
    /// Relative paths inside the file resolve against its directory.
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let mut config: Config = toml::from_str(&text)
            .map_err(|e| Failure::invalid("E_CONFIG", format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.database = base.join(&config.database);
        config.tracked_packages = config.tracked_packages.map(|p| base.join(p));
        Ok(config)
    }

    pub fn tracked(&self) -> Result<Option<BTreeSet<String>>, Failure> {
        let Some(path) = &self.tracked_packages else { return Ok(None) };
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        Ok(Some(parse_package_list(&text)))
    }
}

pub fn parse_package_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "OCSKIT_SEED";

/// `key = value` lines; `#` starts a comment, values may be quoted.
/// Underscores in keys are read as dashes.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected `key = value`", i + 1)));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Merges command-line values over config-file values over defaults, and
/// remembers every resolved setting for the output header.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    pub resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(command: &str, mut file: BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(c) = file.remove("command") {
            if c != command {
                return Err(CliError::Usage(format!("config is for `{c}`, not `{command}`")));
            }
        }
        Ok(Resolver { file, used: BTreeSet::new(), resolved: vec![("command".into(), command.into())] })
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
            None => Ok(None),
        }
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>, CliError> {
        let file = self.file_value(key)?;
        let value = cli.or(file);
        if let Some(v) = &value {
            self.resolved.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T, CliError> {
        Ok(match self.optional(key, cli)? {
            Some(v) => v,
            None => {
                self.resolved.push((key.to_string(), default.to_string()));
                default
            }
        })
    }

    pub fn flag(&mut self, key: &str, cli: bool) -> Result<bool, CliError> {
        let file: Option<bool> = self.file_value(key)?;
        let value = cli || file.unwrap_or(false);
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Seed from the command line, the config file, `OCSKIT_SEED`, or 0.
    pub fn seed(&mut self, cli: Option<u64>) -> Result<u64, CliError> {
        let file = self.file_value("seed")?;
        let env = match std::env::var(SEED_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}: cannot parse `{v}`")))?),
            Err(_) => None,
        };
        let seed = cli.or(file).or(env).unwrap_or(0);
        self.resolved.push(("seed".into(), seed.to_string()));
        Ok(seed)
    }

    /// Rejects config keys the command never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self.file.keys().filter(|k| !self.used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }
}

//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;

use super::CliError;

/// Keys a config file may set; they match the long flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "design",
    "L",
    "delta",
    "r1",
    "r2",
    "d-ar",
    "d-rb",
    "gammaB-db",
    "gammaE-db",
    "rt",
    "q",
    "method",
    "metric",
    "samples",
    "seed",
    "tol",
    "threads",
    "out",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected 'key = value'", no + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{key}'",
                    no + 1
                )));
            }
            if value.is_empty() {
                return Err(CliError::Usage(format!(
                    "config line {}: empty value for '{key}'",
                    no + 1
                )));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_spacing() {
        let c = Config::parse("# defaults\n\nL = 64\ngammaE-db=-20 # trailing\n").unwrap();
        assert_eq!(c.get("L"), Some("64"));
        assert_eq!(c.get("gammaE-db"), Some("-20"));
        assert_eq!(c.get("rt"), None);
    }

    #[test]
    fn unknown_key_is_a_usage_error() {
        assert!(matches!(
            Config::parse("colour = red"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(Config::parse("L 64"), Err(CliError::Usage(_))));
    }
}

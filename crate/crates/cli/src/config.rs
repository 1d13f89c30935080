//! Plain-text job configuration: one `key = value` per line, `#` comments,
//! a fixed key vocabulary. Values stay as strings here; the subcommand that
//! consumes a key parses it with the same parser as the matching flag.

use std::collections::BTreeMap;

use torsion_meet_core::error::{Error, Result};

/// Keys understood by the grammar; anything else is rejected.
pub const KEYS: &[&str] = &[
    "curve",
    "curve2",
    "map",
    "map2",
    "level",
    "level2",
    "cumulative",
    "lambdas",
    "mus",
    "levels",
    "generators",
    "generators2",
    "radius",
    "radius2",
    "targets",
    "tolerance",
    "radius_factor",
    "brute",
    "seed",
];

#[derive(Clone, Debug, Default)]
pub struct JobConfig {
    entries: BTreeMap<String, String>,
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<JobConfig> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "config line {lineno}: expected `key = value`, got `{line}`"
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::invalid(format!("config line {lineno}: unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(Error::invalid(format!("config line {lineno}: empty value for `{key}`")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::invalid(format!("config line {lineno}: duplicate key `{key}`")));
            }
        }
        Ok(JobConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unlisted config key `{key}`");
        self.entries.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_comments_and_blanks() {
        let cfg = JobConfig::parse("# grid\ncurve = legendre:2\n\nmap = x\nlevel=3\n").unwrap();
        assert_eq!(cfg.get("curve"), Some("legendre:2"));
        assert_eq!(cfg.get("map"), Some("x"));
        assert_eq!(cfg.get("level"), Some("3"));
        assert_eq!(cfg.get("mus"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        let unknown = JobConfig::parse("flavor = sour\n").unwrap_err();
        assert!(unknown.to_string().contains("unknown key `flavor`"));
        let dup = JobConfig::parse("map = x\nmap = y/x\n").unwrap_err();
        assert!(dup.to_string().contains("duplicate key `map`"));
        let bare = JobConfig::parse("curve legendre:2\n").unwrap_err();
        assert!(bare.to_string().contains("expected `key = value`"));
        let empty = JobConfig::parse("map =\n").unwrap_err();
        assert!(empty.to_string().contains("empty value"));
    }
}

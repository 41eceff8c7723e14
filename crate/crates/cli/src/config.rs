//! Flat `key = value` run files.
//!
//! Keys are the long flag names of the chosen subcommand, without dashes.
//! File entries are spliced into argv directly after the subcommand, so any
//! flag given on the command line overrides them.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

/// Parses a run file into `--key value` tokens, rejecting keys outside
/// `allowed`.
pub fn parse(text: &str, allowed: &HashSet<String>, origin: &str) -> Result<Vec<String>, ConfigError> {
    let mut tokens = Vec::new();
    let mut seen = HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!("{origin}:{}: expected key = value", n + 1)));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key == "config" || !allowed.contains(key) {
            return Err(ConfigError(format!("{origin}:{}: unknown key {key:?}", n + 1)));
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError(format!("{origin}:{}: key {key:?} given twice", n + 1)));
        }
        if value.is_empty() {
            return Err(ConfigError(format!("{origin}:{}: empty value for {key:?}", n + 1)));
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.to_string());
    }
    Ok(tokens)
}

/// Value of `--config` in `args`, if present.
pub fn find_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

pub fn load(path: &Path, allowed: &HashSet<String>) -> Result<Vec<String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, allowed, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn allowed() -> HashSet<String> {
        ["L", "M", "seed"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let t = parse("# run\nL = 6\n\n--M=100\n", &allowed(), "f").unwrap();
        assert_eq!(t, ["--L", "6", "--M", "100"]);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(parse("N = 3", &allowed(), "f").is_err());
        assert!(parse("L 3", &allowed(), "f").is_err());
        assert!(parse("L = 3\nL = 4", &allowed(), "f").is_err());
        assert!(parse("config = x", &allowed(), "f").is_err());
        assert!(parse("L =", &allowed(), "f").is_err());
    }

    #[test]
    fn finds_config_flag() {
        let a: Vec<String> = ["x", "--config", "p", "--L", "3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(find_path(&a).as_deref(), Some("p"));
        let b: Vec<String> = ["x", "--config=q"].iter().map(|s| s.to_string()).collect();
        assert_eq!(find_path(&b).as_deref(), Some("q"));
        assert_eq!(find_path(&a[3..]), None);
    }
}

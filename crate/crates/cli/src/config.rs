//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Keys not consumed by any option.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.values.keys().map(String::as_str).filter(|k| !known.contains(k)).collect()
    }

    /// Fills `slot` from key `key` when the command line left it unset.
    pub fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_none() {
            if let Some(raw) = self.get(key) {
                let v = raw
                    .parse()
                    .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{raw}'")))?;
                *slot = Some(v);
            }
        }
        Ok(())
    }

    pub fn fill_flag(&self, slot: &mut bool, key: &str) -> Result<(), CliError> {
        if !*slot {
            let mut v = None;
            self.fill::<bool>(&mut v, key)?;
            *slot = v.unwrap_or(false);
        }
        Ok(())
    }
}

impl FromStr for ConfigFile {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_fills() {
        let cfg: ConfigFile = "# comment\np = 0.3\nmax_iters=10 # trailing\n\n".parse().unwrap();
        let mut p: Option<f64> = None;
        cfg.fill(&mut p, "p").unwrap();
        assert_eq!(p, Some(0.3));
        let mut iters: Option<usize> = Some(5);
        cfg.fill(&mut iters, "max-iters").unwrap();
        assert_eq!(iters, Some(5));
        assert_eq!(cfg.unknown_keys(&["p"]), vec!["max-iters"]);
        assert!("novalue".parse::<ConfigFile>().is_err());
        let mut bad: Option<f64> = None;
        assert!("p = x".parse::<ConfigFile>().unwrap().fill(&mut bad, "p").is_err());
    }
}

//! Plain `key=value` config files. Flags given on the command line win over
//! file entries.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and lines starting with `#` are skipped. Keys may use
    /// dashes or underscores interchangeably.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Fills `slot` from the file when the flag was not given.
    pub fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_some() {
            return Ok(());
        }
        if let Some(raw) = self.get(key) {
            let value = raw
                .parse()
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {raw:?}")))?;
            *slot = Some(value);
        }
        Ok(())
    }
}

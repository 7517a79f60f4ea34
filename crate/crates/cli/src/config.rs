//! Flat key=value configuration files and flag merging.
//!
//! A config file mirrors the subcommand's long flags (`q-min = -25`); a
//! flag given on the command line overrides the file. The merged result is
//! rendered canonically, hashed into the run manifest and optionally
//! dumped back to disk, from where it reproduces the run bit for bit.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::errors::{CliError, CliResult};

/// Parsed config file contents. Keys are long flag names without dashes.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("config file {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "config file {} line {}: expected 'key = value'",
                    path.display(),
                    idx + 1
                ))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }
}

/// Resolves each configuration key from flag, file or default (in that
/// order) and records the effective value.
pub struct Merger {
    file: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    effective: BTreeMap<String, String>,
}

impl Merger {
    pub fn new(file: FileConfig) -> Self {
        Merger {
            file: file.map,
            consumed: BTreeSet::new(),
            effective: BTreeMap::new(),
        }
    }

    fn file_value(&mut self, key: &str) -> Option<String> {
        self.consumed.insert(key.to_string());
        self.file.get(key).cloned()
    }

    fn record(&mut self, key: &str, value: String) {
        self.effective.insert(key.to_string(), value);
    }

    fn parse_str<T: FromStr>(key: &str, raw: &str) -> CliResult<T> {
        raw.parse()
            .map_err(|_| CliError::config(format!("bad value for {key}: {raw:?}")))
    }

    /// Required number-like value with a default; `T`'s `Display` is the
    /// canonical rendering.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + ToString + Copy,
    {
        let resolved = match (flag, self.file_value(key)) {
            (Some(v), _) => v,
            (None, Some(raw)) => Self::parse_str(key, &raw)?,
            (None, None) => default,
        };
        self.record(key, resolved.to_string());
        Ok(resolved)
    }

    /// Optional value without a default; recorded only when present.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + ToString + Copy,
    {
        let resolved = match (flag, self.file_value(key)) {
            (Some(v), _) => Some(v),
            (None, Some(raw)) => Some(Self::parse_str::<T>(key, &raw)?),
            (None, None) => None,
        };
        if let Some(v) = resolved {
            self.record(key, v.to_string());
        }
        Ok(resolved)
    }

    /// Free-form string (generator kind, fill policy, scale list).
    pub fn string(&mut self, key: &str, flag: Option<String>, default: &str) -> CliResult<String> {
        let resolved = flag
            .or_else(|| self.file_value(key))
            .unwrap_or_else(|| default.to_string());
        self.record(key, resolved.clone());
        Ok(resolved)
    }

    pub fn optional_string(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let resolved = flag.or_else(|| self.file_value(key));
        if let Some(v) = &resolved {
            self.record(key, v.clone());
        }
        resolved
    }

    /// Boolean switch: a present flag wins, otherwise the file value.
    pub fn switch(&mut self, key: &str, flag_present: bool) -> CliResult<bool> {
        let resolved = if flag_present {
            true
        } else {
            match self.file_value(key) {
                Some(raw) => Self::parse_str::<bool>(key, &raw)?,
                None => false,
            }
        };
        self.record(key, resolved.to_string());
        Ok(resolved)
    }

    /// Duration in seconds, accepting `s`/`h`/`d` suffixes.
    pub fn duration(
        &mut self,
        key: &str,
        flag: Option<String>,
        default_secs: u64,
    ) -> CliResult<u64> {
        let secs = match flag.or_else(|| self.file_value(key)) {
            Some(raw) => parse_duration(key, &raw)?,
            None => default_secs,
        };
        self.record(key, render_duration(secs));
        Ok(secs)
    }

    pub fn optional_duration(&mut self, key: &str, flag: Option<String>) -> CliResult<Option<u64>> {
        let secs = match flag.or_else(|| self.file_value(key)) {
            Some(raw) => Some(parse_duration(key, &raw)?),
            None => None,
        };
        if let Some(s) = secs {
            self.record(key, render_duration(s));
        }
        Ok(secs)
    }

    /// The effective configuration; errors on config-file keys this
    /// subcommand does not know.
    pub fn finish(self) -> CliResult<BTreeMap<String, String>> {
        for key in self.file.keys() {
            if !self.consumed.contains(key) {
                return Err(CliError::config(format!(
                    "config file key {key:?} is not recognized by this subcommand"
                )));
            }
        }
        Ok(self.effective)
    }
}

/// `"90s"`, `"6h"`, `"365d"` or a bare number of seconds.
pub fn parse_duration(key: &str, raw: &str) -> CliResult<u64> {
    let raw = raw.trim();
    let (digits, multiplier) = match raw.as_bytes().last() {
        Some(b's') => (&raw[..raw.len() - 1], 1),
        Some(b'h') => (&raw[..raw.len() - 1], 3_600),
        Some(b'd') => (&raw[..raw.len() - 1], 86_400),
        _ => (raw, 1),
    };
    let n: u64 = digits
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad duration for {key}: {raw:?}")))?;
    if n == 0 {
        return Err(CliError::config(format!("{key}: duration must be positive")));
    }
    Ok(n * multiplier)
}

pub fn render_duration(secs: u64) -> String {
    if secs.is_multiple_of(86_400) {
        format!("{}d", secs / 86_400)
    } else if secs.is_multiple_of(3_600) {
        format!("{}h", secs / 3_600)
    } else {
        format!("{secs}s")
    }
}

/// Serialize the effective configuration as the flat file format.
pub fn render_config(effective: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in effective {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

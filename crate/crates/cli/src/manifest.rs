//! Run manifests: a JSON sidecar `<output>.manifest.json` recording the
//! tool version, the effective configuration and its digest, and the
//! content digests of every input. Identical config hash and input
//! digests imply bit-identical outputs.

use std::collections::BTreeMap;

use chrono::{SecondsFormat, Utc};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::render_config;
use crate::errors::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Manifest {
    subcommand: String,
    started: String,
    inputs: Vec<(String, String)>,
    stats: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            started: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            inputs: Vec::new(),
            stats: serde_json::Map::new(),
        }
    }

    pub fn record_input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs.push((label.to_string(), sha256_hex(bytes)));
    }

    pub fn stat(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.stats.insert(key.to_string(), value.into());
    }

    /// Write the sidecar next to `primary_out`; a `-` output has nowhere
    /// to put one, so it is skipped.
    pub fn write(self, primary_out: &str, effective: &BTreeMap<String, String>) -> CliResult<()> {
        if primary_out == "-" {
            return Ok(());
        }
        let config_hash = sha256_hex(render_config(effective).as_bytes());
        let inputs: serde_json::Map<String, serde_json::Value> = self
            .inputs
            .into_iter()
            .map(|(label, digest)| (label, json!(format!("sha256:{digest}"))))
            .collect();
        let doc = json!({
            "tool": "mfdfa",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "started": self.started,
            "finished": Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            "config_hash": format!("sha256:{config_hash}"),
            "effective_config": effective,
            "input_digests": inputs,
            "stats": self.stats,
        });
        let path = format!("{primary_out}.manifest.json");
        std::fs::write(&path, format!("{doc:#}\n"))
            .map_err(|e| CliError::io(format!("writing manifest {path}: {e}")))?;
        Ok(())
    }
}

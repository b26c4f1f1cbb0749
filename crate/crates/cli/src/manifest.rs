use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use sailswarm::SimConfig;

/// Provenance record written next to sweep outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    pub config: SimConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: &SimConfig, seeds: Vec<u64>, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_digest: config_digest(config),
            seeds,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// SHA-256 of the canonical config encoding, hex.
pub fn config_digest(config: &SimConfig) -> String {
    hex::encode(Sha256::digest(config.canonical_json().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_every_field() {
        let a = SimConfig::default();
        let mut b = a.clone();
        assert_eq!(config_digest(&a), config_digest(&b));
        b.flock.luff.k_p = 0.41;
        assert_ne!(config_digest(&a), config_digest(&b));
        let mut c = a.clone();
        c.sweep.first_seed = 2;
        assert_ne!(config_digest(&a), config_digest(&c));
    }
}

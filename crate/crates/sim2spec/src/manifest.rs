//! Provenance block embedded in every JSON output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sim2spec_core::synth::RNG_ALGORITHM;
use sim2spec_core::SpectralConfig;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: SpectralConfig,
    pub config_hash: String,
    pub inputs: Vec<InputDigest>,
    pub tool_version: String,
    pub timestamp: String,
    pub rng: String,
    pub threads: usize,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &SpectralConfig) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            config_hash: config_hash(config),
            inputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            rng: RNG_ALGORITHM.to_string(),
            threads: rayon::current_num_threads(),
        }
    }

    /// Records the digest of a file, or of every regular file in a
    /// directory in name order.
    pub fn with_input(mut self, path: &Path) -> Result<Self> {
        if path.is_dir() {
            let mut files: Vec<_> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for f in files {
                self.inputs.push(digest_entry(&f)?);
            }
        } else {
            self.inputs.push(digest_entry(path)?);
        }
        Ok(self)
    }
}

fn digest_entry(path: &Path) -> Result<InputDigest> {
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: file_digest(path)?,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// SHA-256 of the compact JSON encoding of the configuration. Field order is
/// the declaration order and floats use the shortest round-trip form, so the
/// hash does not depend on platform or locale.
pub fn config_hash(cfg: &SpectralConfig) -> String {
    sha256_hex(&serde_json::to_vec(cfg).expect("configuration serialises"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hash_is_stable() {
        let a = config_hash(&SpectralConfig::default());
        assert_eq!(a, config_hash(&SpectralConfig::default()));
        assert_eq!(a.len(), 64);
        let b = config_hash(&SpectralConfig {
            ridge: 1e-4,
            ..SpectralConfig::default()
        });
        assert_ne!(a, b);
    }

    #[test]
    fn hash_of_known_json() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

//! Calibration files holding `ε_interp` and `δ_flow`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sim2spec_core::bounds::{calibrate, Calibration};
use sim2spec_core::synth::RNG_ALGORITHM;
use sim2spec_core::SpectralConfig;

use crate::error::{Error, Result};
use crate::manifest::{config_hash, RunManifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub eps_interp: f64,
    pub delta_flow: f64,
    pub config_hash: String,
    pub rng: String,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub manifest: RunManifest,
}

impl CalibrationFile {
    pub fn compute(frames: usize, height: usize, width: usize, cfg: &SpectralConfig) -> Result<Self> {
        let c = calibrate(height, width, frames, cfg)?;
        Ok(Self {
            eps_interp: c.eps_interp,
            delta_flow: c.delta_flow,
            config_hash: config_hash(cfg),
            rng: RNG_ALGORITHM.to_string(),
            frames,
            height,
            width,
            manifest: RunManifest::new("calibrate", cfg),
        })
    }

    pub fn constants(&self) -> Calibration {
        Calibration {
            eps_interp: self.eps_interp,
            delta_flow: self.delta_flow,
        }
    }

    /// Whether the constants were computed under `cfg`.
    pub fn matches(&self, cfg: &SpectralConfig) -> bool {
        self.config_hash == config_hash(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        if !(file.eps_interp.is_finite()
            && file.eps_interp >= 0.0
            && file.delta_flow.is_finite()
            && file.delta_flow >= 0.0)
        {
            return Err(Error::format(
                path,
                "calibration constants must be finite and nonnegative",
            ));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

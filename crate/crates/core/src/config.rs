//! Analysis configuration and motion parameter types.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temporal taper applied before the temporal DFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// `h[t] = ½(1 − cos(2πt/(T−1)))`.
    Hann,
    /// All ones.
    Rect,
}

impl WindowKind {
    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Hann => "hann",
            WindowKind::Rect => "rect",
        }
    }
}

impl core::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "rect" => Ok(WindowKind::Rect),
            other => Err(Error::Config(format!("unknown window kind `{other}`"))),
        }
    }
}

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Per-dimension low-pass fraction `ϱ ∈ (0, 1]`.
    pub lowpass_ratio: f64,
    /// Number of concentric rings `N_r`.
    pub rings: usize,
    /// Angular samples `M` of the polar grid.
    pub angular_bins: usize,
    /// Log-radius samples `N_ξ`.
    pub logradius_bins: usize,
    /// Tilted-line / band tolerance `Δ`, in temporal-frequency bins.
    pub band_tolerance: f64,
    /// Ridge penalty `λ`.
    pub ridge: f64,
    /// Numeric stabiliser `ε` (normalisers, Cholesky jitter, ring `ε_stab`).
    pub numeric_eps: f64,
    /// Energy-gate threshold `τ_E` on `E / E_max`.
    pub energy_gate_threshold: f64,
    /// Energy-gate logistic sharpness `f`.
    pub energy_gate_sharpness: f64,
    /// Observability-gate constant `λ_obs` in `m² / (m² + λ_obs)`.
    pub obs_gate: f64,
    /// Softmax temperature `τ` of the adaptive weighting.
    pub softmax_temperature: f64,
    /// Logistic sharpness of the soft ring masks, per ring width.
    pub soft_ring_edge: f64,
    pub window_kind: WindowKind,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            lowpass_ratio: 0.3,
            rings: 20,
            angular_bins: 24,
            logradius_bins: 24,
            band_tolerance: 1.0,
            ridge: 1e-3,
            numeric_eps: 1e-8,
            energy_gate_threshold: 0.10,
            energy_gate_sharpness: 10.0,
            obs_gate: 1.0,
            softmax_temperature: 0.1,
            soft_ring_edge: 20.0,
            window_kind: WindowKind::Hann,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Config(msg));
        if !(self.lowpass_ratio > 0.0 && self.lowpass_ratio <= 1.0) {
            return bad(format!("lowpass_ratio must lie in (0, 1], got {}", self.lowpass_ratio));
        }
        if self.rings < 2 {
            return bad(format!("rings must be >= 2, got {}", self.rings));
        }
        if self.angular_bins < 4 {
            return bad(format!("angular_bins must be >= 4, got {}", self.angular_bins));
        }
        if self.logradius_bins < 4 {
            return bad(format!("logradius_bins must be >= 4, got {}", self.logradius_bins));
        }
        if !(self.band_tolerance >= 1.0) {
            return bad(format!("band_tolerance must be >= 1, got {}", self.band_tolerance));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge must be finite and nonnegative, got {}", self.ridge));
        }
        if !(self.numeric_eps > 0.0) {
            return bad(format!("numeric_eps must be positive, got {}", self.numeric_eps));
        }
        if !(self.softmax_temperature > 0.0) {
            return bad(format!(
                "softmax_temperature must be positive, got {}",
                self.softmax_temperature
            ));
        }
        if !(self.obs_gate >= 0.0) {
            return bad(format!("obs_gate must be nonnegative, got {}", self.obs_gate));
        }
        for (name, v) in [
            ("energy_gate_threshold", self.energy_gate_threshold),
            ("energy_gate_sharpness", self.energy_gate_sharpness),
            ("soft_ring_edge", self.soft_ring_edge),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        Ok(())
    }
}

/// Similarity-motion parameters `θ = [v_x, v_y, Ω, α, b_0]`.
///
/// `v_x`, `v_y` and `b_0` are in frequency-bin units (the plane coefficients);
/// `omega` is in rad/frame and `alpha` in log-scale per frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionEstimate {
    pub v_x: f64,
    pub v_y: f64,
    pub omega: f64,
    pub alpha: f64,
    pub b_0: f64,
}

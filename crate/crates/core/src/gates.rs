//! Energy and observability gating.
//!
//! Every fit weight is `w_i = g_i · E_i / E_max` with
//! `g_i = g_E(E_i) · g_obs(h_i)`, where `h_i` is the harmonic index (`m` or
//! `ν`) of a harmonic-domain sample and `g_obs ≡ 1` for Cartesian samples.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::config::SpectralConfig;
use crate::error::{Error, Result};
use crate::math::sigmoid;

/// `σ(f·(E/E_max − τ_E))`.
#[inline]
pub fn energy_gate(rel_energy: f64, threshold: f64, sharpness: f64) -> f64 {
    sigmoid(sharpness * (rel_energy - threshold))
}

/// `m² / (m² + λ_obs)`; identically 1 when `λ_obs = 0` and `m ≠ 0`.
#[inline]
pub fn observability_gate(harmonic: i64, lambda_obs: f64) -> f64 {
    let m2 = (harmonic * harmonic) as f64;
    if m2 == 0.0 {
        0.0
    } else {
        m2 / (m2 + lambda_obs)
    }
}

/// Realised gate range over samples that carry energy and a nonzero gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateBounds {
    pub g_lo: f64,
    pub g_hi: f64,
    /// Samples whose energy gate is at least ½.
    pub gated_in: usize,
    /// Samples entering the bound (positive energy and gate).
    pub active: usize,
}

impl GateBounds {
    pub fn ratio(&self) -> f64 {
        self.g_hi / self.g_lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatedWeights {
    pub weights: Vec<f64>,
    pub gates: Vec<f64>,
    /// Energies divided by their maximum.
    pub rel_energy: Vec<f64>,
    pub e_max: f64,
    pub bounds: GateBounds,
}

/// Gates and weights for one family of samples.
///
/// `harmonics` is `None` for Cartesian translation samples.
pub fn compute_weights(energies: &[f64], harmonics: Option<&[i64]>, cfg: &SpectralConfig) -> Result<GatedWeights> {
    if let Some(h) = harmonics {
        if h.len() != energies.len() {
            return Err(Error::Shape("harmonic index count differs from energy count".into()));
        }
    }
    let e_max = energies.iter().copied().fold(0.0, f64::max);
    if !(e_max > 0.0) {
        return Err(Error::Unobservable("all sample energies are zero".into()));
    }
    let n = energies.len();
    let mut weights = Vec::with_capacity(n);
    let mut gates = Vec::with_capacity(n);
    let mut rel_energy = Vec::with_capacity(n);
    let (mut g_lo, mut g_hi) = (f64::INFINITY, 0.0f64);
    let (mut gated_in, mut active) = (0, 0);
    for (i, &e) in energies.iter().enumerate() {
        let rel = e / e_max;
        let ge = energy_gate(rel, cfg.energy_gate_threshold, cfg.energy_gate_sharpness);
        let gobs = harmonics.map_or(1.0, |h| observability_gate(h[i], cfg.obs_gate));
        let g = ge * gobs;
        if e > 0.0 && g > 0.0 {
            g_lo = g_lo.min(g);
            g_hi = g_hi.max(g);
            active += 1;
            if ge >= 0.5 {
                gated_in += 1;
            }
        }
        weights.push(g * rel);
        gates.push(g);
        rel_energy.push(rel);
    }
    if active == 0 {
        return Err(Error::Unobservable("every energetic sample is gated out".into()));
    }
    Ok(GatedWeights {
        weights,
        gates,
        rel_energy,
        e_max,
        bounds: GateBounds {
            g_lo,
            g_hi,
            gated_in,
            active,
        },
    })
}

/// Design rows `[ω_x, ω_y, m, ν, 1]`, targets `−ω_t`, weights and energies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedSamples {
    pub rows: Vec<[f64; 5]>,
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
    pub energies: Vec<f64>,
    pub gates: Vec<f64>,
}

impl WeightedSamples {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Rows and gated weights in one go.
    pub fn build(
        rows: Vec<[f64; 5]>,
        targets: Vec<f64>,
        energies: &[f64],
        harmonics: Option<&[i64]>,
        cfg: &SpectralConfig,
    ) -> Result<(Self, GateBounds)> {
        if rows.len() != targets.len() || rows.len() != energies.len() {
            return Err(Error::Shape("rows, targets and energies differ in length".into()));
        }
        let g = compute_weights(energies, harmonics, cfg)?;
        Ok((
            Self {
                rows,
                targets,
                weights: g.weights,
                energies: g.rel_energy,
                gates: g.gates,
            },
            g.bounds,
        ))
    }

    pub fn extend(&mut self, other: &WeightedSamples) {
        self.rows.extend_from_slice(&other.rows);
        self.targets.extend_from_slice(&other.targets);
        self.weights.extend_from_slice(&other.weights);
        self.energies.extend_from_slice(&other.energies);
        self.gates.extend_from_slice(&other.gates);
    }

    /// Row-major design restricted to `cols`.
    pub fn design(&self, cols: &[usize]) -> Vec<f64> {
        self.rows.iter().flat_map(|r| cols.iter().map(move |&c| r[c])).collect()
    }

    /// `Σ w (φ·θ − b)² / Σ w` with `θ` a full 5-vector.
    pub fn residual(&self, theta: &[f64; 5]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((r, &b), &w) in self.rows.iter().zip(&self.targets).zip(&self.weights) {
            let e = dot5(r, theta) - b;
            num += w * e * e;
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Signed algebraic distances `φ·θ − b`.
    pub fn errors(&self, theta: &[f64; 5]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.targets)
            .map(|(r, &b)| dot5(r, theta) - b)
            .collect()
    }
}

#[inline]
fn dot5(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

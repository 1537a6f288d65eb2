//! The slice losses, their closed-form statistics, the joint hyperplane fit,
//! the softmax mixture of losses and the end-to-end [`analyze`] pipeline.
//!
//! Harmonic-domain quantities are fitted in bin units: a rotation line is
//! `ω_t + Ω_bins·m = 0`, a scaling line `ω_t + α_bins·ν = 0`. Conversions to
//! physical rates are
//!
//! * `Ω = 2π·Ω_bins / T` rad/frame,
//! * `α = −α_bins·Δξ·N_ξ / T` log-scale per frame,
//! * `v_px = v_bins · N_space / T` pixels per frame (positive to the right
//!   and downwards).

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{MotionEstimate, SpectralConfig};
use crate::error::{Error, Result};
use crate::fft::centered_freqs;
use crate::gates::{GateBounds, WeightedSamples};
use crate::math::{exp, ln, sqrt, xlogx};
use crate::resample::{
    harmonic_stack, polar_resample, AngularStack, HarmonicStack, LogRadialStack, PolarLut, RingEnergies, RingMasks,
};
use crate::spectral::{CubeMask, FrameSpectra, Spectrum3D};
use crate::video::{normalize_window, VideoWindow};
use crate::wls::{normal_equations, ridge_wls_solve, symmetric_eigen};

/// Sentinel loss for a slice that cannot be fitted.
pub const UNOBSERVABLE_LOSS: f64 = 1.0;

/// Distance slack in frequency bins when deciding whether a sample lies
/// within `Δ` of a line or plane.
pub const BAND_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Translation,
    Rotation,
    Scaling,
}

impl MotionKind {
    pub const ALL: [MotionKind; 3] = [MotionKind::Translation, MotionKind::Rotation, MotionKind::Scaling];

    pub fn name(self) -> &'static str {
        match self {
            MotionKind::Translation => "translation",
            MotionKind::Rotation => "rotation",
            MotionKind::Scaling => "scaling",
        }
    }
}

/// Fit of one family of samples, or of the joint design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFit {
    /// `[v_x, v_y, Ω_bins, α_bins, b_0]`; columns outside the slice are 0.
    pub theta: [f64; 5],
    /// `Σ w e² / Σ w`.
    pub residual: f64,
    /// `λ‖θ‖² / Σ w`.
    pub ridge_term: f64,
    pub weight_sum: f64,
    pub gates: GateBounds,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationLoss {
    pub v_x: f64,
    pub v_y: f64,
    pub b_0: f64,
    /// Pixel-per-frame velocity `(x, y)`.
    pub velocity_px: [f64; 2],
    pub loss: f64,
    pub observable: bool,
    pub fit: Option<SliceFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationLoss {
    pub omega_bins: f64,
    /// rad/frame.
    pub omega: f64,
    pub c_rot: f64,
    pub c_ring: f64,
    pub loss: f64,
    /// Energy over `m ≠ 0`; zero means the line ratio is undefined.
    pub e_all: f64,
    pub mean_ring_entropy: f64,
    /// Time-averaged fraction of ring energy outside the dominant ring.
    pub eps_nb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingLoss {
    pub c_flow: f64,
    pub s_trend: f64,
    pub loss: f64,
    pub alpha_bins: f64,
    /// Log-scale per frame.
    pub alpha: f64,
    pub c_scale: f64,
    pub e_all: f64,
    /// `ρ_c(t)` in ring-index units.
    pub centroid: Vec<f64>,
    /// Least-squares slope of `ρ_c` against `t`.
    pub centroid_slope: f64,
    /// `false` when `ρ_c` has no variance and the correlation is undefined.
    pub trend_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedFit {
    pub theta: [f64; 5],
    pub loss: f64,
    pub ridge_term: f64,
    pub observable: bool,
    /// Joint fit evaluated on each family with out-of-slice columns zeroed.
    pub slice_translation: SliceResidual,
    pub slice_rotation: SliceResidual,
    pub slice_scaling: SliceResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceResidual {
    pub residual: f64,
    pub ridge_term: f64,
    pub weight_sum: f64,
    pub gates: Option<GateBounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveWeights {
    pub translation: f64,
    pub rotation: f64,
    pub scaling: f64,
}

impl AdaptiveWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.translation, self.rotation, self.scaling]
    }

    pub fn argmax(&self) -> MotionKind {
        let a = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if a[i] > a[best] {
                best = i;
            }
        }
        MotionKind::ALL[best]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceEstimates {
    pub translation: MotionEstimate,
    pub rotation: MotionEstimate,
    pub scaling: MotionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub retained_energy_fraction: f64,
    pub retained_coefficient_fraction: f64,
    pub kept_bins: [usize; 3],
    pub rho_max: f64,
    /// Energy fraction outside `±Δ` of the unified translation plane.
    pub translation_band_out: f64,
    /// `Δξ·N_ξ / T`, the factor turning `−α_bins` into a rate.
    pub alpha_unit: f64,
    pub xi_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_trans: f64,
    pub l_rot: f64,
    pub l_scale: f64,
    pub l_uni: f64,
    pub c_rot: f64,
    pub c_ring: f64,
    pub c_flow: f64,
    pub s_trend: f64,
    pub c_scale: f64,
    pub estimate: MotionEstimate,
    pub per_slice: SliceEstimates,
    pub weights: AdaptiveWeights,
    pub dominant: MotionKind,
    pub l_motion: f64,
    pub translation: TranslationLoss,
    pub rotation: RotationLoss,
    pub scaling: ScalingLoss,
    pub unified: UnifiedFit,
    pub diagnostics: Diagnostics,
    pub flags: Vec<String>,
}

/// Cartesian samples over the retained cube: rows `[ω_x, ω_y, 0, 0, 1]`,
/// targets `−ω_t`.
pub fn translation_samples(
    s: &Spectrum3D,
    mask: &CubeMask,
    cfg: &SpectralConfig,
) -> Result<(WeightedSamples, GateBounds)> {
    let (ft, fy, fx) = (s.freq_t(), s.freq_y(), s.freq_x());
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut energies = Vec::new();
    for (it, &kt) in ft.iter().enumerate() {
        if !mask.keeps(0, kt) {
            continue;
        }
        for (iy, &ky) in fy.iter().enumerate() {
            if !mask.keeps(1, ky) {
                continue;
            }
            for (ix, &kx) in fx.iter().enumerate() {
                if !mask.keeps(2, kx) {
                    continue;
                }
                rows.push([kx as f64, ky as f64, 0.0, 0.0, 1.0]);
                targets.push(-(kt as f64));
                energies.push(s.get(it, iy, ix).norm_sqr());
            }
        }
    }
    WeightedSamples::build(rows, targets, &energies, None, cfg)
}

/// Angular samples with `m ≠ 0`: rows `[0, 0, m, 0, 0]`, targets `−ω_t`.
pub fn rotation_samples(st: &AngularStack, cfg: &SpectralConfig) -> Result<(WeightedSamples, GateBounds)> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut energies = Vec::new();
    let mut harmonics = Vec::new();
    for (_, m, wt, e) in st.samples().filter(|s| s.1 != 0) {
        rows.push([0.0, 0.0, m as f64, 0.0, 0.0]);
        targets.push(-(wt as f64));
        energies.push(e);
        harmonics.push(m);
    }
    WeightedSamples::build(rows, targets, &energies, Some(&harmonics), cfg)
}

/// Log-radial samples with `ν ≠ 0`: rows `[0, 0, 0, ν, 0]`, targets `−ω_t`.
pub fn scaling_samples(st: &LogRadialStack, cfg: &SpectralConfig) -> Result<(WeightedSamples, GateBounds)> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut energies = Vec::new();
    let mut harmonics = Vec::new();
    for (nu, wt, e) in st.samples().filter(|s| s.0 != 0) {
        rows.push([0.0, 0.0, 0.0, nu as f64, 0.0]);
        targets.push(-(wt as f64));
        energies.push(e);
        harmonics.push(nu);
    }
    WeightedSamples::build(rows, targets, &energies, Some(&harmonics), cfg)
}

fn fit_columns(samples: &WeightedSamples, gates: GateBounds, cols: &[usize], cfg: &SpectralConfig) -> Result<SliceFit> {
    let design = samples.design(cols);
    let fit = ridge_wls_solve(
        &design,
        cols.len(),
        &samples.targets,
        &samples.weights,
        cfg.ridge,
        cfg.numeric_eps,
    )?;
    let mut theta = [0.0; 5];
    for (c, v) in cols.iter().zip(&fit.coef) {
        theta[*c] = *v;
    }
    Ok(SliceFit {
        theta,
        residual: fit.residual,
        ridge_term: fit.ridge_term,
        weight_sum: fit.weight_sum,
        gates,
        samples: samples.len(),
    })
}

/// Smallest-to-largest eigenvalue ratio of the weighted Gram matrix.
fn gram_conditioning(samples: &WeightedSamples, cols: &[usize]) -> f64 {
    let design = samples.design(cols);
    let (a, _) = normal_equations(&design, cols.len(), &samples.targets, &samples.weights);
    let (vals, _) = symmetric_eigen(&a, cols.len());
    let hi = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = vals.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if hi > 0.0 {
        lo / hi
    } else {
        0.0
    }
}

const TRANSLATION_COLS: [usize; 3] = [0, 1, 4];

/// Energy-weighted plane fit `ω_t + v_x ω_x + v_y ω_y + b_0 = 0` over the
/// retained spectrum.
pub fn translation_loss(s: &Spectrum3D, cfg: &SpectralConfig) -> TranslationLoss {
    let mask = CubeMask::new(cfg.lowpass_ratio, s.dims());
    match translation_samples(s, &mask, cfg) {
        Ok((samples, gates)) => translation_from_samples(&samples, gates, s.dims(), cfg),
        Err(_) => unobservable_translation(),
    }
}

fn unobservable_translation() -> TranslationLoss {
    TranslationLoss {
        v_x: 0.0,
        v_y: 0.0,
        b_0: 0.0,
        velocity_px: [0.0, 0.0],
        loss: UNOBSERVABLE_LOSS,
        observable: false,
        fit: None,
    }
}

fn translation_from_samples(
    samples: &WeightedSamples,
    gates: GateBounds,
    dims: [usize; 3],
    cfg: &SpectralConfig,
) -> TranslationLoss {
    let Ok(fit) = fit_columns(samples, gates, &TRANSLATION_COLS, cfg) else {
        return unobservable_translation();
    };
    let [t, h, w] = dims;
    let observable = gram_conditioning(samples, &TRANSLATION_COLS) > 1e-10;
    let (v_x, v_y, b_0) = (fit.theta[0], fit.theta[1], fit.theta[4]);
    TranslationLoss {
        v_x,
        v_y,
        b_0,
        velocity_px: [v_x * w as f64 / t as f64, v_y * h as f64 / t as f64],
        loss: if observable { fit.residual } else { UNOBSERVABLE_LOSS },
        observable,
        fit: Some(fit),
    }
}

/// `−Σ E·ω_t·h / Σ E·h²` over samples with `h ≠ 0`, where `h` is `m` or `ν`.
fn line_slope(samples: impl Iterator<Item = (i64, i64, f64)> + Clone) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for (h, wt, e) in samples.clone() {
        if h != 0 {
            num += e * wt as f64 * h as f64;
            den += e * (h * h) as f64;
        }
    }
    if den > 0.0 {
        (-num / den, den)
    } else {
        (0.0, 0.0)
    }
}

/// `(E_line / E_all, E_all)` around `ω_t + slope·h = 0` over `h ≠ 0`.
fn line_ratio(samples: impl Iterator<Item = (i64, i64, f64)>, slope: f64, delta: f64) -> (f64, f64) {
    let (mut inside, mut all) = (0.0, 0.0);
    for (h, wt, e) in samples {
        if h == 0 {
            continue;
        }
        all += e;
        if (wt as f64 + slope * h as f64).abs() <= delta + BAND_TOL {
            inside += e;
        }
    }
    if all > 0.0 {
        ((inside / all).clamp(0.0, 1.0), all)
    } else {
        (0.0, 0.0)
    }
}

/// Time-averaged ring entropy `H̄ = (1/T) Σ_t −Σ_k E_k log(E_k + ε)`.
pub fn mean_ring_entropy(rings: &RingEnergies, eps_stab: f64) -> f64 {
    let mut h = 0.0;
    for t in 0..rings.frames {
        h -= rings.frame(t).iter().map(|&e| e * ln(e + eps_stab)).sum::<f64>();
    }
    (h / rings.frames as f64).max(0.0)
}

/// Mean over frames of `1 − max_k E_k / Σ_k E_k` (frames without energy
/// contribute 0).
pub fn narrowband_fraction(rings: &RingEnergies) -> f64 {
    let mut acc = 0.0;
    for t in 0..rings.frames {
        let f = rings.frame(t);
        let s: f64 = f.iter().sum();
        if s > 0.0 {
            let m = f.iter().copied().fold(0.0, f64::max);
            acc += 1.0 - m / s;
        }
    }
    acc / rings.frames as f64
}

/// Ring concentration `1 − H̄ / log N_r`, clamped to `[0, 1]`.
pub fn ring_concentration(rings: &RingEnergies, eps_stab: f64) -> f64 {
    (1.0 - mean_ring_entropy(rings, eps_stab) / ln(rings.rings as f64)).clamp(0.0, 1.0)
}

pub fn rotation_loss(stack: &HarmonicStack, rings: &RingEnergies, cfg: &SpectralConfig) -> RotationLoss {
    let ang = &stack.angular;
    let it = ang.samples().map(|(_, m, wt, e)| (m, wt, e));
    let (omega_bins, _) = line_slope(it.clone());
    let (c_rot, e_all) = line_ratio(it, omega_bins, cfg.band_tolerance);
    let h = mean_ring_entropy(rings, cfg.numeric_eps);
    let c_ring = (1.0 - h / ln(rings.rings as f64)).clamp(0.0, 1.0);
    let t = ang.freq_t.len() as f64;
    RotationLoss {
        omega_bins,
        omega: 2.0 * PI * omega_bins / t,
        c_rot,
        c_ring,
        loss: 1.0 - (c_ring + c_rot) / 2.0,
        e_all,
        mean_ring_entropy: h,
        eps_nb: narrowband_fraction(rings),
    }
}

/// `(C_flow, centroid, S_trend, slope, defined)` from the ring field.
fn flow_and_trend(rings: &RingEnergies, eps: f64, eps_stab: f64) -> (f64, Vec<f64>, f64, f64, bool) {
    let (t_len, nr) = (rings.frames, rings.rings);
    let centroid: Vec<f64> = (0..t_len)
        .map(|t| {
            let f = rings.frame(t);
            let s: f64 = f.iter().sum();
            f.iter().enumerate().map(|(k, e)| (k + 1) as f64 * e).sum::<f64>() / (s + eps_stab)
        })
        .collect();
    let tn = t_len as f64;
    let tm = (tn - 1.0) / 2.0;
    let cm = centroid.iter().sum::<f64>() / tn;
    let (mut cov, mut vc, mut vt) = (0.0, 0.0, 0.0);
    for (t, c) in centroid.iter().enumerate() {
        let (dt, dc) = (t as f64 - tm, c - cm);
        cov += dt * dc;
        vc += dc * dc;
        vt += dt * dt;
    }
    let slope = if vt > 0.0 { cov / vt } else { 0.0 };
    let defined = vc > 1e-24 * (cm * cm).max(1e-300) && vc > 0.0;
    let (cov, vc, vt) = (cov / tn, vc / tn, vt / tn);
    let s_trend = if defined {
        (cov.abs() / (sqrt(vc * vt) + eps)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if t_len < 2 || nr < 2 {
        return (0.0, centroid, s_trend, slope, defined);
    }
    let (mut dot, mut nr2, mut nt2) = (0.0, 0.0, 0.0);
    for t in 0..t_len - 1 {
        for k in 0..nr - 1 {
            let e = rings.get(t, k);
            let gr = rings.get(t, k + 1) - e;
            let gt = rings.get(t + 1, k) - e;
            dot += gr * gt;
            nr2 += gr * gr;
            nt2 += gt * gt;
        }
    }
    let c_flow = (dot.abs() / ((sqrt(nr2) + eps) * (sqrt(nt2) + eps))).clamp(0.0, 1.0);
    (c_flow, centroid, s_trend, slope, defined)
}

pub fn scaling_loss(rings: &RingEnergies, stack: &HarmonicStack, cfg: &SpectralConfig) -> ScalingLoss {
    let lr = &stack.logradial;
    let it = lr.samples();
    let (alpha_bins, _) = line_slope(it.clone());
    let (c_scale, e_all) = line_ratio(it, alpha_bins, cfg.band_tolerance);
    let t = lr.freq_t.len() as f64;
    let alpha_unit = lr.xi_step() * lr.xi.len() as f64 / t;
    let (mut c_flow, centroid, mut s_trend, slope, defined) = flow_and_trend(rings, cfg.numeric_eps, cfg.numeric_eps);
    if rings.frames < 3 {
        c_flow = 0.5;
        s_trend = 0.5;
    }
    ScalingLoss {
        c_flow,
        s_trend,
        loss: 1.0 - (c_flow + s_trend) / 2.0,
        alpha_bins,
        alpha: -alpha_bins * alpha_unit,
        c_scale,
        e_all,
        centroid,
        centroid_slope: slope,
        trend_defined: defined || rings.frames < 3,
    }
}

/// Joint ridge fit over `[ω_x, ω_y, m, ν, 1]` on the union of the three
/// sample families. Families that are `None` contribute nothing.
pub fn unified_residual(
    families: [Option<(&WeightedSamples, GateBounds)>; 3],
    cfg: &SpectralConfig,
) -> Result<UnifiedFit> {
    let mut joint = WeightedSamples::default();
    for (s, _) in families.iter().flatten() {
        joint.extend(s);
    }
    let cols = [0, 1, 2, 3, 4];
    let design = joint.design(&cols);
    let fit = ridge_wls_solve(&design, 5, &joint.targets, &joint.weights, cfg.ridge, cfg.numeric_eps)?;
    let mut theta = [0.0; 5];
    theta.copy_from_slice(&fit.coef);
    let observable = gram_conditioning(&joint, &cols) > 1e-12;
    let slice = |i: usize, keep: &[usize]| -> SliceResidual {
        let mut th = [0.0; 5];
        for &c in keep {
            th[c] = theta[c];
        }
        match families[i] {
            Some((s, g)) => {
                let ws = s.weight_sum();
                let norm2: f64 = keep.iter().map(|&c| th[c] * th[c]).sum();
                SliceResidual {
                    residual: s.residual(&th),
                    ridge_term: if ws > 0.0 { cfg.ridge * norm2 / ws } else { 0.0 },
                    weight_sum: ws,
                    gates: Some(g),
                }
            }
            None => SliceResidual {
                residual: 0.0,
                ridge_term: 0.0,
                weight_sum: 0.0,
                gates: None,
            },
        }
    };
    Ok(UnifiedFit {
        theta,
        loss: fit.residual,
        ridge_term: fit.ridge_term,
        observable,
        slice_translation: slice(0, &TRANSLATION_COLS),
        slice_rotation: slice(1, &[2]),
        slice_scaling: slice(2, &[3]),
    })
}

/// Softmax over negative losses with temperature `τ`, and the mixed loss.
pub fn adaptive_composite(losses: [f64; 3], tau: f64) -> (AdaptiveWeights, f64) {
    let scaled = losses.map(|l| -l / tau);
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = scaled.map(|s| exp(s - top));
    let z: f64 = e.iter().sum();
    let w = e.map(|v| v / z);
    let mixed = w.iter().zip(&losses).map(|(a, b)| a * b).sum();
    (
        AdaptiveWeights {
            translation: w[0],
            rotation: w[1],
            scaling: w[2],
        },
        mixed,
    )
}

/// Intermediate products of the pipeline, exposed for inspection.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dims: [usize; 3],
    pub mask: CubeMask,
    /// Spatially truncated per-frame spectra.
    pub frames: FrameSpectra,
    /// Cube-truncated spatiotemporal spectrum.
    pub spectrum: Spectrum3D,
    pub total_energy: f64,
    pub stack: HarmonicStack,
    pub rings: RingEnergies,
    pub rho_max: f64,
}

/// Normalise, transform, truncate and resample.
pub fn prepare(v: &VideoWindow, cfg: &SpectralConfig) -> Result<Prepared> {
    cfg.validate()?;
    if v.frames() < 2 {
        return Err(Error::WindowTooShort {
            frames: v.frames(),
            min: 2,
        });
    }
    let nv = normalize_window(v);
    let (t, h, w) = nv.shape();
    let dims = [t, h, w];
    let mask = CubeMask::new(cfg.lowpass_ratio, dims);
    let full = FrameSpectra::from_window(&nv);
    let frames = full.lowpass_spatial(&mask);
    let total_energy = Spectrum3D::from_frames(&full, cfg.window_kind).total_energy();
    if !(total_energy > 0.0) {
        return Err(Error::Degenerate("window has no spectral energy after normalisation".into()).at("transform"));
    }
    let spectrum = crate::spectral::apply_cube(&Spectrum3D::from_frames(&frames, cfg.window_kind), &mask);
    let lut = PolarLut::for_config(h, w, cfg).map_err(|e| e.at("resample"))?;
    let field = polar_resample(&frames, &lut).map_err(|e| e.at("resample"))?;
    let stack = harmonic_stack(&field, cfg).map_err(|e| e.at("resample"))?;
    let masks = RingMasks::new(h, w, lut.rho_max(), cfg.rings, cfg.soft_ring_edge);
    let rings = crate::resample::ring_energies(&frames.energy(), &masks, cfg.numeric_eps).map_err(|e| e.at("rings"))?;
    Ok(Prepared {
        dims,
        mask,
        frames,
        spectrum,
        total_energy,
        stack,
        rings,
        rho_max: lut.rho_max(),
    })
}

/// Energy fraction outside `±Δ` of the plane `θ` over Cartesian samples.
pub fn band_out_fraction(samples: &WeightedSamples, theta: &[f64; 5], delta: f64) -> f64 {
    let errs = samples.errors(theta);
    let (mut inside, mut all) = (0.0, 0.0);
    for (e, &en) in errs.iter().zip(&samples.energies) {
        all += en;
        if e.abs() <= delta + BAND_TOL {
            inside += en;
        }
    }
    if all > 0.0 {
        (1.0 - inside / all).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Every loss and statistic from prepared spectra.
pub fn report(p: &Prepared, cfg: &SpectralConfig) -> Result<LossReport> {
    let [t, h, w] = p.dims;
    let mut flags = Vec::new();

    let trans_family = translation_samples(&p.spectrum, &p.mask, cfg).ok();
    let translation = match &trans_family {
        Some((s, g)) => translation_from_samples(s, *g, p.dims, cfg),
        None => unobservable_translation(),
    };
    if !translation.observable {
        flags.push("translation: spatial support is degenerate, loss set to sentinel".into());
    }

    let rotation = rotation_loss(&p.stack, &p.rings, cfg);
    if rotation.e_all == 0.0 {
        flags.push("rotation: no energy at m != 0, C_rot set to 0".into());
    }
    let scaling = scaling_loss(&p.rings, &p.stack, cfg);
    if scaling.e_all == 0.0 {
        flags.push("scaling: no energy at nu != 0, C_scale set to 0".into());
    }
    if !scaling.trend_defined {
        flags.push("scaling: centroid has zero variance, S_trend set to 0".into());
    }

    let rot_family = rotation_samples(&p.stack.angular, cfg).ok();
    let scale_family = scaling_samples(&p.stack.logradial, cfg).ok();
    let unified = unified_residual(
        [
            trans_family.as_ref().map(|(s, g)| (s, *g)),
            rot_family.as_ref().map(|(s, g)| (s, *g)),
            scale_family.as_ref().map(|(s, g)| (s, *g)),
        ],
        cfg,
    )
    .map_err(|e| e.at("unified fit"))?;
    if !unified.observable {
        flags.push("unified: joint design is rank deficient, ridge-regularised".into());
    }

    let translation_band_out = trans_family
        .as_ref()
        .map_or(0.0, |(s, _)| band_out_fraction(s, &unified.theta, cfg.band_tolerance));

    let losses = [translation.loss, rotation.loss, scaling.loss];
    let (weights, l_motion) = adaptive_composite(losses, cfg.softmax_temperature);

    let alpha_unit = p.stack.logradial.xi_step() * p.stack.logradial.xi.len() as f64 / t as f64;
    let tf = t as f64;
    let estimate = MotionEstimate {
        v_x: unified.theta[0],
        v_y: unified.theta[1],
        omega: 2.0 * PI * unified.theta[2] / tf,
        alpha: -unified.theta[3] * alpha_unit,
        b_0: unified.theta[4],
    };
    let per_slice = SliceEstimates {
        translation: MotionEstimate {
            v_x: translation.v_x,
            v_y: translation.v_y,
            b_0: translation.b_0,
            ..MotionEstimate::default()
        },
        rotation: MotionEstimate {
            omega: rotation.omega,
            ..MotionEstimate::default()
        },
        scaling: MotionEstimate {
            alpha: scaling.alpha,
            ..MotionEstimate::default()
        },
    };
    let kept_energy = p.spectrum.total_energy();
    Ok(LossReport {
        l_trans: translation.loss,
        l_rot: rotation.loss,
        l_scale: scaling.loss,
        l_uni: unified.loss,
        c_rot: rotation.c_rot,
        c_ring: rotation.c_ring,
        c_flow: scaling.c_flow,
        s_trend: scaling.s_trend,
        c_scale: scaling.c_scale,
        estimate,
        per_slice,
        dominant: weights.argmax(),
        weights,
        l_motion,
        diagnostics: Diagnostics {
            frames: t,
            height: h,
            width: w,
            retained_energy_fraction: kept_energy / p.total_energy,
            retained_coefficient_fraction: p.mask.retained_fraction(),
            kept_bins: p.mask.kept,
            rho_max: p.rho_max,
            translation_band_out,
            alpha_unit,
            xi_step: p.stack.logradial.xi_step(),
        },
        translation,
        rotation,
        scaling,
        unified,
        flags,
    })
}

/// Full pipeline: normalise → transform → truncate → resample → losses.
pub fn analyze(v: &VideoWindow, cfg: &SpectralConfig) -> Result<LossReport> {
    let p = prepare(v, cfg)?;
    report(&p, cfg)
}

/// Entropy of a probability vector in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlogx(x)).sum::<f64>()
}

/// Centred temporal frequencies for `t` frames (re-exported for callers
/// building harmonic fixtures).
pub fn temporal_bins(t: usize) -> Vec<i64> {
    centered_freqs(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WindowKind;
    use crate::resample::RingEnergies;
    use alloc::vec;
    use num_complex::Complex64;

    fn single_tone(t_len: usize, m: i64, omega: f64, window: WindowKind) -> HarmonicStack {
        crate::synth::harmonic_tone(t_len, m, omega, window)
    }

    fn one_ring(frames: usize, rings: usize) -> RingEnergies {
        crate::synth::single_ring(frames, rings, 2)
    }

    #[test]
    fn single_harmonic_rotation_is_recovered() {
        let cfg = SpectralConfig::default();
        for omega in [2.0 * PI / 16.0, 2.0 * PI / 8.0] {
            let st = single_tone(16, 2, omega, WindowKind::Hann);
            let r = rotation_loss(&st, &one_ring(16, 20), &cfg);
            assert!((r.omega - omega).abs() / omega <= 0.10, "{} vs {omega}", r.omega);
            assert!(r.c_rot >= 0.9, "c_rot = {}", r.c_rot);
            assert!((r.c_ring - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn all_energy_at_m0_flags_rotation() {
        let cfg = SpectralConfig::default();
        let mut st = single_tone(8, 2, 0.0, WindowKind::Rect);
        for c in st.angular.coeffs.iter_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        let r = rotation_loss(&st, &one_ring(8, 20), &cfg);
        assert_eq!(r.e_all, 0.0);
        assert_eq!(r.c_rot, 0.0);
        assert!((r.loss - (1.0 - r.c_ring / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn two_frames_default_scaling_proxies() {
        let cfg = SpectralConfig::default();
        let st = single_tone(2, 2, 0.0, WindowKind::Rect);
        let s = scaling_loss(&one_ring(2, 20), &st, &cfg);
        assert_eq!((s.c_flow, s.s_trend, s.loss), (0.5, 0.5, 0.5));
    }

    #[test]
    fn composite_examples() {
        let (w, l) = adaptive_composite([0.4, 0.4, 0.4], 0.1);
        for v in w.as_array() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((l - 0.4).abs() < 1e-15);
        let (w, _) = adaptive_composite([0.1, 0.5, 0.5], 0.01);
        assert!(w.translation >= 0.999);
        let (w, _) = adaptive_composite([0.1, 0.9, 0.3], 1e9);
        for v in w.as_array() {
            assert!((v - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn unified_fit_on_hyperplane_samples_is_exact() {
        let theta = [0.1, -0.2, 0.3, 0.05, 0.0];
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for i in 0..200 {
            let r = [
                (i % 7) as f64 - 3.0,
                (i % 5) as f64 - 2.0,
                (i % 11) as f64 - 5.0,
                (i % 13) as f64 - 6.0,
                1.0,
            ];
            targets.push(r.iter().zip(&theta).map(|(a, b)| a * b).sum());
            rows.push(r);
        }
        let n = rows.len();
        let s = WeightedSamples {
            rows,
            targets,
            weights: vec![1.0; n],
            energies: vec![1.0; n],
            gates: vec![1.0; n],
        };
        let g = GateBounds {
            g_lo: 1.0,
            g_hi: 1.0,
            gated_in: n,
            active: n,
        };
        let cfg = SpectralConfig {
            ridge: 1e-8,
            ..SpectralConfig::default()
        };
        let u = unified_residual([Some((&s, g)), None, None], &cfg).unwrap();
        assert!(u.loss <= 1e-10);
        for (a, b) in u.theta.iter().zip(&theta) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn one_frame_is_too_short() {
        let v = VideoWindow::zeros(1, 8, 8).unwrap();
        assert!(matches!(
            analyze(&v, &SpectralConfig::default()),
            Err(Error::WindowTooShort { frames: 1, min: 2 })
        ));
    }
}

//! Computable bounds and their empirical verifiers.
//!
//! Every verifier returns a [`BoundCheck`] holding both sides of one
//! inequality. A check holds when `lhs ≤ rhs + 1e−9·max(1, |rhs|)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{SpectralConfig, WindowKind};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::gates::{GateBounds, WeightedSamples};
use crate::losses::{analyze, LossReport, BAND_TOL};
use crate::math::{ln, sqrt};
use crate::resample::{polar_radius, PolarLut};
use crate::spectral::temporal_window;
use crate::synth::{synth_sim2, BaseSpec, MotionSpec, SynthKind};

/// Relative slack absorbed by every inequality.
pub const REL_SLACK: f64 = 1e-9;

pub fn within_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_SLACK * rhs.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    /// The hypotheses of the inequality are met; a check that is not
    /// applicable is reported but never counted as a violation.
    pub applicable: bool,
    /// Nothing to bound (e.g. zero energy); passes trivially.
    pub vacuous: bool,
    pub context: BTreeMap<String, f64>,
}

impl BoundCheck {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            label: label.into(),
            lhs,
            rhs,
            holds: within_slack(lhs, rhs),
            slack: rhs - lhs,
            applicable: true,
            vacuous: false,
            context: BTreeMap::new(),
        }
    }

    pub fn vacuous(label: impl Into<String>) -> Self {
        Self {
            holds: true,
            vacuous: true,
            ..Self::new(label, 0.0, 0.0)
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.insert(key.to_string(), value);
        self
    }

    pub fn not_applicable(mut self) -> Self {
        self.applicable = false;
        self
    }

    /// Violated while applicable.
    pub fn violated(&self) -> bool {
        self.applicable && !self.holds
    }

    /// One-line dump with every context entry.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "{}: lhs={:.6e} rhs={:.6e} slack={:.3e} holds={}",
            self.label, self.lhs, self.rhs, self.slack, self.holds
        );
        if !self.applicable {
            s.push_str(" (not applicable)");
        }
        if self.vacuous {
            s.push_str(" (vacuous)");
        }
        for (k, v) in &self.context {
            s.push_str(&format!(" {k}={v:.6e}"));
        }
        s
    }
}

/// Out-of-band energy fraction `Σ_{|k|>Δ} |ĥ_k|² / Σ_k |ĥ_k|²` of the
/// temporal window's DFT. Windows shorter than two frames have no leakage.
pub fn window_leakage(frames: usize, delta: f64, kind: WindowKind) -> f64 {
    if frames < 2 {
        return 0.0;
    }
    let mut buf: Vec<Complex64> = temporal_window(frames, kind)
        .into_iter()
        .map(|h| Complex64::new(h, 0.0))
        .collect();
    Fft::new(frames).forward(&mut buf);
    let (mut out, mut all) = (0.0, 0.0);
    for (j, c) in buf.iter().enumerate() {
        let k = j.min(frames - j) as f64;
        let e = c.norm_sqr();
        all += e;
        if k > delta + BAND_TOL {
            out += e;
        }
    }
    if all > 0.0 {
        (out / all).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageEntry {
    pub frames: usize,
    pub delta: f64,
    pub kind: WindowKind,
    pub eps_win: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LeakageTable {
    pub entries: Vec<LeakageEntry>,
}

impl LeakageTable {
    pub fn build(frames: &[usize], deltas: &[f64], kinds: &[WindowKind]) -> Self {
        let mut entries = Vec::new();
        for &kind in kinds {
            for &t in frames {
                for &d in deltas {
                    entries.push(LeakageEntry {
                        frames: t,
                        delta: d,
                        kind,
                        eps_win: window_leakage(t, d, kind),
                    });
                }
            }
        }
        Self { entries }
    }

    /// Every integer `Δ` in `0..=T/2` for each `T`.
    pub fn full(frames: &[usize], kinds: &[WindowKind]) -> Self {
        let mut entries = Vec::new();
        for &t in frames {
            let deltas: Vec<f64> = (0..=t / 2).map(|d| d as f64).collect();
            entries.extend(Self::build(&[t], &deltas, kinds).entries);
        }
        Self { entries }
    }

    pub fn get(&self, frames: usize, delta: f64, kind: WindowKind) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.frames == frames && e.kind == kind && e.delta == delta)
            .map(|e| e.eps_win)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("T,delta,kind,eps_win\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{:.17e}\n",
                e.frames,
                e.delta,
                e.kind.name(),
                e.eps_win
            ));
        }
        s
    }

    /// Pairs that break monotonicity in `Δ` at fixed `(T, kind)`.
    pub fn delta_violations(&self) -> Vec<(LeakageEntry, LeakageEntry)> {
        let mut bad = Vec::new();
        for a in &self.entries {
            for b in &self.entries {
                if a.frames == b.frames && a.kind == b.kind && a.delta < b.delta && b.eps_win > a.eps_win {
                    bad.push((a.clone(), b.clone()));
                }
            }
        }
        bad
    }
}

/// Weighted band capture for algebraic distances `e_i`, energies `E_i` and
/// gates `g_i`, with weights `w_i = g_i E_i`:
/// `1 − E_in(Δ)/E_all ≤ (ḡ/g̲)·Δ⁻²·Σ w e² / Σ w`.
pub fn band_capture_check(
    errors: &[f64],
    energies: &[f64],
    gates: &[f64],
    delta: f64,
    bounds: GateBounds,
) -> BoundCheck {
    let label = "band capture";
    let e_all: f64 = energies.iter().sum();
    if !(e_all > 0.0) {
        return BoundCheck::vacuous(label).with("delta", delta);
    }
    let (mut e_in, mut num, mut den) = (0.0, 0.0, 0.0);
    for ((&e, &en), &g) in errors.iter().zip(energies).zip(gates) {
        if e.abs() <= delta + BAND_TOL {
            e_in += en;
        }
        let w = g * en;
        num += w * e * e;
        den += w;
    }
    let lhs = (1.0 - e_in / e_all).max(0.0);
    let residual = if den > 0.0 { num / den } else { 0.0 };
    let rhs = bounds.ratio() / (delta * delta) * residual;
    BoundCheck::new(label, lhs, rhs)
        .with("delta", delta)
        .with("residual", residual)
        .with("gate_ratio", bounds.ratio())
}

/// [`band_capture_check`] on a sample family against hyperplane `θ`.
pub fn band_capture_samples(samples: &WeightedSamples, theta: &[f64; 5], delta: f64, bounds: GateBounds) -> BoundCheck {
    band_capture_check(&samples.errors(theta), &samples.energies, &samples.gates, delta, bounds)
}

/// `h(ε) = −ε ln ε − (1−ε) ln(1−ε)` in nats.
pub fn binary_entropy(eps: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { -x * ln(x) } else { 0.0 };
    f(eps) + f(1.0 - eps)
}

/// `(h(ε) + ε ln(N_r−1)) / ln N_r`.
pub fn ring_entropy_bound(eps_nb: f64, rings: usize) -> f64 {
    if rings < 2 {
        return 0.0;
    }
    let n = rings as f64;
    (binary_entropy(eps_nb) + eps_nb * ln(n - 1.0)) / ln(n)
}

/// Normalised entropy of a ring distribution against the bound built from
/// its own leak fraction `1 − max/Σ`.
pub fn ring_entropy_check(energies: &[f64]) -> BoundCheck {
    let label = "ring entropy";
    let total: f64 = energies.iter().sum();
    if energies.len() < 2 || !(total > 0.0) {
        return BoundCheck::vacuous(label);
    }
    let h: f64 = energies
        .iter()
        .map(|&e| e / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * ln(p))
        .sum();
    let lhs = h / ln(energies.len() as f64);
    let max = energies.iter().copied().fold(0.0, f64::max);
    let eps = 1.0 - max / total;
    BoundCheck::new(label, lhs, ring_entropy_bound(eps, energies.len()))
        .with("eps_nb", eps)
        .with("rings", energies.len() as f64)
}

/// `Σ w (φ·θ_λ − b)² ≤ r* + λ‖θ_LS‖²`, where `θ_LS` is the minimum-norm
/// weighted least-squares solution and `r*` its residual.
pub fn ridge_inequality_check(
    design: &[f64],
    ncols: usize,
    targets: &[f64],
    weights: &[f64],
    lambda: f64,
) -> Result<BoundCheck> {
    let fit = crate::wls::ridge_wls_solve(design, ncols, targets, weights, lambda, 0.0)?;
    let ls = crate::wls::least_squares(design, ncols, targets, weights);
    let lhs = crate::wls::weighted_sse(design, ncols, targets, weights, &fit.coef);
    let r_star = crate::wls::weighted_sse(design, ncols, targets, weights, &ls);
    let norm2: f64 = ls.iter().map(|c| c * c).sum();
    Ok(BoundCheck::new("ridge residual", lhs, r_star + lambda * norm2)
        .with("lambda", lambda)
        .with("r_star", r_star)
        .with("theta_ls_norm2", norm2))
}

/// Calibrated constants consumed by [`master_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub eps_interp: f64,
    pub delta_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterChecks {
    pub rotation: BoundCheck,
    pub scaling: BoundCheck,
    pub translation: BoundCheck,
    /// `1 − C_rot` against the reference line through the rotation slice.
    pub rotation_line: BoundCheck,
    /// `1 − C_scale` against the reference line through the scaling slice.
    pub scaling_line: BoundCheck,
    /// `L_trans` itself against the translation reference line; reported
    /// for information only.
    pub translation_literal: BoundCheck,
    pub eps_win: f64,
}

impl MasterChecks {
    pub fn all(&self) -> [&BoundCheck; 6] {
        [
            &self.rotation,
            &self.scaling,
            &self.translation,
            &self.rotation_line,
            &self.scaling_line,
            &self.translation_literal,
        ]
    }

    /// The three consolidated inequalities.
    pub fn master(&self) -> [&BoundCheck; 3] {
        [&self.rotation, &self.scaling, &self.translation]
    }

    pub fn violations(&self) -> Vec<&BoundCheck> {
        self.all().into_iter().filter(|c| c.violated()).collect()
    }
}

/// Evaluates the consolidated surrogate bounds on one report.
///
/// `report` must come from [`analyze`] with the same `cfg`; `Δ` is
/// `cfg.band_tolerance`. The scaling inequality assumes a radial shift
/// model; pass `shift_model = false` when the clip is not known to satisfy
/// it and the row is still evaluated but marked not applicable.
pub fn master_bound_check(
    report: &LossReport,
    cfg: &SpectralConfig,
    calibration: Option<&Calibration>,
    shift_model: bool,
) -> Result<MasterChecks> {
    let cal = calibration.ok_or_else(|| {
        Error::MissingCalibration(
            "eps_interp and delta_flow are required; run `sim2spec calibrate --out calibration.json` and pass the file"
                .into(),
        )
    })?;
    if !(cal.eps_interp.is_finite() && cal.eps_interp >= 0.0 && cal.delta_flow.is_finite() && cal.delta_flow >= 0.0) {
        return Err(Error::Config(
            "calibration constants must be finite and nonnegative".into(),
        ));
    }
    let delta = cfg.band_tolerance;
    let d2 = delta * delta;
    let frames = report.diagnostics.frames;
    let eps_win = window_leakage(frames, delta, cfg.window_kind);
    let uni = &report.unified;

    let rotation;
    let rotation_line;
    match uni.slice_rotation.gates {
        Some(g) => {
            let s = &uni.slice_rotation;
            let chebyshev = g.ratio() / d2 * s.residual;
            let ring = ring_entropy_bound(report.rotation.eps_nb, cfg.rings);
            let rhs = 0.5 * chebyshev + 0.5 * ring + eps_win + cal.eps_interp + s.ridge_term;
            rotation = BoundCheck::new("rotation", report.l_rot, rhs)
                .with("gate_ratio", g.ratio())
                .with("slice_residual", s.residual)
                .with("ring_term", 0.5 * ring)
                .with("eps_nb", report.rotation.eps_nb);
            rotation_line = BoundCheck::new(
                "rotation line",
                1.0 - report.c_rot,
                chebyshev + eps_win + cal.eps_interp + s.ridge_term,
            )
            .with("gate_ratio", g.ratio())
            .with("slice_residual", s.residual);
        }
        None => {
            rotation = BoundCheck::vacuous("rotation");
            rotation_line = BoundCheck::vacuous("rotation line");
        }
    }

    let scaling;
    let scaling_line;
    match uni.slice_scaling.gates {
        Some(g) => {
            let s = &uni.slice_scaling;
            let chebyshev = g.ratio() / d2 * s.residual;
            let rhs = 0.5 * chebyshev + eps_win + cal.eps_interp + 0.5 * cal.delta_flow + s.ridge_term;
            let mut check = BoundCheck::new("scaling", report.l_scale, rhs)
                .with("gate_ratio", g.ratio())
                .with("slice_residual", s.residual)
                .with("delta_flow", cal.delta_flow);
            if !shift_model {
                check = check.not_applicable();
            }
            scaling = check;
            scaling_line = BoundCheck::new(
                "scaling line",
                1.0 - report.c_scale,
                chebyshev + eps_win + cal.eps_interp + s.ridge_term,
            )
            .with("gate_ratio", g.ratio())
            .with("slice_residual", s.residual);
        }
        None => {
            scaling = BoundCheck::vacuous("scaling");
            scaling_line = BoundCheck::vacuous("scaling line");
        }
    }

    let translation;
    let translation_literal;
    match (uni.slice_translation.gates, report.translation.observable) {
        (Some(g), true) => {
            let s = &uni.slice_translation;
            let line = g.ratio() / d2 * s.residual + eps_win + s.ridge_term;
            translation = BoundCheck::new("translation", report.diagnostics.translation_band_out, line)
                .with("gate_ratio", g.ratio())
                .with("slice_residual", s.residual);
            translation_literal = BoundCheck::new("translation literal", report.l_trans, line)
                .with("gate_ratio", g.ratio())
                .with("slice_residual", s.residual)
                .not_applicable();
        }
        _ => {
            translation = BoundCheck::vacuous("translation");
            translation_literal = BoundCheck::vacuous("translation literal").not_applicable();
        }
    }

    let tag = |c: BoundCheck| {
        c.with("delta", delta)
            .with("eps_win", eps_win)
            .with("eps_interp", cal.eps_interp)
    };
    Ok(MasterChecks {
        rotation: tag(rotation),
        scaling: tag(scaling),
        translation: tag(translation),
        rotation_line: tag(rotation_line),
        scaling_line: tag(scaling_line),
        translation_literal: tag(translation_literal),
        eps_win,
    })
}

/// Spatial energy spectra used to calibrate interpolation error. Offsets
/// and widths are in frequency bins from the centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepSpectrum {
    Flat,
    GaussianRing { radius: f64, sigma: f64 },
    Impulse { ky: i64, kx: i64 },
}

impl SweepSpectrum {
    fn energy(&self, dy: f64, dx: f64) -> f64 {
        match *self {
            SweepSpectrum::Flat => 1.0,
            SweepSpectrum::GaussianRing { radius, sigma } => {
                let r = sqrt(dy * dy + dx * dx) - radius;
                crate::math::exp(-r * r / (2.0 * sigma * sigma))
            }
            SweepSpectrum::Impulse { ky, kx } => {
                if dy == ky as f64 && dx == kx as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpSweep {
    pub height: usize,
    pub width: usize,
    pub spectra: Vec<SweepSpectrum>,
    /// Oracle subcells per bin along each axis.
    pub oversample: usize,
}

impl InterpSweep {
    /// Flat spectrum plus Gaussian rings of several radii and widths.
    pub fn standard(height: usize, width: usize, cfg: &SpectralConfig) -> Result<Self> {
        let rho_max = polar_radius(height, width, cfg.lowpass_ratio)?;
        let mut spectra = vec![SweepSpectrum::Flat];
        for frac in [0.25, 0.5, 0.75] {
            for sigma in [0.5, 1.0, 2.0, 4.0] {
                spectra.push(SweepSpectrum::GaussianRing {
                    radius: frac * rho_max,
                    sigma,
                });
            }
        }
        Ok(Self {
            height,
            width,
            spectra,
            oversample: 8,
        })
    }

    /// The standard sweep with single-bin spikes added.
    pub fn with_impulses(mut self, cfg: &SpectralConfig) -> Result<Self> {
        let rho_max = polar_radius(self.height, self.width, cfg.lowpass_ratio)?;
        let r = (rho_max / 2.0) as i64;
        for (ky, kx) in [(0, r.max(1)), (r.max(1), r.max(1) / 2)] {
            self.spectra.push(SweepSpectrum::Impulse { ky, kx });
        }
        Ok(self)
    }
}

/// Ring distribution of one spectrum as seen through the bilinear polar
/// lookup (amplitude interpolated, energy weighted by ring radius) and by
/// hard assignment of finely subdivided Cartesian bins. Returns the total
/// variation distance between the two.
pub fn interp_displacement(spec: &SweepSpectrum, lut: &PolarLut, rings: usize, oversample: usize) -> f64 {
    let (h, w) = lut.shape();
    let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
    let rho_max = lut.rho_max();
    let mut plane = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            plane[y * w + x] = spec.energy(y as f64 - cy, x as f64 - cx);
        }
    }
    let amp: Vec<f64> = plane.iter().map(|e| sqrt(*e)).collect();
    let mut lut_dist = vec![0.0; rings];
    let rho = lut.rho().to_vec();
    lut.sample(&amp, |k, _, a| lut_dist[k] += a * a * rho[k]);

    let mut oracle = vec![0.0; rings];
    let n = oversample.max(1);
    let step = 1.0 / n as f64;
    let width = rho_max / rings as f64;
    for y in 0..h {
        for x in 0..w {
            let e = plane[y * w + x];
            if e == 0.0 {
                continue;
            }
            for sy in 0..n {
                let dy = y as f64 - cy - 0.5 + (sy as f64 + 0.5) * step;
                for sx in 0..n {
                    let dx = x as f64 - cx - 0.5 + (sx as f64 + 0.5) * step;
                    let r = sqrt(dy * dy + dx * dx);
                    if r < rho_max {
                        oracle[((r / width) as usize).min(rings - 1)] += e;
                    }
                }
            }
        }
    }
    total_variation(&lut_dist, &oracle)
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    match (sa > 0.0, sb > 0.0) {
        (true, true) => 0.5 * a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>(),
        (false, false) => 0.0,
        _ => 1.0,
    }
}

/// Worst-case displaced ring energy over the sweep.
pub fn calibrate_interp(sweep: &InterpSweep, cfg: &SpectralConfig) -> Result<f64> {
    let lut = PolarLut::for_config(sweep.height, sweep.width, cfg)?;
    Ok(sweep
        .spectra
        .iter()
        .map(|s| interp_displacement(s, &lut, cfg.rings, sweep.oversample))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSweep {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub alphas: Vec<f64>,
    pub noise: Vec<f64>,
    pub seeds: Vec<u64>,
    pub base: BaseSpec,
}

impl Default for FlowSweep {
    fn default() -> Self {
        Self {
            frames: 16,
            height: 128,
            width: 128,
            alphas: vec![-0.03, -0.02, -0.01, 0.01, 0.02, 0.03],
            noise: vec![0.0, 0.02, 0.05],
            seeds: vec![9001, 9002],
            base: BaseSpec::for_motion(SynthKind::Scaling),
        }
    }
}

/// `max(0, max 2(C_scale − ½(C_flow + S_trend)))` over controlled zooms.
pub fn calibrate_delta_flow(sweep: &FlowSweep, cfg: &SpectralConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for &alpha in &sweep.alphas {
        for &sigma in &sweep.noise {
            for &seed in &sweep.seeds {
                let spec = MotionSpec::scaling(alpha, seed).with_noise(sigma);
                let v = synth_sim2(&sweep.base, &spec, sweep.frames, sweep.height, sweep.width)?;
                let r = analyze(&v, cfg)?;
                worst = worst.max(2.0 * (r.c_scale - 0.5 * (r.c_flow + r.s_trend)));
            }
        }
    }
    Ok(worst.max(0.0))
}

/// Both calibration constants with their default sweeps on an `H×W` grid.
pub fn calibrate(height: usize, width: usize, frames: usize, cfg: &SpectralConfig) -> Result<Calibration> {
    let eps_interp = calibrate_interp(&InterpSweep::standard(height, width, cfg)?, cfg)?;
    let sweep = FlowSweep {
        frames,
        height,
        width,
        ..FlowSweep::default()
    };
    Ok(Calibration {
        eps_interp,
        delta_flow: calibrate_delta_flow(&sweep, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(lo: f64, hi: f64) -> GateBounds {
        GateBounds {
            g_lo: lo,
            g_hi: hi,
            gated_in: 0,
            active: 2,
        }
    }

    #[test]
    fn band_capture_hand_example() {
        let d = 1.5;
        let c = band_capture_check(&[0.0, 2.0 * d], &[1.0, 1.0], &[0.7, 0.7], d, bounds(0.7, 0.7));
        assert!((c.lhs - 0.5).abs() < 1e-15);
        assert!((c.rhs - 2.0).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn full_capture_has_zero_lhs() {
        let c = band_capture_check(&[0.2, -0.9, 1.0], &[1.0, 2.0, 3.0], &[1.0; 3], 1.0, bounds(1.0, 1.0));
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn zero_energy_is_vacuous() {
        let c = band_capture_check(&[5.0], &[0.0], &[1.0], 1.0, bounds(1.0, 1.0));
        assert!(c.vacuous && c.holds);
    }

    #[test]
    fn leakage_edge_cases() {
        for t in [8, 9, 16] {
            assert_eq!(window_leakage(t, (t / 2) as f64, WindowKind::Hann), 0.0);
            assert!(window_leakage(t, 0.0, WindowKind::Rect) < 1e-28);
        }
        let a = window_leakage(16, 1.0, WindowKind::Hann);
        let b = window_leakage(32, 1.0, WindowKind::Hann);
        assert!(b <= a && a > 0.0);
    }

    #[test]
    fn leakage_matches_direct_sum() {
        let t = 12;
        let h = temporal_window(t, WindowKind::Hann);
        let mut out = 0.0;
        let mut all = 0.0;
        for k in -(t as i64) / 2..(t as i64 + 1) / 2 {
            let c: Complex64 = h
                .iter()
                .enumerate()
                .map(|(n, &x)| {
                    Complex64::from_polar(x, -2.0 * core::f64::consts::PI * (k * n as i64) as f64 / t as f64)
                })
                .sum();
            all += c.norm_sqr();
            if k.abs() > 2 {
                out += c.norm_sqr();
            }
        }
        assert!((window_leakage(t, 2.0, WindowKind::Hann) - out / all).abs() < 1e-13);
    }

    #[test]
    fn ring_bound_closed_forms() {
        assert_eq!(ring_entropy_bound(0.0, 20), 0.0);
        assert!((ring_entropy_bound(0.5, 2) - 1.0).abs() < 1e-15);
        let one = ring_entropy_check(&[0.0, 3.0, 0.0, 0.0]);
        assert_eq!(one.lhs, 0.0);
        assert_eq!(one.rhs, 0.0);
        assert!(one.holds);
    }

    #[test]
    fn ridge_at_zero_lambda_is_equality() {
        let design = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let targets = [0.1, 1.2, 1.9, 3.2];
        let c = ridge_inequality_check(&design, 2, &targets, &[1.0; 4], 0.0).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-9);
    }

    #[test]
    fn missing_calibration_is_refused() {
        let cfg = SpectralConfig::default();
        let v = synth_sim2(&BaseSpec::default(), &MotionSpec::rotation(0.1, 1), 8, 32, 32).unwrap();
        let r = analyze(&v, &cfg).unwrap();
        match master_bound_check(&r, &cfg, None, false) {
            Err(Error::MissingCalibration(msg)) => assert!(msg.contains("calibrate")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flat_spectrum_interpolates_without_displacement() {
        let cfg = SpectralConfig::default();
        let lut = PolarLut::for_config(64, 64, &cfg).unwrap();
        let d = interp_displacement(&SweepSpectrum::Flat, &lut, cfg.rings, 8);
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn impulses_dominate_the_sweep() {
        let cfg = SpectralConfig::default();
        let base = InterpSweep::standard(64, 64, &cfg).unwrap();
        let smooth = calibrate_interp(&base, &cfg).unwrap();
        let spiky = base.with_impulses(&cfg).unwrap();
        let lut = PolarLut::for_config(64, 64, &cfg).unwrap();
        let worst_impulse = spiky
            .spectra
            .iter()
            .filter(|s| matches!(s, SweepSpectrum::Impulse { .. }))
            .map(|s| interp_displacement(s, &lut, cfg.rings, 8))
            .fold(0.0, f64::max);
        assert!(worst_impulse > smooth);
        assert_eq!(calibrate_interp(&spiky, &cfg).unwrap(), worst_impulse);
    }
}

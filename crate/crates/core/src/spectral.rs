//! Windowed spatiotemporal DFT, low-pass cube truncation and the power-law
//! retained-energy model.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * Forward transforms are unnormalised, so with a rectangular window
//!   `Σ|V̂|² = T·H·W · Σ v²` (Parseval).
//! * The spatial phase origin is the frame centre `(⌊H/2⌋, ⌊W/2⌋)`; rotation
//!   and zoom about the centre then leave spectral phases fixed.
//! * Every axis is stored in centred order, frequency `k = i − ⌊n/2⌋`.
//! * ω_t uses the same forward kernel, so a pattern moving by `+v` pixels per
//!   frame along x puts its energy at `ω_t = −(v·T/W)·ω_x`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{SpectralConfig, WindowKind};
use crate::error::{Error, Result};
use crate::fft::{centered_freqs, natural_index, transform_axis, Fft};
use crate::math::{cos, floor, ln, pow, sqrt};
use crate::video::VideoWindow;

/// Temporal taper of length `t`. With one or two frames every sample sits on
/// a Hann endpoint, so those windows are left untapered.
pub fn temporal_window(t: usize, kind: WindowKind) -> Vec<f64> {
    match kind {
        WindowKind::Rect => vec![1.0; t],
        WindowKind::Hann if t <= 2 => vec![1.0; t],
        WindowKind::Hann => (0..t)
            .map(|i| 0.5 * (1.0 - cos(2.0 * PI * i as f64 / (t - 1) as f64)))
            .collect(),
    }
}

fn centre_shift(i: usize, n: usize) -> usize {
    natural_index(i as i64 - (n / 2) as i64, n)
}

/// Per-frame 2-D spatial spectra, time domain, no temporal taper.
///
/// Layout `(t, ω_y, ω_x)`, spatial axes centred.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpectra {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub coeffs: Vec<Complex64>,
}

impl FrameSpectra {
    pub fn from_window(v: &VideoWindow) -> Self {
        let (t, h, w) = v.shape();
        let fy = Fft::new(h);
        let fx = Fft::new(w);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); t * h * w];
        let mut plane = vec![Complex64::new(0.0, 0.0); h * w];
        for f in 0..t {
            let frame = v.frame(f);
            for y in 0..h {
                let ny = centre_shift(y, h);
                for x in 0..w {
                    plane[ny * w + centre_shift(x, w)] = Complex64::new(frame[y * w + x], 0.0);
                }
            }
            transform_axis(&mut plane, &[h, w], 1, &fx);
            transform_axis(&mut plane, &[h, w], 0, &fy);
            let out = &mut coeffs[f * h * w..(f + 1) * h * w];
            for iy in 0..h {
                let ny = centre_shift(iy, h);
                for ix in 0..w {
                    out[iy * w + ix] = plane[ny * w + centre_shift(ix, w)];
                }
            }
        }
        Self {
            frames: t,
            height: h,
            width: w,
            coeffs,
        }
    }

    #[inline]
    pub fn get(&self, t: usize, iy: usize, ix: usize) -> Complex64 {
        self.coeffs[(t * self.height + iy) * self.width + ix]
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let n = self.height * self.width;
        &self.coeffs[t * n..(t + 1) * n]
    }

    /// Zeroes spatial bins outside the cube's spatial extent.
    pub fn lowpass_spatial(&self, mask: &CubeMask) -> Self {
        let fy = centered_freqs(self.height);
        let fx = centered_freqs(self.width);
        let mut out = self.clone();
        for t in 0..self.frames {
            for (iy, &ky) in fy.iter().enumerate() {
                for (ix, &kx) in fx.iter().enumerate() {
                    if !(mask.keeps(1, ky) && mask.keeps(2, kx)) {
                        out.coeffs[(t * self.height + iy) * self.width + ix] = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
        out
    }

    /// `|V̂(ω_x, ω_y, t)|²`.
    pub fn energy(&self) -> EnergyGrid {
        EnergyGrid {
            dims: [self.frames, self.height, self.width],
            energy: self.coeffs.iter().map(|c| c.norm_sqr()).collect(),
        }
    }
}

/// Complex spatiotemporal DFT coefficients, layout `(ω_t, ω_y, ω_x)`, every
/// axis centred.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum3D {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub window: WindowKind,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum3D {
    /// Temporal DFT of `h[t]`-tapered frame spectra.
    pub fn from_frames(fs: &FrameSpectra, window: WindowKind) -> Self {
        let (t, h, w) = (fs.frames, fs.height, fs.width);
        let taper = temporal_window(t, window);
        let mut data: Vec<Complex64> = fs
            .coeffs
            .chunks_exact(h * w)
            .zip(&taper)
            .flat_map(|(frame, &g)| frame.iter().map(move |c| c * g))
            .collect();
        transform_axis(&mut data, &[t, h, w], 0, &Fft::new(t));
        let mut coeffs = vec![Complex64::new(0.0, 0.0); t * h * w];
        for it in 0..t {
            let src = centre_shift(it, t);
            coeffs[it * h * w..(it + 1) * h * w].copy_from_slice(&data[src * h * w..(src + 1) * h * w]);
        }
        Self {
            frames: t,
            height: h,
            width: w,
            window,
            coeffs,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.frames, self.height, self.width]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn freq_t(&self) -> Vec<i64> {
        centered_freqs(self.frames)
    }

    pub fn freq_y(&self) -> Vec<i64> {
        centered_freqs(self.height)
    }

    pub fn freq_x(&self) -> Vec<i64> {
        centered_freqs(self.width)
    }

    #[inline]
    pub fn index(&self, it: usize, iy: usize, ix: usize) -> usize {
        (it * self.height + iy) * self.width + ix
    }

    #[inline]
    pub fn get(&self, it: usize, iy: usize, ix: usize) -> Complex64 {
        self.coeffs[self.index(it, iy, ix)]
    }

    /// Coefficient at signed frequencies, wrapping out-of-range values.
    pub fn at_freq(&self, kt: i64, ky: i64, kx: i64) -> Complex64 {
        let wrap = |k: i64, n: usize| {
            let nat = natural_index(k, n) as i64;
            // natural → centred
            natural_index(nat + (n / 2) as i64, n)
        };
        self.get(wrap(kt, self.frames), wrap(ky, self.height), wrap(kx, self.width))
    }

    pub fn energy(&self) -> EnergyGrid {
        EnergyGrid {
            dims: self.dims(),
            energy: self.coeffs.iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `|coeff|²`, same layout as the spectrum it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    pub dims: [usize; 3],
    pub energy: Vec<f64>,
}

impl EnergyGrid {
    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }
}

/// Windowed spatiotemporal DFT of an already-normalised window.
pub fn spectral_transform(v: &VideoWindow, cfg: &SpectralConfig) -> Spectrum3D {
    Spectrum3D::from_frames(&FrameSpectra::from_window(v), cfg.window_kind)
}

/// Per-dimension low-pass selection.
///
/// Each axis of length `n` keeps `max(2, ⌊ϱ(n−1)⌋ + 1)` bins (capped at `n`),
/// taken in the order `0, +1, −1, +2, −2, …`, so the retained cube is centred
/// on DC and its coefficient fraction is close to `ϱ³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeMask {
    pub dims: [usize; 3],
    pub kept: [usize; 3],
}

impl CubeMask {
    pub fn new(rho: f64, dims: [usize; 3]) -> Self {
        let kept = dims.map(|n| kept_bins(n, rho));
        Self { dims, kept }
    }

    /// Whether signed frequency `k` survives on `axis` (0 = t, 1 = y, 2 = x).
    #[inline]
    pub fn keeps(&self, axis: usize, k: i64) -> bool {
        self.kept[axis] >= self.dims[axis] || freq_rank(k) < self.kept[axis]
    }

    pub fn retained_count(&self) -> usize {
        self.kept.iter().product()
    }

    pub fn total_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn retained_fraction(&self) -> f64 {
        self.retained_count() as f64 / self.total_count() as f64
    }

    /// Largest radius `r` such that every spatial bin within `r` of DC is
    /// retained (the inscribed circle of the spatial cross-section).
    pub fn spatial_radius(&self) -> usize {
        self.kept[1].min(self.kept[2]).saturating_sub(1) / 2
    }
}

fn kept_bins(n: usize, rho: f64) -> usize {
    let k = floor(rho * (n.saturating_sub(1)) as f64) as usize + 1;
    k.max(2).min(n)
}

#[inline]
fn freq_rank(k: i64) -> usize {
    if k > 0 {
        (2 * k - 1) as usize
    } else {
        (-2 * k) as usize
    }
}

/// Zeroes every coefficient outside the low-pass cube.
pub fn lowpass_cube(s: &Spectrum3D, rho: f64) -> Spectrum3D {
    let mask = CubeMask::new(rho, s.dims());
    apply_cube(s, &mask)
}

pub fn apply_cube(s: &Spectrum3D, mask: &CubeMask) -> Spectrum3D {
    let (ft, fy, fx) = (s.freq_t(), s.freq_y(), s.freq_x());
    let mut out = s.clone();
    for (it, &kt) in ft.iter().enumerate() {
        let keep_t = mask.keeps(0, kt);
        for (iy, &ky) in fy.iter().enumerate() {
            let keep_ty = keep_t && mask.keeps(1, ky);
            for (ix, &kx) in fx.iter().enumerate() {
                if !(keep_ty && mask.keeps(2, kx)) {
                    let i = s.index(it, iy, ix);
                    out.coeffs[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    out
}

/// Energy inside the low-pass cube divided by the total energy.
pub fn measured_retention(s: &Spectrum3D, rho: f64) -> Result<f64> {
    let total = s.total_energy();
    if !(total > 0.0) {
        return Err(Error::Undefined("spectrum has zero total energy".into()));
    }
    let kept = lowpass_cube(s, rho).total_energy();
    Ok(kept / total)
}

/// Parameters of the radial power law `E(r) ∝ r^{−2κ}` on dimensionless
/// frequencies `r ∈ [ε_grid, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaParams {
    pub kappa: f64,
    pub r_max: f64,
    pub eps_grid: f64,
}

impl EtaParams {
    /// `R = √3` and `ε_grid = min{1/(T−1), 1/(H−1), 1/(W−1)}` over axes
    /// longer than one sample.
    pub fn for_grid(dims: [usize; 3], kappa: f64) -> Result<Self> {
        let eps_grid = dims
            .iter()
            .filter(|&&n| n > 1)
            .map(|&n| 1.0 / (n - 1) as f64)
            .fold(f64::INFINITY, f64::min);
        let p = Self {
            kappa,
            r_max: sqrt(3.0),
            eps_grid,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.eps_grid > 0.0 && self.eps_grid < self.r_max) {
            return Err(Error::Config(format!(
                "need 0 < eps_grid < R, got eps_grid={} R={}",
                self.eps_grid, self.r_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRetention {
    pub eta_ball: f64,
    pub eta_cube_lo: f64,
    pub eta_cube_hi: f64,
}

/// Energy fraction of the power law inside the ball of radius `ϱR`.
pub fn eta_ball(rho: f64, p: &EtaParams) -> f64 {
    if rho >= 1.0 {
        return 1.0;
    }
    let (r, eps) = (p.r_max, p.eps_grid);
    let inner = rho * r;
    if inner <= eps {
        return 0.0;
    }
    let e = 3.0 - 2.0 * p.kappa;
    let v = if e.abs() < 1e-9 {
        ln(inner / eps) / ln(r / eps)
    } else {
        (pow(inner, e) - pow(eps, e)) / (pow(r, e) - pow(eps, e))
    };
    v.clamp(0.0, 1.0)
}

/// Closed-form ball fraction and the cube bracket
/// `η_ball(ϱ) ≤ η_cube(ϱ) ≤ η_ball(min{1, √3ϱ})`.
pub fn eta_retention(rho: f64, p: &EtaParams) -> Result<EtaRetention> {
    p.validate()?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Config(format!("rho must lie in (0, 1], got {rho}")));
    }
    let ball = eta_ball(rho, p);
    Ok(EtaRetention {
        eta_ball: ball,
        eta_cube_lo: ball,
        eta_cube_hi: eta_ball((sqrt(3.0) * rho).min(1.0), p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sin;

    fn window_from(t: usize, h: usize, w: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> VideoWindow {
        let mut d = Vec::with_capacity(t * h * w);
        for ti in 0..t {
            for y in 0..h {
                for x in 0..w {
                    d.push(f(ti, y, x));
                }
            }
        }
        VideoWindow::new(t, h, w, d).unwrap()
    }

    fn rect() -> SpectralConfig {
        SpectralConfig {
            window_kind: WindowKind::Rect,
            ..SpectralConfig::default()
        }
    }

    #[test]
    fn zero_video_zero_spectrum() {
        let v = VideoWindow::zeros(4, 6, 5).unwrap();
        assert!(spectral_transform(&v, &rect()).coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn static_cosine_lands_on_two_bins() {
        let (t, h, w) = (4, 8, 8);
        let v = window_from(t, h, w, |_, _, x| cos(2.0 * PI * 2.0 * x as f64 / w as f64));
        let s = spectral_transform(&v, &rect());
        let total = s.total_energy();
        let on = s.at_freq(0, 0, 2).norm_sqr() + s.at_freq(0, 0, -2).norm_sqr();
        assert!((on / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_with_rect_window() {
        let v = window_from(5, 6, 7, |t, y, x| sin(0.3 * (t * 31 + y * 7 + x) as f64) * 0.4);
        let s = spectral_transform(&v, &rect());
        let n = (5 * 6 * 7) as f64;
        let time: f64 = v.data().iter().map(|x| x * x).sum();
        assert!((s.total_energy() - n * time).abs() <= 1e-9 * n * time);
    }

    #[test]
    fn hermitian_symmetry_for_real_input() {
        let v = window_from(6, 8, 5, |t, y, x| sin(1.7 * t as f64 + 0.9 * y as f64 * x as f64));
        let s = spectral_transform(&v, &SpectralConfig::default());
        let scale = s.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for kt in s.freq_t() {
            for ky in s.freq_y() {
                for kx in s.freq_x() {
                    let a = s.at_freq(kt, ky, kx);
                    let b = s.at_freq(-kt, -ky, -kx).conj();
                    assert!((a - b).norm() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn single_frame_window_is_identity_in_time() {
        let v = window_from(1, 4, 4, |_, y, x| (y * 4 + x) as f64 * 0.01);
        let s = spectral_transform(&v, &SpectralConfig::default());
        let fs = FrameSpectra::from_window(&v);
        assert_eq!(s.coeffs, fs.coeffs);
    }

    #[test]
    fn lowpass_full_ratio_is_identity() {
        let v = window_from(4, 6, 6, |t, y, x| sin((t + 2 * y + 3 * x) as f64));
        let s = spectral_transform(&v, &rect());
        assert_eq!(lowpass_cube(&s, 1.0), s);
    }

    #[test]
    fn lowpass_keeps_about_rho_cubed_on_reference_grid() {
        let m = CubeMask::new(0.3, [16, 224, 224]);
        assert_eq!(m.kept, [5, 67, 67]);
        let f = m.retained_fraction();
        // one bin per axis of rounding slack either side
        let lo = (4.0 / 16.0) * (66.0 / 224.0) * (66.0 / 224.0);
        let hi = (6.0 / 16.0) * (68.0 / 224.0) * (68.0 / 224.0);
        assert!(f >= lo && f <= hi && (f - 0.027).abs() < 0.002, "{f}");
    }

    #[test]
    fn lowpass_tiny_ratio_keeps_two_bins() {
        let m = CubeMask::new(1e-6, [8, 8, 8]);
        assert_eq!(m.kept, [2, 2, 2]);
        assert!(m.keeps(0, 0) && m.keeps(0, 1) && !m.keeps(0, -1));
    }

    #[test]
    fn lowpass_is_idempotent() {
        let v = window_from(8, 10, 12, |t, y, x| sin((t * 3 + y * 5 + x * 7) as f64 * 0.37));
        let s = spectral_transform(&v, &SpectralConfig::default());
        let once = lowpass_cube(&s, 0.4);
        assert_eq!(lowpass_cube(&once, 0.4), once);
    }

    #[test]
    fn dc_only_is_fully_retained() {
        let v = window_from(4, 8, 8, |_, _, _| 0.25);
        let s = spectral_transform(&v, &rect());
        for rho in [0.01, 0.3, 1.0] {
            assert!((measured_retention(&s, rho).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_energy_retention_is_undefined() {
        let s = spectral_transform(&VideoWindow::zeros(2, 4, 4).unwrap(), &rect());
        assert!(matches!(measured_retention(&s, 0.3), Err(Error::Undefined(_))));
    }

    #[test]
    fn eta_full_ball_is_one() {
        let p = EtaParams::for_grid([16, 224, 224], 1.8).unwrap();
        let e = eta_retention(1.0, &p).unwrap();
        assert_eq!(e.eta_ball, 1.0);
        assert_eq!(e.eta_cube_hi, 1.0);
    }

    #[test]
    fn eta_is_monotone_and_bracketed() {
        for kappa in [0.8, 1.5, 1.8, 2.5] {
            let p = EtaParams::for_grid([16, 64, 64], kappa).unwrap();
            let mut prev = 0.0;
            for i in 1..=100 {
                let rho = i as f64 / 100.0;
                let e = eta_retention(rho, &p).unwrap();
                assert!(e.eta_ball >= prev - 1e-15);
                assert!(e.eta_cube_lo <= e.eta_cube_hi);
                prev = e.eta_ball;
            }
        }
    }

    #[test]
    fn eta_reference_values() {
        let p = EtaParams::for_grid([16, 224, 224], 1.8).unwrap();
        assert!((p.r_max / p.eps_grid - sqrt(3.0) * 223.0).abs() < 1e-9);
        let e = eta_retention(0.3, &p).unwrap();
        assert!((e.eta_ball - 0.97).abs() <= 0.005, "{e:?}");
        assert!((e.eta_cube_hi - 0.987).abs() <= 0.005, "{e:?}");
    }

    #[test]
    fn eta_log_branch_matches_quadrature() {
        let p = EtaParams::for_grid([16, 224, 224], 1.5).unwrap();
        // 4π r^{2−2κ} on a log grid with Simpson's rule
        let shell = |a: f64, b: f64| {
            let n = 4000;
            let (la, lb) = (ln(a), ln(b));
            let h = (lb - la) / n as f64;
            let f = |u: f64| {
                let r = crate::math::exp(u);
                4.0 * PI * r * r * r * crate::math::pow(r, -2.0 * p.kappa)
            };
            let mut acc = f(la) + f(lb);
            for i in 1..n {
                acc += f(la + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for rho in [0.1, 0.3, 0.7] {
            let q = shell(p.eps_grid, rho * p.r_max) / shell(p.eps_grid, p.r_max);
            assert!((eta_ball(rho, &p) - q).abs() < 1e-9, "rho={rho}");
        }
    }

    #[test]
    fn shifted_cosine_matches_direct_dft() {
        let (t, h, w) = (8, 3, 8);
        let v = window_from(t, h, w, |ti, _, x| cos(2.0 * PI * (x as f64 - ti as f64) / w as f64));
        let s = spectral_transform(&v, &rect());
        let c = |i: usize, n: usize| i as f64 - (n / 2) as f64;
        let mut energy = 0.0;
        for (it, &kt) in s.freq_t().iter().enumerate() {
            for (iy, &ky) in s.freq_y().iter().enumerate() {
                for (ix, &kx) in s.freq_x().iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ti in 0..t {
                        for y in 0..h {
                            for x in 0..w {
                                let ph = -2.0
                                    * PI
                                    * (kt as f64 * ti as f64 / t as f64
                                        + ky as f64 * c(y, h) / h as f64
                                        + kx as f64 * c(x, w) / w as f64);
                                acc += Complex64::from_polar(v.at(ti, y, x), ph);
                            }
                        }
                    }
                    assert!((s.get(it, iy, ix) - acc).norm() < 1e-9, "({kt},{ky},{kx})");
                    energy += acc.norm_sqr();
                }
            }
        }
        let on = s.at_freq(-1, 0, 1).norm_sqr() + s.at_freq(1, 0, -1).norm_sqr();
        assert!((on / energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn white_noise_retains_volume_fraction() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let v = window_from(16, 64, 64, |_, _, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        let s = spectral_transform(&v, &rect());
        let r = measured_retention(&s, 0.3).unwrap();
        assert!((r - 0.027).abs() <= 0.01, "{r}");
    }
}

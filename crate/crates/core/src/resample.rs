//! Polar and log-radius resampling of per-frame spatial spectra, the angular
//! and log-radial harmonic stacks, and soft-edged ring energies.
//!
//! Radii are measured in spatial-frequency bins from DC. The polar grid
//! samples ring centres `ρ_k = (k − ½)·ρ_max/N_r`, `k = 1..N_r`, so `ρ = 0`
//! never appears and `log ρ` is always defined, at angles `θ_l = 2πl/M`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{SpectralConfig, WindowKind};
use crate::error::{Error, Result};
use crate::fft::{centered_freqs, natural_index, Fft};
use crate::math::{cos, floor, ln, sigmoid, sin, sqrt};
use crate::spectral::{temporal_window, EnergyGrid, FrameSpectra};

/// Largest symmetric radius representable on a centred axis of length `n`.
pub fn axis_half_extent(n: usize) -> usize {
    n.saturating_sub(1) / 2
}

/// Bilinear lookup table from polar cells to Cartesian spatial bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarLut {
    height: usize,
    width: usize,
    rho_max: f64,
    rho: Vec<f64>,
    theta: Vec<f64>,
    /// Per cell `(k, l)`, row-major: four `(flat index, weight)` taps.
    taps: Vec<[(usize, f64); 4]>,
}

impl PolarLut {
    pub fn new(height: usize, width: usize, rho_max: f64, rings: usize, angles: usize) -> Result<Self> {
        let limit = axis_half_extent(height).min(axis_half_extent(width)) as f64;
        if limit < 1.0 {
            return Err(Error::Config(format!(
                "{height}x{width} spatial grid is too small for polar resampling"
            )));
        }
        if !(rho_max > 0.0 && rho_max <= limit) {
            return Err(Error::Config(format!(
                "rho_max must lie in (0, {limit}], got {rho_max}"
            )));
        }
        if rings == 0 || angles == 0 {
            return Err(Error::Config("polar grid needs at least one ring and angle".into()));
        }
        let rho: Vec<f64> = (1..=rings).map(|k| (k as f64 - 0.5) * rho_max / rings as f64).collect();
        let theta: Vec<f64> = (0..angles).map(|l| 2.0 * PI * l as f64 / angles as f64).collect();
        let (cy, cx) = ((height / 2) as f64, (width / 2) as f64);
        let mut taps = Vec::with_capacity(rings * angles);
        for &r in &rho {
            for &a in &theta {
                let fx = cx + r * cos(a);
                let fy = cy + r * sin(a);
                let (x0, wx) = split(fx, width);
                let (y0, wy) = split(fy, height);
                let x1 = (x0 + 1).min(width - 1);
                let y1 = (y0 + 1).min(height - 1);
                taps.push([
                    (y0 * width + x0, (1.0 - wy) * (1.0 - wx)),
                    (y0 * width + x1, (1.0 - wy) * wx),
                    (y1 * width + x0, wy * (1.0 - wx)),
                    (y1 * width + x1, wy * wx),
                ]);
            }
        }
        Ok(Self {
            height,
            width,
            rho_max,
            rho,
            theta,
            taps,
        })
    }

    /// Table whose outer radius is the inscribed radius of the retained cube.
    pub fn for_config(height: usize, width: usize, cfg: &SpectralConfig) -> Result<Self> {
        let rho_max = polar_radius(height, width, cfg.lowpass_ratio)?;
        Self::new(height, width, rho_max, cfg.rings, cfg.angular_bins)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn taps(&self, k: usize, l: usize) -> &[(usize, f64); 4] {
        &self.taps[k * self.theta.len() + l]
    }

    /// Interpolates one centred spatial spectrum at every polar cell.
    pub fn sample<T>(&self, plane: &[T], mut out: impl FnMut(usize, usize, T))
    where
        T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
    {
        let m = self.theta.len();
        for (c, taps) in self.taps.iter().enumerate() {
            let v = taps
                .iter()
                .skip(1)
                .fold(plane[taps[0].0] * taps[0].1, |acc, &(i, w)| acc + plane[i] * w);
            out(c / m, c % m, v);
        }
    }
}

fn split(pos: f64, n: usize) -> (usize, f64) {
    let i0 = floor(pos).max(0.0) as usize;
    let i0 = i0.min(n - 1);
    let frac = (pos - i0 as f64).clamp(0.0, 1.0);
    (i0, frac)
}

/// Outer polar radius for a given low-pass ratio: the inscribed radius of
/// the retained spatial square, at least one bin, never past the grid.
pub fn polar_radius(height: usize, width: usize, lowpass_ratio: f64) -> Result<f64> {
    let limit = axis_half_extent(height).min(axis_half_extent(width));
    if limit < 1 {
        return Err(Error::Config(format!(
            "{height}x{width} spatial grid is too small for polar resampling"
        )));
    }
    let mask = crate::spectral::CubeMask::new(lowpass_ratio, [1, height, width]);
    Ok(mask.spatial_radius().clamp(1, limit) as f64)
}

/// `V̂(ρ_k, θ_l, t)`, layout `(t, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub frames: usize,
    pub rho: Vec<f64>,
    pub angles: usize,
    pub values: Vec<Complex64>,
}

impl PolarField {
    #[inline]
    pub fn get(&self, t: usize, k: usize, l: usize) -> Complex64 {
        self.values[(t * self.rho.len() + k) * self.angles + l]
    }

    pub fn rings(&self) -> usize {
        self.rho.len()
    }
}

pub fn polar_resample(fs: &FrameSpectra, lut: &PolarLut) -> Result<PolarField> {
    if (fs.height, fs.width) != lut.shape() {
        return Err(Error::Config(format!(
            "polar table built for {:?}, spectrum is {}x{}",
            lut.shape(),
            fs.height,
            fs.width
        )));
    }
    let (nr, m) = (lut.rho.len(), lut.theta.len());
    let mut values = vec![Complex64::new(0.0, 0.0); fs.frames * nr * m];
    for t in 0..fs.frames {
        let out = &mut values[t * nr * m..(t + 1) * nr * m];
        lut.sample(fs.frame(t), |k, l, v| out[k * m + l] = v);
    }
    Ok(PolarField {
        frames: fs.frames,
        rho: lut.rho.clone(),
        angles: m,
        values,
    })
}

/// Windowed temporal DFT of a `(t, series)` block, returned as
/// `(series, ω_t)` in centred temporal order.
fn temporal_dft(frames: usize, series: usize, data: &[Complex64], window: WindowKind) -> Vec<Complex64> {
    let taper = temporal_window(frames, window);
    let fft = Fft::new(frames);
    let mut out = vec![Complex64::new(0.0, 0.0); series * frames];
    let mut line = vec![Complex64::new(0.0, 0.0); frames];
    for s in 0..series {
        for t in 0..frames {
            line[t] = data[t * series + s] * taper[t];
        }
        fft.forward(&mut line);
        for (i, k) in centered_freqs(frames).into_iter().enumerate() {
            out[s * frames + i] = line[natural_index(k, frames)];
        }
    }
    out
}

/// `C̃_m(ρ, ω_t)`, layout `(k, m, ω_t)` with `m` and `ω_t` centred.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularStack {
    pub rho: Vec<f64>,
    pub harmonics: Vec<i64>,
    pub freq_t: Vec<i64>,
    pub coeffs: Vec<Complex64>,
}

impl AngularStack {
    #[inline]
    pub fn get(&self, k: usize, im: usize, it: usize) -> Complex64 {
        self.coeffs[(k * self.harmonics.len() + im) * self.freq_t.len() + it]
    }

    /// Iterates `(ρ index, m, ω_t, |C̃|²)` over every sample.
    pub fn samples(&self) -> impl Iterator<Item = (usize, i64, i64, f64)> + Clone + '_ {
        let (nm, nt) = (self.harmonics.len(), self.freq_t.len());
        self.coeffs.iter().enumerate().map(move |(i, c)| {
            let it = i % nt;
            let im = (i / nt) % nm;
            let k = i / (nt * nm);
            (k, self.harmonics[im], self.freq_t[it], c.norm_sqr())
        })
    }
}

/// Angular DFT `C_m(ρ,t) = (1/M) Σ_l V̂(ρ,θ_l,t) e^{−imθ_l}` followed by the
/// windowed temporal DFT.
pub fn angular_spectrum(field: &PolarField, window: WindowKind) -> AngularStack {
    let (t_len, nr, m) = (field.frames, field.rings(), field.angles);
    let fft = Fft::new(m);
    let harmonics = centered_freqs(m);
    let scale = 1.0 / m as f64;
    // (t, k, m) in centred harmonic order
    let mut cm = vec![Complex64::new(0.0, 0.0); t_len * nr * m];
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for t in 0..t_len {
        for k in 0..nr {
            for (l, slot) in line.iter_mut().enumerate() {
                *slot = field.get(t, k, l);
            }
            fft.forward(&mut line);
            let dst = &mut cm[(t * nr + k) * m..(t * nr + k + 1) * m];
            for (im, &h) in harmonics.iter().enumerate() {
                dst[im] = line[natural_index(h, m)] * scale;
            }
        }
    }
    AngularStack {
        rho: field.rho.clone(),
        harmonics,
        freq_t: centered_freqs(t_len),
        coeffs: temporal_dft(t_len, nr * m, &cm, window),
    }
}

/// `D̃_ν(ω_t)`, layout `(ν, ω_t)`, both centred.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRadialStack {
    /// Log-radius sample positions `ξ_j`.
    pub xi: Vec<f64>,
    pub harmonics: Vec<i64>,
    pub freq_t: Vec<i64>,
    pub coeffs: Vec<Complex64>,
}

impl LogRadialStack {
    pub fn xi_step(&self) -> f64 {
        if self.xi.len() < 2 {
            0.0
        } else {
            self.xi[1] - self.xi[0]
        }
    }

    #[inline]
    pub fn get(&self, inu: usize, it: usize) -> Complex64 {
        self.coeffs[inu * self.freq_t.len() + it]
    }

    /// Iterates `(ν, ω_t, |D̃|²)`.
    pub fn samples(&self) -> impl Iterator<Item = (i64, i64, f64)> + Clone + '_ {
        let nt = self.freq_t.len();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.harmonics[i / nt], self.freq_t[i % nt], c.norm_sqr()))
    }
}

/// Angle-averaged magnitude profile per frame, `(t, k)`.
pub fn radial_profile(field: &PolarField) -> Vec<f64> {
    let (nr, m) = (field.rings(), field.angles);
    let scale = 1.0 / m as f64;
    (0..field.frames * nr)
        .map(|tk| {
            let (t, k) = (tk / nr, tk % nr);
            (0..m).map(|l| field.get(t, k, l).norm()).sum::<f64>() * scale
        })
        .collect()
}

/// Log-radius positions `ξ_j` spanning `[ln ρ_1, ln ρ_{N_r}]`.
pub fn xi_grid(rho: &[f64], n_xi: usize) -> Vec<f64> {
    let (lo, hi) = (ln(rho[0]), ln(rho[rho.len() - 1]));
    if n_xi == 1 {
        return vec![lo];
    }
    (0..n_xi)
        .map(|j| lo + (hi - lo) * j as f64 / (n_xi - 1) as f64)
        .collect()
}

/// Linear interpolation of a profile sampled at increasing `rho` onto `at`.
fn interp_linear(rho: &[f64], values: &[f64], at: f64) -> f64 {
    if at <= rho[0] {
        return values[0];
    }
    let last = rho.len() - 1;
    if at >= rho[last] {
        return values[last];
    }
    let j = rho.partition_point(|&r| r <= at) - 1;
    let f = (at - rho[j]) / (rho[j + 1] - rho[j]);
    values[j] * (1.0 - f) + values[j + 1] * f
}

/// Resamples the angle-averaged magnitude onto `N_ξ` log-spaced radii, then
/// takes `(1/N_ξ)`-normalised DFT over `ξ` and the windowed temporal DFT.
pub fn logradial_spectrum(field: &PolarField, n_xi: usize, window: WindowKind) -> Result<LogRadialStack> {
    if n_xi < 4 {
        return Err(Error::Config(format!("logradius_bins must be >= 4, got {n_xi}")));
    }
    if field.rings() < 2 {
        return Err(Error::Config("log-radius resampling needs at least two rings".into()));
    }
    let profile = radial_profile(field);
    let nr = field.rings();
    let xi = xi_grid(&field.rho, n_xi);
    let fft = Fft::new(n_xi);
    let harmonics = centered_freqs(n_xi);
    let scale = 1.0 / n_xi as f64;
    let mut dn = vec![Complex64::new(0.0, 0.0); field.frames * n_xi];
    let mut line = vec![Complex64::new(0.0, 0.0); n_xi];
    for t in 0..field.frames {
        let prof = &profile[t * nr..(t + 1) * nr];
        for (j, &x) in xi.iter().enumerate() {
            line[j] = Complex64::new(interp_linear(&field.rho, prof, libm::exp(x)), 0.0);
        }
        fft.forward(&mut line);
        for (inu, &nu) in harmonics.iter().enumerate() {
            dn[t * n_xi + inu] = line[natural_index(nu, n_xi)] * scale;
        }
    }
    Ok(LogRadialStack {
        xi,
        harmonics,
        freq_t: centered_freqs(field.frames),
        coeffs: temporal_dft(field.frames, n_xi, &dn, window),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicStack {
    pub angular: AngularStack,
    pub logradial: LogRadialStack,
}

pub fn harmonic_stack(field: &PolarField, cfg: &SpectralConfig) -> Result<HarmonicStack> {
    Ok(HarmonicStack {
        angular: angular_spectrum(field, cfg.window_kind),
        logradial: logradial_spectrum(field, cfg.logradius_bins, cfg.window_kind)?,
    })
}

/// Logistic-edged annular masks over a centred spatial grid.
///
/// Ring `k` spans `[r_{k−1}, r_k]` with `r_j = j·ρ_max/N_r`; the innermost
/// ring has no lower edge. The DC bin carries no weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMasks {
    pub height: usize,
    pub width: usize,
    pub rings: usize,
    pub rho_max: f64,
    /// Bins with nonzero weight and their per-ring weights.
    entries: Vec<(usize, Vec<f64>)>,
}

impl RingMasks {
    pub fn new(height: usize, width: usize, rho_max: f64, rings: usize, edge: f64) -> Self {
        let ring_w = rho_max / rings as f64;
        let (cy, cx) = ((height / 2) as i64, (width / 2) as i64);
        let mut entries = Vec::new();
        for iy in 0..height {
            for ix in 0..width {
                let (dy, dx) = ((iy as i64 - cy) as f64, (ix as i64 - cx) as f64);
                if dy == 0.0 && dx == 0.0 {
                    continue;
                }
                let r = sqrt(dx * dx + dy * dy);
                let outer = |j: usize| sigmoid(edge * (r - j as f64 * ring_w) / ring_w);
                let weights: Vec<f64> = (1..=rings)
                    .map(|k| {
                        let lower = if k == 1 { 1.0 } else { outer(k - 1) };
                        (lower - outer(k)).max(0.0)
                    })
                    .collect();
                if weights.iter().any(|&w| w > 1e-12) {
                    entries.push((iy * width + ix, weights));
                }
            }
        }
        Self {
            height,
            width,
            rings,
            rho_max,
            entries,
        }
    }

    pub fn for_config(height: usize, width: usize, cfg: &SpectralConfig) -> Result<Self> {
        let rho_max = polar_radius(height, width, cfg.lowpass_ratio)?;
        Ok(Self::new(height, width, rho_max, cfg.rings, cfg.soft_ring_edge))
    }

    /// Raw masked energy per ring for one frame's energy plane.
    pub fn apply(&self, plane: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rings];
        for (i, w) in &self.entries {
            let e = plane[*i];
            if e != 0.0 {
                for (o, wk) in out.iter_mut().zip(w) {
                    *o += e * wk;
                }
            }
        }
        out
    }
}

/// `E_k(t)` normalised per frame, layout `(t, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingEnergies {
    pub frames: usize,
    pub rings: usize,
    pub values: Vec<f64>,
    /// Unnormalised masked energy per frame.
    pub raw_totals: Vec<f64>,
}

impl RingEnergies {
    #[inline]
    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.values[t * self.rings + k]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.values[t * self.rings..(t + 1) * self.rings]
    }
}

pub fn ring_energies(e: &EnergyGrid, masks: &RingMasks, eps_stab: f64) -> Result<RingEnergies> {
    let [t_len, h, w] = e.dims;
    if (h, w) != (masks.height, masks.width) {
        return Err(Error::Config(format!(
            "ring masks built for {}x{}, energy grid is {h}x{w}",
            masks.height, masks.width
        )));
    }
    let mut values = Vec::with_capacity(t_len * masks.rings);
    let mut raw_totals = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let raw = masks.apply(&e.energy[t * h * w..(t + 1) * h * w]);
        let total: f64 = raw.iter().sum();
        let denom = total + eps_stab;
        values.extend(raw.iter().map(|r| r / denom));
        raw_totals.push(total);
    }
    Ok(RingEnergies {
        frames: t_len,
        rings: masks.rings,
        values,
        raw_totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    fn frames_from(t: usize, h: usize, w: usize, f: impl Fn(usize, i64, i64) -> Complex64) -> FrameSpectra {
        let fy = centered_freqs(h);
        let fx = centered_freqs(w);
        let mut coeffs = Vec::with_capacity(t * h * w);
        for ti in 0..t {
            for &ky in &fy {
                for &kx in &fx {
                    coeffs.push(f(ti, ky, kx));
                }
            }
        }
        FrameSpectra {
            frames: t,
            height: h,
            width: w,
            coeffs,
        }
    }

    #[test]
    fn lut_is_partition_of_unity_and_in_bounds() {
        let lut = PolarLut::new(32, 24, 11.0, 20, 24).unwrap();
        for k in 0..20 {
            for l in 0..24 {
                let taps = lut.taps(k, l);
                let s: f64 = taps.iter().map(|t| t.1).sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(taps.iter().all(|t| t.0 < 32 * 24 && t.1 >= 0.0));
            }
        }
    }

    #[test]
    fn lut_rejects_radius_past_grid() {
        assert!(PolarLut::new(16, 16, 7.5, 4, 8).is_err());
        assert!(PolarLut::new(16, 16, 7.0, 4, 8).is_ok());
    }

    #[test]
    fn radially_symmetric_spectrum_gives_theta_constant_field() {
        let fs = frames_from(1, 64, 64, |_, ky, kx| {
            let r2 = (kx * kx + ky * ky) as f64;
            Complex64::new(exp(-r2 / 800.0), 0.0)
        });
        let lut = PolarLut::new(64, 64, 20.0, 10, 24).unwrap();
        let p = polar_resample(&fs, &lut).unwrap();
        for k in 0..10 {
            let vals: Vec<f64> = (0..24).map(|l| p.get(0, k, l).re).collect();
            let mean = vals.iter().sum::<f64>() / 24.0;
            for v in vals {
                assert!((v - mean).abs() <= 1e-3 * mean.abs(), "ring {k}");
            }
        }
    }

    #[test]
    fn impulse_only_reaches_covering_cells() {
        let fs = frames_from(1, 32, 32, |_, ky, kx| {
            if kx == 5 && ky == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let lut = PolarLut::new(32, 32, 10.0, 20, 24).unwrap();
        let p = polar_resample(&fs, &lut).unwrap();
        for k in 0..20 {
            for l in 0..24 {
                let v = p.get(0, k, l).norm();
                let (x, y) = (lut.rho()[k] * cos(lut.theta()[l]), lut.rho()[k] * sin(lut.theta()[l]));
                let covers = (x - 5.0).abs() < 1.0 && y.abs() < 1.0;
                if !covers {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn theta_constant_field_has_only_m_zero() {
        let field = PolarField {
            frames: 4,
            rho: vec![1.0, 2.0, 3.0],
            angles: 8,
            values: vec![Complex64::new(0.7, -0.2); 4 * 3 * 8],
        };
        let st = angular_spectrum(&field, WindowKind::Rect);
        for (_, m, _, e) in st.samples() {
            if m != 0 {
                assert!(e < 1e-24);
            }
        }
    }

    #[test]
    fn static_second_harmonic_lands_on_m2_dc() {
        let (m, t_len) = (16, 8);
        let mut values = Vec::new();
        for _ in 0..t_len {
            for l in 0..m {
                let a = 2.0 * 2.0 * PI * l as f64 / m as f64;
                values.push(Complex64::new(cos(a), sin(a)));
            }
        }
        let field = PolarField {
            frames: t_len,
            rho: vec![1.0],
            angles: m,
            values,
        };
        let st = angular_spectrum(&field, WindowKind::Rect);
        let total: f64 = st.samples().map(|s| s.3).sum();
        let on: f64 = st.samples().filter(|s| s.1 == 2 && s.2 == 0).map(|s| s.3).sum();
        assert!((on / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angular_parseval() {
        let (t_len, nr, m) = (6, 3, 12);
        let values: Vec<Complex64> = (0..t_len * nr * m)
            .map(|i| Complex64::new(sin(i as f64 * 0.37), cos(i as f64 * 1.1)))
            .collect();
        let field = PolarField {
            frames: t_len,
            rho: vec![1.0, 2.0, 3.0],
            angles: m,
            values,
        };
        let st = angular_spectrum(&field, WindowKind::Hann);
        let taper = temporal_window(t_len, WindowKind::Hann);
        let lhs: f64 = st.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let mut rhs = 0.0;
        for (t, &h) in taper.iter().enumerate() {
            for k in 0..nr {
                for l in 0..m {
                    rhs += (field.get(t, k, l) * h).norm_sqr();
                }
            }
        }
        rhs *= t_len as f64 / m as f64;
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn xi_constant_profile_has_only_nu_zero() {
        let field = PolarField {
            frames: 3,
            rho: vec![0.5, 1.5, 2.5, 3.5],
            angles: 8,
            values: vec![Complex64::new(0.0, 2.0); 3 * 4 * 8],
        };
        let st = logradial_spectrum(&field, 8, WindowKind::Rect).unwrap();
        for (nu, _, e) in st.samples() {
            if nu != 0 {
                assert!(e < 1e-24);
            }
        }
        let zero = PolarField {
            values: vec![Complex64::new(0.0, 0.0); 3 * 4 * 8],
            ..field
        };
        let z = logradial_spectrum(&zero, 8, WindowKind::Rect).unwrap();
        assert!(z.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn ring_masks_partition_inside_disk() {
        let masks = RingMasks::new(64, 64, 20.0, 10, 20.0);
        for (i, w) in &masks.entries {
            let (iy, ix) = ((i / 64) as f64 - 32.0, (i % 64) as f64 - 32.0);
            let r = sqrt(ix * ix + iy * iy);
            let s: f64 = w.iter().sum();
            if r < 18.0 {
                assert!((s - 1.0).abs() < 1e-6, "r={r} s={s}");
            }
            assert!(s <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn ring_energies_normalise_and_handle_silence() {
        let (h, w) = (32, 32);
        let masks = RingMasks::new(h, w, 12.0, 6, 20.0);
        let mut energy = vec![0.0; 2 * h * w];
        for (i, e) in energy[..h * w].iter_mut().enumerate() {
            *e = 1.0 + (i % 7) as f64;
        }
        let grid = EnergyGrid {
            dims: [2, h, w],
            energy,
        };
        let re = ring_energies(&grid, &masks, 1e-8).unwrap();
        let s0: f64 = re.frame(0).iter().sum();
        assert!((s0 - 1.0).abs() < 1e-6);
        assert!(re.frame(1).iter().all(|&v| v == 0.0));
    }
}

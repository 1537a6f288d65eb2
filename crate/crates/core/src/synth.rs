//! Synthetic clips with known similarity motion, and power-law spectrum
//! videos.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64`. Base-pattern draws use stream 0 and additive noise uses
//! stream 1, so changing the noise level never changes the pattern.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::config::WindowKind;
use crate::error::{Error, Result};
use crate::fft::{centered_freq, centered_freqs, natural_index, transform_axis, Fft};
use crate::gates::WeightedSamples;
use crate::math::{cos, exp, floor, ln, round, sin, sqrt};
use crate::resample::{AngularStack, HarmonicStack, LogRadialStack, RingEnergies};
use crate::spectral::temporal_window;
use crate::video::VideoWindow;

/// Name recorded alongside calibration files.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Translation,
    Rotation,
    Scaling,
    Mixed,
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub kind: SynthKind,
    /// Pixels per frame `(x, y)`.
    #[serde(default)]
    pub velocity: [f64; 2],
    /// rad/frame, counter-clockwise in image coordinates (x right, y down).
    #[serde(default)]
    pub omega: f64,
    /// Log-scale per frame; positive zooms in.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl MotionSpec {
    pub fn stationary(seed: u64) -> Self {
        Self {
            kind: SynthKind::Static,
            velocity: [0.0, 0.0],
            omega: 0.0,
            alpha: 0.0,
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn translation(vx: f64, vy: f64, seed: u64) -> Self {
        Self {
            kind: SynthKind::Translation,
            velocity: [vx, vy],
            ..Self::stationary(seed)
        }
    }

    pub fn rotation(omega: f64, seed: u64) -> Self {
        Self {
            kind: SynthKind::Rotation,
            omega,
            ..Self::stationary(seed)
        }
    }

    pub fn scaling(alpha: f64, seed: u64) -> Self {
        Self {
            kind: SynthKind::Scaling,
            alpha,
            ..Self::stationary(seed)
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let v0 = self.velocity == [0.0, 0.0];
        let ok = match self.kind {
            SynthKind::Translation => self.omega == 0.0 && self.alpha == 0.0,
            SynthKind::Rotation => v0 && self.alpha == 0.0,
            SynthKind::Scaling => v0 && self.omega == 0.0,
            SynthKind::Static => v0 && self.omega == 0.0 && self.alpha == 0.0,
            SynthKind::Mixed => true,
        };
        if !ok {
            return Err(Error::Config(format!(
                "{:?} motion carries parameters of another motion type",
                self.kind
            )));
        }
        let finite = self.velocity.iter().all(|v| v.is_finite())
            && self.omega.is_finite()
            && self.alpha.is_finite()
            && self.noise_sigma.is_finite();
        if !finite || self.noise_sigma < 0.0 {
            return Err(Error::Config(
                "motion parameters must be finite, noise nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    /// Separable cosine checkerboard at the band centre frequency.
    Checker,
    /// Signed isotropic Gaussian blobs.
    GaussianBlobs,
    /// Random plane waves with radial frequency inside the band.
    BandpassNoise,
}

/// Base-pattern parameters. Frequencies are in cycles per pixel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseSpec {
    pub kind: BaseKind,
    pub band: [f64; 2],
    /// Plane waves (bandpass) or blobs.
    pub components: usize,
    /// Plane-wave directions evenly spaced over a half turn instead of random.
    pub even_directions: bool,
    pub blob_sigma: f64,
    /// Outer radius of the circular aperture as a fraction of `min(H, W)`;
    /// 0 disables it.
    pub aperture: f64,
    /// Periodic base on the pixel grid and integer circular shifts.
    pub exact: bool,
    /// Peak deviation from mid-grey.
    pub contrast: f64,
}

impl Default for BaseSpec {
    fn default() -> Self {
        Self {
            kind: BaseKind::BandpassNoise,
            band: [0.05, 0.10],
            components: 16,
            even_directions: false,
            blob_sigma: 4.0,
            aperture: 0.45,
            exact: false,
            contrast: 0.4,
        }
    }
}

impl BaseSpec {
    pub fn of(kind: BaseKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    /// Periodic pattern for integer-shift translation fixtures.
    pub fn exact(kind: BaseKind) -> Self {
        Self {
            kind,
            exact: true,
            aperture: 0.0,
            ..Self::default()
        }
    }

    /// Base pattern that makes the given motion type well resolved on a
    /// 128×128 grid: slowly varying texture for rotation (fine texture
    /// aliases across the angular bins), a narrow mid band for zooms and a
    /// broad band for translation.
    pub fn for_motion(kind: SynthKind) -> Self {
        match kind {
            SynthKind::Rotation => Self {
                band: [0.015, 0.03],
                components: 6,
                ..Self::default()
            },
            SynthKind::Scaling => Self {
                band: [0.08, 0.12],
                components: 4,
                ..Self::default()
            },
            _ => Self {
                band: [0.02, 0.12],
                components: 24,
                ..Self::default()
            },
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw (Box–Muller, one value per pair of uniforms).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform(rng).max(f64::MIN_POSITIVE);
    let u2 = uniform(rng);
    sqrt(-2.0 * ln(u1)) * cos(2.0 * PI * u2)
}

enum Pattern {
    Waves(Vec<([f64; 2], f64)>),
    Blobs(Vec<([f64; 2], f64)>, f64),
    Checker([f64; 2]),
}

impl Pattern {
    fn draw(base: &BaseSpec, h: usize, w: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let [lo, hi] = base.band;
        if !(lo >= 0.0 && hi >= lo && hi <= 0.5) {
            return Err(Error::Config(format!(
                "band must satisfy 0 <= lo <= hi <= 0.5, got {lo}..{hi}"
            )));
        }
        let snap = |f: f64, n: usize| if base.exact { round(f * n as f64) / n as f64 } else { f };
        Ok(match base.kind {
            BaseKind::Checker => {
                let f = 0.5 * (lo + hi) / core::f64::consts::SQRT_2;
                Pattern::Checker([snap(f, w), snap(f, h)])
            }
            BaseKind::BandpassNoise => {
                let n = base.components.max(1);
                let waves = (0..n)
                    .map(|j| {
                        let r = lo + (hi - lo) * uniform(rng);
                        let a = if base.even_directions {
                            PI * j as f64 / n as f64
                        } else {
                            PI * uniform(rng)
                        };
                        let phase = 2.0 * PI * uniform(rng);
                        ([snap(r * cos(a), w), snap(r * sin(a), h)], phase)
                    })
                    .collect();
                Pattern::Waves(waves)
            }
            BaseKind::GaussianBlobs => {
                let n = base.components.max(1);
                let spread = 0.3 * h.min(w) as f64;
                let blobs = (0..n)
                    .map(|j| {
                        let rr = spread * sqrt(uniform(rng));
                        let a = 2.0 * PI * uniform(rng);
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        ([rr * cos(a), rr * sin(a)], sign)
                    })
                    .collect();
                Pattern::Blobs(blobs, base.blob_sigma)
            }
        })
    }

    /// Pattern value at offset `(x, y)` from the frame centre; periodic
    /// treatment wraps blob distances on the `w×h` torus.
    fn eval(&self, x: f64, y: f64, periodic: Option<(f64, f64)>) -> f64 {
        match self {
            Pattern::Checker([fx, fy]) => cos(2.0 * PI * fx * x) * cos(2.0 * PI * fy * y),
            Pattern::Waves(waves) => waves
                .iter()
                .map(|([fx, fy], ph)| cos(2.0 * PI * (fx * x + fy * y) + ph))
                .sum(),
            Pattern::Blobs(blobs, sigma) => blobs
                .iter()
                .map(|([bx, by], s)| {
                    let (mut dx, mut dy) = (x - bx, y - by);
                    if let Some((w, h)) = periodic {
                        dx -= w * round(dx / w);
                        dy -= h * round(dy / h);
                    }
                    s * exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
                })
                .sum(),
        }
    }
}

fn aperture_weight(r: f64, outer: f64) -> f64 {
    let inner = 0.7 * outer;
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        0.5 * (1.0 + cos(PI * (r - inner) / (outer - inner)))
    }
}

/// Base image rendered on a grid `factor` times finer than the frame.
struct Raster {
    factor: usize,
    h: usize,
    w: usize,
    data: Vec<f64>,
}

impl Raster {
    /// Bilinear sample at frame-pixel coordinates; zero outside.
    fn sample(&self, x: f64, y: f64) -> f64 {
        let f = self.factor as f64;
        let (gx, gy) = (x * f, y * f);
        let (x0, y0) = (floor(gx), floor(gy));
        let (ax, ay) = (gx - x0, gy - y0);
        let at = |xi: f64, yi: f64| -> f64 {
            if xi < 0.0 || yi < 0.0 || xi >= self.w as f64 || yi >= self.h as f64 {
                0.0
            } else {
                self.data[yi as usize * self.w + xi as usize]
            }
        };
        at(x0, y0) * (1.0 - ax) * (1.0 - ay)
            + at(x0 + 1.0, y0) * ax * (1.0 - ay)
            + at(x0, y0 + 1.0) * (1.0 - ax) * ay
            + at(x0 + 1.0, y0 + 1.0) * ax * ay
    }
}

const SUPERSAMPLE: usize = 2;

/// Renders `T` frames of the base pattern under the similarity motion in
/// `spec`.
///
/// In exact mode frame `t` is frame 0 circularly shifted by
/// `round(v·t)` pixels. Otherwise the motion is centred in time at
/// `t₀ = (T−1)/2`: frame `t` samples the base at
/// `x = R(−Ω(t−t₀))·(x' − c − v(t−t₀)) / e^{α(t−t₀)} + c`.
pub fn synth_sim2(base: &BaseSpec, spec: &MotionSpec, t_len: usize, h: usize, w: usize) -> Result<VideoWindow> {
    spec.validate()?;
    if t_len == 0 || h == 0 || w == 0 {
        return Err(Error::Shape(format!(
            "dimensions must be positive, got {t_len}x{h}x{w}"
        )));
    }
    let span = spec.alpha * t_len as f64;
    if !(exp(span) >= 0.1 && exp(span) <= 10.0) {
        return Err(Error::Degenerate(format!(
            "scale collapse: e^(alpha*T) = {} lies outside [0.1, 10]",
            exp(span)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pattern = Pattern::draw(base, h, w, &mut rng)?;
    let (cx, cy) = ((w / 2) as f64, (h / 2) as f64);
    let mut data = vec![0.0; t_len * h * w];

    if base.exact {
        if spec.omega != 0.0 || spec.alpha != 0.0 {
            return Err(Error::Config("exact mode supports translation only".into()));
        }
        let [vx, vy] = spec.velocity;
        if vx != floor(vx) || vy != floor(vy) {
            return Err(Error::Config("exact mode needs integer velocities".into()));
        }
        let mut frame0 = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                frame0[y * w + x] = pattern.eval(x as f64 - cx, y as f64 - cy, Some((w as f64, h as f64)));
            }
        }
        let scale = base.contrast / frame0.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for v in frame0.iter_mut() {
            *v = 0.5 + scale * *v;
        }
        for t in 0..t_len {
            let sx = (vx as i64 * t as i64).rem_euclid(w as i64) as usize;
            let sy = (vy as i64 * t as i64).rem_euclid(h as i64) as usize;
            let out = &mut data[t * h * w..(t + 1) * h * w];
            for y in 0..h {
                let src_y = (y + h - sy) % h;
                for x in 0..w {
                    out[y * w + x] = frame0[src_y * w + (x + w - sx) % w];
                }
            }
        }
    } else {
        let (rh, rw) = (h * SUPERSAMPLE, w * SUPERSAMPLE);
        let outer = base.aperture * h.min(w) as f64;
        let f = SUPERSAMPLE as f64;
        let mut raster = vec![0.0; rh * rw];
        for gy in 0..rh {
            for gx in 0..rw {
                let (x, y) = (gx as f64 / f - cx, gy as f64 / f - cy);
                let a = if base.aperture > 0.0 {
                    aperture_weight(sqrt(x * x + y * y), outer)
                } else {
                    1.0
                };
                raster[gy * rw + gx] = if a > 0.0 { a * pattern.eval(x, y, None) } else { 0.0 };
            }
        }
        let scale = base.contrast / raster.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for v in raster.iter_mut() {
            *v *= scale;
        }
        let raster = Raster {
            factor: SUPERSAMPLE,
            h: rh,
            w: rw,
            data: raster,
        };
        let t0 = (t_len as f64 - 1.0) / 2.0;
        for t in 0..t_len {
            let dt = t as f64 - t0;
            let (ca, sa) = (cos(spec.omega * dt), sin(spec.omega * dt));
            let inv_s = exp(-spec.alpha * dt);
            let (dx, dy) = (spec.velocity[0] * dt, spec.velocity[1] * dt);
            let out = &mut data[t * h * w..(t + 1) * h * w];
            for y in 0..h {
                for x in 0..w {
                    let (px, py) = (x as f64 - cx - dx, y as f64 - cy - dy);
                    // inverse rotation R(−Ωt)
                    let qx = (ca * px + sa * py) * inv_s;
                    let qy = (-sa * px + ca * py) * inv_s;
                    out[y * w + x] = 0.5 + raster.sample(qx + cx, qy + cy);
                }
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut noise = ChaCha8Rng::seed_from_u64(spec.seed);
        noise.set_stream(1);
        for v in data.iter_mut() {
            *v += spec.noise_sigma * gaussian(&mut noise);
        }
    }
    VideoWindow::new(t_len, h, w, data)
}

/// Frame count of the standard end-to-end fixtures.
pub const FIXTURE_FRAMES: usize = 16;
/// Side length of the standard end-to-end fixtures.
pub const FIXTURE_SIZE: usize = 128;

/// Motion parameters of the standard pure-motion fixture of each type.
pub fn fixture_motion(kind: SynthKind, seed: u64) -> MotionSpec {
    match kind {
        SynthKind::Translation => MotionSpec::translation(1.0, 0.5, seed),
        SynthKind::Rotation => MotionSpec::rotation(0.08, seed),
        SynthKind::Scaling => MotionSpec::scaling(0.02, seed),
        SynthKind::Mixed => MotionSpec {
            kind: SynthKind::Mixed,
            velocity: [0.5, 0.25],
            omega: 0.04,
            alpha: 0.01,
            noise_sigma: 0.0,
            seed,
        },
        SynthKind::Static => MotionSpec::stationary(seed),
    }
}

/// `16×128×128` clip of the standard fixture motion on the matching
/// [`BaseSpec::for_motion`] base.
pub fn motion_fixture(kind: SynthKind, noise: f64, seed: u64) -> Result<VideoWindow> {
    let spec = fixture_motion(kind, seed).with_noise(noise);
    synth_sim2(
        &BaseSpec::for_motion(kind),
        &spec,
        FIXTURE_FRAMES,
        FIXTURE_SIZE,
        FIXTURE_SIZE,
    )
}

/// Side length and frame count of the exactness fixtures.
pub const EXACT_SIZE: usize = 32;

/// Periodic integer-velocity translation on a `32×32×32` grid. Shifting by
/// `T·v` pixels is a whole number of periods, so the clip is periodic in time
/// as well and a rectangular window adds no leakage. The base stays below
/// `0.14` cycles/pixel so `|k·v|` never wraps past the temporal Nyquist bin.
pub fn exactness_fixture(vx: i64, vy: i64, seed: u64) -> Result<VideoWindow> {
    let base = BaseSpec {
        band: [0.03, 0.14],
        components: 12,
        ..BaseSpec::exact(BaseKind::BandpassNoise)
    };
    let spec = MotionSpec::translation(vx as f64, vy as f64, seed);
    synth_sim2(&base, &spec, EXACT_SIZE, EXACT_SIZE, EXACT_SIZE)
}

/// Rows `[ω_x, ω_y, m, ν, 1]` drawn uniformly from `[−8, 8]` (last column
/// 1), targets `φ·θ + σ·N(0, 1)` and unit weights, energies and gates.
pub fn hyperplane_samples(theta: &[f64; 5], n: usize, sigma: f64, seed: u64) -> WeightedSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let mut r = [1.0; 5];
        for c in r.iter_mut().take(4) {
            *c = 16.0 * uniform(&mut rng) - 8.0;
        }
        let clean: f64 = r.iter().zip(theta).map(|(a, b)| a * b).sum();
        targets.push(clean + sigma * gaussian(&mut rng));
        rows.push(r);
    }
    WeightedSamples {
        rows,
        targets,
        weights: vec![1.0; n],
        energies: vec![1.0; n],
        gates: vec![1.0; n],
    }
}

/// Harmonic stack of a single angular harmonic `m` on one radius rotating at
/// `Ω` rad/frame, `C_m(t) = e^{−i m Ω t}`, with an empty log-radial part.
pub fn harmonic_tone(t_len: usize, m: i64, omega: f64, window: WindowKind) -> HarmonicStack {
    let nm = 8usize;
    let harmonics = centered_freqs(nm);
    let im = harmonics
        .iter()
        .position(|&h| h == m)
        .expect("harmonic must lie in -4..=3");
    let taper = temporal_window(t_len, window);
    let fft = Fft::new(t_len);
    let freq_t = centered_freqs(t_len);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nm * t_len];
    let mut line: Vec<Complex64> = (0..t_len)
        .map(|t| Complex64::from_polar(taper[t], -(m as f64) * omega * t as f64))
        .collect();
    fft.forward(&mut line);
    for (i, &k) in freq_t.iter().enumerate() {
        coeffs[im * t_len + i] = line[natural_index(k, t_len)];
    }
    HarmonicStack {
        angular: AngularStack {
            rho: vec![1.0],
            harmonics,
            freq_t: freq_t.clone(),
            coeffs,
        },
        logradial: LogRadialStack {
            xi: vec![0.0, 0.1, 0.2, 0.3],
            harmonics: centered_freqs(4),
            freq_t,
            coeffs: vec![Complex64::new(0.0, 0.0); 4 * t_len],
        },
    }
}

/// Ring energies with every frame's energy in ring `ring`.
pub fn single_ring(frames: usize, rings: usize, ring: usize) -> RingEnergies {
    let mut values = vec![0.0; frames * rings];
    for t in 0..frames {
        values[t * rings + ring] = 1.0;
    }
    RingEnergies {
        frames,
        rings,
        values,
        raw_totals: vec![1.0; frames],
    }
}

/// Video whose spectrum has magnitude `r^{−κ}` on dimensionless radius
/// `r = ‖(k_t/(T−1), k_y/(H−1), k_x/(W−1))‖`, DC removed, phases taken from the
/// DFT of white noise so Hermitian symmetry holds, then scaled into `[0, 1]`
/// around mid-grey so the normalised window has no DC term.
pub fn synth_powerlaw(t_len: usize, h: usize, w: usize, kappa: f64, seed: u64) -> Result<VideoWindow> {
    if !(kappa > 0.0) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    if t_len == 0 || h == 0 || w == 0 {
        return Err(Error::Shape(format!(
            "dimensions must be positive, got {t_len}x{h}x{w}"
        )));
    }
    let dims = [t_len, h, w];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..t_len * h * w)
        .map(|_| Complex64::new(gaussian(&mut rng), 0.0))
        .collect();
    let plans = dims.map(Fft::new);
    for (axis, plan) in plans.iter().enumerate() {
        transform_axis(&mut buf, &dims, axis, plan);
    }
    let inv = |n: usize| if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let (st, sy, sx) = (inv(t_len), inv(h), inv(w));
    let signed = |i: usize, n: usize| {
        // natural order → signed frequency
        let k = i as i64;
        if k >= (n as i64 + 1) / 2 {
            k - n as i64
        } else {
            k
        }
    };
    for it in 0..t_len {
        let kt = signed(it, t_len) as f64 * st;
        for iy in 0..h {
            let ky = signed(iy, h) as f64 * sy;
            for ix in 0..w {
                let kx = signed(ix, w) as f64 * sx;
                let r = sqrt(kt * kt + ky * ky + kx * kx);
                let c = &mut buf[(it * h + iy) * w + ix];
                let n = c.norm();
                *c = if r == 0.0 || n == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    *c / n * libm::pow(r, -kappa)
                };
            }
        }
    }
    for (axis, plan) in plans.iter().enumerate() {
        inverse_axis(&mut buf, &dims, axis, plan);
    }
    let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let peak = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 0.5 / peak } else { 0.0 };
    VideoWindow::new(t_len, h, w, re.iter().map(|v| 0.5 + gain * v).collect())
}

fn inverse_axis(data: &mut [Complex64], dims: &[usize], axis: usize, fft: &Fft) {
    for c in data.iter_mut() {
        *c = c.conj();
    }
    transform_axis(data, dims, axis, fft);
    let s = 1.0 / dims[axis] as f64;
    for c in data.iter_mut() {
        *c = c.conj() * s;
    }
}

/// Radially binned mean spectral energy of a video on the dimensionless
/// radius used by [`synth_powerlaw`]: `(r, mean energy)` per occupied bin.
pub fn radial_energy_profile(v: &VideoWindow, bins: usize) -> Vec<(f64, f64)> {
    let (t_len, h, w) = v.shape();
    let dims = [t_len, h, w];
    let mut buf: Vec<Complex64> = v.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for (axis, &n) in dims.iter().enumerate() {
        transform_axis(&mut buf, &dims, axis, &Fft::new(n));
    }
    let inv = |n: usize| if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let r_max = sqrt(3.0) * 0.5 * (1.0 + 1e-9) * 1.1;
    let mut sum = vec![0.0; bins];
    let mut cnt = vec![0usize; bins];
    let mut rsum = vec![0.0; bins];
    for it in 0..t_len {
        let kt = centered_freq((it + t_len / 2) % t_len, t_len) as f64 * inv(t_len);
        for iy in 0..h {
            let ky = centered_freq((iy + h / 2) % h, h) as f64 * inv(h);
            for ix in 0..w {
                let kx = centered_freq((ix + w / 2) % w, w) as f64 * inv(w);
                let r = sqrt(kt * kt + ky * ky + kx * kx);
                if r == 0.0 {
                    continue;
                }
                let b = ((r / r_max) * bins as f64) as usize;
                if b < bins {
                    sum[b] += buf[(it * h + iy) * w + ix].norm_sqr();
                    rsum[b] += r;
                    cnt[b] += 1;
                }
            }
        }
    }
    (0..bins)
        .filter(|&b| cnt[b] > 0)
        .map(|b| (rsum[b] / cnt[b] as f64, sum[b] / cnt[b] as f64))
        .collect()
}

/// Human-readable summary used in file headers.
pub fn describe(spec: &MotionSpec) -> String {
    format!(
        "{:?} v=({}, {}) omega={} alpha={} noise={} seed={}",
        spec.kind, spec.velocity[0], spec.velocity[1], spec.omega, spec.alpha, spec.noise_sigma, spec.seed
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_clip_has_identical_frames() {
        let v = synth_sim2(&BaseSpec::default(), &MotionSpec::stationary(3), 4, 32, 32).unwrap();
        for t in 1..4 {
            assert_eq!(v.frame(t), v.frame(0));
        }
    }

    #[test]
    fn exact_translation_is_a_circular_shift() {
        let v = synth_sim2(
            &BaseSpec::exact(BaseKind::BandpassNoise),
            &MotionSpec::translation(1.0, 0.0, 5),
            6,
            16,
            16,
        )
        .unwrap();
        for t in 0..6 {
            for y in 0..16 {
                for x in 0..16 {
                    assert_eq!(v.at(t, y, x), v.at(0, y, (x + 16 - t) % 16));
                }
            }
        }
    }

    #[test]
    fn scale_collapse_is_rejected() {
        let r = synth_sim2(&BaseSpec::default(), &MotionSpec::scaling(0.5, 1), 16, 32, 32);
        assert!(matches!(r, Err(Error::Degenerate(m)) if m.contains("scale collapse")));
    }

    #[test]
    fn mismatched_kind_is_rejected() {
        let mut s = MotionSpec::rotation(0.1, 0);
        s.velocity = [1.0, 0.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn same_seed_same_output() {
        let a = synth_powerlaw(4, 16, 16, 1.8, 9).unwrap();
        let b = synth_powerlaw(4, 16, 16, 1.8, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_powerlaw(4, 16, 16, 1.8, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_does_not_change_pattern_draw() {
        let base = BaseSpec::default();
        let a = synth_sim2(&base, &MotionSpec::stationary(2), 2, 16, 16).unwrap();
        let b = synth_sim2(&base, &MotionSpec::stationary(2).with_noise(0.01), 2, 16, 16).unwrap();
        let rms = (a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / a.data().len() as f64)
            .sqrt();
        assert!((rms - 0.01).abs() < 0.002);
    }

    #[test]
    fn full_turn_closes() {
        let t_len = 16;
        let spec = MotionSpec::rotation(2.0 * PI / t_len as f64, 4);
        for kind in [BaseKind::BandpassNoise, BaseKind::GaussianBlobs, BaseKind::Checker] {
            let v = synth_sim2(&BaseSpec::of(kind), &spec, t_len + 1, 48, 48).unwrap();
            let (a, b) = (v.frame(0), v.frame(t_len));
            let rms = sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64);
            assert!(rms <= 2e-2, "{kind:?}: {rms}");
        }
    }

    #[test]
    fn rotation_moves_the_pattern() {
        let v = synth_sim2(&BaseSpec::default(), &MotionSpec::rotation(0.3, 4), 2, 48, 48).unwrap();
        assert_ne!(v.frame(0), v.frame(1));
    }

    #[test]
    fn powerlaw_slope_matches_exponent() {
        for kappa in [1.0, 1.8] {
            let v = synth_powerlaw(16, 96, 96, kappa, 21).unwrap();
            let prof = radial_energy_profile(&crate::video::normalize_window(&v), 24);
            let pts: Vec<(f64, f64)> = prof
                .iter()
                .filter(|(r, e)| *r > 0.1 && *r < 0.5 && *e > 0.0)
                .map(|&(r, e)| (ln(r), ln(e)))
                .collect();
            assert!(pts.len() >= 6);
            let n = pts.len() as f64;
            let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
            let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
            let slope = sxy / sxx;
            assert!((slope + 2.0 * kappa).abs() <= 0.2, "kappa={kappa}: slope {slope}");
        }
    }

    #[test]
    fn powerlaw_stays_in_unit_range() {
        let v = synth_powerlaw(8, 32, 32, 1.8, 2).unwrap();
        assert!(v.data().iter().all(|x| (0.0..=1.0).contains(x)));
        let mean = v.data().iter().sum::<f64>() / v.data().len() as f64;
        assert!((mean - 0.5).abs() < 1e-12);
    }
}

//! Randomised verification suites behind `sim2spec validate`.
//!
//! Every suite reduces to a list of [`BoundCheck`]s. A suite passes when no
//! applicable check is violated; `worst_slack` is the smallest `rhs − lhs`
//! over applicable checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sim2spec_core::bounds::{
    band_capture_check, calibrate, master_bound_check, ridge_inequality_check, ring_entropy_check, BoundCheck,
    Calibration, LeakageTable,
};
use sim2spec_core::gates::GateBounds;
use sim2spec_core::losses::unified_residual;
use sim2spec_core::spectral::{eta_retention, measured_retention, spectral_transform, EtaParams};
use sim2spec_core::synth::{
    exactness_fixture, gaussian, hyperplane_samples, motion_fixture, synth_powerlaw, SynthKind, FIXTURE_FRAMES,
    FIXTURE_SIZE,
};
use sim2spec_core::{analyze, normalize_window, SpectralConfig, WindowKind};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bounds,
    Exactness,
    Retention,
    Consistency,
    Master,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Bounds => "bounds",
            Suite::Exactness => "exactness",
            Suite::Retention => "retention",
            Suite::Consistency => "consistency",
            Suite::Master => "master",
            Suite::All => "all",
        }
    }

    /// Instance count used when `--n` is not given.
    pub fn default_instances(self) -> usize {
        match self {
            Suite::Bounds => 1000,
            Suite::Exactness => 8,
            Suite::Retention => 100,
            Suite::Consistency => 10,
            Suite::Master | Suite::All => 1,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub instances: usize,
    pub violations: usize,
    /// `None` when no applicable check ran.
    pub worst_slack: Option<f64>,
    pub not_applicable: usize,
    /// Descriptions of the first violated checks.
    pub failures: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteSummary>,
}

const MAX_FAILURES: usize = 20;

impl SuiteSummary {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            instances: 0,
            violations: 0,
            worst_slack: None,
            not_applicable: 0,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
            suites: Vec::new(),
        }
    }

    pub fn record(&mut self, c: &BoundCheck) {
        self.instances += 1;
        if !c.applicable {
            self.not_applicable += 1;
            return;
        }
        self.worst_slack = Some(self.worst_slack.map_or(c.slack, |w| w.min(c.slack)));
        if !c.holds {
            self.violations += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(c.describe());
            }
        }
    }

    pub fn record_all<'a>(&mut self, checks: impl IntoIterator<Item = &'a BoundCheck>) {
        for c in checks {
            self.record(c);
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Aggregate of several suites, keeping each one as a child.
    pub fn combine(name: &str, parts: Vec<SuiteSummary>) -> Self {
        let mut s = Self::new(name);
        for p in &parts {
            s.instances += p.instances;
            s.violations += p.violations;
            s.not_applicable += p.not_applicable;
            if let Some(w) = p.worst_slack {
                s.worst_slack = Some(s.worst_slack.map_or(w, |x: f64| x.min(w)));
            }
            for f in &p.failures {
                if s.failures.len() < MAX_FAILURES {
                    s.failures.push(format!("{}: {f}", p.suite));
                }
            }
        }
        s.suites = parts;
        s
    }
}

fn instance_rng(seed: u64, salt: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((salt << 40) | i as u64);
    rng
}

/// Random instance of the weighted band-capture inequality.
pub fn band_capture_instance(rng: &mut ChaCha8Rng) -> BoundCheck {
    let m = rng.gen_range(1..=64);
    let spread = rng.gen_range(0.1..4.0);
    let delta = rng.gen_range(1.0..3.0);
    let errors: Vec<f64> = (0..m).map(|_| spread * gaussian(rng)).collect();
    let energies: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0f64..1.0).powi(3)).collect();
    let gates: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let live = || gates.iter().zip(&energies).filter(|(_, &e)| e > 0.0).map(|(&g, _)| g);
    let bounds = GateBounds {
        g_lo: live().fold(f64::INFINITY, f64::min),
        g_hi: live().fold(0.0, f64::max),
        gated_in: m,
        active: m,
    };
    band_capture_check(&errors, &energies, &gates, delta, bounds)
}

/// Random weighted ridge system; one in five has a duplicated column.
pub fn ridge_instance(rng: &mut ChaCha8Rng, lambda: f64) -> Result<BoundCheck> {
    let rows = rng.gen_range(10..=60);
    let cols = rng.gen_range(1..=5);
    let mut design: Vec<f64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    if cols > 1 && rng.gen_bool(0.2) {
        for r in 0..rows {
            design[r * cols + cols - 1] = design[r * cols];
        }
    }
    let targets: Vec<f64> = (0..rows).map(|_| gaussian(rng)).collect();
    let weights: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.01..1.0)).collect();
    Ok(ridge_inequality_check(&design, cols, &targets, &weights, lambda)?)
}

/// Ring distribution with mass `1 − ε` on one ring and `ε ≤ ½` on another.
pub fn two_ring_instance(rng: &mut ChaCha8Rng) -> BoundCheck {
    let n = rng.gen_range(2..=32);
    let eps = rng.gen_range(0.0..=0.5);
    let scale = rng.gen_range(1e-3..1e3);
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    let mut e = vec![0.0; n];
    e[a] = (1.0 - eps) * scale;
    e[b] = eps * scale;
    ring_entropy_check(&e)
}

/// Hann leakage checks: nonincreasing in `Δ` over `0..=T/2` for each `T`,
/// and nonincreasing in `T` at every `Δ ≤ T_min/4`.
pub fn leakage_checks(frames: &[usize]) -> Vec<BoundCheck> {
    let table = LeakageTable::full(frames, &[WindowKind::Hann]);
    let eps = |t: usize, d: usize| table.get(t, d as f64, WindowKind::Hann).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for &t in frames {
        for d in 0..t / 2 {
            out.push(BoundCheck::new(
                format!("eps_win T={t} delta {} vs {d}", d + 1),
                eps(t, d + 1),
                eps(t, d),
            ));
        }
    }
    let t_min = frames.iter().copied().min().unwrap_or(0);
    for d in 0..=t_min / 4 {
        for w in frames.windows(2) {
            out.push(BoundCheck::new(
                format!("eps_win delta={d} T {} vs {}", w[1], w[0]),
                eps(w[1], d),
                eps(w[0], d),
            ));
        }
    }
    out
}

pub fn bounds_suite(n: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("bounds");
    let band: Vec<BoundCheck> = (0..n)
        .into_par_iter()
        .map(|i| band_capture_instance(&mut instance_rng(seed, 1, i)))
        .collect();
    let ridge: Vec<BoundCheck> = (0..n)
        .into_par_iter()
        .map(|i| ridge_instance(&mut instance_rng(seed, 2, i), [1e-4, 1e-3][i % 2]))
        .collect::<Result<_>>()?;
    let rings: Vec<BoundCheck> = (0..n)
        .into_par_iter()
        .map(|i| two_ring_instance(&mut instance_rng(seed, 3, i)))
        .collect();
    let leak = leakage_checks(&[8, 16, 32, 64]);
    for (name, group) in [
        ("band_capture", &band),
        ("ridge", &ridge),
        ("ring_entropy", &rings),
        ("leakage", &leak),
    ] {
        s.metric(&format!("{name}_checks"), group.len() as f64);
        s.metric(
            &format!("{name}_violations"),
            group.iter().filter(|c| c.violated()).count() as f64,
        );
        s.record_all(group.iter());
    }
    Ok(s)
}

const EXACT_VELOCITIES: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 2), (-2, 1)];

pub fn exactness_suite(n: usize, seed: u64, cfg: &SpectralConfig) -> Result<SuiteSummary> {
    let rect = SpectralConfig {
        window_kind: WindowKind::Rect,
        ..cfg.clone()
    };
    let mut s = SuiteSummary::new("exactness");
    let clips: Vec<Vec<BoundCheck>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<BoundCheck>> {
            let (vx, vy) = EXACT_VELOCITIES[i % EXACT_VELOCITIES.len()];
            let r = analyze(&exactness_fixture(vx, vy, seed.wrapping_add(i as u64))?, &rect)?;
            let [ex, ey] = r.translation.velocity_px;
            let err = (ex - vx as f64).abs().max((ey - vy as f64).abs());
            Ok(vec![
                BoundCheck::new(format!("L_trans v=({vx},{vy})"), r.l_trans, 1e-4),
                BoundCheck::new(format!("velocity error v=({vx},{vy})"), err, 0.05)
                    .with("vx", ex)
                    .with("vy", ey),
            ])
        })
        .collect::<Result<_>>()?;
    let fits: Vec<Vec<BoundCheck>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<BoundCheck>> {
            let mut rng = instance_rng(seed, 4, i);
            let mut theta = [0.0; 5];
            for t in theta.iter_mut().take(4) {
                *t = rng.gen_range(-0.5..0.5);
            }
            theta[4] = rng.gen_range(-1.0..1.0);
            let samples = hyperplane_samples(&theta, 400, 0.0, rng.gen());
            let m = samples.len();
            let fit_cfg = SpectralConfig {
                ridge: 1e-8,
                ..cfg.clone()
            };
            let bounds = GateBounds {
                g_lo: 1.0,
                g_hi: 1.0,
                gated_in: m,
                active: m,
            };
            let u = unified_residual([Some((&samples, bounds)), None, None], &fit_cfg)?;
            let err = u
                .theta
                .iter()
                .zip(&theta)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(vec![
                BoundCheck::new("hyperplane L_uni", u.loss, 1e-10),
                BoundCheck::new("hyperplane theta error", err, 1e-6),
            ])
        })
        .collect::<Result<_>>()?;
    let worst_l = clips.iter().map(|c| c[0].lhs).fold(0.0, f64::max);
    let worst_v = clips.iter().map(|c| c[1].lhs).fold(0.0, f64::max);
    s.metric("max_l_trans", worst_l);
    s.metric("max_velocity_error", worst_v);
    s.metric(
        "max_hyperplane_l_uni",
        fits.iter().map(|c| c[0].lhs).fold(0.0, f64::max),
    );
    s.record_all(clips.iter().chain(&fits).flatten());
    Ok(s)
}

/// Grid and exponent of the retention suite.
pub const RETENTION_DIMS: [usize; 3] = [16, 224, 224];
pub const RETENTION_KAPPA: f64 = 1.8;

pub fn retention_suite(n: usize, seed: u64, cfg: &SpectralConfig, dims: [usize; 3]) -> Result<SuiteSummary> {
    let rho = cfg.lowpass_ratio;
    let eta = eta_retention(rho, &EtaParams::for_grid(dims, RETENTION_KAPPA)?)?;
    let mut s = SuiteSummary::new("retention");
    s.metric("eta_ball", eta.eta_ball);
    s.metric("eta_cube_lo", eta.eta_cube_lo);
    s.metric("eta_cube_hi", eta.eta_cube_hi);
    let measured: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let v = synth_powerlaw(dims[0], dims[1], dims[2], RETENTION_KAPPA, seed.wrapping_add(i as u64))?;
            Ok(measured_retention(
                &spectral_transform(&normalize_window(&v), cfg),
                rho,
            )?)
        })
        .collect::<Result<_>>()?;
    let (lo, hi) = (eta.eta_cube_lo - 0.02, eta.eta_cube_hi + 0.02);
    for (i, &m) in measured.iter().enumerate() {
        s.record(
            &BoundCheck::new(format!("retention clip {i} outside bracket"), (lo - m).max(m - hi), 0.0)
                .with("measured", m),
        );
    }
    if !measured.is_empty() {
        let mean = measured.iter().sum::<f64>() / measured.len() as f64;
        s.metric("mean_measured", mean);
        s.metric("min_measured", measured.iter().copied().fold(f64::INFINITY, f64::min));
        s.metric(
            "max_measured",
            measured.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        s.record(&BoundCheck::new("mean retention vs 0.975", (mean - 0.975).abs(), 0.02).with("mean", mean));
    }
    Ok(s)
}

/// Noise variance of the consistency suite.
pub const CONSISTENCY_SIGMA2: f64 = 0.01;

pub fn consistency_suite(n: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("consistency");
    let fit_cfg = SpectralConfig {
        ridge: 1e-8,
        ..SpectralConfig::default()
    };
    let sigma = CONSISTENCY_SIGMA2.sqrt();
    let run = |m: usize, i: usize| -> Result<f64> {
        let mut rng = instance_rng(seed, 5, i);
        let mut theta = [0.0; 5];
        for t in theta.iter_mut() {
            *t = rng.gen_range(-0.5..0.5);
        }
        let samples = hyperplane_samples(&theta, m, sigma, rng.gen());
        let bounds = GateBounds {
            g_lo: 1.0,
            g_hi: 1.0,
            gated_in: m,
            active: m,
        };
        Ok(unified_residual([Some((&samples, bounds)), None, None], &fit_cfg)?.loss)
    };
    for m in [100usize, 1000] {
        if n > 0 {
            let mean = (0..n).map(|i| run(m, i)).sum::<Result<f64>>()? / n as f64;
            s.metric(&format!("mean_l_uni_{m}"), mean);
        }
    }
    let big: Vec<f64> = (0..n).into_par_iter().map(|i| run(10_000, i)).collect::<Result<_>>()?;
    for (i, &l) in big.iter().enumerate() {
        s.record(
            &BoundCheck::new(
                format!("L_uni at 10000 samples, run {i}"),
                (l - CONSISTENCY_SIGMA2).abs(),
                0.1 * CONSISTENCY_SIGMA2,
            )
            .with("l_uni", l),
        );
    }
    if !big.is_empty() {
        s.metric("mean_l_uni_10000", big.iter().sum::<f64>() / big.len() as f64);
    }
    Ok(s)
}

pub const MASTER_NOISE: [f64; 3] = [0.0, 0.02, 0.05];
pub const MASTER_DELTAS: [f64; 3] = [1.0, 2.0, 3.0];
pub const MASTER_KINDS: [SynthKind; 3] = [SynthKind::Translation, SynthKind::Rotation, SynthKind::Scaling];

/// One evaluated clip of the master sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterPoint {
    pub kind: SynthKind,
    pub noise: f64,
    pub delta: f64,
    pub seed: u64,
    pub checks: Vec<BoundCheck>,
}

/// Master-bound sweep over motion type × noise × `Δ` with `seeds` clips per
/// cell. `calibration` maps each `Δ` to its constants; missing entries are
/// calibrated in-process on the fixture grid.
pub fn master_points(
    seeds: usize,
    seed: u64,
    cfg: &SpectralConfig,
    calibration: Option<Calibration>,
) -> Result<Vec<MasterPoint>> {
    let cals: Vec<(f64, Calibration)> = MASTER_DELTAS
        .iter()
        .map(|&d| -> Result<(f64, Calibration)> {
            let c = SpectralConfig {
                band_tolerance: d,
                ..cfg.clone()
            };
            Ok((
                d,
                match calibration {
                    Some(c) => c,
                    None => calibrate(FIXTURE_SIZE, FIXTURE_SIZE, FIXTURE_FRAMES, &c)?,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (di, &(delta, cal)) in cals.iter().enumerate() {
        for (ni, &noise) in MASTER_NOISE.iter().enumerate() {
            for (ki, &kind) in MASTER_KINDS.iter().enumerate() {
                for r in 0..seeds.max(1) {
                    let s = seed.wrapping_add((((r * 3 + di) * 3 + ni) * 3 + ki) as u64);
                    jobs.push((kind, noise, delta, cal, s));
                }
            }
        }
    }
    jobs.into_par_iter()
        .map(|(kind, noise, delta, cal, s)| {
            let c = SpectralConfig {
                band_tolerance: delta,
                ..cfg.clone()
            };
            let report = analyze(&motion_fixture(kind, noise, s)?, &c)?;
            let m = master_bound_check(&report, &c, Some(&cal), kind == SynthKind::Scaling)?;
            Ok(MasterPoint {
                kind,
                noise,
                delta,
                seed: s,
                checks: m.all().into_iter().cloned().collect(),
            })
        })
        .collect()
}

pub fn master_suite(
    seeds: usize,
    seed: u64,
    cfg: &SpectralConfig,
    calibration: Option<Calibration>,
) -> Result<SuiteSummary> {
    let points = master_points(seeds, seed, cfg, calibration)?;
    let mut s = SuiteSummary::new("master");
    s.metric("clips", points.len() as f64);
    for p in &points {
        s.record_all(p.checks.iter());
    }
    Ok(s)
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run_suite(
    suite: Suite,
    n: Option<usize>,
    seed: u64,
    cfg: &SpectralConfig,
    calibration: Option<Calibration>,
) -> Result<SuiteSummary> {
    let count = |s: Suite| n.unwrap_or_else(|| s.default_instances());
    match suite {
        Suite::Bounds => bounds_suite(count(suite), seed),
        Suite::Exactness => exactness_suite(count(suite), seed, cfg),
        Suite::Retention => retention_suite(count(suite), seed, cfg, RETENTION_DIMS),
        Suite::Consistency => consistency_suite(count(suite), seed),
        Suite::Master => master_suite(count(suite), seed, cfg, calibration),
        Suite::All => {
            let parts = [
                Suite::Bounds,
                Suite::Exactness,
                Suite::Retention,
                Suite::Consistency,
                Suite::Master,
            ]
            .into_iter()
            .map(|s| run_suite(s, n, seed, cfg, calibration))
            .collect::<Result<Vec<_>>>()?;
            Ok(SuiteSummary::combine("all", parts))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bounds_suite_passes() {
        let s = bounds_suite(50, 3).unwrap();
        assert!(s.passed(), "{:?}", s.failures);
        assert!(s.instances >= 150);
    }

    #[test]
    fn leakage_checks_cover_both_directions() {
        let c = leakage_checks(&[8, 16]);
        assert_eq!(c.len(), 4 + 8 + 3);
        assert!(c.iter().all(|c| c.holds));
    }

    #[test]
    fn combine_sums_counts() {
        let mut a = SuiteSummary::new("a");
        a.record(&BoundCheck::new("x", 0.0, 1.0));
        let mut b = SuiteSummary::new("b");
        b.record(&BoundCheck::new("y", 2.0, 1.0));
        b.record(&BoundCheck::new("z", 2.0, 1.0).not_applicable());
        let all = SuiteSummary::combine("all", vec![a, b]);
        assert_eq!((all.instances, all.violations, all.not_applicable), (3, 1, 1));
        assert_eq!(all.worst_slack, Some(-1.0));
        assert!(all.failures[0].starts_with("b: "));
    }

    #[test]
    fn tiny_consistency_run_is_close() {
        let s = consistency_suite(2, 1).unwrap();
        assert!(s.passed(), "{:?}", s.failures);
    }
}

//! One-parameter sweeps over the synthetic fixtures, written as CSV.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sim2spec_core::bounds::{calibrate, master_bound_check, window_leakage, Calibration};
use sim2spec_core::synth::{fixture_motion, synth_sim2, BaseSpec, SynthKind, FIXTURE_FRAMES, FIXTURE_SIZE};
use sim2spec_core::{analyze, LossReport, SpectralConfig};

use crate::error::{Error, Result};
use crate::manifest::config_hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
pub enum SweepParam {
    /// Frame count.
    #[value(name = "T")]
    #[serde(rename = "T")]
    Frames,
    /// Band tolerance.
    #[value(name = "delta")]
    #[serde(rename = "delta")]
    Delta,
    /// Fixture noise standard deviation.
    #[value(name = "noise")]
    #[serde(rename = "noise")]
    Noise,
    /// Softmax temperature.
    #[value(name = "tau")]
    #[serde(rename = "tau")]
    Tau,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Frames => "T",
            SweepParam::Delta => "delta",
            SweepParam::Noise => "noise",
            SweepParam::Tau => "tau",
        }
    }
}

/// Parses `a,b,c` or `lo..hi`. Ranges produce `steps` points, linearly or
/// geometrically spaced.
pub fn parse_range(spec: &str, steps: usize, log: bool) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Usage(format!("invalid range `{spec}`: {m}"));
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", s.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("values must be finite".into()))
        }
    };
    let values = if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad("lower end exceeds upper end".into()));
        }
        if steps == 0 {
            return Err(bad("need at least one step".into()));
        }
        if log && lo <= 0.0 {
            return Err(bad("logarithmic spacing needs a positive lower end".into()));
        }
        if steps == 1 {
            vec![lo]
        } else {
            (0..steps)
                .map(|i| {
                    let f = i as f64 / (steps - 1) as f64;
                    if log {
                        lo * (hi / lo).powf(f)
                    } else {
                        lo + f * (hi - lo)
                    }
                })
                .collect()
        }
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub fixture: SynthKind,
    pub noise: f64,
    pub seed: u64,
    pub frames: usize,
    pub size: usize,
    pub config: SpectralConfig,
    /// Fixed constants for every point; calibrated per setting when absent.
    pub calibration: Option<Calibration>,
}

impl Sweep {
    pub fn new(param: SweepParam, values: Vec<f64>, fixture: SynthKind) -> Self {
        Self {
            param,
            values,
            fixture,
            noise: 0.0,
            seed: 0,
            frames: FIXTURE_FRAMES,
            size: FIXTURE_SIZE,
            config: SpectralConfig::default(),
            calibration: None,
        }
    }

    fn point(&self, value: f64) -> Result<Point> {
        let mut p = Point {
            value,
            frames: self.frames,
            noise: self.noise,
            config: self.config.clone(),
        };
        match self.param {
            SweepParam::Frames => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::Usage(format!("T must be an integer of at least 2, got {value}")));
                }
                p.frames = value as usize;
            }
            SweepParam::Delta => p.config.band_tolerance = value,
            SweepParam::Noise => p.noise = value,
            SweepParam::Tau => p.config.softmax_temperature = value,
        }
        p.config.validate()?;
        Ok(p)
    }

    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let points = self.values.iter().map(|&v| self.point(v)).collect::<Result<Vec<_>>>()?;
        let mut cals: HashMap<(String, usize), Calibration> = HashMap::new();
        if self.calibration.is_none() {
            for p in &points {
                let key = (config_hash(&p.config), p.frames);
                if let std::collections::hash_map::Entry::Vacant(slot) = cals.entry(key) {
                    slot.insert(calibrate(self.size, self.size, p.frames, &p.config)?);
                }
            }
        }
        points
            .par_iter()
            .map(|p| {
                let cal = self
                    .calibration
                    .unwrap_or_else(|| cals[&(config_hash(&p.config), p.frames)]);
                let spec = fixture_motion(self.fixture, self.seed).with_noise(p.noise);
                let clip = synth_sim2(
                    &BaseSpec::for_motion(self.fixture),
                    &spec,
                    p.frames,
                    self.size,
                    self.size,
                )?;
                let report = analyze(&clip, &p.config)?;
                let master = master_bound_check(&report, &p.config, Some(&cal), self.fixture == SynthKind::Scaling)?;
                Ok(SweepRow::new(self.param, p, &report, &master, cal))
            })
            .collect()
    }
}

struct Point {
    value: f64,
    frames: usize,
    noise: f64,
    config: SpectralConfig,
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub frames: usize,
    pub delta: f64,
    pub noise: f64,
    pub tau: f64,
    pub l_trans: f64,
    pub l_rot: f64,
    pub l_scale: f64,
    pub l_uni: f64,
    pub l_motion: f64,
    pub c_rot: f64,
    pub c_ring: f64,
    pub c_flow: f64,
    pub s_trend: f64,
    pub c_scale: f64,
    pub w_trans: f64,
    pub w_rot: f64,
    pub w_scale: f64,
    pub w_max: f64,
    pub dominant: String,
    pub v_x: f64,
    pub v_y: f64,
    pub omega: f64,
    pub alpha: f64,
    pub eps_win: f64,
    pub eps_interp: f64,
    pub delta_flow: f64,
    pub rot_lhs: f64,
    pub rot_rhs: f64,
    pub rot_holds: bool,
    pub scale_lhs: f64,
    pub scale_rhs: f64,
    pub scale_holds: bool,
    pub scale_applicable: bool,
    pub trans_lhs: f64,
    pub trans_rhs: f64,
    pub trans_holds: bool,
    pub rot_line_lhs: f64,
    pub rot_line_rhs: f64,
    pub scale_line_lhs: f64,
    pub scale_line_rhs: f64,
}

impl SweepRow {
    fn new(
        param: SweepParam,
        p: &Point,
        r: &LossReport,
        m: &sim2spec_core::bounds::MasterChecks,
        cal: Calibration,
    ) -> Self {
        let w = &r.weights;
        Self {
            param: param.name().to_string(),
            value: p.value,
            frames: p.frames,
            delta: p.config.band_tolerance,
            noise: p.noise,
            tau: p.config.softmax_temperature,
            l_trans: r.l_trans,
            l_rot: r.l_rot,
            l_scale: r.l_scale,
            l_uni: r.l_uni,
            l_motion: r.l_motion,
            c_rot: r.c_rot,
            c_ring: r.c_ring,
            c_flow: r.c_flow,
            s_trend: r.s_trend,
            c_scale: r.c_scale,
            w_trans: w.translation,
            w_rot: w.rotation,
            w_scale: w.scaling,
            w_max: w.max(),
            dominant: format!("{:?}", r.dominant).to_lowercase(),
            v_x: r.estimate.v_x,
            v_y: r.estimate.v_y,
            omega: r.estimate.omega,
            alpha: r.estimate.alpha,
            eps_win: window_leakage(p.frames, p.config.band_tolerance, p.config.window_kind),
            eps_interp: cal.eps_interp,
            delta_flow: cal.delta_flow,
            rot_lhs: m.rotation.lhs,
            rot_rhs: m.rotation.rhs,
            rot_holds: m.rotation.holds,
            scale_lhs: m.scaling.lhs,
            scale_rhs: m.scaling.rhs,
            scale_holds: m.scaling.holds,
            scale_applicable: m.scaling.applicable,
            trans_lhs: m.translation.lhs,
            trans_rhs: m.translation.rhs,
            trans_holds: m.translation.holds,
            rot_line_lhs: m.rotation_line.lhs,
            rot_line_rhs: m.rotation_line.rhs,
            scale_line_lhs: m.scaling_line.lhs,
            scale_line_rhs: m.scaling_line.rhs,
        }
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_range("1,2.5, 4", 5, false).unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_range("0..1", 3, false).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_range("0.01..1", 3, true).unwrap();
        assert!((g[1] - 0.1).abs() < 1e-12);
        assert_eq!(parse_range("2..2", 1, false).unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_ranges_are_usage_errors() {
        for s in ["", "a,b", "3..1", "0..1x", "nan"] {
            assert!(matches!(parse_range(s, 4, false), Err(Error::Usage(_))), "{s}");
        }
        assert!(parse_range("0..1", 4, true).is_err());
        assert!(parse_range("0..1", 0, false).is_err());
    }

    #[test]
    fn fractional_frame_count_is_rejected() {
        let s = Sweep::new(SweepParam::Frames, vec![8.5], SynthKind::Translation);
        assert!(matches!(s.run(), Err(Error::Usage(_))));
    }

    #[test]
    fn tau_sweep_sharpens_weights() {
        let mut s = Sweep::new(SweepParam::Tau, vec![1.0, 0.01], SynthKind::Translation);
        s.size = 64;
        s.frames = 8;
        s.calibration = Some(Calibration {
            eps_interp: 0.05,
            delta_flow: 0.5,
        });
        let rows = s.run().unwrap();
        assert!(rows[1].w_max > rows[0].w_max);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("param,value,frames,"));
    }
}

//! Argument definitions and subcommand drivers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sim2spec_core::bounds::{master_bound_check, LeakageTable, MasterChecks};
use sim2spec_core::synth::{synth_sim2, BaseSpec, MotionSpec, SynthKind, FIXTURE_FRAMES, FIXTURE_SIZE};
use sim2spec_core::{analyze, LossReport, SpectralConfig, VideoWindow, WindowKind};

use crate::calibration::{write_json, CalibrationFile};
use crate::error::{Error, Result, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use crate::io::{load_video, save_pgm_dir, save_raw_f32, VideoFormat};
use crate::manifest::RunManifest;
use crate::sweep::{parse_range, write_csv, Sweep, SweepParam};
use crate::validate::{run_suite, Suite, SuiteSummary};

#[derive(Debug, Parser)]
#[command(
    name = "sim2spec",
    version,
    about = "Spectral rigid-motion analysis of short video windows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a video against the translation, rotation and scaling models.
    Analyze(AnalyzeArgs),
    /// Run randomised checks of the bounds and reference behaviours.
    Validate(ValidateArgs),
    /// Sweep one parameter over a synthetic fixture and write CSV.
    Sweep(SweepArgs),
    /// Render a synthetic clip from a JSON motion description.
    Synth(SynthArgs),
    /// Compute the interpolation and flow constants used by the bounds.
    Calibrate(CalibrateArgs),
}

fn parse_window(s: &str) -> std::result::Result<WindowKind, String> {
    s.parse::<WindowKind>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<SynthKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown motion type `{s}` (translation, rotation, scaling, mixed, static)"))
}

/// Pipeline settings. A `--config` file supplies the base values and
/// individual flags override them.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the configuration fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, visible_alias = "rho")]
    pub lowpass_ratio: Option<f64>,
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long)]
    pub angular_bins: Option<usize>,
    #[arg(long)]
    pub logradius_bins: Option<usize>,
    #[arg(long, visible_alias = "delta")]
    pub band_tolerance: Option<f64>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub numeric_eps: Option<f64>,
    #[arg(long, visible_alias = "tau-e")]
    pub energy_gate_threshold: Option<f64>,
    #[arg(long, visible_alias = "gate-sharpness")]
    pub energy_gate_sharpness: Option<f64>,
    #[arg(long)]
    pub obs_gate: Option<f64>,
    #[arg(long, visible_alias = "tau")]
    pub softmax_temperature: Option<f64>,
    #[arg(long)]
    pub soft_ring_edge: Option<f64>,
    #[arg(long, visible_alias = "window", value_parser = parse_window)]
    pub window_kind: Option<WindowKind>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<SpectralConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: p.clone(),
                    source: e,
                })?
            }
            None => SpectralConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(
            lowpass_ratio,
            rings,
            angular_bins,
            logradius_bins,
            band_tolerance,
            ridge,
            numeric_eps,
            energy_gate_threshold,
            energy_gate_sharpness,
            obs_gate,
            softmax_temperature,
            soft_ring_edge,
            window_kind
        );
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of PGM/PPM frames or a raw `f32` file with a `.json` sidecar.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<VideoFormat>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Also write one CSV row per window.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Analyse sliding windows of this many frames instead of the whole clip.
    #[arg(long)]
    pub window_frames: Option<usize>,
    /// Frames between window starts; defaults to the window length.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Calibration file; when given, the bounds are evaluated for every window.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    /// Treat the clip as a pure radial shift so the scaling bound applies.
    #[arg(long)]
    pub shift_model: bool,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Instances per suite (clips per cell for `master`).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Use these constants for the master suite instead of calibrating.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// `a,b,c` or `lo..hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Geometric spacing for `lo..hi`.
    #[arg(long)]
    pub log: bool,
    #[arg(long, default_value = "translation", value_parser = parse_kind)]
    pub fixture: SynthKind,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = FIXTURE_FRAMES)]
    pub frames: usize,
    #[arg(long, default_value_t = FIXTURE_SIZE)]
    pub size: usize,
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON motion description.
    pub spec: PathBuf,
    /// Raw `f32` file (sidecar alongside) or frame directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "raw-f32")]
    pub format: VideoFormat,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = FIXTURE_FRAMES)]
    pub frames: usize,
    #[arg(long, default_value_t = FIXTURE_SIZE)]
    pub height: usize,
    #[arg(long, default_value_t = FIXTURE_SIZE)]
    pub width: usize,
    /// Also write the temporal leakage table.
    #[arg(long, value_name = "FILE")]
    pub leakage_csv: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

/// Contents of a `synth` spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(flatten)]
    pub motion: MotionSpec,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_size")]
    pub height: usize,
    #[serde(default = "default_size")]
    pub width: usize,
    /// Base pattern; the motion type's standard base when absent.
    #[serde(default)]
    pub base: Option<BaseSpec>,
}

fn default_frames() -> usize {
    FIXTURE_FRAMES
}

fn default_size() -> usize {
    FIXTURE_SIZE
}

impl SynthSpec {
    pub fn render(&self) -> Result<VideoWindow> {
        let base = self
            .base
            .clone()
            .unwrap_or_else(|| BaseSpec::for_motion(self.motion.kind));
        Ok(synth_sim2(&base, &self.motion, self.frames, self.height, self.width)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WindowReport {
    pub start: usize,
    pub frames: usize,
    pub report: LossReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<MasterChecks>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub manifest: RunManifest,
    pub reports: Vec<WindowReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub manifest: RunManifest,
    pub seed: u64,
    pub passed: bool,
    pub summary: SuiteSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SynthRecord {
    pub spec: SynthSpec,
    pub output: PathBuf,
    pub format: VideoFormat,
    pub manifest: RunManifest,
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze(a) => run_analyze(&a),
        Command::Validate(a) => run_validate(&a),
        Command::Sweep(a) => run_sweep(&a),
        Command::Synth(a) => run_synth(&a).map_err(|e| match e {
            Error::Core(c) => Error::Usage(c.to_string()),
            other => other,
        }),
        Command::Calibrate(a) => run_calibrate(&a),
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
                path: PathBuf::from("<stdout>"),
                source: e,
            })?;
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_calibration(path: &Path, cfg: &SpectralConfig) -> Result<CalibrationFile> {
    let file = CalibrationFile::load(path)?;
    if !file.matches(cfg) {
        eprintln!(
            "warning: {} was calibrated under a different configuration",
            path.display()
        );
    }
    Ok(file)
}

/// Window start positions for a clip of `total` frames.
pub fn window_starts(total: usize, len: Option<usize>, stride: Option<usize>) -> Result<Vec<(usize, usize)>> {
    let Some(len) = len else {
        return Ok(vec![(0, total)]);
    };
    let stride = stride.unwrap_or(len);
    if len == 0 || stride == 0 {
        return Err(Error::Usage("--window-frames and --stride must be positive".into()));
    }
    if len > total {
        return Err(Error::Usage(format!(
            "--window-frames {len} exceeds the clip length {total}"
        )));
    }
    Ok((0..=total - len).step_by(stride).map(|s| (s, len)).collect())
}

#[derive(Serialize)]
struct AnalyzeRow {
    start: usize,
    frames: usize,
    dominant: String,
    l_trans: f64,
    l_rot: f64,
    l_scale: f64,
    l_uni: f64,
    l_motion: f64,
    w_trans: f64,
    w_rot: f64,
    w_scale: f64,
    v_x: f64,
    v_y: f64,
    omega: f64,
    alpha: f64,
    retained_energy_fraction: f64,
    retained_coefficient_fraction: f64,
}

fn run_analyze(a: &AnalyzeArgs) -> Result<i32> {
    let cfg = a.cfg.resolve()?;
    let calibration = a
        .calibration
        .as_deref()
        .map(|p| load_calibration(p, &cfg))
        .transpose()?;
    let video = load_video(&a.input, a.format)?;
    let mut manifest = RunManifest::new("analyze", &cfg).with_input(&a.input)?;
    if let Some(p) = &a.calibration {
        manifest = manifest.with_input(p)?;
    }
    let mut reports = Vec::new();
    for (start, frames) in window_starts(video.frames(), a.window_frames, a.stride)? {
        let clip = if frames == video.frames() {
            video.clone()
        } else {
            video.slice_frames(start, frames)?
        };
        let report = analyze(&clip, &cfg)?;
        let bounds = calibration
            .as_ref()
            .map(|c| master_bound_check(&report, &cfg, Some(&c.constants()), a.shift_model))
            .transpose()?;
        reports.push(WindowReport {
            start,
            frames,
            report,
            bounds,
        });
    }
    if let Some(path) = &a.csv {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for r in &reports {
            let (rep, wt, est) = (&r.report, &r.report.weights, &r.report.estimate);
            w.serialize(AnalyzeRow {
                start: r.start,
                frames: r.frames,
                dominant: format!("{:?}", rep.dominant).to_lowercase(),
                l_trans: rep.l_trans,
                l_rot: rep.l_rot,
                l_scale: rep.l_scale,
                l_uni: rep.l_uni,
                l_motion: rep.l_motion,
                w_trans: wt.translation,
                w_rot: wt.rotation,
                w_scale: wt.scaling,
                v_x: est.v_x,
                v_y: est.v_y,
                omega: est.omega,
                alpha: est.alpha,
                retained_energy_fraction: rep.diagnostics.retained_energy_fraction,
                retained_coefficient_fraction: rep.diagnostics.retained_coefficient_fraction,
            })
            .map_err(|e| Error::format(path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    let violated = reports
        .iter()
        .filter_map(|r| r.bounds.as_ref())
        .any(|b| !b.violations().is_empty());
    emit_json(a.json.as_deref(), &AnalyzeOutput { manifest, reports })?;
    Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
}

fn run_validate(a: &ValidateArgs) -> Result<i32> {
    let cfg = a.cfg.resolve()?;
    let calibration = a
        .calibration
        .as_deref()
        .map(|p| load_calibration(p, &cfg))
        .transpose()?;
    let mut manifest = RunManifest::new("validate", &cfg);
    if let Some(p) = &a.calibration {
        manifest = manifest.with_input(p)?;
    }
    let started = Instant::now();
    let summary = run_suite(a.suite, a.n, a.seed, &cfg, calibration.map(|c| c.constants()))?;
    print_summary(&summary, 0);
    eprintln!("elapsed {:.1} s", started.elapsed().as_secs_f64());
    let passed = summary.passed();
    emit_json(
        a.json.as_deref(),
        &ValidateOutput {
            manifest,
            seed: a.seed,
            passed,
            summary,
        },
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_VIOLATION })
}

fn print_summary(s: &SuiteSummary, depth: usize) {
    let worst = s.worst_slack.map_or_else(|| "n/a".to_string(), |w| format!("{w:.3e}"));
    eprintln!(
        "{:indent$}{} {}: {} checks, {} violations, {} not applicable, worst slack {worst}",
        "",
        if s.passed() { "PASS" } else { "FAIL" },
        s.suite,
        s.instances,
        s.violations,
        s.not_applicable,
        indent = depth * 2
    );
    if s.suites.is_empty() {
        for f in &s.failures {
            eprintln!("{:indent$}  {f}", "", indent = depth * 2);
        }
    }
    for c in &s.suites {
        print_summary(c, depth + 1);
    }
}

fn run_sweep(a: &SweepArgs) -> Result<i32> {
    let cfg = a.cfg.resolve()?;
    let values = parse_range(&a.range, a.steps, a.log)?;
    let calibration = a
        .calibration
        .as_deref()
        .map(|p| load_calibration(p, &cfg))
        .transpose()?;
    let sweep = Sweep {
        param: a.param,
        values,
        fixture: a.fixture,
        noise: a.noise,
        seed: a.seed,
        frames: a.frames,
        size: a.size,
        config: cfg,
        calibration: calibration.map(|c| c.constants()),
    };
    let rows = sweep.run()?;
    match &a.out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| Error::io(p, e))?;
            write_csv(file, &rows).map_err(|e| Error::format(p, e.to_string()))?;
        }
        None => write_csv(io::stdout().lock(), &rows).map_err(|e| Error::format("<stdout>", e.to_string()))?,
    }
    Ok(EXIT_OK)
}

/// `clip.f32` → `clip.f32.spec.json`.
pub fn spec_record_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".spec.json");
    PathBuf::from(s)
}

fn run_synth(a: &SynthArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let spec: SynthSpec = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: a.spec.clone(),
        source: e,
    })?;
    let video = spec.render()?;
    match a.format {
        VideoFormat::RawF32 => save_raw_f32(&a.out, &video)?,
        VideoFormat::PgmDir => save_pgm_dir(&a.out, &video)?,
    }
    let record = SynthRecord {
        spec,
        output: a.out.clone(),
        format: a.format,
        manifest: RunManifest::new("synth", &SpectralConfig::default())
            .with_input(&a.spec)?
            .with_input(&a.out)?,
    };
    write_json(&spec_record_path(&a.out), &record)?;
    Ok(EXIT_OK)
}

fn run_calibrate(a: &CalibrateArgs) -> Result<i32> {
    let cfg = a.cfg.resolve()?;
    let started = Instant::now();
    let file = CalibrationFile::compute(a.frames, a.height, a.width, &cfg)?;
    eprintln!(
        "eps_interp {:.6e}, delta_flow {:.6e} ({:.1} s)",
        file.eps_interp,
        file.delta_flow,
        started.elapsed().as_secs_f64()
    );
    file.save(&a.out)?;
    if let Some(p) = &a.leakage_csv {
        let table = LeakageTable::full(&[8, 16, 32, 64], &[WindowKind::Hann, WindowKind::Rect]);
        fs::write(p, table.to_csv()).map_err(|e| Error::io(p, e))?;
    }
    Ok(EXIT_OK)
}

/// Exit status for an error raised while running `command`.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_INPUT,
        other => other.exit_code(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        fs::write(&p, r#"{"rings": 12, "ridge": 0.01}"#).unwrap();
        let cli = Cli::try_parse_from([
            "sim2spec",
            "analyze",
            "x",
            "--config",
            p.to_str().unwrap(),
            "--ridge",
            "0.002",
            "--rho",
            "0.5",
            "--window",
            "rect",
        ])
        .unwrap();
        let Command::Analyze(a) = cli.command else { panic!() };
        let c = a.cfg.resolve().unwrap();
        assert_eq!(
            (c.rings, c.ridge, c.lowpass_ratio, c.window_kind),
            (12, 0.002, 0.5, WindowKind::Rect)
        );
    }

    #[test]
    fn invalid_config_is_rejected() {
        let args = ConfigArgs {
            lowpass_ratio: Some(0.0),
            ..ConfigArgs::default()
        };
        assert!(args.resolve().is_err());
    }

    #[test]
    fn windows_tile_the_clip() {
        assert_eq!(window_starts(16, None, None).unwrap(), vec![(0, 16)]);
        assert_eq!(window_starts(16, Some(8), None).unwrap(), vec![(0, 8), (8, 8)]);
        assert_eq!(window_starts(16, Some(8), Some(4)).unwrap().len(), 3);
        assert!(window_starts(4, Some(8), None).is_err());
    }

    #[test]
    fn synth_spec_defaults() {
        let s: SynthSpec = serde_json::from_str(r#"{"kind":"rotation","omega":0.05,"seed":3}"#).unwrap();
        assert_eq!((s.frames, s.height, s.width), (16, 128, 128));
        assert_eq!(s.motion.omega, 0.05);
        assert!(s.base.is_none());
    }
}

//! Video files: directories of Netpbm frames and little-endian `f32` blocks
//! with a JSON shape sidecar.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};
use sim2spec_core::VideoWindow;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VideoFormat {
    PgmDir,
    RawF32,
}

/// Shape of a raw block. Serialised with exactly the keys `T`, `H`, `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    #[serde(rename = "T")]
    pub frames: usize,
    #[serde(rename = "H")]
    pub height: usize,
    #[serde(rename = "W")]
    pub width: usize,
}

/// `clip.f32` → `clip.f32.json`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    let mut s = raw.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Directories hold frames; anything else is a raw block.
pub fn detect_format(path: &Path) -> VideoFormat {
    if path.is_dir() {
        VideoFormat::PgmDir
    } else {
        VideoFormat::RawF32
    }
}

pub fn load_video(path: &Path, format: Option<VideoFormat>) -> Result<VideoWindow> {
    match format.unwrap_or_else(|| detect_format(path)) {
        VideoFormat::PgmDir => load_pgm_dir(path),
        VideoFormat::RawF32 => load_raw_f32(path),
    }
}

fn is_frame(p: &Path) -> bool {
    matches!(
        p.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "ppm" | "pnm" | "pbm")
    )
}

/// Frames sorted by file name. 8-bit samples are divided by 255 and 16-bit
/// ones by 65535; colour frames are averaged over channels.
pub fn load_pgm_dir(dir: &Path) -> Result<VideoWindow> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_frame(p))
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(Error::format(dir, "no .pgm/.ppm frames found"));
    }
    let mut dims = None;
    let mut samples = Vec::new();
    let mut channels = 1;
    for path in &frames {
        let img = image::ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|e| Error::format(path, e.to_string()))?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let c = if img.color().has_color() { 3 } else { 1 };
        match dims {
            None => {
                dims = Some((h, w));
                channels = c;
            }
            Some(d) if d != (h, w) || c != channels => {
                return Err(Error::format(
                    path,
                    format!(
                        "frame is {w}x{h} with {c} channel(s), expected {}x{} with {channels}",
                        d.1, d.0
                    ),
                ));
            }
            Some(_) => {}
        }
        append_samples(&img, c, &mut samples);
    }
    let (h, w) = dims.unwrap_or_default();
    Ok(VideoWindow::from_interleaved(frames.len(), h, w, channels, &samples)?)
}

fn append_samples(img: &DynamicImage, channels: usize, out: &mut Vec<f64>) {
    match (img, channels) {
        (DynamicImage::ImageLuma8(b), _) => out.extend(b.as_raw().iter().map(|&v| v as f64 / 255.0)),
        (DynamicImage::ImageLuma16(b), _) => out.extend(b.as_raw().iter().map(|&v| v as f64 / 65535.0)),
        (DynamicImage::ImageRgb8(b), _) => out.extend(b.as_raw().iter().map(|&v| v as f64 / 255.0)),
        (DynamicImage::ImageRgb16(b), _) => out.extend(b.as_raw().iter().map(|&v| v as f64 / 65535.0)),
        (other, 1) => out.extend(other.to_luma32f().as_raw().iter().map(|&v| v as f64)),
        (other, _) => out.extend(other.to_rgb32f().as_raw().iter().map(|&v| v as f64)),
    }
}

/// Writes `frame_0000.pgm …` as binary 8-bit graymaps, clamping to `[0, 1]`.
pub fn save_pgm_dir(dir: &Path, v: &VideoWindow) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (t, h, w) = v.shape();
    for f in 0..t {
        let bytes: Vec<u8> = v
            .frame(f)
            .iter()
            .map(|&x| (x.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let path = dir.join(format!("frame_{f:04}.pgm"));
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        PnmEncoder::new(BufWriter::new(file))
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, w as u32, h as u32, ExtendedColorType::L8)
            .map_err(|e| Error::format(&path, e.to_string()))?;
    }
    Ok(())
}

pub fn read_sidecar(raw: &Path) -> Result<Sidecar> {
    let path = sidecar_path(raw);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path, source: e })
}

pub fn load_raw_f32(path: &Path) -> Result<VideoWindow> {
    let side = read_sidecar(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::format(
            path,
            format!("{} bytes is not a whole number of f32 samples", bytes.len()),
        ));
    }
    let frame = side.height * side.width;
    let have = bytes.len() / 4;
    if have != side.frames * frame {
        let whole = if frame > 0 && have % frame == 0 {
            format!("{} frame(s)", have / frame)
        } else {
            format!("{have} samples")
        };
        return Err(sim2spec_core::Error::Shape(format!(
            "{}: sidecar declares T={} H={} W={} but the file holds {whole}",
            path.display(),
            side.frames,
            side.height,
            side.width
        ))
        .into());
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(VideoWindow::new(side.frames, side.height, side.width, data)?)
}

/// Writes the samples as little-endian `f32` and the sidecar next to them.
pub fn save_raw_f32(path: &Path, v: &VideoWindow) -> Result<()> {
    let bytes: Vec<u8> = v.data().iter().flat_map(|&x| (x as f32).to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let (t, h, w) = v.shape();
    let side = Sidecar {
        frames: t,
        height: h,
        width: w,
    };
    let sp = sidecar_path(path);
    let text = serde_json::to_string(&side).map_err(|e| Error::Json {
        path: sp.clone(),
        source: e,
    })?;
    fs::write(&sp, text).map_err(|e| Error::io(&sp, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(t: usize, h: usize, w: usize) -> VideoWindow {
        let n = t * h * w;
        VideoWindow::new(t, h, w, (0..n).map(|i| i as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn raw_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("clip.f32");
        save_raw_f32(&p, &ramp(8, 32, 32)).unwrap();
        let first = fs::read(&p).unwrap();
        let v = load_raw_f32(&p).unwrap();
        assert_eq!(v.shape(), (8, 32, 32));
        save_raw_f32(&p, &v).unwrap();
        assert_eq!(fs::read(&p).unwrap(), first);
        assert_eq!(
            fs::read_to_string(sidecar_path(&p)).unwrap(),
            r#"{"T":8,"H":32,"W":32}"#
        );
    }

    #[test]
    fn short_file_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("clip.f32");
        save_raw_f32(&p, &ramp(7, 32, 32)).unwrap();
        fs::write(sidecar_path(&p), r#"{"T":8,"H":32,"W":32}"#).unwrap();
        let e = load_raw_f32(&p).unwrap_err();
        assert!(
            matches!(e, Error::Core(sim2spec_core::Error::Shape(ref m)) if m.contains("7 frame(s)")),
            "{e}"
        );
    }

    #[test]
    fn sidecar_rejects_extra_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("clip.f32");
        save_raw_f32(&p, &ramp(1, 2, 2)).unwrap();
        fs::write(sidecar_path(&p), r#"{"T":1,"H":2,"W":2,"C":1}"#).unwrap();
        assert!(matches!(load_raw_f32(&p), Err(Error::Json { .. })));
    }

    #[test]
    fn pgm_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let n = 16 * 64 * 64;
        let v = VideoWindow::new(16, 64, 64, (0..n).map(|i| (i % 256) as f64 / 255.0).collect()).unwrap();
        save_pgm_dir(dir.path(), &v).unwrap();
        let back = load_video(dir.path(), None).unwrap();
        assert_eq!(back.shape(), (16, 64, 64));
        assert_eq!(back, v);
    }

    #[test]
    fn colour_frames_are_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame_0000.ppm");
        let file = fs::File::create(&path).unwrap();
        PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&[255, 0, 0, 0, 0, 255], 2, 1, ExtendedColorType::Rgb8)
            .unwrap();
        let v = load_pgm_dir(dir.path()).unwrap();
        assert_eq!(v.data(), &[1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn corrupt_frame_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("frame_0000.pgm"), b"P5\n2 2\n255\n\x01").unwrap();
        let e = load_pgm_dir(dir.path()).unwrap_err();
        assert!(e.to_string().contains("frame_0000.pgm"), "{e}");
    }

    #[test]
    fn missing_path_is_an_io_error() {
        let e = load_video(Path::new("/nonexistent/clip.f32"), None).unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
    }
}

//! The analysis unit: a single-channel `T×H×W` luminance block.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `(t, y, x)` luminance samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoWindow {
    frames: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl VideoWindow {
    pub fn new(frames: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if frames == 0 || height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "dimensions must be positive, got {frames}x{height}x{width}"
            )));
        }
        let expected = frames * height * width;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{frames}x{height}x{width} needs {expected} samples, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            frames,
            height,
            width,
            data,
        })
    }

    /// Builds a window from interleaved multi-channel samples by averaging the
    /// channels with equal weight.
    pub fn from_interleaved(
        frames: usize,
        height: usize,
        width: usize,
        channels: usize,
        samples: &[f64],
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Shape("zero channels".into()));
        }
        if samples.len() != frames * height * width * channels {
            return Err(Error::Shape(format!(
                "{frames}x{height}x{width}x{channels} needs {} samples, got {}",
                frames * height * width * channels,
                samples.len()
            )));
        }
        let scale = 1.0 / channels as f64;
        let data = samples
            .chunks_exact(channels)
            .map(|px| px.iter().sum::<f64>() * scale)
            .collect();
        Self::new(frames, height, width, data)
    }

    pub fn zeros(frames: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(frames, height, width, alloc::vec![0.0; frames * height * width])
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.frames, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[t * n..(t + 1) * n]
    }

    #[inline]
    pub fn at(&self, t: usize, y: usize, x: usize) -> f64 {
        self.data[(t * self.height + y) * self.width + x]
    }

    /// Frames `start..start + len` as a new window.
    pub fn slice_frames(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.frames {
            return Err(Error::Shape(format!(
                "frames {start}..{} out of range for {} frames",
                start + len,
                self.frames
            )));
        }
        let n = self.height * self.width;
        Self::new(
            len,
            self.height,
            self.width,
            self.data[start * n..(start + len) * n].to_vec(),
        )
    }

    /// Adds `offset` to every sample.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v + offset).collect(),
            ..self.clone()
        }
    }
}

/// Subtracts the mid-grey level ½ from every sample, mapping `[0, 1]` onto
/// `[−½, ½]`.
pub fn normalize_window(v: &VideoWindow) -> VideoWindow {
    v.shifted(-0.5)
}

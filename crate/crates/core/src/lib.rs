//! Spectral rigid-motion analysis for short video windows.
//!
//! A window `V ∈ R^{T×H×W}` is transformed into its spatiotemporal spectrum and
//! scored against the three slices of the similarity-group spectral hyperplane
//!
//! ```text
//! ω_t + v_x ω_x + v_y ω_y + Ω m + α ν + b_0 = 0
//! ```
//!
//! translation (a plane in `(ω_x, ω_y, ω_t)`), rotation (tilted lines in the
//! angular-harmonic plane `(m, ω_t)`) and scaling (tilted lines in the
//! log-radial plane `(ν, ω_t)`). The three slice losses are mixed by a
//! softmax over negative losses, and [`bounds`] evaluates the inequalities that
//! tie the surrogates to the joint weighted-ridge residual.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command line
//! and calibration files live in the `sim2spec` companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;

pub mod bounds;
pub mod config;
pub mod error;
pub mod fft;
pub mod gates;
pub mod losses;
pub mod resample;
pub mod spectral;
pub mod synth;
pub mod video;
pub mod wls;

pub use config::{MotionEstimate, SpectralConfig, WindowKind};
pub use error::{Error, Result};
pub use losses::{analyze, LossReport, MotionKind};
pub use video::{normalize_window, VideoWindow};

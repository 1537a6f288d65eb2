pub use sim2spec_core as core;

pub mod calibration;
pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod sweep;
pub mod validate;

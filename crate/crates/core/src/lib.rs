//! Optomechanical quantum-correlation thermometry.
//!
//! The crate is organised along the measurement chain:
//!
//! * [`model`] evaluates the linearized cavity-optomechanics spectra in closed
//!   form and serves as the oracle for everything downstream.
//! * [`synth`] turns those spectra into sampled detector records.
//! * [`dsp`] tracks the heterodyne carrier, demodulates, calibrates and
//!   estimates cross-spectra.
//! * [`fit`] extracts line parameters and converts them to temperature.
//! * [`io`] holds the configuration format, file formats and plotting used by
//!   the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the matrix and bin formulas
#![allow(clippy::needless_range_loop)]
pub mod commands;
pub mod constants;
pub mod dsp;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod selftest;
pub mod synth;

pub use error::{Error, Result};
pub use model::{ComplexSpectrum, DeviceParams, Norm, ProbeParams};

/// Version string embedded in every output file.
pub const TOOL_VERSION: &str = concat!("omthermo ", env!("CARGO_PKG_VERSION"));

//! Measurement pipeline: carrier tracking, demodulation, spectral estimation,
//! electronics calibration, quadrature-rotation nulling and LO-sign
//! separation.

mod calibrate;
mod demod;
mod nullscan;
mod quadrature;
mod welch;
mod window;

pub use calibrate::{calibrate_gain, calibrate_phase, estimated_response, GainCalibration, PhaseCalibration, MIN_TONE_SNR_DB};
pub use demod::{demodulate, track_carrier_phase, CarrierPhase, TrackConfig};
pub use nullscan::{coth_input, combine_lo_signs, scan_rotation_null, CrossSpectraSet};
pub use quadrature::{if_bin_omega, rotate_quadratures, QuadraturePair};
pub use welch::{estimate_cross_spectrum, estimate_spectral_matrix, SpectralMatrix, WelchConfig, MIN_SEGMENTS};
pub use window::{bin_correlation, overlap_correlation, Window};

//! Synthetic detector records whose statistics realize the model spectra.
//!
//! Noise is drawn bin by bin in the frequency domain from independent
//! Gaussian inputs (vacuum at both cavity ports, thermal force), pushed
//! through the linear response and transformed back. Long records are made of
//! independent circular blocks much longer than the mechanical decay time.

mod baseband;
mod drift;
pub mod electronics;
mod langevin;
mod record;
mod spectral;
pub mod stream;

pub use baseband::{default_sample_rate, synth_baseband_quadratures, SynthConfig, DEFAULT_MAX_SAMPLES};
pub use electronics::ElectronicResponse;
pub use langevin::{langevin_mean_square, synth_displacement};
pub use record::{
    inject_detector_nonlinearity, inject_electronic_dispersion, phase_comb_record, shot_noise_record,
    synth_heterodyne_record, Artifact, CarrierConfig, PhotocurrentRecord, RecordKind, RecordMeta, RecordOptions,
};
pub use spectral::{sample_spectral_matrix, wishart_2x2};

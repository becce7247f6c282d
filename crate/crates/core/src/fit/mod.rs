//! Line fitting and thermometry.

mod allan;
mod extrapolate;
mod lines;
pub mod lm;
mod thermo;

pub use allan::{allan_deviation, AllanCurve, MIN_TERMS};
pub use extrapolate::{extrapolate_zero_power, ZeroPowerFit};
pub use lines::{
    fit_dispersive, fit_fixed_line, fit_joint, fit_lorentzian, fit_two_lorentzians, FitBand, FitResult, LineGuess,
    ModelTag, Part, Shape,
};
pub use thermo::{
    temperature_from_amplitudes, temperature_from_coth, temperature_from_coth_ratio, temperature_from_ratio, Method,
    RatioTemperatures, TemperatureEstimate,
};

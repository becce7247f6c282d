//! Closed-form linearized cavity-optomechanics model.
//!
//! Spectra are symmetrized and two-sided. Unless stated otherwise they are in
//! shot-noise units, where the vacuum spectrum of any output quadrature is 1.
//! Angular frequencies throughout.

mod params;
mod response;
mod spectrum;

pub use params::{detection_efficiency, DeviceParams, ProbeParams};
pub use response::{output_transfer, port_psd, spectral_matrix, Port, Transfer, PORTS};
pub use spectrum::{linear_grid, ComplexSpectrum, Norm};

use num_complex::Complex64;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// χ_m(ω) = 1 / (m (ω_m² − ω² − i Γ_m ω)), in m/N.
pub fn mech_susceptibility(omega: f64, p: &DeviceParams) -> Complex64 {
    let den = Complex64::new(
        p.m * (p.omega_m * p.omega_m - omega * omega),
        -p.m * p.gamma_m * omega,
    );
    den.inv()
}

/// χ_c(ω) = 1 / (κ/2 − i(ω − Δ_p)), in s.
pub fn cavity_susceptibility(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> Complex64 {
    Complex64::new(p.kappa / 2.0, -(omega - pr.delta_p)).inv()
}

/// Bose occupation 1 / (exp(ħω / k_B T) − 1). Zero at T = 0.
pub fn thermal_occupation(omega: f64, t: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("thermal occupation needs omega > 0, got {omega}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * t)).exp_m1())
}

/// coth(ħω / 2 k_B T) = 2 n_th + 1; equals 1 in the T → 0 limit.
pub fn coth_ratio(omega: f64, t: f64) -> Result<f64> {
    Ok(2.0 * thermal_occupation(omega, t)? + 1.0)
}

/// Symmetrized thermal force spectral density m Γ_m ħω coth(ħω / 2 k_B T),
/// two-sided, N²/Hz. Double it for the one-sided convention.
pub fn fdt_force_psd(omega: f64, p: &DeviceParams, t: f64) -> Result<f64> {
    Ok(p.m * p.gamma_m * HBAR * omega * coth_ratio(omega, t)?)
}

/// D(ω) = 2ħ ε N̄ G² κ / (κ²/4 + ω²), for a resonant probe.
pub fn transduction_strength(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> f64 {
    let g = p.coupling_g();
    2.0 * HBAR * pr.eps * pr.nbar * g * g * p.kappa / (p.kappa * p.kappa / 4.0 + omega * omega)
}

/// The same quantity written as 4 ε κ g0² ā² m ω_m |χ_c(ω)|²; it agrees with
/// [`transduction_strength`] when Δ_p = 0.
pub fn transduction_strength_cavity_form(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> f64 {
    4.0 * pr.eps * p.kappa * p.g0 * p.g0 * pr.nbar * p.m * p.omega_m
        * cavity_susceptibility(omega, p, pr).norm_sqr()
}

fn require_resonant(pr: &ProbeParams, op: &str) -> Result<()> {
    if pr.delta_p != 0.0 {
        return Err(Error::Domain(format!(
            "{op} assumes a resonant probe (delta_p = 0); use general_cross_spectrum"
        )));
    }
    Ok(())
}

/// Amplitude–phase cross-correlation S_{0,π/2}(ω) = D(ω) χ_m(ω).
pub fn quantum_correlation_spectrum(
    grid: &[f64],
    p: &DeviceParams,
    pr: &ProbeParams,
) -> Result<ComplexSpectrum> {
    require_resonant(pr, "quantum_correlation_spectrum")?;
    let values = grid
        .iter()
        .map(|&w| mech_susceptibility(w, p) * transduction_strength(w, p, pr))
        .collect();
    ComplexSpectrum::new(grid.to_vec(), values, Norm::ShotNoise)
}

/// Rotated-quadrature cross-correlation S_{π/4,3π/4}(ω).
///
/// Real part: 2 D Im χ_m (n_th + 1/2), plus the radiation-pressure motion
/// term |D χ_m|² / 2ε when `include_rpsn` is set. Imaginary part: Im S_{0,π/2}.
pub fn thermal_correlation_spectrum(
    grid: &[f64],
    p: &DeviceParams,
    pr: &ProbeParams,
    include_rpsn: bool,
) -> Result<ComplexSpectrum> {
    require_resonant(pr, "thermal_correlation_spectrum")?;
    let mut values = Vec::with_capacity(grid.len());
    for &w in grid {
        let q = mech_susceptibility(w, p) * transduction_strength(w, p, pr);
        let mut re = q.im * coth_ratio(w, pr.t_bath)?;
        if include_rpsn {
            re += q.norm_sqr() / (2.0 * pr.eps);
        }
        values.push(Complex64::new(re, q.im));
    }
    ComplexSpectrum::new(grid.to_vec(), values, Norm::ShotNoise)
}

/// Symmetrized cross-spectrum S_{φ1,φ2}(ω) of the detected output quadratures
/// δX_φ = cos φ δX_I + sin φ δX_Q, from the full finite-detuning solution
/// (dynamical backaction, loss port and thermal force included).
pub fn general_cross_spectrum(
    phi1: f64,
    phi2: f64,
    grid: &[f64],
    p: &DeviceParams,
    pr: &ProbeParams,
) -> Result<ComplexSpectrum> {
    if pr.delta_p.abs() > 0.05 * p.kappa {
        log::warn!(
            "delta_p/kappa = {:.3e} is not small; linearized detuned solution may be inaccurate",
            pr.delta_p / p.kappa
        );
    }
    let (c1, s1) = (phi1.cos(), phi1.sin());
    let (c2, s2) = (phi2.cos(), phi2.sin());
    let mut values = Vec::with_capacity(grid.len());
    for &w in grid {
        let t = output_transfer(w, p, pr);
        let psd = port_psd(w, p, pr)?;
        let mut acc = Complex64::default();
        for k in 0..PORTS {
            let h1 = t.amplitude[k] * c1 + t.phase[k] * s1;
            let h2 = t.amplitude[k] * c2 + t.phase[k] * s2;
            acc += h1.conj() * h2 * psd[k];
        }
        values.push(acc);
    }
    ComplexSpectrum::new(grid.to_vec(), values, Norm::ShotNoise)
}

/// Converts a shot-noise-normalized spectrum to effective displacement units
/// by dividing out the phase-quadrature displacement transduction
/// 4 ε G² N̄ κ |χ_c(ω)|².
pub fn to_displacement(
    spec: &ComplexSpectrum,
    p: &DeviceParams,
    pr: &ProbeParams,
) -> Result<ComplexSpectrum> {
    if spec.norm != Norm::ShotNoise {
        return Err(Error::validation("spectrum", "expected shot-noise normalization"));
    }
    let g = p.coupling_g();
    let scale: Vec<f64> = spec
        .freqs
        .iter()
        .map(|&w| 4.0 * pr.eps * g * g * pr.nbar * p.kappa * cavity_susceptibility(w, p, pr).norm_sqr())
        .collect();
    if scale.contains(&0.0) {
        return Err(Error::Domain("zero transduction (nbar = 0?)".into()));
    }
    let mut out = spec.clone();
    out.norm = Norm::Displacement;
    for (v, s) in out.values.iter_mut().zip(&scale) {
        *v /= *s;
    }
    if let Some(sig) = out.sigma.as_mut() {
        for (v, s) in sig.iter_mut().zip(&scale) {
            *v /= *s;
        }
    }
    Ok(out)
}

/// Peak thermal correlation height A = 2 D Im χ_m (n_th + 1/2) at ω_m.
pub fn thermal_peak(p: &DeviceParams, pr: &ProbeParams) -> Result<f64> {
    let w = p.omega_m;
    Ok(transduction_strength(w, p, pr) * mech_susceptibility(w, p).im * coth_ratio(w, pr.t_bath)?)
}

/// Peak of Im S_{0,π/2} at ω_m, which is also the peak-to-peak of its real part.
pub fn quantum_peak(p: &DeviceParams, pr: &ProbeParams) -> f64 {
    let w = p.omega_m;
    transduction_strength(w, p, pr) * mech_susceptibility(w, p).im
}

#[cfg(test)]
mod tests;

//! Gain and phase of the detection electronics from calibration records.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::QuadraturePair;
use super::welch::SpectralMatrix;
use crate::error::{Error, Result};
use crate::fit::lm::invert_spd;
use crate::synth::ElectronicResponse;

/// Weighted polynomial fit in (x − x_ref); returns raw-unit coefficients,
/// their covariance and χ².
fn poly_fit(x: &[f64], y: &[f64], s: &[f64], x_ref: f64, order: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = order + 1;
    if x.len() <= n {
        return Err(Error::validation("calibration", format!("{} points for a degree-{order} polynomial", x.len())));
    }
    let h = x.iter().map(|v| (v - x_ref).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ata = vec![vec![0.0; n]; n];
    let mut aty = vec![0.0; n];
    for q in 0..x.len() {
        let t = (x[q] - x_ref) / h;
        let w = 1.0 / (s[q] * s[q]);
        let pw: Vec<f64> = (0..n).map(|j| t.powi(j as i32)).collect();
        for i in 0..n {
            aty[i] += w * pw[i] * y[q];
            for j in 0..n {
                ata[i][j] += w * pw[i] * pw[j];
            }
        }
    }
    let cov = invert_spd(&ata).ok_or_else(|| Error::Numeric("singular calibration fit".into()))?;
    let c: Vec<f64> = (0..n).map(|i| (0..n).map(|j| cov[i][j] * aty[j]).sum()).collect();
    let chi2 = (0..x.len())
        .map(|q| {
            let t = (x[q] - x_ref) / h;
            let f: f64 = c.iter().rev().fold(0.0, |acc, k| acc * t + k);
            ((y[q] - f) / s[q]).powi(2)
        })
        .sum();
    let scale: Vec<f64> = (0..n).map(|j| h.powi(-(j as i32))).collect();
    let coeffs = c.iter().zip(&scale).map(|(a, b)| a * b).collect();
    let cov_raw = (0..n).map(|i| (0..n).map(|j| cov[i][j] * scale[i] * scale[j]).collect()).collect();
    Ok((coeffs, cov_raw, chi2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCalibration {
    /// |H| as a polynomial in (ω − ω_ref), rad/s units.
    pub coeffs: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub omega_ref: f64,
    pub chi2_per_dof: f64,
    /// Residual structure beyond the polynomial: the record probably holds
    /// more than shot noise.
    pub suspect: bool,
}

/// Fits a polynomial of degree `order` to √((S_aa + S_bb)/2) of a
/// shot-noise record's raw (unnormalized) spectral matrix.
pub fn calibrate_gain(shot: &SpectralMatrix, omega_ref: f64, order: usize) -> Result<GainCalibration> {
    if shot.corrections.contains("shot-noise-normalized") {
        return Err(Error::validation("calibration", "gain calibration needs the unnormalized spectrum"));
    }
    let y: Vec<f64> = shot.s_aa.iter().zip(&shot.s_bb).map(|(a, b)| (0.5 * (a + b)).sqrt()).collect();
    let s: Vec<f64> = y.iter().map(|g| g / (2.0 * (2.0 * shot.n_eff).sqrt())).collect();
    let (coeffs, mut cov, chi2) = poly_fit(&shot.freqs, &y, &s, omega_ref, order)?;
    cov.iter_mut().flatten().for_each(|v| *v *= shot.bin_correlation);
    let dof = (shot.len() - order - 1) as f64;
    let chi2_per_dof = chi2 / dof;
    let suspect = chi2_per_dof > 1.0 + 5.0 * (2.0 * shot.bin_correlation / dof).sqrt();
    if suspect {
        log::warn!(
            "shot-noise record is not flat after a degree-{order} gain fit (χ²/dof = {chi2_per_dof:.3}); \
             possible contamination"
        );
    }
    Ok(GainCalibration {
        coeffs,
        covariance: cov,
        omega_ref,
        chi2_per_dof,
        suspect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCalibration {
    pub tones: Vec<f64>,
    /// Measured quadrature rotation of each tone, rad.
    pub phases: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// arg H as a polynomial in (ω − ω_ref).
    pub coeffs: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub omega_ref: f64,
}

/// Minimum tone-to-noise ratio, dB.
pub const MIN_TONE_SNR_DB: f64 = 20.0;

/// Measures the apparent rotation of phase-quadrature comb tones and fits
/// a polynomial (default degree min(tones − 1, 4)).
pub fn calibrate_phase(comb: &QuadraturePair, tones: &[f64], omega_ref: f64, order: Option<usize>) -> Result<PhaseCalibration> {
    comb.check()?;
    if tones.is_empty() {
        return Err(Error::validation("comb.tones", "empty"));
    }
    let n = comb.len();
    let fs = comb.sample_rate;
    let w: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos())
        .collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|v| v * v).sum();
    let var = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / n as f64;
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64
    };
    // Broadband noise level in the amplitude channel, which carries no tones.
    let noise_var = var(&comb.x_a);
    let noise_amp2 = 4.0 * sw2 * noise_var / (sw * sw);

    let mut phases = Vec::with_capacity(tones.len());
    let mut sigmas = Vec::with_capacity(tones.len());
    for &tone in tones {
        let w_if = tone - comb.omega_center + std::f64::consts::TAU * fs / 4.0;
        if !(w_if > 0.0 && w_if < std::f64::consts::PI * fs) {
            return Err(Error::validation("comb.tones", format!("{tone:.6e} rad/s outside the capture band")));
        }
        let (mut au, mut av) = (Complex64::default(), Complex64::default());
        for k in 0..n {
            let e = Complex64::from_polar(w[k], -w_if * k as f64 / fs);
            au += e * comb.x_a[k];
            av += e * comb.x_b[k];
        }
        au *= 2.0 / sw;
        av *= 2.0 / sw;
        let snr_db = 10.0 * (av.norm_sqr() / noise_amp2).log10();
        if !(snr_db >= MIN_TONE_SNR_DB) {
            return Err(Error::MissingTone {
                freq_hz: tone / std::f64::consts::TAU,
                snr_db,
            });
        }
        let proj = (au * av.conj()).re;
        phases.push((-proj).atan2(av.norm_sqr()));
        sigmas.push((0.5 * noise_amp2).sqrt() / av.norm());
    }
    let order = order.unwrap_or((tones.len() - 1).min(4));
    let (coeffs, covariance) = if order + 1 >= tones.len() {
        exact_poly(tones, &phases, &sigmas, omega_ref, order)?
    } else {
        let (c, cov, _) = poly_fit(tones, &phases, &sigmas, omega_ref, order)?;
        (c, cov)
    };
    Ok(PhaseCalibration {
        tones: tones.to_vec(),
        phases,
        sigmas,
        coeffs,
        covariance,
        omega_ref,
    })
}

fn exact_poly(x: &[f64], y: &[f64], s: &[f64], x_ref: f64, order: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if order + 1 > x.len() {
        return Err(Error::validation("calibration", "polynomial degree exceeds tone count − 1"));
    }
    // Each point duplicated at √2 its error carries the same information and
    // satisfies the least-squares point count.
    let xs: Vec<f64> = x.iter().chain(x).copied().collect();
    let ys: Vec<f64> = y.iter().chain(y).copied().collect();
    let ss: Vec<f64> = s.iter().chain(s).map(|v| v * std::f64::consts::SQRT_2).collect();
    let (c, cov, _) = poly_fit(&xs, &ys, &ss, x_ref, order)?;
    Ok((c, cov))
}

/// Electronics estimate combining the two calibrations.
pub fn estimated_response(gain: &GainCalibration, phase: &PhaseCalibration) -> Result<ElectronicResponse> {
    if gain.omega_ref != phase.omega_ref {
        return Err(Error::validation("calibration", "gain and phase use different reference frequencies"));
    }
    Ok(ElectronicResponse {
        gain_coeffs: gain.coeffs.clone(),
        phase_coeffs: phase.coeffs.clone(),
        omega_ref: gain.omega_ref,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_fit_recovers_quadratic() {
        let x: Vec<f64> = (0..20).map(|k| 1e6 + 1e3 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 - 2e-4 * (v - 1e6) + 1e-9 * (v - 1e6).powi(2)).collect();
        let s = vec![1e-3; 20];
        let (c, _, chi2) = poly_fit(&x, &y, &s, 1e6, 2).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-12);
        assert!((c[1] + 2e-4).abs() < 1e-15);
        assert!((c[2] - 1e-9).abs() < 1e-18);
        assert!(chi2 < 1e-12);
    }
}

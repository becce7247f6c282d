//! Temperature from line amplitudes.

use serde::{Deserialize, Serialize};

use super::lines::{fit_two_lorentzians, FitBand, FitResult, Part};
use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::model::ComplexSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// T = (A/2B) ħω_m / k_B
    RatioApprox,
    /// A/2B = n_th + 1/2 inverted through the Bose occupation.
    RatioExact,
    /// Re/Im of the thermal correlation = coth(ħω/2k_BT).
    Coth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    pub t: f64,
    pub sigma_t: f64,
    pub method: Method,
    /// Amplitudes entering the estimate (name, value, σ).
    pub inputs: Vec<(String, f64, f64)>,
}

/// Both ratio estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTemperatures {
    pub approx: TemperatureEstimate,
    pub exact: TemperatureEstimate,
    pub ratio: f64,
    pub sigma_ratio: f64,
}

/// Temperature from A, B (with their covariance) at ω_m.
pub fn temperature_from_amplitudes(a: f64, sa: f64, b: f64, sb: f64, cov_ab: f64, omega_m: f64) -> Result<RatioTemperatures> {
    if !(b > 0.0) || !(sb > 0.0) || b < 3.0 * sb {
        return Err(Error::Numeric(format!(
            "quantum amplitude B = {b:.4e} ± {sb:.2e} is not positive at 3σ"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::Numeric(format!("thermal amplitude A = {a:.4e} is not positive")));
    }
    let r = a / (2.0 * b);
    let rel2 = (sa / a).powi(2) + (sb / b).powi(2) - 2.0 * cov_ab / (a * b);
    let sr = r * rel2.max(0.0).sqrt();
    let unit = HBAR * omega_m / K_B;
    let inputs = vec![("A".to_string(), a, sa), ("B".to_string(), b, sb)];
    let approx = TemperatureEstimate {
        t: r * unit,
        sigma_t: sr * unit,
        method: Method::RatioApprox,
        inputs: inputs.clone(),
    };
    let n = r - 0.5;
    if !(n > 0.0) {
        return Err(Error::Domain(format!(
            "A/2B = {r:.6} leaves no thermal occupation (zero-temperature limit)"
        )));
    }
    let l = ((n + 1.0) / n).ln();
    let t = unit / l;
    let dt_dn = unit / (l * l * n * (n + 1.0));
    let exact = TemperatureEstimate {
        t,
        sigma_t: dt_dn * sr,
        method: Method::RatioExact,
        inputs,
    };
    Ok(RatioTemperatures {
        approx,
        exact,
        ratio: r,
        sigma_ratio: sr,
    })
}

/// Ratio thermometry from a Lorentzian fit `a` (parameter A) and a
/// dispersive fit `b` (parameter B); the same joint fit may be passed twice.
pub fn temperature_from_ratio(a: &FitResult, b: &FitResult, omega_m: f64) -> Result<RatioTemperatures> {
    let (av, sa) = (a.value("A")?, a.sigma("A")?);
    let (bv, sb) = (b.value("B")?, b.sigma("B")?);
    let cov = if std::ptr::eq(a, b) { a.cov("A", "B")? } else { 0.0 };
    temperature_from_amplitudes(av, sa, bv, sb, cov, omega_m)
}

/// Inverts coth(ħω/2k_BT) = R.
pub fn temperature_from_coth_ratio(r: f64, sr: f64, omega: f64) -> Result<TemperatureEstimate> {
    if !(r > 1.0) {
        return Err(Error::Numeric(format!(
            "Re/Im ratio {r:.6} ± {sr:.2e} is below 1, which no temperature produces"
        )));
    }
    let x = (1.0 / r).atanh();
    let unit = HBAR * omega / (2.0 * K_B);
    let dt_dr = unit / (x * x * (r * r - 1.0));
    Ok(TemperatureEstimate {
        t: unit / x,
        sigma_t: dt_dr * sr,
        method: Method::Coth,
        inputs: vec![("Re/Im".to_string(), r, sr)],
    })
}

/// Coth thermometry on a spectrum whose real part is the thermal Lorentzian
/// and whose imaginary part is the absorptive quantum Lorentzian.
pub fn temperature_from_coth(spec: &ComplexSpectrum, band: &FitBand) -> Result<(TemperatureEstimate, FitResult)> {
    let fit = fit_two_lorentzians((spec, Part::Re), (spec, Part::Im), band)?;
    let (re, sre) = (fit.value("A1")?, fit.sigma("A1")?);
    let (im, sim) = (fit.value("A2")?, fit.sigma("A2")?);
    if !(im > 3.0 * sim) {
        return Err(Error::Numeric(format!(
            "imaginary line {im:.4e} ± {sim:.2e} is not significant at 3σ"
        )));
    }
    let r = re / im;
    let rel2 = (sre / re).powi(2) + (sim / im).powi(2) - 2.0 * fit.cov("A1", "A2")? / (re * im);
    let mut est = temperature_from_coth_ratio(r, r.abs() * rel2.max(0.0).sqrt(), fit.center())?;
    est.inputs = vec![("Re".to_string(), re, sre), ("Im".to_string(), im, sim)];
    Ok((est, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: f64 = 2.0 * std::f64::consts::PI * 3.62e9;

    #[test]
    fn room_temperature_ratio() {
        // A/2B = 1692.5
        let r = temperature_from_amplitudes(1692.5 * 2.0, 1e-3, 1.0, 1e-3, 0.0, W).unwrap();
        assert!((r.approx.t - 294.0).abs() < 0.1, "{}", r.approx.t);
        assert!((r.exact.t / r.approx.t - 1.0).abs() < 1e-4);
        assert!((r.exact.t - 294.0).abs() < 0.1);
    }

    #[test]
    fn one_quantum() {
        let r = temperature_from_amplitudes(3.0, 1e-3, 1.0, 1e-3, 0.0, W).unwrap();
        let expect = HBAR * W / (K_B * std::f64::consts::LN_2);
        assert!((r.exact.t / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_ratio_is_a_limit() {
        assert!(matches!(
            temperature_from_amplitudes(1.0, 1e-3, 1.0, 1e-3, 0.0, W),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn insignificant_b_rejected() {
        assert!(temperature_from_amplitudes(10.0, 0.1, 0.2, 0.1, 0.0, W).is_err());
    }

    #[test]
    fn coth_of_two() {
        let t = temperature_from_coth_ratio(2.0, 0.01, W).unwrap();
        let x = HBAR * W / (2.0 * K_B * t.t);
        assert!((x - 0.5f64.atanh()).abs() < 1e-15);
        assert!(temperature_from_coth_ratio(0.9, 0.01, W).is_err());
    }
}

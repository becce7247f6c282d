use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, TWO_PI};
use crate::error::{Error, Result};

/// Mechanical, optical and coupling parameters of the device.
///
/// All rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Effective mass, kg. Shot-noise-normalized observables depend only on
    /// `g0`, so the value is arbitrary unless displacement units are needed.
    pub m: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Vacuum optomechanical coupling rate.
    pub g0: f64,
    /// Total optical decay rate.
    pub kappa: f64,
    /// Decay rate into the detected output port.
    pub kappa_out: f64,
}

impl Default for DeviceParams {
    /// Si3N4 nanobeam at room temperature: 3.62 GHz breathing mode, 1.4 MHz
    /// linewidth, g0/2π = 70 kHz, κ/2π = 10 GHz with κ_out/κ = 0.38.
    fn default() -> Self {
        let kappa = TWO_PI * 10e9;
        DeviceParams {
            m: 1e-15,
            omega_m: TWO_PI * 3.62e9,
            gamma_m: TWO_PI * 1.4e6,
            g0: TWO_PI * 70e3,
            kappa,
            kappa_out: 0.38 * kappa,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("device.m", self.m),
            ("device.omega_m", self.omega_m),
            ("device.gamma_m", self.gamma_m),
            ("device.g0", self.g0),
            ("device.kappa", self.kappa),
            ("device.kappa_out", self.kappa_out),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.gamma_m >= self.omega_m {
            return Err(Error::validation(
                "device.gamma_m",
                "must be below omega_m (underdamped resonator)",
            ));
        }
        if self.kappa_out > self.kappa {
            return Err(Error::validation(
                "device.kappa_out",
                format!("must not exceed kappa ({} > {})", self.kappa_out, self.kappa),
            ));
        }
        let g = self.coupling_g();
        let rel = (g * self.x_zp() - self.g0).abs() / self.g0;
        if rel > 1e-12 {
            return Err(Error::validation("device.g0", "g0 = G x_zp consistency lost"));
        }
        Ok(())
    }

    /// Zero-point displacement sqrt(ħ / 2 m ω_m), m.
    pub fn x_zp(&self) -> f64 {
        (HBAR / (2.0 * self.m * self.omega_m)).sqrt()
    }

    /// Frequency pull parameter G = dω_c/dx = g0 / x_zp, rad/(s·m).
    pub fn coupling_g(&self) -> f64 {
        self.g0 / self.x_zp()
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Output-coupling efficiency κ_out / κ.
    pub fn escape_efficiency(&self) -> f64 {
        self.kappa_out / self.kappa
    }

    /// Cooperativity C = 4 N̄ g0² / (κ Γ_m).
    pub fn cooperativity(&self, nbar: f64) -> f64 {
        4.0 * nbar * self.g0 * self.g0 / (self.kappa * self.gamma_m)
    }

    /// Intracavity photon number giving cooperativity `c`.
    pub fn nbar_for_cooperativity(&self, c: f64) -> f64 {
        c * self.kappa * self.gamma_m / (4.0 * self.g0 * self.g0)
    }
}

/// Probe, heterodyne and bath settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    /// Mean intracavity photon number N̄.
    pub nbar: f64,
    /// Probe–cavity detuning Δ_p, rad/s.
    pub delta_p: f64,
    /// Signed heterodyne LO detuning Δ_LO, rad/s.
    pub delta_lo: f64,
    /// Overall detection efficiency including the heterodyne factor 1/2.
    pub eps: f64,
    /// Bath temperature, K.
    pub t_bath: f64,
}

impl Default for ProbeParams {
    /// C = 0.01 on the default device, ε = 0.09 × 0.5, Δ_LO/2π = +5 MHz, 294 K.
    fn default() -> Self {
        ProbeParams {
            nbar: DeviceParams::default().nbar_for_cooperativity(0.01),
            delta_p: 0.0,
            delta_lo: TWO_PI * 5e6,
            eps: 0.09 * 0.5,
            t_bath: 294.0,
        }
    }
}

impl ProbeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(Error::validation("probe.nbar", "must be finite and >= 0"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::validation("probe.eps", "must lie in (0, 1]"));
        }
        if !(self.t_bath.is_finite() && self.t_bath >= 0.0) {
            return Err(Error::validation("probe.t_bath", "must be finite and >= 0"));
        }
        if !self.delta_p.is_finite() {
            return Err(Error::validation("probe.delta_p", "must be finite"));
        }
        if !(self.delta_lo.is_finite() && self.delta_lo != 0.0) {
            return Err(Error::validation("probe.delta_lo", "must be finite and nonzero"));
        }
        Ok(())
    }

    /// Intracavity amplitude ā = sqrt(N̄), taken real.
    pub fn abar(&self) -> f64 {
        self.nbar.sqrt()
    }

    /// Sign of the heterodyne detuning, ±1.
    pub fn lo_sign(&self) -> i8 {
        if self.delta_lo < 0.0 {
            -1
        } else {
            1
        }
    }

    pub fn with_lo_sign(mut self, sign: i8) -> Self {
        self.delta_lo = self.delta_lo.abs() * if sign < 0 { -1.0 } else { 1.0 };
        self
    }
}

/// Overall efficiency from the individual loss factors and the heterodyne
/// penalty of one half.
pub fn detection_efficiency(escape: f64, propagation: f64, conversion: f64, dark_noise: f64) -> f64 {
    escape * propagation * conversion * dark_noise * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_device_is_valid() {
        DeviceParams::default().validate().unwrap();
        ProbeParams::default().validate().unwrap();
    }

    #[test]
    fn coupling_round_trip() {
        let d = DeviceParams::default();
        let rel = (d.coupling_g() * d.x_zp() - d.g0).abs() / d.g0;
        assert!(rel < 1e-14);
    }

    #[test]
    fn rejects_kappa_out_above_kappa() {
        let d = DeviceParams {
            kappa_out: 2.0 * DeviceParams::default().kappa,
            ..Default::default()
        };
        match d.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "device.kappa_out"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_overdamped() {
        let d = DeviceParams {
            gamma_m: 2.0 * DeviceParams::default().omega_m,
            ..Default::default()
        };
        assert!(d.validate().is_err());
    }

    #[test]
    fn cooperativity_inverse() {
        let d = DeviceParams::default();
        let n = d.nbar_for_cooperativity(0.01);
        assert!((d.cooperativity(n) - 0.01).abs() < 1e-15);
        // ~7.1e3 photons for C = 0.01
        assert!((n / 7.14e3 - 1.0).abs() < 0.01, "nbar = {n}");
    }

    #[test]
    fn efficiency_product() {
        let eps = detection_efficiency(0.38, 0.5, 0.8, 0.6);
        assert!((eps - 0.0456).abs() < 1e-12);
    }
}

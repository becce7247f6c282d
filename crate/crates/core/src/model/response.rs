//! Linear map from the independent noise inputs to the detected output
//! quadratures, for arbitrary probe detuning.
//!
//! Quadratures are referenced to the intracavity field (ā real). Inputs are
//! the vacuum amplitude and phase quadratures entering the cavity, the thermal
//! force, and the two quadratures of the vacuum entering at the effective loss
//! port. All inputs are mutually uncorrelated.

use num_complex::Complex64;

use super::{cavity_susceptibility, fdt_force_psd, mech_susceptibility, DeviceParams, ProbeParams};
use crate::constants::HBAR;
use crate::error::Result;

pub const PORTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    InputAmplitude = 0,
    InputPhase = 1,
    ThermalForce = 2,
    LossAmplitude = 3,
    LossPhase = 4,
}

/// Transfer coefficients from each input port to the detected amplitude (I)
/// and phase (Q) quadratures at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct Transfer {
    pub amplitude: [Complex64; PORTS],
    pub phase: [Complex64; PORTS],
}

pub fn output_transfer(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> Transfer {
    let i = Complex64::i();
    let sk = p.kappa.sqrt();
    let g = p.coupling_g();
    let abar = pr.abar();
    let chi_m = mech_susceptibility(omega, p);
    // χ_c(ω) and χ_c*(−ω)
    let cc = cavity_susceptibility(omega, p, pr);
    let ct = cavity_susceptibility(-omega, p, pr).conj();
    let sum = cc + ct;
    let diff = cc - ct;

    // x = χ_m / (1 − iħG²ā² χ_m (χ_c − χ_c*(−ω))) (F − ħGā√κ (χ_c ξ + χ_c*(−ω) ξ†))
    // with ξ = (X_I + i X_Q)/2, ξ† = (X_I − i X_Q)/2.
    let pre = chi_m / (Complex64::new(1.0, 0.0) - i * HBAR * g * g * abar * abar * chi_m * diff);
    let x_i = -pre * HBAR * g * abar * sk * sum / 2.0;
    let x_q = -pre * HBAR * g * abar * sk * i * diff / 2.0;
    let x_f = pre;

    // d + d† and d − d† in terms of x and the input quadratures.
    let plus = [
        -i * g * abar * diff * x_i + sk * sum / 2.0,
        -i * g * abar * diff * x_q + sk * i * diff / 2.0,
        -i * g * abar * diff * x_f,
    ];
    let minus = [
        -i * g * abar * sum * x_i + sk * diff / 2.0,
        -i * g * abar * sum * x_q + sk * i * sum / 2.0,
        -i * g * abar * sum * x_f,
    ];

    // a_out = a_in − √κ a, then δX_I = d_out + d_out†, δX_Q = −i(d_out − d_out†).
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    let cav_i = [one - sk * plus[0], -sk * plus[1], -sk * plus[2]];
    let cav_q = [i * sk * minus[0], one + i * sk * minus[1], i * sk * minus[2]];

    // Loss: δX → √ε δX + √(1−ε) δX_loss.
    let se = pr.eps.sqrt();
    let sl = (1.0 - pr.eps).max(0.0).sqrt();
    Transfer {
        amplitude: [cav_i[0] * se, cav_i[1] * se, cav_i[2] * se, one * sl, zero],
        phase: [cav_q[0] * se, cav_q[1] * se, cav_q[2] * se, zero, one * sl],
    }
}

/// Two-sided symmetrized spectra of the input ports (vacuum = 1, force in N²/Hz).
pub fn port_psd(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> Result<[f64; PORTS]> {
    let sf = fdt_force_psd(omega.abs().max(f64::MIN_POSITIVE), p, pr.t_bath)?;
    Ok([1.0, 1.0, sf, 1.0, 1.0])
}

/// (S_II, S_QQ, S_IQ) of the detected quadratures.
pub fn spectral_matrix(omega: f64, p: &DeviceParams, pr: &ProbeParams) -> Result<(f64, f64, Complex64)> {
    let t = output_transfer(omega, p, pr);
    let psd = port_psd(omega, p, pr)?;
    let mut sii = 0.0;
    let mut sqq = 0.0;
    let mut siq = Complex64::default();
    for k in 0..PORTS {
        sii += t.amplitude[k].norm_sqr() * psd[k];
        sqq += t.phase[k].norm_sqr() * psd[k];
        siq += t.amplitude[k].conj() * t.phase[k] * psd[k];
    }
    Ok((sii, sqq, siq))
}

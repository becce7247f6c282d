//! Frequency response of the detection electronics.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gain |H| and phase arg H of the detection chain as polynomials in
/// (ω − ω_ref), coefficients in ascending order and rad/s units.
///
/// Acting on the quadratures, the response scales both by |H| and rotates
/// the pair by arg H, so a phase that varies across a line mixes amplitude
/// and phase noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectronicResponse {
    pub gain_coeffs: Vec<f64>,
    pub phase_coeffs: Vec<f64>,
    pub omega_ref: f64,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

impl ElectronicResponse {
    pub fn identity(omega_ref: f64) -> Self {
        ElectronicResponse {
            gain_coeffs: vec![1.0],
            phase_coeffs: vec![],
            omega_ref,
        }
    }

    /// Unit gain and a phase slope `slope` (rad per rad/s) through ω_ref.
    pub fn linear_phase(omega_ref: f64, slope: f64) -> Self {
        ElectronicResponse {
            gain_coeffs: vec![1.0],
            phase_coeffs: vec![0.0, slope],
            omega_ref,
        }
    }

    pub fn gain(&self, omega: f64) -> f64 {
        poly(&self.gain_coeffs, omega - self.omega_ref)
    }

    pub fn phase(&self, omega: f64) -> f64 {
        poly(&self.phase_coeffs, omega - self.omega_ref)
    }

    pub fn is_identity(&self) -> bool {
        let g = self.gain_coeffs.iter().enumerate().all(|(k, &c)| c == if k == 0 { 1.0 } else { 0.0 });
        g && !self.gain_coeffs.is_empty() && self.phase_coeffs.iter().all(|&c| c == 0.0)
    }

    /// Gain must stay positive over [lo, hi].
    pub fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        if self.gain_coeffs.is_empty() {
            return Err(Error::validation("electronics.gain", "no coefficients"));
        }
        let all = self.gain_coeffs.iter().chain(&self.phase_coeffs).chain([&self.omega_ref]);
        if all.into_iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("electronics", "non-finite coefficient"));
        }
        for k in 0..=256 {
            let w = lo + (hi - lo) * k as f64 / 256.0;
            if !(self.gain(w) > 0.0) {
                return Err(Error::validation(
                    "electronics.gain",
                    format!("not positive at {:.6e} rad/s", w),
                ));
            }
        }
        Ok(())
    }

    /// Short stable identifier for record metadata.
    pub fn id(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("plain data serializes");
        let h = Sha256::digest(text.as_bytes());
        h[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Filters the complex sideband signal i + i·q block by block.
///
/// With z = x_I − i x_Q the quadrature rotation is z → |H| e^{−i arg H} z at
/// both signs of the transform frequency. Blocks are circular and aligned
/// with the synthesis segments, which are themselves circular.
pub(crate) fn filter_sidebands(
    i_ch: &mut [f32],
    q_ch: &mut [f32],
    resp: &ElectronicResponse,
    omega_center: f64,
    sample_rate: f64,
    block: usize,
) {
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(block);
    let inv = planner.plan_fft_inverse(block);
    let h: Vec<Complex64> = (0..block)
        .map(|j| {
            let f = if j <= block / 2 { j as f64 } else { j as f64 - block as f64 } * sample_rate / block as f64;
            let w = omega_center + std::f64::consts::TAU * (f.abs() - sample_rate / 4.0);
            Complex64::from_polar(resp.gain(w), -resp.phase(w)) / block as f64
        })
        .collect();
    let mut buf = vec![Complex64::default(); block];
    for (ci, cq) in i_ch.chunks_mut(block).zip(q_ch.chunks_mut(block)) {
        let m = ci.len();
        for k in 0..block {
            buf[k] = if k < m {
                Complex64::new(ci[k] as f64, cq[k] as f64)
            } else {
                Complex64::default()
            };
        }
        fwd.process(&mut buf);
        for (b, hk) in buf.iter_mut().zip(&h) {
            *b *= hk;
        }
        inv.process(&mut buf);
        for k in 0..m {
            ci[k] = buf[k].re as f32;
            cq[k] = buf[k].im as f32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_evaluation() {
        let r = ElectronicResponse {
            gain_coeffs: vec![2.0, 0.5, -1.0],
            phase_coeffs: vec![0.1],
            omega_ref: 10.0,
        };
        assert_eq!(r.gain(12.0), 2.0 + 1.0 - 4.0);
        assert_eq!(r.phase(-5.0), 0.1);
        assert!(!r.is_identity());
        assert!(ElectronicResponse::identity(0.0).is_identity());
    }

    #[test]
    fn nonpositive_gain_rejected() {
        let r = ElectronicResponse {
            gain_coeffs: vec![1.0, 1e-3],
            phase_coeffs: vec![],
            omega_ref: 0.0,
        };
        assert!(r.validate(-500.0, 500.0).is_ok());
        assert!(r.validate(-2000.0, 0.0).is_err());
    }

    #[test]
    fn ids_are_stable_and_distinct() {
        let a = ElectronicResponse::linear_phase(1.0, 1e-9);
        assert_eq!(a.id(), a.clone().id());
        assert_ne!(a.id(), ElectronicResponse::linear_phase(1.0, 2e-9).id());
    }
}

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Two orthogonal baseband quadratures in the intermediate-frequency frame.
///
/// Sample `k` of the discrete spectrum of a segment of length `n` sits at the
/// physical angular frequency `omega_center + 2π(k·fs/n − fs/4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePair {
    pub sample_rate: f64,
    pub omega_center: f64,
    pub x_a: Vec<f64>,
    pub x_b: Vec<f64>,
    pub angle_a: f64,
    pub angle_b: f64,
    pub lo_sign: i8,
    pub corrections: BTreeSet<String>,
}

impl QuadraturePair {
    pub fn new(sample_rate: f64, omega_center: f64, x_a: Vec<f64>, x_b: Vec<f64>, lo_sign: i8) -> Result<Self> {
        let p = QuadraturePair {
            sample_rate,
            omega_center,
            x_a,
            x_b,
            angle_a: 0.0,
            angle_b: std::f64::consts::FRAC_PI_2,
            lo_sign,
            corrections: BTreeSet::new(),
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.x_a.len() != self.x_b.len() {
            return Err(Error::validation(
                "pair",
                format!("channel lengths differ ({} vs {})", self.x_a.len(), self.x_b.len()),
            ));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::validation("pair.sample_rate", "must be positive"));
        }
        if ((self.angle_b - self.angle_a) - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
            return Err(Error::validation("pair", "declared angles are not orthogonal"));
        }
        if self.lo_sign != 1 && self.lo_sign != -1 {
            return Err(Error::validation("pair.lo_sign", "must be +1 or -1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_a.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Physical angular frequency of bin `k` for a transform of length `n`.
    pub fn bin_omega(&self, k: usize, n: usize) -> f64 {
        if_bin_omega(self.omega_center, self.sample_rate, k, n)
    }
}

pub fn if_bin_omega(omega_center: f64, sample_rate: f64, k: usize, n: usize) -> f64 {
    omega_center + crate::constants::TWO_PI * (k as f64 * sample_rate / n as f64 - sample_rate / 4.0)
}

/// Exact rotation (x_a, x_b) → (cos φ x_a + sin φ x_b, −sin φ x_a + cos φ x_b).
pub fn rotate_quadratures(pair: &QuadraturePair, phi: f64) -> QuadraturePair {
    let (s, c) = phi.sin_cos();
    let (x_a, x_b) = pair
        .x_a
        .iter()
        .zip(&pair.x_b)
        .map(|(&a, &b)| (c * a + s * b, -s * a + c * b))
        .unzip();
    QuadraturePair {
        x_a,
        x_b,
        angle_a: pair.angle_a + phi,
        angle_b: pair.angle_b + phi,
        ..pair.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(a: Vec<f64>, b: Vec<f64>) -> QuadraturePair {
        QuadraturePair::new(1e6, 0.0, a, b, 1).unwrap()
    }

    #[test]
    fn zero_is_identity() {
        let p = pair(vec![1.0, -2.0, 0.5], vec![0.3, 0.1, 4.0]);
        assert_eq!(rotate_quadratures(&p, 0.0), p);
    }

    #[test]
    fn quarter_turn_swaps() {
        let p = pair(vec![1.0, -2.0], vec![0.3, 4.0]);
        let r = rotate_quadratures(&p, std::f64::consts::FRAC_PI_2);
        for k in 0..2 {
            assert!((r.x_a[k] - p.x_b[k]).abs() < 1e-15);
            assert!((r.x_b[k] + p.x_a[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(QuadraturePair::new(1.0, 0.0, vec![1.0], vec![], 1).is_err());
    }

    proptest! {
        #[test]
        fn rotation_involution(phi in -4.0f64..4.0, xs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..50)) {
            let (a, b): (Vec<f64>, Vec<f64>) = xs.into_iter().unzip();
            let p = pair(a, b);
            let back = rotate_quadratures(&rotate_quadratures(&p, phi), -phi);
            for k in 0..p.len() {
                prop_assert!((back.x_a[k] - p.x_a[k]).abs() < 1e-12);
                prop_assert!((back.x_b[k] - p.x_b[k]).abs() < 1e-12);
            }
            prop_assert!((back.angle_a - p.angle_a).abs() < 1e-12);
        }
    }
}

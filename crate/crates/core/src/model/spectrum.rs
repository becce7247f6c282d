use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit system of a spectrum's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// Vacuum (shot) noise of any quadrature equals 1.
    ShotNoise,
    /// Effective displacement noise, m²/Hz.
    Displacement,
}

/// A complex spectrum on a strictly increasing angular-frequency grid.
///
/// Values are two-sided. `sigma`, when present, carries the standard error of
/// the real part in `re` and of the imaginary part in `im`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub norm: Norm,
    pub sigma: Option<Vec<Complex64>>,
    /// Variance inflation for parameters estimated from many neighbouring
    /// bins, caused by window-induced correlation between adjacent bins.
    /// 1 for analytic or uncorrelated spectra.
    pub bin_correlation: f64,
}

impl ComplexSpectrum {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>, norm: Norm) -> Result<Self> {
        let s = ComplexSpectrum {
            freqs,
            values,
            norm,
            sigma: None,
            bin_correlation: 1.0,
        };
        s.check()?;
        Ok(s)
    }

    pub fn with_sigma(mut self, sigma: Vec<Complex64>) -> Result<Self> {
        self.sigma = Some(sigma);
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if self.freqs.len() != self.values.len() {
            return Err(Error::validation("spectrum", "freqs and values lengths differ"));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.freqs.len() {
                return Err(Error::validation("spectrum", "sigma length differs from freqs"));
            }
        }
        if self.freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("spectrum", "freqs must be strictly increasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.norm != other.norm {
            return Err(Error::validation("spectrum", "normalization tags differ"));
        }
        if self.freqs.len() != other.freqs.len()
            || self
                .freqs
                .iter()
                .zip(&other.freqs)
                .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
        {
            return Err(Error::validation("spectrum", "frequency grids differ"));
        }
        Ok(())
    }

    /// `a·self + b·other`, with independent errors combined in quadrature.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * a + y * b)
            .collect();
        let sigma = match (&self.sigma, &other.sigma) {
            (Some(s1), Some(s2)) => Some(
                s1.iter()
                    .zip(s2)
                    .map(|(p, q)| {
                        Complex64::new(
                            ((a * p.re).powi(2) + (b * q.re).powi(2)).sqrt(),
                            ((a * p.im).powi(2) + (b * q.im).powi(2)).sqrt(),
                        )
                    })
                    .collect(),
            ),
            _ => None,
        };
        Ok(ComplexSpectrum {
            freqs: self.freqs.clone(),
            values,
            norm: self.norm,
            sigma,
            bin_correlation: self.bin_correlation.max(other.bin_correlation),
        })
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= k);
        if let Some(s) = out.sigma.as_mut() {
            s.iter_mut().for_each(|v| *v *= k.abs());
        }
        out
    }

    /// Keeps bins inside `[lo, hi]` that fall in none of the `exclude` ranges.
    pub fn select(&self, lo: f64, hi: f64, exclude: &[(f64, f64)]) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let w = self.freqs[i];
                w >= lo && w <= hi && !exclude.iter().any(|&(a, b)| w >= a && w <= b)
            })
            .collect();
        ComplexSpectrum {
            freqs: keep.iter().map(|&i| self.freqs[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            norm: self.norm,
            sigma: self.sigma.as_ref().map(|s| keep.iter().map(|&i| s[i]).collect()),
            bin_correlation: self.bin_correlation,
        }
    }
}

/// Uniform grid of `n` points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_grid() {
        let r = ComplexSpectrum::new(vec![1.0, 1.0], vec![Complex64::default(); 2], Norm::ShotNoise);
        assert!(r.is_err());
    }

    #[test]
    fn combination_keeps_norm_and_errors() {
        let s = ComplexSpectrum::new(vec![1.0, 2.0], vec![Complex64::new(1.0, 2.0); 2], Norm::ShotNoise)
            .unwrap()
            .with_sigma(vec![Complex64::new(3.0, 4.0); 2])
            .unwrap();
        let d = s.linear_combination(0.5, &s, -0.5).unwrap();
        assert_eq!(d.norm, Norm::ShotNoise);
        assert_eq!(d.values[0], Complex64::new(0.0, 0.0));
        let sig = d.sigma.unwrap()[0];
        assert!((sig.re - 3.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn norm_mismatch_rejected() {
        let a = ComplexSpectrum::new(vec![1.0], vec![Complex64::default()], Norm::ShotNoise).unwrap();
        let b = ComplexSpectrum::new(vec![1.0], vec![Complex64::default()], Norm::Displacement).unwrap();
        assert!(a.linear_combination(1.0, &b, 1.0).is_err());
    }
}

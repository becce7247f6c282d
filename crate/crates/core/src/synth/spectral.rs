//! Direct draws of averaged spectral matrices.
//!
//! The average of `K` non-overlapping rectangular-window periodograms of a
//! stationary Gaussian pair is, bin by bin, a complex Wishart matrix with `K`
//! degrees of freedom and scale equal to the true 2×2 spectral matrix; bins
//! are independent. Sampling that distribution directly gives the statistics
//! of very long records at the cost of a few random numbers per bin.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::stream::{stream, SPECTRAL};
use crate::dsp::SpectralMatrix;
use crate::error::{Error, Result};
use crate::model::{DeviceParams, ProbeParams};

fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// One draw of (W/K) for W ~ CW(K, M), M = [[s_aa, conj(s_ab)], [s_ab, s_bb]].
pub fn wishart_2x2<R: Rng>(rng: &mut R, k: usize, s_aa: f64, s_bb: f64, s_ab: Complex64) -> (f64, f64, Complex64) {
    let l11 = s_aa.sqrt();
    let l21 = s_ab / l11;
    let l22 = (s_bb - s_ab.norm_sqr() / s_aa).max(0.0).sqrt();
    let a11 = Gamma::new(k as f64, 1.0).unwrap().sample(rng).sqrt();
    let a22 = if k > 1 {
        Gamma::new((k - 1) as f64, 1.0).unwrap().sample(rng).sqrt()
    } else {
        0.0
    };
    let a21 = cn(rng);
    // rows of L·A
    let b11 = l11 * a11;
    let b21 = l21 * a11 + l22 * a21;
    let b22 = l22 * a22;
    let kf = k as f64;
    let w11 = b11 * b11;
    let w22 = b21.norm_sqr() + b22 * b22;
    let w21 = b21 * b11;
    (w11 / kf, w22 / kf, w21 / kf)
}

/// Averaged spectral matrix of a shot-noise-normalized quadrature pair with
/// `n_avg` independent averages, as seen with LO sign `lo_sign`.
pub fn sample_spectral_matrix(
    grid: &[f64],
    p: &DeviceParams,
    pr: &ProbeParams,
    lo_sign: i8,
    n_avg: usize,
    seed: u64,
) -> Result<SpectralMatrix> {
    if n_avg < 2 {
        return Err(Error::validation("n_avg", "need at least 2 averages"));
    }
    let mut m = SpectralMatrix::from_model(grid, p, pr, lo_sign, n_avg as f64)?;
    let mut rng = stream(seed, (lo_sign < 0) as u64, SPECTRAL);
    for i in 0..grid.len() {
        let (a, b, c) = wishart_2x2(&mut rng, n_avg, m.s_aa[i], m.s_bb[i], m.s_ab[i]);
        m.s_aa[i] = a;
        m.s_bb[i] = b;
        m.s_ab[i] = c;
    }
    if grid.len() > 1 {
        m.rbw = (grid[1] - grid[0]) / std::f64::consts::TAU;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wishart_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (saa, sbb, sab) = (1.0, 4.0, Complex64::new(0.5, -0.8));
        let k = 10;
        let n = 40_000;
        let mut acc = (0.0, 0.0, Complex64::default(), 0.0);
        for _ in 0..n {
            let (a, b, c) = wishart_2x2(&mut rng, k, saa, sbb, sab);
            acc.0 += a;
            acc.1 += b;
            acc.2 += c;
            acc.3 += (a - saa).powi(2);
        }
        let nf = n as f64;
        assert!((acc.0 / nf - saa).abs() < 0.01);
        assert!((acc.1 / nf - sbb).abs() < 0.04);
        assert!((acc.2 / nf - sab).norm() < 0.02);
        // var of a chi-square mean: s²/K
        assert!((acc.3 / nf - saa * saa / k as f64).abs() < 0.005);
    }

    #[test]
    fn deterministic_per_seed_and_sign() {
        let p = DeviceParams::default();
        let pr = ProbeParams::default();
        let g: Vec<f64> = (0..8).map(|i| p.omega_m + i as f64 * p.gamma_m).collect();
        let a = sample_spectral_matrix(&g, &p, &pr, 1, 100, 9).unwrap();
        let b = sample_spectral_matrix(&g, &p, &pr, 1, 100, 9).unwrap();
        let c = sample_spectral_matrix(&g, &p, &pr, -1, 100, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.s_aa, c.s_aa);
    }
}

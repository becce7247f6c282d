use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::quadrature::{if_bin_omega, QuadraturePair};
use super::window::{bin_correlation, overlap_correlation, Window};
use crate::error::{Error, Result};
use crate::model::{ComplexSpectrum, Norm};
use crate::synth::ElectronicResponse;

pub const MIN_SEGMENTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub window: Window,
    pub segment_len: usize,
    /// Fraction of a segment shared with the next one.
    pub overlap: f64,
    /// Keep only bins inside [lo, hi] (rad/s).
    pub band: Option<(f64, f64)>,
}

impl WelchConfig {
    /// Hann, 50 % overlap, bin spacing at most Γ_m/(2π·40).
    pub fn for_linewidth(sample_rate: f64, gamma_m: f64) -> Self {
        let want = (sample_rate * std::f64::consts::TAU * 40.0 / gamma_m).ceil() as usize;
        WelchConfig {
            window: Window::hann(),
            segment_len: want.max(16).next_power_of_two(),
            overlap: 0.5,
            band: None,
        }
    }

    /// Errors unless the bin spacing is at most Γ_m/(2π·fraction).
    pub fn check_resolution(&self, sample_rate: f64, gamma_m: f64, fraction: f64) -> Result<()> {
        let rbw = sample_rate / self.segment_len as f64;
        if rbw > gamma_m / (std::f64::consts::TAU * fraction) {
            return Err(Error::validation(
                "analysis.segment_len",
                format!("resolution {rbw:.4e} Hz is coarser than Γ_m/(2π·{fraction})"),
            ));
        }
        Ok(())
    }
}

/// Welch estimate of the 2×2 spectral matrix of a quadrature pair.
///
/// S_xy = ⟨X* Y⟩ / Σw², so a white sequence of unit variance has S = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMatrix {
    pub freqs: Vec<f64>,
    pub s_aa: Vec<f64>,
    pub s_bb: Vec<f64>,
    pub s_ab: Vec<Complex64>,
    pub n_avg: usize,
    /// Number of independent averages after accounting for segment overlap.
    pub n_eff: f64,
    /// Bin spacing, Hz.
    pub rbw: f64,
    pub bin_correlation: f64,
    pub lo_sign: i8,
    pub corrections: BTreeSet<String>,
}

pub fn estimate_spectral_matrix(pair: &QuadraturePair, cfg: &WelchConfig) -> Result<SpectralMatrix> {
    pair.check()?;
    let l = cfg.segment_len;
    if l < 16 || !l.is_multiple_of(2) {
        return Err(Error::validation("analysis.segment_len", "must be even and >= 16"));
    }
    if !(0.0..0.95).contains(&cfg.overlap) {
        return Err(Error::validation("analysis.overlap", "must lie in [0, 0.95)"));
    }
    let hop = ((l as f64) * (1.0 - cfg.overlap)).round().max(1.0) as usize;
    let n = pair.len();
    let k = if n >= l { (n - l) / hop + 1 } else { 0 };
    if k < MIN_SEGMENTS {
        return Err(Error::validation(
            "analysis.segment_len",
            format!("only {k} segments fit in the record, need at least {MIN_SEGMENTS}"),
        ));
    }
    let w = cfg.window.samples(l);
    let w2: f64 = w.iter().map(|x| x * x).sum();

    let bins: Vec<usize> = (1..l / 2)
        .filter(|&j| match cfg.band {
            Some((lo, hi)) => {
                let om = if_bin_omega(pair.omega_center, pair.sample_rate, j, l);
                om >= lo && om <= hi
            }
            None => true,
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::validation("analysis.band", "no bins inside the band"));
    }
    let fft = FftPlanner::new().plan_fft_forward(l);

    // Fixed-size chunks summed in order keep the result independent of the
    // number of threads.
    const CHUNK: usize = 32;
    let partial: Vec<(Vec<f64>, Vec<f64>, Vec<Complex64>)> = (0..k.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut aa = vec![0.0; bins.len()];
            let mut bb = vec![0.0; bins.len()];
            let mut ab = vec![Complex64::default(); bins.len()];
            let mut y = vec![Complex64::default(); l];
            for s in c * CHUNK..((c + 1) * CHUNK).min(k) {
                let off = s * hop;
                for t in 0..l {
                    y[t] = Complex64::new(pair.x_a[off + t] * w[t], pair.x_b[off + t] * w[t]);
                }
                fft.process(&mut y);
                for (q, &j) in bins.iter().enumerate() {
                    let (p, m) = (y[j], y[l - j].conj());
                    let u = (p + m) * 0.5;
                    let v = (p - m) * Complex64::new(0.0, -0.5);
                    aa[q] += u.norm_sqr();
                    bb[q] += v.norm_sqr();
                    ab[q] += u.conj() * v;
                }
            }
            (aa, bb, ab)
        })
        .collect();
    let mut aa = vec![0.0; bins.len()];
    let mut bb = vec![0.0; bins.len()];
    let mut ab = vec![Complex64::default(); bins.len()];
    for (pa, pb, pc) in partial {
        for q in 0..bins.len() {
            aa[q] += pa[q];
            bb[q] += pb[q];
            ab[q] += pc[q];
        }
    }
    let norm = 1.0 / (k as f64 * w2);
    let mut inflation = 1.0;
    let mut lag = 1;
    while lag * hop < l {
        inflation += 2.0 * overlap_correlation(&w, lag * hop) * (k.saturating_sub(lag)) as f64 / k as f64;
        lag += 1;
    }
    Ok(SpectralMatrix {
        freqs: bins.iter().map(|&j| if_bin_omega(pair.omega_center, pair.sample_rate, j, l)).collect(),
        s_aa: aa.iter().map(|x| x * norm).collect(),
        s_bb: bb.iter().map(|x| x * norm).collect(),
        s_ab: ab.iter().map(|x| x * norm).collect(),
        n_avg: k,
        n_eff: k as f64 / inflation,
        rbw: pair.sample_rate / l as f64,
        bin_correlation: bin_correlation(&w),
        lo_sign: pair.lo_sign,
        corrections: pair.corrections.clone(),
    })
}

impl SpectralMatrix {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Cross-spectrum S_{φ,φ+π/2} of the pair rotated by φ, with per-bin
    /// standard errors of its real and imaginary parts.
    pub fn rotated(&self, phi: f64) -> ComplexSpectrum {
        let (s, c) = phi.sin_cos();
        let mut values = Vec::with_capacity(self.len());
        let mut sigma = Vec::with_capacity(self.len());
        for q in 0..self.len() {
            let (aa, bb, ab) = (self.s_aa[q], self.s_bb[q], self.s_ab[q]);
            let x = Complex64::new(c * s * (bb - aa), 0.0) + ab * (c * c) - ab.conj() * (s * s);
            let pa = c * c * aa + s * s * bb + 2.0 * c * s * ab.re;
            let pb = s * s * aa + c * c * bb - 2.0 * c * s * ab.re;
            let x2 = (x * x).re;
            let vr = ((pa * pb + x2) / (2.0 * self.n_eff)).max(0.0);
            let vi = ((pa * pb - x2) / (2.0 * self.n_eff)).max(0.0);
            values.push(x);
            sigma.push(Complex64::new(vr.sqrt(), vi.sqrt()));
        }
        ComplexSpectrum {
            freqs: self.freqs.clone(),
            values,
            norm: Norm::ShotNoise,
            sigma: Some(sigma),
            bin_correlation: self.bin_correlation,
        }
    }

    /// Power spectrum of x_a cos φ + x_b sin φ (real values).
    pub fn auto(&self, phi: f64) -> ComplexSpectrum {
        let (s, c) = phi.sin_cos();
        let values: Vec<Complex64> = (0..self.len())
            .map(|q| Complex64::new(c * c * self.s_aa[q] + s * s * self.s_bb[q] + 2.0 * c * s * self.s_ab[q].re, 0.0))
            .collect();
        let sigma = values.iter().map(|v| Complex64::new(v.re / self.n_eff.sqrt(), 0.0)).collect();
        ComplexSpectrum {
            freqs: self.freqs.clone(),
            values,
            norm: Norm::ShotNoise,
            sigma: Some(sigma),
            bin_correlation: self.bin_correlation,
        }
    }

    /// Divides by the mean amplitude-quadrature level in bins farther than
    /// `5·gamma_m` from `omega_m`.
    pub fn normalize_to_shot_noise(&mut self, omega_m: f64, gamma_m: f64) -> Result<f64> {
        let (sum, count) = self
            .freqs
            .iter()
            .zip(&self.s_aa)
            .filter(|(w, _)| (*w - omega_m).abs() > 5.0 * gamma_m)
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        if count < 8 {
            return Err(Error::validation(
                "analysis.band",
                "fewer than 8 bins outside ±5Γ_m for the shot-noise baseline",
            ));
        }
        let level = sum / count as f64;
        if !(level > 0.0) {
            return Err(Error::Numeric("shot-noise baseline is not positive".into()));
        }
        for q in 0..self.len() {
            self.s_aa[q] /= level;
            self.s_bb[q] /= level;
            self.s_ab[q] /= level;
        }
        self.corrections.insert("shot-noise-normalized".into());
        Ok(level)
    }

    /// Undoes a known electronic response: S = Rᵀ S' R / |H|² per bin.
    pub fn correct_electronics(&mut self, resp: &ElectronicResponse) -> Result<()> {
        if self.corrections.contains("electronics") {
            return Err(Error::validation("corrections", "electronics correction already applied"));
        }
        for q in 0..self.len() {
            let w = self.freqs[q];
            let g = resp.gain(w);
            if !(g > 0.0) {
                return Err(Error::Numeric(format!("gain not positive at {w:.6e} rad/s")));
            }
            let (s, c) = resp.phase(w).sin_cos();
            let (aa, bb, ab) = (self.s_aa[q], self.s_bb[q], self.s_ab[q]);
            let ba = ab.conj();
            // Rᵀ M R with R = [[c, −s], [s, c]]
            let m00 = c * c * aa + s * c * (ab.re + ba.re) + s * s * bb;
            let m11 = s * s * aa - s * c * (ab.re + ba.re) + c * c * bb;
            let m01 = -c * s * aa + ab * (c * c) - ba * (s * s) + c * s * bb;
            let k = 1.0 / (g * g);
            self.s_aa[q] = m00 * k;
            self.s_bb[q] = m11 * k;
            self.s_ab[q] = m01 * k;
        }
        self.corrections.insert("electronics".into());
        Ok(())
    }
}

/// Cross-spectrum of the pair as given, normalized to shot noise via the
/// off-resonant amplitude-quadrature baseline.
pub fn estimate_cross_spectrum(pair: &QuadraturePair, cfg: &WelchConfig, omega_m: f64, gamma_m: f64) -> Result<ComplexSpectrum> {
    let mut m = estimate_spectral_matrix(pair, cfg)?;
    m.normalize_to_shot_noise(omega_m, gamma_m)?;
    Ok(m.rotated(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::stream::stream;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, 0, 0);
        (0..n).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); sigma * z }).collect()
    }

    fn cfg(l: usize) -> WelchConfig {
        WelchConfig {
            window: Window::hann(),
            segment_len: l,
            overlap: 0.5,
            band: None,
        }
    }

    #[test]
    fn white_noise_level_is_the_variance() {
        let x = white(1 << 18, 0.7, 1);
        let y = white(1 << 18, 0.7, 2);
        let pair = QuadraturePair::new(1e6, 0.0, x, y, 1).unwrap();
        let m = estimate_spectral_matrix(&pair, &cfg(256)).unwrap();
        let mean = m.s_aa.iter().sum::<f64>() / m.len() as f64;
        assert!((mean / 0.49 - 1.0).abs() < 0.01, "{mean}");
        let cross = m.s_ab.iter().sum::<Complex64>() / m.len() as f64;
        assert!(cross.norm() < 0.01 * 0.49);
        assert_eq!(m.n_avg, 2047);
        assert!(m.n_eff < m.n_avg as f64 && m.n_eff > 0.9 * m.n_avg as f64);
    }

    #[test]
    fn identical_channels_are_fully_correlated() {
        let x = white(1 << 14, 1.0, 3);
        let pair = QuadraturePair::new(1e6, 0.0, x.clone(), x.iter().map(|v| -v).collect(), 1).unwrap();
        let m = estimate_spectral_matrix(&pair, &cfg(128)).unwrap();
        for q in 0..m.len() {
            assert!((m.s_ab[q].re + m.s_aa[q]).abs() < 1e-12 * m.s_aa[q]);
            assert!(m.s_ab[q].im.abs() < 1e-12 * m.s_aa[q]);
            assert!((m.s_bb[q] - m.s_aa[q]).abs() < 1e-12 * m.s_aa[q]);
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let pair = QuadraturePair::new(1e6, 0.0, white(1 << 16, 1.0, 4), white(1 << 16, 1.0, 5), 1).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| estimate_spectral_matrix(&pair, &cfg(256)).unwrap());
        let b = three.install(|| estimate_spectral_matrix(&pair, &cfg(256)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_short_records() {
        let pair = QuadraturePair::new(1e6, 0.0, white(512, 1.0, 6), white(512, 1.0, 7), 1).unwrap();
        assert!(matches!(estimate_spectral_matrix(&pair, &cfg(256)), Err(Error::Validation { .. })));
        assert!(estimate_spectral_matrix(&pair, &cfg(15)).is_err());
    }

    #[test]
    fn rotation_preserves_total_power() {
        let pair = QuadraturePair::new(1e6, 0.0, white(1 << 14, 1.0, 8), white(1 << 14, 2.0, 9), 1).unwrap();
        let m = estimate_spectral_matrix(&pair, &cfg(128)).unwrap();
        let a = m.auto(0.3);
        let b = m.auto(0.3 + std::f64::consts::FRAC_PI_2);
        for q in 0..m.len() {
            let tot = m.s_aa[q] + m.s_bb[q];
            assert!((a.values[q].re + b.values[q].re - tot).abs() < 1e-12 * tot);
        }
    }
}

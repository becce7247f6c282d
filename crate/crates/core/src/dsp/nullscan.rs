//! Quadrature-rotation null search and LO-sign separation.

use serde::{Deserialize, Serialize};

use super::welch::SpectralMatrix;
use crate::error::{Error, Result};
use crate::fit::{fit_fixed_line, fit_lorentzian, FitBand};
use crate::model::{spectral_matrix, ComplexSpectrum, DeviceParams, ProbeParams};

/// Cross-spectra S_{φ,φ+π/2} over a grid of rotation angles, with the
/// per-angle Lorentzian (A_φ) and dispersive (B_φ) amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSpectraSet {
    pub phi_grid: Vec<f64>,
    pub spectra: Vec<ComplexSpectrum>,
    pub lorentzian: Vec<(f64, f64)>,
    pub dispersive: Vec<(f64, f64)>,
    pub lo_sign: i8,
    /// Bin spacing, Hz.
    pub resolution_bandwidth: f64,
    pub n_averages: usize,
    /// Line centre and width used for the amplitude fits.
    pub line: (f64, f64),
    pub phi_star: f64,
    pub sigma_phi_star: f64,
    pub matrix: SpectralMatrix,
}

/// Finds the rotation at which the thermal Lorentzian vanishes from
/// Re S_{φ,φ+π/2}. Centre and width come from a Lorentzian fit to the
/// phase-quadrature power spectrum; A_φ is then regressed linearly on φ.
pub fn scan_rotation_null(m: &SpectralMatrix, phi_grid: &[f64], band: &FitBand) -> Result<CrossSpectraSet> {
    if phi_grid.len() < 5 {
        return Err(Error::validation("analysis.phi_grid", "need at least 5 angles"));
    }
    if phi_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation("analysis.phi_grid", "angles must increase"));
    }
    let line_fit = fit_lorentzian(&m.auto(std::f64::consts::FRAC_PI_2), band)?;
    let (w0, g) = (line_fit.center(), line_fit.width());

    let mut spectra = Vec::with_capacity(phi_grid.len());
    let mut lorentzian = Vec::with_capacity(phi_grid.len());
    let mut dispersive = Vec::with_capacity(phi_grid.len());
    for &phi in phi_grid {
        let s = m.rotated(phi);
        let (a, b) = fit_fixed_line(&s, band, w0, g)?;
        spectra.push(s);
        lorentzian.push(a);
        dispersive.push(b);
    }
    let (lo, hi) = (phi_grid[0], phi_grid[phi_grid.len() - 1]);
    let first = lorentzian[0].0;
    if lorentzian.iter().all(|(a, _)| a.signum() == first.signum()) {
        return Err(Error::NullOutsideGrid { lo, hi });
    }

    // Unweighted regression: all A_φ share one noise realization, so the
    // scatter about the line says nothing about the error.
    let n = phi_grid.len() as f64;
    let mx = phi_grid.iter().sum::<f64>() / n;
    let my = lorentzian.iter().map(|a| a.0).sum::<f64>() / n;
    let sxx: f64 = phi_grid.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = phi_grid.iter().zip(&lorentzian).map(|(x, a)| (x - mx) * (a.0 - my)).sum();
    let slope = sxy / sxx;
    let phi_star = mx - my / slope;
    if !(phi_star >= lo && phi_star <= hi) {
        return Err(Error::NullOutsideGrid { lo, hi });
    }
    let ((_, sa), _) = fit_fixed_line(&m.rotated(phi_star), band, w0, g)?;
    Ok(CrossSpectraSet {
        phi_grid: phi_grid.to_vec(),
        spectra,
        lorentzian,
        dispersive,
        lo_sign: m.lo_sign,
        resolution_bandwidth: m.rbw,
        n_averages: m.n_avg,
        line: (w0, g),
        phi_star,
        sigma_phi_star: sa / slope.abs(),
        matrix: m.clone(),
    })
}

impl CrossSpectraSet {
    /// S_{φ*+θ, φ*+θ+π/2}.
    pub fn at_null(&self, theta: f64) -> ComplexSpectrum {
        self.matrix.rotated(self.phi_star + theta)
    }
}

/// Half-difference and half-sum of the two LO signs after each is rotated
/// to its own null: the quantum correlation is odd in the LO sign, thermal
/// motion and electronic artifacts are even. Returns (quantum at the null,
/// thermal at the null + π/4).
pub fn combine_lo_signs(plus: &CrossSpectraSet, minus: &CrossSpectraSet) -> Result<(ComplexSpectrum, ComplexSpectrum)> {
    if plus.lo_sign != 1 || minus.lo_sign != -1 {
        return Err(Error::validation("combine", "expected one +LO and one −LO set"));
    }
    if plus.matrix.freqs != minus.matrix.freqs {
        return Err(Error::validation("combine", "frequency grids differ"));
    }
    let q = plus.at_null(0.0).linear_combination(0.5, &minus.at_null(0.0), -0.5)?;
    let f4 = std::f64::consts::FRAC_PI_4;
    let t = plus.at_null(f4).linear_combination(0.5, &minus.at_null(f4), 0.5)?;
    Ok((q, t))
}

/// Spectrum for coth thermometry: Re from the thermal channel, Im (the
/// absorptive quantum line) from the quantum channel.
pub fn coth_input(quantum: &ComplexSpectrum, thermal: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    if quantum.freqs != thermal.freqs {
        return Err(Error::validation("combine", "frequency grids differ"));
    }
    let values = thermal
        .values
        .iter()
        .zip(&quantum.values)
        .map(|(t, q)| num_complex::Complex64::new(t.re, q.im))
        .collect();
    let sigma = match (&thermal.sigma, &quantum.sigma) {
        (Some(a), Some(b)) => Some(
            a.iter()
                .zip(b)
                .map(|(t, q)| num_complex::Complex64::new(t.re, q.im))
                .collect(),
        ),
        _ => None,
    };
    Ok(ComplexSpectrum {
        freqs: thermal.freqs.clone(),
        values,
        norm: thermal.norm,
        sigma,
        bin_correlation: thermal.bin_correlation.max(quantum.bin_correlation),
    })
}

impl SpectralMatrix {
    /// Exact spectral matrix of the model on `grid`, as seen with LO sign
    /// `lo_sign`, labelled with `n_eff` averages for the error model.
    pub fn from_model(grid: &[f64], p: &DeviceParams, pr: &ProbeParams, lo_sign: i8, n_eff: f64) -> Result<Self> {
        let mut s = SpectralMatrix {
            freqs: grid.to_vec(),
            s_aa: Vec::with_capacity(grid.len()),
            s_bb: Vec::with_capacity(grid.len()),
            s_ab: Vec::with_capacity(grid.len()),
            n_avg: n_eff.round() as usize,
            n_eff,
            rbw: 0.0,
            bin_correlation: 1.0,
            lo_sign,
            corrections: Default::default(),
        };
        let sign = lo_sign as f64;
        for &w in grid {
            let (ii, qq, iq) = spectral_matrix(w, p, pr)?;
            s.s_aa.push(ii);
            s.s_bb.push(qq);
            s.s_ab.push(iq * sign);
        }
        s.corrections.insert("shot-noise-normalized".into());
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linear_grid, quantum_correlation_spectrum, thermal_correlation_spectrum};
    use proptest::prelude::*;

    fn setup() -> (DeviceParams, ProbeParams, Vec<f64>, FitBand) {
        let p = DeviceParams::default();
        let pr = ProbeParams {
            nbar: p.nbar_for_cooperativity(0.1),
            t_bath: 22.0,
            ..Default::default()
        };
        let grid = linear_grid(p.omega_m - 8.0 * p.gamma_m, p.omega_m + 8.0 * p.gamma_m, 321);
        let band = FitBand::around(p.omega_m, p.gamma_m, 5.0);
        (p, pr, grid, band)
    }

    fn phis() -> Vec<f64> {
        (-4..=4).map(|k| k as f64 * 0.002).collect()
    }

    #[test]
    fn combination_of_exact_matrices_gives_closed_forms() {
        let (p, pr, grid, band) = setup();
        let plus = SpectralMatrix::from_model(&grid, &p, &pr.with_lo_sign(1), 1, 1e6).unwrap();
        let minus = SpectralMatrix::from_model(&grid, &p, &pr.with_lo_sign(-1), -1, 1e6).unwrap();
        let mut sp = scan_rotation_null(&plus, &phis(), &band).unwrap();
        let mut sm = scan_rotation_null(&minus, &phis(), &band).unwrap();
        // the linear regression over φ leaves a few 1e-7 rad
        assert!(sp.phi_star.abs() < 1e-6 && sm.phi_star.abs() < 1e-6);
        sp.phi_star = 0.0;
        sm.phi_star = 0.0;
        let (q, t) = combine_lo_signs(&sp, &sm).unwrap();
        let q0 = quantum_correlation_spectrum(&grid, &p, &pr).unwrap();
        let t0 = thermal_correlation_spectrum(&grid, &p, &pr, true).unwrap();
        let peak = |s: &ComplexSpectrum| s.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = peak(&q0);
        for (a, b) in q.values.iter().zip(&q0.values) {
            assert!((a - b).norm() < 1e-9 * scale, "{a} vs {b}");
        }
        // the half-sum keeps only the LO-even real part
        let scale = peak(&t0);
        for (a, b) in t.values.iter().zip(&t0.values) {
            assert!((a.re - b.re).abs() < 1e-9 * scale && a.im.abs() < 1e-9 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn lo_signs_must_pair() {
        let (p, pr, grid, band) = setup();
        let plus = SpectralMatrix::from_model(&grid, &p, &pr, 1, 1e6).unwrap();
        let s = scan_rotation_null(&plus, &phis(), &band).unwrap();
        assert!(combine_lo_signs(&s, &s).is_err());
    }

    #[test]
    fn null_outside_grid_is_reported() {
        let (p, pr, grid, band) = setup();
        let m = SpectralMatrix::from_model(&grid, &p, &pr, 1, 1e6).unwrap();
        let far: Vec<f64> = (0..5).map(|k| 0.05 + 0.01 * k as f64).collect();
        assert!(matches!(scan_rotation_null(&m, &far, &band), Err(Error::NullOutsideGrid { .. })));
        assert!(scan_rotation_null(&m, &phis()[..4], &band).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rotation_has_period_pi(phi in -3.0f64..3.0) {
            let (p, pr, grid, _) = setup();
            let m = SpectralMatrix::from_model(&grid[..40], &p, &pr, 1, 1e4).unwrap();
            let a = m.rotated(phi);
            let b = m.rotated(phi + std::f64::consts::PI);
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).norm() <= 1e-9 * x.norm().max(1.0));
            }
        }
    }
}

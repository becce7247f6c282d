//! Mechanical displacement alone, in the laboratory frame: spectral synthesis
//! and an independent time-stepping integrator used to cross-check it.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::stream::stream;
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::model::{fdt_force_psd, mech_susceptibility, DeviceParams};

/// Thermal displacement x(t) sampled at `sample_rate`, built from
/// |χ_m|² S_F in independent circular blocks of `block` samples.
pub fn synth_displacement(p: &DeviceParams, t_bath: f64, sample_rate: f64, n: usize, block: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    if block < 16 || !block.is_power_of_two() {
        return Err(Error::validation("block", "must be a power of two >= 16"));
    }
    let fft = FftPlanner::new().plan_fft_inverse(block);
    let h: Vec<Complex64> = (0..block / 2)
        .map(|k| {
            if k == 0 {
                return Ok(Complex64::default());
            }
            let w = TWO_PI * k as f64 * sample_rate / block as f64;
            Ok(mech_susceptibility(w, p) * fdt_force_psd(w, p, t_bath)?.sqrt())
        })
        .collect::<Result<_>>()?;
    // ⟨x²⟩ = 2 Σ_k |h_k|² fs/N for a two-sided S_F.
    let scale = (block as f64 * sample_rate / 2.0).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0u64;
    let mut y = vec![Complex64::default(); block];
    while out.len() < n {
        let mut rng = stream(seed, seg, 0);
        y.fill(Complex64::default());
        for k in 1..block / 2 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let x = h[k] * Complex64::new(re, im) * scale;
            y[k] = x;
            y[block - k] = x.conj();
        }
        fft.process(&mut y);
        let take = (n - out.len()).min(block);
        out.extend(y[..take].iter().map(|c| c.re / block as f64));
        seg += 1;
    }
    Ok(out)
}

/// Mean square displacement from a semi-implicit Euler–Maruyama integration
/// of m ẍ = −m ω_m² x − m Γ_m ẋ + F, with F white at the force spectral
/// density evaluated on resonance. Samples during the first 20/Γ_m are
/// discarded.
pub fn langevin_mean_square(p: &DeviceParams, t_bath: f64, dt: f64, n_steps: usize, seed: u64) -> Result<f64> {
    p.validate()?;
    if !(dt > 0.0) || p.omega_m * dt > 0.1 {
        return Err(Error::validation("dt", "must satisfy 0 < ω_m·dt <= 0.1"));
    }
    let sf = fdt_force_psd(p.omega_m, p, t_bath)?;
    let kick = (sf * dt).sqrt() / p.m;
    let burn = (20.0 / (p.gamma_m * dt)).ceil() as usize;
    if n_steps <= burn {
        return Err(Error::validation("n_steps", format!("must exceed the burn-in of {burn} steps")));
    }
    let mut rng = stream(seed, 0, 0);
    let (w2, g) = (p.omega_m * p.omega_m, p.gamma_m);
    let (mut x, mut v) = (0.0f64, 0.0f64);
    let mut acc = 0.0;
    for k in 0..n_steps {
        let e: f64 = StandardNormal.sample(&mut rng);
        v += (-w2 * x - g * v) * dt + kick * e;
        x += v * dt;
        if k >= burn {
            acc += x * x;
        }
    }
    Ok(acc / (n_steps - burn) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::K_B;

    fn q10() -> DeviceParams {
        let w = TWO_PI * 1e6;
        DeviceParams {
            omega_m: w,
            gamma_m: w / 10.0,
            ..Default::default()
        }
    }

    #[test]
    fn spectral_synthesis_reaches_equipartition() {
        let p = q10();
        let x = synth_displacement(&p, 300.0, 20e6, 1 << 22, 1 << 16, 3).unwrap();
        let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let kt = K_B * 300.0 / (p.m * p.omega_m * p.omega_m);
        assert!((ms / kt - 1.0).abs() < 0.05, "{}", ms / kt);
    }

    #[test]
    fn integrator_reaches_equipartition() {
        let p = q10();
        let ms = langevin_mean_square(&p, 300.0, 0.01 / p.omega_m, 4_000_000, 5).unwrap();
        let kt = K_B * 300.0 / (p.m * p.omega_m * p.omega_m);
        assert!((ms / kt - 1.0).abs() < 0.1, "{}", ms / kt);
    }

    #[test]
    fn rejects_coarse_steps() {
        let p = q10();
        assert!(langevin_mean_square(&p, 300.0, 1.0 / p.omega_m, 1000, 1).is_err());
        assert!(synth_displacement(&p, 300.0, 1e7, 100, 100, 1).is_err());
    }
}

use super::{run, Scale, Verdict};
use crate::constants::{HBAR, TWO_PI};
use crate::dsp::{demodulate, estimate_spectral_matrix, track_carrier_phase, TrackConfig, WelchConfig};
use crate::model::{thermal_occupation, DeviceParams, ProbeParams};
use crate::synth::{langevin_mean_square, shot_noise_record, synth_displacement, RecordOptions, SynthConfig};
use crate::Result;

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// 1 MHz, Q = 10 resonator for the time-domain comparison; g0 is unused.
fn slow_device() -> DeviceParams {
    let w = TWO_PI * 1e6;
    DeviceParams {
        omega_m: w,
        gamma_m: w / 10.0,
        ..Default::default()
    }
}

fn welch_rel_sd(p: &DeviceParams, duration: f64, seed: u64) -> Result<(f64, f64)> {
    let cfg = SynthConfig::new(p, duration, seed);
    let rec = shot_noise_record(p, &ProbeParams::default(), &RecordOptions::new(cfg))?;
    let track = track_carrier_phase(&rec, &TrackConfig::default())?;
    let pair = demodulate(&rec, &track)?;
    let m = estimate_spectral_matrix(&pair, &WelchConfig::for_linewidth(rec.sample_rate(), p.gamma_m))?;
    let (lo, hi) = (p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m);
    let s: Vec<f64> = m
        .freqs
        .iter()
        .zip(&m.s_aa)
        .filter(|(w, _)| (lo..=hi).contains(*w))
        .map(|(_, v)| *v)
        .collect();
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok((m.n_avg as f64, sd / mean))
}

pub fn check_physics_oracles(scale: Scale) -> Verdict {
    run("7", "physics oracles", |v| {
        let p = DeviceParams::default();
        let t = 294.0;
        let seeds = scale.pick(16u64, 4);
        let fs = 4.0 * p.omega_m / TWO_PI;
        let n = 1usize << 24;
        let mut ms = 0.0;
        for s in 0..seeds {
            ms += mean_square(&synth_displacement(&p, t, fs, n, 1 << 20, 700 + s)?);
        }
        ms /= seeds as f64;
        let nth = thermal_occupation(p.omega_m, t)?;
        let expect = HBAR / (p.m * p.omega_m) * (nth + 0.5);
        let rel = ms / expect - 1.0;
        v.check(
            rel.abs() < 0.02,
            format!(
                "equipartition at Q = {:.0}: ⟨x²⟩ = {ms:.4e} m² vs (n_th + ½)·ħ/mω_m = {expect:.4e} m², {:+.2}% (< 2%)",
                p.quality_factor(),
                100.0 * rel
            ),
        );

        let q = slow_device();
        let steps = scale.pick(20_000_000usize, 5_000_000);
        let lseeds = scale.pick(3u64, 1);
        let mut lv = 0.0;
        for s in 0..lseeds {
            lv += langevin_mean_square(&q, t, 0.01 / q.omega_m, steps, 710 + s)?;
        }
        lv /= lseeds as f64;
        let mut fv = 0.0;
        for s in 0..lseeds {
            fv += mean_square(&synth_displacement(&q, t, 20.0 * q.omega_m / TWO_PI, 1 << 24, 1 << 20, 720 + s)?);
        }
        fv /= lseeds as f64;
        let rel = lv / fv - 1.0;
        v.check(
            rel.abs() < 0.03,
            format!("Q = 10: Euler–Maruyama ⟨x²⟩ = {lv:.6e} vs spectral synthesis {fv:.6e} m², {:+.2}% (< 3%)", 100.0 * rel),
        );

        let (n1, r1) = welch_rel_sd(&p, scale.pick(0.004, 0.002), 730)?;
        let (n2, r2) = welch_rel_sd(&p, scale.pick(0.04, 0.02), 731)?;
        let slope = (r2 / r1).ln() / (n2 / n1).ln();
        v.check(
            (slope + 0.5).abs() <= 0.1,
            format!(
                "Welch relative error {r1:.4} at {n1} averages, {r2:.4} at {n2}: slope {slope:+.3} (−1/2 within 20%)"
            ),
        );
        Ok(())
    })
}

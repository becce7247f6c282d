use std::f64::consts::FRAC_PI_2;

use super::{run, Scale, Verdict};
use crate::dsp::{demodulate, estimate_spectral_matrix, scan_rotation_null, track_carrier_phase, TrackConfig, WelchConfig};
use crate::fit::{fit_fixed_line, FitBand};
use crate::model::{general_cross_spectrum, linear_grid, DeviceParams, ProbeParams};
use crate::synth::{sample_spectral_matrix, synth_heterodyne_record, RecordOptions, SynthConfig};
use crate::Result;

/// Rotation that removes the thermal peak from Re S_{φ,φ+π/2} at ω_m:
/// tan 2φ = −2 Re S_IQ / (S_QQ − S_II), from the closed-form spectra.
pub fn model_null(p: &DeviceParams, pr: &ProbeParams) -> Result<f64> {
    let w = [p.omega_m];
    let ii = general_cross_spectrum(0.0, 0.0, &w, p, pr)?.values[0].re;
    let qq = general_cross_spectrum(FRAC_PI_2, FRAC_PI_2, &w, p, pr)?.values[0].re;
    let iq = general_cross_spectrum(0.0, FRAC_PI_2, &w, p, pr)?.values[0].re;
    Ok(0.5 * (-2.0 * iq).atan2(qq - ii))
}

pub fn phi_grid() -> Vec<f64> {
    (-4..=4).map(|k| k as f64 * 0.002).collect()
}

/// Probe of the S4-style scan: C = 0.1, 22 K, given 2Δp/κ.
pub fn scan_probe(p: &DeviceParams, x: f64) -> ProbeParams {
    ProbeParams {
        nbar: p.nbar_for_cooperativity(0.1),
        t_bath: 22.0,
        delta_p: 0.5 * x * p.kappa,
        ..Default::default()
    }
}

pub fn check_null_scan(scale: Scale) -> Verdict {
    run("3", "rotation null under probe detuning", |v| {
        let p = DeviceParams::default();
        let band = FitBand::around(p.omega_m, p.gamma_m, 5.0);
        let grid = linear_grid(p.omega_m - 8.0 * p.gamma_m, p.omega_m + 8.0 * p.gamma_m, 321);
        let seeds = scale.pick(200u64, 40);
        let duration = scale.pick(0.2, 0.05);
        for (i, x) in [-0.002, 0.0, 0.002].into_iter().enumerate() {
            let pr = scan_probe(&p, x);
            let phi0 = model_null(&p, &pr)?;
            let factor = if x != 0.0 { format!(", {:.3}·(2Δp/κ)", phi0 / x) } else { String::new() };
            v.note(format!("2Δp/κ = {x:+.3}: model null φ0 = {phi0:+.3e}{factor}"));

            let cfg = SynthConfig::new(&p, duration, 300 + i as u64);
            let rec = synth_heterodyne_record(&p, &pr, None, &RecordOptions::new(cfg.clone()))?;
            let track = track_carrier_phase(&rec, &TrackConfig::default())?;
            let pair = demodulate(&rec, &track)?;
            let mut m = estimate_spectral_matrix(&pair, &WelchConfig::for_linewidth(cfg.sample_rate, p.gamma_m))?;
            m.normalize_to_shot_noise(p.omega_m, p.gamma_m)?;
            let set = scan_rotation_null(&m, &phi_grid(), &band)?;
            let (w0, g) = set.line;
            let ((a, sa), _) = fit_fixed_line(&m.rotated(phi0), &band, w0, g)?;
            v.check(
                a.abs() < 2.0 * sa,
                format!("  record: Lorentzian part at φ0 = {a:+.2e} ± {sa:.1e} ({:+.2}σ, need < 2σ)", a / sa),
            );
            if x != 0.0 {
                let ((al, sl), _) = fit_fixed_line(&m.rotated(x), &band, w0, g)?;
                v.note(format!("  record: Lorentzian part at φ = 2Δp/κ itself = {al:+.2e} ± {sl:.1e} ({:+.1}σ)", al / sl));
            }
            v.note(format!(
                "  record: φ* = {:+.3e} ± {:.1e}, φ* − φ0 = {:+.1}σ",
                set.phi_star,
                set.sigma_phi_star,
                (set.phi_star - phi0) / set.sigma_phi_star
            ));

            let n_avg = 200_000;
            let mut est = Vec::with_capacity(seeds as usize);
            for s in 0..seeds {
                let mm = sample_spectral_matrix(&grid, &p, &pr, 1, n_avg, 10_000 + 1000 * i as u64 + s)?;
                est.push(scan_rotation_null(&mm, &phi_grid(), &band)?.phi_star);
            }
            let n = est.len() as f64;
            let mean = est.iter().sum::<f64>() / n;
            let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let bias = mean - phi0;
            v.check(
                bias.abs() < 2e-4,
                format!(
                    "  {seeds} spectral draws at {n_avg} averages: bias {bias:+.2e} ± {:.1e} (|bias| < 2e-4), per-run sd {sd:.1e}",
                    sd / n.sqrt()
                ),
            );
        }
        Ok(())
    })
}

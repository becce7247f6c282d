use super::nulls::phi_grid;
use super::{run, Scale, Verdict};
use crate::dsp::{
    combine_lo_signs, SpectralMatrix, demodulate, estimate_spectral_matrix, scan_rotation_null, track_carrier_phase, CrossSpectraSet,
    TrackConfig, WelchConfig,
};
use crate::fit::{fit_fixed_line, FitBand};
use crate::model::{linear_grid, quantum_peak, thermal_peak, DeviceParams, ProbeParams};
use crate::synth::{inject_electronic_dispersion, sample_spectral_matrix, synth_heterodyne_record, ElectronicResponse, RecordOptions, SynthConfig};
use crate::{ComplexSpectrum, Result};

/// Spurious-to-quantum amplitude the injected phase slope is sized for.
const ARTIFACT_FACTOR: f64 = 7.0;

fn scan(p: &DeviceParams, rec: &crate::synth::PhotocurrentRecord, band: &FitBand) -> Result<CrossSpectraSet> {
    let track = track_carrier_phase(rec, &TrackConfig::default())?;
    let pair = demodulate(rec, &track)?;
    let mut m = estimate_spectral_matrix(&pair, &WelchConfig::for_linewidth(rec.sample_rate(), p.gamma_m))?;
    m.normalize_to_shot_noise(p.omega_m, p.gamma_m)?;
    scan_rotation_null(&m, &phi_grid(), band)
}

fn dispersive(s: &ComplexSpectrum, band: &FitBand, line: (f64, f64)) -> Result<(f64, f64)> {
    Ok(fit_fixed_line(s, band, line.0, line.1)?.1)
}

pub fn check_artifact_rejection(scale: Scale) -> Verdict {
    run("6", "electronic artifact rejection by LO combination", |v| {
        let p = DeviceParams::default();
        let pr = ProbeParams {
            nbar: p.nbar_for_cooperativity(0.1),
            t_bath: 22.0,
            ..Default::default()
        };
        let band = FitBand::around(p.omega_m, p.gamma_m, 5.0);
        let duration = scale.pick(0.2, 0.05);
        // A phase slope s turns the thermal Lorentzian of height A into a
        // dispersive term of order A·s·Γ/2 in the cross-spectrum.
        let slope = 2.0 * ARTIFACT_FACTOR * quantum_peak(&p, &pr) / (thermal_peak(&p, &pr)? * p.gamma_m);
        let resp = ElectronicResponse::linear_phase(p.omega_m, slope);
        v.note(format!("22 K, C = 0.1, {duration} s per LO sign, phase slope {slope:.3e} s through ω_m, no calibration"));

        let mut clean = vec![];
        let mut dirty = vec![];
        for (k, sign) in [1i8, -1].into_iter().enumerate() {
            let cfg = SynthConfig::new(&p, duration, 600 + k as u64);
            let rec = synth_heterodyne_record(&p, &pr.with_lo_sign(sign), None, &RecordOptions::new(cfg))?;
            clean.push(scan(&p, &rec, &band)?);
            dirty.push(scan(&p, &inject_electronic_dispersion(&rec, &resp)?, &band)?);
        }
        let (q_clean, _) = combine_lo_signs(&clean[0], &clean[1])?;
        let (q_dirty, _) = combine_lo_signs(&dirty[0], &dirty[1])?;
        let line = clean[0].line;
        let (b_true, sb) = dispersive(&q_clean, &band, line)?;
        let (b_comb, _) = dispersive(&q_dirty, &band, line)?;

        let (b_plus_clean, _) = dispersive(&clean[0].at_null(0.0), &band, line)?;
        let (b_plus_dirty, _) = dispersive(&dirty[0].at_null(0.0), &band, line)?;
        let spurious = (b_plus_dirty - b_plus_clean).abs() / b_true.abs();
        v.note(format!("quantum dispersive amplitude from clean records B = {b_true:.4e} ± {sb:.1e}"));
        v.check(
            spurious >= 10.0,
            format!(
                "+LO alone: dispersive amplitude {b_plus_dirty:.4e} vs {b_plus_clean:.4e} clean, spurious part {spurious:.1}× B (≥ 10)"
            ),
        );
        v.note(format!(
            "records: LO half-difference B = {b_comb:.4e}, differs from clean by {:.1}% of B (single noise realization)",
            100.0 * (b_comb - b_true) / b_true
        ));

        // Leakage in expectation: the same filter applied to exact-distribution
        // spectral matrices of long records, clean and filtered from one draw.
        let grid = linear_grid(p.omega_m - 8.0 * p.gamma_m, p.omega_m + 8.0 * p.gamma_m, 321);
        let inverse = ElectronicResponse::linear_phase(p.omega_m, -slope);
        let n_avg = 1_000_000;
        let seeds = scale.pick(50u64, 12);
        let mut leaks = Vec::with_capacity(seeds as usize);
        let mut b_sum = 0.0;
        for s in 0..seeds {
            let mut clean = vec![];
            let mut dirty = vec![];
            for sign in [1i8, -1] {
                let m = sample_spectral_matrix(&grid, &p, &pr.with_lo_sign(sign), sign, n_avg, 61_000 + s)?;
                let mut d: SpectralMatrix = m.clone();
                d.correct_electronics(&inverse)?;
                clean.push(scan_rotation_null(&m, &phi_grid(), &band)?);
                dirty.push(scan_rotation_null(&d, &phi_grid(), &band)?);
            }
            let line = clean[0].line;
            let (b0, _) = dispersive(&combine_lo_signs(&clean[0], &clean[1])?.0, &band, line)?;
            let (b1, _) = dispersive(&combine_lo_signs(&dirty[0], &dirty[1])?.0, &band, line)?;
            leaks.push(b1 - b0);
            b_sum += b0;
        }
        let b = b_sum / seeds as f64;
        let n = leaks.len() as f64;
        let mean = leaks.iter().sum::<f64>() / n;
        let se = (leaks.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt();
        v.check(
            mean.abs() < 0.05 * b.abs(),
            format!(
                "LO half-difference over {seeds} draws of {n_avg} averages per sign: mean leakage {:+.2}% ± {:.2}% of B = {b:.4e} (< 5%)",
                100.0 * mean / b,
                100.0 * se / b.abs()
            ),
        );
        Ok(())
    })
}

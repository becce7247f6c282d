//! Record synthesis, carrier tracking, demodulation and calibration.

use omthermo::dsp::{
    calibrate_gain, calibrate_phase, demodulate, estimate_spectral_matrix, track_carrier_phase, SpectralMatrix,
    TrackConfig, WelchConfig,
};
use omthermo::model::{DeviceParams, ProbeParams};
use omthermo::synth::{
    inject_electronic_dispersion, phase_comb_record, shot_noise_record, synth_heterodyne_record, ElectronicResponse,
    PhotocurrentRecord, RecordOptions, SynthConfig,
};

fn device() -> (DeviceParams, ProbeParams) {
    let p = DeviceParams::default();
    let pr = ProbeParams {
        nbar: p.nbar_for_cooperativity(0.1),
        t_bath: 22.0,
        ..Default::default()
    };
    (p, pr)
}

fn opts(p: &DeviceParams, duration: f64, seed: u64, drift: f64) -> RecordOptions {
    let mut o = RecordOptions::new(SynthConfig::new(p, duration, seed));
    o.carrier.drift_rms = drift;
    o
}

fn matrix(p: &DeviceParams, rec: &PhotocurrentRecord) -> SpectralMatrix {
    let track = track_carrier_phase(rec, &TrackConfig::default()).unwrap();
    let pair = demodulate(rec, &track).unwrap();
    estimate_spectral_matrix(&pair, &WelchConfig::for_linewidth(rec.sample_rate(), p.gamma_m)).unwrap()
}

fn near(p: &DeviceParams, m: &SpectralMatrix, widths: f64) -> Vec<usize> {
    (0..m.len()).filter(|&q| (m.freqs[q] - p.omega_m).abs() < widths * p.gamma_m).collect()
}

#[test]
fn tracking_follows_the_synthesized_drift() {
    let (p, pr) = device();
    let rec = synth_heterodyne_record(&p, &pr, None, &opts(&p, 0.01, 3, 2.0)).unwrap();
    let track = track_carrier_phase(&rec, &TrackConfig::default()).unwrap();
    let truth = rec.true_carrier_phase();
    let n = rec.len();
    let idx: Vec<usize> = (n / 20..n - n / 20).step_by(97).collect();
    let diff: Vec<f64> = idx.iter().map(|&k| track.excursion_at(k) - truth[k]).collect();
    let mean = diff.iter().sum::<f64>() / diff.len() as f64;
    let rms = (diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diff.len() as f64).sqrt();
    assert!(rms < 0.01, "tracking residual {rms} rad");
    let wrapped = (mean + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    assert!(wrapped.abs() < 0.01, "offset {mean}");
}

#[test]
fn drift_leaves_the_spectra_unchanged() {
    let (p, pr) = device();
    let still = synth_heterodyne_record(&p, &pr, None, &opts(&p, 0.02, 5, 0.0)).unwrap();
    let moving = synth_heterodyne_record(&p, &pr, None, &opts(&p, 0.02, 5, 3.0)).unwrap();
    assert_eq!(still.sideband_i.len(), moving.sideband_i.len());
    let a = matrix(&p, &still);
    let b = matrix(&p, &moving);
    let peak = near(&p, &a, 5.0).iter().map(|&q| a.s_bb[q]).fold(0.0, f64::max);
    for q in near(&p, &a, 5.0) {
        assert!((a.s_bb[q] - b.s_bb[q]).abs() < 1e-2 * peak);
        assert!((a.s_ab[q] - b.s_ab[q]).norm() < 1e-2 * peak);
    }
}

#[test]
fn identity_electronics_changes_nothing() {
    let (p, pr) = device();
    let rec = synth_heterodyne_record(&p, &pr, None, &opts(&p, 0.002, 7, 1.0)).unwrap();
    let out = inject_electronic_dispersion(&rec, &ElectronicResponse::identity(p.omega_m)).unwrap();
    assert_eq!(out.sideband_i, rec.sideband_i);
    assert_eq!(out.sideband_q, rec.sideband_q);
    assert!(inject_electronic_dispersion(&out, &ElectronicResponse::identity(p.omega_m)).is_err());
}

#[test]
fn known_response_is_undone_exactly_enough() {
    let (p, pr) = device();
    let rec = synth_heterodyne_record(&p, &pr, None, &opts(&p, 0.02, 9, 1.0)).unwrap();
    let resp = ElectronicResponse::linear_phase(p.omega_m, 2e-8);
    let clean = matrix(&p, &rec);
    let mut fixed = matrix(&p, &inject_electronic_dispersion(&rec, &resp).unwrap());
    fixed.correct_electronics(&resp).unwrap();
    let peak = near(&p, &clean, 5.0).iter().map(|&q| clean.s_bb[q]).fold(0.0, f64::max);
    for q in near(&p, &clean, 5.0) {
        assert!((clean.s_ab[q] - fixed.s_ab[q]).norm() < 2e-2 * peak, "bin {q}");
    }
    assert!(fixed.correct_electronics(&resp).is_err());
}

#[test]
fn calibration_records_recover_the_response() {
    let (p, pr) = device();
    let slope = 2e-8;
    let resp = ElectronicResponse::linear_phase(p.omega_m, slope);
    let tones: Vec<f64> = (-2..=2).map(|k| p.omega_m + k as f64 * 4.0 * p.gamma_m).collect();
    let comb = phase_comb_record(&p, &pr, &tones, 0.3, &opts(&p, 0.01, 11, 1.0)).unwrap();
    let comb = inject_electronic_dispersion(&comb, &resp).unwrap();
    let track = track_carrier_phase(&comb, &TrackConfig::default()).unwrap();
    let cal = calibrate_phase(&demodulate(&comb, &track).unwrap(), &tones, p.omega_m, Some(1)).unwrap();
    assert!((cal.coeffs[1] / slope - 1.0).abs() < 0.05, "slope {}", cal.coeffs[1]);
    assert!(cal.coeffs[0].abs() < 0.02, "offset {}", cal.coeffs[0]);

    let shot = shot_noise_record(&p, &pr, &opts(&p, 0.01, 12, 1.0)).unwrap();
    let shot = inject_electronic_dispersion(&shot, &resp).unwrap();
    let gain = calibrate_gain(&matrix(&p, &shot), p.omega_m, 2).unwrap();
    // a pure phase response leaves |H| flat
    let g = |w: f64| gain.coeffs.iter().rev().fold(0.0, |acc, c| acc * (w - p.omega_m) + c);
    let edge = g(p.omega_m + 8.0 * p.gamma_m) / g(p.omega_m);
    assert!((edge - 1.0).abs() < 0.02, "gain tilt {edge}");
    assert!(!gain.suspect);
}

#[test]
fn comb_needs_tones() {
    let (p, pr) = device();
    assert!(phase_comb_record(&p, &pr, &[], 0.05, &opts(&p, 0.001, 1, 1.0)).is_err());
}

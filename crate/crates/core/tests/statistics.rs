//! Record-level spectra against the model, and the exact-distribution
//! spectral route against the record-level pipeline.

use omthermo::dsp::{
    coth_input, combine_lo_signs, demodulate, estimate_spectral_matrix, scan_rotation_null, track_carrier_phase,
    SpectralMatrix, TrackConfig, WelchConfig,
};
use omthermo::fit::{fit_joint, temperature_from_ratio, FitBand};
use omthermo::model::{DeviceParams, ProbeParams};
use omthermo::selftest::spectral_chain;
use omthermo::synth::{synth_heterodyne_record, RecordOptions, SynthConfig};

fn device(t: f64) -> (DeviceParams, ProbeParams) {
    let p = DeviceParams::default();
    let pr = ProbeParams {
        nbar: p.nbar_for_cooperativity(0.1),
        t_bath: t,
        ..Default::default()
    };
    (p, pr)
}

fn record_matrix(p: &DeviceParams, pr: &ProbeParams, sign: i8, duration: f64, seed: u64) -> SpectralMatrix {
    let pr = (*pr).with_lo_sign(sign);
    let rec = synth_heterodyne_record(p, &pr, None, &RecordOptions::new(SynthConfig::new(p, duration, seed))).unwrap();
    let track = track_carrier_phase(&rec, &TrackConfig::default()).unwrap();
    let pair = demodulate(&rec, &track).unwrap();
    let mut m = estimate_spectral_matrix(&pair, &WelchConfig::for_linewidth(rec.sample_rate(), p.gamma_m)).unwrap();
    m.normalize_to_shot_noise(p.omega_m, p.gamma_m).unwrap();
    m
}

#[test]
fn record_spectra_scatter_about_the_model() {
    let (p, pr) = device(22.0);
    for sign in [1i8, -1] {
        let m = record_matrix(&p, &pr, sign, 0.05, 40 + (sign < 0) as u64);
        let model = SpectralMatrix::from_model(&m.freqs, &p, &pr.with_lo_sign(sign), sign, m.n_eff).unwrap();
        let bins: Vec<usize> = (0..m.len()).filter(|&q| (m.freqs[q] - p.omega_m).abs() < 4.0 * p.gamma_m).collect();
        let n = bins.len() as f64;
        let (mut z_bb, mut z2_bb, mut z_ab, mut z2_ab) = (0.0, 0.0, 0.0, 0.0);
        for &q in &bins {
            let z = (m.s_bb[q] - model.s_bb[q]) / (model.s_bb[q] / m.n_eff.sqrt());
            z_bb += z;
            z2_bb += z * z;
            let (aa, bb, ab) = (model.s_aa[q], model.s_bb[q], model.s_ab[q]);
            let s = ((aa * bb + ab.re * ab.re - ab.im * ab.im) / (2.0 * m.n_eff)).sqrt();
            let z = (m.s_ab[q].re - ab.re) / s;
            z_ab += z;
            z2_ab += z * z;
        }
        // neighbouring bins are correlated, so the mean of n z-scores has
        // variance about bin_correlation / n
        let tol = 4.0 * (m.bin_correlation / n).sqrt();
        assert!((z_bb / n).abs() < tol, "S_QQ mean z {}", z_bb / n);
        assert!((z_ab / n).abs() < tol, "Re S_IQ mean z {}", z_ab / n);
        assert!((z2_bb / n - 1.0).abs() < 0.25, "S_QQ z² {}", z2_bb / n);
        assert!((z2_ab / n - 1.0).abs() < 0.25, "Re S_IQ z² {}", z2_ab / n);
    }
}

#[test]
fn exact_distribution_route_matches_record_errors() {
    let (p, pr) = device(22.0);
    let duration = 0.1;
    let phi: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.002).collect();
    let band = FitBand::around(p.omega_m, p.gamma_m, 5.0);
    let mp = record_matrix(&p, &pr, 1, duration, 50);
    let mm = record_matrix(&p, &pr, -1, duration, 51);
    let (q, t) = combine_lo_signs(
        &scan_rotation_null(&mp, &phi, &band).unwrap(),
        &scan_rotation_null(&mm, &phi, &band).unwrap(),
    )
    .unwrap();
    coth_input(&q, &t).unwrap();
    let j = fit_joint(&t, &q, &band).unwrap();
    let rec = temperature_from_ratio(&j, &j, j.center()).unwrap().exact;

    let g = p.gamma_m / 20.0 / std::f64::consts::TAU;
    let k = (duration * g).round() as usize;
    let mut s = 0.0;
    for seed in 0..8 {
        s += spectral_chain(&p, &pr, k, 500 + seed).unwrap().sigma_ratio;
    }
    let chain = s / 8.0;
    let r = rec.sigma_t / chain;
    assert!((0.75..1.33).contains(&r), "record σ_T {} vs exact-distribution {chain} ({r})", rec.sigma_t);
    assert!((rec.t - 22.0).abs() < 4.0 * rec.sigma_t, "T = {} ± {}", rec.t, rec.sigma_t);
}

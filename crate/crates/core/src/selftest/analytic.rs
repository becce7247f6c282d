use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use super::{run, Verdict};
use crate::constants::{HBAR, K_B};
use crate::model::{
    coth_ratio, general_cross_spectrum, linear_grid, quantum_correlation_spectrum, quantum_peak,
    thermal_correlation_spectrum, thermal_occupation, thermal_peak, DeviceParams, ProbeParams,
};

fn probe(p: &DeviceParams, c: f64, t: f64) -> ProbeParams {
    ProbeParams {
        nbar: p.nbar_for_cooperativity(c),
        t_bath: t,
        ..Default::default()
    }
}

fn max_rel<I: Iterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    pairs.map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

pub fn check_identities() -> Verdict {
    run("1", "analytic identities", |v| {
        let p = DeviceParams::default();
        let grid = linear_grid(p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m, 501);
        let mut worst_im = 0.0f64;
        let mut worst_coth = 0.0f64;
        let mut worst_red = 0.0f64;
        for t in [4.0, 22.0, 294.0] {
            for c in [0.01, 0.1] {
                let pr = probe(&p, c, t);
                let s0 = general_cross_spectrum(0.0, FRAC_PI_2, &grid, &p, &pr)?;
                let s4 = general_cross_spectrum(FRAC_PI_4, 3.0 * FRAC_PI_4, &grid, &p, &pr)?;
                worst_im = worst_im.max(max_rel(s4.values.iter().zip(&s0.values).map(|(a, b)| (a.im, b.im))));

                let th = thermal_correlation_spectrum(&grid, &p, &pr, false)?;
                let coth: Vec<f64> = grid.iter().map(|&w| coth_ratio(w, t)).collect::<crate::Result<_>>()?;
                worst_coth = worst_coth.max(max_rel(th.values.iter().zip(&coth).map(|(z, k)| (z.re / z.im, *k))));

                let q = quantum_correlation_spectrum(&grid, &p, &pr)?;
                let th_full = thermal_correlation_spectrum(&grid, &p, &pr, true)?;
                // Re S_{0,π/2} changes sign on resonance, so compare against the peak.
                for (a, b) in [(&q.values, &s0.values), (&th_full.values, &s4.values)] {
                    for part in [|z: &Complex64| z.re, |z: &Complex64| z.im] {
                        let peak = a.iter().map(|z| part(z).abs()).fold(0.0, f64::max);
                        let err = a.iter().zip(b).map(|(x, y)| (part(x) - part(y)).abs()).fold(0.0, f64::max);
                        worst_red = worst_red.max(err / peak);
                    }
                }
            }
        }
        v.check(worst_im <= 1e-12, format!("max rel |Im S(π/4,3π/4) − Im S(0,π/2)| = {worst_im:.2e} (≤ 1e-12)"));
        v.check(worst_coth <= 1e-9, format!("max rel |Re/Im − coth(ħω/2kT)| over ±5Γ = {worst_coth:.2e} (≤ 1e-9)"));
        v.check(worst_red <= 1e-9, format!("max detuned solution at Δp=0 vs closed forms, relative to peak = {worst_red:.2e} (≤ 1e-9)"));
        let pr = probe(&p, 0.01, 294.0);
        let w = [p.omega_m];
        let with = thermal_correlation_spectrum(&w, &p, &pr, true)?.values[0];
        v.note(format!(
            "with the radiation-pressure motion term included, Re/Im departs from coth by {:.2e}",
            with.re / with.im / coth_ratio(p.omega_m, 294.0)? - 1.0
        ));
        Ok(())
    })
}

pub fn check_magnitudes() -> Verdict {
    run("2", "magnitudes at room temperature", |v| {
        let p = DeviceParams::default();
        let pr = probe(&p, 0.01, 294.0);
        let ratio = quantum_peak(&p, &pr) / thermal_peak(&p, &pr)?;
        v.check(
            (0.5..=2.0).contains(&(ratio / 2e-4)),
            format!("quantum/thermal peak = {ratio:.3e}, {:.2}× the quoted 2e-4", ratio / 2e-4),
        );
        let w = [p.omega_m];
        let with = thermal_correlation_spectrum(&w, &p, &pr, true)?.values[0].re;
        let without = thermal_correlation_spectrum(&w, &p, &pr, false)?.values[0].re;
        let rpsn = (with - without) / without;
        v.check(
            (0.5..=2.0).contains(&(rpsn / 3e-6)),
            format!("RPSN motion/thermal motion at C=0.01 = {rpsn:.3e}, {:.2}× the quoted 3e-6", rpsn / 3e-6),
        );
        let n = thermal_occupation(p.omega_m, 294.0)?;
        let approx = K_B * 294.0 / (HBAR * p.omega_m);
        let rel = (approx - n).abs() / n;
        v.check(
            rel < 1e-3 && (n - 1.69e3).abs() < 0.01 * 1.69e3,
            format!("n_th = {n:.3} (Bose), kT/ħω = {approx:.3}, rel diff {rel:.2e} (< 1e-3)"),
        );
        Ok(())
    })
}

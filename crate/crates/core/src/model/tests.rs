use super::*;
use crate::constants::TWO_PI;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn dev() -> DeviceParams {
    DeviceParams::default()
}

fn probe(c: f64, t: f64) -> ProbeParams {
    ProbeParams {
        nbar: dev().nbar_for_cooperativity(c),
        t_bath: t,
        ..Default::default()
    }
}

#[test]
fn mech_susceptibility_limits() {
    let p = dev();
    let s = mech_susceptibility(0.0, &p);
    assert_relative_eq!(s.re, 1.0 / (p.m * p.omega_m * p.omega_m), max_relative = 1e-15);
    assert_eq!(s.im, 0.0);
    let r = mech_susceptibility(p.omega_m, &p);
    assert!(r.re.abs() < 1e-12 * r.im.abs());
    assert_relative_eq!(r.im, 1.0 / (p.m * p.gamma_m * p.omega_m), max_relative = 1e-12);
}

#[test]
fn mech_susceptibility_half_linewidth() {
    // Independent high-precision evaluation of the formula.
    let p = dev();
    let v = mech_susceptibility(p.omega_m + p.gamma_m / 2.0, &p);
    assert_relative_eq!(v.re, -0.002_498_559_453_008_781_5, max_relative = 1e-9);
    assert_relative_eq!(v.im, 0.002_498_801_003_082_27, max_relative = 1e-9);
}

#[test]
fn cavity_susceptibility_points() {
    let p = dev();
    let pr = ProbeParams::default();
    assert_relative_eq!(cavity_susceptibility(0.0, &p, &pr).re, 2.0 / p.kappa, max_relative = 1e-15);
    let h = cavity_susceptibility(p.kappa / 2.0, &p, &pr);
    assert_relative_eq!(h.re, 1.0 / p.kappa, max_relative = 1e-15);
    assert_relative_eq!(h.im, 1.0 / p.kappa, max_relative = 1e-15);
    let v = cavity_susceptibility(TWO_PI * 3.62e9, &p, &pr);
    assert_relative_eq!(v.re, 2.088_406_366_350_019e-11, max_relative = 1e-12);
    assert_relative_eq!(v.im, 1.512_006_209_237_413_8e-11, max_relative = 1e-12);
}

#[test]
fn occupation_points() {
    let w = TWO_PI * 3.62e9;
    assert_eq!(thermal_occupation(w, 0.0).unwrap(), 0.0);
    let t = crate::constants::HBAR * w / (crate::constants::K_B * std::f64::consts::LN_2);
    assert_relative_eq!(thermal_occupation(w, t).unwrap(), 1.0, max_relative = 1e-14);
    let n = thermal_occupation(w, 294.0).unwrap();
    assert_relative_eq!(n, 1_691.755_857_534_487, max_relative = 1e-12);
    // High-temperature approximation k_B T / ħω.
    assert_relative_eq!(n, 1_692.255_808_290_553, max_relative = 1e-3);
    assert!(thermal_occupation(0.0, 10.0).is_err());
    assert!(thermal_occupation(-1.0, 10.0).is_err());
}

#[test]
fn coth_points() {
    let w = TWO_PI * 3.62e9;
    let x = 2.0 * 0.5f64.atanh();
    let t = crate::constants::HBAR * w / (crate::constants::K_B * x);
    assert_relative_eq!(coth_ratio(w, t).unwrap(), 2.0, max_relative = 1e-13);
    assert_eq!(coth_ratio(w, 0.0).unwrap(), 1.0);
    assert_relative_eq!(coth_ratio(w, 1e-3).unwrap(), 1.0, max_relative = 1e-12);
    assert_relative_eq!(coth_ratio(w, 294.0).unwrap(), 3_384.511_715_068_974, max_relative = 1e-12);
    assert!(coth_ratio(w, -1.0).is_err());
}

#[test]
fn transduction_limits_and_value() {
    let p = dev();
    let pr = probe(0.01, 294.0);
    let g = p.coupling_g();
    let d0 = transduction_strength(0.0, &p, &pr);
    assert_relative_eq!(
        d0,
        8.0 * crate::constants::HBAR * pr.eps * pr.nbar * g * g / p.kappa,
        max_relative = 1e-14
    );
    assert_relative_eq!(
        transduction_strength(p.omega_m, &p, &pr),
        0.236_283_681_644_370_64,
        max_relative = 1e-10
    );
}

proptest! {
    #[test]
    fn transduction_forms_agree(w in 0.0f64..1e11, c in 1e-4f64..1.0) {
        let p = dev();
        let pr = probe(c, 294.0);
        let a = transduction_strength(w, &p, &pr);
        let b = transduction_strength_cavity_form(w, &p, &pr);
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coth_ratio_of_thermal_correlation(t in 1.0f64..400.0, c in 1e-3f64..0.1) {
        let p = dev();
        let pr = probe(c, t);
        let grid = linear_grid(p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m, 41);
        let s = thermal_correlation_spectrum(&grid, &p, &pr, false).unwrap();
        for (w, v) in grid.iter().zip(&s.values) {
            let expect = coth_ratio(*w, t).unwrap();
            prop_assert!((v.re / v.im / expect - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn quantum_im_peak_equals_re_peak_to_peak() {
    // Γ_m ≪ ω_m makes the oscillator identity exact to well below 1e-6.
    let p = DeviceParams {
        gamma_m: dev().omega_m * 1e-8,
        ..dev()
    };
    let pr = probe(0.01, 294.0);
    let hw = p.gamma_m / 2.0;
    let fine = |centre: f64| linear_grid(centre - 0.01 * hw, centre + 0.01 * hw, 2001);
    let lo = quantum_correlation_spectrum(&fine(p.omega_m - hw), &p, &pr).unwrap();
    let hi = quantum_correlation_spectrum(&fine(p.omega_m + hw), &p, &pr).unwrap();
    let max = lo.values.iter().map(|v| v.re).fold(f64::MIN, f64::max);
    let min = hi.values.iter().map(|v| v.re).fold(f64::MAX, f64::min);
    let peak = quantum_peak(&p, &pr);
    assert_relative_eq!((max - min) / peak, 1.0, max_relative = 1e-6);
}

#[test]
fn quantum_correlation_independent_of_power_in_displacement_units() {
    let p = dev();
    let grid = linear_grid(p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m, 51);
    let a = probe(0.01, 294.0);
    let b = ProbeParams { nbar: 2.0 * a.nbar, ..a };
    let sa = to_displacement(&quantum_correlation_spectrum(&grid, &p, &a).unwrap(), &p, &a).unwrap();
    let sb = to_displacement(&quantum_correlation_spectrum(&grid, &p, &b).unwrap(), &p, &b).unwrap();
    for (x, y) in sa.values.iter().zip(&sb.values) {
        assert!((x - y).norm() <= 1e-12 * x.norm());
    }
    // It is ħ χ_m / 2: the scale of mechanical zero-point motion.
    let w = grid[25];
    let expect = mech_susceptibility(w, &p) * (crate::constants::HBAR / 2.0);
    assert!((sa.values[25] - expect).norm() < 1e-12 * expect.norm());
}

#[test]
fn quantum_to_thermal_ratio_at_room_temperature() {
    let p = dev();
    let pr = probe(0.01, 294.0);
    let ratio = quantum_peak(&p, &pr) / thermal_peak(&p, &pr).unwrap();
    assert_relative_eq!(ratio, 2.954e-4, max_relative = 1e-3);
    assert!(ratio / 2e-4 < 2.0 && ratio / 2e-4 > 0.5);
}

#[test]
fn resonant_only_ops_reject_detuning() {
    let p = dev();
    let pr = ProbeParams { delta_p: 1e6, ..probe(0.01, 294.0) };
    assert!(quantum_correlation_spectrum(&[p.omega_m], &p, &pr).is_err());
    assert!(thermal_correlation_spectrum(&[p.omega_m], &p, &pr, true).is_err());
}

#[test]
fn thermal_correlation_structure() {
    let p = dev();
    let pr = probe(0.01, 294.0);
    let grid = linear_grid(p.omega_m - 10.0 * p.gamma_m, p.omega_m + 10.0 * p.gamma_m, 201);
    let q = quantum_correlation_spectrum(&grid, &p, &pr).unwrap();
    let t = thermal_correlation_spectrum(&grid, &p, &pr, true).unwrap();
    for (a, b) in q.values.iter().zip(&t.values) {
        assert!((a.im - b.im).abs() <= 1e-12 * a.im.abs());
    }
    // Zero temperature leaves the vacuum term D Im χ_m.
    let cold = probe(0.01, 0.0);
    let z = thermal_correlation_spectrum(&[p.omega_m], &p, &cold, false).unwrap();
    assert_relative_eq!(z.values[0].re, quantum_peak(&p, &cold), max_relative = 1e-14);
}

#[test]
fn rpsn_to_thermal_ratio_at_room_temperature() {
    let p = dev();
    let pr = probe(0.01, 294.0);
    let w = [p.omega_m];
    let with = thermal_correlation_spectrum(&w, &p, &pr, true).unwrap().values[0].re;
    let without = thermal_correlation_spectrum(&w, &p, &pr, false).unwrap().values[0].re;
    let ratio = (with - without) / without;
    assert_relative_eq!(ratio, 3.87e-6, max_relative = 0.01);
    assert!(ratio / 3e-6 < 2.0 && ratio / 3e-6 > 0.5);
}

#[test]
fn general_solution_vacuum_limit() {
    let p = dev();
    let pr = ProbeParams { nbar: 0.0, ..probe(0.01, 294.0) };
    let grid = linear_grid(p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m, 21);
    for (a, b) in [(0.0, 0.0), (1.0, 1.0), (0.0, std::f64::consts::FRAC_PI_2)] {
        let s = general_cross_spectrum(a, b, &grid, &p, &pr).unwrap();
        let expect = (a - b).cos();
        for v in &s.values {
            assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14, "{v}");
        }
    }
}

#[test]
fn general_solution_reduces_to_closed_forms() {
    let p = dev();
    let grid = linear_grid(p.omega_m - 5.0 * p.gamma_m, p.omega_m + 5.0 * p.gamma_m, 101);
    for t in [10.0, 294.0] {
        let pr = probe(0.05, t);
        let q = quantum_correlation_spectrum(&grid, &p, &pr).unwrap();
        let g = general_cross_spectrum(0.0, std::f64::consts::FRAC_PI_2, &grid, &p, &pr).unwrap();
        for (a, b) in q.values.iter().zip(&g.values) {
            assert!((a - b).norm() <= 1e-9 * a.norm(), "{a} vs {b}");
        }
        let th = thermal_correlation_spectrum(&grid, &p, &pr, true).unwrap();
        let f4 = std::f64::consts::FRAC_PI_4;
        let g = general_cross_spectrum(f4, 3.0 * f4, &grid, &p, &pr).unwrap();
        for (a, b) in th.values.iter().zip(&g.values) {
            assert!((a.re - b.re).abs() <= 1e-9 * a.re.abs(), "{a} vs {b}");
            assert!((a.im - b.im).abs() <= 1e-9 * a.im.abs(), "{a} vs {b}");
        }
    }
}

#[test]
fn fdt_limits() {
    let p = dev();
    let w = p.omega_m;
    let hot = fdt_force_psd(w, &p, 294.0).unwrap();
    assert_relative_eq!(hot, 2.0 * p.m * p.gamma_m * crate::constants::K_B * 294.0, max_relative = 1e-6);
    let cold = fdt_force_psd(w, &p, 0.0).unwrap();
    assert_relative_eq!(cold, p.m * p.gamma_m * crate::constants::HBAR * w, max_relative = 1e-15);
}

/// Composite Simpson rule on the Lorentzian-flattening substitution
/// ω = ω_m + (Γ/2) tan θ.
fn displacement_variance_quadrature(p: &DeviceParams, t: f64) -> f64 {
    let hw = p.gamma_m / 2.0;
    let a = (-p.omega_m / hw).atan() + 1e-12;
    let b = std::f64::consts::FRAC_PI_2 - 1e-9;
    let n = 200_000;
    let h = (b - a) / n as f64;
    let f = |th: f64| {
        let w = p.omega_m + hw * th.tan();
        let jac = hw / th.cos().powi(2);
        mech_susceptibility(w, p).norm_sqr() * fdt_force_psd(w, p, t).unwrap() * jac
    };
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    // ∫_{-∞}^{∞} dω/2π, integrand even in ω.
    2.0 * s * h / 3.0 / TWO_PI
}

#[test]
fn equipartition_by_quadrature() {
    for q in [100.0, 1000.0] {
        let p = DeviceParams { gamma_m: dev().omega_m / q, ..dev() };
        let var = displacement_variance_quadrature(&p, 294.0);
        let ratio = p.m * p.omega_m * p.omega_m * var / (crate::constants::K_B * 294.0);
        assert!((ratio - 1.0).abs() < 0.01, "Q = {q}: ratio {ratio}");
    }
}

use std::f64::consts::TAU;

use super::{run, Scale, Verdict};
use crate::dsp::{coth_input, combine_lo_signs, scan_rotation_null};
use crate::fit::{allan_deviation, fit_joint, temperature_from_coth, temperature_from_ratio, FitBand};
use crate::model::{linear_grid, DeviceParams, ProbeParams};
use crate::synth::sample_spectral_matrix;
use crate::{Error, Result};

/// Cooperativity of the thermometry checks, the top of the experiment's range.
pub const CHAIN_COOPERATIVITY: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct ChainPoint {
    pub t_ratio: f64,
    pub sigma_ratio: f64,
    /// None when the absorptive line is not significant.
    pub coth: Option<(f64, f64)>,
}

fn chain_grid(p: &DeviceParams) -> Vec<f64> {
    linear_grid(p.omega_m - 8.0 * p.gamma_m, p.omega_m + 8.0 * p.gamma_m, 321)
}

/// Bin spacing of the chain grid, Hz; one average spans 1/rbw of record.
pub fn chain_rbw(p: &DeviceParams) -> f64 {
    let g = chain_grid(p);
    (g[1] - g[0]) / TAU
}

/// One temperature estimate from both LO signs, each an averaged spectral
/// matrix of `n_avg` independent periodograms drawn from the model, taken
/// through the φ-scan, LO combination and both temperature fits.
pub fn spectral_chain(p: &DeviceParams, pr: &ProbeParams, n_avg: usize, seed: u64) -> Result<ChainPoint> {
    let grid = chain_grid(p);
    let phi: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.002).collect();
    let band = FitBand::around(p.omega_m, p.gamma_m, 5.0);
    let mp = sample_spectral_matrix(&grid, p, &(*pr).with_lo_sign(1), 1, n_avg, seed)?;
    let mm = sample_spectral_matrix(&grid, p, &(*pr).with_lo_sign(-1), -1, n_avg, seed)?;
    let sp = scan_rotation_null(&mp, &phi, &band)?;
    let sm = scan_rotation_null(&mm, &phi, &band)?;
    let (q, t) = combine_lo_signs(&sp, &sm)?;
    let j = fit_joint(&t, &q, &band)?;
    let r = temperature_from_ratio(&j, &j, j.center())?;
    let coth = match temperature_from_coth(&coth_input(&q, &t)?, &band) {
        Ok((c, _)) => Some((c.t, c.sigma_t)),
        Err(Error::Numeric(_) | Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ChainPoint {
        t_ratio: r.exact.t,
        sigma_ratio: r.exact.sigma_t,
        coth,
    })
}

fn chain_probe(p: &DeviceParams, t: f64) -> ProbeParams {
    ProbeParams {
        nbar: p.nbar_for_cooperativity(CHAIN_COOPERATIVITY),
        t_bath: t,
        ..Default::default()
    }
}

/// Averages per LO sign giving a ratio-method σ_T/T near `target`, from a
/// short pilot.
fn averages_for(p: &DeviceParams, pr: &ProbeParams, target: f64, seed: u64) -> Result<usize> {
    let k0 = 100_000usize;
    let mut s = 0.0;
    for i in 0..8 {
        s += spectral_chain(p, pr, k0, seed + i)?.sigma_ratio;
    }
    let rel = s / 8.0 / pr.t_bath;
    Ok(((k0 as f64) * (rel / target).powi(2)).ceil() as usize)
}

struct Stats {
    mean: f64,
    sd: f64,
    reported: f64,
}

fn stats(v: &[(f64, f64)]) -> Stats {
    let n = v.len() as f64;
    let mean = v.iter().map(|x| x.0).sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let reported = v.iter().map(|x| x.1).sum::<f64>() / n;
    Stats { mean, sd, reported }
}

pub fn check_thermometry(scale: Scale) -> Verdict {
    run("4", "end-to-end thermometry, paired LO signs", |v| {
        let p = DeviceParams::default();
        let seeds = scale.pick(400u64, 100);
        let rbw = chain_rbw(&p);
        v.note(format!(
            "C = {CHAIN_COOPERATIVITY}, paired ±Δ_LO spectral matrices drawn from their exact sampling distribution; \
             one average = {:.1} µs of record",
            1e6 / rbw
        ));
        for (i, t) in [10.0, 40.0, 100.0, 294.0].into_iter().enumerate() {
            let pr = chain_probe(&p, t);
            let k = averages_for(&p, &pr, 0.04, 900_000 + 100 * i as u64)?;
            let mut ratio = vec![];
            let mut coth = vec![];
            for s in 0..seeds {
                let c = spectral_chain(&p, &pr, k, 1_000_000 * (i as u64 + 1) + s)?;
                ratio.push((c.t_ratio, c.sigma_ratio));
                coth.extend(c.coth);
            }
            let r = stats(&ratio);
            let bias = (r.mean - t) / r.reported;
            let cal = r.sd / r.reported;
            v.check(
                bias.abs() < 0.3 && (0.8..=1.3).contains(&cal) && r.reported / t < 0.05,
                format!(
                    "T = {t:>5} K: mean {:.3} K, bias {bias:+.2}σ_T (< 0.3), empirical/reported σ {cal:.2} ∈ [0.8, 1.3], \
                     σ_T/T {:.3} (< 0.05), {seeds} seeds, {k} averages = {:.2} s per sign",
                    r.mean,
                    r.reported / t,
                    k as f64 / rbw
                ),
            );
            let c = stats(&coth);
            v.note(format!(
                "            coth method ({} estimates): mean {:.3} K, bias {:+.2}σ, empirical/reported σ {:.2}, σ_T/T {:.3}",
                coth.len(),
                c.mean,
                (c.mean - t) / c.reported,
                c.sd / c.reported,
                c.reported / t
            ));
        }
        Ok(())
    })
}

pub fn check_allan(scale: Scale) -> Verdict {
    run("5", "Allan scaling of temperature sequences", |v| {
        let p = DeviceParams::default();
        let pr = chain_probe(&p, 294.0);
        let n = scale.pick(16_384u64, 4096);
        let k = averages_for(&p, &pr, 0.04, 5_000_000)?;
        let tau0 = 2.0 * k as f64 / chain_rbw(&p);
        let mut seq = Vec::with_capacity(n as usize);
        let mut sig = 0.0;
        for i in 0..n {
            let c = spectral_chain(&p, &pr, k, 6_000_000 + i)?;
            seq.push((i as f64 * tau0, c.t_ratio));
            sig += c.sigma_ratio;
        }
        sig /= n as f64;
        let curve = allan_deviation(&seq, &[])?;
        v.check(
            (curve.slope + 0.5).abs() <= 0.025,
            format!(
                "log-log slope {:+.4} ± {:.4} over τ = {:.3}..{:.1} s (−1/2 within 5%)",
                curve.slope,
                curve.sigma_slope,
                curve.tau[0],
                curve.tau[curve.tau.len() - 1]
            ),
        );
        let predicted = sig * (2.0 * tau0).sqrt();
        v.check(
            (curve.a / predicted - 1.0).abs() <= 0.2,
            format!(
                "a = {:.2} ± {:.2} K/√Hz vs {:.2} K/√Hz from the mean reported σ_T = {sig:.2} K per {tau0:.2} s (within 20%)",
                curve.a, curve.sigma_a, predicted
            ),
        );
        // the room-temperature data were taken nearer C = 0.01
        let mut low = pr;
        low.nbar = p.nbar_for_cooperativity(0.01);
        let k_low = 1_000_000;
        let mut s_low = 0.0;
        for i in 0..8 {
            s_low += spectral_chain(&p, &low, k_low, 7_000_000 + i)?.sigma_ratio;
        }
        let a_low = s_low / 8.0 * (2.0 * 2.0 * k_low as f64 / chain_rbw(&p)).sqrt();
        v.note(format!(
            "experiment quotes 640 K/√Hz at room temperature: {:+.2} decades at C = 0.1, predicted {a_low:.0} K/√Hz ({:+.2} decades) at C = 0.01",
            (curve.a / 640.0).log10(),
            (a_low / 640.0).log10()
        ));
        Ok(())
    })
}

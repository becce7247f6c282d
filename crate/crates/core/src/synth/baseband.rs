use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::stream::stream;
use crate::dsp::{if_bin_omega, QuadraturePair};
use crate::error::{Error, Result};
use crate::model::{output_transfer, port_psd, DeviceParams, ProbeParams, PORTS};

/// Sizes and seeds of one synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Record length, s.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    pub seed: u64,
    /// Length of the independently synthesized blocks; 0 picks
    /// max(100/Γ_m, 2^16 samples) rounded up to a power of two.
    pub segment_len: usize,
    /// Upper bound on samples per channel.
    pub max_samples: usize,
}

pub const DEFAULT_MAX_SAMPLES: usize = 1 << 26;

impl SynthConfig {
    pub fn new(p: &DeviceParams, duration: f64, seed: u64) -> Self {
        SynthConfig {
            duration,
            sample_rate: default_sample_rate(p),
            seed,
            segment_len: 0,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::validation("synth.duration", "must be positive"));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::validation("synth.sample_rate", "must be positive"));
        }
        if self.n_samples() < 2 {
            return Err(Error::validation("synth.duration", "shorter than two samples"));
        }
        if self.n_samples() > self.max_samples {
            return Err(Error::validation(
                "synth.duration",
                format!(
                    "{} samples per channel exceed the memory cap of {}",
                    self.n_samples(),
                    self.max_samples
                ),
            ));
        }
        if self.segment_len != 0 && (self.segment_len < 16 || !self.segment_len.is_power_of_two()) {
            return Err(Error::validation("synth.segment_len", "must be 0 or a power of two >= 16"));
        }
        Ok(())
    }

    pub fn segment_len_for(&self, gamma_m: f64) -> usize {
        if self.segment_len != 0 {
            return self.segment_len;
        }
        let want = (100.0 / gamma_m * self.sample_rate).ceil() as usize;
        want.max(1 << 16).next_power_of_two()
    }
}

/// Capture rate whose band spans ±11.5 Γ_m around the resonance.
pub fn default_sample_rate(p: &DeviceParams) -> f64 {
    23.0 * p.gamma_m / std::f64::consts::PI
}

/// Per-port transfer to (I, Q), pre-multiplied by the square root of the port PSD.
pub(crate) type Table = Vec<Vec<(Complex64, Complex64)>>;

pub(crate) fn model_table(p: &DeviceParams, pr: &ProbeParams, omega_center: f64, fs: f64, n: usize) -> Result<Table> {
    let mut table: Table = (0..PORTS).map(|_| Vec::with_capacity(n / 2)).collect();
    for k in 0..n / 2 {
        let w = if_bin_omega(omega_center, fs, k, n);
        if k == 0 || w <= 0.0 {
            for col in table.iter_mut() {
                col.push(Default::default());
            }
            continue;
        }
        let t = output_transfer(w, p, pr);
        let psd = port_psd(w, p, pr)?;
        for (q, col) in table.iter_mut().enumerate() {
            let s = psd[q].sqrt();
            col.push((t.amplitude[q] * s, t.phase[q] * s));
        }
    }
    Ok(table)
}

fn synth_segment(table: &Table, n: usize, seed: u64, segment: u64, fft: &Arc<dyn Fft<f64>>) -> (Vec<f64>, Vec<f64>) {
    let mut y = vec![Complex64::default(); n];
    let scale = (n as f64 / 2.0).sqrt();
    let i = Complex64::i();
    for (port, col) in table.iter().enumerate() {
        if col.iter().all(|(a, b)| a.norm_sqr() + b.norm_sqr() == 0.0) {
            continue;
        }
        let mut rng = stream(seed, segment, port as u64);
        for (k, &(hi, hq)) in col.iter().enumerate().skip(1) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(re, im) * scale;
            let (u, v) = (hi * z, hq * z);
            y[k] += u + i * v;
            y[n - k] += u.conj() + i * v.conj();
        }
    }
    fft.process(&mut y);
    let inv = 1.0 / n as f64;
    y.iter().map(|c| (c.re * inv, c.im * inv)).unzip()
}

/// Concatenates independent circular segments, truncated to `total` samples.
pub(crate) fn synth_from_table(table: &Table, seg: usize, total: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let fft = FftPlanner::new().plan_fft_inverse(seg);
    let n_seg = total.div_ceil(seg);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n_seg)
        .into_par_iter()
        .map(|s| synth_segment(table, seg, seed, s as u64, &fft))
        .collect();
    let mut a = Vec::with_capacity(n_seg * seg);
    let mut b = Vec::with_capacity(n_seg * seg);
    for (pa, pb) in parts {
        a.extend_from_slice(&pa);
        b.extend_from_slice(&pb);
    }
    a.truncate(total);
    b.truncate(total);
    (a, b)
}

/// Amplitude (x_a) and phase (x_b) quadratures of the detected field, with
/// statistics given by the full linear response at any detuning.
pub fn synth_baseband_quadratures(p: &DeviceParams, pr: &ProbeParams, cfg: &SynthConfig) -> Result<QuadraturePair> {
    p.validate()?;
    pr.validate()?;
    cfg.validate()?;
    let seg = cfg.segment_len_for(p.gamma_m);
    let table = model_table(p, pr, p.omega_m, cfg.sample_rate, seg)?;
    let (a, b) = synth_from_table(&table, seg, cfg.n_samples(), cfg.seed);
    QuadraturePair::new(cfg.sample_rate, p.omega_m, a, b, 1)
}

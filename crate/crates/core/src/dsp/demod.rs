//! Carrier tracking and digital demodulation of heterodyne records.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::QuadraturePair;
use crate::error::{Error, Result};
use crate::synth::PhotocurrentRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    /// Minimum carrier-to-noise ratio in 1 kHz, dB.
    pub snr_threshold_db: f64,
    /// Low-pass bandwidth of the tracked phase, Hz.
    pub bandwidth_hz: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            snr_threshold_db: 20.0,
            bandwidth_hz: 5e3,
        }
    }
}

/// Tracked beat-note phase ψ(t) = |Δ_LO| t + excursion(t).
///
/// The excursion is kept at a decimated rate and linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierPhase {
    pub carrier_omega: f64,
    pub sample_rate: f64,
    /// Input samples between stored excursion points.
    pub stride: usize,
    pub excursion: Vec<f64>,
    pub len: usize,
    pub amplitude: f64,
    pub snr_db: f64,
}

impl CarrierPhase {
    pub fn excursion_at(&self, k: usize) -> f64 {
        let x = k as f64 / self.stride as f64;
        let j = x.floor() as usize;
        if j + 1 >= self.excursion.len() {
            return *self.excursion.last().unwrap_or(&0.0);
        }
        let f = x - j as f64;
        self.excursion[j] * (1.0 - f) + self.excursion[j + 1] * f
    }

    /// Unwrapped ψ at every input sample.
    pub fn unwrapped(&self) -> Vec<f64> {
        (0..self.len)
            .map(|k| self.carrier_omega * k as f64 / self.sample_rate + self.excursion_at(k))
            .collect()
    }

    /// Same track shifted by a constant phase.
    pub fn with_offset(&self, delta: f64) -> Self {
        let mut c = self.clone();
        c.excursion.iter_mut().for_each(|x| *x += delta);
        c
    }
}

/// Blackman-windowed sinc low-pass taps, unit DC gain.
fn lowpass_taps(cutoff: f64, rate: f64) -> Vec<f64> {
    let mut len = (5.5 * rate / cutoff).ceil() as usize | 1;
    len = len.max(3);
    let m = (len - 1) as f64;
    let fc = cutoff / rate;
    let mut h: Vec<f64> = (0..len)
        .map(|k| {
            let x = k as f64 - m / 2.0;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (std::f64::consts::TAU * fc * x).sin() / (std::f64::consts::PI * x)
            };
            let t = std::f64::consts::TAU * k as f64 / m;
            sinc * (0.42 - 0.5 * t.cos() + 0.08 * (2.0 * t).cos())
        })
        .collect();
    let s: f64 = h.iter().sum();
    h.iter_mut().for_each(|x| *x /= s);
    h
}

/// Centred FIR evaluated at every `stride`-th input; taps falling outside the
/// input are dropped and the rest renormalized.
fn decimate(x: &[Complex64], taps: &[f64], stride: usize) -> Vec<Complex64> {
    let half = (taps.len() / 2) as isize;
    let n = x.len() as isize;
    (0..x.len().div_ceil(stride))
        .map(|j| {
            let c = (j * stride) as isize;
            let lo = (c - half).max(0);
            let hi = (c + half).min(n - 1);
            let mut acc = Complex64::default();
            let mut wsum = 0.0;
            for i in lo..=hi {
                let t = taps[(i - c + half) as usize];
                acc += x[i as usize] * t;
                wsum += t;
            }
            acc / wsum
        })
        .collect()
}

/// Recovers the beat-note phase: mix down by |Δ_LO|, two decimating
/// low-pass stages, arctangent, unwrap. Fails on a weak carrier.
pub fn track_carrier_phase(rec: &PhotocurrentRecord, cfg: &TrackConfig) -> Result<CarrierPhase> {
    rec.check()?;
    let fs = rec.sample_rate();
    let wc = rec.meta.carrier_omega();
    let fc = wc / std::f64::consts::TAU;
    let n = rec.len();
    if !(cfg.bandwidth_hz > 0.0) || cfg.bandwidth_hz >= fc / 4.0 {
        return Err(Error::validation("track.bandwidth_hz", "must be positive and well below |Δ_LO|"));
    }

    let cut1 = (50.0 * cfg.bandwidth_hz).min(fc / 2.0);
    let d1 = ((fs / (4.0 * cut1)).floor() as usize).max(1);
    let taps1 = lowpass_taps(cut1, fs);
    let rate1 = fs / d1 as f64;
    let d2 = ((rate1 / (4.0 * cfg.bandwidth_hz)).floor() as usize).max(1);
    let taps2 = lowpass_taps(cfg.bandwidth_hz, rate1);

    // Mix in blocks so the full-rate complex signal is never stored.
    let block = d1 * 4096;
    let margin = taps1.len() / 2;
    let mut stage1 = Vec::with_capacity(n / d1 + 1);
    let mut buf = Vec::with_capacity(block + 2 * margin);
    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        let lo = start.saturating_sub(margin);
        let hi = (end + margin).min(n);
        buf.clear();
        buf.extend((lo..hi).map(|k| {
            let turns = (fc * k as f64 / fs).fract();
            Complex64::from_polar(rec.carrier[k] as f64, -std::f64::consts::TAU * turns)
        }));
        let half = margin as isize;
        let len = buf.len() as isize;
        let mut j = start.div_ceil(d1) * d1;
        while j < end {
            let c = (j - lo) as isize;
            let (a, b) = ((c - half).max(0), (c + half).min(len - 1));
            let mut acc = Complex64::default();
            let mut wsum = 0.0;
            for i in a..=b {
                let t = taps1[(i - c + half) as usize];
                acc += buf[i as usize] * t;
                wsum += t;
            }
            stage1.push(acc / wsum);
            j += d1;
        }
        start = end;
    }
    let stage2 = decimate(&stage1, &taps2, d2);
    let stride = d1 * d2;

    let mut excursion = Vec::with_capacity(stage2.len());
    let mut prev = 0.0;
    for (j, z) in stage2.iter().enumerate() {
        let mut a = z.arg();
        if j > 0 {
            a += std::f64::consts::TAU * ((prev - a) / std::f64::consts::TAU).round();
        }
        excursion.push(a);
        prev = a;
    }
    let amplitude = 2.0 * stage2.iter().map(|z| z.norm()).sum::<f64>() / stage2.len().max(1) as f64;
    let mut track = CarrierPhase {
        carrier_omega: wc,
        sample_rate: fs,
        stride,
        excursion,
        len: n,
        amplitude,
        snr_db: f64::NEG_INFINITY,
    };

    let mut res = 0.0;
    for k in 0..n {
        let psi = std::f64::consts::TAU * (fc * k as f64 / fs).fract() + track.excursion_at(k);
        let r = rec.carrier[k] as f64 - amplitude * psi.cos();
        res += r * r;
    }
    let var = res / n.max(1) as f64;
    let snr = amplitude * amplitude * fs / (4.0 * var.max(f64::MIN_POSITIVE) * 1e3);
    track.snr_db = 10.0 * snr.log10();
    if !(track.snr_db >= cfg.snr_threshold_db) {
        return Err(Error::CarrierSnr {
            snr_db: track.snr_db,
            threshold_db: cfg.snr_threshold_db,
        });
    }
    Ok(track)
}

/// Removes the tracked carrier excursion from the complex sideband signal
/// and returns (x_I, x_Q) as recorded, i.e. with x_Q carrying the LO sign.
/// An offset δ added to the track rotates the output by −δ.
pub fn demodulate(rec: &PhotocurrentRecord, phase: &CarrierPhase) -> Result<QuadraturePair> {
    rec.check()?;
    if phase.len != rec.len() {
        return Err(Error::validation(
            "demodulate",
            format!("phase track has {} samples, record has {}", phase.len, rec.len()),
        ));
    }
    let mut a = Vec::with_capacity(rec.len());
    let mut b = Vec::with_capacity(rec.len());
    for k in 0..rec.len() {
        let (s, c) = phase.excursion_at(k).sin_cos();
        let (si, sq) = (rec.sideband_i[k] as f64, rec.sideband_q[k] as f64);
        // z = s e^{−iφ} = x_I − i x_Q
        let re = si * c + sq * s;
        let im = sq * c - si * s;
        a.push(re);
        b.push(-im);
    }
    QuadraturePair::new(rec.sample_rate(), rec.meta.omega_center(), a, b, rec.meta.lo_sign())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowpass_has_unit_dc_gain_and_rejects_stopband() {
        let h = lowpass_taps(1e3, 1e5);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let resp = |f: f64| -> f64 {
            h.iter()
                .enumerate()
                .map(|(k, &t)| Complex64::from_polar(t, -std::f64::consts::TAU * f * k as f64 / 1e5))
                .sum::<Complex64>()
                .norm()
        };
        assert!(resp(3e3) < 1e-3);
        assert!((resp(100.0) - 1.0).abs() < 1e-3);
    }
}

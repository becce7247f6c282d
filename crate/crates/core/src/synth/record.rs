use serde::{Deserialize, Serialize};

use super::baseband::{model_table, synth_from_table, SynthConfig};
use super::drift::Drift;
use super::electronics::{filter_sidebands, ElectronicResponse};
use super::stream::{default_artifact_seed, stream, CARRIER_NOISE};
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::model::{DeviceParams, ProbeParams};
use rand_distr::{Distribution, StandardNormal};

/// Beat-note channel settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierConfig {
    pub amplitude: f64,
    /// Carrier-to-noise ratio in a 1 kHz band, dB.
    pub snr_db: f64,
    /// RMS of the slow phase drift over the record, rad.
    pub drift_rms: f64,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        CarrierConfig {
            amplitude: 1.0,
            snr_db: 60.0,
            drift_rms: 1.0,
        }
    }
}

impl CarrierConfig {
    /// Per-sample standard deviation of the white noise on the carrier channel.
    pub fn noise_sigma(&self, sample_rate: f64) -> f64 {
        let snr = 10f64.powf(self.snr_db / 10.0);
        (self.amplitude * self.amplitude * sample_rate / (4.0 * 1e3 * snr)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum RecordKind {
    Signal,
    /// No optomechanical coupling: flat vacuum noise in both quadratures.
    ShotNoise,
    /// Phase-quadrature tones (rad/s) of equal amplitude and zero phase on
    /// top of vacuum noise.
    PhaseComb { tones: Vec<f64>, amplitude: f64 },
}

/// Imperfections applied after synthesis, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Artifact {
    Electronics(ElectronicResponse),
    Nonlinearity { coeff: f64 },
}

/// Everything needed to regenerate a record bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub kind: RecordKind,
    pub device: DeviceParams,
    pub probe: ProbeParams,
    pub synth: SynthConfig,
    pub carrier: CarrierConfig,
    pub artifact_seed: u64,
    pub artifacts: Vec<Artifact>,
}

impl RecordMeta {
    pub fn lo_sign(&self) -> i8 {
        self.probe.lo_sign()
    }

    pub fn sample_rate(&self) -> f64 {
        self.synth.sample_rate
    }

    /// Angular frequency mapped to a quarter of the sample rate.
    pub fn omega_center(&self) -> f64 {
        self.device.omega_m
    }

    /// Beat-note angular frequency |Δ_LO|.
    pub fn carrier_omega(&self) -> f64 {
        self.probe.delta_lo.abs()
    }

    pub fn segment_len(&self) -> usize {
        self.synth.segment_len_for(self.device.gamma_m)
    }

    pub fn electronics(&self) -> Option<&ElectronicResponse> {
        self.artifacts.iter().find_map(|a| match a {
            Artifact::Electronics(r) => Some(r),
            _ => None,
        })
    }
}

/// Photodetector capture: beat-note carrier plus the two mixer outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotocurrentRecord {
    pub carrier: Vec<f32>,
    pub sideband_i: Vec<f32>,
    pub sideband_q: Vec<f32>,
    pub meta: RecordMeta,
}

impl PhotocurrentRecord {
    pub fn sample_rate(&self) -> f64 {
        self.meta.sample_rate()
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.carrier.len();
        if self.sideband_i.len() != n || self.sideband_q.len() != n {
            return Err(Error::validation("record", "channel lengths differ"));
        }
        Ok(())
    }

    /// Rebuilds a record from its metadata alone.
    pub fn regenerate(meta: &RecordMeta) -> Result<Self> {
        let mut rec = build_clean(meta)?;
        let artifacts = meta.artifacts.clone();
        for a in &artifacts {
            rec = match a {
                Artifact::Electronics(r) => inject_electronic_dispersion(&rec, r)?,
                Artifact::Nonlinearity { coeff } => inject_detector_nonlinearity(&rec, *coeff)?,
            };
        }
        Ok(rec)
    }

    /// Carrier phase excursion (drift plus static offset) used at synthesis,
    /// for tests of the tracking loop.
    pub fn true_carrier_phase(&self) -> Vec<f64> {
        let m = &self.meta;
        let drift = Drift::new(m.artifact_seed, m.synth.duration, m.sample_rate(), self.len(), m.carrier.drift_rms);
        (0..self.len()).map(|k| drift.at(k as f64 / m.sample_rate())).collect()
    }
}

fn check_capture(meta: &RecordMeta) -> Result<()> {
    meta.device.validate()?;
    meta.probe.validate()?;
    meta.synth.validate()?;
    let c = &meta.carrier;
    if !(c.amplitude > 0.0) || !c.snr_db.is_finite() || !(c.drift_rms >= 0.0) {
        return Err(Error::validation("carrier", "amplitude must be positive, snr finite, drift >= 0"));
    }
    if meta.probe.delta_lo == 0.0 {
        return Err(Error::validation("probe.delta_lo", "must be non-zero"));
    }
    if meta.sample_rate() <= 4.0 * meta.carrier_omega() / TWO_PI {
        return Err(Error::validation(
            "synth.sample_rate",
            format!("must exceed 4·|Δ_LO|/2π = {:.6e} Hz", 4.0 * meta.carrier_omega() / TWO_PI),
        ));
    }
    Ok(())
}

fn build_clean(meta: &RecordMeta) -> Result<PhotocurrentRecord> {
    check_capture(meta)?;
    let fs = meta.sample_rate();
    let n = meta.synth.n_samples();
    let seg = meta.segment_len();
    let center = meta.omega_center();

    let probe = match meta.kind {
        RecordKind::Signal => meta.probe,
        _ => ProbeParams {
            nbar: 0.0,
            ..meta.probe
        },
    };
    let table = model_table(&meta.device, &probe, center, fs, seg)?;
    let (u, mut v) = synth_from_table(&table, seg, n, meta.synth.seed);

    if let RecordKind::PhaseComb { tones, amplitude } = &meta.kind {
        for &w in tones {
            let w_if = w - center + TWO_PI * fs / 4.0;
            if !(w_if > 0.0 && w_if < std::f64::consts::PI * fs) {
                return Err(Error::validation("comb.tones", format!("{w:.6e} rad/s outside the capture band")));
            }
            for (k, x) in v.iter_mut().enumerate() {
                *x += amplitude * (w_if * k as f64 / fs).cos();
            }
        }
    }

    let sign = meta.lo_sign() as f64;
    let drift = Drift::new(meta.artifact_seed, meta.synth.duration, fs, n, meta.carrier.drift_rms);
    let sigma = meta.carrier.noise_sigma(fs);
    let mut noise = stream(meta.artifact_seed, 0, CARRIER_NOISE);
    let wc = meta.carrier_omega();
    let amp = meta.carrier.amplitude;

    let mut carrier = Vec::with_capacity(n);
    let mut si = Vec::with_capacity(n);
    let mut sq = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / fs;
        let phi = drift.at(t);
        let e: f64 = StandardNormal.sample(&mut noise);
        carrier.push((amp * (wc * t + phi).cos() + sigma * e) as f32);
        // (x_I − i·sign·x_Q) e^{iφ}
        let (s, c) = phi.sin_cos();
        let (a, b) = (u[k], -sign * v[k]);
        si.push((a * c - b * s) as f32);
        sq.push((a * s + b * c) as f32);
    }
    Ok(PhotocurrentRecord {
        carrier,
        sideband_i: si,
        sideband_q: sq,
        meta: RecordMeta {
            artifacts: vec![],
            ..meta.clone()
        },
    })
}

/// Options shared by the record generators.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOptions {
    pub synth: SynthConfig,
    pub carrier: CarrierConfig,
    /// Seed of drift and carrier noise; by default derived from the physical
    /// seed and the LO sign.
    pub artifact_seed: Option<u64>,
}

impl RecordOptions {
    pub fn new(synth: SynthConfig) -> Self {
        RecordOptions {
            synth,
            carrier: CarrierConfig::default(),
            artifact_seed: None,
        }
    }

    fn meta(&self, kind: RecordKind, p: &DeviceParams, pr: &ProbeParams) -> RecordMeta {
        RecordMeta {
            kind,
            device: *p,
            probe: *pr,
            synth: self.synth.clone(),
            carrier: self.carrier.clone(),
            artifact_seed: self
                .artifact_seed
                .unwrap_or_else(|| default_artifact_seed(self.synth.seed, pr.lo_sign())),
            artifacts: vec![],
        }
    }
}

/// Heterodyne capture of the optomechanical sidebands. The LO sign of `pr`
/// decides the sign with which the phase quadrature appears.
pub fn synth_heterodyne_record(
    p: &DeviceParams,
    pr: &ProbeParams,
    electronics: Option<&ElectronicResponse>,
    opts: &RecordOptions,
) -> Result<PhotocurrentRecord> {
    let rec = build_clean(&opts.meta(RecordKind::Signal, p, pr))?;
    match electronics {
        Some(r) => inject_electronic_dispersion(&rec, r),
        None => Ok(rec),
    }
}

/// Record without optomechanical coupling, for gain calibration.
pub fn shot_noise_record(p: &DeviceParams, pr: &ProbeParams, opts: &RecordOptions) -> Result<PhotocurrentRecord> {
    build_clean(&opts.meta(RecordKind::ShotNoise, p, pr))
}

/// Record with pure phase-quadrature tones at `tones` (rad/s), for phase
/// calibration.
pub fn phase_comb_record(
    p: &DeviceParams,
    pr: &ProbeParams,
    tones: &[f64],
    amplitude: f64,
    opts: &RecordOptions,
) -> Result<PhotocurrentRecord> {
    if tones.is_empty() {
        return Err(Error::validation("comb.tones", "empty"));
    }
    let kind = RecordKind::PhaseComb {
        tones: tones.to_vec(),
        amplitude,
    };
    build_clean(&opts.meta(kind, p, pr))
}

/// Passes the sideband channels through `resp`. Rejected if the record
/// already carries an electronic response.
pub fn inject_electronic_dispersion(rec: &PhotocurrentRecord, resp: &ElectronicResponse) -> Result<PhotocurrentRecord> {
    if rec.meta.electronics().is_some() {
        return Err(Error::validation("electronics", "response already applied to this record"));
    }
    let fs = rec.sample_rate();
    let c = rec.meta.omega_center();
    resp.validate(c - std::f64::consts::PI * fs / 2.0, c + std::f64::consts::PI * fs / 2.0)?;
    let mut out = rec.clone();
    out.meta.artifacts.push(Artifact::Electronics(resp.clone()));
    if resp.is_identity() {
        return Ok(out);
    }
    filter_sidebands(&mut out.sideband_i, &mut out.sideband_q, resp, c, fs, rec.meta.segment_len());
    Ok(out)
}

/// Quadratic detector response: each sideband channel s becomes
/// s + q(2ℓs + s²), with ℓ the beat-note channel. The cross term writes
/// copies of the sidebands at ±|Δ_LO| offsets, (qC)² below the original.
pub fn inject_detector_nonlinearity(rec: &PhotocurrentRecord, coeff: f64) -> Result<PhotocurrentRecord> {
    if !coeff.is_finite() {
        return Err(Error::validation("nonlinearity", "coefficient must be finite"));
    }
    let mut out = rec.clone();
    out.meta.artifacts.push(Artifact::Nonlinearity { coeff });
    if coeff == 0.0 {
        return Ok(out);
    }
    let n = rec.len().max(1) as f64;
    let ms = |x: &[f32]| x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / n;
    let (lc, ls) = (ms(&rec.carrier), ms(&rec.sideband_i).max(ms(&rec.sideband_q)));
    // Fraction of sideband power moved by the distortion.
    let effect = coeff * coeff * (4.0 * lc + 2.0 * ls);
    if effect >= 0.01 {
        return Err(Error::validation(
            "nonlinearity",
            format!("coefficient too large: {:.2}% of sideband power redistributed", 100.0 * effect),
        ));
    }
    for ch in [&mut out.sideband_i, &mut out.sideband_q] {
        for (s, &l) in ch.iter_mut().zip(&rec.carrier) {
            let (x, l) = (*s as f64, l as f64);
            *s = (x + coeff * (2.0 * l * x + x * x)) as f32;
        }
    }
    Ok(out)
}

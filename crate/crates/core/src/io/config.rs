//! Run configuration: a flat `key: value unit` text format.
//!
//! Every physical quantity carries its unit; "Hz" on an angular rate means
//! cycles per second and is converted to rad/s on input. Keys are dotted
//! (`device.kappa`), `#` starts a comment, unknown keys are rejected and
//! missing keys take their defaults. The canonical form lists every key in
//! sorted order with SI values, and its SHA-256 is the config hash.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::units::{format_quantity, parse_quantity, Kind};
use crate::error::{Error, Result};
use crate::model::{DeviceParams, ProbeParams};
use crate::synth::{CarrierConfig, ElectronicResponse, SynthConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermoMethod {
    Ratio,
    Coth,
    Both,
}

impl ThermoMethod {
    fn parse(key: &str, s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(ThermoMethod::Ratio),
            "coth" => Ok(ThermoMethod::Coth),
            "both" => Ok(ThermoMethod::Both),
            _ => Err(Error::validation(key, format!("unknown method `{s}` (ratio, coth, both)"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ThermoMethod::Ratio => "ratio",
            ThermoMethod::Coth => "coth",
            ThermoMethod::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    /// Probe settings; `delta_lo` holds |Δ_LO|, both signs are always run.
    pub probe: ProbeParams,
    pub cooperativity: f64,
    pub duration: f64,
    /// 0 selects the default for the linewidth.
    pub sample_rate: f64,
    pub seed: u64,
    pub drift_rms: f64,
    pub carrier_snr_db: f64,
    /// Group delay of an injected electronic phase dispersion, s (0 = none).
    pub electronics_delay: f64,
    pub nonlinearity: f64,
    pub comb_tones: usize,
    pub comb_amplitude: f64,
    /// Record pairs per cooperativity (a sequence for Allan analysis).
    pub repeats: usize,
    pub window: String,
    /// 0 selects the default for the linewidth.
    pub segment_len: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_step: f64,
    /// Fit band half-width in linewidths.
    pub band: f64,
    /// Excluded (lo, hi) ranges, rad/s.
    pub exclusions: Vec<(f64, f64)>,
    pub calibrate: bool,
    pub gain_order: usize,
    pub phase_order: usize,
    pub method: ThermoMethod,
    /// Extra cooperativities for a zero-power extrapolation.
    pub power_sweep: Vec<f64>,
    /// Self-heating per unit cooperativity, K.
    pub heating: f64,
    pub out_dir: String,
    pub formats: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let device = DeviceParams::default();
        let probe = ProbeParams::default();
        RunConfig {
            device,
            cooperativity: device.cooperativity(probe.nbar),
            probe,
            duration: 0.05,
            sample_rate: 0.0,
            seed: 1,
            drift_rms: 1.0,
            carrier_snr_db: 60.0,
            electronics_delay: 0.0,
            nonlinearity: 0.0,
            comb_tones: 5,
            comb_amplitude: 0.05,
            repeats: 1,
            window: "hann".into(),
            segment_len: 0,
            phi_min: -0.008,
            phi_max: 0.008,
            phi_step: 0.002,
            band: 5.0,
            exclusions: vec![],
            calibrate: true,
            gain_order: 2,
            phase_order: 1,
            method: ThermoMethod::Both,
            power_sweep: vec![],
            heating: 0.0,
            out_dir: "out".into(),
            formats: vec!["json".into(), "tsv".into()],
        }
    }
}

const KEYS: &[(&str, Kind)] = &[
    ("analysis.band", Kind::Dimensionless),
    ("analysis.calibrate", Kind::Dimensionless),
    ("analysis.exclusions", Kind::AngularRate),
    ("analysis.gain_order", Kind::Dimensionless),
    ("analysis.phase_order", Kind::Dimensionless),
    ("analysis.phi_max", Kind::Angle),
    ("analysis.phi_min", Kind::Angle),
    ("analysis.phi_step", Kind::Angle),
    ("analysis.segment_len", Kind::Dimensionless),
    ("analysis.window", Kind::Dimensionless),
    ("device.g0", Kind::AngularRate),
    ("device.gamma_m", Kind::AngularRate),
    ("device.kappa", Kind::AngularRate),
    ("device.kappa_out", Kind::AngularRate),
    ("device.mass", Kind::Mass),
    ("device.omega_m", Kind::AngularRate),
    ("outputs.directory", Kind::Dimensionless),
    ("outputs.formats", Kind::Dimensionless),
    ("probe.cooperativity", Kind::Dimensionless),
    ("probe.delta_lo", Kind::AngularRate),
    ("probe.delta_p", Kind::AngularRate),
    ("probe.efficiency", Kind::Dimensionless),
    ("probe.temperature", Kind::Temperature),
    ("synth.carrier_snr", Kind::Decibel),
    ("synth.comb_amplitude", Kind::Dimensionless),
    ("synth.comb_tones", Kind::Dimensionless),
    ("synth.drift_rms", Kind::Angle),
    ("synth.duration", Kind::Time),
    ("synth.electronics_delay", Kind::Time),
    ("synth.nonlinearity", Kind::Dimensionless),
    ("synth.repeats", Kind::Dimensionless),
    ("synth.sample_rate", Kind::SampleRate),
    ("synth.seed", Kind::Dimensionless),
    ("thermometry.heating", Kind::Temperature),
    ("thermometry.method", Kind::Dimensionless),
    ("thermometry.power_sweep", Kind::Dimensionless),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::validation(key, format!("`{v}` is not a non-negative integer")))
}

fn parse_list(v: &str) -> Vec<&str> {
    if v == "none" {
        return vec![];
    }
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn fmt_list(items: &[String]) -> String {
    if items.is_empty() {
        "none".into()
    } else {
        items.join(", ")
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once(':').ok_or_else(|| {
                Error::validation(format!("line {}", lineno + 1), "expected `key: value`")
            })?;
            let k = k.trim();
            if kind_of(k).is_none() {
                return Err(Error::validation(k, "unknown key"));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::validation(k, "given more than once"));
            }
        }
        let mut c = RunConfig::default();
        let mut kappa_out_ratio = Some(c.device.escape_efficiency());
        for (k, v) in &entries {
            c.set(k, v)?;
            if k == "device.kappa_out" {
                kappa_out_ratio = None;
            }
        }
        // κ_out follows κ unless given explicitly
        if let Some(r) = kappa_out_ratio {
            c.device.kappa_out = r * c.device.kappa;
        }
        c.probe.nbar = c.device.nbar_for_cooperativity(c.cooperativity);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, k: &str, v: &str) -> Result<()> {
        let kind = kind_of(k).expect("checked key");
        let q = |v: &str| parse_quantity(k, v, kind);
        match k {
            "analysis.band" => self.band = q(v)?,
            "analysis.calibrate" => {
                self.calibrate = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(Error::validation(k, "expected true or false")),
                }
            }
            "analysis.exclusions" => {
                self.exclusions = parse_list(v)
                    .into_iter()
                    .map(|r| {
                        let (a, b) = r
                            .split_once("..")
                            .ok_or_else(|| Error::validation(k, format!("range `{r}` lacks `..`")))?;
                        Ok((q(a)?, q(b)?))
                    })
                    .collect::<Result<_>>()?
            }
            "analysis.gain_order" => self.gain_order = parse_usize(k, v)?,
            "analysis.phase_order" => self.phase_order = parse_usize(k, v)?,
            "analysis.phi_max" => self.phi_max = q(v)?,
            "analysis.phi_min" => self.phi_min = q(v)?,
            "analysis.phi_step" => self.phi_step = q(v)?,
            "analysis.segment_len" => self.segment_len = parse_usize(k, v)?,
            "analysis.window" => self.window = v.to_string(),
            "device.g0" => self.device.g0 = q(v)?,
            "device.gamma_m" => self.device.gamma_m = q(v)?,
            "device.kappa" => self.device.kappa = q(v)?,
            "device.kappa_out" => self.device.kappa_out = q(v)?,
            "device.mass" => self.device.m = q(v)?,
            "device.omega_m" => self.device.omega_m = q(v)?,
            "outputs.directory" => self.out_dir = v.to_string(),
            "outputs.formats" => self.formats = parse_list(v).into_iter().map(String::from).collect(),
            "probe.cooperativity" => self.cooperativity = q(v)?,
            "probe.delta_lo" => self.probe.delta_lo = q(v)?.abs(),
            "probe.delta_p" => self.probe.delta_p = q(v)?,
            "probe.efficiency" => self.probe.eps = q(v)?,
            "probe.temperature" => self.probe.t_bath = q(v)?,
            "synth.carrier_snr" => self.carrier_snr_db = q(v)?,
            "synth.comb_amplitude" => self.comb_amplitude = q(v)?,
            "synth.comb_tones" => self.comb_tones = parse_usize(k, v)?,
            "synth.drift_rms" => self.drift_rms = q(v)?,
            "synth.duration" => self.duration = q(v)?,
            "synth.electronics_delay" => self.electronics_delay = q(v)?,
            "synth.nonlinearity" => self.nonlinearity = q(v)?,
            "synth.repeats" => self.repeats = parse_usize(k, v)?,
            "synth.sample_rate" => self.sample_rate = q(v)?,
            "synth.seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::validation(k, format!("`{v}` is not a 64-bit unsigned integer")))?
            }
            "thermometry.heating" => self.heating = q(v)?,
            "thermometry.method" => self.method = ThermoMethod::parse(k, v)?,
            "thermometry.power_sweep" => {
                self.power_sweep = parse_list(v).into_iter().map(q).collect::<Result<_>>()?
            }
            _ => unreachable!("key table and setter out of sync: {k}"),
        }
        Ok(())
    }
}

impl RunConfig {
    /// Every key, sorted, SI values with units; parses back to `self`.
    pub fn canonical(&self) -> String {
        let q = |k: &str, v: f64| format_quantity(v, kind_of(k).expect("known key"));
        let d = &self.device;
        let p = &self.probe;
        let excl: Vec<String> = self
            .exclusions
            .iter()
            .map(|(a, b)| format!("{}..{}", q("analysis.exclusions", *a), q("analysis.exclusions", *b)))
            .collect();
        let sweep: Vec<String> = self.power_sweep.iter().map(|c| format!("{c:?}")).collect();
        let entries: Vec<(&str, String)> = vec![
            ("analysis.band", q("analysis.band", self.band)),
            ("analysis.calibrate", self.calibrate.to_string()),
            ("analysis.exclusions", fmt_list(&excl)),
            ("analysis.gain_order", self.gain_order.to_string()),
            ("analysis.phase_order", self.phase_order.to_string()),
            ("analysis.phi_max", q("analysis.phi_max", self.phi_max)),
            ("analysis.phi_min", q("analysis.phi_min", self.phi_min)),
            ("analysis.phi_step", q("analysis.phi_step", self.phi_step)),
            ("analysis.segment_len", self.segment_len.to_string()),
            ("analysis.window", self.window.clone()),
            ("device.g0", q("device.g0", d.g0)),
            ("device.gamma_m", q("device.gamma_m", d.gamma_m)),
            ("device.kappa", q("device.kappa", d.kappa)),
            ("device.kappa_out", q("device.kappa_out", d.kappa_out)),
            ("device.mass", q("device.mass", d.m)),
            ("device.omega_m", q("device.omega_m", d.omega_m)),
            ("outputs.directory", self.out_dir.clone()),
            ("outputs.formats", fmt_list(&self.formats)),
            ("probe.cooperativity", q("probe.cooperativity", self.cooperativity)),
            ("probe.delta_lo", q("probe.delta_lo", p.delta_lo)),
            ("probe.delta_p", q("probe.delta_p", p.delta_p)),
            ("probe.efficiency", q("probe.efficiency", p.eps)),
            ("probe.temperature", q("probe.temperature", p.t_bath)),
            ("synth.carrier_snr", q("synth.carrier_snr", self.carrier_snr_db)),
            ("synth.comb_amplitude", q("synth.comb_amplitude", self.comb_amplitude)),
            ("synth.comb_tones", self.comb_tones.to_string()),
            ("synth.drift_rms", q("synth.drift_rms", self.drift_rms)),
            ("synth.duration", q("synth.duration", self.duration)),
            ("synth.electronics_delay", q("synth.electronics_delay", self.electronics_delay)),
            ("synth.nonlinearity", q("synth.nonlinearity", self.nonlinearity)),
            ("synth.repeats", self.repeats.to_string()),
            ("synth.sample_rate", q("synth.sample_rate", self.sample_rate)),
            ("synth.seed", self.seed.to_string()),
            ("thermometry.heating", q("thermometry.heating", self.heating)),
            ("thermometry.method", self.method.name().to_string()),
            ("thermometry.power_sweep", fmt_list(&sweep)),
        ];
        debug_assert_eq!(entries.len(), KEYS.len());
        let mut s = String::new();
        for (k, v) in entries {
            s.push_str(k);
            s.push_str(": ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    /// Hex SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.probe.validate()?;
        if !(self.cooperativity.is_finite() && self.cooperativity >= 0.0) {
            return Err(Error::validation("probe.cooperativity", "must be finite and >= 0"));
        }
        for &c in &self.power_sweep {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::validation("thermometry.power_sweep", "entries must be > 0"));
            }
        }
        if self.repeats == 0 {
            return Err(Error::validation("synth.repeats", "must be at least 1"));
        }
        if !(self.phi_step > 0.0 && self.phi_max > self.phi_min) {
            return Err(Error::validation("analysis.phi_step", "need phi_min < phi_max and phi_step > 0"));
        }
        if self.phi_grid().len() < 3 {
            return Err(Error::validation("analysis.phi_step", "grid needs at least 3 angles"));
        }
        if !(self.band > 0.0) {
            return Err(Error::validation("analysis.band", "must be > 0"));
        }
        if crate::dsp::Window::by_name(&self.window).is_none() {
            return Err(Error::validation("analysis.window", format!("unknown window `{}`", self.window)));
        }
        for f in &self.formats {
            if !matches!(f.as_str(), "json" | "tsv" | "svg") {
                return Err(Error::validation("outputs.formats", format!("unknown format `{f}`")));
            }
        }
        if !(self.comb_amplitude > 0.0) {
            return Err(Error::validation("synth.comb_amplitude", "must be > 0"));
        }
        if self.calibrate && self.comb_tones < self.phase_order + 1 {
            return Err(Error::validation("synth.comb_tones", "fewer tones than phase polynomial terms"));
        }
        self.synth_config(0)?.validate()?;
        Ok(())
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        let n = ((self.phi_max - self.phi_min) / self.phi_step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.phi_min + i as f64 * self.phi_step).collect()
    }

    /// Cooperativities to run: the nominal one first, then the sweep.
    pub fn cooperativities(&self) -> Vec<f64> {
        let mut v = vec![self.cooperativity];
        v.extend(self.power_sweep.iter().copied().filter(|&c| c != self.cooperativity));
        v
    }

    /// Probe at cooperativity `c` and LO sign `sign`, bath heated by the
    /// configured self-heating.
    pub fn probe_for(&self, c: f64, sign: i8) -> ProbeParams {
        let mut p = self.probe.with_lo_sign(sign);
        p.nbar = self.device.nbar_for_cooperativity(c);
        p.t_bath = self.probe.t_bath + self.heating * c;
        p
    }

    /// Synthesis settings of record pair `index`.
    pub fn synth_config(&self, index: u64) -> Result<SynthConfig> {
        let mut s = SynthConfig::new(&self.device, self.duration, self.seed.wrapping_add(index));
        if self.sample_rate > 0.0 {
            s.sample_rate = self.sample_rate;
        }
        Ok(s)
    }

    pub fn carrier(&self) -> CarrierConfig {
        CarrierConfig {
            amplitude: 1.0,
            snr_db: self.carrier_snr_db,
            drift_rms: self.drift_rms,
        }
    }

    pub fn electronics(&self) -> Option<ElectronicResponse> {
        (self.electronics_delay != 0.0)
            .then(|| ElectronicResponse::linear_phase(self.device.omega_m, self.electronics_delay))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;

    #[test]
    fn empty_text_is_default() {
        let c = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c.canonical(), RunConfig::default().canonical());
    }

    #[test]
    fn canonical_is_a_fixed_point() {
        let text = "probe.temperature: 22 K\ndevice.kappa: 12 GHz\nanalysis.exclusions: 3.62 GHz..3.6201 GHz\nthermometry.power_sweep: 0.02, 0.05\n";
        let c = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&c.canonical()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.canonical(), again.canonical());
        assert_eq!(c.hash(), again.hash());
        assert!((c.device.kappa - TWO_PI * 12e9).abs() < 1e-3);
        // κ_out follows κ when not given
        assert!((c.device.escape_efficiency() - 0.38).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_content_not_layout() {
        let a = RunConfig::parse("synth.seed: 4\nprobe.temperature: 10 K\n").unwrap();
        let b = RunConfig::parse("probe.temperature: 10000 mK   # same\nsynth.seed: 4").unwrap();
        let c = RunConfig::parse("synth.seed: 5\nprobe.temperature: 10 K\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn field_level_errors() {
        let field = |text: &str| match RunConfig::parse(text) {
            Err(Error::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        };
        assert_eq!(field("device.kappa_out: 20 GHz\n"), "device.kappa_out");
        assert_eq!(field("device.kappa: 10\n"), "device.kappa");
        assert_eq!(field("probe.colour: red\n"), "probe.colour");
        assert_eq!(field("synth.seed: 1\nsynth.seed: 2\n"), "synth.seed");
        assert_eq!(field("analysis.window: kaiser\n"), "analysis.window");
        assert_eq!(field("synth.duration: 100 s\n"), "synth.duration");
    }

    #[test]
    fn derived_settings() {
        let c = RunConfig::parse("thermometry.heating: 100 K\nprobe.cooperativity: 0.05\nthermometry.power_sweep: 0.1").unwrap();
        let pm = c.probe_for(0.1, -1);
        assert_eq!(pm.lo_sign(), -1);
        assert!((pm.t_bath - 304.0).abs() < 1e-9);
        assert_eq!(c.cooperativities(), vec![0.05, 0.1]);
        assert_eq!(c.phi_grid().len(), 9);
        assert!(c.electronics().is_none());
    }
}

//! The pipeline stages behind the command-line front end.
//!
//! Directory layout under the output root:
//!
//! ```text
//! config.txt                     canonical configuration
//! records/sig_c{i}_r{j}_{plus,minus}.omr, cal_shot.omr, cal_comb.omr
//! spectra/set_c{i}_r{j}_{plus,minus}.json, quantum_c{i}_r{j}.json, thermal_c{i}_r{j}.json
//! report/thermometry.json, report/estimates.tsv
//! plots/*.svg
//! manifest_{simulate,analyze,thermometry}.json
//! ```

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use serde::{Deserialize, Serialize};

use crate::dsp::{
    calibrate_gain, calibrate_phase, coth_input, combine_lo_signs, demodulate, estimate_spectral_matrix, estimated_response,
    scan_rotation_null, track_carrier_phase, CrossSpectraSet, GainCalibration, PhaseCalibration, SpectralMatrix,
    TrackConfig, WelchConfig, Window,
};
use crate::error::{Error, Result};
use crate::fit::{
    allan_deviation, extrapolate_zero_power, fit_dispersive, fit_joint, fit_lorentzian, temperature_from_coth, temperature_from_ratio, AllanCurve,
    FitBand, FitResult, RatioTemperatures, Shape, TemperatureEstimate, ZeroPowerFit,
};
use crate::io::{
    read_record, write_json, Plot, Style, write_record, write_tsv, Document, Manifest, RunConfig, ThermoMethod, MANIFEST_SCHEMA,
    REPORT_SCHEMA, SET_SCHEMA, SPECTRUM_SCHEMA,
};
use crate::model::ComplexSpectrum;
use crate::synth::{
    inject_detector_nonlinearity, inject_electronic_dispersion, phase_comb_record, shot_noise_record,
    synth_heterodyne_record, PhotocurrentRecord, RecordOptions,
};

pub fn sign_name(sign: i8) -> &'static str {
    if sign < 0 {
        "minus"
    } else {
        "plus"
    }
}

pub fn signal_name(ci: usize, ri: usize, sign: i8) -> String {
    format!("sig_c{ci}_r{ri}_{}.omr", sign_name(sign))
}

/// Comb tone frequencies spread over 80 % of the fit band.
pub fn comb_tones(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.comb_tones.max(1);
    let half = 0.8 * cfg.band * cfg.device.gamma_m;
    if n == 1 {
        return vec![cfg.device.omega_m];
    }
    (0..n)
        .map(|k| cfg.device.omega_m - half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect()
}

fn options(cfg: &RunConfig, seed_index: u64) -> Result<RecordOptions> {
    let mut o = RecordOptions::new(cfg.synth_config(seed_index)?);
    o.carrier = cfg.carrier();
    Ok(o)
}

fn finish(cfg: &RunConfig, rec: PhotocurrentRecord) -> Result<PhotocurrentRecord> {
    let rec = match cfg.electronics() {
        Some(r) => inject_electronic_dispersion(&rec, &r)?,
        None => rec,
    };
    if cfg.nonlinearity != 0.0 {
        inject_detector_nonlinearity(&rec, cfg.nonlinearity)
    } else {
        Ok(rec)
    }
}

/// Seed offset of the calibration records, far from the signal seeds.
const CAL_SEED_OFFSET: u64 = 1 << 40;

fn write_manifest(out: &Path, stage: &str, m: &Manifest, hash: &str) -> Result<()> {
    write_json(&out.join(format!("manifest_{stage}.json")), MANIFEST_SCHEMA, hash, m)
}

/// Writes signal records for both LO signs (per cooperativity and repeat)
/// plus shot-noise and phase-comb calibration records.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let hash = cfg.hash();
    let dir = out.join("records");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let cfg_path = out.join("config.txt");
    std::fs::write(&cfg_path, cfg.canonical()).map_err(|e| Error::io(&cfg_path, e))?;
    let mut manifest = Manifest::new(cfg.canonical());
    manifest.add(out, &cfg_path, "config")?;

    for (ci, &c) in cfg.cooperativities().iter().enumerate() {
        for ri in 0..cfg.repeats {
            let pair = (ci * cfg.repeats + ri) as u64;
            for sign in [1i8, -1] {
                let pr = cfg.probe_for(c, sign);
                let idx = 2 * pair + (sign < 0) as u64;
                let rec = synth_heterodyne_record(&cfg.device, &pr, None, &options(cfg, idx)?)?;
                let rec = finish(cfg, rec)?;
                let path = dir.join(signal_name(ci, ri, sign));
                write_record(&path, &rec, &hash)?;
                manifest.add(out, &path, "record")?;
                log::info!("wrote {}", path.display());
            }
        }
    }
    // calibrations are taken with the positive LO sign
    let pr = cfg.probe_for(cfg.cooperativity, 1);
    let shot = finish(cfg, shot_noise_record(&cfg.device, &pr, &options(cfg, CAL_SEED_OFFSET)?)?)?;
    let path = dir.join("cal_shot.omr");
    write_record(&path, &shot, &hash)?;
    manifest.add(out, &path, "record")?;
    let comb = phase_comb_record(
        &cfg.device,
        &pr,
        &comb_tones(cfg),
        cfg.comb_amplitude,
        &options(cfg, CAL_SEED_OFFSET + 1)?,
    )?;
    let comb = finish(cfg, comb)?;
    let path = dir.join("cal_comb.omr");
    write_record(&path, &comb, &hash)?;
    manifest.add(out, &path, "record")?;
    write_manifest(out, "simulate", &manifest, &hash)?;
    Ok(manifest)
}

pub fn welch_config(cfg: &RunConfig, sample_rate: f64) -> Result<WelchConfig> {
    let mut w = WelchConfig::for_linewidth(sample_rate, cfg.device.gamma_m);
    w.window = Window::by_name(&cfg.window)
        .ok_or_else(|| Error::validation("analysis.window", format!("unknown window `{}`", cfg.window)))?;
    if cfg.segment_len > 0 {
        w.segment_len = cfg.segment_len;
    }
    Ok(w)
}

pub fn fit_band(cfg: &RunConfig) -> FitBand {
    let mut b = FitBand::around(cfg.device.omega_m, cfg.device.gamma_m, cfg.band);
    b.exclude = cfg.exclusions.clone();
    b
}

/// Raw (unnormalized) spectral matrix of a record after carrier tracking
/// and demodulation.
pub fn record_matrix(cfg: &RunConfig, rec: &PhotocurrentRecord) -> Result<SpectralMatrix> {
    let track = track_carrier_phase(rec, &TrackConfig::default())?;
    let pair = demodulate(rec, &track)?;
    estimate_spectral_matrix(&pair, &welch_config(cfg, rec.sample_rate())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gain: GainCalibration,
    pub phase: PhaseCalibration,
}

pub fn calibrate(cfg: &RunConfig, records: &Path) -> Result<Calibration> {
    let (_, shot) = read_record(&records.join("cal_shot.omr"))?;
    let (_, comb) = read_record(&records.join("cal_comb.omr"))?;
    let gain = calibrate_gain(&record_matrix(cfg, &shot)?, cfg.device.omega_m, cfg.gain_order)?;
    let track = track_carrier_phase(&comb, &TrackConfig::default())?;
    let pair = demodulate(&comb, &track)?;
    let phase = calibrate_phase(&pair, &comb_tones(cfg), cfg.device.omega_m, Some(cfg.phase_order))?;
    Ok(Calibration { gain, phase })
}

/// Normalized spectral matrix and φ-scan of one signal record.
pub fn analyze_record(
    cfg: &RunConfig,
    rec: &PhotocurrentRecord,
    cal: Option<&Calibration>,
) -> Result<CrossSpectraSet> {
    let mut m = record_matrix(cfg, rec)?;
    if let Some(c) = cal {
        m.correct_electronics(&estimated_response(&c.gain, &c.phase)?)?;
    }
    m.normalize_to_shot_noise(cfg.device.omega_m, cfg.device.gamma_m)?;
    scan_rotation_null(&m, &cfg.phi_grid(), &fit_band(cfg))
}

fn spectrum_rows(s: &ComplexSpectrum) -> Vec<Vec<f64>> {
    (0..s.len())
        .map(|i| {
            let sg = s.sigma.as_ref().map(|v| v[i]).unwrap_or_default();
            vec![s.freqs[i] / std::f64::consts::TAU, s.values[i].re, s.values[i].im, sg.re, sg.im]
        })
        .collect()
}

pub const SPECTRUM_COLUMNS: [(&str, &str); 5] =
    [("freq_hz", "f64"), ("re", "f64"), ("im", "f64"), ("sigma_re", "f64"), ("sigma_im", "f64")];

/// Demodulates and scans every signal record, combines the LO signs and
/// writes one quantum and one thermal spectrum per record pair.
pub fn cmd_analyze(cfg: &RunConfig, records: &Path, out: &Path, skip_calibration: bool) -> Result<Manifest> {
    cfg.validate()?;
    let hash = cfg.hash();
    if let Some(parent) = records.parent() {
        let mp = parent.join("manifest_simulate.json");
        if mp.exists() {
            let m: Manifest = Document::read(&mp)?.payload(MANIFEST_SCHEMA)?;
            m.verify(parent)?;
        }
    }
    let dir = out.join("spectra");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut manifest = Manifest::new(cfg.canonical());
    let cal = if cfg.calibrate && !skip_calibration {
        let c = calibrate(cfg, records)?;
        let path = dir.join("calibration.json");
        write_json(&path, "omthermo.calibration/1", &hash, &c)?;
        manifest.add(out, &path, "calibration")?;
        Some(c)
    } else {
        None
    };
    let tsv = cfg.formats.iter().any(|f| f == "tsv");
    for ci in 0..cfg.cooperativities().len() {
        for ri in 0..cfg.repeats {
            let mut sets: Vec<CrossSpectraSet> = vec![];
            for sign in [1i8, -1] {
                let (_, rec) = read_record(&records.join(signal_name(ci, ri, sign)))?;
                if rec.meta.lo_sign() != sign {
                    return Err(Error::format(signal_name(ci, ri, sign), "LO sign in header disagrees with file name"));
                }
                let set = analyze_record(cfg, &rec, cal.as_ref())?;
                log::info!("c{ci} r{ri} {}: phi* = {:.3e} ± {:.1e}", sign_name(sign), set.phi_star, set.sigma_phi_star);
                let path = dir.join(format!("set_c{ci}_r{ri}_{}.json", sign_name(sign)));
                write_json(&path, SET_SCHEMA, &hash, &set)?;
                manifest.add(out, &path, "cross-spectra-set")?;
                sets.push(set);
            }
            let (q, t) = combine_lo_signs(&sets[0], &sets[1])?;
            for (name, s) in [("quantum", &q), ("thermal", &t)] {
                let path = dir.join(format!("{name}_c{ci}_r{ri}.json"));
                write_json(&path, SPECTRUM_SCHEMA, &hash, s)?;
                manifest.add(out, &path, "spectrum")?;
                if tsv {
                    let path = dir.join(format!("{name}_c{ci}_r{ri}.tsv"));
                    write_tsv(&path, &hash, &SPECTRUM_COLUMNS, &spectrum_rows(s))?;
                    manifest.add(out, &path, "table")?;
                }
            }
        }
    }
    write_manifest(out, "analyze", &manifest, &hash)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub cooperativity: f64,
    pub repeat: usize,
    pub ratio: Option<RatioTemperatures>,
    pub joint_fit: Option<FitResult>,
    pub coth: Option<TemperatureEstimate>,
    /// Methods that gave no estimate, with the reason.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    /// Inverse-variance weighted mean over the repeats at the nominal power.
    pub t: f64,
    pub sigma_t: f64,
    /// Scatter-based error of the mean, when there are several repeats.
    pub sigma_t_scatter: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermometryReport {
    /// Configured bath temperature, K (before any self-heating).
    pub bath_temperature: f64,
    /// Data time per estimate (both LO signs), s.
    pub time_per_estimate: f64,
    pub estimates: Vec<Estimate>,
    pub summary: Vec<MethodSummary>,
    pub allan: Option<AllanCurve>,
    pub extrapolation: Option<ZeroPowerFit>,
}

fn soft<T>(failures: &mut Vec<String>, name: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::Numeric(_) | Error::Domain(_))) => {
            log::warn!("{name}: {e}");
            failures.push(format!("{name}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Ratio estimate with its joint fit, coth estimate, and failure messages.
pub type PairEstimate = (Option<(RatioTemperatures, FitResult)>, Option<TemperatureEstimate>, Vec<String>);

/// Both temperature estimates from one quantum/thermal pair. A method whose
/// fit is not significant is reported in the failure list instead.
pub fn estimate_temperature(
    cfg: &RunConfig,
    quantum: &ComplexSpectrum,
    thermal: &ComplexSpectrum,
) -> Result<PairEstimate> {
    let band = fit_band(cfg);
    let mut failures = vec![];
    let ratio = if cfg.method != ThermoMethod::Coth {
        soft(
            &mut failures,
            "ratio",
            fit_joint(thermal, quantum, &band).and_then(|j| Ok((temperature_from_ratio(&j, &j, j.center())?, j))),
        )?
    } else {
        None
    };
    let coth = if cfg.method != ThermoMethod::Ratio {
        soft(
            &mut failures,
            "coth",
            coth_input(quantum, thermal).and_then(|c| Ok(temperature_from_coth(&c, &band)?.0)),
        )?
    } else {
        None
    };
    Ok((ratio, coth, failures))
}

fn weighted(vals: &[(f64, f64)]) -> (f64, f64, Option<f64>) {
    let w: f64 = vals.iter().map(|(_, s)| 1.0 / (s * s)).sum();
    let m = vals.iter().map(|(t, s)| t / (s * s)).sum::<f64>() / w;
    let n = vals.len() as f64;
    let scatter = (vals.len() > 1).then(|| {
        let mean = vals.iter().map(|v| v.0).sum::<f64>() / n;
        (vals.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    });
    (m, w.sqrt().recip(), scatter)
}

/// Octave-spaced cluster sizes that leave at least `MIN_TERMS` terms.
pub fn octave_grid(n: usize) -> Vec<usize> {
    let mut v = vec![];
    let mut m = 1;
    while n >= 2 * m + crate::fit::MIN_TERMS {
        v.push(m);
        m *= 2;
    }
    v
}

pub fn cmd_thermometry(cfg: &RunConfig, spectra: &Path, out: &Path) -> Result<ThermometryReport> {
    cfg.validate()?;
    let hash = cfg.hash();
    let coops = cfg.cooperativities();
    let mut estimates = vec![];
    for (ci, &c) in coops.iter().enumerate() {
        for ri in 0..cfg.repeats {
            let qp = spectra.join(format!("quantum_c{ci}_r{ri}.json"));
            let tp = spectra.join(format!("thermal_c{ci}_r{ri}.json"));
            if !qp.exists() && !tp.exists() {
                continue;
            }
            let q: ComplexSpectrum = Document::read(&qp)?.payload(SPECTRUM_SCHEMA)?;
            let t: ComplexSpectrum = Document::read(&tp)?.payload(SPECTRUM_SCHEMA)?;
            let (ratio, coth, failures) = estimate_temperature(cfg, &q, &t)?;
            let (ratio, joint_fit) = match ratio {
                Some((r, j)) => (Some(r), Some(j)),
                None => (None, None),
            };
            estimates.push(Estimate {
                cooperativity: c,
                repeat: ri,
                ratio,
                joint_fit,
                coth,
                failures,
            });
        }
    }
    if estimates.is_empty() {
        return Err(Error::validation(
            "spectra",
            format!("no quantum/thermal spectra in {}", spectra.display()),
        ));
    }
    let pick = |e: &Estimate, coth: bool| -> Option<(f64, f64)> {
        if coth {
            e.coth.as_ref().map(|c| (c.t, c.sigma_t))
        } else {
            e.ratio.as_ref().map(|r| (r.exact.t, r.exact.sigma_t))
        }
    };
    let mut summary = vec![];
    for (name, coth) in [("ratio", false), ("coth", true)] {
        let vals: Vec<(f64, f64)> = estimates
            .iter()
            .filter(|e| e.cooperativity == cfg.cooperativity)
            .filter_map(|e| pick(e, coth))
            .collect();
        if !vals.is_empty() {
            let (t, sigma_t, sigma_t_scatter) = weighted(&vals);
            summary.push(MethodSummary {
                method: name.into(),
                t,
                sigma_t,
                sigma_t_scatter,
                n: vals.len(),
            });
        }
    }
    let primary_coth = cfg.method == ThermoMethod::Coth;
    let tau0 = 2.0 * cfg.duration;
    let seq: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.cooperativity == cfg.cooperativity)
        .filter_map(|e| pick(e, primary_coth).map(|(t, _)| (e.repeat as f64 * tau0, t)))
        .collect();
    // a gap in the sequence breaks the uniform spacing
    let grid = if seq.len() == cfg.repeats { octave_grid(seq.len()) } else { vec![] };
    let allan = if grid.is_empty() { None } else { Some(allan_deviation(&seq, &grid)?) };
    let extrapolation = if coops.len() >= 3 {
        let pts: Vec<(f64, f64, f64)> = coops
            .iter()
            .filter_map(|&c| {
                let vals: Vec<(f64, f64)> = estimates
                    .iter()
                    .filter(|e| e.cooperativity == c)
                    .filter_map(|e| pick(e, primary_coth))
                    .collect();
                (!vals.is_empty()).then(|| {
                    let (t, s, _) = weighted(&vals);
                    (c, t, s)
                })
            })
            .collect();
        (pts.len() >= 3).then(|| extrapolate_zero_power(&pts)).transpose()?
    } else {
        None
    };
    let report = ThermometryReport {
        bath_temperature: cfg.probe.t_bath,
        time_per_estimate: tau0,
        estimates,
        summary,
        allan,
        extrapolation,
    };
    let dir = out.join("report");
    let mut manifest = Manifest::new(cfg.canonical());
    let path = dir.join("thermometry.json");
    write_json(&path, REPORT_SCHEMA, &hash, &report)?;
    manifest.add(out, &path, "report")?;
    if cfg.formats.iter().any(|f| f == "tsv") {
        let rows: Vec<Vec<f64>> = report
            .estimates
            .iter()
            .map(|e| {
                let r = pick(e, false).unwrap_or((f64::NAN, f64::NAN));
                let c = pick(e, true).unwrap_or((f64::NAN, f64::NAN));
                vec![e.cooperativity, e.repeat as f64, r.0, r.1, c.0, c.1]
            })
            .collect();
        let path = dir.join("estimates.tsv");
        write_tsv(
            &path,
            &hash,
            &[
                ("cooperativity", "f64"),
                ("repeat", "u64"),
                ("t_ratio_k", "f64"),
                ("sigma_ratio_k", "f64"),
                ("t_coth_k", "f64"),
                ("sigma_coth_k", "f64"),
            ],
            &rows,
        )?;
        manifest.add(out, &path, "table")?;
    }
    write_manifest(out, "thermometry", &manifest, &hash)?;
    Ok(report)
}

fn line_curve(fit: &FitResult, shape: Shape, amp: &str, offset: &str, x: &[f64]) -> Result<Vec<f64>> {
    let (a, w0, g, c) = (fit.value(amp)?, fit.center(), fit.width(), fit.value(offset)?);
    Ok(x.iter().map(|&w| c + a * shape.eval(w, w0, g).0).collect())
}

fn imag_as_real(s: &ComplexSpectrum) -> ComplexSpectrum {
    let mut t = s.clone();
    t.values.iter_mut().for_each(|v| *v = Complex64::new(v.im, 0.0));
    if let Some(sg) = t.sigma.as_mut() {
        sg.iter_mut().for_each(|v| *v = Complex64::new(v.im, 0.0));
    }
    t
}

fn spectrum_plot(stem: &str, s: &ComplexSpectrum) -> Plot {
    let f0 = s.freqs[s.len() / 2];
    let x: Vec<f64> = s.freqs.iter().map(|w| (w - f0) / TAU / 1e6).collect();
    let mut p = Plot::new(stem, &format!("(ω − {:.6} GHz·2π)/2π, MHz", f0 / TAU / 1e9), "shot-noise units")
        .trace("Re", x.clone(), s.re(), Style::Points)
        .trace("Im", x.clone(), s.im(), Style::Points);
    let band = FitBand::new(s.freqs[0], s.freqs[s.len() - 1]);
    let re_fit = if stem.starts_with("quantum") {
        fit_dispersive(s, &band, None).and_then(|f| line_curve(&f, Shape::Dispersive, "B", "c", &s.freqs))
    } else {
        fit_lorentzian(s, &band).and_then(|f| line_curve(&f, Shape::Lorentzian, "A", "c", &s.freqs))
    };
    if let Ok(y) = re_fit {
        p = p.trace("Re fit", x.clone(), y, Style::Line);
    }
    if stem.starts_with("quantum") {
        if let Ok(y) = fit_lorentzian(&imag_as_real(s), &band)
            .and_then(|f| line_curve(&f, Shape::Lorentzian, "A", "c", &s.freqs))
        {
            p = p.trace("Im fit", x, y, Style::Line);
        }
    }
    p
}

fn set_plot(stem: &str, set: &CrossSpectraSet) -> Plot {
    let f0 = set.line.0;
    let mut p = Plot::new(
        &format!("{stem}: Re S(φ, φ+π/2), φ* = {:.2e}", set.phi_star),
        "(ω − ω0)/2π, MHz",
        "shot-noise units",
    );
    for (phi, s) in set.phi_grid.iter().zip(&set.spectra) {
        let x = s.freqs.iter().map(|w| (w - f0) / TAU / 1e6).collect();
        p = p.trace(&format!("φ = {phi:.4}"), x, s.re(), Style::Line);
    }
    p
}

/// Renders each input document to one or more SVG files in `out/plots`.
pub fn cmd_plot(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    let dir = out.join("plots");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = vec![];
    let mut emit = |name: String, plot: Plot| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, plot.render()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for input in inputs {
        let doc = Document::read(input)?;
        let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match doc.schema.as_str() {
            SPECTRUM_SCHEMA => {
                let s: ComplexSpectrum = doc.payload(SPECTRUM_SCHEMA)?;
                emit(format!("{stem}.svg"), spectrum_plot(&stem, &s))?;
            }
            SET_SCHEMA => {
                let s: CrossSpectraSet = doc.payload(SET_SCHEMA)?;
                emit(format!("{stem}.svg"), set_plot(&stem, &s))?;
            }
            REPORT_SCHEMA => {
                let r: ThermometryReport = doc.payload(REPORT_SCHEMA)?;
                if let Some(a) = &r.allan {
                    let fit = a.tau.iter().map(|t| a.a / (2.0 * t).sqrt()).collect();
                    let p = Plot::new("Allan deviation", "τ, s", "σ_T(τ), K")
                        .log_log()
                        .trace("estimates", a.tau.clone(), a.adev.clone(), Style::Points)
                        .trace(&format!("{:.3} K/√Hz · (2τ)^-1/2", a.a), a.tau.clone(), fit, Style::Line);
                    emit(format!("{stem}_allan.svg"), p)?;
                }
                if let Some(z) = &r.extrapolation {
                    let mut cs: Vec<f64> = r.estimates.iter().map(|e| e.cooperativity).collect();
                    let ts: Vec<f64> = r
                        .estimates
                        .iter()
                        .map(|e| e.ratio.as_ref().map(|x| x.exact.t).or(e.coth.as_ref().map(|c| c.t)).unwrap_or(f64::NAN))
                        .collect();
                    let p0 = Plot::new("Temperature vs probe strength", "cooperativity", "T, K")
                        .trace("estimates", cs.clone(), ts, Style::Points);
                    cs.push(0.0);
                    cs.sort_by(f64::total_cmp);
                    cs.dedup();
                    let line = cs.iter().map(|c| z.t0 + z.slope * c).collect();
                    emit(format!("{stem}_sweep.svg"), p0.trace("linear fit", cs, line, Style::Dashed))?;
                }
                let xs: Vec<f64> = (0..r.estimates.len()).map(|i| i as f64).collect();
                let ts: Vec<f64> = r.estimates.iter().map(|e| e.ratio.as_ref().map(|x| x.exact.t).unwrap_or(f64::NAN)).collect();
                let tc: Vec<f64> = r.estimates.iter().map(|e| e.coth.as_ref().map(|x| x.t).unwrap_or(f64::NAN)).collect();
                let p = Plot::new("Temperature estimates", "estimate", "T, K")
                    .trace("ratio", xs.clone(), ts, Style::Points)
                    .trace("coth", xs.clone(), tc, Style::Points)
                    .trace("bath", xs, vec![r.bath_temperature; r.estimates.len()], Style::Dashed);
                emit(format!("{stem}_estimates.svg"), p)?;
            }
            other => {
                return Err(Error::format(
                    "schema",
                    format!("{}: no plot for schema `{other}`", input.display()),
                ))
            }
        }
    }
    Ok(written)
}

//! Lorentzian and dispersive line fits, singly or with a shared centre and
//! width.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, Residuals};
use crate::error::{Error, Result};
use crate::model::ComplexSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// a·(Γ/2)² / ((ω−ω0)² + (Γ/2)²)
    Lorentzian,
    /// a·(ω0−ω)(Γ/2) / ((ω−ω0)² + (Γ/2)²); peak-to-peak equals a.
    Dispersive,
}

impl Shape {
    /// Shape value and its derivatives with respect to ω0 and Γ, for unit
    /// amplitude.
    pub fn eval(self, w: f64, w0: f64, gamma: f64) -> (f64, f64, f64) {
        let d = w - w0;
        let h = 0.5 * gamma;
        let q = d * d + h * h;
        match self {
            Shape::Lorentzian => (h * h / q, 2.0 * h * h * d / (q * q), h * d * d / (q * q)),
            Shape::Dispersive => (-d * h / q, h * (h * h - d * d) / (q * q), -0.5 * d * (d * d - h * h) / (q * q)),
        }
    }
}

/// Fitting range with excluded sub-bands, rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBand {
    pub lo: f64,
    pub hi: f64,
    pub exclude: Vec<(f64, f64)>,
}

impl FitBand {
    pub fn new(lo: f64, hi: f64) -> Self {
        FitBand { lo, hi, exclude: vec![] }
    }

    /// ±`half_widths`·Γ around ω0.
    pub fn around(w0: f64, gamma: f64, half_widths: f64) -> Self {
        FitBand::new(w0 - half_widths * gamma, w0 + half_widths * gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    Lorentzian,
    Dispersive,
    Joint,
}

/// Parameters, covariance and goodness of fit. Widths are full widths at
/// half maximum in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub tag: ModelTag,
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub residual_chi2: f64,
    pub dof: usize,
    pub band: FitBand,
}

impl FitResult {
    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::validation("fit", format!("no parameter {name}")))
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        Ok(self.params[self.index(name)?])
    }

    pub fn sigma(&self, name: &str) -> Result<f64> {
        let i = self.index(name)?;
        Ok(self.covariance[i][i].max(0.0).sqrt())
    }

    pub fn cov(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.covariance[self.index(a)?][self.index(b)?])
    }

    pub fn center(&self) -> f64 {
        self.value("w0").expect("every line fit has a centre")
    }

    pub fn width(&self) -> f64 {
        self.value("gamma").expect("every line fit has a width")
    }

    pub fn chi2_per_dof(&self) -> f64 {
        self.residual_chi2 / self.dof.max(1) as f64
    }
}

/// Real or imaginary part of a spectrum restricted to a band.
#[derive(Debug, Clone)]
pub struct Series {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub bin_correlation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

impl Series {
    pub fn from_spectrum(spec: &ComplexSpectrum, part: Part, band: &FitBand) -> Result<Self> {
        let sel = spec.select(band.lo, band.hi, &band.exclude);
        let sigma = sel
            .sigma
            .as_ref()
            .ok_or_else(|| Error::validation("fit", "spectrum carries no standard errors"))?;
        let pick = |c: &num_complex::Complex64| if part == Part::Re { c.re } else { c.im };
        let s: Vec<f64> = sigma.iter().map(pick).collect();
        if s.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::validation("fit", "standard errors must be positive"));
        }
        Ok(Series {
            w: sel.freqs.clone(),
            y: sel.values.iter().map(pick).collect(),
            s,
            bin_correlation: sel.bin_correlation,
        })
    }
}

/// Up to two data series sharing (ω0, Γ); parameters
/// [a_1, (a_2,) w0, gamma, c_1, (c_2)].
struct LineProblem<'a> {
    parts: Vec<(&'a Series, Shape)>,
    // Internal coordinates: centre offset and width in units of the initial width.
    w_ref: f64,
    g_ref: f64,
}

impl LineProblem<'_> {
    fn n_series(&self) -> usize {
        self.parts.len()
    }

    fn physical(&self, x: &[f64]) -> Vec<f64> {
        let k = self.n_series();
        let mut p = x.to_vec();
        p[k] = self.w_ref + x[k] * self.g_ref;
        p[k + 1] = x[k + 1] * self.g_ref;
        p
    }
}

impl Residuals for LineProblem<'_> {
    fn n_params(&self) -> usize {
        2 * self.n_series() + 2
    }

    fn n_residuals(&self) -> usize {
        self.parts.iter().map(|(s, _)| s.w.len()).sum()
    }

    fn eval(&self, x: &[f64], r: &mut [f64], jac: &mut [Vec<f64>]) {
        let k = self.n_series();
        let p = self.physical(x);
        let (w0, g) = (p[k], p[k + 1]);
        let mut i = 0;
        for (j, (series, shape)) in self.parts.iter().enumerate() {
            let (a, c) = (p[j], p[k + 2 + j]);
            for q in 0..series.w.len() {
                let (f, dw0, dg) = shape.eval(series.w[q], w0, g);
                let inv = 1.0 / series.s[q];
                r[i] = (series.y[q] - (a * f + c)) * inv;
                let row = &mut jac[i];
                row.iter_mut().for_each(|v| *v = 0.0);
                row[j] = f * inv;
                row[k] = a * dw0 * self.g_ref * inv;
                row[k + 1] = a * dg * self.g_ref * inv;
                row[k + 2 + j] = inv;
                i += 1;
            }
        }
    }
}

/// Starting centre and width from the strongest feature of a series.
fn initial_line(s: &Series, shape: Shape) -> (f64, f64) {
    let n = s.w.len();
    let edge = (n / 10).max(1);
    let base = (s.y[..edge].iter().sum::<f64>() + s.y[n - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    let span = s.w[n - 1] - s.w[0];
    let imax = (0..n).max_by(|&a, &b| s.y[a].total_cmp(&s.y[b])).unwrap_or(0);
    let imin = (0..n).min_by(|&a, &b| s.y[a].total_cmp(&s.y[b])).unwrap_or(0);
    match shape {
        Shape::Lorentzian => {
            let (ip, sign) = if s.y[imax] - base >= base - s.y[imin] { (imax, 1.0) } else { (imin, -1.0) };
            let half = 0.5 * (s.y[ip] - base);
            let above = s.y.iter().filter(|&&v| sign * (v - base - half) > 0.0).count();
            let gamma = (above as f64 * span / n as f64).clamp(2.0 * span / n as f64, span / 2.0);
            (s.w[ip], gamma)
        }
        Shape::Dispersive => {
            let gamma = (s.w[imax] - s.w[imin]).abs().max(2.0 * span / n as f64);
            (0.5 * (s.w[imax] + s.w[imin]), gamma)
        }
    }
}

/// Linear least squares for the amplitudes and offsets at fixed (ω0, Γ).
fn linear_amplitudes(parts: &[(&Series, Shape)], w0: f64, g: f64) -> Vec<(f64, f64)> {
    parts
        .iter()
        .map(|(s, shape)| {
            let (mut sff, mut sf, mut s1, mut sfy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for q in 0..s.w.len() {
                let wt = 1.0 / (s.s[q] * s.s[q]);
                let f = shape.eval(s.w[q], w0, g).0;
                sff += wt * f * f;
                sf += wt * f;
                s1 += wt;
                sfy += wt * f * s.y[q];
                sy += wt * s.y[q];
            }
            let det = sff * s1 - sf * sf;
            if det.abs() < 1e-300 {
                return (0.0, sy / s1);
            }
            ((sfy * s1 - sf * sy) / det, (sff * sy - sf * sfy) / det)
        })
        .collect()
}

/// Optional starting centre and width.
pub type LineGuess = Option<(f64, f64)>;

fn fit_lines(parts: Vec<(&Series, Shape)>, band: &FitBand, tag: ModelTag, guess: LineGuess) -> Result<FitResult> {
    let k = parts.len();
    for (s, _) in &parts {
        if s.w.len() < 8 {
            return Err(Error::validation("fit.band", "fewer than 8 bins in the band"));
        }
    }
    let (w_init, g_init) = guess.unwrap_or_else(|| initial_line(parts[0].0, parts[0].1));
    let amps = linear_amplitudes(&parts, w_init, g_init);
    let mut x0 = vec![0.0; 2 * k + 2];
    let mut scale = vec![0.0; 2 * k + 2];
    for (j, (a, c)) in amps.iter().enumerate() {
        x0[j] = *a;
        x0[k + 2 + j] = *c;
        let sig = parts[j].0.s.iter().sum::<f64>() / parts[j].0.s.len() as f64;
        scale[j] = a.abs().max(sig);
        scale[k + 2 + j] = c.abs().max(sig);
    }
    x0[k] = 0.0;
    x0[k + 1] = 1.0;
    scale[k] = 1.0;
    scale[k + 1] = 1.0;
    let prob = LineProblem {
        parts,
        w_ref: w_init,
        g_ref: g_init,
    };
    let out = levenberg_marquardt(&prob, &x0, &scale)?;
    let p = prob.physical(&out.params);
    let (w0, g) = (p[k], p[k + 1]);

    let bins = &prob.parts[0].0.w;
    let spacing = (bins[bins.len() - 1] - bins[0]) / (bins.len() - 1) as f64;
    if !(w0 > band.lo && w0 < band.hi) || !(g.abs() > 2.0 * spacing) || g.abs() > band.hi - band.lo {
        return Err(Error::Numeric(format!(
            "fit did not converge to a line inside the band (w0 = {w0:.6e}, gamma = {g:.3e})"
        )));
    }
    // Jacobian of physical w.r.t. internal coordinates is diagonal.
    let mut jd = vec![1.0; 2 * k + 2];
    jd[k] = prob.g_ref;
    jd[k + 1] = prob.g_ref;
    let infl = prob.parts.iter().map(|(s, _)| s.bin_correlation).fold(1.0, f64::max);
    let covariance = (0..2 * k + 2)
        .map(|i| (0..2 * k + 2).map(|j| out.covariance[i][j] * jd[i] * jd[j] * infl).collect())
        .collect();
    let mut params = p;
    params[k + 1] = g.abs();
    let names: Vec<String> = match (tag, k) {
        (ModelTag::Lorentzian, 1) => vec!["A", "w0", "gamma", "c"],
        (ModelTag::Dispersive, 1) => vec!["B", "w0", "gamma", "c"],
        (ModelTag::Joint, 2) => match (prob.parts[0].1, prob.parts[1].1) {
            (Shape::Lorentzian, Shape::Dispersive) => vec!["A", "B", "w0", "gamma", "cA", "cB"],
            _ => vec!["A1", "A2", "w0", "gamma", "c1", "c2"],
        },
        _ => unreachable!("tag and series count agree"),
    }
    .into_iter()
    .map(String::from)
    .collect();
    let n_res = prob.n_residuals();
    Ok(FitResult {
        tag,
        names,
        params,
        covariance,
        residual_chi2: out.chi2,
        dof: n_res - (2 * k + 2),
        band: band.clone(),
    })
}

/// Lorentzian fit to the real part of `spec`.
pub fn fit_lorentzian(spec: &ComplexSpectrum, band: &FitBand) -> Result<FitResult> {
    let s = Series::from_spectrum(spec, Part::Re, band)?;
    fit_lines(vec![(&s, Shape::Lorentzian)], band, ModelTag::Lorentzian, None)
}

/// Dispersive fit to the real part of `spec`; B is the peak-to-peak size.
pub fn fit_dispersive(spec: &ComplexSpectrum, band: &FitBand, guess: LineGuess) -> Result<FitResult> {
    let s = Series::from_spectrum(spec, Part::Re, band)?;
    fit_lines(vec![(&s, Shape::Dispersive)], band, ModelTag::Dispersive, guess)
}

/// Lorentzian on Re(thermal) and dispersive on Re(quantum) with shared
/// centre and width: parameters A, B, w0, gamma, cA, cB.
pub fn fit_joint(thermal: &ComplexSpectrum, quantum: &ComplexSpectrum, band: &FitBand) -> Result<FitResult> {
    let a = Series::from_spectrum(thermal, Part::Re, band)?;
    let b = Series::from_spectrum(quantum, Part::Re, band)?;
    fit_lines(vec![(&a, Shape::Lorentzian), (&b, Shape::Dispersive)], band, ModelTag::Joint, None)
}

/// Two Lorentzians with shared centre and width on arbitrary parts of two
/// spectra: parameters A1, A2, w0, gamma, c1, c2.
pub fn fit_two_lorentzians(
    first: (&ComplexSpectrum, Part),
    second: (&ComplexSpectrum, Part),
    band: &FitBand,
) -> Result<FitResult> {
    let a = Series::from_spectrum(first.0, first.1, band)?;
    let b = Series::from_spectrum(second.0, second.1, band)?;
    fit_lines(vec![(&a, Shape::Lorentzian), (&b, Shape::Lorentzian)], band, ModelTag::Joint, None)
}

/// Weighted linear fit of the Lorentzian and dispersive amplitudes (and an
/// offset) at a fixed centre and width: returns ((A, σ_A), (B, σ_B)).
pub fn fit_fixed_line(spec: &ComplexSpectrum, band: &FitBand, w0: f64, gamma: f64) -> Result<((f64, f64), (f64, f64))> {
    let s = Series::from_spectrum(spec, Part::Re, band)?;
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for q in 0..s.w.len() {
        let wt = 1.0 / (s.s[q] * s.s[q]);
        let f = [
            Shape::Lorentzian.eval(s.w[q], w0, gamma).0,
            Shape::Dispersive.eval(s.w[q], w0, gamma).0,
            1.0,
        ];
        for i in 0..3 {
            aty[i] += wt * f[i] * s.y[q];
            for j in 0..3 {
                ata[i][j] += wt * f[i] * f[j];
            }
        }
    }
    let cov = super::lm::invert_spd(&ata).ok_or_else(|| Error::Numeric("singular linear line fit".into()))?;
    let x: Vec<f64> = (0..3).map(|i| (0..3).map(|j| cov[i][j] * aty[j]).sum()).collect();
    let k = s.bin_correlation;
    Ok(((x[0], (cov[0][0] * k).sqrt()), (x[1], (cov[1][1] * k).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linear_grid, Norm};
    use num_complex::Complex64;
    use proptest::prelude::*;

    const W0: f64 = 1000.0;
    const G: f64 = 10.0;

    fn spectrum(re: impl Fn(f64) -> f64, im: impl Fn(f64) -> f64) -> ComplexSpectrum {
        let freqs = linear_grid(W0 - 80.0, W0 + 80.0, 321);
        ComplexSpectrum {
            values: freqs.iter().map(|&w| Complex64::new(re(w), im(w))).collect(),
            sigma: Some(vec![Complex64::new(0.01, 0.01); freqs.len()]),
            norm: Norm::ShotNoise,
            bin_correlation: 1.0,
            freqs,
        }
    }

    fn line(shape: Shape, a: f64, w0: f64, g: f64) -> impl Fn(f64) -> f64 {
        move |w| a * shape.eval(w, w0, g).0
    }

    #[test]
    fn joint_fit_recovers_noiseless_lines() {
        let t = spectrum(|w| line(Shape::Lorentzian, 5.0, W0 + 1.5, G)(w) + 0.2, |_| 0.0);
        let q = spectrum(|w| line(Shape::Dispersive, 0.03, W0 + 1.5, G)(w) - 0.01, |_| 0.0);
        let f = fit_joint(&t, &q, &FitBand::around(W0, G, 5.0)).unwrap();
        for (name, want) in [("A", 5.0), ("B", 0.03), ("w0", W0 + 1.5), ("gamma", G), ("cA", 0.2), ("cB", -0.01)] {
            let got = f.value(name).unwrap();
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{name}: {got} vs {want}");
        }
        assert!(f.residual_chi2 < 1e-12);
        assert_eq!(f.dof, 2 * 201 - 6);
    }

    #[test]
    fn fixed_line_separates_shapes() {
        let s = spectrum(|w| line(Shape::Lorentzian, 0.4, W0, G)(w) + line(Shape::Dispersive, -0.7, W0, G)(w), |_| 0.0);
        let ((a, sa), (b, sb)) = fit_fixed_line(&s, &FitBand::around(W0, G, 5.0), W0, G).unwrap();
        assert!((a - 0.4).abs() < 1e-12 && (b + 0.7).abs() < 1e-12);
        assert!(sa > 0.0 && sb > 0.0);
    }

    #[test]
    fn exclusions_remove_bins() {
        let s = spectrum(line(Shape::Lorentzian, 1.0, W0, G), |_| 0.0);
        let mut band = FitBand::around(W0, G, 5.0);
        let full = fit_lorentzian(&s, &band).unwrap();
        band.exclude.push((W0 + 20.0, W0 + 30.0));
        let cut = fit_lorentzian(&s, &band).unwrap();
        assert!(cut.dof < full.dof);
        assert!((cut.value("A").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_errors_rejected() {
        let mut s = spectrum(line(Shape::Lorentzian, 1.0, W0, G), |_| 0.0);
        s.sigma = None;
        assert!(fit_lorentzian(&s, &FitBand::around(W0, G, 5.0)).is_err());
    }

    proptest! {
        #[test]
        fn dispersive_peak_to_peak_is_amplitude(g in 0.1f64..100.0, a in -10.0f64..10.0) {
            // extrema at ω0 ∓ Γ/2
            let hi = a * Shape::Dispersive.eval(W0 - 0.5 * g, W0, g).0;
            let lo = a * Shape::Dispersive.eval(W0 + 0.5 * g, W0, g).0;
            prop_assert!((hi - lo - a).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn shape_derivatives_match_differences(d in -50.0f64..50.0, g in 1.0f64..20.0) {
            for shape in [Shape::Lorentzian, Shape::Dispersive] {
                let (_, d0, dg) = shape.eval(W0 + d, W0, g);
                let h = 1e-6;
                let n0 = (shape.eval(W0 + d, W0 + h, g).0 - shape.eval(W0 + d, W0 - h, g).0) / (2.0 * h);
                let ng = (shape.eval(W0 + d, W0, g + h).0 - shape.eval(W0 + d, W0, g - h).0) / (2.0 * h);
                prop_assert!((d0 - n0).abs() < 1e-6);
                prop_assert!((dg - ng).abs() < 1e-6);
            }
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cosine-sum window w[k] = Σ_j (−1)^j a_j cos(2π j k / n), periodic form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub name: String,
    pub coeffs: Vec<f64>,
}

impl Window {
    pub fn hann() -> Self {
        Window::cosine_sum("hann", &[0.5, 0.5])
    }

    pub fn hamming() -> Self {
        Window::cosine_sum("hamming", &[25.0 / 46.0, 21.0 / 46.0])
    }

    pub fn blackman() -> Self {
        Window::cosine_sum("blackman", &[0.42, 0.5, 0.08])
    }

    pub fn rectangular() -> Self {
        Window::cosine_sum("rectangular", &[1.0])
    }

    pub fn cosine_sum(name: &str, coeffs: &[f64]) -> Self {
        Window {
            name: name.to_string(),
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "hann" => Some(Window::hann()),
            "hamming" => Some(Window::hamming()),
            "blackman" => Some(Window::blackman()),
            "rectangular" => Some(Window::rectangular()),
            _ => None,
        }
    }

    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let x = std::f64::consts::TAU * k as f64 / n as f64;
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| if j % 2 == 0 { a } else { -a } * (j as f64 * x).cos())
                    .sum()
            })
            .collect()
    }
}

/// Correlation between periodogram values of white noise from two segments
/// offset by `shift` samples: |Σ w[k] w[k+shift]|² / (Σ w²)².
pub fn overlap_correlation(w: &[f64], shift: usize) -> f64 {
    if shift >= w.len() {
        return 0.0;
    }
    let num: f64 = w.iter().zip(&w[shift..]).map(|(a, b)| a * b).sum();
    let den: f64 = w.iter().map(|a| a * a).sum();
    (num / den).powi(2)
}

/// Variance inflation 1 + 2 Σ_j |ρ_j|² of a sum over neighbouring bins, with
/// ρ_j the correlation of white-noise periodogram values j bins apart.
pub fn bin_correlation(w: &[f64]) -> f64 {
    let n = w.len();
    let den: f64 = w.iter().map(|a| a * a).sum();
    let mut total = 1.0;
    for j in 1..n.min(64) {
        let c: Complex64 = w
            .iter()
            .enumerate()
            .map(|(k, a)| Complex64::from_polar(a * a, -std::f64::consts::TAU * (j * k) as f64 / n as f64))
            .sum();
        let r = (c.norm() / den).powi(2);
        if r < 1e-12 {
            continue;
        }
        total += 2.0 * r;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hann_shape() {
        let w = Window::hann().samples(8);
        assert!(w[0].abs() < 1e-15);
        assert!((w[4] - 1.0).abs() < 1e-15);
        assert!((w[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hann_half_overlap_correlation() {
        // the half-length overlap gives Σ w·w' / Σ w² = (1/16)/(3/8) = 1/6, squared
        let w = Window::hann().samples(1024);
        assert!((overlap_correlation(&w, 512) - 1.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn hann_neighbour_bins() {
        // ρ_1 = (2/3)², ρ_2 = (1/6)²
        let w = Window::hann().samples(256);
        let expect = 1.0 + 2.0 * (4.0 / 9.0 + 1.0 / 36.0);
        assert!((bin_correlation(&w) - expect).abs() < 1e-12);
        assert!((bin_correlation(&Window::rectangular().samples(64)) - 1.0).abs() < 1e-12);
    }
}

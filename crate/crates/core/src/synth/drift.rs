//! Slow phase wander of the heterodyne beat note.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stream::{stream, CARRIER_OFFSET, DRIFT};

/// Knot rate of the random walk, Hz. Cubic interpolation between knots keeps
/// the drift spectrum well below 1 kHz.
const KNOT_RATE: f64 = 2000.0;

/// Band-limited Gaussian random walk with zero mean and a set RMS over the
/// record, plus a uniformly random static offset.
#[derive(Debug, Clone)]
pub struct Drift {
    knots: Vec<f64>,
    offset: f64,
    mean: f64,
    scale: f64,
}

impl Drift {
    pub fn new(artifact_seed: u64, duration: f64, sample_rate: f64, n: usize, rms: f64) -> Self {
        let count = (duration * KNOT_RATE).ceil() as usize + 4;
        let mut rng = stream(artifact_seed, 0, DRIFT);
        let mut acc = 0.0;
        let knots = (0..count)
            .map(|_| {
                let step: f64 = StandardNormal.sample(&mut rng);
                acc += step;
                acc
            })
            .collect();
        let offset = stream(artifact_seed, 0, CARRIER_OFFSET).random::<f64>() * std::f64::consts::TAU;
        let mut d = Drift {
            knots,
            offset,
            mean: 0.0,
            scale: 0.0,
        };
        if rms > 0.0 && n > 0 {
            let (mut s1, mut s2) = (0.0, 0.0);
            for k in 0..n {
                let x = d.raw(k as f64 / sample_rate);
                s1 += x;
                s2 += x * x;
            }
            let mean = s1 / n as f64;
            let var = (s2 / n as f64 - mean * mean).max(0.0);
            d.mean = mean;
            d.scale = if var > 0.0 { rms / var.sqrt() } else { 0.0 };
        }
        d
    }

    fn raw(&self, t: f64) -> f64 {
        let x = t * KNOT_RATE + 1.0;
        let j = (x.floor() as usize).clamp(1, self.knots.len() - 3);
        let f = x - j as f64;
        let (p0, p1, p2, p3) = (self.knots[j - 1], self.knots[j], self.knots[j + 1], self.knots[j + 2]);
        // Catmull-Rom
        p1 + 0.5
            * f
            * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)))
    }

    /// Total carrier phase excursion at time t (offset included).
    pub fn at(&self, t: f64) -> f64 {
        self.offset + self.scale * (self.raw(t) - self.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rms_is_rescaled() {
        let fs = 1e6;
        let n = 200_000;
        let d = Drift::new(3, n as f64 / fs, fs, n, 0.7);
        let xs: Vec<f64> = (0..n).map(|k| d.at(k as f64 / fs) - d.offset).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let rms = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((rms - 0.7).abs() < 1e-9);
    }

    #[test]
    fn zero_rms_is_constant() {
        let d = Drift::new(3, 0.01, 1e6, 10_000, 0.0);
        assert_eq!(d.at(0.0), d.at(0.005));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted straight line T(P) = T0 + ηP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPowerFit {
    pub t0: f64,
    pub sigma_t0: f64,
    /// Heating coefficient, K per unit of power.
    pub slope: f64,
    pub sigma_slope: f64,
    pub cov: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// Fits (power, T, σ_T) points and returns the zero-power intercept.
pub fn extrapolate_zero_power(points: &[(f64, f64, f64)]) -> Result<ZeroPowerFit> {
    if points.len() < 3 {
        return Err(Error::validation("sweep", format!("need at least 3 power points, got {}", points.len())));
    }
    if points.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::validation("sweep", "powers must be positive"));
    }
    if points.iter().any(|p| !(p.2 > 0.0)) {
        return Err(Error::validation("sweep", "temperature uncertainties must be positive"));
    }
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, e) in points {
        let w = 1.0 / (e * e);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::Numeric("all powers coincide".into()));
    }
    let t0 = (sxx * sy - sx * sxy) / det;
    let slope = (s * sxy - sx * sy) / det;
    let chi2 = points
        .iter()
        .map(|&(x, y, e)| ((y - t0 - slope * x) / e).powi(2))
        .sum();
    Ok(ZeroPowerFit {
        t0,
        sigma_t0: (sxx / det).sqrt(),
        slope,
        sigma_slope: (s / det).sqrt(),
        cov: -sx / det,
        chi2,
        dof: points.len() - 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sweep_gives_weighted_mean() {
        let pts = [(1.0, 10.0, 1.0), (2.0, 10.0, 2.0), (3.0, 10.0, 1.0)];
        let f = extrapolate_zero_power(&pts).unwrap();
        assert!((f.t0 - 10.0).abs() < 1e-12);
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (1..6).map(|k| (k as f64, 4.0 + 0.5 * k as f64, 0.1)).collect();
        let f = extrapolate_zero_power(&pts).unwrap();
        assert!((f.t0 - 4.0).abs() < 1e-12);
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(f.chi2 < 1e-20);
    }

    #[test]
    fn errors() {
        assert!(extrapolate_zero_power(&[(1.0, 1.0, 1.0), (2.0, 2.0, 1.0)]).is_err());
        assert!(extrapolate_zero_power(&[(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (2.0, 2.0, 1.0)]).is_err());
    }
}

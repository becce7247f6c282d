use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of overlapping differences at the largest averaging time.
pub const MIN_TERMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllanCurve {
    /// Averaging times, s.
    pub tau: Vec<f64>,
    pub adev: Vec<f64>,
    /// Overlapping differences entering each point.
    pub terms: Vec<usize>,
    /// White-noise coefficient of σ_A(τ) = a/√(2τ), units of the data per √Hz.
    pub a: f64,
    pub sigma_a: f64,
    /// Free log-log slope and its standard error.
    pub slope: f64,
    pub sigma_slope: f64,
}

/// Overlapping Allan deviation of uniformly spaced estimates (t, value).
/// `m_grid` lists averaging factors; empty picks 1, 2, 4, … while at least
/// eight differences remain.
pub fn allan_deviation(series: &[(f64, f64)], m_grid: &[usize]) -> Result<AllanCurve> {
    let n = series.len();
    if n < 2 + MIN_TERMS {
        return Err(Error::validation("allan", format!("{n} points are too few")));
    }
    let tau0 = (series[n - 1].0 - series[0].0) / (n - 1) as f64;
    if !(tau0 > 0.0) {
        return Err(Error::validation("allan", "times must increase"));
    }
    for w in series.windows(2) {
        if ((w[1].0 - w[0].0) / tau0 - 1.0).abs() > 1e-6 {
            return Err(Error::validation("allan", "estimates are not uniformly spaced"));
        }
    }
    let grid: Vec<usize> = if m_grid.is_empty() {
        std::iter::successors(Some(1usize), |m| Some(m * 2))
            .take_while(|&m| n + 1 >= 2 * m + MIN_TERMS)
            .collect()
    } else {
        m_grid.to_vec()
    };
    let mut cum = vec![0.0; n + 1];
    for (k, &(_, y)) in series.iter().enumerate() {
        cum[k + 1] = cum[k] + y;
    }
    let (mut tau, mut adev, mut terms) = (vec![], vec![], vec![]);
    for &m in &grid {
        if m == 0 || n + 1 < 2 * m + MIN_TERMS {
            return Err(Error::validation(
                "allan",
                format!("fewer than {MIN_TERMS} differences at averaging factor {m}"),
            ));
        }
        let count = n + 1 - 2 * m;
        let mut acc = 0.0;
        for j in 0..count {
            let d = (cum[j + 2 * m] - cum[j + m]) - (cum[j + m] - cum[j]);
            acc += d * d;
        }
        let var = acc / (2.0 * (m * m) as f64 * count as f64);
        tau.push(m as f64 * tau0);
        adev.push(var.sqrt());
        terms.push(count);
    }

    // a from σ_A² = a²/(2τ), weighting each point by its number of
    // independent averages.
    // Each σ² estimate has relative variance ≈ m/n; correlation between
    // averaging times is ignored.
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..tau.len() {
        let w = n as f64 / (tau[k] / tau0);
        num += w * adev[k] * adev[k] * 2.0 * tau[k];
        den += w;
    }
    let a = (num / den).max(0.0).sqrt();
    let sigma_a = 0.5 * a / den.sqrt();

    let (slope, sigma_slope) = if tau.len() >= 2 && adev.iter().all(|&v| v > 0.0) {
        log_slope(&tau, &adev, tau0, n)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(AllanCurve {
        tau,
        adev,
        terms,
        a,
        sigma_a,
        slope,
        sigma_slope,
    })
}

fn log_slope(tau: &[f64], adev: &[f64], tau0: f64, n: usize) -> (f64, f64) {
    // ln σ has standard error ≈ 1/√(2·n/m).
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..tau.len() {
        let w = 2.0 * n as f64 / (tau[k] / tau0);
        let (x, y) = (tau[k].ln(), adev[k].ln());
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    ((sw * sxy - sx * sy) / det, (sw / det).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_zero() {
        let s: Vec<(f64, f64)> = (0..64).map(|k| (k as f64, 3.0)).collect();
        let c = allan_deviation(&s, &[]).unwrap();
        assert!(c.adev.iter().all(|&v| v == 0.0));
        assert_eq!(c.a, 0.0);
    }

    #[test]
    fn linear_drift_grows_with_tau() {
        // σ_A = rate·τ/√2 for a pure ramp.
        let s: Vec<(f64, f64)> = (0..256).map(|k| (k as f64 * 0.5, 0.1 * k as f64)).collect();
        let c = allan_deviation(&s, &[]).unwrap();
        for (t, d) in c.tau.iter().zip(&c.adev) {
            assert!((d - 0.2 * t / 2f64.sqrt()).abs() < 1e-9);
        }
        assert!((c.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_terms() {
        let s: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, k as f64)).collect();
        assert!(allan_deviation(&s, &[8]).is_err());
        assert!(allan_deviation(&s, &[4]).is_ok());
    }

    #[test]
    fn uneven_spacing_rejected() {
        let mut s: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, 0.0)).collect();
        s[5].0 = 5.5;
        assert!(allan_deviation(&s, &[]).is_err());
    }
}

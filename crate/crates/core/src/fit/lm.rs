//! Damped least squares with analytic Jacobians.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;

/// Solves A x = b for symmetric positive definite A (Cholesky).
pub fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let l = cholesky(a)?;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

pub fn invert_spd(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve_spd(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    // symmetrize against rounding
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = m;
            inv[j][i] = m;
        }
    }
    Some(inv)
}

/// Weighted residuals r_i = (y_i − f_i(x))/σ_i and their Jacobian
/// ∂f_i/∂x_j / σ_i (note: of the model, not of the residual).
pub trait Residuals {
    fn n_params(&self) -> usize;
    fn eval(&self, x: &[f64], r: &mut [f64], jac: &mut [Vec<f64>]);
    fn n_residuals(&self) -> usize;
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// (JᵀJ)⁻¹ at the solution.
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub iterations: usize,
}

/// Minimizes Σ r² starting from `x0`. `scale` gives the typical magnitude of
/// each parameter and sets the absolute part of the step tolerance.
pub fn levenberg_marquardt<R: Residuals>(prob: &R, x0: &[f64], scale: &[f64]) -> Result<LmOutcome> {
    let n = prob.n_params();
    let m = prob.n_residuals();
    if m <= n {
        return Err(Error::validation("fit", format!("{m} points for {n} parameters")));
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut jac = vec![vec![0.0; n]; m];
    prob.eval(&x, &mut r, &mut jac);
    let mut chi2: f64 = r.iter().map(|v| v * v).sum();
    if !chi2.is_finite() {
        return Err(Error::Numeric("non-finite residuals at the starting point".into()));
    }
    let mut lambda = 1e-3;
    let mut rt = vec![0.0; m];
    let mut jt = vec![vec![0.0; n]; m];
    for it in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&jac, &r);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[i][i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve_spd(&a, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            prob.eval(&trial, &mut rt, &mut jt);
            let c2: f64 = rt.iter().map(|v| v * v).sum();
            if c2.is_finite() && c2 <= chi2 {
                let small = step
                    .iter()
                    .zip(&trial)
                    .zip(scale)
                    .all(|((d, v), s)| d.abs() <= STEP_TOLERANCE * v.abs().max(s.abs()));
                x = trial;
                std::mem::swap(&mut r, &mut rt);
                std::mem::swap(&mut jac, &mut jt);
                chi2 = c2;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    return finish(x, &jac, chi2, it);
                }
                break;
            }
            // A rejected step that is already below tolerance means we are
            // at the minimum to machine precision.
            if step
                .iter()
                .zip(&x)
                .zip(scale)
                .all(|((d, v), s)| d.abs() <= STEP_TOLERANCE * v.abs().max(s.abs()))
            {
                return finish(x, &jac, chi2, it);
            }
            lambda *= 10.0;
        }
        if !accepted {
            return finish(x, &jac, chi2, it);
        }
    }
    Err(Error::Numeric(format!("fit did not converge in {MAX_ITERATIONS} iterations")))
}

fn normal_equations(jac: &[Vec<f64>], r: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = jac.first().map_or(0, |row| row.len());
    let mut jtj = vec![vec![0.0; n]; n];
    let mut jtr = vec![0.0; n];
    for (row, &ri) in jac.iter().zip(r) {
        for i in 0..n {
            jtr[i] += row[i] * ri;
            for j in 0..=i {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            jtj[j][i] = jtj[i][j];
        }
    }
    (jtj, jtr)
}

fn finish(x: Vec<f64>, jac: &[Vec<f64>], chi2: f64, iterations: usize) -> Result<LmOutcome> {
    let (jtj, _) = normal_equations(jac, &vec![0.0; jac.len()]);
    let covariance = invert_spd(&jtj).ok_or_else(|| Error::Numeric("singular fit curvature matrix".into()))?;
    Ok(LmOutcome {
        params: x,
        covariance,
        chi2,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl Residuals for Exp {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            self.t.len()
        }
        fn eval(&self, x: &[f64], r: &mut [f64], jac: &mut [Vec<f64>]) {
            for (i, (&t, &y)) in self.t.iter().zip(&self.y).enumerate() {
                let e = (-x[1] * t).exp();
                r[i] = y - x[0] * e;
                jac[i][0] = e;
                jac[i][1] = -x[0] * t * e;
            }
        }
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let y = t.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let out = levenberg_marquardt(&Exp { t, y }, &[1.0, 0.5], &[1.0, 1.0]).unwrap();
        assert!((out.params[0] - 2.5).abs() < 1e-9);
        assert!((out.params[1] - 1.3).abs() < 1e-9);
        assert!(out.chi2 < 1e-18);
    }

    #[test]
    fn spd_inverse() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = invert_spd(&a).unwrap();
        assert!((inv[0][0] - 3.0 / 11.0).abs() < 1e-15);
        assert!((inv[0][1] + 1.0 / 11.0).abs() < 1e-15);
        assert!(invert_spd(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }
}

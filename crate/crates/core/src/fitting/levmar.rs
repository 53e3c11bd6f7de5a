use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    pub rtol: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: MAX_ITERATIONS,
            rtol: lit(RELATIVE_TOLERANCE),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmOutcome<T> {
    pub params: Vec<T>,
    /// 1-sigma, infinite along directions the data do not constrain.
    pub sigmas: Vec<T>,
    pub residual_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// The normal matrix was rank deficient at the optimum.
    pub degenerate: bool,
}

/// Damped Gauss-Newton least squares on `residuals(p)`.
///
/// Parameters are moved in units of `scales` (`p = p0 + x * scales`), the
/// Jacobian is a central difference in those units, and the damping is
/// Marquardt's diagonal scaling. A residual evaluation that fails counts as
/// a rejected step, which lets models refuse unphysical parameters.
/// Uncertainties come from the inverse normal matrix scaled by the reduced
/// residual `|r|^2 / (m - n)`.
pub fn levenberg_marquardt<T, F>(residuals: F, p0: &[T], scales: &[T], opts: &LmOptions<T>) -> Result<LmOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let n = p0.len();
    if scales.len() != n || scales.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
        return Err(Error::InvalidArgument("parameter scales must be positive and match p0".into()));
    }
    let to_p = |x: &DVector<T>| -> Vec<T> { (0..n).map(|i| p0[i] + x[i] * scales[i]).collect() };
    let eval = |x: &DVector<T>| -> Result<DVector<T>> {
        let r = residuals(&to_p(x))?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite residual".into()));
        }
        Ok(DVector::from_vec(r))
    };

    let mut x = DVector::<T>::zeros(n);
    let mut r = eval(&x)?;
    let m = r.len();
    if m < n {
        return Err(Error::InvalidArgument(format!("{m} residuals cannot constrain {n} parameters")));
    }
    let mut cost = r.norm_squared();
    let h: T = lit(1e-6);
    let jacobian = |x: &DVector<T>| -> Result<DMatrix<T>> {
        let mut j = DMatrix::<T>::zeros(m, n);
        for k in 0..n {
            let step = h * (T::one() + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            // fall back to a one-sided difference at a model boundary
            let (rp, rm, width) = match (eval(&xp), eval(&xm)) {
                (Ok(rp), Ok(rm)) => (rp, rm, step + step),
                (Ok(rp), Err(_)) => (rp, eval(x)?, step),
                (Err(_), Ok(rm)) => (eval(x)?, rm, step),
                (Err(e), Err(_)) => return Err(e),
            };
            j.set_column(k, &((rp - rm) / width));
        }
        Ok(j)
    };

    let mut lambda: T = lit(1e-3);
    let mut converged = cost == T::zero();
    let mut iterations = 0;
    let mut j = jacobian(&x)?;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let floor = (0..n).fold(T::zero(), |s, i| s.max(jtj[(i, i)])) * lit(1e-15);
        let mut accepted = false;
        while lambda < lit(1e16) {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(floor).max(lit(1e-300));
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= lit(10.0);
                        continue;
                    }
                },
            };
            let x_new = &x + &step;
            match eval(&x_new) {
                Ok(r_new) => {
                    let c_new = r_new.norm_squared();
                    if c_new <= cost {
                        let small_step = step.norm() <= opts.rtol * (x.norm() + opts.rtol);
                        let small_gain = cost - c_new <= opts.rtol * cost;
                        x = x_new;
                        r = r_new;
                        cost = c_new;
                        lambda = (lambda / lit(10.0)).max(lit(1e-12));
                        accepted = true;
                        converged = small_step || small_gain || cost == T::zero();
                        break;
                    }
                }
                Err(_) => {}
            }
            lambda *= lit(10.0);
        }
        if !accepted {
            // no downhill step at any damping: already at the optimum
            converged = true;
            break;
        }
        if !converged {
            j = jacobian(&x)?;
        }
    }
    if !converged {
        return Err(Error::FitFailure {
            reason: format!("no convergence in {} iterations", opts.max_iterations),
            residual_norm: cost.sqrt().to_f64_lossy(),
            iterations,
        });
    }

    let j = jacobian(&x)?;
    let jtj = j.transpose() * &j;
    let dof = if m > n { m - n } else { 1 };
    let s2 = cost / lit(dof as f64);
    let (cov, degenerate, null) = pseudo_inverse(&jtj);
    let sigmas = (0..n)
        .map(|i| {
            if null[i] {
                T::one() / T::zero()
            } else {
                (cov[(i, i)].max(T::zero()) * s2).sqrt() * scales[i]
            }
        })
        .collect();
    Ok(LmOutcome {
        params: to_p(&x),
        sigmas,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
        degenerate,
    })
}

/// Inverse of a symmetric positive semi-definite matrix on its range, the
/// rank deficiency flag, and which coordinates touch the null space.
fn pseudo_inverse<T: Real>(a: &DMatrix<T>) -> (DMatrix<T>, bool, Vec<bool>) {
    let n = a.nrows();
    // equilibrate so that the eigenvalue cut is scale free
    let d: Vec<T> = (0..n)
        .map(|i| {
            let v = a[(i, i)];
            if v > T::zero() {
                T::one() / v.sqrt()
            } else {
                T::one()
            }
        })
        .collect();
    let mut b = a.clone();
    for i in 0..n {
        for k in 0..n {
            b[(i, k)] *= d[i] * d[k];
        }
    }
    let eig = SymmetricEigen::new(b);
    let top = eig.eigenvalues.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
    let cut = top * lit(1e-13);
    let mut inv = DMatrix::<T>::zeros(n, n);
    let mut null = vec![false; n];
    let mut degenerate = false;
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        if lam > cut {
            inv += (v * v.transpose()) / lam;
        } else {
            degenerate = true;
            for i in 0..n {
                if v[i].abs() > lit(1e-3) {
                    null[i] = true;
                }
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            inv[(i, k)] *= d[i] * d[k];
        }
    }
    (inv, degenerate, null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_is_exact() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 - 0.5 * t).collect();
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(t.iter().zip(&y).map(|(t, y)| p[0] + p[1] * t - y).collect()),
            &[1.0, 1.0],
            &[1.0, 1.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!((out.params[0] - 3.0).abs() < 1e-12 && (out.params[1] + 0.5).abs() < 1e-12);
        assert!(out.converged && !out.degenerate);
    }

    #[test]
    fn unconstrained_parameter_has_infinite_sigma() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(t.iter().map(|t| p[0] * t + 0.0 * p[1] - 2.0 * t + 0.01 * (t - 4.5)).collect()),
            &[1.0, 5.0],
            &[1.0, 1.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(out.degenerate);
        assert!(out.sigmas[0].is_finite() && out.sigmas[1].is_infinite());
    }
}

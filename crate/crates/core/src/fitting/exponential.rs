use super::levmar::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentialModel {
    /// `A exp(-t/T) + c`
    Simple,
    /// `A exp(-t/T)`, offset held at zero.
    Decay,
    /// `A (1 - 2 exp(-t/T)) + c`
    InversionRecovery,
}

impl ExponentialModel {
    pub fn eval<T: Real>(self, t: T, time: T, amplitude: T, offset: T) -> T {
        let e = (-t / time).exp();
        match self {
            ExponentialModel::Simple => amplitude * e + offset,
            ExponentialModel::Decay => amplitude * e,
            ExponentialModel::InversionRecovery => amplitude * (T::one() - e - e) + offset,
        }
    }
}

/// Ordinary least-squares line `y = a + b x`.
fn line<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    let n: T = lit(x.len() as f64);
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let sxy = x.iter().zip(y).fold(T::zero(), |s, (&a, &b)| s + (a - mx) * (b - my));
    let sxx = x.iter().fold(T::zero(), |s, &a| s + (a - mx) * (a - mx));
    if sxx > T::zero() {
        let b = sxy / sxx;
        Some((my - b * mx, b))
    } else {
        None
    }
}

/// Fits the time constant `T` (s), `amplitude` and `offset`. The start
/// comes from a log-linear regression over the first decade of the decay.
pub fn fit_exponential<T: Real>(t: &[T], y: &[T], model: ExponentialModel, lm: &LmOptions<T>) -> Result<FitResult<T>> {
    let n = t.len();
    if n < 10 || y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "exponential fit needs at least 10 (t, y) pairs, got {n}"
        )));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    // decaying part g(t) = (y - y_inf) / (y_0 - y_inf), one at t_0
    let (y_inf, a_sign) = match model {
        ExponentialModel::Simple | ExponentialModel::Decay => (T::zero(), T::one()),
        ExponentialModel::InversionRecovery => (y[n - 1], -T::one()),
    };
    let y0 = y[0];
    let span = y0 - y_inf;
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    if span != T::zero() {
        for (&tk, &yk) in t.iter().zip(y) {
            let g = (yk - y_inf) / span;
            if g <= lit(0.1) {
                break;
            }
            xs.push(tk);
            ls.push(g.ln());
        }
    }
    let tau0 = match line(&xs, &ls) {
        Some((_, b)) if b < T::zero() => -T::one() / b,
        Some(_) => {
            return Err(Error::FitFailure {
                reason: "envelope does not decay".into(),
                residual_norm: f64::NAN,
                iterations: 0,
            })
        }
        None => (t[n - 1] - t[0]) / lit(3.0),
    };
    let e0 = (-t[0] / tau0).exp();
    let (a0, c0) = match model {
        ExponentialModel::Simple | ExponentialModel::Decay => (span / e0, T::zero()),
        ExponentialModel::InversionRecovery => {
            // y = (A + c) - 2 A exp(-t/T)
            let a = a_sign * span / (e0 + e0);
            (a, y_inf - a)
        }
    };
    let a_scale = a0.abs().max(span.abs()).max(lit(1e-300));
    let residuals = |p: &[T]| -> Result<Vec<T>> {
        if !(p[0] > T::zero()) {
            return Err(Error::InvalidArgument("time constant must be positive".into()));
        }
        Ok(t.iter().zip(y).map(|(&tk, &yk)| model.eval(tk, p[0], p[1], p[2]) - yk).collect())
    };
    let out = if model == ExponentialModel::Decay {
        let r2 = |p: &[T]| residuals(&[p[0], p[1], T::zero()]);
        let mut o = levenberg_marquardt(r2, &[tau0, a0], &[tau0 * lit(0.1), a_scale], lm)?;
        o.params.push(T::zero());
        o.sigmas.push(T::zero());
        o
    } else {
        levenberg_marquardt(residuals, &[tau0, a0, c0], &[tau0 * lit(0.1), a_scale, a_scale], lm)?
    };
    if !(out.params[0] > T::zero()) {
        return Err(Error::FitFailure {
            reason: "non-positive time constant".into(),
            residual_norm: out.residual_norm.to_f64_lossy(),
            iterations: out.iterations,
        });
    }
    Ok(FitResult::from_outcome(&["time", "amplitude", "offset"], out))
}

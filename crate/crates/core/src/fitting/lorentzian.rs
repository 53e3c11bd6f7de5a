use super::levmar::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianPeak<T> {
    /// Hz
    pub center: T,
    /// FWHM (Hz)
    pub width: T,
    /// Signed height above the shared baseline.
    pub depth: T,
    pub center_sigma: T,
    pub width_sigma: T,
    pub depth_sigma: T,
}

fn lorentz<T: Real>(f: T, c: T, w: T) -> T {
    let x = (f - c) * lit(2.0) / w;
    T::one() / (T::one() + x * x)
}

fn model<T: Real>(f: T, p: &[T]) -> T {
    let n = (p.len() - 1) / 3;
    (0..n).fold(p[3 * n], |s, k| s + p[3 * k + 2] * lorentz(f, p[3 * k], p[3 * k + 1]))
}

fn median<T: Real>(v: &[T]) -> T {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    s[s.len() / 2]
}

/// Half-maximum full width of the feature at `k` in `r`.
fn half_width<T: Real>(f: &[T], r: &[T], k: usize) -> Option<T> {
    let half = r[k] * lit(0.5);
    let above = |i: usize| (r[i] - half) * r[k].signum() > T::zero();
    let mut hi = k;
    while hi + 1 < f.len() && above(hi + 1) {
        hi += 1;
    }
    let mut lo = k;
    while lo > 0 && above(lo - 1) {
        lo -= 1;
    }
    let right = if hi + 1 < f.len() { (f[hi] + f[hi + 1]) * lit(0.5) } else { f[hi] };
    let left = if lo > 0 { (f[lo] + f[lo - 1]) * lit(0.5) } else { f[lo] };
    let w = right - left;
    (w > T::zero()).then_some(w)
}

/// Multi-Lorentzian least squares with a shared constant baseline.
/// Parameters are named `center_k`, `width_k`, `depth_k` (k from 1, in
/// ascending centre order) and `baseline`.
pub fn fit_lorentzian_peaks<T: Real>(trace: &Trace<T>, n_peaks: usize, lm: &LmOptions<T>) -> Result<FitResult<T>> {
    if n_peaks == 0 {
        return Err(Error::InvalidArgument("need at least one peak".into()));
    }
    let f = &trace.axis;
    let y = trace.real_parts();
    if f.len() < 3 * n_peaks + 2 {
        return Err(Error::InvalidArgument("too few points for the requested peaks".into()));
    }
    let span = f[f.len() - 1] - f[0];
    let base = median(&y);
    let mut r: Vec<T> = y.iter().map(|&v| v - base).collect();
    let yscale = y.iter().fold(T::zero(), |m, &v| m.max((v - base).abs())).max(base.abs()).max(lit(1e-300));
    let mut p0 = Vec::with_capacity(3 * n_peaks + 1);
    let mut scales = Vec::with_capacity(3 * n_peaks + 1);
    for _ in 0..n_peaks {
        let k = (0..r.len())
            .max_by(|&i, &j| r[i].abs().partial_cmp(&r[j].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let amp = r[k];
        let w = half_width(f, &r, k).unwrap_or(span / lit(10.0)).max(span / lit(1e4));
        for (ri, &fi) in r.iter_mut().zip(f) {
            *ri -= amp * lorentz(fi, f[k], w);
        }
        p0.extend([f[k], w, amp]);
        scales.extend([w, w, yscale]);
    }
    p0.push(base);
    scales.push(yscale);

    let residuals = |p: &[T]| -> Result<Vec<T>> {
        if (0..n_peaks).any(|k| !(p[3 * k + 1] > T::zero())) {
            return Err(Error::InvalidArgument("widths must be positive".into()));
        }
        Ok(f.iter().zip(&y).map(|(&fi, &yi)| model(fi, p) - yi).collect())
    };
    let out = levenberg_marquardt(residuals, &p0, &scales, lm)?;

    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| out.params[3 * a].partial_cmp(&out.params[3 * b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut sigmas = Vec::new();
    let mut warnings = Vec::new();
    let inf = T::one() / T::zero();
    for (rank, &k) in order.iter().enumerate() {
        let i = rank + 1;
        let (c, w, a) = (out.params[3 * k], out.params[3 * k + 1], out.params[3 * k + 2]);
        let (mut sc, mut sw, sa) = (out.sigmas[3 * k], out.sigmas[3 * k + 1], out.sigmas[3 * k + 2]);
        if a.abs() <= sa + sa {
            warnings.push(format!("degenerate: peak {i} depth is consistent with zero, its centre is undetermined"));
            sc = inf;
            sw = inf;
        }
        names.extend([format!("center_{i}"), format!("width_{i}"), format!("depth_{i}")]);
        values.extend([c, w, a]);
        sigmas.extend([sc, sw, sa]);
    }
    for a in 0..n_peaks {
        for b in (a + 1)..n_peaks {
            let (ca, wa) = (values[3 * a], values[3 * a + 1]);
            let (cb, wb) = (values[3 * b], values[3 * b + 1]);
            if (cb - ca).abs() < (wa + wb) * lit(0.25) {
                warnings.push(format!("degenerate: peaks {} and {} overlap within half a width", a + 1, b + 1));
            }
        }
    }
    names.push("baseline".into());
    values.push(out.params[3 * n_peaks]);
    sigmas.push(out.sigmas[3 * n_peaks]);
    if out.degenerate && !warnings.iter().any(|w| w.starts_with("degenerate")) {
        warnings.push("degenerate: the normal matrix is rank deficient".into());
    }
    Ok(FitResult {
        names,
        values,
        sigmas,
        residual_norm: out.residual_norm,
        converged: out.converged,
        iterations: out.iterations,
        warnings,
    })
}

/// Peaks of a [`fit_lorentzian_peaks`] result in centre order.
pub fn lorentzian_peaks<T: Real>(fit: &FitResult<T>) -> Vec<LorentzianPeak<T>> {
    let n = (fit.values.len() - 1) / 3;
    (0..n)
        .map(|k| LorentzianPeak {
            center: fit.values[3 * k],
            width: fit.values[3 * k + 1],
            depth: fit.values[3 * k + 2],
            center_sigma: fit.sigmas[3 * k],
            width_sigma: fit.sigmas[3 * k + 1],
            depth_sigma: fit.sigmas[3 * k + 2],
        })
        .collect()
}

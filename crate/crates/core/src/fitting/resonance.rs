use num_complex::Complex;

use super::levmar::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::dynamics::s11_single;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::trace::Trace;

/// Which of the two rates is larger. A magnitude-only trace cannot tell
/// them apart, so the fit starts on the requested side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CouplingRegime {
    /// `kappa_i > kappa_c`.
    #[default]
    Under,
    /// `kappa_c > kappa_i`.
    Over,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceFitOptions<T> {
    /// Fit `|S11|` only (drops the phase and delay parameters).
    pub magnitude_only: bool,
    /// Side to start from; the complex fit reads it off the data when `None`.
    pub regime: Option<CouplingRegime>,
    pub lm: LmOptions<T>,
}

impl<T: Real> Default for ResonanceFitOptions<T> {
    fn default() -> Self {
        Self {
            magnitude_only: false,
            regime: None,
            lm: LmOptions::default(),
        }
    }
}

/// Reflection with a complex background:
/// `A exp(i (phi - 2 pi (f - f_ref) tau)) * (1 - 2 kc / (kc + ki + 2 i 2 pi (f0 - f)))`.
pub fn resonance_model<T: Real>(f: T, f_ref: T, p: &[T]) -> Complex<T> {
    let (f0, kc, ki, amp) = (p[0], p[1], p[2], p[3]);
    let (phase, delay) = if p.len() > 4 { (p[4], p[5]) } else { (T::zero(), T::zero()) };
    let arg = phase - T::two_pi() * (f - f_ref) * delay;
    Complex::new(arg.cos(), arg.sin()) * amp * s11_single(f0, kc, kc + ki, f)
}

/// Least-squares fit of `f0` (Hz), `kappa_c` and `kappa_i` (s^-1) with
/// background amplitude, phase and delay as nuisance parameters.
pub fn fit_resonance<T: Real>(trace: &Trace<T>, opts: &ResonanceFitOptions<T>) -> Result<FitResult<T>> {
    let n = trace.len();
    if n < 50 {
        return Err(Error::InvalidArgument(format!("resonance fit needs at least 50 points, got {n}")));
    }
    let f = &trace.axis;
    let z = &trace.values;
    let mags = trace.magnitudes();
    let f_ref = (f[0] + f[n - 1]) * lit(0.5);
    let edge = (n / 20).max(2);
    let a0 = (mags[..edge].iter().chain(&mags[n - edge..]).fold(T::zero(), |s, &v| s + v)) / lit((2 * edge) as f64);
    if !(a0 > T::zero()) {
        return Err(Error::InvalidArgument("trace has no background level".into()));
    }
    let zsum = z[..edge].iter().chain(&z[n - edge..]).fold(Complex::new(T::zero(), T::zero()), |s, &v| s + v);
    let phi0 = zsum.im.atan2(zsum.re);

    let kmin = (0..n).min_by(|&i, &j| mags[i].partial_cmp(&mags[j]).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(0);
    let f0 = f[kmin];
    // absorbed power 1 - |S|^2/A^2 is a Lorentzian of FWHM kappa_tot / 2 pi
    let absorbed: Vec<T> = mags.iter().map(|&m| T::one() - (m / a0) * (m / a0)).collect();
    let half = absorbed[kmin] * lit(0.5);
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<T> {
        let mut prev = kmin;
        for k in range {
            if absorbed[k] < half {
                let (x0, x1) = (f[prev], f[k]);
                let (y0, y1) = (absorbed[prev], absorbed[k]);
                return Some(x0 + (x1 - x0) * (y0 - half) / (y0 - y1));
            }
            prev = k;
        }
        None
    };
    let right = crossing(&mut (kmin + 1..n));
    let left = crossing(&mut (0..kmin).rev());
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => (f0 - l) * lit(2.0),
        (None, Some(r)) => (r - f0) * lit(2.0),
        (None, None) => (f[n - 1] - f[0]) / lit(5.0),
    };
    if !(fwhm > T::zero()) {
        return Err(Error::InvalidArgument("could not locate a resonance dip".into()));
    }
    let kt = T::two_pi() * fwhm;
    let depth = (mags[kmin] / a0).min(T::one());
    let regime = match opts.regime {
        Some(r) => r,
        None if opts.magnitude_only => CouplingRegime::Under,
        None => {
            let zr = z[kmin] * Complex::new(phi0.cos(), -phi0.sin());
            if zr.re < T::zero() {
                CouplingRegime::Over
            } else {
                CouplingRegime::Under
            }
        }
    };
    let kc0 = match regime {
        CouplingRegime::Under => kt * (T::one() - depth) * lit(0.5),
        CouplingRegime::Over => kt * (T::one() + depth) * lit(0.5),
    };
    let ki0 = kt - kc0;

    let mut warnings = Vec::new();
    if f[n - 1] - f[0] < fwhm * lit(5.0) {
        warnings.push("trace spans fewer than 5 linewidths".to_string());
    }

    let span = f[n - 1] - f[0];
    let (p0, scales, names): (Vec<T>, Vec<T>, Vec<&str>) = if opts.magnitude_only {
        (
            vec![f0, kc0, ki0, a0],
            vec![fwhm, kt, kt, a0],
            vec!["f0", "kappa_c", "kappa_i", "amplitude"],
        )
    } else {
        (
            vec![f0, kc0, ki0, a0, phi0, T::zero()],
            vec![fwhm, kt, kt, a0, T::one(), T::one() / (T::two_pi() * span)],
            vec!["f0", "kappa_c", "kappa_i", "amplitude", "phase", "delay"],
        )
    };
    let magnitude_only = opts.magnitude_only;
    let residuals = |p: &[T]| -> Result<Vec<T>> {
        if !(p[1] > T::zero() && p[2] >= T::zero() && p[3] > T::zero()) {
            return Err(Error::InvalidArgument("rates and amplitude must be positive".into()));
        }
        let mut r = Vec::with_capacity(2 * n);
        for (&fk, zk) in f.iter().zip(z) {
            let m = resonance_model(fk, f_ref, p);
            if magnitude_only {
                r.push(m.norm_sqr().sqrt() - zk.norm_sqr().sqrt());
            } else {
                r.push(m.re - zk.re);
                r.push(m.im - zk.im);
            }
        }
        Ok(r)
    };
    let out = levenberg_marquardt(residuals, &p0, &scales, &opts.lm)?;
    let mut result = FitResult::from_outcome(&names, out);
    if result.values.len() > 4 {
        // report the phase in (-pi, pi]
        let ph = result.values[4];
        result.values[4] = ph.sin().atan2(ph.cos());
    }
    result.warnings = warnings;
    Ok(result)
}

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::trace::Trace;

/// High-Q resonator A coupled to the lossy buffer B through the pumped
/// conversion term, in the frame rotating with the drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModePair<T> {
    /// Hz
    pub fa: T,
    pub fb: T,
    /// Energy decay rates (s^-1).
    pub kappa_ca: T,
    pub kappa_ia: T,
    pub kappa_cb: T,
    pub kappa_ib: T,
    /// Baseline conversion rate (s^-1, angular); pump windows add to it.
    pub g3wm: T,
    /// Drive detunings (s^-1, angular).
    pub delta_a: T,
    pub delta_b: T,
}

impl<T: Real> ModePair<T> {
    /// Zero-bias rates of the measured device.
    pub fn device() -> Self {
        Self {
            fa: lit(7.422e9),
            fb: lit(6.605e9),
            kappa_ca: lit(9.4e4),
            kappa_ia: lit(7.5e5),
            kappa_cb: lit(2.6e7),
            kappa_ib: lit(5.7e6),
            g3wm: T::zero(),
            delta_a: T::zero(),
            delta_b: T::zero(),
        }
    }

    pub fn kappa_a(&self) -> T {
        self.kappa_ca + self.kappa_ia
    }

    pub fn kappa_b(&self) -> T {
        self.kappa_cb + self.kappa_ib
    }

    /// Mode-A linewidth including the pump-induced loss `4 g^2 / kappa_b`.
    pub fn kappa_a_total(&self) -> T {
        let kb = self.kappa_b();
        if kb > T::zero() {
            self.kappa_a() + lit::<T>(4.0) * self.g3wm * self.g3wm / kb
        } else {
            self.kappa_a()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("kappa_ca", self.kappa_ca),
            ("kappa_ia", self.kappa_ia),
            ("kappa_cb", self.kappa_cb),
            ("kappa_ib", self.kappa_ib),
        ];
        for (name, v) in rates {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative")));
            }
        }
        for (name, v) in [("g3wm", self.g3wm), ("delta_a", self.delta_a), ("delta_b", self.delta_b)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Closed-form steady-state amplitude of mode A for a resonant pump
/// (`delta_b = 0`):
/// `a = 2 sqrt(kappa_ca) alpha / (kappa_a + 4 g^2/kappa_b + 2 i delta_a)`.
pub fn steady_state<T: Real>(modes: &ModePair<T>, drive: Complex<T>) -> Result<Complex<T>> {
    modes.validate()?;
    if modes.delta_b != T::zero() {
        return Err(Error::UnsupportedConfiguration(
            "closed-form steady state needs delta_b = 0; integrate the mode equations instead".into(),
        ));
    }
    if !(modes.kappa_a() > T::zero() && modes.kappa_b() > T::zero()) {
        return Err(Error::InvalidArgument("total decay rates must be positive".into()));
    }
    let two: T = lit(2.0);
    let denom = c(modes.kappa_a_total(), two * modes.delta_a);
    Ok(drive * c(two * modes.kappa_ca.sqrt(), T::zero()) / denom)
}

/// Which mode the probe tone addresses through the shared port.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    A,
    B,
}

/// Stationary solution `(a, b)` of the linear mode equations for a drive
/// on one mode, for arbitrary detunings.
pub fn linear_response<T: Real>(modes: &ModePair<T>, probe: Probe, drive: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    modes.validate()?;
    let half: T = lit(0.5);
    let m11 = c(half * modes.kappa_a(), modes.delta_a);
    let m22 = c(half * modes.kappa_b(), modes.delta_b);
    let m12 = c(T::zero(), modes.g3wm);
    let det = m11 * m22 - m12 * m12;
    if det.norm_sqr() == T::zero() {
        return Err(Error::InvalidArgument("mode equations have no stationary solution".into()));
    }
    let (da, db) = match probe {
        Probe::A => (drive * c(modes.kappa_ca.sqrt(), T::zero()), c(T::zero(), T::zero())),
        Probe::B => (c(T::zero(), T::zero()), drive * c(modes.kappa_cb.sqrt(), T::zero())),
    };
    let a = (m22 * da - m12 * db) / det;
    let b = (m11 * db - m12 * da) / det;
    Ok((a, b))
}

/// `S11 = 1 - 2 kappa_c / (kappa_tot + 2 i delta)` with
/// `delta = 2 pi (f0 - f)`.
pub fn s11_single<T: Real>(f0: T, kappa_c: T, kappa_tot: T, f: T) -> Complex<T> {
    let two: T = lit(2.0);
    let delta = T::two_pi() * (f0 - f);
    c(T::one(), T::zero()) - c(two * kappa_c, T::zero()) / c(kappa_tot, two * delta)
}

/// Reflection off the shared port near mode A, including any pump-induced
/// loss, sampled at the frequencies `freqs` (Hz).
pub fn reflection_s11<T: Real>(modes: &ModePair<T>, freqs: &[T]) -> Result<Trace<T>> {
    modes.validate()?;
    let kt = modes.kappa_a_total();
    if !(kt > T::zero()) {
        return Err(Error::InvalidArgument("mode A linewidth must be positive".into()));
    }
    let values = freqs
        .iter()
        .map(|&f| s11_single(modes.fa, modes.kappa_ca, kt, f))
        .collect();
    Trace::new(freqs.to_vec(), values)
}

/// Reflection near the probed mode with the pump tone at `f_pump` (Hz).
/// The pump bridges the modes when `f_pump` is near `fa - fb`; the
/// response of the other mode is solved exactly rather than adiabatically.
pub fn converted_reflection<T: Real>(modes: &ModePair<T>, probe: Probe, f_probe: T, f_pump: T) -> Result<Complex<T>> {
    let w = T::two_pi();
    let (delta_a, delta_b, kc) = match probe {
        // probe on A at f; B rotates at f - f_pump
        Probe::A => (w * (modes.fa - f_probe), w * (modes.fb - (f_probe - f_pump)), modes.kappa_ca),
        // probe on B at f; A rotates at f + f_pump
        Probe::B => (w * (modes.fa - (f_probe + f_pump)), w * (modes.fb - f_probe), modes.kappa_cb),
    };
    let m = ModePair {
        delta_a,
        delta_b,
        ..*modes
    };
    let one = c(T::one(), T::zero());
    let (a, b) = linear_response(&m, probe, one)?;
    let x = match probe {
        Probe::A => a,
        Probe::B => b,
    };
    Ok(one - x * c(kc.sqrt(), T::zero()))
}

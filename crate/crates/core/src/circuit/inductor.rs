use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Current-dependent superconducting inductor,
/// `L(I) = Lg + Lk0 [1 + (I/I*)^2 + alpha (I/I*)^4]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticInductor<T> {
    /// Zero-current kinetic inductance (H).
    pub lk0: T,
    /// Series geometric inductance (H).
    pub lg: T,
    /// Critical-current scale (A).
    pub istar: T,
    pub alpha: T,
}

impl<T: Real> KineticInductor<T> {
    pub fn new(lk0: T, lg: T, istar: T, alpha: T) -> Result<Self> {
        let ind = Self {
            lk0,
            lg,
            istar,
            alpha,
        };
        ind.validate()?;
        Ok(ind)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lk0 > T::zero() && self.lk0.is_finite()) {
            return Err(Error::InvalidArgument("Lk0 must be positive".into()));
        }
        if !(self.istar > T::zero() && self.istar.is_finite()) {
            return Err(Error::InvalidArgument("I* must be positive".into()));
        }
        if !(self.lg >= T::zero() && self.lg.is_finite()) {
            return Err(Error::InvalidArgument("Lg must be non-negative".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        Ok(())
    }

    fn reduced(&self, current: T) -> Result<T> {
        if !current.is_finite() || current.abs() >= self.istar {
            return Err(Error::BeyondCriticalCurrent {
                current: current.to_f64_lossy(),
                istar: self.istar.to_f64_lossy(),
            });
        }
        Ok(current / self.istar)
    }

    /// Kinetic part only, `Lk(I)`.
    pub fn kinetic_part(&self, current: T) -> Result<T> {
        let x2 = self.reduced(current)?.powi(2);
        Ok(self.lk0 * (T::one() + x2 + self.alpha * x2 * x2))
    }

    /// Total inductance `Lg + Lk(I)`.
    pub fn kinetic_inductance(&self, current: T) -> Result<T> {
        Ok(self.lg + self.kinetic_part(current)?)
    }

    /// Coefficients `c1..c4` (units A^-1 .. A^-4) of
    /// `L(Idc + Irf) = Lg + Lk(Idc) + Lk0 * sum_i c_i Irf^i`.
    pub fn expansion_coeffs(&self, idc: T) -> Result<[T; 4]> {
        let u = self.reduced(idc)?;
        let s = self.istar;
        let a = self.alpha;
        let c1 = (lit::<T>(2.0) * u + lit::<T>(4.0) * a * u.powi(3)) / s;
        let c2 = (T::one() + lit::<T>(6.0) * a * u * u) / (s * s);
        let c3 = lit::<T>(4.0) * a * u / s.powi(3);
        let c4 = a / s.powi(4);
        Ok([c1, c2, c3, c4])
    }
}

/// `f = 1 / (2 pi sqrt(L C))` in Hz.
pub fn resonance_frequency<T: Real>(inductance: T, capacitance: T) -> Result<T> {
    if !(inductance > T::zero() && capacitance > T::zero()) {
        return Err(Error::InvalidArgument(
            "inductance and capacitance must be positive".into(),
        ));
    }
    Ok(T::one() / (T::two_pi() * (inductance * capacitance).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire(alpha: f64) -> KineticInductor<f64> {
        KineticInductor::new(65e-12, 0.9e-9, 9.53e-3, alpha).unwrap()
    }

    #[test]
    fn zero_current_and_symmetry() {
        let w = wire(0.3);
        assert_eq!(w.kinetic_inductance(0.0).unwrap(), 0.9e-9 + 65e-12);
        for i in [1e-3, 4e-3, 9e-3] {
            assert_eq!(w.kinetic_inductance(i).unwrap(), w.kinetic_inductance(-i).unwrap());
        }
        let w0 = wire(0.0);
        let l = w0.kinetic_inductance(w0.istar / 2.0).unwrap();
        assert!((l - (0.9e-9 + 1.25 * 65e-12)).abs() < 1e-24);
    }

    #[test]
    fn critical_current_is_an_error() {
        let w = wire(0.3);
        assert!(matches!(
            w.kinetic_inductance(9.53e-3),
            Err(Error::BeyondCriticalCurrent { .. })
        ));
        assert!(w.expansion_coeffs(-1.0).is_err());
    }

    #[test]
    fn coefficients_at_zero_and_half_bias() {
        let w = wire(0.3);
        let c = w.expansion_coeffs(0.0).unwrap();
        assert_eq!(c[0], 0.0);
        assert_eq!(c[2], 0.0);
        let w0 = wire(0.0);
        let c = w0.expansion_coeffs(w0.istar / 2.0).unwrap();
        assert!((c[0] * w0.istar - 1.0).abs() < 1e-14);
        assert!((c[1] * w0.istar.powi(2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lc_frequency() {
        let f = resonance_frequency(1e-9f64, 1e-12).unwrap();
        assert!((f - 5.0329212104487e9).abs() < 1e3);
        let f4 = resonance_frequency(4e-9f64, 1e-12).unwrap();
        assert!((f4 / f - 0.5).abs() < 1e-15);
        assert!(resonance_frequency(0.0, 1e-12).is_err());
    }
}

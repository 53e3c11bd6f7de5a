//! Coupled electron-nuclear spin Hamiltonian, adiabatically labeled level
//! structure, transition catalogs and clock-transition search.
//!
//! Frequencies are ordinary frequencies in Hz throughout. The Zeeman energy
//! is `-gamma * B`, so with the default signed `gamma_e = -28 GHz/T` the
//! electron Zeeman term is `+28 GHz/T * Bz * Sz`.

mod clock;
mod operators;
mod spectrum;
mod transitions;

use std::fmt;

pub use clock::{find_clock_transition, scan_clock_transitions, ClockTransition, CLOCK_TOLERANCE};
pub use operators::{build_operators, single_spin, twice_spin, CMatrix, CVector, SpinOperators};
pub use spectrum::{labeled_spectrum, labeled_sweep, Eigensystem, LabeledSpectrum, DEFAULT_LABEL_STEP};
pub use transitions::{
    linewidth_estimate, transitions, write_transitions_csv, Transition, TransitionKind,
    SENSITIVITY_STEP,
};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Electron spin, nuclear spin and their couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem<T> {
    twice_s: u32,
    twice_i: u32,
    /// Electron gyromagnetic ratio (Hz/T, signed).
    pub gamma_e: T,
    /// Nuclear gyromagnetic ratio (Hz/T, signed).
    pub gamma_n: T,
    /// Isotropic hyperfine constant (Hz).
    pub hyperfine: T,
}

impl<T: Real> SpinSystem<T> {
    pub fn new(s: f64, i: f64, gamma_e: T, gamma_n: T, hyperfine: T) -> Result<Self> {
        let twice_s = twice_spin(s)?;
        let twice_i = twice_spin(i)?;
        for (name, v) in [("gamma_e", gamma_e), ("gamma_n", gamma_n), ("hyperfine", hyperfine)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(Self {
            twice_s,
            twice_i,
            gamma_e,
            gamma_n,
            hyperfine,
        })
    }

    /// Bismuth donor in silicon: S = 1/2, I = 9/2.
    pub fn bismuth() -> Self {
        Self {
            twice_s: 1,
            twice_i: 9,
            gamma_e: lit(-28.0e9),
            gamma_n: lit(8.0e6),
            hyperfine: lit(1.47507e9),
        }
    }

    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn i(&self) -> f64 {
        self.twice_i as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        (self.twice_s as usize + 1) * (self.twice_i as usize + 1)
    }

    pub fn operators(&self) -> SpinOperators<T> {
        operators::build_operators_twice(self.twice_s, self.twice_i)
    }

    /// Precomputes the field-independent pieces of the Hamiltonian.
    pub fn model(&self) -> SpinModel<T> {
        let ops = self.operators();
        let hf = ops.s_dot_i() * complex(self.hyperfine);
        let zeeman = -(&ops.sz * complex(self.gamma_e) + &ops.iz * complex(self.gamma_n));
        SpinModel {
            system: self.clone(),
            hyperfine_part: hf,
            zeeman_part: zeeman,
            ops,
        }
    }
}

impl Default for SpinSystem<f64> {
    fn default() -> Self {
        Self::bismuth()
    }
}

pub(crate) fn complex<T: Real>(x: T) -> num_complex::Complex<T> {
    num_complex::Complex::new(x, T::zero())
}

/// Spin system with cached operators; `H(Bz) = A S.I + Bz * dH/dBz`.
#[derive(Clone, Debug)]
pub struct SpinModel<T: Real> {
    pub system: SpinSystem<T>,
    pub ops: SpinOperators<T>,
    hyperfine_part: CMatrix<T>,
    zeeman_part: CMatrix<T>,
}

impl<T: Real> SpinModel<T> {
    pub fn hamiltonian(&self, bz: T) -> CMatrix<T> {
        &self.hyperfine_part + &self.zeeman_part * complex(bz)
    }

    /// `dH/dBz = -(gamma_e Sz + gamma_n Iz)`.
    pub fn field_derivative(&self) -> &CMatrix<T> {
        &self.zeeman_part
    }
}

/// `H = -(gamma_e Sz + gamma_n Iz) Bz + A S.I` in Hz.
pub fn hamiltonian<T: Real>(system: &SpinSystem<T>, bz: T) -> Result<CMatrix<T>> {
    if !bz.is_finite() {
        return Err(Error::InvalidArgument("field must be finite".into()));
    }
    Ok(system.model().hamiltonian(bz))
}

/// Adiabatic `|F, m>` label, stored as twice the quantum numbers so that
/// half-integer totals are representable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelLabel {
    pub twice_f: i32,
    pub twice_m: i32,
}

impl LevelLabel {
    pub const fn new(f: i32, m: i32) -> Self {
        Self {
            twice_f: 2 * f,
            twice_m: 2 * m,
        }
    }

    pub const fn from_twice(twice_f: i32, twice_m: i32) -> Self {
        Self { twice_f, twice_m }
    }

    pub fn f(&self) -> f64 {
        self.twice_f as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

fn fmt_half(f: &mut fmt::Formatter<'_>, twice: i32) -> fmt::Result {
    if twice % 2 == 0 {
        write!(f, "{}", twice / 2)
    } else {
        write!(f, "{}/2", twice)
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        fmt_half(f, self.twice_f)?;
        write!(f, ",")?;
        fmt_half(f, self.twice_m)?;
        write!(f, ">")
    }
}

impl std::str::FromStr for LevelLabel {
    type Err = Error;

    /// Parses `F,m` (optionally wrapped as `|F,m>`), with integers or
    /// halves written `3/2`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('>')
            .trim_end_matches('⟩');
        let parse_half = |p: &str| -> Result<i32> {
            let p = p.trim();
            if let Some(num) = p.strip_suffix("/2") {
                num.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad label component {p:?}")))
            } else {
                p.parse::<i32>()
                    .map(|v| 2 * v)
                    .map_err(|_| Error::InvalidArgument(format!("bad label component {p:?}")))
            }
        };
        let mut parts = inner.split(',');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => Ok(Self::from_twice(parse_half(a)?, parse_half(b)?)),
            _ => Err(Error::InvalidArgument(format!(
                "level label {s:?} is not of the form F,m"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix<f64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hamiltonian_is_hermitian_and_traceless() {
        let sys = SpinSystem::<f64>::bismuth();
        for bz in [0.0, 0.0256, 0.3, 1.0] {
            let h = hamiltonian(&sys, bz).unwrap();
            assert!(max_abs(&(&h - h.adjoint())) < 1e-14 * 1e10);
            assert!(h.trace().norm() < 1e-6 * sys.hyperfine);
        }
    }

    #[test]
    fn zero_field_has_two_eigenvalues() {
        let sys = SpinSystem::<f64>::bismuth();
        let eig = Eigensystem::new(&sys.model(), 0.0);
        let a = sys.hyperfine;
        let low = eig.energies.iter().filter(|e| (**e + 2.75 * a).abs() < 1e3).count();
        let high = eig.energies.iter().filter(|e| (**e - 2.25 * a).abs() < 1e3).count();
        assert_eq!((low, high), (9, 11));
    }

    #[test]
    fn label_parse_and_display() {
        let l: LevelLabel = "4,-1".parse().unwrap();
        assert_eq!(l, LevelLabel::new(4, -1));
        assert_eq!(l.to_string(), "|4,-1>");
        let h: LevelLabel = "|3/2,-1/2>".parse().unwrap();
        assert_eq!(h, LevelLabel::from_twice(3, -1));
        assert_eq!(h.to_string(), "|3/2,-1/2>");
        assert!("4".parse::<LevelLabel>().is_err());
    }

    #[test]
    fn nonfinite_field_rejected() {
        assert!(hamiltonian(&SpinSystem::<f64>::bismuth(), f64::NAN).is_err());
    }
}

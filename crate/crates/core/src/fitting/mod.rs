//! Least-squares extraction of resonator, tuning, coherence and line
//! parameters from traces.

mod exponential;
mod levmar;
mod lorentzian;
mod resonance;
mod tuning;

use std::fmt::Write as _;

pub use exponential::{fit_exponential, ExponentialModel};
pub use levmar::{levenberg_marquardt, LmOptions, LmOutcome, MAX_ITERATIONS, RELATIVE_TOLERANCE};
pub use lorentzian::{fit_lorentzian_peaks, lorentzian_peaks, LorentzianPeak};
pub use resonance::{fit_resonance, resonance_model, CouplingRegime, ResonanceFitOptions};
pub use tuning::{fit_tuning, TuningElement, TuningFitOptions};

use crate::io::fmt_num;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
    /// 1-sigma; infinite where the data do not constrain the parameter.
    pub sigmas: Vec<T>,
    pub residual_norm: T,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl<T: Real> FitResult<T> {
    pub(crate) fn from_outcome(names: &[&str], out: LmOutcome<T>) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            values: out.params,
            sigmas: out.sigmas,
            residual_norm: out.residual_norm,
            converged: out.converged,
            iterations: out.iterations,
            warnings: Vec::new(),
        }
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<T> {
        self.index(name).map(|k| self.values[k])
    }

    pub fn sigma(&self, name: &str) -> Option<T> {
        self.index(name).map(|k| self.sigmas[k])
    }

    /// `key = value` lines: the status, then each parameter and its
    /// `_sigma`, then any warnings.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "residual_norm = {}", fmt_num(self.residual_norm.to_f64_lossy()));
        for ((n, v), e) in self.names.iter().zip(&self.values).zip(&self.sigmas) {
            let _ = writeln!(s, "{n} = {}", fmt_num(v.to_f64_lossy()));
            let e = e.to_f64_lossy();
            if e.is_finite() {
                let _ = writeln!(s, "{n}_sigma = {}", fmt_num(e));
            } else {
                let _ = writeln!(s, "{n}_sigma = inf");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w:?}");
        }
        s
    }
}

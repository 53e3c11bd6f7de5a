use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use super::schedule::{EventKind, PulseEvent, PulseSchedule};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spin::{labeled_spectrum, transitions, LabeledSpectrum, LevelLabel, SpinSystem, TransitionKind};
use crate::trace::Trace;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const DEFAULT_NODES: usize = 201;

/// Boltzmann populations of the levels of `spectrum` at `temperature` (K),
/// in the spectrum's level order.
pub fn thermal_populations<T: Real>(spectrum: &LabeledSpectrum<T>, temperature: T) -> Result<Vec<T>> {
    if !(temperature > T::zero()) {
        return Err(Error::InvalidArgument("temperature must be positive".into()));
    }
    let e0 = spectrum.energies[0];
    let beta: T = lit::<T>(PLANCK / BOLTZMANN) / temperature;
    let w: Vec<T> = spectrum.energies.iter().map(|&e| (-(e - e0) * beta).exp()).collect();
    let z = w.iter().fold(T::zero(), |s, &x| s + x);
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Gauss-Hermite nodes and weights for `exp(-x^2)`, weights normalised to
/// sum to one (Golub-Welsch).
pub fn gauss_hermite<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one quadrature node".into()));
    }
    let mut j = DMatrix::<T>::zeros(n, n);
    for k in 1..n {
        let off = (lit::<T>(k as f64) / lit(2.0)).sqrt();
        j[(k, k - 1)] = off;
        j[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(T, T)> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let total = pairs.iter().fold(T::zero(), |s, p| s + p.1);
    Ok((
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1 / total).collect(),
    ))
}

/// Phenomenological inhomogeneous spin ensemble on one probed transition.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleModel<T> {
    /// Quadrature nodes across the detuning distribution.
    pub n_spins: usize,
    /// Gaussian standard deviation of spin detunings (Hz).
    pub detuning_sigma: T,
    /// s
    pub t1: T,
    pub t2: T,
    pub populations: BTreeMap<LevelLabel, T>,
    /// Probed transition (lower, upper).
    pub probe: (LevelLabel, LevelLabel),
    /// Resonator energy linewidth during emission (s^-1).
    pub resonator_linewidth: T,
}

impl<T: Real> EnsembleModel<T> {
    /// Thermal ensemble on `probe` with the measured coherence times.
    pub fn thermal(spectrum: &LabeledSpectrum<T>, probe: (LevelLabel, LevelLabel), temperature: T) -> Result<Self> {
        let pops = thermal_populations(spectrum, temperature)?;
        let model = Self {
            n_spins: DEFAULT_NODES,
            // 90 kHz FWHM
            detuning_sigma: lit(90.0e3 / 2.354_820_045),
            t1: lit(53.0),
            t2: lit(0.45),
            populations: spectrum.labels.iter().copied().zip(pops).collect(),
            probe,
            resonator_linewidth: lit(9.4e4 + 7.5e5),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::InvalidArgument("n_spins must be positive".into()));
        }
        if !(self.t1 > T::zero() && self.t2 > T::zero()) {
            return Err(Error::InvalidArgument("T1 and T2 must be positive".into()));
        }
        if !(self.detuning_sigma >= T::zero()) || !(self.resonator_linewidth > T::zero()) {
            return Err(Error::InvalidArgument("widths must be non-negative".into()));
        }
        let mut sum = T::zero();
        for (l, &p) in &self.populations {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::InvalidArgument(format!("population of {l} outside [0, 1]")));
            }
            sum += p;
        }
        if (sum - T::one()).abs() > lit(1e-9) {
            return Err(Error::InvalidArgument(format!(
                "populations sum to {}, not 1",
                sum.to_f64_lossy()
            )));
        }
        for l in [self.probe.0, self.probe.1] {
            if !self.populations.contains_key(&l) {
                return Err(Error::InvalidConfiguration(format!("probed level {l} has no population")));
            }
        }
        Ok(())
    }

    /// Population difference driving the echo.
    pub fn polarization(&self) -> T {
        self.populations[&self.probe.0] - self.populations[&self.probe.1]
    }
}

/// Normalised echo amplitude when mode A is detuned by `delta_f` (Hz)
/// during emission: `(k/2) / sqrt((k/2)^2 + (2 pi delta_f)^2)`.
pub fn echo_silencing<T: Real>(kappa_tot: T, delta_f: T) -> T {
    let half = kappa_tot * lit(0.5);
    let w = T::two_pi() * delta_f;
    half / (half * half + w * w).sqrt()
}

#[derive(Clone, Debug)]
pub struct EchoResult<T> {
    /// Echo field vs absolute time.
    pub trace: Trace<T>,
    /// Complex echo at its refocusing time.
    pub amplitude: Complex<T>,
    /// s
    pub echo_time: T,
}

fn centre<T: Real>(e: &PulseEvent<T>) -> T {
    e.t_start + e.duration * lit(0.5)
}

/// Hahn echo of the ensemble for a schedule with exactly two control pulses
/// (refocusing) or three (inversion pre-pulse, then refocusing). Pulse
/// amplitudes are flip angles (rad) and pulses act at their centres.
///
/// Each spin packet at detuning `d` accumulates `exp(i 2 pi d t)`; the
/// refocusing pulse conjugates the phase, so the packets realign at
/// `t_echo = 2 t2 - t1`. The echo is scaled by `exp(-(t - t1)/T2)`, by the
/// longitudinal magnetisation left by an inversion pulse, and by the
/// silencing factor of any detuning ramp active at `t_echo`.
pub fn hahn_echo<T: Real>(ensemble: &EnsembleModel<T>, schedule: &PulseSchedule<T>, readout: &[T]) -> Result<EchoResult<T>> {
    ensemble.validate()?;
    let pulses: Vec<&PulseEvent<T>> = schedule.of_kind(EventKind::MicrowaveDrive).collect();
    let (pre, p1, p2) = match pulses.as_slice() {
        [a, b] => (None, *a, *b),
        [z, a, b] => (Some(*z), *a, *b),
        other => {
            return Err(Error::InvalidSchedule(format!(
                "echo needs two control pulses (or three with an inversion pulse), found {}",
                other.len()
            )))
        }
    };
    let (c1, c2) = (centre(p1), centre(p2));
    let echo_time = c2 + c2 - c1;

    let ramps: Vec<&PulseEvent<T>> = schedule.of_kind(EventKind::DetuningRamp).collect();
    for r in &ramps {
        if pulses.iter().any(|p| r.t_start < p.t_end() && p.t_start < r.t_end()) {
            return Err(Error::InvalidSchedule(
                "detuning ramp overlaps a control pulse; apply it in the emission window only".into(),
            ));
        }
    }
    let shift = ramps
        .iter()
        .filter(|r| r.is_active(echo_time))
        .fold(T::zero(), |s, r| s + r.amplitude);
    let silencing = echo_silencing(ensemble.resonator_linewidth, shift);

    let z = match pre {
        Some(p0) => {
            let wait = c1 - centre(p0);
            T::one() - (T::one() - p0.amplitude.cos()) * (-wait / ensemble.t1).exp()
        }
        None => T::one(),
    };
    let half: T = lit(0.5);
    let mag = p1.amplitude.sin() * (p2.amplitude * half).sin().powi(2);
    let ph = p2.phase + p2.phase - p1.phase;
    let prefactor = Complex::new(ph.cos(), ph.sin()) * (mag * z * silencing * ensemble.polarization());

    let (nodes, weights) = gauss_hermite::<T>(ensemble.n_spins)?;
    let scale = lit::<T>(2.0).sqrt() * ensemble.detuning_sigma;
    let dets: Vec<T> = nodes.iter().map(|&x| x * scale).collect();
    let field = |t: T| -> Complex<T> {
        let dt = t - echo_time;
        let mut s = Complex::new(T::zero(), T::zero());
        for (d, w) in dets.iter().zip(&weights) {
            let a = T::two_pi() * *d * dt;
            s += Complex::new(a.cos(), a.sin()) * *w;
        }
        s * prefactor * (-(t - c1) / ensemble.t2).exp()
    };
    let values = readout.iter().map(|&t| field(t)).collect();
    Ok(EchoResult {
        trace: Trace::new(readout.to_vec(), values)?,
        amplitude: field(echo_time),
        echo_time,
    })
}

/// Echo amplitude while the resonator is parked at each of `freqs` (Hz):
/// every microwave transition contributes `dipole^2 * dp` times a Gaussian
/// of standard deviation `sigma` (Hz) around its frequency.
pub fn echo_spectrum<T: Real>(system: &SpinSystem<T>, bz: T, freqs: &[T], sigma: T, temperature: T) -> Result<Trace<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::InvalidArgument("line width must be positive".into()));
    }
    let spectrum = labeled_spectrum(system, bz)?;
    let pops = thermal_populations(&spectrum, temperature)?;
    let lines: Vec<(T, T)> = transitions(system, &spectrum, Some(TransitionKind::Esr))?
        .into_iter()
        .map(|t| {
            let dp = pops[spectrum.index_of(t.lower).unwrap_or(0)] - pops[spectrum.index_of(t.upper).unwrap_or(0)];
            (t.frequency, t.dipole * t.dipole * dp.abs())
        })
        .collect();
    let half: T = lit(-0.5);
    let values: Vec<T> = freqs
        .iter()
        .map(|&f| {
            lines.iter().fold(T::zero(), |s, &(f0, w)| {
                let x = (f - f0) / sigma;
                s + w * (half * x * x).exp()
            })
        })
        .collect();
    Trace::from_real(freqs.to_vec(), &values)
}

/// `pi/2 - tau - pi` with square pulses of length `pulse`, optionally
/// preceded by a `pi` inversion pulse `inversion_wait` earlier.
pub fn hahn_schedule<T: Real>(tau: T, pulse: T, inversion_wait: Option<T>) -> Result<PulseSchedule<T>> {
    let mut events = Vec::new();
    let offset = match inversion_wait {
        Some(w) => {
            events.push(PulseEvent::new(EventKind::MicrowaveDrive, T::zero(), pulse, T::pi()));
            w
        }
        None => T::zero(),
    };
    events.push(PulseEvent::new(EventKind::MicrowaveDrive, offset, pulse, T::frac_pi_2()));
    events.push(PulseEvent::new(EventKind::MicrowaveDrive, offset + tau, pulse, T::pi()));
    PulseSchedule::new(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite::<f64>(20).unwrap();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m2 - 0.5).abs() < 1e-12);
        assert!((m4 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn silencing_half_point() {
        let k = 8.44e5;
        let df = 3f64.sqrt() / 2.0 * k / std::f64::consts::TAU;
        assert!((echo_silencing(k, df) - 0.5).abs() < 1e-12);
        assert_eq!(echo_silencing(k, 0.0), 1.0);
    }
}

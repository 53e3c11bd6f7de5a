use super::ensemble::thermal_populations;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spin::{labeled_spectrum, transitions, LevelLabel, SpinSystem, Transition, TransitionKind};
use crate::trace::Trace;

/// One microwave transition contributing to the detected echo.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndorProbe<T> {
    pub lower: LevelLabel,
    pub upper: LevelLabel,
    /// Relative share of the resonator's spectral overlap.
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndorModel<T> {
    /// T
    pub bz: T,
    pub probes: Vec<EndorProbe<T>>,
    /// RF pulse area; 1 saturates an on-resonance transition.
    pub rf_area: T,
    /// Field noise setting the NMR linewidths (T).
    pub delta_b0: T,
    /// K
    pub temperature: T,
}

impl<T: Real> EndorModel<T> {
    /// 13.49 mT, probing `|4,0>-|5,1>` with some overlap from `|4,1>-|5,0>`.
    pub fn bismuth() -> Self {
        Self {
            bz: lit(13.49e-3),
            probes: vec![
                EndorProbe {
                    lower: LevelLabel::new(4, 0),
                    upper: LevelLabel::new(5, 1),
                    weight: lit(0.8),
                },
                EndorProbe {
                    lower: LevelLabel::new(4, 1),
                    upper: LevelLabel::new(5, 0),
                    weight: lit(0.2),
                },
            ],
            rf_area: T::one(),
            delta_b0: lit(4e-6),
            temperature: lit(10e-3),
        }
    }
}

/// Level bookkeeping during an ENDOR shot.
///
/// `populations` are the level populations. Each probe also carries a
/// marker vector, initially one half on each of its two levels: the share of
/// the probe's microwave polarisation still sitting on a level. RF
/// saturation of an NMR transition mixes both quantities between its two
/// levels, and the echo from a probe is proportional to the marker left on
/// its own levels.
#[derive(Clone, Debug, PartialEq)]
pub struct EndorState<T> {
    pub labels: Vec<LevelLabel>,
    pub populations: Vec<T>,
    pub markers: Vec<Vec<T>>,
    probe_levels: Vec<(usize, usize)>,
    probe_weights: Vec<T>,
}

impl<T: Real> EndorState<T> {
    /// Partially equalises levels `a` and `b`; `s = 1` fully equalises.
    pub fn saturate(&mut self, a: usize, b: usize, s: T) {
        let half: T = lit(0.5);
        let mix = |v: &mut Vec<T>| {
            let d = (v[a] - v[b]) * s * half;
            v[a] -= d;
            v[b] += d;
        };
        mix(&mut self.populations);
        for m in &mut self.markers {
            mix(m);
        }
    }

    /// Echo normalised to the unperturbed shot.
    pub fn echo(&self) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for ((m, &(l, u)), &a) in self.markers.iter().zip(&self.probe_levels).zip(&self.probe_weights) {
            num += a * (m[l] + m[u]);
            den += a;
        }
        num / den
    }

    pub fn total_population(&self) -> T {
        self.populations.iter().fold(T::zero(), |s, &p| s + p)
    }
}

/// Everything the scan needs at one field.
#[derive(Clone, Debug)]
pub struct EndorSetup<T: Real> {
    pub initial: EndorState<T>,
    /// NMR-like transitions with their linewidths (Hz).
    pub nmr: Vec<(Transition<T>, T)>,
}

pub fn endor_setup<T: Real>(system: &SpinSystem<T>, model: &EndorModel<T>) -> Result<EndorSetup<T>> {
    if model.probes.is_empty() {
        return Err(Error::InvalidConfiguration("no probed transition given".into()));
    }
    if !(model.rf_area >= T::zero()) || !(model.delta_b0 > T::zero()) {
        return Err(Error::InvalidArgument("rf area and field noise must be positive".into()));
    }
    let spectrum = labeled_spectrum(system, model.bz)?;
    let all = transitions(system, &spectrum, None)?;
    let populations = thermal_populations(&spectrum, model.temperature)?;
    let n = spectrum.labels.len();
    let mut markers = Vec::new();
    let mut probe_levels = Vec::new();
    let mut probe_weights = Vec::new();
    for p in &model.probes {
        let found = all
            .iter()
            .any(|t| t.kind == TransitionKind::Esr && t.connects(p.lower, p.upper));
        let (Some(l), Some(u)) = (spectrum.index_of(p.lower), spectrum.index_of(p.upper)) else {
            return Err(Error::InvalidConfiguration(format!(
                "probed transition {}<->{} not in the spectrum",
                p.lower, p.upper
            )));
        };
        if !found {
            return Err(Error::InvalidConfiguration(format!(
                "{}<->{} is not an allowed microwave transition at {} T",
                p.lower,
                p.upper,
                model.bz.to_f64_lossy()
            )));
        }
        if !(p.weight >= T::zero()) {
            return Err(Error::InvalidConfiguration("probe weights must be non-negative".into()));
        }
        let mut m = vec![T::zero(); n];
        m[l] = lit(0.5);
        m[u] = lit(0.5);
        markers.push(m);
        probe_levels.push((l, u));
        probe_weights.push(p.weight * (populations[l] - populations[u]).abs());
    }
    if probe_weights.iter().all(|&w| w == T::zero()) {
        return Err(Error::InvalidConfiguration("probed transitions carry no polarisation".into()));
    }
    let nmr = all
        .into_iter()
        .filter(|t| t.kind == TransitionKind::Nmr)
        .map(|t| {
            let width = t.sensitivity.abs() * model.delta_b0;
            (t, width)
        })
        .collect();
    Ok(EndorSetup {
        initial: EndorState {
            labels: spectrum.labels.clone(),
            populations,
            markers,
            probe_levels,
            probe_weights,
        },
        nmr,
    })
}

impl<T: Real> EndorSetup<T> {
    /// State after an RF pulse at `f` (Hz) with the given area.
    pub fn after_rf(&self, f: T, area: T) -> EndorState<T> {
        let mut st = self.initial.clone();
        let strength = area.min(T::one());
        for (t, width) in &self.nmr {
            let s = if *width > T::zero() {
                let x = (f - t.frequency) / (*width * lit(0.5));
                strength / (T::one() + x * x)
            } else if f == t.frequency {
                strength
            } else {
                T::zero()
            };
            let a = st.labels.iter().position(|l| *l == t.lower).expect("label present");
            let b = st.labels.iter().position(|l| *l == t.upper).expect("label present");
            st.saturate(a, b, s);
        }
        st
    }
}

/// Normalised echo against the RF frequency (Hz).
pub fn endor_scan<T: Real>(system: &SpinSystem<T>, model: &EndorModel<T>, f_nmr: &[T]) -> Result<Trace<T>> {
    let setup = endor_setup(system, model)?;
    let values: Vec<T> = f_nmr.iter().map(|&f| setup.after_rf(f, model.rf_area).echo()).collect();
    Trace::from_real(f_nmr.to_vec(), &values)
}

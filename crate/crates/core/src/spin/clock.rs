use super::transitions::transitions_with_model;
use super::{LabeledSpectrum, LevelLabel, SpinModel, SpinSystem, TransitionKind, SENSITIVITY_STEP};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Clock-transition tolerance on `|df/dB|`: 1 kHz/mT in Hz/T.
pub const CLOCK_TOLERANCE: f64 = 1.0e6;
const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ClockTransition<T> {
    pub lower: LevelLabel,
    pub upper: LevelLabel,
    /// T
    pub field: T,
    /// Hz
    pub frequency: T,
    /// Residual `df/dB` at `field` (Hz/T).
    pub sensitivity: T,
}

/// Evaluates a labeled transition while reusing previously tracked spectra
/// as continuation anchors.
struct TransitionProbe<'a, T: Real> {
    model: &'a SpinModel<T>,
    a: LevelLabel,
    b: LevelLabel,
    anchors: Vec<LabeledSpectrum<T>>,
}

impl<'a, T: Real> TransitionProbe<'a, T> {
    fn spectrum_at(&mut self, bz: T) -> Result<LabeledSpectrum<T>> {
        let nearest = self
            .anchors
            .iter()
            .min_by(|x, y| {
                (x.bz - bz)
                    .abs()
                    .partial_cmp(&(y.bz - bz).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("at least one anchor");
        let spec = nearest.continue_to(self.model, bz)?;
        self.anchors.push(spec.clone());
        Ok(spec)
    }

    /// Signed gap `E_b - E_a`.
    fn gap(&self, spec: &LabeledSpectrum<T>) -> Result<T> {
        let missing = |l: LevelLabel| Error::InvalidArgument(format!("no level labeled {l}"));
        Ok(spec.energy_of(self.b).ok_or_else(|| missing(self.b))?
            - spec.energy_of(self.a).ok_or_else(|| missing(self.a))?)
    }

    fn sensitivity(&mut self, bz: T) -> Result<(T, T)> {
        let h: T = lit(SENSITIVITY_STEP);
        let center = self.spectrum_at(bz)?;
        let plus = center.continue_to(self.model, bz + h)?;
        let minus = center.continue_to(self.model, bz - h)?;
        let s = (self.gap(&plus)? - self.gap(&minus)?) / (h + h);
        Ok((self.gap(&center)?, s))
    }
}

/// Locates the zero of `df/dB` for the transition between levels `a` and `b`
/// inside `bracket` (T) by safeguarded secant iteration on the
/// finite-difference sensitivity.
pub fn find_clock_transition<T: Real>(
    system: &SpinSystem<T>,
    a: LevelLabel,
    b: LevelLabel,
    bracket: (T, T),
) -> Result<ClockTransition<T>> {
    let model = system.model();
    let (lo, hi) = bracket;
    if !(lo >= T::zero() && hi > lo && hi <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "bracket [{}, {}] T must satisfy 0 <= lo < hi <= 1",
            lo.to_f64_lossy(),
            hi.to_f64_lossy()
        )));
    }
    let anchor = LabeledSpectrum::zero_field(&model)?.continue_to(&model, lo)?;
    find_from_anchor(&model, a, b, bracket, anchor)
}

fn find_from_anchor<T: Real>(
    model: &SpinModel<T>,
    a: LevelLabel,
    b: LevelLabel,
    (mut lo, mut hi): (T, T),
    anchor: LabeledSpectrum<T>,
) -> Result<ClockTransition<T>> {
    let tol: T = lit(CLOCK_TOLERANCE);
    let mut probe = TransitionProbe {
        model,
        a,
        b,
        anchors: vec![anchor],
    };
    let (_, mut s_lo) = probe.sensitivity(lo)?;
    let (_, mut s_hi) = probe.sensitivity(hi)?;
    if s_lo.signum() == s_hi.signum() && s_lo.abs() > tol && s_hi.abs() > tol {
        return Err(Error::NoRoot(format!(
            "df/dB of {a}<->{b} does not change sign in [{}, {}] T",
            lo.to_f64_lossy(),
            hi.to_f64_lossy()
        )));
    }

    let finish = |probe: &mut TransitionProbe<T>, bz: T| -> Result<ClockTransition<T>> {
        let (gap, s) = probe.sensitivity(bz)?;
        let (lower, upper) = if gap >= T::zero() { (a, b) } else { (b, a) };
        Ok(ClockTransition {
            lower,
            upper,
            field: bz,
            frequency: gap.abs(),
            sensitivity: s,
        })
    };
    if s_lo.abs() <= tol {
        return finish(&mut probe, lo);
    }
    if s_hi.abs() <= tol {
        return finish(&mut probe, hi);
    }

    // Illinois-modified regula falsi: keeps the bracket, converges
    // superlinearly on the nearly linear sensitivity curve.
    let mut side = 0i8;
    let min_width: T = lit(1.0e-12);
    for _ in 0..MAX_ITERATIONS {
        let mut x = (lo * s_hi - hi * s_lo) / (s_hi - s_lo);
        if !(x > lo && x < hi) {
            x = (lo + hi) * lit(0.5);
        }
        let (_, s) = probe.sensitivity(x)?;
        if s.abs() <= tol || hi - lo < min_width {
            return finish(&mut probe, x);
        }
        if s.signum() == s_hi.signum() {
            hi = x;
            s_hi = s;
            if side == -1 {
                s_lo *= lit(0.5);
            }
            side = -1;
        } else {
            lo = x;
            s_lo = s;
            if side == 1 {
                s_hi *= lit(0.5);
            }
            side = 1;
        }
    }
    Err(Error::NoRoot(format!(
        "clock-transition search for {a}<->{b} did not converge"
    )))
}

/// Scans every ESR-like transition between `step` and `max_field` for sign
/// changes of `df/dB` and refines each into a clock transition.
pub fn scan_clock_transitions<T: Real>(
    system: &SpinSystem<T>,
    max_field: T,
    step: T,
) -> Result<Vec<ClockTransition<T>>> {
    if !(step > T::zero() && max_field > step) {
        return Err(Error::InvalidArgument("scan needs 0 < step < max_field".into()));
    }
    let model = system.model();
    let mut spec = LabeledSpectrum::zero_field(&model)?.continue_to(&model, step)?;
    let mut prev: Option<(LabeledSpectrum<T>, Vec<(LevelLabel, LevelLabel, T)>)> = None;
    let mut found = Vec::new();
    let mut bz = step;
    while bz <= max_field {
        let current: Vec<(LevelLabel, LevelLabel, T)> =
            transitions_with_model(&model, &spec, Some(TransitionKind::Esr))?
                .into_iter()
                .map(|t| {
                    // orient by label so signs are comparable between fields
                    if t.lower < t.upper {
                        (t.lower, t.upper, t.sensitivity)
                    } else {
                        (t.upper, t.lower, -t.sensitivity)
                    }
                })
                .collect();
        if let Some((prev_spec, prev_list)) = &prev {
            for &(a, b, s) in &current {
                let Some(&(_, _, s_prev)) = prev_list.iter().find(|(pa, pb, _)| *pa == a && *pb == b) else {
                    continue;
                };
                if s_prev.signum() != s.signum() {
                    let ct = find_from_anchor(&model, a, b, (prev_spec.bz, bz), prev_spec.clone())?;
                    found.push(ct);
                }
            }
        }
        prev = Some((spec.clone(), current));
        let next = bz + step;
        if next > max_field {
            break;
        }
        spec = spec.continue_to(&model, next)?;
        bz = next;
    }
    found.sort_by(|x, y| x.field.partial_cmp(&y.field).unwrap_or(std::cmp::Ordering::Equal));
    Ok(found)
}

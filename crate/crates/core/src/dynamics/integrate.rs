use num_complex::Complex;

use super::modes::ModePair;
use super::schedule::{EventKind, PulseEvent, PulseSchedule};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::trace::Trace;

/// Steps per inverse of the fastest rate when no step is given.
pub const DEFAULT_STEPS_PER_RATE: f64 = 40.0;
/// Coarsest step accepted, in the same units.
pub const MIN_STEPS_PER_RATE: f64 = 20.0;

#[derive(Clone, Debug)]
pub struct ModeTraces<T> {
    pub a: Trace<T>,
    pub b: Trace<T>,
    /// Step actually used (s).
    pub dt: T,
}

type State<T> = [Complex<T>; 2];

struct Segment<'a, T> {
    modes: &'a ModePair<T>,
    drives: Vec<&'a PulseEvent<T>>,
    g: T,
    delta_a: T,
    frame: T,
}

impl<T: Real> Segment<'_, T> {
    fn drive(&self, t: T) -> Complex<T> {
        let mut sum = Complex::new(T::zero(), T::zero());
        for e in &self.drives {
            let offset = if e.frequency == T::zero() {
                T::zero()
            } else {
                e.frequency - self.frame
            };
            let phase = e.phase - T::two_pi() * offset * t;
            sum += Complex::new(phase.cos(), phase.sin()) * e.amplitude;
        }
        sum
    }

    fn rhs(&self, t: T, y: &State<T>) -> State<T> {
        let half: T = lit(0.5);
        let m = self.modes;
        let i = Complex::new(T::zero(), T::one());
        let da = -(Complex::new(half * m.kappa_a(), self.delta_a)) * y[0] - i * self.g * y[1]
            + self.drive(t) * m.kappa_ca.sqrt();
        let db = -(Complex::new(half * m.kappa_b(), m.delta_b)) * y[1] - i * self.g * y[0];
        [da, db]
    }

    fn rk4(&self, t: T, y: State<T>, h: T) -> State<T> {
        let half: T = lit(0.5);
        let axpy = |y: &State<T>, k: &State<T>, s: T| [y[0] + k[0] * s, y[1] + k[1] * s];
        let k1 = self.rhs(t, &y);
        let k2 = self.rhs(t + half * h, &axpy(&y, &k1, half * h));
        let k3 = self.rhs(t + half * h, &axpy(&y, &k2, half * h));
        let k4 = self.rhs(t + h, &axpy(&y, &k3, h));
        let sixth = h / lit(6.0);
        let two: T = lit(2.0);
        [
            y[0] + (k1[0] + k2[0] * two + k3[0] * two + k4[0]) * sixth,
            y[1] + (k1[1] + k2[1] * two + k3[1] * two + k4[1]) * sixth,
        ]
    }
}

/// Fastest rate the integrator must resolve (s^-1).
pub fn max_rate<T: Real>(modes: &ModePair<T>, schedule: &PulseSchedule<T>) -> T {
    let two_pi = T::two_pi();
    let frame = modes.fa - modes.delta_a / two_pi;
    let pump: T = schedule
        .of_kind(EventKind::PumpWindow)
        .fold(T::zero(), |s, e| s + e.amplitude.abs());
    let ramp: T = schedule
        .of_kind(EventKind::DetuningRamp)
        .fold(T::zero(), |m, e| m.max(e.amplitude.abs()));
    let carrier = schedule
        .of_kind(EventKind::MicrowaveDrive)
        .filter(|e| e.frequency != T::zero())
        .fold(T::zero(), |m, e| m.max((e.frequency - frame).abs()));
    let two: T = lit(2.0);
    [
        modes.kappa_a(),
        modes.kappa_b(),
        two * (modes.g3wm.abs() + pump),
        modes.delta_a.abs() + two_pi * ramp,
        modes.delta_b.abs(),
        two_pi * carrier,
    ]
    .into_iter()
    .fold(T::zero(), |m, r| m.max(r))
}

/// Fixed-step RK4 integration of
/// `a' = -(kappa_a/2 + i delta_a(t)) a - i g(t) b + sqrt(kappa_ca) alpha(t)`,
/// `b' = -(kappa_b/2 + i delta_b) b - i g(t) a`
/// from `a = b = 0` at `t = 0`, sampled at `t_grid`.
///
/// The frame rotates at `fa - delta_a / 2 pi`. Steps never straddle an event
/// edge, so parameter switches land exactly on a step boundary.
pub fn integrate_modes<T: Real>(
    modes: &ModePair<T>,
    schedule: &PulseSchedule<T>,
    t_grid: &[T],
    dt: Option<T>,
) -> Result<ModeTraces<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    integrate_modes_from(modes, schedule, t_grid, dt, [zero, zero])
}

/// As [`integrate_modes`], starting from `(a, b) = initial` at `t = 0`.
pub fn integrate_modes_from<T: Real>(
    modes: &ModePair<T>,
    schedule: &PulseSchedule<T>,
    t_grid: &[T],
    dt: Option<T>,
    initial: [Complex<T>; 2],
) -> Result<ModeTraces<T>> {
    modes.validate()?;
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid[0] < T::zero() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "time grid must be non-negative and strictly increasing".into(),
        ));
    }
    let rate = max_rate(modes, schedule);
    let limit = if rate > T::zero() {
        T::one() / (lit::<T>(MIN_STEPS_PER_RATE) * rate)
    } else {
        T::max_value().unwrap_or_else(|| lit(f64::MAX))
    };
    let dt = match dt {
        Some(h) => h,
        None if rate > T::zero() => T::one() / (lit::<T>(DEFAULT_STEPS_PER_RATE) * rate),
        None => *t_grid.last().expect("non-empty grid") / lit(1000.0),
    };
    if !(dt > T::zero()) || dt > limit {
        return Err(Error::Stiffness {
            step: dt.to_f64_lossy(),
            max_rate: rate.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }

    let frame = modes.fa - modes.delta_a / T::two_pi();
    let mut stops: Vec<(T, Option<usize>)> = schedule
        .breakpoints()
        .into_iter()
        .filter(|&b| b > T::zero() && b < *t_grid.last().expect("non-empty grid"))
        .map(|b| (b, None))
        .collect();
    stops.extend(t_grid.iter().enumerate().map(|(k, &t)| (t, Some(k))));
    stops.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));

    let zero = Complex::new(T::zero(), T::zero());
    let mut y: State<T> = initial;
    let mut t = T::zero();
    let mut a_out = vec![zero; t_grid.len()];
    let mut b_out = vec![zero; t_grid.len()];
    for (stop, idx) in stops {
        let span = stop - t;
        if span > T::zero() {
            let mid = t + span * lit(0.5);
            let g = modes.g3wm
                + schedule
                    .active(EventKind::PumpWindow, mid)
                    .fold(T::zero(), |s, e| s + e.amplitude);
            let ramp = schedule
                .active(EventKind::DetuningRamp, mid)
                .fold(T::zero(), |s, e| s + e.amplitude);
            let seg = Segment {
                modes,
                drives: schedule.active(EventKind::MicrowaveDrive, mid).collect(),
                g,
                delta_a: modes.delta_a + T::two_pi() * ramp,
                frame,
            };
            let n = (span / dt).ceil().to_f64_lossy().max(1.0);
            let h = span / lit(n);
            for k in 0..n as usize {
                y = seg.rk4(t + h * lit(k as f64), y, h);
            }
            t = stop;
        }
        if let Some(k) = idx {
            a_out[k] = y[0];
            b_out[k] = y[1];
        }
    }
    Ok(ModeTraces {
        a: Trace::new(t_grid.to_vec(), a_out)?,
        b: Trace::new(t_grid.to_vec(), b_out)?,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_coarse_step_is_stiff() {
        let m = ModePair::<f64>::device();
        let s = PulseSchedule::new(vec![]).unwrap();
        let r = integrate_modes(&m, &s, &[0.0, 1e-6], Some(1e-6));
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }

    #[test]
    fn free_decay_of_driven_mode() {
        let m = ModePair::<f64>::device();
        let s = PulseSchedule::new(vec![PulseEvent::new(EventKind::MicrowaveDrive, 0.0, 2e-6, 1.0)]).unwrap();
        let grid = [2e-6, 4e-6, 6e-6];
        let tr = integrate_modes(&m, &s, &grid, None).unwrap();
        let mags = tr.a.magnitudes();
        let rate = (mags[0] / mags[2]).ln() / 4e-6;
        assert!((rate / (0.5 * m.kappa_a()) - 1.0).abs() < 1e-6, "{rate}");
    }
}

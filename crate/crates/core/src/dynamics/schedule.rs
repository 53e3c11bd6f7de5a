use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Drive on mode A. `amplitude` is the input field (sqrt(photons/s))
    /// for mode integration and the flip angle (rad) for spin ensembles.
    MicrowaveDrive,
    /// Radio-frequency tone; `amplitude` is the pulse area (1 saturates).
    RfDrive,
    /// Conversion pump; `amplitude` adds to `g3wm` (s^-1).
    PumpWindow,
    /// Shift of the mode-A frequency by `amplitude` Hz while active.
    DetuningRamp,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::MicrowaveDrive,
        EventKind::RfDrive,
        EventKind::PumpWindow,
        EventKind::DetuningRamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::MicrowaveDrive => "microwave-drive",
            EventKind::RfDrive => "rf-drive",
            EventKind::PumpWindow => "pump-window",
            EventKind::DetuningRamp => "detuning-ramp",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSchedule(format!("unknown event kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEvent<T> {
    /// s
    pub t_start: T,
    /// s
    pub duration: T,
    pub kind: EventKind,
    pub amplitude: T,
    /// Absolute carrier frequency (Hz); zero means "at the frame frequency".
    pub frequency: T,
    /// rad
    pub phase: T,
}

impl<T: Real> PulseEvent<T> {
    pub fn new(kind: EventKind, t_start: T, duration: T, amplitude: T) -> Self {
        Self {
            t_start,
            duration,
            kind,
            amplitude,
            frequency: T::zero(),
            phase: T::zero(),
        }
    }

    pub fn with_frequency(self, frequency: T) -> Self {
        Self { frequency, ..self }
    }

    pub fn with_phase(self, phase: T) -> Self {
        Self { phase, ..self }
    }

    pub fn t_end(&self) -> T {
        self.t_start + self.duration
    }

    /// Active on the half-open window `[t_start, t_end)`.
    pub fn is_active(&self, t: T) -> bool {
        t >= self.t_start && t < self.t_end()
    }
}

/// Timed events sorted by start time.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PulseSchedule<T> {
    events: Vec<PulseEvent<T>>,
}

impl<T: Real> PulseSchedule<T> {
    pub fn new(mut events: Vec<PulseEvent<T>>) -> Result<Self> {
        for (k, e) in events.iter().enumerate() {
            if !(e.duration >= T::zero() && e.duration.is_finite()) {
                return Err(Error::InvalidSchedule(format!("event {k} has a negative duration")));
            }
            if !(e.t_start >= T::zero() && e.t_start.is_finite()) {
                return Err(Error::InvalidSchedule(format!("event {k} starts before t = 0")));
            }
            if !(e.amplitude.is_finite() && e.frequency.is_finite() && e.phase.is_finite()) {
                return Err(Error::InvalidSchedule(format!("event {k} has a non-finite parameter")));
            }
        }
        events.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self { events })
    }

    pub fn events(&self) -> &[PulseEvent<T>] {
        &self.events
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &PulseEvent<T>> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn active(&self, kind: EventKind, t: T) -> impl Iterator<Item = &PulseEvent<T>> {
        self.of_kind(kind).filter(move |e| e.is_active(t))
    }

    /// Every start and end time, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b: Vec<T> = self
            .events
            .iter()
            .flat_map(|e| [e.t_start, e.t_end()])
            .collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        b.dedup();
        b
    }

    pub fn end(&self) -> T {
        self.events.iter().fold(T::zero(), |m, e| m.max(e.t_end()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_validated() {
        let s = PulseSchedule::new(vec![
            PulseEvent::new(EventKind::PumpWindow, 2.0, 1.0, 1.0),
            PulseEvent::new(EventKind::MicrowaveDrive, 0.0, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(s.events()[0].kind, EventKind::MicrowaveDrive);
        assert_eq!(s.breakpoints(), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(PulseSchedule::new(vec![PulseEvent::new(EventKind::RfDrive, 0.0, -1.0, 1.0)]).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in EventKind::ALL {
            assert_eq!(k.name().parse::<EventKind>().unwrap(), k);
        }
        assert!("laser".parse::<EventKind>().is_err());
    }
}

//! Two-mode input-output dynamics and pulse-sequence experiments on a
//! phenomenological spin ensemble.
//!
//! Rates are energy decay rates in s^-1; field amplitudes decay at half of
//! them. Detunings and couplings are angular (s^-1), carrier frequencies
//! are in Hz.

mod absorption;
mod endor;
mod ensemble;
mod integrate;
mod modes;
mod schedule;

pub use absorption::{absorption_map, write_absorption_csv, AbsorptionModel, AbsorptionPoint};
pub use endor::{endor_scan, endor_setup, EndorModel, EndorProbe, EndorSetup, EndorState};
pub use ensemble::{
    echo_silencing, echo_spectrum, gauss_hermite, hahn_echo, hahn_schedule, thermal_populations, EchoResult, EnsembleModel,
    BOLTZMANN, DEFAULT_NODES, PLANCK,
};
pub use integrate::{integrate_modes, integrate_modes_from, max_rate, ModeTraces, DEFAULT_STEPS_PER_RATE, MIN_STEPS_PER_RATE};
pub use modes::{converted_reflection, linear_response, reflection_s11, s11_single, steady_state, ModePair, Probe};
pub use schedule::{EventKind, PulseEvent, PulseSchedule};

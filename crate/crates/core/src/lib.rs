//! Simulation and data-reduction toolkit for a frequency- and
//! bandwidth-tunable kinetic-inductance resonator coupled to bismuth donor
//! spins in silicon.

pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod io;
pub mod scalar;
pub mod series;
pub mod spin;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

/// Double-precision aliases for the generic types.
pub type SpinSystem = spin::SpinSystem<f64>;
pub type LabeledSpectrum = spin::LabeledSpectrum<f64>;
pub type Transition = spin::Transition<f64>;
pub type ClockTransition = spin::ClockTransition<f64>;
pub type KineticInductor = circuit::KineticInductor<f64>;
pub type CircuitNetlist = circuit::CircuitNetlist<f64>;
pub type CouplingSet = circuit::CouplingSet<f64>;
pub type ModePair = dynamics::ModePair<f64>;
pub type PulseEvent = dynamics::PulseEvent<f64>;
pub type PulseSchedule = dynamics::PulseSchedule<f64>;
pub type EnsembleModel = dynamics::EnsembleModel<f64>;
pub type EndorModel = dynamics::EndorModel<f64>;
pub type Trace = trace::Trace<f64>;
pub type FitResult = fitting::FitResult<f64>;

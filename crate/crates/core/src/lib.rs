//! Deterministic 3-DOF trajectory simulation of a lifting entry vehicle
//! flying a four-phase guidance profile, with a Monte Carlo harness for
//! miss-distance statistics.
//!
//! Modules, bottom-up:
//!
//! - [`atmosphere`]: standard atmosphere and speed of sound
//! - [`dynamics`]: point-mass equations of motion and lift saturation
//! - [`guidance`]: per-phase control laws, phase machine, seeker
//! - [`engine`]: RK4 closed-loop integration and impact detection
//! - [`montecarlo`]: dispersions, ensembles, CEP
//!
//! Units are SI and angles radians throughout.

pub mod atmosphere;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod guidance;
pub mod montecarlo;

pub use atmosphere::{AtmosphereSample, StandardAtmosphere};
pub use dynamics::{GuidanceCommand, State, VehicleParams};
pub use engine::{run, Outcome, RunOutput, Scenario, TerminalReport, TrajectorySample};
pub use error::{Result, SimError};
pub use guidance::{EntryConditions, FlightMode, GuidanceConfig, GuidancePhase, Target};
pub use montecarlo::{run_ensemble, DispersionSpec, EnsembleResult, EnsembleStats, Execution};

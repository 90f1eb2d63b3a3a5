//! The three physical settings: a double-slit modular-momentum state, a
//! particle in a box with a moving piston, and a spin under pulsed fields.

mod doubleslit;
mod piston;
mod spin;

pub use crate::grid::GridSystem;
pub use doubleslit::{
    collapse_uncertainty_demo, modular_momentum, polynomial_phase_insensitivity, two_packet_state,
    CollapseReport, DoubleSlitConfig, PolynomialReport,
};
pub use piston::{
    piston_setup, piston_spec, run_piston, PistonConfig, PistonRun, PistonSetup, RampShape,
};
pub use spin::{
    run_spin, spin_modular_energy_rates, spin_schedule, spin_spec, PulseShape, SpinPulseConfig,
    SpinRateReport, SpinRegime, SpinRun, SpinSchedule,
};

//! Monitored dynamics of collective spin systems.
//!
//! A kicked-top Floquet map is interleaved with finite-resolution collective
//! `J_z` measurements at the level of individual quantum trajectories. The
//! crate provides the Dicke-basis operators, the Floquet propagator, the
//! Gaussian Kraus measurement, mean-QFI and purity order parameters,
//! reproducible parallel trajectory sweeps, power-law scaling fits and a
//! closed-form Haar model for large spins.

pub mod error;
pub mod haar_model;
pub mod kicked_top;
pub mod linalg;
pub mod measurement;
pub mod observables;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod scaling;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use kicked_top::{build_propagator, FloquetPropagator, KickedTopParams};
pub use measurement::{GaussianMeasurement, MeasurementOutcome};
pub use observables::{mean_qfi, mean_qfi_density, purity, qfi_axis, reference_values, QfiSummary, ReferenceValues};
pub use operators::{make_ops, Axis, CollectiveOps, SpinQuantum};
pub use par::Execution;
pub use state::{dicke_state, haar_random_state, spin_coherent, DensityState, SpinState};
pub use trajectory::{InitialCondition, RunConfig, SweepResult, SweepRow, TrajectoryRecord};

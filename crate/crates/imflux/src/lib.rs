//! Simulation and validation library for a voltage-fed induction motor with a
//! field-oriented controller and an adaptive observer stack built on dynamic
//! regressor extension and mixing (DREM).
//!
//! The pipeline simulates the motor ground truth, constructs linear regression
//! equations from measured stator current and voltage only, mixes them into
//! decoupled scalar regressions through an adjugate/determinant step, and runs
//! gradient estimators for the rotor flux, rotor resistance, load torque, and
//! rotor speed. Telemetry compares every stage against simulator ground truth.
//!
//! Modules mirror the signal path:
//! - [`motor`]: fixed-frame motor model and parameter set.
//! - [`controller`]: flux/speed PI field-oriented controller.
//! - [`filters`]: first-order filter primitives used by all regression chains.
//! - [`electrical`]: per-pole filter chains and the stacked 6x6 regression.
//! - [`mechanical`]: torque/speed regression built from flux and current.
//! - [`linalg`]: adjugate + determinant (the DREM mixing step).
//! - [`observers`]: flux observer, parameter estimators, excitation monitors.
//! - [`sim`]: augmented-state RK4 loop tying everything together.
//! - [`scenario`]: TOML scenario configuration with overrides.
//! - [`telemetry`], [`acceptance`], [`plotdata`]: logging and checking.

pub mod acceptance;
pub mod controller;
pub mod electrical;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod mechanical;
pub mod motor;
pub mod observers;
pub mod plotdata;
pub mod rk4;
pub mod scenario;
pub mod sim;
pub mod telemetry;
pub mod vec2;

/// Library version, also exposed through the C API.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Telemetry CSV schema version; bumped whenever a column is added, removed,
/// or renamed.
pub const TELEMETRY_SCHEMA: u32 = 1;

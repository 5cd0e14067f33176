//! Direct vision-aided inertial navigation for VTOL UAVs.
//!
//! This crate implements a nonlinear observer that estimates attitude, gyro
//! bias, position, and linear velocity of a thrust-vectored rigid body
//! directly from landmark measurements and gyro readings, together with a
//! tightly coupled tracking controller that produces thrust and torque
//! commands from the same raw measurements. Both are posed on the extended
//! special Euclidean group of 5x5 navigation matrices, with an equivalent
//! unit-quaternion attitude backend.
//!
//! The crate is organized as:
//!
//! - [`lie`]: exact primitives for so(3)/SO(3) and the 5x5 navigation-state
//!   group (hat/vex maps, closed-form exponentials, group composition).
//! - [`measurement`]: landmark aggregation and the direct innovation sums
//!   consumed by the observer and the controller.
//! - [`observer`]: correction factors, continuous-time derivative form, and
//!   the discrete predict/correct stepper.
//! - [`guidance`]: reference trajectory, the saturated auxiliary-variable
//!   loop, the intermediary translational input with two derivatives, and
//!   extraction of desired attitude and angular rates.
//! - [`controller`]: thrust and torque laws.
//! - [`plant`]: ground-truth 6-DoF rigid-body simulator.
//! - [`quat_backend`]: unit-quaternion formulation of the observer,
//!   interchangeable with the rotation-matrix backend.
//! - [`harness`]: scenario configuration, the fixed-step closed-loop runner,
//!   CSV logging, and summary metrics.
//! - [`selftest`]: runtime identity and oracle suites (also exposed through
//!   the `vtol-sim selftest` subcommand).
//!
//! A narrative guide with runnable examples lives in `book/`; its code
//! snippets are compiled as doc-tests through the [`book`] module.

pub mod book;
pub mod controller;
pub mod guidance;
pub mod harness;
pub mod lie;
pub mod measurement;
pub mod observer;
pub mod plant;
pub mod quat_backend;
pub mod selftest;

pub use lie::{Mat3, Mat5, NavState, Rotation, TangentInput, UnitQuaternion, Vec3};

use thiserror::Error;

/// Errors surfaced by fallible operations across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Fewer than three landmarks were supplied.
    #[error("observability requires at least 3 landmarks, got {0}")]
    TooFewLandmarks(usize),

    /// The landmark geometry is degenerate (collinear points).
    #[error("landmarks are collinear: rank of the weighted scatter matrix is {rank}, need >= 2")]
    CollinearLandmarks { rank: usize },

    /// A landmark weight was not strictly positive.
    #[error("landmark {index} has non-positive confidence weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },

    /// The intermediary translational input points straight up with magnitude
    /// at or above gravity, which leaves the desired attitude undefined.
    #[error("degenerate thrust direction: intermediary input {f:?} is within {alpha:.3e} of the vertical singular set")]
    SingularThrustDirection { f: [f64; 3], alpha: f64 },

    /// A matrix expected to be a rotation failed the orthonormality check.
    #[error("matrix is not a rotation: orthonormality defect {defect:.3e}, det {det:.6}")]
    NotARotation { defect: f64, det: f64 },

    /// A matrix expected to be antisymmetric was not, beyond tolerance.
    #[error("matrix is not antisymmetric: symmetric part norm {0:.3e}")]
    NotAntisymmetric(f64),

    /// Non-positive step size handed to a discrete stepper.
    #[error("step size must be positive, got {0}")]
    NonPositiveDt(f64),

    /// Scenario configuration failed validation.
    #[error("invalid config: {0}")]
    Config(String),

    /// The simulation produced a non-finite state.
    #[error("numerical blow-up ({what}) at step {step}")]
    NumericalBlowUp { step: usize, what: String },

    /// Decay-rate fitting had too few usable (positive) samples.
    #[error("decay fit needs at least 2 positive samples in the window, had {usable} (skipped {skipped})")]
    DecayFitUnderdetermined { usable: usize, skipped: usize },

    /// Mismatched lengths between landmark set and measurement list.
    #[error("measurement count {got} does not match landmark count {expected}")]
    MeasurementCountMismatch { got: usize, expected: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

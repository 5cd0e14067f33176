//! Lie-group primitives: so(3)/SO(3), the 5x5 navigation-state group, and
//! unit quaternions under the inertial-to-body attitude convention.

pub mod quat;
pub mod se23;
pub mod so3;

pub use quat::UnitQuaternion;
pub use se23::{exp_se23, Mat5, NavState, TangentInput};
pub use so3::{
    attitude_distance, e3, exp_so3, hat, skew_part, skew_vector, trace_complement, try_vex, vex,
    Mat3, Rotation, Vec3,
};

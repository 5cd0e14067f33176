//! Unit-quaternion formulation of the observer and control laws,
//! interchangeable with the rotation-matrix backend.
//!
//! The attitude estimate evolves by
//!
//! ```text
//! d/dt Qhat = (1/2) (Y(Omega_m - bhat) - Z(w_omega)) Qhat
//! ```
//!
//! where `Y` applies the body rate on the right of the quaternion and `Z`
//! applies the correction rate on the left. With both rates frozen over a
//! sample interval the exact flow factors into two quaternion exponentials,
//!
//! ```text
//! Qhat <- exp_rotvec(-w_omega dt) * Qhat * exp_rotvec((Omega_m - bhat) dt)
//! ```
//!
//! mirroring the prediction/correction split of the rotation backend, so the
//! two backends agree to floating-point rounding. The raw linear form is
//! kept below as a small-step test oracle. Position, velocity, and bias
//! follow the same discrete maps as the rotation backend with
//! `Rhat = matrix(Qhat)`.

use crate::controller::{control_step, ControlCommand, ControllerGains};
use crate::guidance::GuidanceOutput;
use crate::lie::{e3, exp_se23, NavState, TangentInput, UnitQuaternion, Vec3};
use crate::measurement::{observer_innovations, BodyMeasurements, FeatureSet};
use crate::observer::{correction_factors, EstimatorState, ObserverGains};
use crate::{Error, Result};

/// Estimator state with a quaternion attitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuatEstimatorState {
    pub attitude: UnitQuaternion,
    pub position: Vec3,
    pub velocity: Vec3,
    pub gyro_bias: Vec3,
}

impl QuatEstimatorState {
    pub fn zeroed() -> Self {
        QuatEstimatorState {
            attitude: UnitQuaternion::identity(),
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            gyro_bias: Vec3::zeros(),
        }
    }

    /// Matching rotation-backend view of this state.
    pub fn as_estimator_state(&self) -> EstimatorState {
        EstimatorState {
            nav: NavState::new(self.attitude.to_rotation(), self.position, self.velocity),
            gyro_bias: self.gyro_bias,
        }
    }
}

/// One discrete predict/correct step of the quaternion observer.
#[allow(clippy::too_many_arguments)]
pub fn quat_observer_step(
    st: &QuatEstimatorState,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    thrust: f64,
    mass: f64,
    gravity: f64,
    gains: &ObserverGains,
    dt: f64,
) -> Result<QuatEstimatorState> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let (next, _) = quat_nav_step(st, meas, fs, thrust, mass, gains, gravity, dt)?;
    let gyro_bias = crate::observer::bias_update(
        &next.attitude.to_rotation(),
        &st.gyro_bias,
        meas,
        fs,
        gains,
        dt,
    )?;
    Ok(QuatEstimatorState { gyro_bias, ..next })
}

/// Navigation part of the quaternion step; bias untouched (see
/// [`crate::observer::observer_nav_step`] for the rationale).
#[allow(clippy::too_many_arguments)]
pub fn quat_nav_step(
    st: &QuatEstimatorState,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    thrust: f64,
    mass: f64,
    gains: &ObserverGains,
    gravity: f64,
    dt: f64,
) -> Result<(QuatEstimatorState, crate::observer::CorrectionFactors)> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let r_hat = st.attitude.to_rotation();
    let inn = observer_innovations(&r_hat, &st.position, meas, fs)?;
    let w = correction_factors(&inn, fs, gains, gravity);
    let rate = meas.gyro - st.gyro_bias;

    // Attitude: exact flow of the frozen-coefficient kinematics.
    let attitude = (UnitQuaternion::exp_rotvec(&(-w.w_omega * dt))
        * st.attitude
        * UnitQuaternion::exp_rotvec(&(rate * dt)))
    .normalized();

    // Position/velocity: identical two-exponential maps as the rotation
    // backend, with the quaternion-derived attitude in the embedding.
    let u_hat = TangentInput::new(rate, Vec3::zeros(), -(thrust / mass) * e3(), 1.0);
    let w_tangent = TangentInput::new(w.w_omega, w.w_v, w.w_a, 1.0);
    let nav = NavState::new(r_hat, st.position, st.velocity);
    let x5 = exp_se23(&-w_tangent, dt) * nav.embed() * exp_se23(&u_hat, dt);

    let position: Vec3 = x5.fixed_view::<3, 1>(0, 3).into();
    let velocity: Vec3 = x5.fixed_view::<3, 1>(0, 4).into();
    Ok((
        QuatEstimatorState { attitude, position, velocity, gyro_bias: st.gyro_bias },
        w,
    ))
}

/// Raw linear quaternion derivative `(1/2)(Y - Z) Qhat`; integrating it with
/// explicit Euler converges to [`quat_observer_step`]'s attitude as
/// `dt -> 0`. Test oracle only.
pub fn quat_kinematics_linear(q: &UnitQuaternion, body_rate: &Vec3, correction_rate: &Vec3) -> (f64, Vec3) {
    // Y q: right-multiplication by the body rate.
    let yw = -body_rate.dot(&q.xyz);
    let yv = q.w * body_rate - body_rate.cross(&q.xyz);
    // Z q: left-multiplication by the correction rate.
    let zw = -correction_rate.dot(&q.xyz);
    let zv = q.w * correction_rate + correction_rate.cross(&q.xyz);
    (0.5 * (yw - zw), 0.5 * (yv - zv))
}

/// Control laws with a quaternion-typed desired attitude; identical command
/// to the rotation-backend path when the attitudes match.
pub fn quat_control_laws(
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    st: &QuatEstimatorState,
    guid: &GuidanceOutput,
    gains: &ControllerGains,
) -> Result<ControlCommand> {
    let mut guid_q = *guid;
    guid_q.r_d = guid.q_d.to_rotation();
    control_step(meas, fs, &st.as_estimator_state(), &guid_q, gains)
}

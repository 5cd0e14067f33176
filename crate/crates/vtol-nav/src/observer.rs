//! Direct nonlinear observer on the navigation-state group.
//!
//! The estimator follows the true motion model and is corrected through the
//! raw innovation sums of [`crate::measurement`]; neither attitude nor
//! position is ever reconstructed from the landmarks. Continuous form:
//!
//! ```text
//! d/dt Xhat = Xhat Uhat - W Xhat        (group-affine mimic of the plant)
//! d/dt bhat = gamma_o Rhat ups          (gyro-bias adaptation)
//! ```
//!
//! with `Uhat` carrying the bias-corrected gyro rate and the thrust column,
//! and `W` the correction tangent built from the innovations. The discrete
//! stepper splits one sample interval into a right-multiplied prediction
//! exponential and a left-multiplied correction exponential, then re-projects
//! the attitude block.

use crate::lie::{
    attitude_distance, e3, exp_se23, hat, Mat3, NavState, Rotation, TangentInput, Vec3,
};
use crate::measurement::{observer_innovations, BodyMeasurements, FeatureSet, Innovations};
use crate::{Error, Result};

/// Observer gains; all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverGains {
    /// Gyro-bias adaptation rate.
    pub gamma_o: f64,
    /// Attitude innovation gain.
    pub k_o1: f64,
    /// Position residual gain.
    pub k_o2: f64,
    /// Velocity residual gain.
    pub k_o3: f64,
}

/// Full estimator state: navigation estimate plus gyro-bias estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorState {
    pub nav: NavState,
    pub gyro_bias: Vec3,
}

impl EstimatorState {
    /// Identity attitude, zero position/velocity/bias.
    pub fn zeroed() -> Self {
        EstimatorState { nav: NavState::identity(), gyro_bias: Vec3::zeros() }
    }

    pub fn rotation(&self) -> &Rotation {
        self.nav.rotation()
    }

    pub fn position(&self) -> &Vec3 {
        self.nav.position()
    }

    pub fn velocity(&self) -> &Vec3 {
        self.nav.velocity()
    }
}

/// Correction fields entering the tangent element `W`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionFactors {
    pub w_omega: Vec3,
    pub w_v: Vec3,
    pub w_a: Vec3,
}

/// Builds the correction fields from one innovation pair:
///
/// ```text
/// w_omega = k_o1 ups
/// w_v     = k_o2 resid - (1/s_T) hat(w_omega) (resid + s_T p_c)
/// w_a     = -g e3 + k_o3 resid
/// ```
pub fn correction_factors(
    inn: &Innovations,
    fs: &FeatureSet,
    gains: &ObserverGains,
    gravity: f64,
) -> CorrectionFactors {
    let w_omega = gains.k_o1 * inn.attitude;
    let resid = inn.weighted_position;
    let w_v = gains.k_o2 * resid
        - hat(&w_omega) * (resid + fs.total_weight() * fs.centroid()) / fs.total_weight();
    let w_a = -gravity * e3() + gains.k_o3 * resid;
    CorrectionFactors { w_omega, w_v, w_a }
}

/// Time derivatives of the estimator state in the continuous form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverDerivatives {
    pub r_dot: Mat3,
    pub b_dot: Vec3,
    pub p_dot: Vec3,
    pub v_dot: Vec3,
}

/// Continuous-time right-hand sides:
///
/// ```text
/// d/dt Rhat = -hat(Omega_m - bhat) Rhat + Rhat hat(w_omega)
/// d/dt bhat = gamma_o Rhat ups
/// d/dt Phat = Vhat - hat(w_omega) Phat - w_v
/// d/dt Vhat = -(thrust/m) Rhat^T e3 - hat(w_omega) Vhat - w_a
/// ```
pub fn observer_derivatives(
    est: &EstimatorState,
    omega_m: &Vec3,
    thrust: f64,
    mass: f64,
    w: &CorrectionFactors,
    inn: &Innovations,
    gains: &ObserverGains,
) -> ObserverDerivatives {
    let r = est.rotation().matrix();
    ObserverDerivatives {
        r_dot: -hat(&(omega_m - est.gyro_bias)) * r + r * hat(&w.w_omega),
        b_dot: gains.gamma_o * r * inn.attitude,
        p_dot: est.velocity() - hat(&w.w_omega) * est.position() - w.w_v,
        v_dot: -(thrust / mass) * est.rotation().transposed() * e3()
            - hat(&w.w_omega) * est.velocity()
            - w.w_a,
    }
}

/// One discrete predict/correct step over `dt`:
///
/// 1. innovations and correction factors from the pre-step estimate;
/// 2. prediction `Xhat <- Xhat exp(Uhat dt)`;
/// 3. correction `Xhat <- exp(-W dt) Xhat`, attitude block re-projected;
/// 4. bias update `bhat <- bhat + dt gamma_o Rhat ups` with the innovation
///    recomputed at the corrected attitude.
#[allow(clippy::too_many_arguments)]
pub fn observer_step_discrete(
    est: &EstimatorState,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    thrust: f64,
    mass: f64,
    gravity: f64,
    gains: &ObserverGains,
    dt: f64,
) -> Result<EstimatorState> {
    let (next, _) = observer_step_with_corrections(est, meas, fs, thrust, mass, gravity, gains, dt)?;
    Ok(next)
}

/// [`observer_step_discrete`] variant that also returns the correction
/// factors it used, for callers that feed them into guidance derivatives.
#[allow(clippy::too_many_arguments)]
pub fn observer_step_with_corrections(
    est: &EstimatorState,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    thrust: f64,
    mass: f64,
    gravity: f64,
    gains: &ObserverGains,
    dt: f64,
) -> Result<(EstimatorState, CorrectionFactors)> {
    let (nav, w) = observer_nav_step(est, meas, fs, thrust, mass, gains, gravity, dt)?;
    let gyro_bias = bias_update(nav.rotation(), &est.gyro_bias, meas, fs, gains, dt)?;
    Ok((EstimatorState { nav, gyro_bias }, w))
}

/// Navigation part of the discrete step (innovations, corrections,
/// prediction, correction); leaves the bias untouched so a caller can run
/// the torque law on the pre-update bias before applying [`bias_update`].
#[allow(clippy::too_many_arguments)]
pub fn observer_nav_step(
    est: &EstimatorState,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    thrust: f64,
    mass: f64,
    gains: &ObserverGains,
    gravity: f64,
    dt: f64,
) -> Result<(NavState, CorrectionFactors)> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let inn = observer_innovations(est.rotation(), est.position(), meas, fs)?;
    let w = correction_factors(&inn, fs, gains, gravity);

    let u_hat = TangentInput::new(
        meas.gyro - est.gyro_bias,
        Vec3::zeros(),
        -(thrust / mass) * e3(),
        1.0,
    );
    let w_tangent = TangentInput::new(w.w_omega, w.w_v, w.w_a, 1.0);

    // The two kappa entries cancel between the paired exponentials, so the
    // product is a clean navigation embedding again.
    let x5 = exp_se23(&-w_tangent, dt) * est.nav.embed() * exp_se23(&u_hat, dt);
    debug_assert!(x5[(4, 3)].abs() < 1e-12);

    let rt: Mat3 = x5.fixed_view::<3, 3>(0, 0).into();
    let rotation = Rotation::project(&rt.transpose());
    let nav = NavState::new(
        rotation,
        x5.fixed_view::<3, 1>(0, 3).into(),
        x5.fixed_view::<3, 1>(0, 4).into(),
    );
    Ok((nav, w))
}

/// Gyro-bias update with the corrected attitude:
/// `bhat <- bhat + dt gamma_o Rhat ups`.
pub fn bias_update(
    rotation: &Rotation,
    gyro_bias: &Vec3,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    gains: &ObserverGains,
    dt: f64,
) -> Result<Vec3> {
    let ups = crate::measurement::attitude_innovation(rotation, meas, fs)?;
    Ok(gyro_bias + dt * gains.gamma_o * rotation.matrix() * ups)
}

/// Estimation errors against ground truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationErrors {
    /// Normalized attitude distance of `R_tilde = Rhat^T R`.
    pub attitude_distance: f64,
    /// `b_tilde = b - bhat`.
    pub bias: Vec3,
    /// `P_tilde = Phat - R_tilde P`.
    pub position: Vec3,
    /// `V_tilde = Vhat - R_tilde V`.
    pub velocity: Vec3,
}

/// Group-consistent error decomposition: the blocks of
/// `Xhat * X^{-1}` expressed on components.
pub fn estimation_errors(
    est: &EstimatorState,
    truth: &NavState,
    b_true: &Vec3,
) -> EstimationErrors {
    let r_tilde = est.rotation().inverse().compose(truth.rotation());
    EstimationErrors {
        attitude_distance: attitude_distance(&r_tilde),
        bias: b_true - est.gyro_bias,
        position: est.position() - r_tilde.matrix() * truth.position(),
        velocity: est.velocity() - r_tilde.matrix() * truth.velocity(),
    }
}

/// Attitude error matrix `R_tilde = Rhat^T R` (exposed for the Lyapunov
/// surrogate used in the monotonicity checks).
pub fn attitude_error(est: &EstimatorState, truth: &NavState) -> Rotation {
    est.rotation().inverse().compose(truth.rotation())
}

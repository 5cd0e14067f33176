//! Reference trajectory, the saturated auxiliary-variable loop, the
//! intermediary translational input `F` with its two analytic derivatives,
//! and extraction of the desired attitude, angular velocity, and angular
//! acceleration from `F`.
//!
//! The translational loop never commands more than
//! `sqrt(3) (k_theta1 + k_theta2)` of corrective acceleration per axis
//! (tanh saturation), which keeps the thrust bounded and the attitude
//! extraction away from its singular set for any tracking error.

use crate::lie::{e3, hat, Mat3, Rotation, UnitQuaternion, Vec3};
use crate::{Error, Result};

/// Reference position and its first four time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub jerk: Vec3,
    pub snap: Vec3,
}

/// A reference trajectory must supply analytic derivatives through fourth
/// order; [`validate_trajectory`] cross-checks them against central finite
/// differences before a scenario is allowed to run.
pub trait Trajectory: Sync {
    fn sample(&self, t: f64) -> TrajectorySample;
}

/// Default flight path: a slow horizontal sweep with a double-frequency
/// lateral figure and a steady climb,
/// `6 [cos(0.19 t), sin(0.2 t) cos(0.2 t), (3.5 + 0.15 t) / 6]`.
///
/// The lateral product collapses to `3 sin(0.4 t)`, which is what the
/// derivatives below differentiate.
pub fn reference_trajectory(t: f64) -> TrajectorySample {
    let (wx, wy) = (0.19, 0.4);
    TrajectorySample {
        position: Vec3::new(6.0 * (wx * t).cos(), 3.0 * (wy * t).sin(), 3.5 + 0.15 * t),
        velocity: Vec3::new(-6.0 * wx * (wx * t).sin(), 3.0 * wy * (wy * t).cos(), 0.15),
        acceleration: Vec3::new(
            -6.0 * wx * wx * (wx * t).cos(),
            -3.0 * wy * wy * (wy * t).sin(),
            0.0,
        ),
        jerk: Vec3::new(
            6.0 * wx * wx * wx * (wx * t).sin(),
            -3.0 * wy * wy * wy * (wy * t).cos(),
            0.0,
        ),
        snap: Vec3::new(
            6.0 * wx.powi(4) * (wx * t).cos(),
            3.0 * wy.powi(4) * (wy * t).sin(),
            0.0,
        ),
    }
}

/// Default trajectory as a pluggable object.
#[derive(Clone, Copy, Debug, Default)]
pub struct SweepClimbTrajectory;

impl Trajectory for SweepClimbTrajectory {
    fn sample(&self, t: f64) -> TrajectorySample {
        reference_trajectory(t)
    }
}

/// Checks the supplied derivatives against central finite differences of
/// the position at a handful of times. Catches sign slips and stale
/// derivatives in user trajectories before they poison a run.
pub fn validate_trajectory(traj: &dyn Trajectory, times: &[f64]) -> Result<()> {
    let h = 1e-4;
    for &t in times {
        let t = t.max(2.0 * h);
        let s = traj.sample(t);
        let sp = traj.sample(t + h);
        let sm = traj.sample(t - h);
        let checks = [
            ((sp.position - sm.position) / (2.0 * h), s.velocity, "velocity"),
            ((sp.velocity - sm.velocity) / (2.0 * h), s.acceleration, "acceleration"),
            ((sp.acceleration - sm.acceleration) / (2.0 * h), s.jerk, "jerk"),
            ((sp.jerk - sm.jerk) / (2.0 * h), s.snap, "snap"),
        ];
        for (fd, analytic, name) in checks {
            if (fd - analytic).norm() > 1e-4 {
                return Err(Error::Config(format!(
                    "trajectory {name} disagrees with finite differences at t = {t}: \
                     |analytic - fd| = {:.3e}",
                    (fd - analytic).norm()
                )));
            }
        }
    }
    Ok(())
}

/// Auxiliary-variable state of the translational loop.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThetaState {
    pub theta: Vec3,
    pub theta_dot: Vec3,
}

/// Translational loop gains; all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuidanceGains {
    /// Saturated position-channel stiffness.
    pub k_theta1: f64,
    /// Saturated velocity-channel damping.
    pub k_theta2: f64,
    /// Estimate-error position feedback into the auxiliary variable.
    pub k_c3: f64,
    /// Estimate-error velocity feedback into the auxiliary variable.
    pub k_c4: f64,
}

fn tanh_vec(v: &Vec3) -> Vec3 {
    v.map(f64::tanh)
}

/// `1 - tanh^2` per component, as a diagonal matrix.
fn sech2_diag(v: &Vec3) -> Mat3 {
    Mat3::from_diagonal(&v.map(|x| 1.0 - x.tanh().powi(2)))
}

/// Auxiliary-variable acceleration:
///
/// ```text
/// theta_dd = -k_t1 tanh(theta) - k_t2 tanh(theta_dot)
///            + k_c3 (Phat - P_d - theta) + k_c4 (Vhat - V_d - theta_dot)
/// ```
pub fn theta_acceleration(
    st: &ThetaState,
    p_hat: &Vec3,
    v_hat: &Vec3,
    traj: &TrajectorySample,
    gains: &GuidanceGains,
) -> Vec3 {
    -gains.k_theta1 * tanh_vec(&st.theta) - gains.k_theta2 * tanh_vec(&st.theta_dot)
        + gains.k_c3 * (p_hat - traj.position - st.theta)
        + gains.k_c4 * (v_hat - traj.velocity - st.theta_dot)
}

/// Semi-implicit Euler update of the auxiliary variable: the new rate feeds
/// the new value within the same step. Returns the updated state and the
/// acceleration used.
pub fn theta_step(
    st: &ThetaState,
    p_hat: &Vec3,
    v_hat: &Vec3,
    traj: &TrajectorySample,
    gains: &GuidanceGains,
    dt: f64,
) -> (ThetaState, Vec3) {
    let theta_ddot = theta_acceleration(st, p_hat, v_hat, traj, gains);
    let theta_dot = st.theta_dot + dt * theta_ddot;
    let theta = st.theta + dt * theta_dot;
    (ThetaState { theta, theta_dot }, theta_ddot)
}

/// Third derivative of the auxiliary variable, obtained by differentiating
/// the acceleration law with the estimator's analytic position/velocity
/// derivatives standing in for the unavailable true rates.
pub fn theta_third(
    st: &ThetaState,
    theta_ddot: &Vec3,
    p_hat_dot: &Vec3,
    v_hat_dot: &Vec3,
    traj: &TrajectorySample,
    gains: &GuidanceGains,
) -> Vec3 {
    -gains.k_theta1 * sech2_diag(&st.theta) * st.theta_dot
        - gains.k_theta2 * sech2_diag(&st.theta_dot) * theta_ddot
        + gains.k_c3 * (p_hat_dot - traj.velocity - st.theta_dot)
        + gains.k_c4 * (v_hat_dot - traj.acceleration - theta_ddot)
}

/// Intermediary translational input and its two analytic derivatives:
///
/// ```text
/// F    = P_d_dd - k_t1 tanh(theta) - k_t2 tanh(theta_dot)
/// F'   = P_d^(3) - k_t1 H theta_dot - k_t2 H' theta_dd
/// F''  = P_d^(4) - k_t1 Z - k_t2 Z'
/// ```
///
/// with `H = diag(1 - tanh^2 theta_i)`, `H' = diag(1 - tanh^2 theta_dot_i)`,
/// `z_i = (1 - tanh^2 theta_i)(theta_dd_i - 2 tanh(theta_i) theta_dot_i^2)`
/// and `z'_i` the same expression shifted one derivative up.
pub fn intermediary_input(
    traj: &TrajectorySample,
    st: &ThetaState,
    theta_ddot: &Vec3,
    theta_third: &Vec3,
    gains: &GuidanceGains,
) -> (Vec3, Vec3, Vec3) {
    let th = st.theta;
    let thd = st.theta_dot;
    let f = traj.acceleration - gains.k_theta1 * tanh_vec(&th) - gains.k_theta2 * tanh_vec(&thd);
    let f_dot =
        traj.jerk - gains.k_theta1 * sech2_diag(&th) * thd - gains.k_theta2 * sech2_diag(&thd) * theta_ddot;
    let z = Vec3::from_fn(|i, _| {
        (1.0 - th[i].tanh().powi(2)) * (theta_ddot[i] - 2.0 * th[i].tanh() * thd[i] * thd[i])
    });
    let z_dot = Vec3::from_fn(|i, _| {
        (1.0 - thd[i].tanh().powi(2))
            * (theta_third[i] - 2.0 * thd[i].tanh() * theta_ddot[i] * theta_ddot[i])
    });
    let f_ddot = traj.snap - gains.k_theta1 * z - gains.k_theta2 * z_dot;
    (f, f_dot, f_ddot)
}

/// Singularity guard for the attitude extraction: `alpha_1 = |g e3 - F|`
/// and `alpha_2 = alpha_1 + g - f_3` must both stay positive.
const ALPHA_MIN: f64 = 1e-9;

fn alphas(f: &Vec3, gravity: f64) -> Result<(f64, f64)> {
    let alpha1 = (gravity * e3() - f).norm();
    let alpha2 = alpha1 + gravity - f.z;
    if alpha1 < ALPHA_MIN || alpha2 < ALPHA_MIN {
        return Err(Error::SingularThrustDirection {
            f: [f.x, f.y, f.z],
            alpha: alpha1.min(alpha2),
        });
    }
    Ok((alpha1, alpha2))
}

/// Thrust magnitude and desired attitude from the intermediary input:
///
/// ```text
/// thrust = m |g e3 - F|
/// q_d0   = sqrt(m (g - f3) / (2 thrust) + 1/2)
/// q_d    = [ m f2, -m f1, 0 ] / (2 thrust q_d0)
/// ```
///
/// The third quaternion component is pinned to zero (no yaw planning), and
/// the rotation satisfies the closure identity
/// `g e3 - (thrust/m) R_d^T e3 = F`. Errors out when `F` points straight up
/// with magnitude at or above `g`, where no such attitude exists.
pub fn extract_attitude(f: &Vec3, mass: f64, gravity: f64) -> Result<(f64, UnitQuaternion, Rotation)> {
    alphas(f, gravity)?;
    let thrust = mass * (gravity * e3() - f).norm();
    let q0 = (mass * (gravity - f.z) / (2.0 * thrust) + 0.5).sqrt();
    let q = Vec3::new(
        mass * f.y / (2.0 * thrust * q0),
        -mass * f.x / (2.0 * thrust * q0),
        0.0,
    );
    let quat = UnitQuaternion { w: q0, xyz: q };
    let r_d = quat.to_rotation();
    Ok((thrust, quat, r_d))
}

/// Matrix mapping `F'` to the desired angular velocity:
///
/// ```text
///              [ -f1 f2          -f2^2 + a1 a2    f2 a2 ]
/// (1/a1^2 a2)  [ f1^2 - a1 a2     f1 f2          -f1 a2 ]
///              [ f2 a1           -f1 a1            0    ]
/// ```
pub fn angular_rate_map(f: &Vec3, gravity: f64) -> Result<Mat3> {
    let (a1, a2) = alphas(f, gravity)?;
    Ok(rate_map_numerator(f, a1, a2) / (a1 * a1 * a2))
}

fn rate_map_numerator(f: &Vec3, a1: f64, a2: f64) -> Mat3 {
    Mat3::new(
        -f.x * f.y,
        -f.y * f.y + a1 * a2,
        f.y * a2,
        f.x * f.x - a1 * a2,
        f.x * f.y,
        -f.x * a2,
        f.y * a1,
        -f.x * a1,
        0.0,
    )
}

/// Time derivative of [`angular_rate_map`], assembled entrywise by the
/// product/quotient rule with `a1' = [f1, f2, f3 - g] . F' / a1` and
/// `a2' = a1' - f3'`.
pub fn angular_rate_map_derivative(f: &Vec3, f_dot: &Vec3, gravity: f64) -> Result<Mat3> {
    let (a1, a2) = alphas(f, gravity)?;
    let a1_dot = Vec3::new(f.x, f.y, f.z - gravity).dot(f_dot) / a1;
    let a2_dot = a1_dot - f_dot.z;
    let n = rate_map_numerator(f, a1, a2);
    let n_dot = Mat3::new(
        -f_dot.x * f.y - f.x * f_dot.y,
        -2.0 * f.y * f_dot.y + a1_dot * a2 + a1 * a2_dot,
        f_dot.y * a2 + f.y * a2_dot,
        2.0 * f.x * f_dot.x - a1_dot * a2 - a1 * a2_dot,
        f_dot.x * f.y + f.x * f_dot.y,
        -f_dot.x * a2 - f.x * a2_dot,
        f_dot.y * a1 + f.y * a1_dot,
        -f_dot.x * a1 - f.x * a1_dot,
        0.0,
    );
    let den = a1 * a1 * a2;
    let den_dot = 2.0 * a1 * a1_dot * a2 + a1 * a1 * a2_dot;
    Ok(n_dot / den - n * (den_dot / (den * den)))
}

/// Desired angular velocity `Xi(F) F'`.
pub fn desired_angular_velocity(f: &Vec3, f_dot: &Vec3, gravity: f64) -> Result<Vec3> {
    Ok(angular_rate_map(f, gravity)? * f_dot)
}

/// Desired angular acceleration `Xi'(F) F' + Xi(F) F''`.
pub fn desired_angular_acceleration(
    f: &Vec3,
    f_dot: &Vec3,
    f_ddot: &Vec3,
    gravity: f64,
) -> Result<Vec3> {
    Ok(angular_rate_map_derivative(f, f_dot, gravity)? * f_dot
        + angular_rate_map(f, gravity)? * f_ddot)
}

/// Everything the torque law needs from the guidance side of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuidanceOutput {
    pub f: Vec3,
    pub f_dot: Vec3,
    pub f_ddot: Vec3,
    pub thrust: f64,
    pub q_d: UnitQuaternion,
    pub r_d: Rotation,
    pub omega_d: Vec3,
    pub omega_d_dot: Vec3,
}

/// Kinematic consistency residual `|R_d' + hat(Omega_d) R_d|_F` for a pair
/// of samples `dt` apart (forward difference). Used by tests and the
/// acceptance suite; first-order in `dt` along any smooth `F` trajectory.
pub fn attitude_rate_residual(r_d: &Rotation, r_d_next: &Rotation, omega_d: &Vec3, dt: f64) -> f64 {
    ((r_d_next.matrix() - r_d.matrix()) / dt + hat(omega_d) * r_d.matrix()).norm()
}

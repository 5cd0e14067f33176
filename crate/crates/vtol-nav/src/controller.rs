//! Thrust and torque laws.
//!
//! The torque law consumes only raw measurements (landmark vectors, gyro
//! reading), estimator outputs (gyro-bias estimate), and desired quantities;
//! ground truth is not reachable from this module's signatures. Thrust is
//! computed upstream by the guidance extraction and passed through.

use crate::guidance::GuidanceOutput;
use crate::lie::{hat, Mat3, Rotation, Vec3};
use crate::measurement::{controller_innovation, BodyMeasurements, FeatureSet};
use crate::observer::EstimatorState;
use crate::Result;

/// Attitude-loop gains plus the physical constants the torque law needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerGains {
    /// Attitude innovation gain.
    pub k_c1: f64,
    /// Angular-rate tracking gain.
    pub k_c2: f64,
    /// Inertia matrix (kg m^2).
    pub inertia: Mat3,
    /// Mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
}

/// One actuation command.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlCommand {
    /// Body torque (N m).
    pub torque: Vec3,
    /// Thrust magnitude (N), non-negative.
    pub thrust: f64,
}

/// Torque law:
///
/// ```text
/// w_c    = k_c1 R_d ups_c + k_c2 (Omega_d - Omega_m + bhat)
/// torque = w_c + J Omega_d' - hat(J (Omega_m - bhat)) Omega_d
/// ```
///
/// The gyro reading enters only as `Omega_m - bhat`; no other filtering.
#[allow(clippy::too_many_arguments)]
pub fn torque_law(
    ups_c: &Vec3,
    r_d: &Rotation,
    omega_d: &Vec3,
    omega_d_dot: &Vec3,
    omega_m: &Vec3,
    b_hat: &Vec3,
    gains: &ControllerGains,
) -> Vec3 {
    let rate = omega_m - b_hat;
    gains.k_c1 * r_d.matrix() * ups_c + gains.k_c2 * (omega_d - rate)
        + gains.inertia * omega_d_dot
        - hat(&(gains.inertia * rate)) * omega_d
}

/// Full control step: controller innovation from the raw measurements, then
/// the torque law; thrust passes through from guidance.
pub fn control_step(
    meas: &BodyMeasurements,
    fs: &FeatureSet,
    est: &EstimatorState,
    guid: &GuidanceOutput,
    gains: &ControllerGains,
) -> Result<ControlCommand> {
    let ups_c = controller_innovation(&guid.r_d, meas, fs)?;
    let torque = torque_law(
        &ups_c,
        &guid.r_d,
        &guid.omega_d,
        &guid.omega_d_dot,
        &meas.gyro,
        &est.gyro_bias,
        gains,
    );
    Ok(ControlCommand { torque, thrust: guid.thrust })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::extract_attitude;
    use crate::lie::{skew_vector, NavState};
    use crate::measurement::{aggregate, synthesize_features, Feature};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gains() -> ControllerGains {
        ControllerGains {
            k_c1: 1.0,
            k_c2: 4.0,
            inertia: Mat3::from_diagonal(&Vec3::new(0.15, 0.23, 0.16)),
            mass: 3.0,
            gravity: 9.81,
        }
    }

    #[test]
    fn all_zero_inputs_give_zero_torque() {
        let t = torque_law(
            &Vec3::zeros(),
            &Rotation::identity(),
            &Vec3::zeros(),
            &Vec3::zeros(),
            &Vec3::zeros(),
            &Vec3::zeros(),
            &gains(),
        );
        assert_eq!(t, Vec3::zeros());
    }

    #[test]
    fn perfect_tracking_leaves_gyroscopic_feedforward() {
        // ups_c = 0, Omega_m - bhat = Omega_d, Omega_d' = 0:
        // torque = -hat(J Omega_d) Omega_d.
        let g = gains();
        let omega_d = Vec3::new(0.3, -0.2, 0.5);
        let b_hat = Vec3::new(0.1, -0.1, 0.05);
        let t = torque_law(
            &Vec3::zeros(),
            &Rotation::identity(),
            &omega_d,
            &Vec3::zeros(),
            &(omega_d + b_hat),
            &b_hat,
            &g,
        );
        assert_abs_diff_eq!(t, -hat(&(g.inertia * omega_d)) * omega_d, epsilon = 1e-14);
    }

    #[test]
    fn torque_law_matches_line_by_line_reimplementation() {
        let g = gains();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let rv = |rng: &mut ChaCha8Rng, s: f64| {
                Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * s
            };
            let ups = rv(&mut rng, 2.0);
            let r_d = crate::lie::exp_so3(&rv(&mut rng, 2.0));
            let om_d = rv(&mut rng, 1.0);
            let om_dd = rv(&mut rng, 1.0);
            let om_m = rv(&mut rng, 1.0);
            let b = rv(&mut rng, 0.2);
            let t = torque_law(&ups, &r_d, &om_d, &om_dd, &om_m, &b, &g);
            // Second route, term by term.
            let w_c = g.k_c1 * r_d.matrix() * ups + g.k_c2 * (om_d - om_m + b);
            let oracle = w_c + g.inertia * om_dd - (g.inertia * (om_m - b)).cross(&om_d);
            assert_abs_diff_eq!(t, oracle, epsilon = 1e-13);
        }
    }

    #[test]
    fn hover_equilibrium_command() {
        // Truth sitting at the desired pose with exact estimates and clean
        // measurements: thrust mg, zero torque.
        let features: Vec<Feature> = [
            [2.0, 1.0, 0.0],
            [-1.5, 2.0, 0.3],
            [1.0, -2.0, 0.5],
            [-2.0, -1.5, 0.2],
            [0.5, 0.5, 2.0],
        ]
        .iter()
        .map(|p| Feature { position: Vec3::new(p[0], p[1], p[2]), weight: 1.0 })
        .collect();
        let fs = aggregate(&features).unwrap();
        let g = gains();
        let (thrust, q_d, r_d) = extract_attitude(&Vec3::zeros(), g.mass, g.gravity).unwrap();
        let guid = GuidanceOutput {
            f: Vec3::zeros(),
            f_dot: Vec3::zeros(),
            f_ddot: Vec3::zeros(),
            thrust,
            q_d,
            r_d,
            omega_d: Vec3::zeros(),
            omega_d_dot: Vec3::zeros(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = Vec3::new(0.5, -0.5, 1.0);
        let ys = synthesize_features(&r_d, &p, &fs, &[], 0.0, &mut rng).unwrap();
        let meas = BodyMeasurements { timestamp: 0.0, features: ys, gyro: Vec3::zeros() };
        let est = EstimatorState { nav: NavState::new(r_d, p, Vec3::zeros()), gyro_bias: Vec3::zeros() };
        let cmd = control_step(&meas, &fs, &est, &guid, &g).unwrap();
        assert_abs_diff_eq!(cmd.thrust, g.mass * g.gravity, epsilon = 1e-12);
        assert!(cmd.torque.norm() < 1e-12);
    }

    #[test]
    fn innovation_matches_ground_truth_route() {
        // Clean measurements: the innovation inside control_step equals the
        // skew vector of R_d^T R M.
        let features: Vec<Feature> = [
            [1.0, 0.5, 0.1],
            [-0.5, 1.0, 0.4],
            [0.3, -1.0, 0.2],
            [-1.0, -0.5, 0.6],
        ]
        .iter()
        .map(|p| Feature { position: Vec3::new(p[0], p[1], p[2]), weight: 1.0 })
        .collect();
        let fs = aggregate(&features).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..100 {
            let rv = |rng: &mut ChaCha8Rng, s: f64| {
                Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * s
            };
            let r = crate::lie::exp_so3(&rv(&mut rng, 2.0));
            let r_d = crate::lie::exp_so3(&rv(&mut rng, 2.0));
            let p = rv(&mut rng, 5.0);
            let ys = synthesize_features(&r, &p, &fs, &[], 0.0, &mut rng).unwrap();
            let meas = BodyMeasurements { timestamp: 0.0, features: ys, gyro: Vec3::zeros() };
            let ups = crate::measurement::controller_innovation(&r_d, &meas, &fs).unwrap();
            let truth = skew_vector(&(r_d.transposed() * r.matrix() * fs.scatter()));
            assert!((ups - truth).norm() < 1e-12);
        }
    }
}

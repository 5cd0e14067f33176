//! The fixed-step closed-loop runner.
//!
//! One iteration advances the world by `dt` in a fixed pipeline:
//!
//! 1. sample the reference trajectory at the new time;
//! 2. auxiliary-variable update, intermediary input `F`, thrust;
//! 3. desired quaternion and rotation from `F`;
//! 4. sensor epoch (landmark vectors + gyro) from the pre-step plant state,
//!    innovations and correction factors from the pre-step estimate;
//! 5. observer prediction;
//! 6. observer correction;
//! 7. `F` derivatives from the updated estimate;
//! 8. desired angular velocity and acceleration;
//! 9. torque law (still on the pre-update bias estimate);
//! 10. gyro-bias update;
//! 11. plant step under the commanded thrust/torque, then one log row.
//!
//! The controller path touches only the sensor epoch, the estimates, and
//! desired quantities; the plant state never crosses into steps 2-10 except
//! through the synthesized measurements.

use crate::controller::{control_step, ControlCommand};
use crate::guidance::{
    desired_angular_acceleration, desired_angular_velocity, extract_attitude, intermediary_input,
    theta_step, theta_third, validate_trajectory, GuidanceOutput, SweepClimbTrajectory,
    ThetaState, Trajectory,
};
use crate::harness::config::{Backend, ScenarioConfig};
use crate::harness::metrics::{summarize, Summary};
use crate::lie::{e3, hat, NavState, Rotation, UnitQuaternion, Vec3};
use crate::measurement::{synthesize_features, BodyMeasurements, FeatureSet};
use crate::observer::{
    bias_update, estimation_errors, observer_nav_step, EstimatorState, ObserverGains,
};
use crate::plant::{gyro_output, plant_step};
use crate::quat_backend::{quat_nav_step, QuatEstimatorState};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One logged row; every field is plain `f64` data so the CSV writer can
/// emit it losslessly.
#[derive(Clone, Debug, PartialEq)]
pub struct StepLog {
    pub t: f64,
    // Ground truth.
    pub true_quat: [f64; 4],
    pub true_omega: [f64; 3],
    pub true_position: [f64; 3],
    pub true_velocity: [f64; 3],
    // Estimates.
    pub est_quat: [f64; 4],
    pub est_bias: [f64; 3],
    pub est_position: [f64; 3],
    pub est_velocity: [f64; 3],
    // Desired.
    pub des_quat: [f64; 4],
    pub des_omega: [f64; 3],
    pub des_position: [f64; 3],
    pub des_velocity: [f64; 3],
    // Error norms: observer then tracking.
    pub err_att_obs: f64,
    pub err_bias: f64,
    pub err_pos_obs: f64,
    pub err_vel_obs: f64,
    pub err_att_trk: f64,
    pub err_rate_trk: f64,
    pub err_pos_trk: f64,
    pub err_vel_trk: f64,
    // Commands.
    pub torque: [f64; 3],
    pub thrust: f64,
}

/// Output of one scenario run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub log: Vec<StepLog>,
    pub summary: Summary,
}

/// Estimator under either attitude backend.
enum BackendState {
    Rotation(EstimatorState),
    Quaternion(QuatEstimatorState),
}

impl BackendState {
    fn attitude(&self) -> Rotation {
        match self {
            BackendState::Rotation(s) => *s.rotation(),
            BackendState::Quaternion(s) => s.attitude.to_rotation(),
        }
    }

    fn attitude_quat(&self) -> UnitQuaternion {
        match self {
            BackendState::Rotation(s) => UnitQuaternion::from_rotation(s.rotation()),
            BackendState::Quaternion(s) => s.attitude,
        }
    }

    fn position(&self) -> Vec3 {
        match self {
            BackendState::Rotation(s) => *s.position(),
            BackendState::Quaternion(s) => s.position,
        }
    }

    fn velocity(&self) -> Vec3 {
        match self {
            BackendState::Rotation(s) => *s.velocity(),
            BackendState::Quaternion(s) => s.velocity,
        }
    }

    fn gyro_bias(&self) -> Vec3 {
        match self {
            BackendState::Rotation(s) => s.gyro_bias,
            BackendState::Quaternion(s) => s.gyro_bias,
        }
    }

    /// Rotation-backend view (bias included) for the controller interface.
    fn as_estimator(&self) -> EstimatorState {
        match self {
            BackendState::Rotation(s) => *s,
            BackendState::Quaternion(s) => s.as_estimator_state(),
        }
    }

    /// Steps 4-6: navigation update, bias untouched. Returns the
    /// correction factors for the guidance derivative feed.
    #[allow(clippy::too_many_arguments)]
    fn nav_step(
        &mut self,
        meas: &BodyMeasurements,
        fs: &FeatureSet,
        thrust: f64,
        mass: f64,
        gains: &ObserverGains,
        gravity: f64,
        dt: f64,
    ) -> Result<crate::observer::CorrectionFactors> {
        match self {
            BackendState::Rotation(s) => {
                let (nav, w) = observer_nav_step(s, meas, fs, thrust, mass, gains, gravity, dt)?;
                s.nav = nav;
                Ok(w)
            }
            BackendState::Quaternion(s) => {
                let (next, w) = quat_nav_step(s, meas, fs, thrust, mass, gains, gravity, dt)?;
                *s = QuatEstimatorState { gyro_bias: s.gyro_bias, ..next };
                Ok(w)
            }
        }
    }

    /// Step 10.
    fn bias_step(
        &mut self,
        meas: &BodyMeasurements,
        fs: &FeatureSet,
        gains: &ObserverGains,
        dt: f64,
    ) -> Result<()> {
        let rotation = self.attitude();
        match self {
            BackendState::Rotation(s) => {
                s.gyro_bias = bias_update(&rotation, &s.gyro_bias, meas, fs, gains, dt)?;
            }
            BackendState::Quaternion(s) => {
                s.gyro_bias = bias_update(&rotation, &s.gyro_bias, meas, fs, gains, dt)?;
            }
        }
        Ok(())
    }
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Runs the default-trajectory scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    run_scenario_with(cfg, &SweepClimbTrajectory, None)
}

/// Runs with a custom trajectory and an optional call-trace sink; the sink
/// receives one label per pipeline stage per step, in execution order.
pub fn run_scenario_with(
    cfg: &ScenarioConfig,
    trajectory: &dyn Trajectory,
    mut trace: Option<&mut Vec<&'static str>>,
) -> Result<RunOutput> {
    cfg.validate()?;
    validate_trajectory(trajectory, &[0.0, 1.0, cfg.duration * 0.5, cfg.duration])?;

    let started = std::time::Instant::now();
    let fs = cfg.feature_set()?;
    let params = cfg.plant_params();
    let obs_gains = cfg.observer_gains();
    let guid_gains = cfg.guidance_gains();
    let ctrl_gains = cfg.controller_gains();
    let bias = cfg.measurement_bias();
    let mass = params.mass;
    let gravity = params.gravity;
    let dt = cfg.dt;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut plant = cfg.initial_plant_state();

    let mut est = match cfg.backend {
        Backend::Rotation => BackendState::Rotation(EstimatorState {
            nav: NavState::new(
                cfg.initial_estimate_rotation(),
                Vec3::new(
                    cfg.initial_estimate.position[0],
                    cfg.initial_estimate.position[1],
                    cfg.initial_estimate.position[2],
                ),
                Vec3::new(
                    cfg.initial_estimate.velocity[0],
                    cfg.initial_estimate.velocity[1],
                    cfg.initial_estimate.velocity[2],
                ),
            ),
            gyro_bias: Vec3::new(
                cfg.initial_estimate.gyro_bias[0],
                cfg.initial_estimate.gyro_bias[1],
                cfg.initial_estimate.gyro_bias[2],
            ),
        }),
        Backend::Quaternion => BackendState::Quaternion(QuatEstimatorState {
            attitude: UnitQuaternion::from_rotation(&cfg.initial_estimate_rotation()),
            position: Vec3::new(
                cfg.initial_estimate.position[0],
                cfg.initial_estimate.position[1],
                cfg.initial_estimate.position[2],
            ),
            velocity: Vec3::new(
                cfg.initial_estimate.velocity[0],
                cfg.initial_estimate.velocity[1],
                cfg.initial_estimate.velocity[2],
            ),
            gyro_bias: Vec3::new(
                cfg.initial_estimate.gyro_bias[0],
                cfg.initial_estimate.gyro_bias[1],
                cfg.initial_estimate.gyro_bias[2],
            ),
        }),
    };
    let mut theta = ThetaState::default();

    let steps = cfg.steps();
    let mut log = Vec::with_capacity(steps);

    for k in 1..=steps {
        let t = k as f64 * dt;
        let mut push = |label: &'static str, trace: &mut Option<&mut Vec<&'static str>>| {
            if let Some(sink) = trace.as_deref_mut() {
                sink.push(label);
            }
        };

        // 1-2. Reference sample, auxiliary variable, thrust.
        push("theta_thrust", &mut trace);
        let traj = trajectory.sample(t);
        let (theta_next, theta_ddot) =
            theta_step(&theta, &est.position(), &est.velocity(), &traj, &guid_gains, dt);
        theta = theta_next;
        let (f, _, _) = intermediary_input(&traj, &theta, &theta_ddot, &Vec3::zeros(), &guid_gains);
        let (thrust, q_d, r_d) = extract_attitude(&f, mass, gravity)?;

        // 3. Desired attitude.
        push("desired_attitude", &mut trace);

        // 4. Sensor epoch from the pre-step plant state; innovations and
        // corrections inside the backend step.
        push("innovations_corrections", &mut trace);
        let ys = synthesize_features(
            &plant.rotation,
            &plant.position,
            &fs,
            &bias,
            cfg.measurement.noise_std,
            &mut rng,
        )?;
        let gyro = gyro_output(&plant, &params, cfg.plant.gyro_noise_std, &mut rng);
        let meas = BodyMeasurements { timestamp: t, features: ys, gyro };

        // 5-6. Observer prediction and correction.
        push("predict", &mut trace);
        push("correct", &mut trace);
        let w = est.nav_step(&meas, &fs, thrust, mass, &obs_gains, gravity, dt)?;

        // 7. Intermediary-input derivatives with the updated estimate.
        push("f_derivatives", &mut trace);
        let r_hat = est.attitude();
        let p_hat_dot = est.velocity() - hat(&w.w_omega) * est.position() - w.w_v;
        let v_hat_dot = -(thrust / mass) * r_hat.transposed() * e3()
            - hat(&w.w_omega) * est.velocity()
            - w.w_a;
        let theta_3 = theta_third(&theta, &theta_ddot, &p_hat_dot, &v_hat_dot, &traj, &guid_gains);
        let (_, f_dot, f_ddot) =
            intermediary_input(&traj, &theta, &theta_ddot, &theta_3, &guid_gains);

        // 8. Desired angular velocity and acceleration.
        push("desired_rates", &mut trace);
        let omega_d = desired_angular_velocity(&f, &f_dot, gravity)?;
        let omega_d_dot = desired_angular_acceleration(&f, &f_dot, &f_ddot, gravity)?;
        let guid = GuidanceOutput { f, f_dot, f_ddot, thrust, q_d, r_d, omega_d, omega_d_dot };

        // 9. Torque on the pre-update bias estimate.
        push("torque", &mut trace);
        let cmd: ControlCommand = control_step(&meas, &fs, &est.as_estimator(), &guid, &ctrl_gains)?;

        // 10. Bias update.
        push("bias_update", &mut trace);
        est.bias_step(&meas, &fs, &obs_gains, dt)?;

        // 11. Plant advances under the commanded inputs.
        push("plant_step", &mut trace);
        plant = plant_step(&plant, &cmd, &params, dt);

        // Log row at the new time.
        let est_state = est.as_estimator();
        let errs = estimation_errors(&est_state, &plant.nav(), &params.gyro_bias);
        let r_c = r_d.inverse().compose(&plant.rotation);
        let omega_c = r_d.transposed() * (omega_d - plant.omega);
        let row = StepLog {
            t,
            true_quat: UnitQuaternion::from_rotation(&plant.rotation).coords(),
            true_omega: arr(&plant.omega),
            true_position: arr(&plant.position),
            true_velocity: arr(&plant.velocity),
            est_quat: est.attitude_quat().coords(),
            est_bias: arr(&est.gyro_bias()),
            est_position: arr(&est.position()),
            est_velocity: arr(&est.velocity()),
            des_quat: q_d.coords(),
            des_omega: arr(&omega_d),
            des_position: arr(&traj.position),
            des_velocity: arr(&traj.velocity),
            err_att_obs: errs.attitude_distance,
            err_bias: errs.bias.norm(),
            err_pos_obs: errs.position.norm(),
            err_vel_obs: errs.velocity.norm(),
            err_att_trk: crate::lie::attitude_distance(&r_c),
            err_rate_trk: omega_c.norm(),
            err_pos_trk: (plant.position - traj.position).norm(),
            err_vel_trk: (plant.velocity - traj.velocity).norm(),
            torque: arr(&cmd.torque),
            thrust: cmd.thrust,
        };
        let finite = all_finite(&[
            row.err_att_obs,
            row.err_bias,
            row.err_pos_obs,
            row.err_vel_obs,
            row.err_att_trk,
            row.err_pos_trk,
            row.thrust,
        ]) && all_finite(&row.true_position)
            && all_finite(&row.est_position)
            && all_finite(&row.torque);
        if !finite {
            return Err(Error::NumericalBlowUp {
                step: k,
                what: "non-finite state or command".to_string(),
            });
        }
        log.push(row);
    }

    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let summary = summarize(cfg, &log, wall_ms);
    Ok(RunOutput { log, summary })
}

//! Ground-truth rigid-body simulator for a thrust-vectored vehicle.
//!
//! Motion model, with `R` mapping inertial vectors into the body frame,
//! `Omega` the body angular rate, and `P`, `V` inertial position/velocity:
//!
//! ```text
//! d/dt R     = -hat(Omega) R
//! J d/dt Om  = hat(J Omega) Omega + torque
//! d/dt P     = V
//! d/dt V     = g e3 - (thrust/m) R^T e3
//! ```
//!
//! The fixed-step integrator advances `Omega` with classical RK4 and the
//! navigation block with the exact flow of the group form
//! `X_{k+1} = exp(-G dt) X_k exp(U_k dt)` holding the inputs over the step,
//! where `U_k` carries the angular rate and thrust column and `G` the
//! gravity column.

use crate::controller::ControlCommand;
use crate::lie::{e3, exp_se23, hat, Mat3, NavState, Rotation, TangentInput, Vec3};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// True vehicle state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantState {
    pub rotation: Rotation,
    /// Body-frame angular velocity (rad/s).
    pub omega: Vec3,
    /// Inertial position (m).
    pub position: Vec3,
    /// Inertial velocity (m/s).
    pub velocity: Vec3,
}

impl PlantState {
    pub fn nav(&self) -> NavState {
        NavState::new(self.rotation, self.position, self.velocity)
    }
}

/// Physical constants of the vehicle plus the true (unknown to the
/// estimator) constant gyro bias.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantParams {
    /// Inertia matrix (kg m^2), symmetric positive definite.
    pub inertia: Mat3,
    /// Mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
    /// Constant additive gyro bias (rad/s).
    pub gyro_bias: Vec3,
}

/// Right-hand sides of the motion model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantDerivatives {
    pub r_dot: Mat3,
    pub omega_dot: Vec3,
    pub p_dot: Vec3,
    pub v_dot: Vec3,
}

pub fn plant_derivatives(s: &PlantState, cmd: &ControlCommand, p: &PlantParams) -> PlantDerivatives {
    let inertia_inv = p
        .inertia
        .try_inverse()
        .expect("inertia matrix is positive definite");
    PlantDerivatives {
        r_dot: -hat(&s.omega) * s.rotation.matrix(),
        omega_dot: inertia_inv * (hat(&(p.inertia * s.omega)) * s.omega + cmd.torque),
        p_dot: s.velocity,
        v_dot: p.gravity * e3() - (cmd.thrust / p.mass) * s.rotation.transposed() * e3(),
    }
}

/// One fixed step: RK4 on the Euler rotational equation, exact group flow
/// for attitude/position/velocity with the inputs held constant.
pub fn plant_step(s: &PlantState, cmd: &ControlCommand, p: &PlantParams, dt: f64) -> PlantState {
    // RK4 on J dOmega/dt = hat(J Omega) Omega + torque.
    let inertia_inv = p
        .inertia
        .try_inverse()
        .expect("inertia matrix is positive definite");
    let f = |om: &Vec3| inertia_inv * (hat(&(p.inertia * om)) * om + cmd.torque);
    let k1 = f(&s.omega);
    let k2 = f(&(s.omega + 0.5 * dt * k1));
    let k3 = f(&(s.omega + 0.5 * dt * k2));
    let k4 = f(&(s.omega + dt * k3));
    let omega_next = s.omega + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    // Group form with Omega and thrust frozen over the step. The kappa
    // entries of the two tangents cancel, leaving a clean embedding.
    let u = TangentInput::new(s.omega, Vec3::zeros(), -(cmd.thrust / p.mass) * e3(), 1.0);
    let grav = TangentInput::new(Vec3::zeros(), Vec3::zeros(), -p.gravity * e3(), 1.0);
    let x5 = exp_se23(&-grav, dt) * s.nav().embed() * exp_se23(&u, dt);
    debug_assert!(x5[(4, 3)].abs() < 1e-12);

    let rt: Mat3 = x5.fixed_view::<3, 3>(0, 0).into();
    PlantState {
        rotation: Rotation::project(&rt.transpose()),
        omega: omega_next,
        position: x5.fixed_view::<3, 1>(0, 3).into(),
        velocity: x5.fixed_view::<3, 1>(0, 4).into(),
    }
}

/// Gyro reading: `Omega + bias`, with optional white noise drawn from `rng`.
pub fn gyro_output(s: &PlantState, p: &PlantParams, noise_std: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    let mut out = s.omega + p.gyro_bias;
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std).expect("validated non-negative");
        out += Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn params() -> PlantParams {
        PlantParams {
            inertia: Mat3::from_diagonal(&Vec3::new(0.15, 0.23, 0.16)),
            mass: 3.0,
            gravity: 9.81,
            gyro_bias: Vec3::zeros(),
        }
    }

    fn hover_state() -> PlantState {
        PlantState {
            rotation: Rotation::identity(),
            omega: Vec3::zeros(),
            position: Vec3::new(0.0, 0.0, 1.0),
            velocity: Vec3::zeros(),
        }
    }

    #[test]
    fn hover_derivatives_vanish() {
        let cmd = ControlCommand { torque: Vec3::zeros(), thrust: 3.0 * 9.81 };
        let d = plant_derivatives(&hover_state(), &cmd, &params());
        assert_eq!(d.r_dot, Mat3::zeros());
        assert_eq!(d.omega_dot, Vec3::zeros());
        assert_eq!(d.p_dot, Vec3::zeros());
        assert_abs_diff_eq!(d.v_dot, Vec3::zeros(), epsilon = 1e-14);
    }

    #[test]
    fn free_fall_accelerates_along_plus_z() {
        let cmd = ControlCommand { torque: Vec3::zeros(), thrust: 0.0 };
        let d = plant_derivatives(&hover_state(), &cmd, &params());
        assert_abs_diff_eq!(d.v_dot, Vec3::new(0.0, 0.0, 9.81), epsilon = 0.0);
    }

    #[test]
    fn torque_free_spin_conserves_kinetic_energy_rate() {
        // d/dt (Omega^T J Omega / 2) = Omega^T hat(J Omega) Omega = 0.
        let p = params();
        let s = PlantState {
            rotation: Rotation::identity(),
            omega: Vec3::new(1.0, -2.0, 0.5),
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
        };
        let cmd = ControlCommand { torque: Vec3::zeros(), thrust: 0.0 };
        let d = plant_derivatives(&s, &cmd, &p);
        let energy_rate = s.omega.dot(&(p.inertia * d.omega_dot));
        assert!(energy_rate.abs() < 1e-14);

        // And numerically over one second to integrator order.
        let mut state = s;
        let e0 = 0.5 * state.omega.dot(&(p.inertia * state.omega));
        for _ in 0..1000 {
            state = plant_step(&state, &cmd, &p, 1e-3);
        }
        let e1 = 0.5 * state.omega.dot(&(p.inertia * state.omega));
        assert!((e1 - e0).abs() < 1e-10, "energy drift {:.3e}", e1 - e0);
        // Angular momentum magnitude is likewise conserved.
        let h0 = (p.inertia * s.omega).norm();
        let h1 = (p.inertia * state.omega).norm();
        assert!((h1 - h0).abs() < 1e-10);
    }

    #[test]
    fn hover_is_a_fixed_point_of_the_stepper() {
        let p = params();
        let cmd = ControlCommand { torque: Vec3::zeros(), thrust: p.mass * p.gravity };
        let mut s = hover_state();
        for _ in 0..1000 {
            s = plant_step(&s, &cmd, &p, 1e-3);
        }
        assert!((s.position - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!(s.velocity.norm() < 1e-12);
        assert!((s.rotation.matrix() - Mat3::identity()).norm() < 1e-12);
    }

    #[test]
    fn rotation_stays_on_the_group_over_long_runs() {
        let p = params();
        let cmd = ControlCommand { torque: Vec3::new(0.01, -0.02, 0.005), thrust: 20.0 };
        let mut s = PlantState {
            rotation: Rotation::identity(),
            omega: Vec3::new(0.3, 0.2, -0.1),
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
        };
        for _ in 0..50_000 {
            s = plant_step(&s, &cmd, &p, 1e-3);
        }
        assert!(s.rotation.orthonormality_defect() < 1e-9);
    }

    #[test]
    fn omega_channel_converges_at_fourth_order() {
        // Self-convergence study on the torque-driven Euler equation: halve
        // dt, compare against a fine reference, expect >= 3.8x gain.
        let p = params();
        let cmd = ControlCommand { torque: Vec3::new(0.05, 0.02, -0.03), thrust: 0.0 };
        let run = |dt: f64| {
            let mut s = PlantState {
                rotation: Rotation::identity(),
                omega: Vec3::new(1.0, -0.5, 0.8),
                position: Vec3::zeros(),
                velocity: Vec3::zeros(),
            };
            let steps = (1.0 / dt).round() as usize;
            for _ in 0..steps {
                s = plant_step(&s, &cmd, &p, dt);
            }
            s.omega
        };
        let reference = run(1.0 / 64000.0);
        let errs: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|&dt| (run(dt) - reference).norm())
            .collect();
        assert!(errs[0] / errs[1] >= 3.8, "errs {:?}", errs);
        assert!(errs[1] / errs[2] >= 3.8, "errs {:?}", errs);
    }

    #[test]
    fn group_step_matches_euler_to_second_order() {
        let p = params();
        let cmd = ControlCommand { torque: Vec3::new(0.01, 0.02, 0.03), thrust: 22.0 };
        let s = PlantState {
            rotation: crate::lie::exp_so3(&Vec3::new(0.4, -0.2, 0.7)),
            omega: Vec3::new(0.5, 0.3, -0.4),
            position: Vec3::new(1.0, 2.0, 3.0),
            velocity: Vec3::new(-0.5, 0.2, 0.1),
        };
        let mut gaps = Vec::new();
        for dt in [1e-3, 5e-4, 2.5e-4] {
            let next = plant_step(&s, &cmd, &p, dt);
            let d = plant_derivatives(&s, &cmd, &p);
            let gap = (next.rotation.matrix() - (s.rotation.matrix() + d.r_dot * dt)).norm()
                + (next.position - (s.position + d.p_dot * dt)).norm()
                + (next.velocity - (s.velocity + d.v_dot * dt)).norm();
            gaps.push(gap);
        }
        assert!(gaps[0] / gaps[1] > 3.5, "gaps {:?}", gaps);
        assert!(gaps[1] / gaps[2] > 3.5, "gaps {:?}", gaps);
    }

    #[test]
    fn gyro_output_bias_and_noise() {
        let mut p = params();
        let s = hover_state();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(gyro_output(&s, &p, 0.0, &mut rng), Vec3::zeros());
        p.gyro_bias = Vec3::new(0.1, -0.1, 0.05);
        assert_eq!(gyro_output(&s, &p, 0.0, &mut rng), p.gyro_bias);

        // Sample mean over many draws within 3 sigma / sqrt(N) of the bias.
        let std = 0.02;
        let n = 100_000;
        let mut mean = Vec3::zeros();
        for _ in 0..n {
            mean += gyro_output(&s, &p, std, &mut rng);
        }
        mean /= n as f64;
        let tol = 3.0 * std / (n as f64).sqrt();
        for i in 0..3 {
            assert!(
                (mean[i] - p.gyro_bias[i]).abs() < tol,
                "axis {i}: mean {:.6} vs bias {:.6}",
                mean[i],
                p.gyro_bias[i]
            );
        }
    }
}

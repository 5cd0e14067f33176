//! Runtime identity and oracle suites.
//!
//! These checks run from the `vtol-sim selftest` subcommand and are reused
//! by the test suites. The matrix-exponential series here are deliberately
//! independent of the closed forms in [`crate::lie`]: they sum the plain
//! power series so the closed-form implementations have something honest to
//! be checked against.

use crate::lie::{
    attitude_distance, exp_se23, exp_so3, hat, skew_part, skew_vector, trace_complement, vex,
    Mat3, Mat5, NavState, Rotation, TangentInput, UnitQuaternion, Vec3,
};
use crate::measurement::{aggregate, observer_innovations, controller_innovation, BodyMeasurements, Feature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Truncated power series for a 3x3 matrix exponential (test oracle).
pub fn exp_mat3_series(m: &Mat3, terms: usize) -> Mat3 {
    let mut sum = Mat3::identity();
    let mut term = Mat3::identity();
    for k in 1..=terms {
        term = term * m / (k as f64);
        sum += term;
    }
    sum
}

/// Truncated power series for a 5x5 matrix exponential (test oracle).
pub fn exp_mat5_series(m: &Mat5, terms: usize) -> Mat5 {
    let mut sum = Mat5::identity();
    let mut term = Mat5::identity();
    for k in 1..=terms {
        term = term * m / (k as f64);
        sum += term;
    }
    sum
}

/// Uniform random rotation (via a normalized 4-vector).
pub fn random_rotation(rng: &mut impl Rng) -> Rotation {
    let q = UnitQuaternion::new_normalized(
        rng.gen::<f64>() - 0.5,
        Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
    );
    q.to_rotation()
}

fn random_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::new(
        (rng.gen::<f64>() - 0.5) * 2.0 * scale,
        (rng.gen::<f64>() - 0.5) * 2.0 * scale,
        (rng.gen::<f64>() - 0.5) * 2.0 * scale,
    )
}

fn random_mat(rng: &mut impl Rng, scale: f64) -> Mat3 {
    Mat3::from_fn(|_, _| (rng.gen::<f64>() - 0.5) * 2.0 * scale)
}

type CheckResult = Result<(), String>;

/// `vex(hat(w)) == w` exactly and `hat(vex(S)) == S` for antisymmetric `S`.
pub fn check_hat_vex_roundtrip(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let w = random_vec(&mut rng, 10.0);
        if vex(&hat(&w)) != w {
            return Err(format!("vex(hat(w)) != w at sample {i}"));
        }
        let s = skew_part(&random_mat(&mut rng, 3.0));
        if (hat(&vex(&s)) - s).norm() > 1e-15 {
            return Err(format!("hat(vex(S)) != S at sample {i}"));
        }
    }
    Ok(())
}

/// Trace/skew identity `Tr{N hat(w)} = -2 vex(skew_part(N))^T w` and the
/// cross-product outer identity `hat(y x z) = z y^T - y z^T`.
pub fn check_trace_and_cross_identities(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let n = random_mat(&mut rng, 2.0);
        let w = random_vec(&mut rng, 2.0);
        let lhs = (n * hat(&w)).trace();
        let rhs = -2.0 * skew_vector(&n).dot(&w);
        if (lhs - rhs).abs() > 1e-12 {
            return Err(format!("trace identity residual {:.3e} at sample {i}", (lhs - rhs).abs()));
        }
        let y = random_vec(&mut rng, 2.0);
        let z = random_vec(&mut rng, 2.0);
        let lhs2 = hat(&y.cross(&z));
        let rhs2 = z * y.transpose() - y * z.transpose();
        if (lhs2 - rhs2).norm() > 1e-12 {
            return Err(format!("cross outer identity residual {:.3e} at sample {i}", (lhs2 - rhs2).norm()));
        }
    }
    // The stated zero cases.
    let w = random_vec(&mut rng, 1.0);
    if (Mat3::identity() * hat(&w)).trace().abs() > 0.0 {
        return Err("Tr{I hat(w)} should vanish".into());
    }
    Ok(())
}

/// `|skew_vector(R)|^2 = 4 (1 - d) d` with `d` the attitude distance.
pub fn check_attitude_distance_identity(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let r = random_rotation(&mut rng);
        let d = attitude_distance(&r);
        let lhs = skew_vector(r.matrix()).norm_squared();
        let rhs = 4.0 * (1.0 - d) * d;
        if (lhs - rhs).abs() > 1e-12 {
            return Err(format!("distance identity residual {:.3e} at sample {i}", (lhs - rhs).abs()));
        }
    }
    Ok(())
}

/// Spectral bounds on the attitude innovation through a symmetric scatter
/// matrix `M` with rank >= 2:
///
/// `lam_min(Mbar)^2 (1 - d) d <= |skew_vector(R M)|^2 <= lam_max(Mbar)^2 d`
///
/// where `Mbar = Tr{M} I - M` and `d` is the attitude distance of `R`.
/// The lower bound needs the `(1 - d)` factor: without it a quarter turn
/// about the minimum-eigenvector axis of `Mbar` is already a counterexample,
/// and both sides coincide exactly on that axis.
pub fn check_innovation_bounds(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        // Random positive semidefinite scatter matrix of full rank (the
        // measurement path also exercises rank-2 planar sets).
        let a = random_mat(&mut rng, 1.5);
        let m = a.transpose() * a;
        let mbar = trace_complement(&m);
        let eig = mbar.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let r = random_rotation(&mut rng);
        let d = attitude_distance(&r);
        let v2 = skew_vector(&(r.matrix() * m)).norm_squared();
        if lo * lo * (1.0 - d) * d > v2 + 1e-12 {
            return Err(format!(
                "lower innovation bound violated at sample {i}: {:.6e} > {:.6e}",
                lo * lo * (1.0 - d) * d,
                v2
            ));
        }
        if v2 > hi * hi * d + 1e-12 {
            return Err(format!(
                "upper innovation bound violated at sample {i}: {:.6e} > {:.6e}",
                v2,
                hi * hi * d
            ));
        }
    }
    Ok(())
}

/// Closed-form rotation and navigation exponentials against the 30-term
/// series, arguments up to a half turn.
pub fn check_exp_oracles(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let axis = random_vec(&mut rng, 1.0).normalize();
        let phi = axis * (rng.gen::<f64>() * std::f64::consts::PI);
        let gap = (exp_so3(&phi).matrix() - exp_mat3_series(&hat(&phi), 30)).norm();
        if gap > 1e-12 {
            return Err(format!("exp_so3 series gap {:.3e} at sample {i}", gap));
        }
        let u = TangentInput::new(
            phi,
            random_vec(&mut rng, 2.0),
            random_vec(&mut rng, 2.0),
            (rng.gen::<f64>() - 0.5) * 4.0,
        );
        let gap5 = (exp_se23(&u, 1.0) - exp_mat5_series(&u.embed(), 30)).norm();
        if gap5 > 1e-12 {
            return Err(format!("exp_se23 series gap {:.3e} at sample {i}", gap5));
        }
    }
    Ok(())
}

/// Closed-form navigation inverse against the dense 5x5 inverse, and
/// composition against the embedding product.
pub fn check_nav_group(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let x = NavState::new(
            random_rotation(&mut rng),
            random_vec(&mut rng, 10.0),
            random_vec(&mut rng, 4.0),
        );
        let dense = x
            .embed()
            .try_inverse()
            .ok_or_else(|| format!("embedding not invertible at sample {i}"))?;
        if (x.inverse().embed() - dense).norm() > 1e-10 {
            return Err(format!("closed-form inverse mismatch at sample {i}"));
        }
        if (x.compose(&x.inverse()).embed() - Mat5::identity()).norm() > 1e-9 {
            return Err(format!("compose/inverse identity failed at sample {i}"));
        }
    }
    Ok(())
}

/// Direct-measurement identity chain: with clean measurements the observer
/// and controller innovations computed from the raw landmark vectors equal
/// the same quantities built from ground truth.
pub fn check_measurement_oracle(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let n = 3 + (rng.gen::<u32>() % 4) as usize;
        let features: Vec<Feature> = (0..n)
            .map(|_| Feature { position: random_vec(&mut rng, 2.0), weight: 0.5 + rng.gen::<f64>() })
            .collect();
        let fs = match aggregate(&features) {
            Ok(fs) => fs,
            Err(_) => continue, // freak near-collinear draw
        };
        let r = random_rotation(&mut rng);
        let p = random_vec(&mut rng, 5.0);
        let r_hat = random_rotation(&mut rng);
        let p_hat = random_vec(&mut rng, 5.0);
        let r_d = random_rotation(&mut rng);

        let ys: Vec<Vec3> = features.iter().map(|f| &r * &(f.position - p)).collect();
        let meas = BodyMeasurements { timestamp: 0.0, features: ys, gyro: Vec3::zeros() };

        let inn = observer_innovations(&r_hat, &p_hat, &meas, &fs)
            .map_err(|e| format!("innovation error at sample {i}: {e}"))?;
        // Ground truth route: R_tilde = R_hat^T R, innovation through R_tilde M.
        let r_tilde = r_hat.inverse().compose(&r);
        let truth_att = skew_vector(&(r_tilde.matrix() * fs.scatter()));
        if (inn.attitude - truth_att).norm() > 1e-12 {
            return Err(format!(
                "observer attitude innovation gap {:.3e} at sample {i}",
                (inn.attitude - truth_att).norm()
            ));
        }
        // Weighted position residual against its error-form expansion.
        let p_tilde = p_hat - r_tilde.matrix() * p;
        let truth_pos = fs.total_weight()
            * (p_tilde + (r_tilde.matrix() - Mat3::identity()) * fs.centroid());
        if (inn.weighted_position - truth_pos).norm() > 1e-12 {
            return Err(format!(
                "weighted position residual gap {:.3e} at sample {i}",
                (inn.weighted_position - truth_pos).norm()
            ));
        }
        let ups_c = controller_innovation(&r_d, &meas, &fs)
            .map_err(|e| format!("controller innovation error at sample {i}: {e}"))?;
        let truth_c = skew_vector(&(r_d.inverse().compose(&r).matrix() * fs.scatter()));
        if (ups_c - truth_c).norm() > 1e-12 {
            return Err(format!(
                "controller innovation gap {:.3e} at sample {i}",
                (ups_c - truth_c).norm()
            ));
        }
    }
    Ok(())
}

/// Quaternion double cover and matrix convention checks.
pub fn check_quaternion_conventions(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let q = UnitQuaternion::new_normalized(
            rng.gen::<f64>() - 0.5,
            random_vec(&mut rng, 1.0),
        );
        let r1 = q.to_rotation();
        let r2 = (-q).to_rotation();
        if (r1.matrix() - r2.matrix()).norm() > 1e-14 {
            return Err(format!("double cover broken at sample {i}"));
        }
        let back = UnitQuaternion::from_rotation(&r1);
        if (back.to_rotation().matrix() - r1.matrix()).norm() > 1e-12 {
            return Err(format!("from_rotation round trip failed at sample {i}"));
        }
    }
    Ok(())
}

/// Runs every suite with its default sample count; returns (name, result).
pub fn run_all() -> Vec<(&'static str, CheckResult)> {
    vec![
        ("hat/vex round trip", check_hat_vex_roundtrip(10_000, 101)),
        ("trace and cross identities", check_trace_and_cross_identities(10_000, 102)),
        ("attitude distance identity", check_attitude_distance_identity(10_000, 103)),
        ("innovation spectral bounds", check_innovation_bounds(10_000, 104)),
        ("exponential series oracles", check_exp_oracles(1_000, 105)),
        ("navigation group closure", check_nav_group(1_000, 106)),
        ("direct measurement oracle", check_measurement_oracle(1_000, 107)),
        ("quaternion conventions", check_quaternion_conventions(1_000, 108)),
    ]
}

//! so(3)/SO(3) primitives: hat/vex maps, skew projections, the normalized
//! attitude distance, and the closed-form rotation exponential.

use crate::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Third basis vector of the inertial frame.
pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Skew-symmetric (cross-product) matrix of a vector.
///
/// `hat(y) * z == y.cross(&z)` for all `y`, `z`.
pub fn hat(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`]. Reads the three independent entries directly, so
/// `vex(hat(w)) == w` exactly. The input must be antisymmetric; use
/// [`try_vex`] when that is not guaranteed.
pub fn vex(s: &Mat3) -> Vec3 {
    debug_assert!(
        antisymmetry_defect(s) <= 1e-9,
        "vex of a non-antisymmetric matrix (defect {:.3e})",
        antisymmetry_defect(s)
    );
    Vec3::new(s[(2, 1)], s[(0, 2)], s[(1, 0)])
}

/// Checked [`vex`]: rejects matrices whose symmetric part exceeds 1e-9.
pub fn try_vex(s: &Mat3) -> Result<Vec3> {
    let defect = antisymmetry_defect(s);
    if defect > 1e-9 {
        return Err(Error::NotAntisymmetric(defect));
    }
    Ok(Vec3::new(s[(2, 1)], s[(0, 2)], s[(1, 0)]))
}

fn antisymmetry_defect(s: &Mat3) -> f64 {
    (s + s.transpose()).norm()
}

/// Antisymmetric projection `(M - M^T) / 2`.
pub fn skew_part(m: &Mat3) -> Mat3 {
    (m - m.transpose()) * 0.5
}

/// Vector of the antisymmetric part: `vex((M - M^T) / 2)`.
///
/// Applied to a rotation error times a landmark scatter matrix this is the
/// attitude innovation direction used by both the observer and the
/// controller.
pub fn skew_vector(m: &Mat3) -> Vec3 {
    vex(&skew_part(m))
}

/// `Tr{M} I - M`. For a symmetric matrix each eigenvalue of the result is
/// the sum of the other two eigenvalues of the input.
pub fn trace_complement(m: &Mat3) -> Mat3 {
    Mat3::identity() * m.trace() - m
}

/// Normalized attitude distance `Tr{I - R} / 4`, in `[0, 1]`.
///
/// Zero at the identity, one at any 180-degree rotation.
pub fn attitude_distance(r: &Rotation) -> f64 {
    0.25 * (Mat3::identity() - r.matrix()).trace()
}

/// Rodrigues coefficients (sin(t)/t, (1-cos(t))/t^2, (t-sin(t))/t^3,
/// (t^2/2 + cos(t) - 1)/t^4) evaluated stably.
///
/// Below the switch angle all four come from Taylor expansions carried to
/// the theta^6 term; the trigonometric forms lose up to half their digits
/// to cancellation between 1e-8 and 1e-2 rad, which would break the
/// 1e-12 agreement with the series oracle.
pub(crate) fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64, f64) {
    let t2 = theta * theta;
    if theta < 1e-2 {
        let t4 = t2 * t2;
        let t6 = t4 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0,
            0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0,
            1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        // 1 - cos via the half-angle square avoids cancellation entirely.
        let one_minus_cos = 2.0 * (0.5 * theta).sin().powi(2);
        (
            s / theta,
            one_minus_cos / t2,
            (theta - s) / (t2 * theta),
            (0.5 * t2 + c - 1.0) / (t2 * t2),
        )
    }
}

/// Closed-form exponential of `hat(phi)` (Rodrigues formula).
///
/// `phi` is a rotation vector: axis times angle in radians.
pub fn exp_so3(phi: &Vec3) -> Rotation {
    let theta = phi.norm();
    let (a, b, _, _) = rodrigues_coefficients(theta);
    let k = hat(phi);
    Rotation::new_unchecked(Mat3::identity() + k * a + k * k * b)
}

/// Left Jacobian of SO(3): `sum_{m>=0} hat(phi)^m / (m+1)!` in closed form.
pub(crate) fn left_jacobian(phi: &Vec3) -> Mat3 {
    let theta = phi.norm();
    let (_, b, c, _) = rodrigues_coefficients(theta);
    let k = hat(phi);
    Mat3::identity() + k * b + k * k * c
}

/// `sum_{m>=0} hat(phi)^m / (m+2)!` in closed form; the second-order
/// integral that multiplies acceleration columns in the 5x5 exponential.
pub(crate) fn second_integral(phi: &Vec3) -> Mat3 {
    let theta = phi.norm();
    let (_, _, c, d) = rodrigues_coefficients(theta);
    let k = hat(phi);
    Mat3::identity() * 0.5 + k * c + k * k * d
}

/// A 3x3 orthonormal matrix with determinant +1.
///
/// Stored row-major as the attitude `R` itself; code that needs the
/// transposed block of the 5x5 navigation embedding asks for it explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Wraps a matrix after checking orthonormality and determinant to 1e-9.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let defect = (m * m.transpose() - Mat3::identity()).norm();
        let det = m.determinant();
        if defect > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::NotARotation { defect, det });
        }
        Ok(Rotation(m))
    }

    /// Wraps without checking. Callers must guarantee the invariants.
    pub fn new_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Nearest rotation to an arbitrary matrix, via the polar factor of the
    /// SVD (with a determinant sign fix).
    pub fn project(m: &Mat3) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd of 3x3 always produces U");
        let vt = svd.v_t.expect("svd of 3x3 always produces V^T");
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            // Flip the column of U paired with the smallest singular value.
            let mut u2 = u;
            u2.column_mut(2).neg_mut();
            r = u2 * vt;
        }
        Rotation(r)
    }

    /// Frobenius distance of `R R^T` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.0 * self.0.transpose() - Mat3::identity()).norm()
    }

    /// Re-projects onto the group whenever drift exceeds 1e-12.
    pub fn renormalized(&self) -> Self {
        if self.orthonormality_defect() > 1e-12 {
            Self::project(&self.0)
        } else {
            *self
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transposed(&self) -> Mat3 {
        self.0.transpose()
    }

    /// Inverse rotation (the transpose).
    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }
}

impl std::ops::Mul<&Vec3> for &Rotation {
    type Output = Vec3;
    fn mul(self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_rotation(rng: &mut impl Rng) -> Rotation {
        // Uniform via a normalized quaternion mapped through the group action.
        let q: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        let q = nalgebra::Vector4::new(q[0] - 0.5, q[1] - 0.5, q[2] - 0.5, q[3] - 0.5).normalize();
        let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
        Rotation::from_matrix(Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
        .unwrap()
    }

    #[test]
    fn hat_matches_reference_entries() {
        let m = hat(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn hat_acts_as_cross_product() {
        let y = Vec3::new(1.0, 0.0, 0.0);
        let z = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(hat(&y) * z, Vec3::new(0.0, 0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let b = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            assert_abs_diff_eq!(hat(&a) * b, a.cross(&b), epsilon = 0.0);
        }
    }

    #[test]
    fn vex_round_trips_exactly() {
        let w = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(vex(&hat(&w)), w);
        assert_eq!(vex(&Mat3::zeros()), Vec3::zeros());
        let s = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(try_vex(&s).unwrap(), Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn try_vex_rejects_symmetric_part() {
        let m = Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(try_vex(&m), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn skew_part_examples() {
        // Symmetric input dies.
        let sym = Mat3::new(1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0);
        assert_abs_diff_eq!(skew_part(&sym), Mat3::zeros(), epsilon = 0.0);
        // Antisymmetric input is a fixed point.
        let a = hat(&Vec3::new(0.3, -0.7, 1.1));
        assert_eq!(skew_part(&a), a);
        // Direct evaluation of (M - M^T)/2.
        let m = Mat3::new(1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let expected = Mat3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(skew_part(&m), expected);
    }

    #[test]
    fn skew_vector_matches_entrywise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let m = Mat3::from_fn(|_, _| rng.gen::<f64>() * 4.0 - 2.0);
            // Independent entrywise formula for vex((M - M^T)/2).
            let oracle = Vec3::new(
                0.5 * (m[(2, 1)] - m[(1, 2)]),
                0.5 * (m[(0, 2)] - m[(2, 0)]),
                0.5 * (m[(1, 0)] - m[(0, 1)]),
            );
            assert_abs_diff_eq!(skew_vector(&m), oracle, epsilon = 1e-15);
        }
        assert_eq!(skew_vector(&hat(&Vec3::new(1.0, 2.0, 3.0))), Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn attitude_distance_examples() {
        assert_eq!(attitude_distance(&Rotation::identity()), 0.0);
        let flip = Rotation::from_matrix(Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0))).unwrap();
        assert_eq!(attitude_distance(&flip), 1.0);
    }

    #[test]
    fn attitude_distance_ties_to_skew_vector_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r = random_rotation(&mut rng);
            let d = attitude_distance(&r);
            let u = skew_vector(r.matrix());
            assert_abs_diff_eq!(u.norm_squared(), 4.0 * (1.0 - d) * d, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_complement_examples() {
        assert_eq!(trace_complement(&Mat3::identity()), 2.0 * Mat3::identity());
        let r = Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0));
        assert_eq!(
            trace_complement(&r),
            Mat3::from_diagonal(&Vec3::new(0.0, 0.0, -2.0))
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let m = Mat3::from_fn(|_, _| rng.gen::<f64>() - 0.5);
            let oracle = Mat3::identity() * m.trace() - m;
            assert_abs_diff_eq!(trace_complement(&m), oracle, epsilon = 0.0);
        }
    }

    #[test]
    fn exp_so3_identity_and_quarter_turn() {
        assert_abs_diff_eq!(
            *exp_so3(&Vec3::zeros()).matrix(),
            Mat3::identity(),
            epsilon = 0.0
        );
        let r = exp_so3(&Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        // Quarter turn about e3: columns are [0,1,0], [-1,0,0], [0,0,1].
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(*r.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn exp_so3_matches_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let axis = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5).normalize();
            let theta = rng.gen::<f64>() * std::f64::consts::PI;
            let phi = axis * theta;
            let closed = exp_so3(&phi);
            let series = crate::selftest::exp_mat3_series(&hat(&phi), 30);
            assert!((closed.matrix() - series).norm() < 1e-12);
            assert!(closed.orthonormality_defect() < 1e-12);
        }
        // Tiny angles go through the Taylor branch.
        for scale in [1e-3, 1e-6, 1e-9, 1e-13] {
            let phi = Vec3::new(0.6, -0.3, 0.74).normalize() * scale;
            let closed = exp_so3(&phi);
            let series = crate::selftest::exp_mat3_series(&hat(&phi), 30);
            assert!((closed.matrix() - series).norm() < 1e-15);
        }
    }

    #[test]
    fn projection_restores_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = random_rotation(&mut rng);
        let perturbed = r.matrix() + Mat3::from_fn(|_, _| (rng.gen::<f64>() - 0.5) * 1e-6);
        let back = Rotation::project(&perturbed);
        assert!(back.orthonormality_defect() < 1e-14);
        assert!((back.matrix() - r.matrix()).norm() < 1e-5);
        assert!((back.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composed_exponentials_stay_on_the_group() {
        // 1e5 small steps with renormalization keep the drift tiny.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut r = Rotation::identity();
        let step = Vec3::new(0.4e-3, -0.2e-3, 0.9e-3);
        for _ in 0..100_000 {
            r = exp_so3(&step).compose(&r).renormalized();
            let _ = rng.gen::<f64>();
        }
        assert!(r.orthonormality_defect() < 1e-9);
    }

    #[test]
    fn flip_set_members_have_trace_minus_one() {
        for d in [
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ] {
            let r = Rotation::from_matrix(Mat3::from_diagonal(&d)).unwrap();
            assert_eq!(r.matrix().trace(), -1.0);
            assert_eq!(attitude_distance(&r), 1.0);
        }
    }
}

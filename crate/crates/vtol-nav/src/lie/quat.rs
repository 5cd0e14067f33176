//! Unit quaternions under the convention used throughout this crate: the
//! attitude matrix built from a quaternion maps inertial vectors into the
//! body frame, matching the kinematics `d/dt R = -hat(Omega) R`.
//!
//! Under this convention the matrix of a product obeys
//! `matrix(a * b) == matrix(b) * matrix(a)`, and the exponential of a
//! rotation vector `phi` has matrix `exp(-hat(phi))`. Both facts are pinned
//! by unit tests; get either wrong and every downstream sign flips.

use super::so3::{hat, Mat3, Rotation, Vec3};

/// Quaternion `[w, xyz]` with unit norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub xyz: Vec3,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        UnitQuaternion { w: 1.0, xyz: Vec3::zeros() }
    }

    /// Builds from components, normalizing defensively.
    pub fn new_normalized(w: f64, xyz: Vec3) -> Self {
        UnitQuaternion { w, xyz }.normalized()
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.xyz.norm_squared()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        UnitQuaternion { w: self.w / n, xyz: self.xyz / n }
    }

    pub fn conjugate(&self) -> Self {
        UnitQuaternion { w: self.w, xyz: -self.xyz }
    }

    /// Attitude matrix `(w^2 - |q|^2) I + 2 q q^T - 2 w hat(q)`.
    pub fn to_rotation(&self) -> Rotation {
        let q = self.xyz;
        let m = Mat3::identity() * (self.w * self.w - q.norm_squared())
            + 2.0 * q * q.transpose()
            - 2.0 * self.w * hat(&q);
        Rotation::new_unchecked(m)
    }

    /// Quaternion of a rotation vector: `[cos(|phi|/2), sin(|phi|/2) phi_hat]`.
    /// Its matrix under this crate's convention is `exp(-hat(phi))`.
    pub fn exp_rotvec(phi: &Vec3) -> Self {
        let theta = phi.norm();
        let half = 0.5 * theta;
        // sin(t/2)/t with a Taylor fallback; stable for all magnitudes.
        let k = if theta < 1e-6 {
            0.5 - theta * theta / 48.0
        } else {
            half.sin() / theta
        };
        UnitQuaternion { w: half.cos(), xyz: phi * k }
    }

    /// Extracts a quaternion from a rotation matrix (largest-pivot branch
    /// selection). `to_rotation` of the result reproduces the input; the
    /// sign of the quaternion itself is not observable downstream.
    pub fn from_rotation(r: &Rotation) -> Self {
        let m = r.matrix();
        let tr = m.trace();
        // Under this convention the off-diagonal differences carry -2w q,
        // so the vector part is the negative of the usual extraction.
        let (w, x, y, z);
        if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            w = 0.25 * s;
            x = (m[(1, 2)] - m[(2, 1)]) / s;
            y = (m[(2, 0)] - m[(0, 2)]) / s;
            z = (m[(0, 1)] - m[(1, 0)]) / s;
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(1, 2)] - m[(2, 1)]) / s;
            x = 0.25 * s;
            y = (m[(0, 1)] + m[(1, 0)]) / s;
            z = (m[(0, 2)] + m[(2, 0)]) / s;
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(2, 0)] - m[(0, 2)]) / s;
            x = (m[(0, 1)] + m[(1, 0)]) / s;
            y = 0.25 * s;
            z = (m[(1, 2)] + m[(2, 1)]) / s;
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            w = (m[(0, 1)] - m[(1, 0)]) / s;
            x = (m[(0, 2)] + m[(2, 0)]) / s;
            y = (m[(1, 2)] + m[(2, 1)]) / s;
            z = 0.25 * s;
        }
        UnitQuaternion { w, xyz: Vec3::new(x, y, z) }.normalized()
    }

    /// Flat `[w, x, y, z]` view for logging.
    pub fn coords(&self) -> [f64; 4] {
        [self.w, self.xyz.x, self.xyz.y, self.xyz.z]
    }
}

impl std::ops::Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    /// Hamilton product.
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion {
            w: self.w * rhs.w - self.xyz.dot(&rhs.xyz),
            xyz: self.w * rhs.xyz + rhs.w * self.xyz + self.xyz.cross(&rhs.xyz),
        }
    }
}

impl std::ops::Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion { w: -self.w, xyz: -self.xyz }
    }
}

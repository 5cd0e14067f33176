//! The extended pose group of 5x5 navigation matrices bundling attitude,
//! position, and velocity, together with its tangent elements and the
//! closed-form exponential used by the fixed-step integrators.

use super::so3::{exp_so3, hat, left_jacobian, second_integral, Mat3, Rotation, Vec3};
use crate::{Error, Result};

pub type Mat5 = nalgebra::Matrix5<f64>;

/// Navigation state: attitude `R`, inertial position `P`, inertial
/// velocity `V`.
///
/// The 5x5 embedding places the transposed attitude in the top-left block:
///
/// ```text
/// [ R^T  P  V ]
/// [  0   1  0 ]
/// [  0   0  1 ]
/// ```
///
/// Accessors always hand back `R` itself; only [`NavState::embed`] and
/// [`NavState::from_embedding`] deal in the transposed block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavState {
    rotation: Rotation,
    position: Vec3,
    velocity: Vec3,
}

impl NavState {
    pub fn new(rotation: Rotation, position: Vec3, velocity: Vec3) -> Self {
        NavState { rotation, position, velocity }
    }

    pub fn identity() -> Self {
        NavState::new(Rotation::identity(), Vec3::zeros(), Vec3::zeros())
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn position(&self) -> &Vec3 {
        &self.position
    }

    pub fn velocity(&self) -> &Vec3 {
        &self.velocity
    }

    /// The 5x5 homogeneous embedding (transposed attitude in the top-left).
    pub fn embed(&self) -> Mat5 {
        let mut x = Mat5::identity();
        x.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.transposed());
        x.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        x.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.velocity);
        x
    }

    /// Reads a 5x5 embedding back, checking the two bottom rows and the
    /// rotation block invariants.
    pub fn from_embedding(x: &Mat5) -> Result<Self> {
        let bottom_ok = (x.row(3) - nalgebra::RowVector5::new(0.0, 0.0, 0.0, 1.0, 0.0)).norm()
            < 1e-9
            && (x.row(4) - nalgebra::RowVector5::new(0.0, 0.0, 0.0, 0.0, 1.0)).norm() < 1e-9;
        if !bottom_ok {
            return Err(Error::Config(
                "5x5 embedding has malformed bottom rows".to_string(),
            ));
        }
        let rt: Mat3 = x.fixed_view::<3, 3>(0, 0).into();
        let rotation = Rotation::from_matrix(rt.transpose())?;
        Ok(NavState::new(
            rotation,
            x.fixed_view::<3, 1>(0, 3).into(),
            x.fixed_view::<3, 1>(0, 4).into(),
        ))
    }

    /// Group product: the 5x5 matrix product expressed on the components.
    pub fn compose(&self, other: &NavState) -> NavState {
        let ra_t = self.rotation.transposed();
        NavState::new(
            other.rotation.compose(&self.rotation),
            ra_t * other.position + self.position,
            ra_t * other.velocity + self.velocity,
        )
    }

    /// Closed-form inverse: `(R^T, -R P, -R V)` in component terms, so the
    /// embedding of the result is the matrix inverse of the embedding.
    pub fn inverse(&self) -> NavState {
        let r = self.rotation.matrix();
        NavState::new(
            self.rotation.inverse(),
            -(r * self.position),
            -(r * self.velocity),
        )
    }
}

/// Tangent-space element of the navigation group:
///
/// ```text
/// [ hat(omega)  v_col  a_col ]
/// [     0         0      0   ]
/// [     0       kappa    0   ]
/// ```
///
/// Carries plant inputs (angular rate, thrust column) and observer
/// correction fields alike; `kappa` is the bottom-row coupling that cancels
/// between the paired left/right exponentials of one integration step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentInput {
    pub omega: Vec3,
    pub v_col: Vec3,
    pub a_col: Vec3,
    pub kappa: f64,
}

impl TangentInput {
    pub fn new(omega: Vec3, v_col: Vec3, a_col: Vec3, kappa: f64) -> Self {
        TangentInput { omega, v_col, a_col, kappa }
    }

    /// The 5x5 matrix form.
    pub fn embed(&self) -> Mat5 {
        let mut u = Mat5::zeros();
        u.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.omega));
        u.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.v_col);
        u.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.a_col);
        u[(4, 3)] = self.kappa;
        u
    }
}

impl std::ops::Neg for TangentInput {
    type Output = TangentInput;
    fn neg(self) -> TangentInput {
        TangentInput::new(-self.omega, -self.v_col, -self.a_col, -self.kappa)
    }
}

/// Closed-form `exp(U dt)` for a tangent element `U`.
///
/// With `K = hat(omega dt)`, the powers of the embedded tangent close after
/// the rotation block, giving
///
/// ```text
/// [ exp(K)   J1 v + kappa N2 a   J1 a ]
/// [   0            1               0  ]
/// [   0         kappa dt           1  ]
/// ```
///
/// where `J1 = dt * (I + K/2! + K^2/3! + ...)` and
/// `N2 = dt^2 * (I/2! + K/3! + K^2/4! + ...)`, both in Rodrigues closed form.
pub fn exp_se23(u: &TangentInput, dt: f64) -> Mat5 {
    let phi = u.omega * dt;
    let r = exp_so3(&phi);
    let j1 = left_jacobian(&phi) * dt;
    let n2 = second_integral(&phi) * (dt * dt);

    let mut e = Mat5::identity();
    e.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
    e.fixed_view_mut::<3, 1>(0, 3)
        .copy_from(&(j1 * u.v_col + n2 * (u.a_col * u.kappa)));
    e.fixed_view_mut::<3, 1>(0, 4).copy_from(&(j1 * u.a_col));
    e[(4, 3)] = u.kappa * dt;
    e
}

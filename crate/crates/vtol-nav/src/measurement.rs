//! Landmark measurement synthesis (plant side) and the direct innovation
//! sums consumed by the observer and the controller.
//!
//! A body-frame landmark measurement is `y_i = R (p_i - P) + b_i + noise`,
//! with `R` mapping inertial vectors into the body frame. The whole point of
//! the direct formulation is that the weighted sums
//!
//! ```text
//! sum_i (s_i / 2) (p_i - p_c) x (Rhat^T y_i)      (attitude innovation)
//! sum_i  s_i (Phat + Rhat^T y_i - p_i)            (weighted position residual)
//! ```
//!
//! equal quantities built from the (unavailable) ground-truth errors, so no
//! attitude or position reconstruction is ever needed.

use crate::lie::{trace_complement, Mat3, Rotation, Vec3};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One landmark: known inertial position and a confidence weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub position: Vec3,
    pub weight: f64,
}

/// A validated landmark set with its cached aggregates: total weight,
/// weighted centroid, weighted scatter matrix and its trace complement.
#[derive(Clone, Debug)]
pub struct FeatureSet {
    features: Vec<Feature>,
    total_weight: f64,
    centroid: Vec3,
    scatter: Mat3,
    scatter_complement: Mat3,
}

impl FeatureSet {
    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// `s_T = sum s_i`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `p_c = (1 / s_T) sum s_i p_i`.
    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    /// `M = sum s_i (p_i - p_c)(p_i - p_c)^T`, symmetric positive
    /// semidefinite with rank >= 2.
    pub fn scatter(&self) -> Mat3 {
        self.scatter
    }

    /// `Tr{M} I - M`; its eigenvalue range controls the attitude
    /// innovation gain (see the spectral bounds in [`crate::selftest`]).
    pub fn scatter_complement(&self) -> Mat3 {
        self.scatter_complement
    }
}

/// Validates a landmark list and caches its aggregates.
///
/// Requires at least three landmarks, strictly positive weights, and a
/// non-collinear geometry (weighted scatter matrix of rank >= 2).
pub fn aggregate(features: &[Feature]) -> Result<FeatureSet> {
    if features.len() < 3 {
        return Err(Error::TooFewLandmarks(features.len()));
    }
    for (index, f) in features.iter().enumerate() {
        if !(f.weight > 0.0) {
            return Err(Error::NonPositiveWeight { index, weight: f.weight });
        }
    }
    let total_weight: f64 = features.iter().map(|f| f.weight).sum();
    let centroid = features
        .iter()
        .fold(Vec3::zeros(), |acc, f| acc + f.weight * f.position)
        / total_weight;
    let scatter = features.iter().fold(Mat3::zeros(), |acc, f| {
        let d = f.position - centroid;
        acc + f.weight * d * d.transpose()
    });
    let eig = scatter.symmetric_eigenvalues();
    let lam_max = eig.max().max(1.0);
    let rank = eig.iter().filter(|&&l| l > 1e-9 * lam_max).count();
    if rank < 2 {
        return Err(Error::CollinearLandmarks { rank });
    }
    Ok(FeatureSet {
        features: features.to_vec(),
        total_weight,
        centroid,
        scatter,
        scatter_complement: trace_complement(&scatter),
    })
}

/// One sensor epoch: body-frame landmark vectors plus the gyro reading.
#[derive(Clone, Debug)]
pub struct BodyMeasurements {
    pub timestamp: f64,
    /// `y_i`, one per landmark, in landmark order.
    pub features: Vec<Vec3>,
    /// Gyro reading `Omega_m` (rad/s), bias-corrupted.
    pub gyro: Vec3,
}

/// Innovation pair extracted from one measurement epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Innovations {
    /// `sum (s_i / 2) ((p_i - p_c) x Rhat^T y_i)`; equals the skew vector of
    /// the attitude error times the scatter matrix when measurements are
    /// clean.
    pub attitude: Vec3,
    /// `sum s_i (Phat + Rhat^T y_i - p_i)`.
    pub weighted_position: Vec3,
}

/// Synthesizes body-frame landmark vectors from ground truth.
///
/// `bias` is per-landmark (length must match); pass an empty slice for
/// unbiased measurements. Noise is independent per axis,
/// `N(0, noise_std^2)`, drawn in landmark order from `rng` so a fixed seed
/// reproduces the exact byte stream.
pub fn synthesize_features(
    rotation: &Rotation,
    position: &Vec3,
    fs: &FeatureSet,
    bias: &[Vec3],
    noise_std: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec3>> {
    if !bias.is_empty() && bias.len() != fs.len() {
        return Err(Error::MeasurementCountMismatch { got: bias.len(), expected: fs.len() });
    }
    let normal = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).expect("noise_std validated non-negative"))
    } else {
        None
    };
    let mut out = Vec::with_capacity(fs.len());
    for (i, f) in fs.features().iter().enumerate() {
        let mut y = rotation * &(f.position - position);
        if let Some(b) = bias.get(i) {
            y += b;
        }
        if let Some(n) = &normal {
            y += Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng));
        }
        out.push(y);
    }
    Ok(out)
}

/// Seeded convenience wrapper assembling a full [`BodyMeasurements`] epoch.
pub fn synthesize_measurements(
    rotation: &Rotation,
    position: &Vec3,
    fs: &FeatureSet,
    bias: &[Vec3],
    noise_std: f64,
    rng_seed: u64,
    timestamp: f64,
    gyro: Vec3,
) -> Result<BodyMeasurements> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let features = synthesize_features(rotation, position, fs, bias, noise_std, &mut rng)?;
    Ok(BodyMeasurements { timestamp, features, gyro })
}

/// Observer innovation pair from one measurement epoch and the current
/// estimates.
pub fn observer_innovations(
    r_hat: &Rotation,
    p_hat: &Vec3,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
) -> Result<Innovations> {
    if meas.features.len() != fs.len() {
        return Err(Error::MeasurementCountMismatch {
            got: meas.features.len(),
            expected: fs.len(),
        });
    }
    let rt = r_hat.transposed();
    let mut attitude = Vec3::zeros();
    let mut weighted_position = Vec3::zeros();
    for (f, y) in fs.features().iter().zip(&meas.features) {
        let body_to_inertial = rt * y;
        attitude += (f.weight * 0.5) * (f.position - fs.centroid()).cross(&body_to_inertial);
        weighted_position += f.weight * (p_hat + body_to_inertial - f.position);
    }
    Ok(Innovations { attitude, weighted_position })
}

/// The weighted cross-sum attitude innovation at an arbitrary attitude:
/// `sum (s_i / 2) ((p_i - p_c) x R^T y_i)`.
pub fn attitude_innovation(r: &Rotation, meas: &BodyMeasurements, fs: &FeatureSet) -> Result<Vec3> {
    if meas.features.len() != fs.len() {
        return Err(Error::MeasurementCountMismatch {
            got: meas.features.len(),
            expected: fs.len(),
        });
    }
    let rt = r.transposed();
    let mut out = Vec3::zeros();
    for (f, y) in fs.features().iter().zip(&meas.features) {
        out += (f.weight * 0.5) * (f.position - fs.centroid()).cross(&(rt * y));
    }
    Ok(out)
}

/// Controller attitude innovation: the cross sum evaluated at the desired
/// attitude in place of the estimate.
pub fn controller_innovation(
    r_d: &Rotation,
    meas: &BodyMeasurements,
    fs: &FeatureSet,
) -> Result<Vec3> {
    attitude_innovation(r_d, meas, fs)
}

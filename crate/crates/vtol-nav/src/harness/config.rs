//! Scenario configuration: TOML-backed, every field defaulted so an empty
//! file runs the reference scenario unchanged.

use crate::controller::ControllerGains;
use crate::guidance::GuidanceGains;
use crate::lie::{Mat3, Rotation, Vec3};
use crate::measurement::{aggregate, Feature, FeatureSet};
use crate::observer::ObserverGains;
use crate::plant::{PlantParams, PlantState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Attitude representation backend for the estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Rotation,
    Quaternion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// Vehicle mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s^2), +z in the inertial frame.
    pub gravity: f64,
    /// Principal moments of inertia (kg m^2).
    pub inertia_diag: [f64; 3],
    /// True constant gyro bias (rad/s).
    pub gyro_bias: [f64; 3],
    /// Gyro white-noise standard deviation (rad/s); zero disables.
    pub gyro_noise_std: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            mass: 3.0,
            gravity: 9.81,
            inertia_diag: [0.15, 0.23, 0.16],
            gyro_bias: [0.1, -0.1, 0.05],
            gyro_noise_std: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialStateConfig {
    /// Initial attitude, row-major; re-projected onto the rotation group at
    /// load (printed matrices rarely satisfy orthonormality to 1e-9).
    pub rotation: [[f64; 3]; 3],
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub omega: [f64; 3],
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        InitialStateConfig {
            rotation: [
                [0.5763, -0.7638, 0.2907],
                [0.8147, 0.5085, -0.2789],
                [0.0652, 0.3976, 0.9153],
            ],
            position: [-1.0, -1.0, 0.0],
            velocity: [1.0, 1.0, 0.0],
            omega: [0.0, 0.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialEstimateConfig {
    pub rotation: [[f64; 3]; 3],
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub gyro_bias: [f64; 3],
}

impl Default for InitialEstimateConfig {
    fn default() -> Self {
        InitialEstimateConfig {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            position: [0.0, 0.0, 0.0],
            velocity: [0.0, 0.0, 0.0],
            gyro_bias: [0.0, 0.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandmarkConfig {
    /// Inertial landmark positions (m); at least three, non-collinear.
    pub positions: Vec<[f64; 3]>,
    /// Confidence weights, one per landmark; defaults to all ones.
    pub weights: Vec<f64>,
}

impl Default for LandmarkConfig {
    fn default() -> Self {
        LandmarkConfig {
            positions: vec![
                [2.0, 1.0, 0.0],
                [-1.5, 2.0, 0.3],
                [1.0, -2.0, 0.5],
                [-2.0, -1.5, 0.2],
                [0.5, 0.5, 2.0],
            ],
            weights: vec![1.0; 5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementConfig {
    /// Per-axis white-noise standard deviation on each landmark vector (m).
    pub noise_std: f64,
    /// Constant measurement bias applied to every landmark vector (m).
    pub bias: [f64; 3],
    /// Optional per-landmark bias override; length must match the landmark
    /// count when present.
    pub per_landmark_bias: Option<Vec<[f64; 3]>>,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        MeasurementConfig {
            noise_std: 0.07,
            bias: [0.05, -0.05, 0.05],
            per_landmark_bias: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainsConfig {
    pub gamma_o: f64,
    pub k_o1: f64,
    pub k_o2: f64,
    pub k_o3: f64,
    pub k_theta1: f64,
    pub k_theta2: f64,
    pub k_c1: f64,
    pub k_c2: f64,
    pub k_c3: f64,
    pub k_c4: f64,
}

impl Default for GainsConfig {
    fn default() -> Self {
        GainsConfig {
            gamma_o: 0.7,
            k_o1: 11.0,
            k_o2: 10.0,
            k_o3: 4.0,
            k_theta1: 1.2,
            k_theta2: 1.2,
            k_c1: 1.0,
            k_c2: 4.0,
            k_c3: 4.0,
            k_c4: 2.0,
        }
    }
}

/// Full scenario description. Defaults reproduce the reference flight:
/// fifty seconds at 1 kHz, five landmarks, noisy biased measurements, large
/// initial estimate error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Total simulated time (s).
    pub duration: f64,
    /// Fixed step size (s).
    pub dt: f64,
    /// RNG seed; identical configs and seeds give byte-identical logs.
    pub seed: u64,
    pub backend: Backend,
    /// Output directory for CSV logs and summaries (created on demand);
    /// the `VTOL_SIM_OUTDIR` environment variable overrides it.
    pub output_dir: String,
    pub plant: PlantConfig,
    pub initial: InitialStateConfig,
    pub initial_estimate: InitialEstimateConfig,
    pub landmarks: LandmarkConfig,
    pub measurement: MeasurementConfig,
    pub gains: GainsConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            duration: 50.0,
            dt: 1e-3,
            seed: 42,
            backend: Backend::Rotation,
            output_dir: "out".to_string(),
            plant: PlantConfig::default(),
            initial: InitialStateConfig::default(),
            initial_estimate: InitialEstimateConfig::default(),
            landmarks: LandmarkConfig::default(),
            measurement: MeasurementConfig::default(),
            gains: GainsConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Reads and validates a TOML config; an empty file yields the defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Field-by-field validation with named errors.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if self.duration < self.dt {
            problems.push(format!(
                "duration ({}) must be at least one step ({})",
                self.duration, self.dt
            ));
        }
        if !(self.plant.mass > 0.0) {
            problems.push(format!("plant.mass must be positive, got {}", self.plant.mass));
        }
        for (i, j) in self.plant.inertia_diag.iter().enumerate() {
            if !(*j > 0.0) {
                problems.push(format!("plant.inertia_diag[{i}] must be positive, got {j}"));
            }
        }
        if self.plant.gyro_noise_std < 0.0 {
            problems.push("plant.gyro_noise_std must be non-negative".to_string());
        }
        if self.measurement.noise_std < 0.0 {
            problems.push("measurement.noise_std must be non-negative".to_string());
        }
        let gains = [
            ("gains.gamma_o", self.gains.gamma_o),
            ("gains.k_o1", self.gains.k_o1),
            ("gains.k_o2", self.gains.k_o2),
            ("gains.k_o3", self.gains.k_o3),
            ("gains.k_theta1", self.gains.k_theta1),
            ("gains.k_theta2", self.gains.k_theta2),
            ("gains.k_c1", self.gains.k_c1),
            ("gains.k_c2", self.gains.k_c2),
            ("gains.k_c3", self.gains.k_c3),
            ("gains.k_c4", self.gains.k_c4),
        ];
        for (name, value) in gains {
            if !(value > 0.0) {
                problems.push(format!("{name} must be strictly positive, got {value}"));
            }
        }
        if self.landmarks.positions.len() < 3 {
            problems.push(format!(
                "landmarks.positions needs at least 3 entries, got {}",
                self.landmarks.positions.len()
            ));
        }
        if self.landmarks.weights.len() != self.landmarks.positions.len() {
            problems.push(format!(
                "landmarks.weights length {} does not match positions length {}",
                self.landmarks.weights.len(),
                self.landmarks.positions.len()
            ));
        }
        if let Some(per) = &self.measurement.per_landmark_bias {
            if per.len() != self.landmarks.positions.len() {
                problems.push(format!(
                    "measurement.per_landmark_bias length {} does not match landmark count {}",
                    per.len(),
                    self.landmarks.positions.len()
                ));
            }
        }
        let r0 = Mat3::from_fn(|i, j| self.initial.rotation[i][j]);
        if (r0 * r0.transpose() - Mat3::identity()).norm() > 1e-2 {
            problems.push("initial.rotation is far from orthonormal".to_string());
        }
        let re = Mat3::from_fn(|i, j| self.initial_estimate.rotation[i][j]);
        if (re * re.transpose() - Mat3::identity()).norm() > 1e-2 {
            problems.push("initial_estimate.rotation is far from orthonormal".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Landmark set with cached aggregates.
    pub fn feature_set(&self) -> Result<FeatureSet> {
        let features: Vec<Feature> = self
            .landmarks
            .positions
            .iter()
            .zip(&self.landmarks.weights)
            .map(|(p, w)| Feature { position: vec3(*p), weight: *w })
            .collect();
        aggregate(&features)
    }

    pub fn plant_params(&self) -> PlantParams {
        PlantParams {
            inertia: Mat3::from_diagonal(&vec3(self.plant.inertia_diag)),
            mass: self.plant.mass,
            gravity: self.plant.gravity,
            gyro_bias: vec3(self.plant.gyro_bias),
        }
    }

    /// Initial true state; the configured attitude is projected onto the
    /// rotation group.
    pub fn initial_plant_state(&self) -> PlantState {
        let r0 = Mat3::from_fn(|i, j| self.initial.rotation[i][j]);
        PlantState {
            rotation: Rotation::project(&r0),
            omega: vec3(self.initial.omega),
            position: vec3(self.initial.position),
            velocity: vec3(self.initial.velocity),
        }
    }

    pub fn initial_estimate_rotation(&self) -> Rotation {
        Rotation::project(&Mat3::from_fn(|i, j| self.initial_estimate.rotation[i][j]))
    }

    pub fn observer_gains(&self) -> ObserverGains {
        ObserverGains {
            gamma_o: self.gains.gamma_o,
            k_o1: self.gains.k_o1,
            k_o2: self.gains.k_o2,
            k_o3: self.gains.k_o3,
        }
    }

    pub fn guidance_gains(&self) -> GuidanceGains {
        GuidanceGains {
            k_theta1: self.gains.k_theta1,
            k_theta2: self.gains.k_theta2,
            k_c3: self.gains.k_c3,
            k_c4: self.gains.k_c4,
        }
    }

    pub fn controller_gains(&self) -> ControllerGains {
        ControllerGains {
            k_c1: self.gains.k_c1,
            k_c2: self.gains.k_c2,
            inertia: Mat3::from_diagonal(&vec3(self.plant.inertia_diag)),
            mass: self.plant.mass,
            gravity: self.plant.gravity,
        }
    }

    /// Per-landmark measurement bias vectors (the common bias expanded, or
    /// the explicit per-landmark override).
    pub fn measurement_bias(&self) -> Vec<Vec3> {
        match &self.measurement.per_landmark_bias {
            Some(per) => per.iter().map(|b| vec3(*b)).collect(),
            None => vec![vec3(self.measurement.bias); self.landmarks.positions.len()],
        }
    }

    /// Number of fixed steps in the run.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_reference_scenario() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.duration, 50.0);
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.plant.mass, 3.0);
        assert_eq!(cfg.plant.inertia_diag, [0.15, 0.23, 0.16]);
        assert_eq!(cfg.gains.gamma_o, 0.7);
        assert_eq!(cfg.gains.k_o1, 11.0);
        assert_eq!(cfg.gains.k_o2, 10.0);
        assert_eq!(cfg.gains.k_o3, 4.0);
        assert_eq!(cfg.gains.k_theta1, 1.2);
        assert_eq!(cfg.gains.k_theta2, 1.2);
        assert_eq!(cfg.gains.k_c1, 1.0);
        assert_eq!(cfg.gains.k_c2, 4.0);
        assert_eq!(cfg.gains.k_c3, 4.0);
        assert_eq!(cfg.gains.k_c4, 2.0);
        assert_eq!(cfg.initial.position, [-1.0, -1.0, 0.0]);
        assert_eq!(cfg.initial.velocity, [1.0, 1.0, 0.0]);
        assert_eq!(cfg.steps(), 50_000);
        // The printed initial attitude is close enough to project cleanly.
        let r = cfg.initial_plant_state().rotation;
        assert!(r.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn negative_gain_is_a_named_error() {
        let err = ScenarioConfig::from_toml("[gains]\nk_o1 = -2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gains.k_o1"), "{msg}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(ScenarioConfig::from_toml("mystery_knob = 3\n").is_err());
    }

    #[test]
    fn round_trip_preserves_config() {
        let mut cfg = ScenarioConfig::default();
        cfg.duration = 12.5;
        cfg.seed = 7;
        cfg.backend = Backend::Quaternion;
        cfg.measurement.per_landmark_bias =
            Some(vec![[0.01, 0.0, 0.0]; cfg.landmarks.positions.len()]);
        let text = cfg.to_toml().unwrap();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn landmark_mismatch_is_rejected() {
        let toml = r#"
[landmarks]
positions = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
weights = [1.0, 1.0]
"#;
        assert!(ScenarioConfig::from_toml(toml).is_err());
    }

    #[test]
    fn common_bias_expands_per_landmark() {
        let cfg = ScenarioConfig::default();
        let bias = cfg.measurement_bias();
        assert_eq!(bias.len(), 5);
        assert!(bias.iter().all(|b| *b == Vec3::new(0.05, -0.05, 0.05)));
    }
}

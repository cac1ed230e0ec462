//! JSON experiment configuration. Every field has a default, so `{}` is a
//! valid configuration.

use std::f64::consts::PI;
use std::path::PathBuf;

use robin_stokes::{AnnulusSpec, Mesh, RobinField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub robin: RobinSpec,
    pub alpha: f64,
    pub flux: FluxSpec,
    pub tolerances: Tolerances,
    pub eigen_count: usize,
    pub time: TimeGrid,
    pub carleman: CarlemanGrid,
    pub inverse: InverseSweep,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: Geometry::default(),
            robin: RobinSpec::Constant { value: 2.0 },
            alpha: 1.0,
            flux: FluxSpec::default(),
            tolerances: Tolerances::default(),
            eigen_count: 10,
            time: TimeGrid::default(),
            carleman: CarlemanGrid::default(),
            inverse: InverseSweep::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub h: f64,
    /// Uniform refinements applied on top of the base mesh.
    pub refinements: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { inner_radius: 0.5, outer_radius: 1.0, h: 0.1, refinements: 2 }
    }
}

impl Geometry {
    pub fn spec(&self) -> AnnulusSpec {
        AnnulusSpec::new(self.inner_radius, self.outer_radius, self.h)
    }
}

/// Robin coefficient on the inner circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RobinSpec {
    Constant { value: f64 },
    /// Values at equally spaced angles θ_k = 2πk/n, linear in θ between them.
    Nodal { values: Vec<f64> },
    /// `base` plus `amplitude` on the arc |θ − center| < half_width.
    Patch { base: f64, amplitude: f64, center: f64, half_width: f64 },
}

impl RobinSpec {
    pub fn validate(&self, alpha: f64) -> Result<(), ConfigError> {
        let min = match self {
            RobinSpec::Constant { value } => *value,
            RobinSpec::Nodal { values } => {
                if values.is_empty() {
                    return bad("robin: nodal values must not be empty");
                }
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            RobinSpec::Patch { base, amplitude, half_width, .. } => {
                if !(*half_width > 0.0) {
                    return bad("robin: patch half_width must be positive");
                }
                base.min(base + amplitude)
            }
        };
        if !(min >= alpha) {
            return bad(format!("robin: coefficient minimum {min} is below alpha = {alpha}"));
        }
        Ok(())
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let th = x[1].atan2(x[0]);
        match self {
            RobinSpec::Constant { value } => *value,
            RobinSpec::Nodal { values } => periodic_linear(values, th),
            RobinSpec::Patch { base, amplitude, center, half_width } => {
                let d = wrap_angle(th - center);
                if d.abs() < *half_width {
                    base + amplitude
                } else {
                    *base
                }
            }
        }
    }

    pub fn field(&self, mesh: &Mesh, alpha: f64) -> RobinField {
        match self {
            RobinSpec::Constant { value } => RobinField::constant(mesh, *value, alpha),
            _ => RobinField::from_fn(mesh, alpha, |x| self.eval(x)),
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn periodic_linear<T: Copy + Lerp>(values: &[T], th: f64) -> T {
    let n = values.len();
    let pos = th.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
    let k = (pos.floor() as usize).min(n - 1);
    let w = pos - k as f64;
    values[k].lerp(values[(k + 1) % n], w)
}

trait Lerp {
    fn lerp(self, other: Self, w: f64) -> Self;
}

impl Lerp for f64 {
    fn lerp(self, other: f64, w: f64) -> f64 {
        (1.0 - w) * self + w * other
    }
}

impl Lerp for [f64; 2] {
    fn lerp(self, other: [f64; 2], w: f64) -> [f64; 2] {
        [self[0].lerp(other[0], w), self[1].lerp(other[1], w)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxPreset {
    RigidRotation,
    Radial,
    Custom,
}

/// Outer flux g. `custom` reads `nodal` as values at equally spaced angles.
/// When `time` is set the evolution solver uses g = (h + ω(t) ρ) n instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxSpec {
    pub preset: FluxPreset,
    pub magnitude: f64,
    pub nodal: Vec<[f64; 2]>,
    pub time: Option<KappaPreset>,
}

impl Default for FluxSpec {
    fn default() -> Self {
        FluxSpec { preset: FluxPreset::RigidRotation, magnitude: 1.0, nodal: Vec::new(), time: None }
    }
}

impl FluxSpec {
    pub fn eval(&self, outer_radius: f64, x: [f64; 2], n: [f64; 2]) -> [f64; 2] {
        let a = self.magnitude;
        match self.preset {
            FluxPreset::RigidRotation => [-a * x[1] / outer_radius, a * x[0] / outer_radius],
            FluxPreset::Radial => [a * n[0], a * n[1]],
            FluxPreset::Custom => {
                let v = periodic_linear(&self.nodal, x[1].atan2(x[0]));
                [a * v[0], a * v[1]]
            }
        }
    }
}

/// κ(t, x) = h + ω(t) ρ(x) with ρ = cos θ and ω(t) = e^{−rate·t}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaPreset {
    Exponential { h: f64, rate: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub solver: f64,
    pub eigen: f64,
    pub carleman: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { solver: 1e-10, eigen: 1e-9, carleman: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Stationary solution plus the first eigenfield.
    FirstMode,
    Zero,
    Stationary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub dt: f64,
    pub horizon: f64,
    pub samples: usize,
    pub initial: InitialState,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { dt: 0.01, horizon: 3.0, samples: 41, initial: InitialState::FirstMode }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSuite {
    Full,
    Constants,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlemanGrid {
    pub lambdas: Vec<f64>,
    pub s_values: Vec<f64>,
    pub suite: FieldSuite,
}

impl Default for CarlemanGrid {
    fn default() -> Self {
        CarlemanGrid { lambdas: vec![2.0, 4.0], s_values: vec![1.0, 2.0, 4.0, 8.0], suite: FieldSuite::Full }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Stationary,
    Evolution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverseSweep {
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub m: f64,
    /// Robin coefficient of the unknown configuration; the reference is `robin`.
    pub q_true: RobinSpec,
    pub max_frequency: usize,
    pub mode: SweepMode,
}

impl Default for InverseSweep {
    fn default() -> Self {
        InverseSweep {
            noise_levels: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            trials: 10,
            seed: 7,
            m: 0.3,
            q_true: RobinSpec::Patch { base: 2.0, amplitude: 0.8, center: 0.0, half_width: 0.6 },
            max_frequency: 24,
            mode: SweepMode::Stationary,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.spec().validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        self.robin.validate(self.alpha)?;
        if self.flux.preset == FluxPreset::Custom && self.flux.nodal.is_empty() {
            return bad("flux: the custom preset needs nodal values");
        }
        let t = &self.tolerances;
        if !(t.solver > 0.0 && t.eigen > 0.0 && t.carleman > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.eigen_count == 0 {
            return bad("eigen_count must be at least 1");
        }
        if !(self.time.dt > 0.0 && self.time.horizon >= self.time.dt) {
            return bad("time grid needs dt > 0 and horizon >= dt");
        }
        if self.time.samples < 2 {
            return bad("time grid needs at least 2 samples");
        }
        let c = &self.carleman;
        if c.lambdas.iter().any(|&l| !(l >= 2.0)) || c.s_values.iter().any(|&s| !(s > 0.0)) {
            return bad("carleman grid needs lambda >= 2 and s > 0");
        }
        let inv = &self.inverse;
        if inv.noise_levels.is_empty() {
            return bad("inverse: noise_levels must not be empty");
        }
        if inv.noise_levels.iter().any(|&e| !(e > 0.0)) {
            return bad("inverse: noise levels must be positive");
        }
        if inv.trials == 0 || !(inv.m > 0.0) || inv.max_frequency == 0 {
            return bad("inverse: trials, m and max_frequency must be positive");
        }
        inv.q_true.validate(self.alpha)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let canon = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

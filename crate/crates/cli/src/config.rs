use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wnt_core::finsler::{rotated_metric_2d, rotated_metric_3d, AnisotropyField, ScalarProfile, WntStructure};
use wnt_core::grid::GridDomain;
use wnt_core::linalg::Matrix;
use wnt_core::thermal::HeatModel;

/// A configuration problem, located by its dotted field path.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    DualityCheck,
    Dirichlet,
    GreenAsymptotics,
    GlRelax,
    LogExpansion,
    Vortex2dFlow,
    Filament3dFlow,
    ThermalCoupled,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::DualityCheck,
        Experiment::Dirichlet,
        Experiment::GreenAsymptotics,
        Experiment::GlRelax,
        Experiment::LogExpansion,
        Experiment::Vortex2dFlow,
        Experiment::Filament3dFlow,
        Experiment::ThermalCoupled,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::DualityCheck => "duality_check",
            Experiment::Dirichlet => "dirichlet",
            Experiment::GreenAsymptotics => "green_asymptotics",
            Experiment::GlRelax => "gl_relax",
            Experiment::LogExpansion => "log_expansion",
            Experiment::Vortex2dFlow => "vortex2d_flow",
            Experiment::Filament3dFlow => "filament3d_flow",
            Experiment::ThermalCoupled => "thermal_coupled",
        }
    }

    /// Dimensions the experiment runs in.
    fn dims(&self) -> &'static [usize] {
        match self {
            Experiment::DualityCheck | Experiment::Dirichlet | Experiment::GreenAsymptotics => &[2, 3],
            Experiment::Filament3dFlow => &[3],
            _ => &[2],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Either the diagonal of a matrix or a rotation angle (about the z axis in 3D)
/// with eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MetricSpec {
    Diag { diag: Vec<f64> },
    Rotated { angle: f64, eigenvalues: Vec<f64> },
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::Diag { diag: Vec::new() }
    }
}

impl MetricSpec {
    fn entries(&self) -> &[f64] {
        match self {
            MetricSpec::Diag { diag } => diag,
            MetricSpec::Rotated { eigenvalues, .. } => eigenvalues,
        }
    }

    /// Empty diagonal means the identity.
    fn is_identity(&self) -> bool {
        self.entries().iter().all(|&v| v == 1.0)
    }

    fn isotropic_scale(&self) -> Option<f64> {
        let e = self.entries();
        match e.first() {
            None => Some(1.0),
            Some(&v) if e.iter().all(|&w| w == v) => Some(v),
            _ => None,
        }
    }

    fn validate(&self, field: &str, dim: usize) -> Result<(), ConfigError> {
        let (name, e) = match self {
            MetricSpec::Diag { diag } => ("diag", diag),
            MetricSpec::Rotated { angle, eigenvalues } => {
                if !angle.is_finite() {
                    return Err(ConfigError::new(format!("{field}.angle"), "must be finite"));
                }
                ("eigenvalues", eigenvalues)
            }
        };
        if e.is_empty() && name == "diag" {
            return Ok(());
        }
        if e.len() != dim {
            return Err(ConfigError::new(
                format!("{field}.{name}"),
                format!("needs {dim} entries for a {dim}D domain, got {}", e.len()),
            ));
        }
        if let Some(v) = e.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(ConfigError::new(format!("{field}.{name}"), format!("entries must be positive and finite, got {v}")));
        }
        Ok(())
    }

    fn matrix<const D: usize>(&self) -> Matrix<D> {
        let mut m = [[0.0; D]; D];
        match self {
            MetricSpec::Diag { diag } => {
                for (k, row) in m.iter_mut().enumerate() {
                    row[k] = diag.get(k).copied().unwrap_or(1.0);
                }
            }
            MetricSpec::Rotated { angle, eigenvalues } => {
                let r = if D == 2 {
                    flatten(&rotated_metric_2d(*angle, [eigenvalues[0], eigenvalues[1]]))
                } else {
                    flatten(&rotated_metric_3d(*angle, [eigenvalues[0], eigenvalues[1], eigenvalues[2]]))
                };
                for i in 0..D {
                    for j in 0..D {
                        m[i][j] = r[i * D + j];
                    }
                }
            }
        }
        m
    }
}

fn flatten<const D: usize>(m: &Matrix<D>) -> Vec<f64> {
    m.iter().flat_map(|r| r.iter().copied()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropyConfig {
    #[default]
    Euclidean,
    DoublePhase {
        #[serde(default)]
        g: MetricSpec,
        #[serde(default)]
        h: MetricSpec,
        a: ScalarProfile,
        #[serde(default = "one")]
        eta: f64,
        #[serde(default)]
        a_bounds: Option<[f64; 2]>,
    },
}

impl AnisotropyConfig {
    pub fn is_euclidean(&self) -> bool {
        match self {
            AnisotropyConfig::Euclidean => true,
            AnisotropyConfig::DoublePhase { g, a, .. } => g.is_identity() && a.is_identically_zero(),
        }
    }

    /// `(a, η, c)` when `g = I`, `h = c·I` and `a` is constant.
    pub fn isotropic_constant(&self) -> Option<(f64, f64, f64)> {
        match self {
            AnisotropyConfig::Euclidean => Some((0.0, 1.0, 1.0)),
            AnisotropyConfig::DoublePhase { g, h, a, eta, .. } => match (g.is_identity(), h.isotropic_scale(), a) {
                (true, Some(c), ScalarProfile::Constant { value }) => Some((*value, *eta, c)),
                _ => None,
            },
        }
    }

    fn validate(&self, dim: usize) -> Result<(), ConfigError> {
        if let AnisotropyConfig::DoublePhase { g, h, a, eta, a_bounds } = self {
            g.validate("anisotropy.g", dim)?;
            h.validate("anisotropy.h", dim)?;
            if !(*eta > 0.0 && *eta <= 1.0) {
                return Err(ConfigError::new("anisotropy.eta", format!("must lie in (0, 1], got {eta}")));
            }
            let vec_len = match a {
                ScalarProfile::Affine { gradient, .. } => Some(("gradient", gradient.len())),
                ScalarProfile::Sinusoidal { wavevector, .. } => Some(("wavevector", wavevector.len())),
                ScalarProfile::Constant { .. } => None,
            };
            if let Some((name, n)) = vec_len {
                if n != dim {
                    return Err(ConfigError::new(format!("anisotropy.a.{name}"), format!("needs {dim} entries, got {n}")));
                }
            }
            if let Some(b) = a_bounds {
                if !(b[0] >= 0.0 && b[0] <= b[1] && b[1].is_finite()) {
                    return Err(ConfigError::new("anisotropy.a_bounds", format!("need 0 <= a1 <= a2 < inf, got {b:?}")));
                }
            }
            if let Some((lo, _)) = a.intrinsic_bounds() {
                if lo < 0.0 {
                    return Err(ConfigError::new("anisotropy.a", format!("weight must be nonnegative, minimum is {lo}")));
                }
            } else if a_bounds.is_none() {
                return Err(ConfigError::new("anisotropy.a_bounds", "an affine weight needs declared bounds"));
            }
            let built = if dim == 3 { self.field::<3>().map(|_| ()) } else { self.field::<2>().map(|_| ()) };
            built.map_err(|e| ConfigError::new("anisotropy", e.to_string()))?;
        }
        Ok(())
    }

    pub fn field<const D: usize>(&self) -> wnt_core::Result<AnisotropyField<D>> {
        match self {
            AnisotropyConfig::Euclidean => Ok(AnisotropyField::euclidean()),
            AnisotropyConfig::DoublePhase { g, h, a, eta, a_bounds } => AnisotropyField::new(
                g.matrix::<D>(),
                h.matrix::<D>(),
                a.clone(),
                *eta,
                a_bounds.map(|b| (b[0], b[1])),
            ),
        }
    }

    pub fn structure<const D: usize>(&self) -> wnt_core::Result<WntStructure<D>> {
        Ok(WntStructure::new(self.field::<D>()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "two")]
    pub dim: usize,
    /// Side length of the cube `[0, extent]^dim`.
    #[serde(default = "one")]
    pub extent: f64,
    /// Cells per axis.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            extent: 1.0,
            resolution: default_resolution(),
        }
    }
}

impl DomainConfig {
    pub fn grid<const D: usize>(&self) -> wnt_core::Result<GridDomain<D>> {
        GridDomain::new([self.extent; D], [self.resolution; D])
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.resolution as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Absolute time step.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Time step as a fraction of the stability bound, used when `dt` is unset.
    #[serde(default)]
    pub dt_fraction: Option<f64>,
    /// Shrink steps to the current stability bound as the geometry changes.
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Stop once this time is reached (the step budget still applies).
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Also run at half the step and report the ratio of the dissipation mismatches.
    #[serde(default)]
    pub halving_check: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            dt: None,
            dt_fraction: None,
            adaptive: false,
            steps: default_steps(),
            t_end: None,
            snapshot_stride: 0,
            halving_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "one")]
    pub kappa_th: f64,
    #[serde(default = "one")]
    pub mobility: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_eps_reg")]
    pub eps_reg: f64,
    #[serde(default)]
    pub rho_cut: Option<f64>,
    /// Core energy per unit degree squared in the point-vortex energy.
    #[serde(default)]
    pub gamma: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            kappa_th: 1.0,
            mobility: 1.0,
            eps: None,
            eps_list: Vec::new(),
            eps_reg: default_eps_reg(),
            rho_cut: None,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Points for the Fenchel-Young and round-trip checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Pairs for the monotonicity check.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Covectors compared against the brute-force conjugate.
    #[serde(default = "default_oracle_points")]
    pub oracle_points: usize,
    /// Oracle grid points per axis.
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
    /// Sampled tangent vectors lie in `[-y_max, y_max]^dim`.
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    /// Node pairs for the reciprocity check.
    #[serde(default = "default_reciprocity_pairs")]
    pub reciprocity_pairs: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            pairs: default_pairs(),
            oracle_points: default_oracle_points(),
            oracle_samples: default_oracle_samples(),
            y_max: default_y_max(),
            reciprocity_pairs: default_reciprocity_pairs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    #[serde(default = "unit_source")]
    pub source: ScalarProfile,
    #[serde(default = "zero_profile")]
    pub boundary: ScalarProfile,
    /// Number of independent random initial guesses.
    #[serde(default = "one_usize")]
    pub initializations: usize,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self {
            source: unit_source(),
            boundary: zero_profile(),
            initializations: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    #[serde(default)]
    pub model: HeatModel,
    #[serde(default = "default_resolve_every")]
    pub resolve_every: usize,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            model: HeatModel::default(),
            resolve_every: default_resolve_every(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub center: [f64; 2],
    pub degree: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilamentSpec {
    /// Counter-clockwise circle in the plane `z = center[2]`.
    Circle {
        center: [f64; 3],
        radius: f64,
        vertices: usize,
        #[serde(default = "one_i32")]
        degree: i32,
    },
    /// Open segment with pinned ends.
    Straight {
        start: [f64; 3],
        end: [f64; 3],
        vertices: usize,
        #[serde(default = "one_i32")]
        degree: i32,
    },
    Polyline {
        points: Vec<[f64; 3]>,
        closed: bool,
        #[serde(default = "one_i32")]
        degree: i32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    /// Label used for the output subdirectory; defaults to the experiment name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub anisotropy: AnisotropyConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub dirichlet: DirichletConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub vortices: Vec<VortexSpec>,
    #[serde(default)]
    pub filaments: Vec<FilamentSpec>,
    /// Output directory, relative to the output root unless absolute.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn one_usize() -> usize {
    1
}
fn one_i32() -> i32 {
    1
}
fn default_resolution() -> usize {
    64
}
fn default_steps() -> usize {
    100
}
fn default_eps_reg() -> f64 {
    0.01
}
fn default_samples() -> usize {
    1000
}
fn default_pairs() -> usize {
    10_000
}
fn default_oracle_points() -> usize {
    10
}
fn default_oracle_samples() -> usize {
    401
}
fn default_y_max() -> f64 {
    10.0
}
fn default_reciprocity_pairs() -> usize {
    4
}
fn default_resolve_every() -> usize {
    10
}
fn unit_source() -> ScalarProfile {
    ScalarProfile::constant(1.0)
}
fn zero_profile() -> ScalarProfile {
    ScalarProfile::constant(0.0)
}

/// Failure to obtain a usable configuration.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: ConfigError },
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be nonnegative and finite, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parses JSON; type errors are reported with the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let field = if field == "." { "(root)".to_string() } else { field };
            ConfigError::new(field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| LoadError::Invalid {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.to_string())
    }

    pub fn total_degree_abs(&self) -> i32 {
        self.vortices.iter().map(|v| v.degree.abs()).sum()
    }

    /// Range checks on every field the experiment reads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(ConfigError::new("name", format!("must be a plain directory name, got {name:?}")));
            }
        }
        let d = &self.domain;
        if !self.experiment.dims().contains(&d.dim) {
            return Err(ConfigError::new(
                "domain.dim",
                format!("{} runs in {:?} dimensions, got {}", self.experiment, self.experiment.dims(), d.dim),
            ));
        }
        positive("domain.extent", d.extent)?;
        if self.experiment != Experiment::DualityCheck && self.experiment != Experiment::Filament3dFlow {
            let max = if d.dim == 3 { 256 } else { 2048 };
            if d.resolution < 4 || d.resolution > max {
                return Err(ConfigError::new("domain.resolution", format!("must lie in [4, {max}], got {}", d.resolution)));
            }
        }
        self.anisotropy.validate(d.dim)?;
        if let Some(t) = self.solver.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(ConfigError::new("solver.tol", format!("must lie in (0, 1), got {t}")));
            }
        }
        if self.solver.max_iter == Some(0) {
            return Err(ConfigError::new("solver.max_iter", "must be at least 1"));
        }
        let s = &self.schedule;
        if let Some(dt) = s.dt {
            positive("schedule.dt", dt)?;
        }
        if let Some(f) = s.dt_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ConfigError::new("schedule.dt_fraction", format!("must lie in (0, 1], got {f}")));
            }
        }
        if let Some(t) = s.t_end {
            positive("schedule.t_end", t)?;
        }
        let p = &self.physics;
        nonnegative("physics.sigma", p.sigma)?;
        positive("physics.kappa_th", p.kappa_th)?;
        positive("physics.mobility", p.mobility)?;
        positive("physics.eps_reg", p.eps_reg)?;
        nonnegative("physics.gamma", p.gamma)?;
        if let Some(eps) = p.eps {
            positive("physics.eps", eps)?;
        }
        for (i, &eps) in p.eps_list.iter().enumerate() {
            positive(&format!("physics.eps_list[{i}]"), eps)?;
        }
        if let Some(r) = p.rho_cut {
            positive("physics.rho_cut", r)?;
        }
        for (i, v) in self.vortices.iter().enumerate() {
            for (k, c) in v.center.iter().enumerate() {
                if !(c.is_finite() && *c > 0.0 && *c < d.extent) {
                    return Err(ConfigError::new(
                        format!("vortices[{i}].center[{k}]"),
                        format!("must lie strictly inside (0, {}), got {c}", d.extent),
                    ));
                }
            }
            if v.degree == 0 {
                return Err(ConfigError::new(format!("vortices[{i}].degree"), "must be nonzero"));
            }
        }
        for (i, f) in self.filaments.iter().enumerate() {
            let field = format!("filaments[{i}]");
            match f {
                FilamentSpec::Circle { radius, vertices, degree, .. } => {
                    positive(&format!("{field}.radius"), *radius)?;
                    if *vertices < 8 {
                        return Err(ConfigError::new(format!("{field}.vertices"), format!("need at least 8, got {vertices}")));
                    }
                    nonzero_degree(&field, *degree)?;
                }
                FilamentSpec::Straight { vertices, degree, .. } => {
                    if *vertices < 3 {
                        return Err(ConfigError::new(format!("{field}.vertices"), format!("need at least 3, got {vertices}")));
                    }
                    nonzero_degree(&field, *degree)?;
                }
                FilamentSpec::Polyline { points, degree, .. } => {
                    if points.len() < 3 {
                        return Err(ConfigError::new(format!("{field}.points"), "need at least 3 points"));
                    }
                    nonzero_degree(&field, *degree)?;
                }
            }
        }
        let sm = &self.sampling;
        if sm.oracle_samples < 3 {
            return Err(ConfigError::new("sampling.oracle_samples", "need at least 3 per axis"));
        }
        positive("sampling.y_max", sm.y_max)?;
        if self.dirichlet.initializations == 0 {
            return Err(ConfigError::new("dirichlet.initializations", "must be at least 1"));
        }
        if self.thermal.resolve_every == 0 {
            return Err(ConfigError::new("thermal.resolve_every", "must be at least 1"));
        }
        self.validate_requirements()
    }

    /// Fields that particular experiments cannot do without.
    fn validate_requirements(&self) -> Result<(), ConfigError> {
        let needs_eps = matches!(self.experiment, Experiment::GlRelax | Experiment::ThermalCoupled);
        if needs_eps && self.physics.eps.is_none() {
            return Err(ConfigError::new("physics.eps", format!("required by {}", self.experiment)));
        }
        match self.experiment {
            Experiment::LogExpansion if self.physics.eps_list.len() < 3 => Err(ConfigError::new(
                "physics.eps_list",
                format!("needs at least 3 values, got {}", self.physics.eps_list.len()),
            )),
            Experiment::Vortex2dFlow if self.vortices.is_empty() => {
                Err(ConfigError::new("vortices", "vortex2d_flow needs at least one vortex"))
            }
            Experiment::Vortex2dFlow if self.schedule.dt.is_none() => {
                Err(ConfigError::new("schedule.dt", "required by vortex2d_flow"))
            }
            Experiment::Filament3dFlow if self.filaments.is_empty() => {
                Err(ConfigError::new("filaments", "filament3d_flow needs at least one filament"))
            }
            _ => Ok(()),
        }
    }
}

fn nonzero_degree(field: &str, degree: i32) -> Result<(), ConfigError> {
    if degree == 0 {
        Err(ConfigError::new(format!("{field}.degree"), "must be nonzero"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ScenarioConfig::from_json(r#"{"experiment": "duality_check"}"#).unwrap();
        assert_eq!(cfg.anisotropy, AnisotropyConfig::Euclidean);
        assert_eq!(cfg.sampling.samples, 1000);
        assert_eq!(cfg.name(), "duality_check");
    }

    #[test]
    fn negative_eps_names_the_field() {
        let err = ScenarioConfig::from_json(r#"{"experiment": "gl_relax", "physics": {"eps": -0.1}}"#).unwrap_err();
        assert_eq!(err.field, "physics.eps");
    }

    #[test]
    fn type_errors_carry_the_path() {
        let err = ScenarioConfig::from_json(r#"{"experiment": "dirichlet", "domain": {"resolution": "many"}}"#).unwrap_err();
        assert_eq!(err.field, "domain.resolution");
        let err = ScenarioConfig::from_json(r#"{"experiment": "dirichlet", "domian": {}}"#).unwrap_err();
        assert!(err.message.contains("domian"), "{err}");
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = ScenarioConfig::from_json(r#"{"experiment": "warp_drive"}"#).unwrap_err();
        assert_eq!(err.field, "experiment");
    }

    #[test]
    fn double_phase_preset_builds() {
        let cfg = ScenarioConfig::from_json(
            r#"{"experiment": "duality_check",
                "anisotropy": {"preset": "double_phase", "g": {"angle": 0.3, "eigenvalues": [1, 2]},
                               "a": {"kind": "sinusoidal", "mean": 1, "amplitude": 0.5, "wavevector": [1, 2]},
                               "eta": 0.5}}"#,
        )
        .unwrap();
        let an = cfg.anisotropy.field::<2>().unwrap();
        assert_eq!(an.a_bounds(), (0.5, 1.5));
        assert!(!cfg.anisotropy.is_euclidean());
    }

    #[test]
    fn wrong_metric_length_is_rejected() {
        let err = ScenarioConfig::from_json(
            r#"{"experiment": "duality_check", "domain": {"dim": 3},
                "anisotropy": {"preset": "double_phase", "g": {"diag": [1, 2]}, "a": {"kind": "constant", "value": 1}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.field, "anisotropy.g.diag");
    }

    #[test]
    fn experiment_specific_requirements() {
        let err = ScenarioConfig::from_json(r#"{"experiment": "log_expansion", "physics": {"eps_list": [0.1, 0.05]}}"#)
            .unwrap_err();
        assert_eq!(err.field, "physics.eps_list");
        let err = ScenarioConfig::from_json(r#"{"experiment": "filament3d_flow", "domain": {"dim": 2}}"#).unwrap_err();
        assert_eq!(err.field, "domain.dim");
    }
}

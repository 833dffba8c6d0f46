//! Problem configuration: TOML in, validated core types out.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use renorm_core::maps::{BOUNDARY_TOLERANCE, COINCIDENCE_TOLERANCE, DEFAULT_DEGREE_CAP};
use renorm_core::minimize::DEFAULT_MARGIN;
use renorm_core::{
    build_polar_grid, BoundarySignal, Complex64, GreenKernel, OptimizerSettings, PhaseTerm, PolarGrid, SingularMap,
    SmoothPhase, TorusMap, TrigTerm, Vortex, VortexConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ConfigError};

pub const DEFAULT_RESOLUTION: Resolution = Resolution { n_radial: 128, n_theta: 256 };
pub const DEFAULT_TORUS_RESOLUTION: usize = 256;
pub const DEFAULT_SWEEP_STEPS: usize = 8;
pub const DEFAULT_FLUX_LEVELS: usize = 10;

/// Radial by angular node counts, written `NrxNt` (for example `128x256`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub n_radial: usize,
    pub n_theta: usize,
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, t) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NrxNt such as 128x256, got {s:?}"))?;
        let parse =
            |v: &str| v.trim().parse::<usize>().map_err(|_| format!("expected NrxNt such as 128x256, got {s:?}"));
        let res = Resolution { n_radial: parse(r)?, n_theta: parse(t)? };
        if res.n_radial < 2 || res.n_theta < 8 {
            return Err(format!("resolution {s} is too coarse (need at least 2x8)"));
        }
        Ok(res)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_radial, self.n_theta)
    }
}

impl Serialize for Resolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Disk,
    Torus,
    Plane,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Disk => "disk",
            Domain::Torus => "torus",
            Domain::Plane => "plane",
        })
    }
}

/// Named problems that fill in whatever the config leaves empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `z/|z|` on the disk.
    SingleVortex,
    /// Charges +1 at 0.3 and -1 at -0.3.
    BlaschkePair,
    /// `e^{i|z|^2}`, no vortices.
    QuadraticPhase,
    /// `(z - 0.3)/(z + 0.3)` on the plane truncated at radius 20.
    PlaneBlaschke,
    /// `e^{2 pi i x}` on the torus.
    TorusWinding,
    /// Charges +1 at (1/4, 1/2) and -1 at (3/4, 1/2) on the torus.
    TorusDipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPreset {
    /// `e^{i theta}`
    Identity,
    /// `e^{2 i theta}`
    Double,
    /// `e^{i(theta + 0.3 sin 2 theta)}`
    Wobble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub position: [f64; 2],
    pub charge: i32,
}

/// Monomial `coefficient * x^mx * y^ny` of the smooth phase on the disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub coefficient: f64,
    #[serde(default)]
    pub mx: u32,
    #[serde(default)]
    pub ny: u32,
}

/// `cos * cos(k theta) + sin * sin(k theta)` in the boundary lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Boundary datum `g0 = e^{i lambda}` with `lambda = degree * theta + sum of modes`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<BoundaryPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub radius: f64,
    pub zeros: Vec<[f64; 2]>,
    pub poles: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSpec {
    Theta,
    Fourier,
}

/// `cos * cos(2 pi k.x) + sin * sin(2 pi k.x)` in the torus phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSpec {
    pub k: [i32; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    #[serde(default)]
    pub winding: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TrigSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelFluxSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub index: usize,
    pub limit: [f64; 2],
    /// Explicit path; when empty the moving vortex halves its distance to
    /// the limit `steps` times.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub path: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: Resolution,
    /// Distance kept between searched vortices and the circle.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vortices: Vec<VortexSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phase: Vec<PhaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimize: Option<MinimizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_flux: Option<LevelFluxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extend: Option<ExtendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_resolution() -> Resolution {
    DEFAULT_RESOLUTION
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            domain: None,
            preset: None,
            seed: 0,
            resolution: DEFAULT_RESOLUTION,
            margin: DEFAULT_MARGIN,
            vortices: Vec::new(),
            phase: Vec::new(),
            boundary: None,
            plane: None,
            torus: None,
            minimize: None,
            level_flux: None,
            extend: None,
            sweep: None,
        }
    }
}

/// Parses and validates a TOML config.
///
/// Presets are expanded and every default is filled in, so the result
/// serializes back ([`emit_config`]) to a config that parses to itself.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    parse_raw(text)?.resolve()
}

/// Parses without expanding presets, filling defaults or validating, so
/// command-line overrides can be applied before [`ProblemConfig::resolve`].
pub fn parse_raw(text: &str) -> Result<ProblemConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::syntax(e.message(), e.span(), text))
}

/// Canonical TOML form of a resolved config.
pub fn emit_config(config: &ProblemConfig) -> String {
    toml::to_string(config).expect("configs serialize to TOML")
}

/// Unresolved config with only a preset set, as used by `--preset`.
pub fn preset_config(preset: Preset) -> ProblemConfig {
    ProblemConfig { preset: Some(preset), ..ProblemConfig::default() }
}

impl ProblemConfig {
    /// Expands presets, fills defaults and validates every field.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        if let Some(preset) = self.preset.take() {
            self.apply_preset(preset)?;
        }
        self.domain.get_or_insert(Domain::Disk);
        if let Some(b) = &mut self.boundary {
            if let Some(preset) = b.preset.take() {
                if b.degree.is_some() || !b.modes.is_empty() {
                    return Err(ConfigError::field(
                        "boundary.preset",
                        "cannot be combined with boundary.degree or boundary.modes",
                    ));
                }
                let (degree, modes) = match preset {
                    BoundaryPreset::Identity => (1, vec![]),
                    BoundaryPreset::Double => (2, vec![]),
                    BoundaryPreset::Wobble => (1, vec![ModeSpec { k: 2, cos: 0.0, sin: 0.3 }]),
                };
                b.degree = Some(degree);
                b.modes = modes;
            }
            b.degree.get_or_insert(0);
            b.samples.get_or_insert(self.resolution.n_theta);
        }
        if let Some(t) = &mut self.torus {
            t.kernel.get_or_insert(KernelSpec::Theta);
            t.resolution.get_or_insert(DEFAULT_TORUS_RESOLUTION);
            if t.kernel == Some(KernelSpec::Fourier) {
                t.cutoff.get_or_insert(renorm_core::torus::DEFAULT_FOURIER_CUTOFF);
            }
        }
        if let Some(m) = &mut self.minimize {
            let d = OptimizerSettings::default();
            m.starts.get_or_insert(d.starts);
            m.max_evaluations.get_or_insert(d.max_evaluations);
            m.restarts.get_or_insert(d.restarts);
            m.initial_step.get_or_insert(d.initial_step);
            m.tolerance.get_or_insert(d.tolerance);
        }
        if let Some(s) = &mut self.sweep {
            if s.path.is_empty() {
                s.steps.get_or_insert(DEFAULT_SWEEP_STEPS);
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn apply_preset(&mut self, preset: Preset) -> Result<(), ConfigError> {
        let domain = match preset {
            Preset::SingleVortex | Preset::BlaschkePair | Preset::QuadraticPhase => Domain::Disk,
            Preset::PlaneBlaschke => Domain::Plane,
            Preset::TorusWinding | Preset::TorusDipole => Domain::Torus,
        };
        if self.domain.is_some_and(|d| d != domain) {
            return Err(ConfigError::field("preset", format!("preset {preset:?} lives on the {domain} domain")));
        }
        self.domain = Some(domain);
        let fill_vortices = |v: &mut Vec<VortexSpec>, list: &[([f64; 2], i32)]| {
            if v.is_empty() {
                *v = list.iter().map(|&(position, charge)| VortexSpec { position, charge }).collect();
            }
        };
        match preset {
            Preset::SingleVortex => fill_vortices(&mut self.vortices, &[([0.0, 0.0], 1)]),
            Preset::BlaschkePair => fill_vortices(&mut self.vortices, &[([0.3, 0.0], 1), ([-0.3, 0.0], -1)]),
            Preset::QuadraticPhase => {
                if self.phase.is_empty() {
                    self.phase = vec![
                        PhaseSpec { coefficient: 1.0, mx: 2, ny: 0 },
                        PhaseSpec { coefficient: 1.0, mx: 0, ny: 2 },
                    ];
                }
            }
            Preset::PlaneBlaschke => {
                self.plane.get_or_insert(PlaneSpec { radius: 20.0, zeros: vec![[0.3, 0.0]], poles: vec![[-0.3, 0.0]] });
            }
            Preset::TorusWinding => {
                self.torus.get_or_insert(TorusSpec { winding: [1, 0], ..TorusSpec::default() });
            }
            Preset::TorusDipole => {
                fill_vortices(&mut self.vortices, &[([0.25, 0.5], 1), ([0.75, 0.5], -1)]);
                self.torus.get_or_insert_with(TorusSpec::default);
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain.unwrap_or(Domain::Disk)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError::field(
                "seed",
                format!("must be at most {} (TOML integers are signed 64-bit)", i64::MAX),
            ));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(ConfigError::field("margin", "must lie in (0, 0.5)"));
        }
        let domain = self.domain();
        for (i, v) in self.vortices.iter().enumerate() {
            let path = |f: &str| format!("vortices[{i}].{f}");
            if v.charge == 0 {
                return Err(ConfigError::field(path("charge"), "charge must be a nonzero integer"));
            }
            let p = Complex64::new(v.position[0], v.position[1]);
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(ConfigError::field(path("position"), "must be finite"));
            }
            if domain == Domain::Disk {
                if p.norm() > 1.0 + BOUNDARY_TOLERANCE {
                    return Err(ConfigError::field(path("position"), "lies outside the closed unit disk"));
                }
                if (1.0 - p.norm()).abs() <= BOUNDARY_TOLERANCE && v.charge % 2 != 0 {
                    return Err(ConfigError::field(
                        path("charge"),
                        format!(
                            "a vortex on the boundary must carry an even charge d (it becomes a singularity of degree 2d of the reflected map), got {}",
                            v.charge
                        ),
                    ));
                }
            }
            for (j, w) in self.vortices[..i].iter().enumerate() {
                let q = Complex64::new(w.position[0], w.position[1]);
                if (p - q).norm() <= COINCIDENCE_TOLERANCE {
                    return Err(ConfigError::field(path("position"), format!("coincides with vortices[{j}]")));
                }
            }
        }
        for (i, t) in self.phase.iter().enumerate() {
            if !t.coefficient.is_finite() {
                return Err(ConfigError::field(format!("phase[{i}].coefficient"), "must be finite"));
            }
            if t.mx + t.ny > DEFAULT_DEGREE_CAP {
                return Err(ConfigError::field(
                    format!("phase[{i}]"),
                    format!("degree exceeds the cap {DEFAULT_DEGREE_CAP}"),
                ));
            }
        }
        if let Some(b) = &self.boundary {
            if b.samples.is_some_and(|n| n < 8) {
                return Err(ConfigError::field("boundary.samples", "need at least 8 samples"));
            }
            for (i, m) in b.modes.iter().enumerate() {
                if m.k == 0 {
                    return Err(ConfigError::field(format!("boundary.modes[{i}].k"), "must be positive"));
                }
                if !(m.cos.is_finite() && m.sin.is_finite()) {
                    return Err(ConfigError::field(format!("boundary.modes[{i}]"), "coefficients must be finite"));
                }
            }
        }
        if let Some(p) = &self.plane {
            if !(p.radius.is_finite() && p.radius > 0.0) {
                return Err(ConfigError::field("plane.radius", "must be positive"));
            }
            if p.zeros.len() != p.poles.len() {
                return Err(ConfigError::field("plane.poles", "need as many poles as zeros"));
            }
        }
        if domain == Domain::Plane && self.plane.is_none() {
            return Err(ConfigError::field("plane", "the plane domain needs a [plane] table"));
        }
        if domain == Domain::Torus {
            let total: i64 = self.vortices.iter().map(|v| v.charge as i64).sum();
            if total != 0 {
                return Err(ConfigError::field("vortices", format!("torus charges must sum to zero, got {total}")));
            }
        }
        if let Some(t) = &self.torus {
            if t.resolution.is_some_and(|n| n < 8) {
                return Err(ConfigError::field("torus.resolution", "need at least 8 cells per side"));
            }
            if t.cutoff.is_some_and(|k| k == 0) {
                return Err(ConfigError::field("torus.cutoff", "must be positive"));
            }
            for (i, term) in t.terms.iter().enumerate() {
                if term.k == [0, 0] {
                    return Err(ConfigError::field(format!("torus.terms[{i}].k"), "must be a nonzero frequency"));
                }
            }
        }
        if let Some(m) = &self.minimize {
            if let Some(charges) = &m.charges {
                if let Some(i) = charges.iter().position(|&d| d == 0) {
                    return Err(ConfigError::field(
                        format!("minimize.charges[{i}]"),
                        "charge must be a nonzero integer",
                    ));
                }
            }
            if m.starts == Some(0) {
                return Err(ConfigError::field("minimize.starts", "must be at least 1"));
            }
            if m.max_evaluations == Some(0) {
                return Err(ConfigError::field("minimize.max_evaluations", "must be at least 1"));
            }
            if m.initial_step.is_some_and(|s| s.is_nan() || s <= 0.0) {
                return Err(ConfigError::field("minimize.initial_step", "must be positive"));
            }
            if m.tolerance.is_some_and(|s| s.is_nan() || s <= 0.0) {
                return Err(ConfigError::field("minimize.tolerance", "must be positive"));
            }
        }
        if let Some(l) = &self.level_flux {
            if l.levels.iter().any(|x| !x.is_finite()) {
                return Err(ConfigError::field("level_flux.levels", "levels must be finite"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.index >= self.vortices.len() {
                return Err(ConfigError::field("sweep.index", format!("no vortex with index {}", s.index)));
            }
            if Complex64::new(s.limit[0], s.limit[1]).norm() > 1.0 + BOUNDARY_TOLERANCE {
                return Err(ConfigError::field("sweep.limit", "lies outside the closed unit disk"));
            }
            if s.steps == Some(0) {
                return Err(ConfigError::field("sweep.steps", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn require_domain(&self, domain: Domain, command: &str) -> Result<(), CliError> {
        if self.domain() != domain {
            return Err(ConfigError::field(
                "domain",
                format!("`{command}` needs the {domain} domain, config has {}", self.domain()),
            )
            .into());
        }
        Ok(())
    }

    pub fn vortex_config(&self) -> Result<VortexConfig, CliError> {
        Ok(VortexConfig::new(
            self.vortices.iter().map(|v| Vortex::new(v.position[0], v.position[1], v.charge)).collect(),
        )?)
    }

    pub fn disk_map(&self) -> Result<SingularMap, CliError> {
        let terms = self.phase.iter().map(|t| PhaseTerm::new(t.coefficient, t.mx, t.ny)).collect();
        Ok(SingularMap::new(self.vortex_config()?, SmoothPhase::polynomial(terms)?))
    }

    /// Polar grid at the configured resolution, refined at `centers`.
    pub fn grid(&self, centers: &[Complex64]) -> Result<Arc<PolarGrid>, CliError> {
        Ok(Arc::new(build_polar_grid(self.resolution.n_radial, self.resolution.n_theta, centers)?))
    }

    /// The configured boundary datum, or the trace of the configured map.
    pub fn boundary_signal(&self) -> Result<BoundarySignal, CliError> {
        match &self.boundary {
            Some(b) => {
                let degree = b.degree.unwrap_or(0) as f64;
                let n = b.samples.unwrap_or(self.resolution.n_theta);
                Ok(BoundarySignal::sample_unit(n, |theta| {
                    let lambda = degree * theta
                        + b.modes
                            .iter()
                            .map(|m| m.cos * (m.k as f64 * theta).cos() + m.sin * (m.k as f64 * theta).sin())
                            .sum::<f64>();
                    Complex64::from_polar(1.0, lambda)
                })?)
            }
            None => Ok(self.disk_map()?.trace(self.resolution.n_theta)?),
        }
    }

    /// Degree of the configured boundary datum, or the total charge of the map.
    pub fn boundary_degree(&self) -> Result<i64, CliError> {
        match &self.boundary {
            Some(b) => Ok(b.degree.unwrap_or(0)),
            None => Ok(self.vortex_config()?.total_charge()),
        }
    }

    pub fn torus_map(&self) -> Result<TorusMap, CliError> {
        let spec = self.torus.clone().unwrap_or_default();
        let vortices = self.vortices.iter().map(|v| Vortex::new(v.position[0], v.position[1], v.charge)).collect();
        let terms = spec.terms.iter().map(|t| TrigTerm::new((t.k[0], t.k[1]), t.cos, t.sin)).collect();
        Ok(TorusMap::new(vortices, terms, (spec.winding[0], spec.winding[1]))?)
    }

    pub fn torus_kernel(&self) -> GreenKernel {
        match self.torus.as_ref().and_then(|t| t.kernel) {
            Some(KernelSpec::Fourier) => GreenKernel::Fourier {
                cutoff: self
                    .torus
                    .as_ref()
                    .and_then(|t| t.cutoff)
                    .unwrap_or(renorm_core::torus::DEFAULT_FOURIER_CUTOFF),
            },
            _ => GreenKernel::Theta,
        }
    }

    pub fn torus_resolution(&self) -> usize {
        self.torus.as_ref().and_then(|t| t.resolution).unwrap_or(DEFAULT_TORUS_RESOLUTION)
    }

    pub fn optimizer_settings(&self) -> OptimizerSettings {
        let d = OptimizerSettings::default();
        let m = self.minimize.clone().unwrap_or_default();
        OptimizerSettings {
            max_evaluations: m.max_evaluations.unwrap_or(d.max_evaluations),
            initial_step: m.initial_step.unwrap_or(d.initial_step),
            tolerance: m.tolerance.unwrap_or(d.tolerance),
            restarts: m.restarts.unwrap_or(d.restarts),
            starts: m.starts.unwrap_or(d.starts),
            seed: self.seed,
        }
    }

    /// Charges searched by `minimize`: the configured list or the vortex charges.
    pub fn minimize_charges(&self) -> Vec<i32> {
        self.minimize
            .as_ref()
            .and_then(|m| m.charges.clone())
            .unwrap_or_else(|| self.vortices.iter().map(|v| v.charge).collect())
    }

    /// Levels for `level-flux`: configured, or quantiles of the density `2 f`.
    pub fn flux_levels(&self) -> Vec<f64> {
        match &self.level_flux {
            Some(l) if !l.levels.is_empty() => l.levels.clone(),
            _ => (0..DEFAULT_FLUX_LEVELS)
                .map(|j| renorm_core::energy::weight_quantile((j as f64 + 0.5) / DEFAULT_FLUX_LEVELS as f64))
                .collect(),
        }
    }

    /// Path of the moving vortex for `sweep-stability`.
    pub fn sweep_path(&self) -> Result<(usize, Vec<Complex64>, Complex64), CliError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::field("sweep", "`sweep-stability` needs a [sweep] table with a limit"))?;
        let limit = Complex64::new(s.limit[0], s.limit[1]);
        let path = if s.path.is_empty() {
            let v = &self.vortices[s.index];
            let start = Complex64::new(v.position[0], v.position[1]);
            let steps = s.steps.unwrap_or(DEFAULT_SWEEP_STEPS);
            (0..steps).map(|k| limit + (start - limit) * 0.5f64.powi(k as i32)).collect()
        } else {
            s.path.iter().map(|p| Complex64::new(p[0], p[1])).collect()
        };
        Ok((s.index, path, limit))
    }
}

/// Map used by the `selftest` suite and examples: `z/|z|` with `g0 = e^{i theta}`.
pub fn unit_circle_identity(n: usize) -> Result<BoundarySignal, CliError> {
    Ok(BoundarySignal::sample_unit(n, |t| Complex64::from_polar(1.0, t))?)
}

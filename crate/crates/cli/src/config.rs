//! Scenario files.
//!
//! A scenario is a TOML document (`.cfg` by convention) with a `[scenario]`
//! header, a `[run]` table of numerical settings, an optional activity
//! `[grid]` and exactly one solver table. Unknown keys anywhere are errors.
//!
//! Defaults: `run.dt = 0.01`, `run.t_end = 1`, `run.output_interval = dt`,
//! `run.seed = 0`, `run.out = out/<name>`; `grid` spans `[0, 1]` with 51
//! points. Solver tables document their own defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no scenario file or registered scenario named `{0}`")]
    Unknown(String),
}

pub(crate) fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Homogeneous,
    Discrete,
    Spatial,
    Fpb,
}

impl Solver {
    pub fn table(self) -> &'static str {
        match self {
            Self::Homogeneous => "homogeneous",
            Self::Discrete => "discrete",
            Self::Spatial => "spatial",
            Self::Fpb => "fpb",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Header,
    #[serde(default)]
    pub run: RunParams,
    #[serde(default)]
    pub grid: GridParams,
    pub homogeneous: Option<HomogeneousParams>,
    pub discrete: Option<DiscreteParams>,
    pub spatial: Option<SpatialParams>,
    pub fpb: Option<FpbParams>,
    /// Map text of `spatial.arena`, read at load time.
    #[serde(skip)]
    pub arena_text: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub name: String,
    pub solver: Solver,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub dt: f64,
    pub t_end: f64,
    pub output_interval: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 1.0,
            output_interval: None,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
            points: 51,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneousModel {
    TumorImmune,
    Consensus,
    Constant,
}

/// `[homogeneous]`. `conservative = true` drops every birth and death term;
/// `clamp_negative` defaults to true.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousParams {
    pub model: HomogeneousModel,
    #[serde(default)]
    pub conservative: bool,
    #[serde(default = "yes")]
    pub clamp_negative: bool,
    pub tumor_immune: Option<TumorImmuneTable>,
    pub consensus: Option<ConsensusTable>,
    pub constant: Option<ConstantTable>,
    /// One entry per subsystem.
    pub initial: Vec<Profile>,
}

fn yes() -> bool {
    true
}

/// Every field defaults to the library default of the tumor–immune model.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TumorImmuneTable {
    pub encounter_rate: f64,
    pub progression: f64,
    pub activation_ratio: f64,
    pub contact_inhibition: f64,
    pub tumor_proliferation: f64,
    pub tumor_competition: f64,
    pub immune_kill: f64,
    pub tumor_aggression: f64,
    pub immune_proliferation: f64,
    pub immune_relaxation: f64,
    pub innate_activity: f64,
}

impl Default for TumorImmuneTable {
    fn default() -> Self {
        let p = apkin_core::homogeneous::tumor_immune::TumorImmuneParams::default();
        Self {
            encounter_rate: p.encounter_rate,
            progression: p.progression,
            activation_ratio: p.activation_ratio,
            contact_inhibition: p.contact_inhibition,
            tumor_proliferation: p.tumor_proliferation,
            tumor_competition: p.tumor_competition,
            immune_kill: p.immune_kill,
            tumor_aggression: p.tumor_aggression,
            immune_proliferation: p.immune_proliferation,
            immune_relaxation: p.immune_relaxation,
            innate_activity: p.innate_activity,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsensusTable {
    pub rate: f64,
    pub attraction: f64,
    pub concentration: f64,
    pub switching: f64,
}

impl Default for ConsensusTable {
    fn default() -> Self {
        let k = apkin_core::homogeneous::kernels::ConsensusKernels::new(1);
        Self {
            rate: k.rate,
            attraction: k.attraction,
            concentration: k.concentration,
            switching: k.switching,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantTable {
    pub rate: f64,
}

impl Default for ConstantTable {
    fn default() -> Self {
        Self { rate: 1.0 }
    }
}

/// Initial profile of one subsystem with total density `density`: flat, or
/// the bump `exp(-((u - center) / width)^2)` when `center` is given.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub label: String,
    pub density: f64,
    pub center: Option<f64>,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_width() -> f64 {
    0.1
}

/// `[discrete]`: dense tables in row-major order over `(p, q, h, k, i, j)`,
/// see `apkin_core::discrete::DiscreteTables`. The optional tables default
/// to empty (term absent).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteParams {
    pub labels: Vec<String>,
    pub nodes: Vec<f64>,
    pub eta: Vec<f64>,
    pub transition: Vec<f64>,
    #[serde(default)]
    pub macro_rate: Vec<f64>,
    #[serde(default)]
    pub macro_transition: Vec<f64>,
    #[serde(default)]
    pub proliferation: Vec<f64>,
    #[serde(default)]
    pub destruction: Vec<f64>,
    /// `initial[i][j]`, one row per subsystem.
    pub initial: Vec<Vec<f64>>,
}

/// `[spatial]`. `arena` is a map file relative to the scenario file.
/// Defaults: `alpha = 1`, `rho_jam = 6`, `directions = 8`, `eta0 = 1`,
/// `sharpness = 3`, `closed = false`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialParams {
    pub arena: String,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "jam")]
    pub rho_jam: f64,
    #[serde(default = "eight")]
    pub directions: usize,
    #[serde(default = "one")]
    pub eta0: f64,
    #[serde(default = "three")]
    pub sharpness: f64,
    /// Turn every exit into a wall.
    #[serde(default)]
    pub closed: bool,
    pub weights: WeightsSpec,
    pub sensory: SensorySpec,
    pub initial: CrowdInitial,
}

fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn jam() -> f64 {
    apkin_core::spatial::DEFAULT_JAM_DENSITY
}
fn eight() -> usize {
    apkin_core::spatial::DEFAULT_DIRECTIONS
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Adaptive {
        vacuum_gain: f64,
        stream_gain: f64,
    },
    Fixed {
        target: f64,
        vacuum: f64,
        stream: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainModeSpec {
    Metric,
    Topological,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SensorySpec {
    pub theta: f64,
    pub visibility: f64,
    pub critical_count: f64,
    pub mode: DomainModeSpec,
}

/// Uniform density over the walkable cells with `cols[0] <= col <= cols[1]`,
/// spread evenly over directions and activity.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CrowdInitial {
    pub cols: [usize; 2],
    pub density: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Affine { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Uniform,
    TwoPoint,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub law: NoiseKind,
    pub variance: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            law: NoiseKind::Uniform,
            variance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AdmissibilitySpec {
    Resample,
    Skip,
}

/// `[fpb]`. `domain` may use `inf` for a half-line. Defaults:
/// `particles = 10000`, `lambda = 1`, `q = 0`, no noise, `resample`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FpbParams {
    #[serde(default = "particles")]
    pub particles: usize,
    #[serde(default = "one")]
    pub lambda: f64,
    pub p: CoefficientSpec,
    #[serde(default = "zero_coefficient")]
    pub q: CoefficientSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub domain: [f64; 2],
    #[serde(default = "resample")]
    pub admissibility: AdmissibilitySpec,
    /// Initial values are uniform on this interval.
    pub initial: [f64; 2],
}

fn particles() -> usize {
    10_000
}
fn zero_coefficient() -> CoefficientSpec {
    CoefficientSpec::Constant(0.0)
}
fn resample() -> AdmissibilitySpec {
    AdmissibilitySpec::Resample
}

/// Command-line overrides, applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Where a scenario text came from; map files are resolved against it.
#[derive(Debug, Clone)]
pub enum Origin {
    File(PathBuf),
    Builtin(&'static str),
}

impl Origin {
    fn describe(&self) -> String {
        match self {
            Self::File(p) => p.display().to_string(),
            Self::Builtin(name) => format!("<builtin {name}>"),
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates, reading any referenced map.
    pub fn parse(text: &str, origin: &Origin) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.describe(),
            message: e.to_string().trim_end().to_string(),
        })?;
        if let Some(sp) = &cfg.spatial {
            cfg.arena_text = Some(read_map(&sp.arena, origin)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &Origin::File(path.to_path_buf()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(t) = o.t_end {
            self.run.t_end = t;
        }
        if let Some(dt) = o.dt {
            self.run.dt = dt;
        }
        if let Some(out) = &o.out {
            self.run.out = Some(out.clone());
        }
        self.validate()
    }

    pub fn output_interval(&self) -> f64 {
        self.run.output_interval.unwrap_or(self.run.dt)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.run
            .out
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&self.scenario.name))
    }

    /// Checks everything that does not need the solver itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario.name.trim().is_empty() {
            return Err(invalid("scenario.name", "must not be empty"));
        }
        positive("run.dt", self.run.dt)?;
        positive("run.t_end", self.run.t_end)?;
        if let Some(o) = self.run.output_interval {
            positive("run.output_interval", o)?;
        }
        if !(self.grid.lower.is_finite()
            && self.grid.upper.is_finite()
            && self.grid.lower < self.grid.upper)
        {
            return Err(invalid(
                "grid.upper",
                "need finite bounds with lower < upper",
            ));
        }
        if self.grid.points < 2 {
            return Err(invalid("grid.points", "need at least 2 points"));
        }

        let present = [
            (Solver::Homogeneous, self.homogeneous.is_some()),
            (Solver::Discrete, self.discrete.is_some()),
            (Solver::Spatial, self.spatial.is_some()),
            (Solver::Fpb, self.fpb.is_some()),
        ];
        for (solver, here) in present {
            if solver == self.scenario.solver && !here {
                return Err(invalid(
                    solver.table(),
                    format!("missing table for solver {}", solver.table()),
                ));
            }
            if solver != self.scenario.solver && here {
                return Err(invalid(
                    solver.table(),
                    format!("table not used by solver {}", self.scenario.solver.table()),
                ));
            }
        }
        if let Some(h) = &self.homogeneous {
            self.validate_homogeneous(h)?;
        }
        if let Some(d) = &self.discrete {
            validate_discrete(d)?;
        }
        if let Some(s) = &self.spatial {
            validate_spatial(s)?;
        }
        if let Some(f) = &self.fpb {
            validate_fpb(f)?;
        }
        Ok(())
    }

    fn validate_homogeneous(&self, h: &HomogeneousParams) -> Result<(), ConfigError> {
        let used = match h.model {
            HomogeneousModel::TumorImmune => "tumor_immune",
            HomogeneousModel::Consensus => "consensus",
            HomogeneousModel::Constant => "constant",
        };
        for (name, here) in [
            ("tumor_immune", h.tumor_immune.is_some()),
            ("consensus", h.consensus.is_some()),
            ("constant", h.constant.is_some()),
        ] {
            if here && name != used {
                return Err(invalid(
                    &format!("homogeneous.{name}"),
                    format!("table not used by model {used}"),
                ));
            }
        }
        if h.initial.is_empty() {
            return Err(invalid(
                "homogeneous.initial",
                "need one profile per subsystem",
            ));
        }
        if h.model == HomogeneousModel::TumorImmune && h.initial.len() != 2 {
            return Err(invalid(
                "homogeneous.initial",
                "tumor_immune has two subsystems, tumor then immune",
            ));
        }
        for (i, p) in h.initial.iter().enumerate() {
            let key = |f: &str| format!("homogeneous.initial[{i}].{f}");
            if !(p.density >= 0.0 && p.density.is_finite()) {
                return Err(invalid(
                    &key("density"),
                    format!("must be non-negative, got {}", p.density),
                ));
            }
            positive(&key("width"), p.width)?;
            if let Some(c) = p.center {
                if !(c >= self.grid.lower && c <= self.grid.upper) {
                    return Err(invalid(
                        &key("center"),
                        format!("{c} lies outside the grid"),
                    ));
                }
            }
        }
        if let Some(t) = &h.tumor_immune {
            for (name, v) in [
                ("encounter_rate", t.encounter_rate),
                ("progression", t.progression),
                ("activation_ratio", t.activation_ratio),
                ("contact_inhibition", t.contact_inhibition),
                ("tumor_proliferation", t.tumor_proliferation),
                ("tumor_competition", t.tumor_competition),
                ("immune_kill", t.immune_kill),
                ("tumor_aggression", t.tumor_aggression),
                ("immune_proliferation", t.immune_proliferation),
                ("immune_relaxation", t.immune_relaxation),
                ("innate_activity", t.innate_activity),
            ] {
                non_negative(&format!("homogeneous.tumor_immune.{name}"), v)?;
            }
        }
        Ok(())
    }
}

fn validate_discrete(d: &DiscreteParams) -> Result<(), ConfigError> {
    let (n, m) = (d.labels.len(), d.nodes.len());
    if n == 0 {
        return Err(invalid("discrete.labels", "need at least one subsystem"));
    }
    if m == 0 {
        return Err(invalid("discrete.nodes", "need at least one state"));
    }
    let nm = n * m;
    for (key, table, len, optional) in [
        ("eta", &d.eta, nm * nm, false),
        ("transition", &d.transition, nm * nm * nm, false),
        ("macro_rate", &d.macro_rate, nm * n, true),
        ("macro_transition", &d.macro_transition, nm * n * nm, true),
        ("proliferation", &d.proliferation, nm * nm, true),
        ("destruction", &d.destruction, nm * nm, true),
    ] {
        if !(table.len() == len || optional && table.is_empty()) {
            return Err(invalid(
                &format!("discrete.{key}"),
                format!("expected {len} entries, got {}", table.len()),
            ));
        }
    }
    if d.macro_rate.is_empty() != d.macro_transition.is_empty() {
        return Err(invalid(
            "discrete.macro_transition",
            "give both macro tables or neither",
        ));
    }
    if d.initial.len() != n || d.initial.iter().any(|r| r.len() != m) {
        return Err(invalid(
            "discrete.initial",
            format!("expected {n} rows of {m} values"),
        ));
    }
    if d.initial
        .iter()
        .flatten()
        .any(|v| !(*v >= 0.0 && v.is_finite()))
    {
        return Err(invalid("discrete.initial", "values must be non-negative"));
    }
    Ok(())
}

fn validate_spatial(s: &SpatialParams) -> Result<(), ConfigError> {
    positive("spatial.alpha", s.alpha)?;
    positive("spatial.rho_jam", s.rho_jam)?;
    positive("spatial.eta0", s.eta0)?;
    non_negative("spatial.sharpness", s.sharpness)?;
    if s.directions < 3 {
        return Err(invalid("spatial.directions", "need at least 3 directions"));
    }
    non_negative("spatial.initial.density", s.initial.density)?;
    if s.initial.cols[0] > s.initial.cols[1] {
        return Err(invalid(
            "spatial.initial.cols",
            "first column exceeds the last",
        ));
    }
    Ok(())
}

fn validate_fpb(f: &FpbParams) -> Result<(), ConfigError> {
    if f.particles == 0 || !f.particles.is_multiple_of(2) {
        return Err(invalid(
            "fpb.particles",
            format!("must be even and positive, got {}", f.particles),
        ));
    }
    positive("fpb.lambda", f.lambda)?;
    non_negative("fpb.noise.variance", f.noise.variance)?;
    let [lo, hi] = f.domain;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(invalid("fpb.domain", "need lower < upper"));
    }
    let [a, b] = f.initial;
    if !(a.is_finite() && b.is_finite() && a < b && a >= lo && b <= hi) {
        return Err(invalid(
            "fpb.initial",
            "need a finite interval inside the domain",
        ));
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be non-negative, got {v}")))
    }
}

fn read_map(reference: &str, origin: &Origin) -> Result<String, ConfigError> {
    match origin {
        Origin::Builtin(_) => crate::registry::builtin_map(reference)
            .map(str::to_string)
            .ok_or_else(|| invalid("spatial.arena", format!("no builtin map `{reference}`"))),
        Origin::File(path) => {
            let base = path.parent().unwrap_or(Path::new("."));
            let file = base.join(reference);
            if let Ok(text) = fs::read_to_string(&file) {
                return Ok(text);
            }
            // shipped scenarios copied out of the registry still find their map
            crate::registry::builtin_map(reference)
                .map(str::to_string)
                .ok_or_else(|| {
                    invalid(
                        "spatial.arena",
                        format!("{} does not exist", file.display()),
                    )
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "flat"
solver = "homogeneous"

[homogeneous]
model = "constant"
initial = [{ label = "a", density = 1.0 }]
"#;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::parse(text, &Origin::Builtin("test"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.run.dt, 0.01);
        assert_eq!(cfg.run.t_end, 1.0);
        assert_eq!(cfg.output_interval(), 0.01);
        assert_eq!(cfg.grid.points, 51);
        let h = cfg.homogeneous.as_ref().unwrap();
        assert!(h.clamp_negative && !h.conservative);
        assert_eq!(h.initial[0].width, 0.1);
        assert_eq!(cfg.out_dir(), Path::new("out/flat"));
    }

    #[test]
    fn negative_dt_names_the_key() {
        let text = MINIMAL.replace("[homogeneous]", "[run]\ndt = -1.0\n\n[homogeneous]");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("run.dt"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace(
            "model = \"constant\"",
            "model = \"constant\"\nconservatve = true",
        );
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("conservatve"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = MINIMAL.replace("solver = \"homogeneous\"", "solver = ");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn solver_table_must_match() {
        let text = MINIMAL.replace("solver = \"homogeneous\"", "solver = \"fpb\"");
        let err = parse(&text).unwrap_err().to_string();
        assert!(
            err.contains("`fpb`") || err.contains("`homogeneous`"),
            "{err}"
        );
    }

    #[test]
    fn unused_model_table_is_rejected() {
        let text = format!("{MINIMAL}\n[homogeneous.consensus]\nrate = 2.0\n");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("homogeneous.consensus"), "{err}");
    }

    #[test]
    fn overrides_are_validated() {
        let mut cfg = parse(MINIMAL).unwrap();
        cfg.apply(&Overrides {
            seed: Some(7),
            t_end: Some(2.0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((cfg.run.seed, cfg.run.t_end), (7, 2.0));
        let err = cfg
            .apply(&Overrides {
                dt: Some(0.0),
                ..Default::default()
            })
            .unwrap_err();
        assert!(err.to_string().contains("run.dt"));
    }

    #[test]
    fn discrete_table_sizes_are_checked() {
        let text = r#"
[scenario]
name = "d"
solver = "discrete"

[discrete]
labels = ["a"]
nodes = [0.0, 1.0]
eta = [1.0, 1.0, 1.0]
transition = [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]
initial = [[0.5, 0.5]]
"#;
        let err = parse(text).unwrap_err().to_string();
        assert!(
            err.contains("discrete.eta") && err.contains("expected 4"),
            "{err}"
        );
    }
}

//! Experiment specification files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spinmon::haar_model::{CurveOptions, HaarModelInput, TraceForm};
use spinmon::trajectory::InitialCondition;

/// Version of the spec file format understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    PureSweep,
    MixedSweep,
    HaarCurve,
    BetaCurve,
    ReferenceTable,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PureSweep => "pure_sweep",
            Mode::MixedSweep => "mixed_sweep",
            Mode::HaarCurve => "haar_curve",
            Mode::BetaCurve => "beta_curve",
            Mode::ReferenceTable => "reference_table",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A list of values, either explicit or `points` log-spaced values in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueGrid {
    List(Vec<f64>),
    Log { min: f64, max: f64, points: usize },
}

impl ValueGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ValueGrid::List(v) => v.clone(),
            ValueGrid::Log { min, max, points } => match *points {
                0 => Vec::new(),
                1 => vec![*min],
                n => {
                    let (a, b) = (min.ln(), max.ln());
                    (0..n)
                        .map(|i| {
                            if i == 0 {
                                *min
                            } else if i + 1 == n {
                                *max
                            } else {
                                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                            }
                        })
                        .collect()
                }
            },
        }
    }

    fn check(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        if let ValueGrid::Log { min, max, points } = self {
            if !(min.is_finite() && max.is_finite() && *min > 0.0 && *max >= *min) {
                return Err(ConfigError::new(field, "log grid needs 0 < min <= max"));
            }
            if *points == 0 {
                return Err(ConfigError::new(field, "log grid needs at least one point"));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(ConfigError::new(field, "must be non-empty"));
        }
        if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(ConfigError::new(field, format!("values must be positive and finite, got {bad}")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Particle numbers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u32>,
    /// Chaoticity values.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<f64>,
    /// Rescaled resolutions; the raw `σ` is generated per system size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_over_sqrt_j: Option<ValueGrid>,
    /// Raw resolutions shared by all system sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<ValueGrid>,
    /// Spin quantum numbers for `haar_curve`; defaults to `N/2` of `n`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub j: Vec<f64>,
    /// Squeezing parameter for `reference_table`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    /// Map applications per trajectory; 40 for pure runs and `3N` for mixed
    /// runs when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Pure runs only; random coherent states when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
}

fn default_trajectories() -> usize {
    50
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self { steps: None, n_trajectories: default_trajectories(), burn_in: 0, initial: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HaarSpec {
    pub form: TraceForm,
    pub nodes: usize,
    pub order: usize,
    pub tolerance: f64,
}

impl Default for HaarSpec {
    fn default() -> Self {
        let o = CurveOptions::default();
        Self { form: o.form, nodes: o.nodes, order: o.order, tolerance: o.tolerance }
    }
}

impl HaarSpec {
    pub fn options(&self) -> CurveOptions {
        CurveOptions { form: self.form, nodes: self.nodes, order: self.order, tolerance: self.tolerance }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), format: Format::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub mode: Mode,
    /// Master seed. There is no default.
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub haar: HaarSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A spec that failed to parse or validate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentSpec {
    /// Parses TOML text. Syntax and type errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec is always representable as TOML")
    }

    /// Reads a spec file. A `.json` path is taken to be a run manifest and
    /// its embedded config is used, so any run can be repeated from its
    /// manifest alone.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Wrapper {
                config: ExperimentSpec,
            }
            return serde_json::from_str::<Wrapper>(&text)
                .map(|w| w.config)
                .map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())));
        }
        Self::from_toml(&text).map_err(|e| ConfigError::new(e.field, format!("{}: {}", path.display(), e.message)))
    }

    /// Checks everything the chosen mode needs before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {}, this build reads {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let g = &self.grid;
        let needs_n = !matches!(self.mode, Mode::HaarCurve) || g.j.is_empty();
        if needs_n && g.n.is_empty() {
            return Err(ConfigError::new("grid.n", "must be non-empty"));
        }
        if g.n.contains(&0) {
            return Err(ConfigError::new("grid.n", "particle numbers must be at least 1"));
        }
        match self.mode {
            Mode::ReferenceTable => {
                if let Some(r) = g.squeezing {
                    if !(r.is_finite() && r >= 0.0) {
                        return Err(ConfigError::new("grid.squeezing", "must be finite and non-negative"));
                    }
                }
            }
            Mode::HaarCurve => {
                self.resolution_grid(false)?;
                for (i, &j) in self.haar_spins().iter().enumerate() {
                    let field = if g.j.is_empty() { "grid.n".to_string() } else { format!("grid.j[{i}]") };
                    HaarModelInput::new(j, 1.0, 0.0).map_err(|e| ConfigError::new(field, e.to_string()))?;
                }
                let h = &self.haar;
                if h.order == 0 || h.nodes < h.order {
                    return Err(ConfigError::new("haar.nodes", "need order >= 1 and nodes >= order"));
                }
                if !(h.tolerance.is_finite() && h.tolerance > 0.0) {
                    return Err(ConfigError::new("haar.tolerance", "must be positive"));
                }
            }
            Mode::PureSweep | Mode::MixedSweep | Mode::BetaCurve => {
                if g.k.is_empty() {
                    return Err(ConfigError::new("grid.k", "must be non-empty"));
                }
                if let Some(bad) = g.k.iter().find(|k| !k.is_finite()) {
                    return Err(ConfigError::new("grid.k", format!("values must be finite, got {bad}")));
                }
                self.resolution_grid(matches!(self.mode, Mode::BetaCurve))?;
                if self.mode == Mode::BetaCurve {
                    let mut sizes = g.n.clone();
                    sizes.sort_unstable();
                    sizes.dedup();
                    if sizes.len() < 3 {
                        return Err(ConfigError::new("grid.n", "beta_curve fits need at least 3 distinct sizes"));
                    }
                }
                self.check_trajectory()?;
            }
        }
        Ok(())
    }

    fn check_trajectory(&self) -> Result<(), ConfigError> {
        let t = &self.trajectory;
        if t.n_trajectories == 0 {
            return Err(ConfigError::new("trajectory.n_trajectories", "must be at least 1"));
        }
        if t.steps == Some(0) {
            return Err(ConfigError::new("trajectory.steps", "must be at least 1"));
        }
        let min_steps = match (t.steps, self.mode) {
            (Some(s), _) => s,
            (None, Mode::MixedSweep) => 3 * *self.grid.n.iter().min().unwrap_or(&1) as usize,
            (None, _) => 40,
        };
        if t.burn_in >= min_steps {
            return Err(ConfigError::new("trajectory.burn_in", format!("must be smaller than steps ({min_steps})")));
        }
        match (self.mode, t.initial) {
            (Mode::MixedSweep, Some(ic)) if ic != InitialCondition::MaximallyMixed => {
                Err(ConfigError::new("trajectory.initial", "mixed sweeps always start from the maximally mixed state"))
            }
            (Mode::PureSweep | Mode::BetaCurve, Some(InitialCondition::MaximallyMixed)) => {
                Err(ConfigError::new("trajectory.initial", "pure sweeps need a coherent initial state"))
            }
            _ => Ok(()),
        }
    }

    /// Validated resolution grid and whether it is rescaled by `√J`.
    pub fn resolution_grid(&self, rescaled_only: bool) -> Result<(Vec<f64>, bool), ConfigError> {
        let g = &self.grid;
        match (&g.sigma_over_sqrt_j, &g.sigma) {
            (Some(_), Some(_)) => {
                Err(ConfigError::new("grid.sigma", "give either grid.sigma or grid.sigma_over_sqrt_j, not both"))
            }
            (None, None) => Err(ConfigError::new("grid.sigma_over_sqrt_j", "a resolution grid is required")),
            (None, Some(_)) if rescaled_only => {
                Err(ConfigError::new("grid.sigma_over_sqrt_j", "beta_curve fits need a rescaled resolution grid"))
            }
            (Some(s), None) => Ok((s.check("grid.sigma_over_sqrt_j")?, true)),
            (None, Some(s)) => Ok((s.check("grid.sigma")?, false)),
        }
    }

    /// Spin quantum numbers used by `haar_curve`.
    pub fn haar_spins(&self) -> Vec<f64> {
        if self.grid.j.is_empty() {
            self.grid.n.iter().map(|&n| f64::from(n) / 2.0).collect()
        } else {
            self.grid.j.clone()
        }
    }
}

//! JSON experiment configs.
//!
//! ```json
//! {
//!   "name": "iap-b1",
//!   "problem": { "type": "squared_distance_sum", "m": 10, "n": 5, "seed": 7 },
//!   "algorithm": "iap",
//!   "schedule": { "policy": "fixed_delay", "bound": 1, "selection": "cyclic" },
//!   "stepsize": { "rule": "constant", "alpha": 0.05 },
//!   "stop": { "max_iter": 20000, "tol": 1e-8 },
//!   "seed": 0,
//!   "output": { "dir": "out", "prefix": "iap-b1" }
//! }
//! ```
//!
//! `problem.type` is one of `builtin` (with `name`), `squared_distance_sum`,
//! `random_quadratic_sum`, `dense_rows`, `shared_row`, `quadratic_sum`,
//! `separable_quadratic` (inline matrices) or `file` (a path to a JSON file
//! holding a problem object, relative to the config). Unknown fields and tags
//! are rejected with the path of the offending field.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delay::{DelayPolicy, DelaySchedule, Selection};
use crate::dual::DualAlgorithm;
use crate::error::{Error, Result};
use crate::nonquadratic::{PositiveAlgorithm, DEFAULT_DELTA};
use crate::primal::PrimalAlgorithm;

/// Any algorithm tag the runner accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Primal(PrimalAlgorithm),
    Dual(DualAlgorithm),
    Positive(PositiveAlgorithm),
}

impl Algorithm {
    pub fn tags() -> Vec<&'static str> {
        let mut tags: Vec<_> = PrimalAlgorithm::ALL.iter().map(|a| a.tag()).collect();
        tags.extend(DualAlgorithm::ALL.iter().map(|a| a.tag()));
        tags.extend(PositiveAlgorithm::ALL.iter().map(|a| a.tag()));
        tags
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Primal(a) => a.fmt(f),
            Self::Dual(a) => a.fmt(f),
            Self::Positive(a) => a.fmt(f),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse()
            .map(Self::Primal)
            .or_else(|_| s.parse().map(Self::Dual))
            .or_else(|_| s.parse().map(Self::Positive))
            .map_err(|_| {
                Error::Config(format!(
                    "unknown algorithm `{s}`, expected one of {}",
                    Self::tags().join(", ")
                ))
            })
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> Self {
        a.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinInstance {
    TwoQuadratics,
    StrictComplementarity,
    SymmetricTwoBlock,
    ScalarEquality,
    SparseRows,
    ExpAlWorked,
    TwoBlockInequality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSpec {
    Free,
    Orthant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindSpec {
    Equality,
    Inequality,
}

/// `½x'Qx + c'x + d` with `Q` given by rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub d: f64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default = "free_set")]
    pub set: SetSpec,
}

fn free_set() -> SetSpec {
    SetSpec::Free
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpec {
    pub y: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Builtin {
        name: BuiltinInstance,
    },
    /// `Σ ½‖x − c_i‖²` with centers drawn from `seed` (the config seed when
    /// absent).
    SquaredDistanceSum {
        m: usize,
        n: usize,
        seed: Option<u64>,
    },
    RandomQuadraticSum {
        m: usize,
        n: usize,
        seed: Option<u64>,
    },
    DenseRows {
        m: usize,
        n: usize,
        r: usize,
        seed: Option<u64>,
    },
    /// `m` scalar blocks `(curvature/2) y²` sharing the row `Σ y_i = m`.
    SharedRow {
        m: usize,
        curvature: f64,
    },
    QuadraticSum {
        #[serde(default = "free_set")]
        constraint: SetSpec,
        components: Vec<QuadraticSpec>,
        /// Required over the orthant; computed directly when free.
        x_star: Option<Vec<f64>>,
    },
    SeparableQuadratic {
        kind: KindSpec,
        blocks: Vec<BlockSpec>,
        /// Required for inequalities; computed directly for equalities.
        solution: Option<SolutionSpec>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyTag {
    LastUpdate,
    FixedDelay,
    UniformRandom,
    ZeroDelay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionTag {
    Cyclic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub policy: PolicyTag,
    /// Delay bound `b`; `last_update` defaults to `m − 1`.
    #[serde(default)]
    pub bound: Option<usize>,
    #[serde(default = "cyclic")]
    pub selection: SelectionTag,
}

fn cyclic() -> SelectionTag {
    SelectionTag::Cyclic
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            policy: PolicyTag::LastUpdate,
            bound: None,
            selection: SelectionTag::Cyclic,
        }
    }
}

impl ScheduleSpec {
    /// Selection draws use `seed`, random delays use the next seed.
    pub fn schedule(&self, seed: u64) -> Result<DelaySchedule> {
        let need_bound = |policy: &str| {
            self.bound
                .ok_or_else(|| Error::Config(format!("schedule.bound is required for {policy}")))
        };
        let policy = match self.policy {
            PolicyTag::LastUpdate => DelayPolicy::LastUpdate { bound: self.bound },
            PolicyTag::FixedDelay => DelayPolicy::FixedDelay(need_bound("fixed_delay")?),
            PolicyTag::UniformRandom => DelayPolicy::UniformRandom {
                bound: need_bound("uniform_random")?,
                seed: seed.wrapping_add(1),
            },
            PolicyTag::ZeroDelay => DelayPolicy::ZeroDelay,
        };
        let selection = match self.selection {
            SelectionTag::Cyclic => Selection::Cyclic,
            SelectionTag::Random => Selection::Random { seed },
        };
        Ok(DelaySchedule::new(policy, selection))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepsizeSpec {
    Constant {
        alpha: f64,
    },
    /// `α_k = α / (k + 1)`.
    Diminishing {
        alpha: f64,
    },
    /// Per-coordinate constants.
    Diagonal {
        alphas: Vec<f64>,
    },
    /// Halving search from `1/L`, then multiplied by `scale`.
    Tuned {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `α / max(x̄^j, δ)` for the orthant methods.
    Heuristic {
        alpha: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl StepsizeSpec {
    fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "stepsize.{field} must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            Self::Constant { alpha } | Self::Diminishing { alpha } => positive("alpha", *alpha),
            Self::Diagonal { alphas } => alphas.iter().try_for_each(|a| positive("alphas", *a)),
            Self::Tuned { scale } => positive("scale", *scale),
            Self::Heuristic { alpha, delta } => positive("alpha", *alpha).and(positive("delta", *delta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Error tolerance; `null` runs to `max_iter`.
    #[serde(default = "default_tol")]
    pub tol: Option<f64>,
    /// Tolerance of proximal and block subproblem solves.
    #[serde(default)]
    pub prox_tol: Option<f64>,
}

fn default_max_iter() -> usize {
    20_000
}

fn default_tol() -> Option<f64> {
    Some(1e-8)
}

impl Default for StopSpec {
    fn default() -> Self {
        Self {
            max_iter: default_max_iter(),
            tol: default_tol(),
            prox_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// File prefix; defaults to the config name or the algorithm tag.
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    pub stepsize: StepsizeSpec,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub seed: u64,
    /// Start point (`x_0`, `λ_0` or `μ_0`); solver default when absent.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative `file` references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse and validate. Errors carry the JSON path of the bad field and,
    /// for syntax errors, the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("{path}: {inner}"))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.stepsize.validate()?;
        if self.stop.tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::Config("stop.tol must be nonnegative".into()));
        }
        if self.stop.prox_tol.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Config("stop.prox_tol must be positive".into()));
        }
        if let ProblemSpec::SharedRow { curvature, .. } = self.problem {
            if !(curvature > 0.0) {
                return Err(Error::Config("problem.curvature must be positive".into()));
            }
        }
        let heuristic = matches!(self.stepsize, StepsizeSpec::Heuristic { .. });
        let positive = matches!(
            self.algorithm,
            Algorithm::Positive(
                PositiveAlgorithm::EntropyIap | PositiveAlgorithm::EntropyIag | PositiveAlgorithm::ProjIag
            )
        );
        if heuristic && !positive {
            return Err(Error::Config(format!(
                "stepsize.rule: the heuristic applies to orthant methods, not {}",
                self.algorithm
            )));
        }
        Ok(())
    }

    /// Output file prefix.
    pub fn prefix(&self) -> String {
        self.output
            .prefix
            .clone()
            .or_else(|| self.name.clone())
            .unwrap_or_else(|| self.algorithm.to_string())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// Read a problem object from a `file` reference.
pub fn load_problem_file(base_dir: &Path, path: &Path) -> Result<ProblemSpec> {
    let full = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    };
    let text = std::fs::read_to_string(&full)
        .map_err(|e| Error::Config(format!("problem.path: cannot read {}: {e}", full.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: {}: {}", full.display(), e.path(), e.inner())))
}

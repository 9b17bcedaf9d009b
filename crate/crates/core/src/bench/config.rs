use std::path::PathBuf;
use std::sync::Arc;

use crate::data::{load_binary_dataset, LabelRule};
use crate::error::{Error, Result};
use crate::optim::{Domain, OptimizerSpec};
use crate::problems::{abs_value, logistic_regression, quadratic, Problem};

/// Evaluation interval for problems without an epoch structure.
pub const DEFAULT_EVAL_EVERY: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Abs,
    Quadratic { diag: Vec<f64>, noise_std: f64 },
    Logistic { dataset: PathBuf },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Abs => "abs",
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Logistic { .. } => "logistic",
        }
    }

    /// Loads data if needed and builds the problem.
    pub fn build(&self, batch_size: usize) -> Result<Arc<dyn Problem>> {
        Ok(match self {
            ProblemSpec::Abs => Arc::new(abs_value()),
            ProblemSpec::Quadratic { diag, noise_std } => {
                Arc::new(quadratic(diag.clone(), *noise_std)?)
            }
            ProblemSpec::Logistic { dataset } => {
                let data = load_binary_dataset(dataset, LabelRule::Auto)?;
                Arc::new(logistic_regression(Arc::new(data), batch_size)?)
            }
        })
    }

    /// Starting point when none is configured.
    pub fn default_x0(&self, dim: usize) -> Vec<f64> {
        match self {
            ProblemSpec::Abs | ProblemSpec::Quadratic { .. } => vec![1.0; dim],
            ProblemSpec::Logistic { .. } => vec![0.0; dim],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Steps(u64),
    Epochs(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Unconstrained,
    /// The cube `[lo, hi]^dim`.
    Cube {
        lo: f64,
        hi: f64,
    },
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<Domain> {
        match *self {
            DomainSpec::Unconstrained => Ok(Domain::Unconstrained),
            DomainSpec::Cube { lo, hi } => Domain::cube(dim, lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerSpec,
    pub budget: Budget,
    pub batch_size: usize,
    /// Master seed; replicate `r` uses a seed derived from it.
    pub seed: u64,
    /// Number of replicates averaged into one record.
    pub seeds: u64,
    pub domain: DomainSpec,
    /// Starting point; a single value is broadcast to every coordinate.
    pub x0: Option<Vec<f64>>,
    /// Steps between evaluations. Defaults to one epoch for minibatch
    /// problems and [`DEFAULT_EVAL_EVERY`] otherwise.
    pub eval_every: Option<u64>,
    pub trace: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: ProblemSpec, optimizer: OptimizerSpec, budget: Budget) -> Self {
        Self {
            problem,
            optimizer,
            budget,
            batch_size: 1,
            seed: 0,
            seeds: 1,
            domain: DomainSpec::Unconstrained,
            x0: None,
            eval_every: None,
            trace: false,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.params.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("need at least one seed".into()));
        }
        if self.eval_every == Some(0) {
            return Err(Error::Config("evaluation interval must be positive".into()));
        }
        if self.trace && self.out.is_none() {
            return Err(Error::Config("--trace needs --out".into()));
        }
        Ok(())
    }

    pub(crate) fn resolve_x0(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.x0 {
            None => Ok(self.problem.default_x0(dim)),
            Some(v) if v.len() == 1 => Ok(vec![v[0]; dim]),
            Some(v) if v.len() == dim => Ok(v.clone()),
            Some(v) => Err(Error::Config(format!(
                "x0 has {} entries but the problem has dimension {dim}",
                v.len()
            ))),
        }
    }

    pub(crate) fn total_steps(&self, problem: &dyn Problem) -> Result<u64> {
        match self.budget {
            Budget::Steps(n) => Ok(n),
            Budget::Epochs(e) => problem
                .draws_per_epoch()
                .map(|d| e * d as u64)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "--epochs needs a dataset problem, not `{}`",
                        problem.name()
                    ))
                }),
        }
    }
}

/// Reads `key = value` lines; `#` starts a comment. Keys are flag names
/// without the leading dashes.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {}: expected key=value, got `{line}`",
                n + 1
            ))
        })?;
        let key = k.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(Error::Config(format!("config line {}: empty key", n + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

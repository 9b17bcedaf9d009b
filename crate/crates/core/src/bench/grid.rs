use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::seed::{derive_seed, stream};

use super::config::RunConfig;
use super::runner::{run_on, RunRecord};

/// Evaluations averaged by the selection metric.
pub const SELECTION_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridParam {
    /// `γ₀` for GradaGrad, the learning rate for the baselines.
    Gamma0,
    Rho,
    Beta,
}

impl GridParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridParam::Gamma0 => "gamma0",
            GridParam::Rho => "rho",
            GridParam::Beta => "beta",
        }
    }
}

impl std::str::FromStr for GridParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma0" | "lr" => Ok(GridParam::Gamma0),
            "rho" => Ok(GridParam::Rho),
            "beta" => Ok(GridParam::Beta),
            other => Err(Error::Config(format!("unknown grid parameter `{other}`"))),
        }
    }
}

/// `2^lo, 2^(lo+1), …, 2^hi`.
pub fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub param: GridParam,
    pub values: Vec<f64>,
}

impl Default for GridSpec {
    /// Learning rate over `2^-8 … 2^4`.
    fn default() -> Self {
        Self {
            param: GridParam::Gamma0,
            values: powers_of_two(-8, 4),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub value: f64,
    /// Mean accuracy over the last [`SELECTION_WINDOW`] evaluations when the
    /// problem has one; otherwise the final loss.
    pub metric: f64,
    pub final_loss: f64,
    pub final_accuracy: Option<f64>,
    pub record: RunRecord,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub param: GridParam,
    pub points: Vec<GridPoint>,
    /// Index into `points`.
    pub winner: usize,
    /// Whether `metric` is an accuracy (higher wins) or a loss (lower wins).
    pub by_accuracy: bool,
}

impl GridResult {
    pub fn best(&self) -> &GridPoint {
        &self.points[self.winner]
    }
}

fn apply(config: &RunConfig, param: GridParam, value: f64) -> RunConfig {
    let mut c = config.clone();
    match param {
        GridParam::Gamma0 => c.optimizer.params.gamma0 = value,
        GridParam::Rho => c.optimizer.params.rho = value,
        GridParam::Beta => c.optimizer.params.beta = value,
    }
    c
}

/// Runs `config` at every grid value over `config.seeds` replicates and
/// picks the best point. Ties go to the smaller value.
pub fn grid(config: &RunConfig, spec: &GridSpec, problem: &dyn Problem) -> Result<GridResult> {
    if spec.values.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let mut points: Vec<GridPoint> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(j, &value)| {
            let mut c = apply(config, spec.param, value);
            c.trace = false;
            c.out = None;
            c.seed = derive_seed(config.seed, &[stream::GRID_POINT, j as u64]);
            let record = run_on(&c, problem)?.record;
            let final_loss = record.summary.final_loss;
            let final_accuracy = record.summary.final_accuracy;
            let metric = record
                .trailing_accuracy(SELECTION_WINDOW)
                .unwrap_or(final_loss);
            Ok(GridPoint {
                value,
                metric,
                final_loss,
                final_accuracy,
                record,
            })
        })
        .collect::<Result<_>>()?;
    let by_accuracy = points[0].final_accuracy.is_some();
    // Present points in ascending parameter order.
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    let score = |p: &GridPoint| {
        let m = if by_accuracy { p.metric } else { -p.metric };
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m
        }
    };
    let mut winner = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        if score(p) > score(&points[winner]) {
            winner = i;
        }
    }
    Ok(GridResult {
        param: spec.param,
        points,
        winner,
        by_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{Budget, ProblemSpec};
    use crate::optim::{HyperParams, OptimizerKind, OptimizerSpec};

    fn config() -> RunConfig {
        RunConfig::new(
            ProblemSpec::Quadratic {
                diag: vec![1.0, 2.0],
                noise_std: 0.0,
            },
            OptimizerSpec::new(OptimizerKind::AdaGrad, HyperParams::default()),
            Budget::Steps(30),
        )
    }

    #[test]
    fn one_point_per_value() {
        let mut c = config();
        c.seeds = 2;
        let p = c.problem.build(1).unwrap();
        let spec = GridSpec {
            param: GridParam::Gamma0,
            values: vec![2.0, 0.25, 1.0, 0.5],
        };
        let g = grid(&c, &spec, p.as_ref()).unwrap();
        assert_eq!(g.points.len(), 4);
        let values: Vec<f64> = g.points.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![0.25, 0.5, 1.0, 2.0]);
        assert!(!g.by_accuracy);
        let best = g.best().final_loss;
        assert!(g.points.iter().all(|p| p.final_loss >= best));
    }

    #[test]
    fn single_point_wins() {
        let c = config();
        let p = c.problem.build(1).unwrap();
        let spec = GridSpec {
            param: GridParam::Gamma0,
            values: vec![0.5],
        };
        let g = grid(&c, &spec, p.as_ref()).unwrap();
        assert_eq!(g.winner, 0);
        assert_eq!(g.best().value, 0.5);
    }

    #[test]
    fn ties_go_to_the_smaller_value() {
        // β has no effect on AdaGrad, so every point ties.
        let c = config();
        let p = c.problem.build(1).unwrap();
        let spec = GridSpec {
            param: GridParam::Beta,
            values: vec![0.5, 0.25, 0.0],
        };
        let g = grid(&c, &spec, p.as_ref()).unwrap();
        assert_eq!(g.best().value, 0.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let c = config();
        let p = c.problem.build(1).unwrap();
        let spec = GridSpec {
            param: GridParam::Gamma0,
            values: vec![],
        };
        assert!(grid(&c, &spec, p.as_ref()).is_err());
    }

    #[test]
    fn default_grid_is_powers_of_two() {
        let spec = GridSpec::default();
        assert_eq!(spec.values.first(), Some(&(1.0 / 256.0)));
        assert_eq!(spec.values.last(), Some(&16.0));
        assert!(spec.values.iter().all(|v| v.log2().fract() == 0.0));
    }
}

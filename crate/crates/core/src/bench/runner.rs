use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::{LrStats, StepTrace};
use crate::problems::{Problem, SeedState};
use crate::seed::{derive_seed, stream};

use super::config::{RunConfig, DEFAULT_EVAL_EVERY};
use super::schema::{write_run_record, write_traces};

/// One evaluation of the full objective at the current iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub step: u64,
    pub epoch: Option<u64>,
    pub loss: f64,
    pub accuracy: Option<f64>,
    pub lr: LrStats,
    /// `loss − f*` when the optimum is known.
    pub subopt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub final_loss: f64,
    pub final_accuracy: Option<f64>,
    /// Full loss at the averaged iterate.
    pub final_avg_loss: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<EvalRow>,
    pub summary: RunSummary,
}

impl RunRecord {
    /// Mean of `window` trailing accuracies, or `None` without accuracy.
    pub fn trailing_accuracy(&self, window: usize) -> Option<f64> {
        let tail = &self.rows[self.rows.len().saturating_sub(window)..];
        let accs: Option<Vec<f64>> = tail.iter().map(|r| r.accuracy).collect();
        accs.filter(|a| !a.is_empty())
            .map(|a| a.iter().sum::<f64>() / a.len() as f64)
    }

    /// Element-wise mean of records evaluated at the same steps.
    pub fn mean(records: &[RunRecord]) -> Result<RunRecord> {
        let first = records
            .first()
            .ok_or_else(|| Error::Contract("mean of zero run records".into()))?;
        if records.len() == 1 {
            return Ok(first.clone());
        }
        let n = records.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        let mean_opt = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Option<f64> {
            records
                .iter()
                .map(f)
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.iter().sum::<f64>() / n)
        };
        let mut rows = Vec::with_capacity(first.rows.len());
        for (j, row) in first.rows.iter().enumerate() {
            if records
                .iter()
                .any(|r| r.rows.get(j).map(|x| x.step) != Some(row.step))
            {
                return Err(Error::Contract(
                    "replicates evaluated at different steps".into(),
                ));
            }
            let lr = LrStats {
                gamma_mean: mean_opt(&|r| r.rows[j].lr.gamma_mean),
                gamma_max: mean_opt(&|r| r.rows[j].lr.gamma_max),
                alpha_mean: mean_opt(&|r| r.rows[j].lr.alpha_mean),
                alpha_max: mean_opt(&|r| r.rows[j].lr.alpha_max),
                ainv_mean: mean(&|r| r.rows[j].lr.ainv_mean),
            };
            rows.push(EvalRow {
                step: row.step,
                epoch: row.epoch,
                loss: mean(&|r| r.rows[j].loss),
                accuracy: mean_opt(&|r| r.rows[j].accuracy),
                lr,
                subopt: mean_opt(&|r| r.rows[j].subopt),
            });
        }
        let summary = RunSummary {
            steps: first.summary.steps,
            final_loss: mean(&|r| r.summary.final_loss),
            final_accuracy: mean_opt(&|r| r.summary.final_accuracy),
            final_avg_loss: mean(&|r| r.summary.final_avg_loss),
            wall_time: records.iter().map(|r| r.summary.wall_time).sum(),
        };
        Ok(RunRecord { rows, summary })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Replicate mean when more than one seed was run.
    pub record: RunRecord,
    /// Per-replicate records, in replicate order.
    pub replicates: Vec<RunRecord>,
    /// Step traces of replicate 0, when tracing was requested.
    pub traces: Vec<StepTrace>,
}

/// Seed of replicate `r` under master seed `seed`.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    derive_seed(seed, &[stream::REPLICATE, r])
}

/// Runs one replicate of `config` on an already built problem.
pub fn run_replicate(
    config: &RunConfig,
    problem: &dyn Problem,
    seed: u64,
    trace: bool,
) -> Result<(RunRecord, Vec<StepTrace>)> {
    let started = Instant::now();
    let dim = problem.dim();
    let x0 = config.resolve_x0(dim)?;
    let domain = config.domain.build(dim)?;
    let mut opt = config.optimizer.build(x0, domain)?;
    let steps = config.total_steps(problem)?;
    let per_epoch = problem.draws_per_epoch().map(|d| d as u64);
    let eval_every = config
        .eval_every
        .or(per_epoch)
        .unwrap_or(DEFAULT_EVAL_EVERY);
    let f_star = problem.f_star();

    let evaluate = |step: u64, x: &[f64], lr: LrStats| {
        let loss = problem.loss_full(x);
        EvalRow {
            step,
            epoch: per_epoch.map(|d| step / d),
            loss,
            accuracy: problem.accuracy(x),
            lr,
            subopt: f_star.map(|f| loss - f),
        }
    };

    let mut rows = vec![evaluate(0, opt.x(), opt.lr_stats())];
    let mut traces = Vec::new();
    let mut seeds = SeedState::new(seed);
    for k in 1..=steps {
        let sample = problem.sample(opt.x(), &mut seeds);
        let step_trace = opt.step(&sample.grad)?;
        if trace {
            if let Some(mut t) = step_trace {
                t.f_sample = Some(sample.loss);
                traces.push(t);
            }
        }
        if k % eval_every == 0 || k == steps {
            rows.push(evaluate(k, opt.x(), opt.lr_stats()));
        }
    }

    let last = rows.last().expect("row 0 always present");
    let final_avg_loss = if steps == 0 {
        last.loss
    } else {
        problem.loss_full(&opt.averaged_iterate()?)
    };
    let summary = RunSummary {
        steps,
        final_loss: last.loss,
        final_accuracy: last.accuracy,
        final_avg_loss,
        wall_time: started.elapsed(),
    };
    Ok((RunRecord { rows, summary }, traces))
}

/// Runs every replicate of `config` (in parallel) and averages them.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let problem = config.problem.build(config.batch_size)?;
    run_on(config, problem.as_ref())
}

/// Like [`run`] with a prebuilt problem, so callers can share loaded data.
pub fn run_on(config: &RunConfig, problem: &dyn Problem) -> Result<RunOutput> {
    config.validate()?;
    let results: Vec<(RunRecord, Vec<StepTrace>)> = (0..config.seeds)
        .into_par_iter()
        .map(|r| {
            run_replicate(
                config,
                problem,
                replicate_seed(config.seed, r),
                config.trace && r == 0,
            )
        })
        .collect::<Result<_>>()?;
    let mut traces = Vec::new();
    let mut replicates = Vec::with_capacity(results.len());
    for (i, (record, t)) in results.into_iter().enumerate() {
        if i == 0 {
            traces = t;
        }
        replicates.push(record);
    }
    Ok(RunOutput {
        record: RunRecord::mean(&replicates)?,
        replicates,
        traces,
    })
}

/// `run.csv` → `run.trace.csv`.
pub fn trace_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.trace.csv"))
}

/// Writes the record to `config.out` and, with tracing, the trace beside it.
pub fn write_outputs(config: &RunConfig, output: &RunOutput) -> Result<()> {
    let Some(out) = &config.out else {
        return Ok(());
    };
    let create = |p: &Path| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|e| Error::io(p, e))
    };
    write_run_record(&output.record, create(out)?)?;
    if config.trace {
        let path = trace_path(out);
        write_traces(&output.traces, create(&path)?)?;
    }
    Ok(())
}

/// Plain-text summary for humans.
pub fn summary_text(config: &RunConfig, output: &RunOutput) -> String {
    let s = &output.record.summary;
    let mut text = format!(
        "problem={} optimizer={} seeds={} steps={}\nfinal loss {:.6e}, averaged-iterate loss {:.6e}",
        config.problem.name(),
        config.optimizer.kind,
        config.seeds,
        s.steps,
        s.final_loss,
        s.final_avg_loss,
    );
    if let Some(acc) = s.final_accuracy {
        text.push_str(&format!(", accuracy {acc:.4}"));
    }
    if let Some(sub) = output.record.rows.last().and_then(|r| r.subopt) {
        text.push_str(&format!(", suboptimality {sub:.6e}"));
    }
    text.push_str(&format!("\nwall time {:.3}s\n", s.wall_time.as_secs_f64()));
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{Budget, ProblemSpec};
    use crate::optim::{HyperParams, OptimizerSpec};

    fn abs_config(steps: u64) -> RunConfig {
        RunConfig::new(
            ProblemSpec::Abs,
            OptimizerSpec::gradagrad(HyperParams::default()),
            Budget::Steps(steps),
        )
    }

    #[test]
    fn rows_step_by_eval_interval() {
        let out = run(&abs_config(250)).unwrap();
        let steps: Vec<u64> = out.record.rows.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 100, 200, 250]);
        assert!(out
            .record
            .rows
            .iter()
            .all(|r| r.epoch.is_none() && r.subopt.is_some()));
        assert!(out.traces.is_empty());
    }

    #[test]
    fn replicates_average() {
        let mut c = RunConfig::new(
            ProblemSpec::Quadratic {
                diag: vec![1.0, 2.0],
                noise_std: 0.5,
            },
            OptimizerSpec::gradagrad(HyperParams::default()),
            Budget::Steps(50),
        );
        c.seeds = 3;
        let out = run(&c).unwrap();
        assert_eq!(out.replicates.len(), 3);
        let mean: f64 = out
            .replicates
            .iter()
            .map(|r| r.summary.final_loss)
            .sum::<f64>()
            / 3.0;
        assert!((out.record.summary.final_loss - mean).abs() < 1e-15);
        assert_ne!(out.replicates[0].rows, out.replicates[1].rows);
    }

    #[test]
    fn gamma_stays_below_cap_in_records() {
        let mut c = abs_config(300);
        c.optimizer.params = HyperParams::theory(1e-3, 2.0, 0.0, 1.0, 0.05);
        let out = run(&c).unwrap();
        assert!(out
            .record
            .rows
            .iter()
            .all(|r| r.lr.gamma_max.unwrap() <= 0.05));
    }

    #[test]
    fn trace_path_naming() {
        assert_eq!(
            trace_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.trace.csv")
        );
    }
}

//! `gradagrad-bench` command line.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on usage, config,
//! data or I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::optim::{HyperParams, Mode, OptimizerKind, OptimizerSpec, PRACTICAL_D_INF};
use crate::verify::{
    check_errnegativity, check_monotone_and_cap, check_reparam_invariance, CheckReport,
};

use super::config::{parse_config_file, Budget, DomainSpec, ProblemSpec, RunConfig};
use super::grid::{grid, GridParam, GridSpec};
use super::runner::{replicate_seed, run, run_replicate, summary_text, write_outputs};
use super::schema::{read_traces, write_check_reports, write_grid, write_run_record, write_traces};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Names accepted by `check --checks`.
pub const TRACE_CHECKS: [&str; 3] = ["errnegativity", "monotone", "reparam"];

#[derive(Debug, Parser)]
#[command(
    name = "gradagrad-bench",
    version,
    about = "GradaGrad experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write its evaluation record.
    Run(RunArgs),
    /// Grid-search one hyper-parameter.
    Grid {
        #[command(flatten)]
        run: RunArgs,
        /// gamma0 (alias lr), rho or beta.
        #[arg(long, default_value = "gamma0")]
        param: String,
        /// Comma-separated values; defaults to powers of two 2^-8..2^4.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Run trace checks on a trace CSV.
    Check {
        trace: PathBuf,
        /// Comma-separated subset of errnegativity, monotone, reparam.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Cap used by the run, for the cap and reparameterization checks.
        #[arg(long)]
        d_inf: Option<f64>,
        /// Write the report CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run with tracing and write the step trace CSV.
    TraceDump(RunArgs),
}

#[derive(Debug, Args, Clone)]
struct RunArgs {
    /// key=value file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// abs, quadratic or logistic.
    #[arg(long, default_value = "quadratic")]
    problem: String,
    /// LIBSVM file for the logistic problem.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Quadratic curvatures, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    diag: Vec<f64>,
    /// Standard deviation of the quadratic's gradient noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Starting point; one value is broadcast.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Vec<f64>,
    /// gradagrad, gradagrad-scalar, adagrad, sgd or adam.
    #[arg(long, default_value = "gradagrad")]
    optimizer: String,
    /// γ₀ for GradaGrad, the learning rate for the baselines.
    #[arg(long, visible_alias = "lr", default_value_t = 1.0)]
    gamma0: f64,
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    g_inf: f64,
    /// Defaults to 1e10 (effectively uncapped).
    #[arg(long)]
    d_inf: Option<f64>,
    /// Fixed clip parameter of the scalar variant; `adaptive` selects the
    /// adaptive clip.
    #[arg(long, default_value = "1")]
    r: String,
    #[arg(long, default_value = "practical")]
    mode: String,
    #[arg(long, conflicts_with = "epochs")]
    steps: Option<u64>,
    #[arg(long)]
    epochs: Option<u64>,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of replicates averaged together.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Steps between evaluations.
    #[arg(long)]
    eval_every: Option<u64>,
    /// Box constraint `lo,hi` applied to every coordinate.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    bounds: Option<Vec<f64>>,
    /// Also write the step trace next to --out.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let problem = match self.problem.as_str() {
            "abs" => ProblemSpec::Abs,
            "quadratic" => ProblemSpec::Quadratic {
                diag: self.diag.clone(),
                noise_std: self.noise,
            },
            "logistic" => ProblemSpec::Logistic {
                dataset: self
                    .dataset
                    .clone()
                    .ok_or_else(|| Error::Config("--problem logistic needs --dataset".into()))?,
            },
            other => return Err(Error::Config(format!("unknown problem `{other}`"))),
        };
        let kind: OptimizerKind = self.optimizer.parse()?;
        let mode: Mode = self.mode.parse()?;
        let r_fixed = match self.r.as_str() {
            "adaptive" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("invalid --r `{v}`")))?,
            ),
        };
        let params = HyperParams {
            gamma0: self.gamma0,
            rho: self.rho,
            beta: self.beta,
            g_inf: self.g_inf,
            d_inf: self.d_inf.unwrap_or(PRACTICAL_D_INF),
            r_fixed,
            mode,
        };
        let budget = match (self.steps, self.epochs) {
            (_, Some(e)) => Budget::Epochs(e),
            (Some(s), None) => Budget::Steps(s),
            (None, None) => Budget::Steps(1000),
        };
        let domain = match self.bounds.as_deref() {
            None => DomainSpec::Unconstrained,
            Some([lo, hi]) => DomainSpec::Cube { lo: *lo, hi: *hi },
            Some(_) => return Err(Error::Config("--bounds takes lo,hi".into())),
        };
        let config = RunConfig {
            problem,
            optimizer: OptimizerSpec::new(kind, params),
            budget,
            batch_size: self.batch_size,
            seed: self.seed,
            seeds: self.seeds,
            domain,
            x0: (!self.x0.is_empty()).then(|| self.x0.clone()),
            eval_every: self.eval_every,
            trace: self.trace,
            out: self.out.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Splices `--config FILE` entries in front of the remaining flags so that
/// explicit flags, which come later, take precedence.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut at = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
            at = Some((i, 2));
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
            at = Some((i, 1));
        }
    }
    let (Some(path), Some((i, len))) = (path, at) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(PathBuf::from(&path), e))?;
    let mut injected = Vec::new();
    for (k, v) in parse_config_file(&text)? {
        match v.as_str() {
            "true" => injected.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => injected.push(OsString::from(format!("--{k}={v}"))),
        }
    }
    let mut out = args;
    out.splice(i..i + len, injected);
    Ok(out)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn run_checks(trace: &PathBuf, names: &[String], d_inf: Option<f64>) -> Result<Vec<CheckReport>> {
    let names: Vec<String> = if names.is_empty() {
        TRACE_CHECKS.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    if let Some(bad) = names.iter().find(|n| !TRACE_CHECKS.contains(&n.as_str())) {
        return Err(Error::Config(format!(
            "unknown check `{bad}` (expected one of {})",
            TRACE_CHECKS.join(", ")
        )));
    }
    let file = File::open(trace).map_err(|e| Error::io(trace, e))?;
    let traces = read_traces(BufReader::new(file))?;
    names
        .iter()
        .map(|n| match n.as_str() {
            "errnegativity" => check_errnegativity(&traces),
            "monotone" => check_monotone_and_cap(&traces, d_inf),
            _ => check_reparam_invariance(&traces, d_inf),
        })
        .collect()
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let config = args.to_config()?;
            let output = run(&config)?;
            match &config.out {
                Some(_) => write_outputs(&config, &output)?,
                None => write_run_record(&output.record, &mut *stdout)?,
            }
            let _ = write!(stderr, "{}", summary_text(&config, &output));
            Ok(EXIT_OK)
        }
        Command::TraceDump(args) => {
            let config = args.to_config()?;
            let problem = config.problem.build(config.batch_size)?;
            let seed = replicate_seed(config.seed, 0);
            let (_, traces) = run_replicate(&config, problem.as_ref(), seed, true)?;
            match &config.out {
                Some(path) => write_traces(&traces, create(path)?)?,
                None => write_traces(&traces, &mut *stdout)?,
            }
            Ok(EXIT_OK)
        }
        Command::Grid {
            run: args,
            param,
            values,
        } => {
            let config = args.to_config()?;
            let mut spec = GridSpec {
                param: param.parse::<GridParam>()?,
                ..GridSpec::default()
            };
            if !values.is_empty() {
                spec.values = values;
            }
            let problem = config.problem.build(config.batch_size)?;
            let mut cfg = config.clone();
            cfg.out = None;
            cfg.trace = false;
            let result = grid(&cfg, &spec, problem.as_ref())?;
            match &config.out {
                Some(path) => write_grid(&result, create(path)?)?,
                None => write_grid(&result, &mut *stdout)?,
            }
            let best = result.best();
            let _ = writeln!(
                stderr,
                "winner {}={} metric={}",
                spec.param.as_str(),
                best.value,
                best.metric
            );
            Ok(EXIT_OK)
        }
        Command::Check {
            trace,
            checks,
            d_inf,
            out,
        } => {
            let reports = run_checks(&trace, &checks, d_inf)?;
            match &out {
                Some(path) => write_check_reports(&reports, create(path)?)?,
                None => write_check_reports(&reports, &mut *stdout)?,
            }
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed)
                .map(|r| r.name.as_str())
                .collect();
            if failed.is_empty() {
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(stderr, "failed: {}", failed.join(", "));
                Ok(EXIT_CHECK_FAILED)
            }
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut command = Cli::command().args_override_self(true);
    for name in ["run", "grid", "trace-dump"] {
        command = command.mut_subcommand(name, |s| s.args_override_self(true));
    }
    let cli = match command
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

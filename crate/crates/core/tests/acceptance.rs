//! End-to-end acceptance criteria.
//!
//! Runs without the libtest harness so every criterion prints exactly one
//! `PASS`/`FAIL` line; the process exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gradagrad::bench::{
    grid, powers_of_two, run_on, Budget, GridParam, GridSpec, ProblemSpec, RunConfig,
};
use gradagrad::data::{
    load_binary_dataset, load_dataset, parse_libsvm_str, write_libsvm, LabelRule,
};
use gradagrad::optim::{
    step_scalar, Branch, Domain, HyperParams, OptimizerKind, OptimizerSpec, OptimizerState,
    StepTrace,
};
use gradagrad::problems::{abs_value, logistic_regression, quadratic, Problem, SeedState};
use gradagrad::seed::rng_for;
use gradagrad::verify::{
    check_adagrad_equivalence, check_alpha_identity_rho1, check_convergence_trend,
    check_errnegativity, check_finite_diff, check_monotone_and_cap, check_reparam_invariance,
    fuzz_traces, CheckReport, FINITE_DIFF_H, STEP_TOL, TREND_FACTOR,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type LabelledTrace = (String, Vec<StepTrace>, Option<f64>);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn require(report: &CheckReport) -> Result<(), String> {
    if report.passed {
        Ok(())
    } else {
        Err(format!(
            "{} failed: worst {:e} > {:e} at {:?} ({})",
            report.name, report.worst_violation, report.tolerance, report.location, report.details
        ))
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let elapsed = started.elapsed();
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn err(e: gradagrad::Error) -> String {
    e.to_string()
}

fn fuzz_configs() -> Vec<(OptimizerKind, HyperParams, Domain, Option<f64>)> {
    let theory = HyperParams::theory(0.5, 2.0, 0.0, 3.0, 50.0);
    let practical = HyperParams::default();
    let momentum = HyperParams::default().with_beta(0.9);
    let boxed = HyperParams::theory(0.05, 1.5, 0.5, 10.0, 4.0);
    let scalar = HyperParams::default().with_r_fixed(None);
    vec![
        (
            OptimizerKind::GradaGrad,
            theory.clone(),
            Domain::Unconstrained,
            Some(theory.d_inf),
        ),
        (
            OptimizerKind::GradaGrad,
            practical.clone(),
            Domain::Unconstrained,
            Some(practical.d_inf),
        ),
        (
            OptimizerKind::GradaGrad,
            momentum.clone(),
            Domain::Unconstrained,
            Some(momentum.d_inf),
        ),
        (
            OptimizerKind::GradaGrad,
            boxed.clone(),
            Domain::cube(16, -2.0, 2.0).expect("valid box"),
            Some(boxed.d_inf),
        ),
        (
            OptimizerKind::GradaGradScalar,
            scalar,
            Domain::Unconstrained,
            None,
        ),
    ]
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let (dim, steps) = (16usize, 2_000u64);
    let mut coord_steps = 0usize;
    let mut negatives = 0usize;
    for (c, (kind, params, domain, _)) in fuzz_configs().into_iter().enumerate() {
        for seed in 0..4u64 {
            let traces = fuzz_traces(kind, &params, &domain, dim, steps, 1000 * c as u64 + seed)
                .map_err(err)?;
            coord_steps += traces.iter().map(|t| t.coords.len()).sum::<usize>();
            negatives += traces
                .iter()
                .flat_map(|t| &t.coords)
                .filter(|r| r.branch == Branch::Negative)
                .count();
            require(&check_errnegativity(&traces).map_err(err)?)?;
        }
    }
    within(Duration::from_secs(10), started)?;
    if coord_steps < 100_000 || negatives == 0 {
        return Err(format!(
            "only {coord_steps} coordinate-steps, {negatives} negative"
        ));
    }
    Ok(format!(
        "{coord_steps} coordinate-steps, {negatives} negative-branch"
    ))
}

fn benchmark_traces() -> Result<Vec<LabelledTrace>, String> {
    let mut out = Vec::new();
    let problems: Vec<(&str, Arc<dyn Problem>, Budget, usize)> = vec![
        ("abs", Arc::new(abs_value()), Budget::Steps(500), 1),
        (
            "quadratic",
            Arc::new(quadratic(vec![1.0, 0.5, 2.0, 0.25], 1.0).map_err(err)?),
            Budget::Steps(2000),
            1,
        ),
        (
            "two_blobs",
            ProblemSpec::Logistic {
                dataset: fixtures().join("two_blobs.libsvm"),
            }
            .build(16)
            .map_err(err)?,
            Budget::Epochs(5),
            16,
        ),
        (
            "sparse_planted",
            ProblemSpec::Logistic {
                dataset: fixtures().join("sparse_planted.libsvm"),
            }
            .build(16)
            .map_err(err)?,
            Budget::Epochs(5),
            16,
        ),
    ];
    for (name, problem, budget, batch) in problems {
        for kind in [OptimizerKind::GradaGrad, OptimizerKind::GradaGradScalar] {
            let mut params = HyperParams::default();
            if name == "abs" {
                params = params.with_gamma0(1e-3);
            }
            let d_inf = (kind == OptimizerKind::GradaGrad).then_some(params.d_inf);
            let mut config =
                RunConfig::new(ProblemSpec::Abs, OptimizerSpec::new(kind, params), budget);
            config.batch_size = batch;
            config.trace = true;
            config.out = Some(PathBuf::from("unused.csv"));
            config.x0 = Some(vec![1.0; problem.dim()]);
            let output = run_on(&config, problem.as_ref()).map_err(err)?;
            out.push((format!("{name}/{kind}"), output.traces, d_inf));
        }
    }
    Ok(out)
}

fn criterion_2() -> Outcome {
    let mut runs = 0usize;
    let mut checked =
        |label: &str, traces: &[StepTrace], d_inf: Option<f64>| -> Result<(), String> {
            for report in [
                check_monotone_and_cap(traces, d_inf).map_err(err)?,
                check_reparam_invariance(traces, d_inf).map_err(err)?,
            ] {
                require(&report).map_err(|e| format!("{label}: {e}"))?;
            }
            runs += 1;
            Ok(())
        };
    for (c, (kind, params, domain, d_inf)) in fuzz_configs().into_iter().enumerate() {
        let traces = fuzz_traces(kind, &params, &domain, 16, 2_000, 77 + c as u64).map_err(err)?;
        checked(&format!("fuzz/{kind}#{c}"), &traces, d_inf)?;
    }
    for (label, traces, d_inf) in benchmark_traces()? {
        checked(&label, &traces, d_inf)?;
    }
    Ok(format!(
        "{runs} runs monotone, capped and reparameterization-invariant"
    ))
}

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let problem = quadratic(vec![1.0, 0.1, 10.0, 0.01, 3.0], 0.0).map_err(err)?;
    let x0 = [1.0, -2.0, 0.5, 4.0, -0.25];
    let report = check_adagrad_equivalence(&problem, &x0, 1000, 0.7).map_err(err)?;
    require(&report)?;
    within(Duration::from_secs(1), started)?;
    Ok(format!(
        "max relative deviation {:e}",
        report.worst_violation.max(0.0)
    ))
}

fn criterion_4() -> Outcome {
    let fixture = check_alpha_identity_rho1(&[1.0, -1.0, 1.0]);
    if fixture.lhs != 5.0 || fixture.rhs != 5.0 {
        return Err(format!(
            "fixture gave lhs={} rhs={}",
            fixture.lhs, fixture.rhs
        ));
    }
    let mut rng = rng_for(4, &[]);
    let params = HyperParams::default().with_rho(1.0);
    let (mut accepted, mut attempts) = (0usize, 0usize);
    while accepted < 100 {
        attempts += 1;
        if attempts > 100_000 {
            return Err(format!("only {accepted} sequences with nonnegative v"));
        }
        let len = rng.gen_range(1..=12);
        let gs: Vec<f64> = (0..len).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let identity = check_alpha_identity_rho1(&gs);
        if identity.negative_at.is_some() {
            continue;
        }
        accepted += 1;
        if !identity.holds() {
            return Err(format!("{gs:?}: lhs={} rhs={}", identity.lhs, identity.rhs));
        }
        // The optimizer's accumulator must equal the same sum.
        let mut state = OptimizerState::scalar(vec![0.0], 1.0);
        for g in &gs {
            step_scalar(&mut state, &[*g], &params).map_err(err)?;
        }
        let alpha = state.coords[0].alpha;
        if (alpha - identity.rhs).abs() > STEP_TOL * (1.0 + identity.lhs.abs()) {
            return Err(format!("{gs:?}: alpha={alpha} rhs={}", identity.rhs));
        }
    }
    Ok(format!(
        "fixture 5 = 5, {accepted} of {attempts} sequences admissible"
    ))
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let problem = abs_value();
    let params = HyperParams::default().with_gamma0(1e-3).with_rho(2.0);
    let mut finals = Vec::new();
    let mut increased = Vec::new();
    for kind in [OptimizerKind::GradaGrad, OptimizerKind::AdaGrad] {
        let mut opt = OptimizerSpec::new(kind, params.clone())
            .build(vec![1.0], Domain::Unconstrained)
            .map_err(err)?;
        let mut seeds = SeedState::new(0);
        let mut last_lr = None;
        let mut first_increase = None;
        for k in 1..=500u64 {
            let g = problem.grad_sample(opt.x(), &mut seeds);
            opt.step(&g).map_err(err)?;
            let lr = opt.lr_stats().ainv_mean;
            if let Some(prev) = last_lr {
                if lr > prev && first_increase.is_none() {
                    first_increase = Some(k);
                }
            }
            last_lr = Some(lr);
        }
        finals.push(problem.loss_full(opt.x()));
        increased.push(first_increase);
    }
    within(Duration::from_secs(1), started)?;
    let (grada, ada) = (finals[0], finals[1]);
    if grada.is_nan() || grada * 10.0 > ada {
        return Err(format!("suboptimality {grada:e} vs AdaGrad {ada:e}"));
    }
    match (increased[0], increased[1]) {
        (Some(k), None) if k <= 50 => Ok(format!(
            "suboptimality {grada:.3e} vs {ada:.3e} ({:.0}x), step size first grows at step {k}",
            ada / grada
        )),
        other => Err(format!(
            "step-size increases (GradaGrad, AdaGrad) = {other:?}"
        )),
    }
}

fn criterion_6() -> Outcome {
    let started = Instant::now();
    let problem = quadratic(vec![1.0, 0.5, 2.0, 0.25], 1.0).map_err(err)?;
    let spec = OptimizerSpec::gradagrad(HyperParams::default());
    let report = check_convergence_trend(&problem, &spec, &[1.0; 4], 2000, TREND_FACTOR, 10, 7)
        .map_err(err)?;
    require(&report)?;
    within(Duration::from_secs(30), started)?;
    Ok(report.details)
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let mut lines = Vec::new();
    for file in ["two_blobs.libsvm", "sparse_planted.libsvm"] {
        let path = fixtures().join(file);
        let data = Arc::new(load_binary_dataset(&path, LabelRule::Auto).map_err(err)?);
        if data.len() > 1000 {
            return Err(format!("{file} has {} examples", data.len()));
        }
        let problem = logistic_regression(data, 16).map_err(err)?;
        let config = |kind| {
            let mut c = RunConfig::new(
                ProblemSpec::Logistic {
                    dataset: path.clone(),
                },
                OptimizerSpec::new(kind, HyperParams::default()),
                Budget::Epochs(30),
            );
            c.batch_size = 16;
            c.seeds = 10;
            c.seed = 2022;
            c
        };
        let grada = run_on(&config(OptimizerKind::GradaGrad), &problem).map_err(err)?;
        let grada_acc = grada.record.trailing_accuracy(10).ok_or("no evaluations")?;
        let spec = GridSpec {
            param: GridParam::Gamma0,
            values: powers_of_two(-10, 4),
        };
        let tuned = grid(&config(OptimizerKind::AdaGrad), &spec, &problem).map_err(err)?;
        let best = tuned.best();
        let gap = 100.0 * (best.metric - grada_acc);
        lines.push(format!(
            "{file}: {:.2}% vs AdaGrad(lr={}) {:.2}%",
            100.0 * grada_acc,
            best.value,
            100.0 * best.metric
        ));
        if gap > 2.0 {
            return Err(format!("{} (gap {gap:.2} pp)", lines.join("; ")));
        }
    }
    within(Duration::from_secs(300), started)?;
    Ok(lines.join("; "))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checks = 0usize;
    let mut rng = rng_for(8, &[]);
    let mut probe = |problem: &dyn Problem, scale: f64| -> Result<(), String> {
        for _ in 0..5 {
            let point: Vec<f64> = (0..problem.dim())
                .map(|_| rng.gen_range(-scale..scale))
                .collect();
            let report = check_finite_diff(problem, &point, FINITE_DIFF_H).map_err(err)?;
            require(&report).map_err(|e| format!("{}: {e}", problem.name()))?;
            worst = worst.max(report.worst_violation);
            checks += 1;
        }
        Ok(())
    };
    probe(
        &quadratic(vec![1.0, 0.5, 2.0, 0.25, 10.0], 0.0).map_err(err)?,
        3.0,
    )?;
    probe(&quadratic(vec![0.01, 100.0], 1.0).map_err(err)?, 3.0)?;
    for file in [
        "two_blobs.libsvm",
        "sparse_planted.libsvm",
        "three_class.libsvm",
    ] {
        let data =
            Arc::new(load_binary_dataset(fixtures().join(file), LabelRule::Auto).map_err(err)?);
        probe(&logistic_regression(data, 8).map_err(err)?, 1.0)?;
    }
    Ok(format!("{checks} points, max relative error {worst:e}"))
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gradagrad-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let blobs = fixtures().join("two_blobs.libsvm");
    let blobs = blobs.to_str().ok_or("non-UTF-8 path")?;
    let mut outputs = Vec::new();
    for attempt in 0..2 {
        let out = dir.path().join(format!("run{attempt}.csv"));
        let result = cli(&[
            "run",
            "--problem",
            "logistic",
            "--dataset",
            blobs,
            "--epochs",
            "3",
            "--batch-size",
            "8",
            "--seed",
            "11",
            "--seeds",
            "4",
            "--trace",
            "--out",
            out.to_str().ok_or("path")?,
        ]);
        if !result.status.success() {
            return Err(format!(
                "run failed: {}",
                String::from_utf8_lossy(&result.stderr)
            ));
        }
        let record = std::fs::read(&out).map_err(|e| e.to_string())?;
        let trace = std::fs::read(dir.path().join(format!("run{attempt}.trace.csv")))
            .map_err(|e| e.to_string())?;
        outputs.push((record, trace));
    }
    if outputs[0] != outputs[1] {
        return Err("identical seeds produced different CSVs".into());
    }

    for file in [
        "two_blobs.libsvm",
        "sparse_planted.libsvm",
        "three_class.libsvm",
    ] {
        let first = load_dataset(fixtures().join(file)).map_err(err)?;
        let mut text = Vec::new();
        write_libsvm(&first, &mut text).map_err(|e| e.to_string())?;
        let second = parse_libsvm_str(std::str::from_utf8(&text).map_err(|e| e.to_string())?)
            .map_err(err)?;
        if first.examples != second.examples || first.dim != second.dim {
            return Err(format!("{file} changed in a LIBSVM round trip"));
        }
    }

    let malformed = fixtures().join("malformed.libsvm");
    let result = cli(&[
        "run",
        "--problem",
        "logistic",
        "--dataset",
        malformed.to_str().ok_or("path")?,
        "--steps",
        "5",
    ]);
    let stderr = String::from_utf8_lossy(&result.stderr);
    if result.status.code() != Some(2) || !stderr.contains("line 4") {
        return Err(format!(
            "malformed input gave {:?}: {stderr}",
            result.status.code()
        ));
    }
    Ok(format!(
        "{} + {} byte CSVs reproduced, 3 fixtures round-trip, malformed input -> exit 2 at line 4",
        outputs[0].0.len(),
        outputs[0].1.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("errnegativity invariant", criterion_1),
        ("monotonicity and reparameterization", criterion_2),
        ("rho=0 AdaGrad equivalence", criterion_3),
        ("rho=1 accumulator identity", criterion_4),
        ("|x| with a poor initial learning rate", criterion_5),
        ("averaged-iterate convergence trend", criterion_6),
        ("untuned accuracy on LIBSVM fixtures", criterion_7),
        ("gradient oracles vs finite differences", criterion_8),
        ("determinism and file formats", criterion_9),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = criterion();
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name} [{elapsed:.2?}]: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name} [{elapsed:.2?}]: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

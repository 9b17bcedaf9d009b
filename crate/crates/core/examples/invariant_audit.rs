//! Fuzzes GradaGrad with adversarial gradient sequences and audits every
//! step against the trace invariants.
//!
//!     cargo run --release --example invariant_audit [steps]

use gradagrad::optim::{Domain, HyperParams, OptimizerKind};
use gradagrad::verify::{
    check_errnegativity, check_monotone_and_cap, check_reparam_invariance, fuzz_traces,
};

fn main() -> gradagrad::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5000);
    let dim = 12;
    let configs = [
        (
            "theory",
            OptimizerKind::GradaGrad,
            HyperParams::theory(0.5, 2.0, 0.0, 3.0, 50.0),
            Domain::Unconstrained,
        ),
        (
            "practical",
            OptimizerKind::GradaGrad,
            HyperParams::default(),
            Domain::Unconstrained,
        ),
        (
            "momentum",
            OptimizerKind::GradaGrad,
            HyperParams::default().with_beta(0.9),
            Domain::Unconstrained,
        ),
        (
            "box",
            OptimizerKind::GradaGrad,
            HyperParams::theory(0.05, 1.5, 0.5, 10.0, 4.0),
            Domain::cube(dim, -2.0, 2.0)?,
        ),
        (
            "scalar-adaptive",
            OptimizerKind::GradaGradScalar,
            HyperParams::default().with_r_fixed(None),
            Domain::Unconstrained,
        ),
        (
            "scalar-r=1",
            OptimizerKind::GradaGradScalar,
            HyperParams::default(),
            Domain::Unconstrained,
        ),
    ];

    println!(
        "{:<16} {:<14} {:>6} {:>12}  details",
        "config", "check", "passed", "worst"
    );
    for (label, kind, params, domain) in configs {
        let traces = fuzz_traces(kind, &params, &domain, dim, steps, 42)?;
        let d_inf = (kind == OptimizerKind::GradaGrad).then_some(params.d_inf);
        for report in [
            check_errnegativity(&traces)?,
            check_monotone_and_cap(&traces, d_inf)?,
            check_reparam_invariance(&traces, d_inf)?,
        ] {
            println!(
                "{label:<16} {:<14} {:>6} {:>12.3e}  {}",
                report.name, report.passed, report.worst_violation, report.details
            );
        }
    }
    Ok(())
}

//! CSV layouts for run records, step traces, check reports and grid tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! runs produce byte-identical files and traces read back exactly. Missing
//! values are empty fields.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::optim::{Branch, CoordRecord, StepTrace};
use crate::verify::CheckReport;

use super::grid::GridResult;
use super::runner::RunRecord;

pub const RUN_RECORD_HEADER: [&str; 10] = [
    "step",
    "epoch",
    "loss",
    "accuracy",
    "gamma_mean",
    "gamma_max",
    "alpha_mean",
    "alpha_max",
    "ainv_mean",
    "subopt",
];

pub const TRACE_HEADER: [&str; 10] = [
    "k",
    "i",
    "g",
    "v_raw",
    "v_clipped",
    "branch",
    "r",
    "gamma",
    "alpha",
    "a",
];

pub const CHECK_HEADER: [&str; 7] = [
    "name",
    "passed",
    "worst_violation",
    "tolerance",
    "step",
    "coord",
    "details",
];

pub const GRID_HEADER: [&str; 6] = [
    "param",
    "value",
    "metric",
    "final_loss",
    "final_accuracy",
    "winner",
];

/// `{:?}` keeps full precision and switches to exponent form for very large
/// or small magnitudes.
fn real(v: f64) -> String {
    format!("{v:?}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_run_record<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_RECORD_HEADER)?;
    for row in &record.rows {
        w.write_record([
            row.step.to_string(),
            opt(row.epoch),
            real(row.loss),
            opt_real(row.accuracy),
            opt_real(row.lr.gamma_mean),
            opt_real(row.lr.gamma_max),
            opt_real(row.lr.alpha_mean),
            opt_real(row.lr.alpha_max),
            real(row.lr.ainv_mean),
            opt_real(row.subopt),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_traces<W: Write>(traces: &[StepTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in traces {
        for (i, c) in t.coords.iter().enumerate() {
            w.write_record([
                t.k.to_string(),
                i.to_string(),
                real(c.g),
                real(c.v_raw),
                real(c.v_clipped),
                c.branch.to_string(),
                opt_real(c.r),
                real(c.gamma),
                real(c.alpha),
                real(c.a),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a trace CSV. Columns are located by name; extra columns are
/// ignored. Rows of one step must be contiguous.
pub fn read_traces<R: Read>(input: R) -> Result<Vec<StepTrace>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let missing: Vec<&str> = TRACE_HEADER
        .iter()
        .copied()
        .filter(|name| !headers.iter().any(|h| h == *name))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "trace is missing column(s): {}",
            missing.join(", ")
        )));
    }
    let col: Vec<usize> = TRACE_HEADER
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .expect("checked above")
        })
        .collect();

    let mut traces: Vec<StepTrace> = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let field = |c: usize| rec.get(col[c]).unwrap_or("");
        let num = |c: usize| -> Result<f64> {
            field(c).parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!(
                    "column `{}`: invalid number `{}`",
                    TRACE_HEADER[c],
                    field(c)
                ),
            })
        };
        let k: u64 = field(0).parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid step `{}`", field(0)),
        })?;
        let branch: Branch = field(5).parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid branch `{}`", field(5)),
        })?;
        let r = if field(6).is_empty() {
            None
        } else {
            Some(num(6)?)
        };
        let record = CoordRecord {
            g: num(2)?,
            v_raw: num(3)?,
            v_clipped: num(4)?,
            branch,
            r,
            gamma: num(7)?,
            alpha: num(8)?,
            a: num(9)?,
        };
        match traces.last_mut() {
            Some(t) if t.k == k => t.coords.push(record),
            _ => traces.push(StepTrace {
                k,
                coords: vec![record],
                f_sample: None,
            }),
        }
    }
    Ok(traces)
}

pub fn write_check_reports<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHECK_HEADER)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.passed.to_string(),
            real(r.worst_violation),
            real(r.tolerance),
            opt(r.location.map(|l| l.0)),
            opt(r.location.map(|l| l.1)),
            r.details.clone(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_grid<W: Write>(grid: &GridResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for (i, p) in grid.points.iter().enumerate() {
        w.write_record([
            grid.param.as_str().to_string(),
            real(p.value),
            real(p.metric),
            real(p.final_loss),
            opt_real(p.final_accuracy),
            (i == grid.winner).to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{Domain, HyperParams, OptimizerKind};
    use crate::verify::fuzz_traces;
    use proptest::prelude::*;

    #[test]
    fn missing_columns_are_reported() {
        let text = "k,i,g,v_raw,branch,gamma,alpha\n0,0,1,1,init,1,1\n";
        match read_traces(text.as_bytes()) {
            Err(Error::Config(msg)) => {
                assert!(
                    msg.contains("v_clipped") && msg.contains(", r,") && msg.ends_with(", a"),
                    "{msg}"
                )
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_carry_line_numbers() {
        let text = "k,i,g,v_raw,v_clipped,branch,r,gamma,alpha,a\n0,0,1,1,1,init,,1,1,1\n1,0,x,1,1,positive,,1,2,1\n";
        match read_traces(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn traces_survive_csv(seed: u64, dim in 1usize..5) {
            let traces = fuzz_traces(
                OptimizerKind::GradaGrad,
                &HyperParams::default(),
                &Domain::Unconstrained,
                dim,
                40,
                seed,
            ).unwrap();
            let mut buf = Vec::new();
            write_traces(&traces, &mut buf).unwrap();
            let back = read_traces(buf.as_slice()).unwrap();
            prop_assert_eq!(back, traces);
        }
    }
}

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{Dataset, SparseExample};

/// Parses one `label idx:val idx:val ...` row. `line_no` is 1-based and only
/// used in error messages. Text after `#` is ignored.
pub fn parse_libsvm_line(line: &str, line_no: usize) -> Result<SparseExample> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let content = line.split('#').next().unwrap_or("");
    let mut tokens = content.split_whitespace();
    let label_tok = tokens.next().ok_or_else(|| err("empty line".into()))?;
    let label = parse_real(label_tok).ok_or_else(|| err(format!("invalid label `{label_tok}`")))?;

    let mut features: Vec<(u32, f64)> = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("malformed feature `{tok}`, expected index:value")))?;
        let idx: u32 = idx
            .parse()
            .map_err(|_| err(format!("invalid feature index `{idx}`")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based, found 0".into()));
        }
        let val = parse_real(val).ok_or_else(|| err(format!("invalid feature value `{val}`")))?;
        if let Some(&(prev, _)) = features.last() {
            if idx <= prev {
                return Err(err(format!(
                    "feature indices must be strictly increasing ({idx} after {prev})"
                )));
            }
        }
        features.push((idx, val));
    }
    Ok(SparseExample { label, features })
}

fn parse_real(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

/// Parses a whole LIBSVM document, skipping blank and comment lines.
pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    let examples = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !is_skipped(l))
        .map(|(i, l)| parse_libsvm_line(l, i + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(examples))
}

/// Reads a LIBSVM file with raw labels. See [`super::normalize_labels`].
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut examples = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !is_skipped(&line) {
            examples.push(parse_libsvm_line(&line, i + 1)?);
        }
    }
    Ok(Dataset::new(examples))
}

/// Writes `dataset` in LIBSVM text form. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    let mut line = String::new();
    for e in &dataset.examples {
        line.clear();
        write!(line, "{}", e.label).unwrap();
        for &(j, v) in &e.features {
            write!(line, " {j}:{v}").unwrap();
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

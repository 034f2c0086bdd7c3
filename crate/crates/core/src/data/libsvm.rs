//! LIBSVM sparse text format: `label index:value index:value ...` with
//! 1-based, strictly ascending indices.

use std::fmt::Write as _;
use std::path::Path;

use super::{normalize, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmDataset {
    pub samples: Vec<Sample>,
    pub dim: usize,
    /// Indices into `samples` whose feature vector was all zeros and could
    /// not be normalized.
    pub zero_rows: Vec<usize>,
}

pub fn parse_libsvm(path: &Path, dim_hint: Option<usize>) -> Result<LibsvmDataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm_str(&text, dim_hint).map_err(|e| match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            line,
            msg,
        },
        other => other,
    })
}

/// Parses LIBSVM text into dense, l2-normalized samples. Blank lines and
/// `#` comment lines are skipped.
pub fn parse_libsvm_str(text: &str, dim_hint: Option<usize>) -> Result<LibsvmDataset> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: None,
        line,
        msg,
    };
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0;
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(lineno, format!("bad label `{label_tok}`")))?;
        let mut entries = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_err(lineno, format!("bad feature index in `{tok}`")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("bad feature value in `{tok}`")))?;
            if idx <= last {
                return Err(parse_err(lineno, format!("index {idx} is not ascending")));
            }
            if let Some(d) = dim_hint.filter(|&d| idx > d) {
                return Err(parse_err(
                    lineno,
                    format!("index {idx} exceeds dimension {d}"),
                ));
            }
            last = idx;
            entries.push((idx, val));
        }
        max_index = max_index.max(last);
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = dim_hint.unwrap_or(max_index);
    if dim == 0 {
        return Err(Error::InvalidInput("dataset has no features".into()));
    }
    let mut zero_rows = Vec::new();
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, (label, entries))| {
            let mut features = vec![0.0; dim];
            for (idx, val) in entries {
                features[idx - 1] = val;
            }
            if !normalize(&mut features) {
                zero_rows.push(i);
            }
            Sample::new(features, label)
        })
        .collect();
    Ok(LibsvmDataset {
        samples,
        dim,
        zero_rows,
    })
}

/// Serializes samples back to LIBSVM text, omitting zero coordinates.
pub fn to_libsvm_string(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        write!(out, "{}", s.label).unwrap();
        for (i, v) in s.features.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            write!(out, " {}:{}", i + 1, v).unwrap();
        }
        out.push('\n');
    }
    out
}

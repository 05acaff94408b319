//! In-memory datasets and the LIBSVM text format.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use farsa_core::CsrMatrix;
use flate2::read::GzDecoder;
use serde::Serialize;

use crate::error::{FarsaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    None,
    /// Every column divided by its largest absolute entry.
    MaxAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    pub scaling: Scaling,
}

/// Sparse `N x n` design matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: CsrMatrix,
    pub labels: Vec<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn num_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    let idx: i64 = tok
        .parse()
        .map_err(|_| FarsaError::parse(line, format!("bad feature index {tok:?}")))?;
    if idx < 1 {
        return Err(FarsaError::parse(line, format!("feature index {idx} is below 1")));
    }
    Ok((idx - 1) as usize)
}

fn parse_value(tok: &str, line: usize, what: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(FarsaError::parse(line, format!("bad {what} {tok:?}"))),
    }
}

/// Reads `label idx:val idx:val ...` lines with 1-based, strictly
/// distinct indices. Blank lines and `#` comments are skipped. The column
/// count is the largest index seen, or `num_features` when given (indices
/// beyond it are rejected).
pub fn parse_libsvm<R: BufRead>(reader: R, num_features: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| FarsaError::parse(lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label) = tokens.next() else {
            continue;
        };
        let label = parse_value(label, lineno, "label")?;
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| FarsaError::parse(lineno, format!("malformed token {tok:?}")))?;
            let col = parse_index(idx, lineno)?;
            let val = parse_value(val, lineno, "value")?;
            if let Some(n) = num_features {
                if col >= n {
                    return Err(FarsaError::parse(
                        lineno,
                        format!("feature index {} exceeds dimension {n}", col + 1),
                    ));
                }
            }
            max_col = max_col.max(col + 1);
            row.push((col, val));
        }
        row.sort_by_key(|&(c, _)| c);
        if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(FarsaError::parse(
                lineno,
                format!("duplicate feature index {}", w[0].0 + 1),
            ));
        }
        rows.push(row);
        labels.push(label);
    }
    let ncols = num_features.unwrap_or(max_col);
    let features = CsrMatrix::from_rows(ncols, rows)?;
    Ok(Dataset {
        features,
        labels,
        provenance: Provenance {
            path: None,
            scaling: Scaling::None,
        },
    })
}

/// Opens `path`, decompressing when the name ends in `.gz`.
pub fn read_libsvm(path: &Path, num_features: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| FarsaError::io(path, e))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut ds = parse_libsvm(BufReader::new(reader), num_features)?;
    ds.provenance.path = Some(path.to_path_buf());
    Ok(ds)
}

/// Writes one line per sample with 1-based indices and shortest round-trip
/// number formatting.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    for (r, y) in ds.labels.iter().enumerate() {
        write!(out, "{y}")?;
        let (idx, vals) = ds.features.row(r);
        for (c, v) in idx.iter().zip(vals) {
            write!(out, " {}:{v}", c + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Divides each column by its largest absolute entry; all-zero columns are
/// left alone.
pub fn scale_features(ds: &Dataset) -> Dataset {
    let m = &ds.features;
    let mut max_abs = vec![0.0f64; m.ncols()];
    for (&c, &v) in m.indices().iter().zip(m.values()) {
        max_abs[c] = max_abs[c].max(v.abs());
    }
    let values: Vec<f64> = m
        .indices()
        .iter()
        .zip(m.values())
        .map(|(&c, &v)| if max_abs[c] > 0.0 { v / max_abs[c] } else { v })
        .collect();
    let features = CsrMatrix::new(
        m.nrows(),
        m.ncols(),
        m.indptr().to_vec(),
        m.indices().to_vec(),
        values,
    )
    .expect("same sparsity pattern");
    Dataset {
        features,
        labels: ds.labels.clone(),
        provenance: Provenance {
            path: ds.provenance.path.clone(),
            scaling: Scaling::MaxAbs,
        },
    }
}

/// Maps the smaller of exactly two label values to -1 and the larger to +1.
pub fn map_labels(ds: &Dataset) -> Result<Dataset> {
    let mut distinct: Vec<f64> = ds.labels.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(FarsaError::UnsupportedDataset(format!(
            "expected two distinct labels, found {}",
            distinct.len()
        )));
    }
    let low = distinct[0];
    let labels = ds
        .labels
        .iter()
        .map(|&y| if y == low { -1.0 } else { 1.0 })
        .collect();
    Ok(Dataset {
        labels,
        ..ds.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Dataset> {
        parse_libsvm(s.as_bytes(), None)
    }

    #[test]
    fn parses_basic_line() {
        let ds = parse("+1 1:0.5 3:-2\n").unwrap();
        assert_eq!(ds.labels, vec![1.0]);
        assert_eq!(ds.num_features(), 3);
        assert_eq!(ds.features.row(0), (&[0usize, 2][..], &[0.5, -2.0][..]));
    }

    #[test]
    fn empty_row_and_blank_lines() {
        let ds = parse("\n-1\n\n1 2:1\n").unwrap();
        assert_eq!(ds.labels, vec![-1.0, 1.0]);
        assert_eq!(ds.features.row(0).0.len(), 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1 2:abc", 1),
            ("1 1:1\n1 0:1", 2),
            ("1 1:1\n\n1 3:1 3:2", 3),
            ("1 2", 1),
            ("x 1:1", 1),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(FarsaError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn declared_dimension() {
        let ds = parse_libsvm("1 2:1\n".as_bytes(), Some(5)).unwrap();
        assert_eq!(ds.num_features(), 5);
        assert!(parse_libsvm("1 6:1\n".as_bytes(), Some(5)).is_err());
    }

    #[test]
    fn scaling_examples() {
        let ds = parse("1 1:2 2:0.5\n-1 1:-4 2:1\n1\n").unwrap();
        let s = scale_features(&ds);
        assert_eq!(s.features.values(), &[0.5, 0.5, -1.0, 1.0]);
        assert_eq!(scale_features(&s).features, s.features);
        let zero = parse("1 1:0\n-1\n").unwrap();
        assert_eq!(scale_features(&zero).features, zero.features);
    }

    #[test]
    fn label_mapping() {
        for (a, b) in [(0.0, 1.0), (1.0, 2.0), (-1.0, 1.0)] {
            let text = format!("{b} 1:1\n{a} 1:1\n{b}\n");
            let ds = map_labels(&parse(&text).unwrap()).unwrap();
            assert_eq!(ds.labels, vec![1.0, -1.0, 1.0]);
        }
        assert!(map_labels(&parse("1\n2\n3\n").unwrap()).is_err());
        assert!(map_labels(&parse("1\n1\n").unwrap()).is_err());
    }
}

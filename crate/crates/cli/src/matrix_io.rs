//! Reading and writing square matrices as dense CSV, `i,j,value` triplets or JSON.

use std::fmt::Write as _;
use std::path::Path;

use bingham::SymmetricMatrix;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    /// `d` rows of `d` comma-separated numbers.
    DenseCsv,
    /// Lines `i,j,value`, zero-indexed; missing entries are zero.
    TripletCsv,
    /// `{"dim": d, "entries": [[...], ...]}`.
    Json,
}

impl MatrixFormat {
    /// `.json` files are read as JSON, everything else as dense CSV.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::DenseCsv,
        }
    }
}

/// A parsed matrix and whether it had to be symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMatrix {
    pub matrix: SymmetricMatrix,
    pub symmetrized: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<ParsedMatrix, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text, format)
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<ParsedMatrix, CliError> {
    let (dim, data) = match format {
        MatrixFormat::DenseCsv => parse_dense(text)?,
        MatrixFormat::TripletCsv => parse_triplets(text)?,
        MatrixFormat::Json => parse_json(text)?,
    };
    if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!("matrix entries must be finite, found {bad}")));
    }
    let symmetrized = !SymmetricMatrix::is_exactly_symmetric(dim, &data);
    let matrix = SymmetricMatrix::from_row_major(dim, data).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(ParsedMatrix { matrix, symmetrized })
}

fn parse_number(field: &str, line: usize) -> Result<f64, CliError> {
    let field = field.trim();
    field.parse::<f64>().map_err(|_| CliError::Parse(format!("line {line}: {field:?} is not a number")))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_dense(text: &str) -> Result<(usize, Vec<f64>), CliError> {
    let mut rows = Vec::new();
    for (line, content) in content_lines(text) {
        let row = content.split(',').map(|f| parse_number(f, line)).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 {
        return Err(CliError::Parse("matrix file is empty".into()));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != dim) {
        return Err(CliError::Validation(format!(
            "matrix is not square: {dim} rows but a row has {} entries",
            row.len()
        )));
    }
    Ok((dim, rows.into_iter().flatten().collect()))
}

fn parse_triplets(text: &str) -> Result<(usize, Vec<f64>), CliError> {
    let mut triplets = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Parse(format!("line {line}: expected i,j,value")));
        }
        let index = |f: &str| {
            f.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Parse(format!("line {line}: {:?} is not an index", f.trim())))
        };
        triplets.push((index(fields[0])?, index(fields[1])?, parse_number(fields[2], line)?));
    }
    if triplets.is_empty() {
        return Err(CliError::Parse("matrix file is empty".into()));
    }
    let dim = triplets.iter().map(|(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let mut data = vec![0.0; dim * dim];
    let mut seen = vec![false; dim * dim];
    for (i, j, v) in triplets {
        if seen[i * dim + j] {
            return Err(CliError::Validation(format!("entry ({i}, {j}) is given twice")));
        }
        seen[i * dim + j] = true;
        data[i * dim + j] = v;
    }
    // an entry given on one side only stands for both
    for i in 0..dim {
        for j in 0..dim {
            if seen[i * dim + j] && !seen[j * dim + i] {
                data[j * dim + i] = data[i * dim + j];
            }
        }
    }
    Ok((dim, data))
}

fn parse_json(text: &str) -> Result<(usize, Vec<f64>), CliError> {
    let parsed: JsonMatrix =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid matrix JSON: {e}")))?;
    if parsed.dim == 0 {
        return Err(CliError::Validation("matrix dimension must be at least 1".into()));
    }
    if parsed.entries.len() != parsed.dim || parsed.entries.iter().any(|r| r.len() != parsed.dim) {
        return Err(CliError::Validation(format!("entries do not form a {0}x{0} matrix", parsed.dim)));
    }
    Ok((parsed.dim, parsed.entries.into_iter().flatten().collect()))
}

/// Serializes `m` so that [`parse_matrix`] reads it back bit for bit.
pub fn format_matrix(m: &SymmetricMatrix, format: MatrixFormat) -> String {
    let d = m.dim();
    let mut out = String::new();
    match format {
        MatrixFormat::DenseCsv => {
            for row in m.rows() {
                let fields: Vec<String> = row.iter().map(f64::to_string).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        MatrixFormat::TripletCsv => {
            // diagonal always written so the dimension survives; zero off-diagonals skipped
            for i in 0..d {
                for j in 0..d {
                    let v = m.get(i, j);
                    if i == j || v.to_bits() != 0 {
                        writeln!(out, "{i},{j},{v}").expect("writing to a String");
                    }
                }
            }
        }
        MatrixFormat::Json => {
            let json = JsonMatrix { dim: d, entries: m.rows() };
            out = serde_json::to_string(&json).expect("finite matrix serializes");
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_csv_with_blank_lines_and_spaces() {
        let p = parse_matrix("1, 2\n\n2, -3.5\n", MatrixFormat::DenseCsv).unwrap();
        assert_eq!(p.matrix.rows(), vec![vec![1.0, 2.0], vec![2.0, -3.5]]);
        assert!(!p.symmetrized);
    }

    #[test]
    fn asymmetric_input_is_averaged() {
        let p = parse_matrix("0,1\n3,0\n", MatrixFormat::DenseCsv).unwrap();
        assert!(p.symmetrized);
        assert_eq!(p.matrix.get(0, 1), 2.0);
    }

    #[test]
    fn one_sided_triplet_is_mirrored() {
        let p = parse_matrix("0,0,1\n0,2,4\n", MatrixFormat::TripletCsv).unwrap();
        assert_eq!(p.matrix.dim(), 3);
        assert_eq!(p.matrix.get(2, 0), 4.0);
        assert!(!p.symmetrized);
    }

    #[test]
    fn error_classes() {
        assert!(matches!(parse_matrix("1,x\n", MatrixFormat::DenseCsv), Err(CliError::Parse(_))));
        assert!(matches!(parse_matrix("", MatrixFormat::DenseCsv), Err(CliError::Parse(_))));
        assert!(matches!(parse_matrix("1,2\n", MatrixFormat::DenseCsv), Err(CliError::Validation(_))));
        assert!(matches!(parse_matrix("1,inf\n2,3\n", MatrixFormat::DenseCsv), Err(CliError::Validation(_))));
        assert!(matches!(parse_matrix("0,1\n", MatrixFormat::TripletCsv), Err(CliError::Parse(_))));
        assert!(matches!(parse_matrix("0,0,1\n0,0,2\n", MatrixFormat::TripletCsv), Err(CliError::Validation(_))));
        assert!(matches!(parse_matrix("{\"dim\":2}", MatrixFormat::Json), Err(CliError::Parse(_))));
        assert!(matches!(
            parse_matrix("{\"dim\":2,\"entries\":[[1]]}", MatrixFormat::Json),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn formats_round_trip_exactly() {
        let m = SymmetricMatrix::from_rows(&[
            vec![0.1, -2.5e-300, 0.0],
            vec![-2.5e-300, 1.0 / 3.0, 7.0],
            vec![0.0, 7.0, 0.0],
        ])
        .unwrap();
        for format in [MatrixFormat::DenseCsv, MatrixFormat::TripletCsv, MatrixFormat::Json] {
            let back = parse_matrix(&format_matrix(&m, format), format).unwrap();
            let same = back.matrix.as_slice().iter().zip(m.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "{format:?}");
        }
    }

    #[test]
    fn format_inference() {
        assert_eq!(MatrixFormat::infer(Path::new("a.JSON")), MatrixFormat::Json);
        assert_eq!(MatrixFormat::infer(Path::new("a.csv")), MatrixFormat::DenseCsv);
    }
}

//! Line-oriented dataset files.
//!
//! Layout: a `points <n>` header, the point ids (one per line, in index
//! order), then either a closed-form recipe line naming a generator family
//! or an explicit lower-triangular distance matrix with exact `m*2^e`
//! entries, row i listing d(i,0) .. d(i,i-1).

use std::fmt;

use crate::datasets::{generate_bichromatic, generate_tall_imbalanced, BichromaticDataset, DatasetError, TallDataset};
use crate::dyadic::Dyadic;
use crate::metric::{FiniteMetric, MetricSpace, PointId};

/// Dataset parsed back from a file.
pub enum LoadedDataset {
    Tall(TallDataset),
    Bichromatic(BichromaticDataset),
    Matrix(FiniteMetric<Dyadic>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dataset format error on line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

impl From<DatasetError> for FormatError {
    fn from(e: DatasetError) -> Self {
        FormatError { line: 0, message: e.to_string() }
    }
}

/// Writes a closed-form dataset file for a generator family.
pub fn write_closed_form(family: &str, m: u32, n: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("points {n}\n"));
    for id in 0..n {
        out.push_str(&format!("{id}\n"));
    }
    out.push_str(&format!("metric closed-form {family} m {m}\n"));
    out
}

/// Writes any metric space as an explicit matrix file with exact entries.
pub fn write_matrix<S: MetricSpace<Dist = Dyadic>>(space: &S) -> String {
    let n = space.len();
    let mut out = String::new();
    out.push_str(&format!("points {n}\n"));
    for id in 0..n {
        out.push_str(&format!("{id}\n"));
    }
    out.push_str("metric matrix\n");
    for i in 1..n {
        let row: Vec<String> = (0..i).map(|j| space.distance(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a dataset file written by [`write_closed_form`] or
/// [`write_matrix`].
pub fn read_dataset(text: &str) -> Result<LoadedDataset, FormatError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let err = |line: usize, message: &str| FormatError { line, message: message.to_string() };

    let mut cursor = lines.iter();
    let &(lineno, header) = cursor.next().ok_or_else(|| err(0, "empty file"))?;
    let n: usize = header
        .strip_prefix("points ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(lineno, "expected `points <n>`"))?;

    for expected in 0..n {
        let &(lineno, idline) = cursor.next().ok_or_else(|| err(0, "missing point ids"))?;
        let id: usize = idline.parse().map_err(|_| err(lineno, "bad point id"))?;
        if id != expected {
            return Err(err(lineno, &format!("point ids must be 0..n in order, got {id}")));
        }
    }

    let &(lineno, metric_line) = cursor.next().ok_or_else(|| err(0, "missing metric line"))?;
    if let Some(rest) = metric_line.strip_prefix("metric closed-form ") {
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.len() != 3 || tokens[1] != "m" {
            return Err(err(lineno, "expected `metric closed-form <family> m <int>`"));
        }
        let m: u32 = tokens[2].parse().map_err(|_| err(lineno, "bad m"))?;
        return match tokens[0] {
            "tall-imbalanced" => {
                let ds = generate_tall_imbalanced(m)?;
                if ds.space.len() != n {
                    return Err(err(lineno, &format!("family has {} points, header says {n}", ds.space.len())));
                }
                Ok(LoadedDataset::Tall(ds))
            }
            "bichromatic" => {
                let ds = generate_bichromatic(m)?;
                if ds.space.len() != n {
                    return Err(err(lineno, &format!("family has {} points, header says {n}", ds.space.len())));
                }
                Ok(LoadedDataset::Bichromatic(ds))
            }
            other => Err(err(lineno, &format!("unknown family {other:?}"))),
        };
    }
    if metric_line != "metric matrix" {
        return Err(err(lineno, "expected `metric matrix` or `metric closed-form ...`"));
    }

    let mut entries: Vec<Vec<Dyadic>> = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let &(lineno, row) = cursor.next().ok_or_else(|| err(0, &format!("missing matrix row {i}")))?;
        let cells: Vec<&str> = row.split_whitespace().collect();
        if cells.len() != i {
            return Err(err(lineno, &format!("row {i} needs {i} entries, got {}", cells.len())));
        }
        let mut parsed = Vec::with_capacity(i);
        for cell in cells {
            parsed.push(cell.parse::<Dyadic>().map_err(|e| err(lineno, &e.to_string()))?);
        }
        entries.push(parsed);
    }
    if cursor.next().is_some() {
        return Err(err(0, "trailing content after matrix"));
    }
    let matrix = FiniteMetric::from_fn(n, |i: PointId, j: PointId| entries[i - 1][j].clone());
    Ok(LoadedDataset::Matrix(matrix))
}

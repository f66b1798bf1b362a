//! Finite metric spaces: validation, rescaling, restriction and ingestion.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack for the triangle inequality, in units of the largest distance.
pub const DEFAULT_METRIC_TOLERANCE: f64 = 1e-9;

/// A validated finite metric space. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    dist: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl MetricSpace {
    /// Validates a square distance matrix. `tolerance` is the triangle-inequality
    /// slack relative to the largest distance.
    pub fn from_distance_matrix(matrix: &DMatrix<f64>, tolerance: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let n = rows;
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        for i in 0..n {
            for j in 0..n {
                if !matrix[(i, j)].is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        let max_dist = matrix.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let slack = tolerance * max_dist;
        for i in 0..n {
            if matrix[(i, i)] != 0.0 {
                return Err(Error::NonzeroDiagonal { i });
            }
            for j in (i + 1)..n {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > slack {
                    return Err(Error::AsymmetricInput { i, j });
                }
                if a < 0.0 || b < 0.0 {
                    return Err(Error::NegativeDistance { i, j });
                }
                if a == 0.0 || b == 0.0 {
                    return Err(Error::ZeroOffDiagonal { i, j });
                }
            }
        }
        let dist = DMatrix::from_fn(n, n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
        check_triangle(&dist, slack)?;
        Ok(Self { dist, labels: None })
    }

    pub fn from_rows(rows: &[Vec<f64>], tolerance: f64) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_distance_matrix(&m, tolerance)
    }

    /// Euclidean distances between coordinate vectors. Such spaces are of
    /// negative type, so every rescaling is positive definite.
    pub fn from_points_euclidean(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if let Some(j) = p.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { i: index, j });
            }
        }
        let n = points.len();
        let mut dist = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d == 0.0 {
                    return Err(Error::DuplicatePoint { i, j });
                }
                dist[(i, j)] = d;
                dist[(j, i)] = d;
            }
        }
        let max_dist = dist.max();
        check_triangle(&dist, DEFAULT_METRIC_TOLERANCE * max_dist)?;
        Ok(Self { dist, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Parse(format!(
                "{} labels given for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    /// Always false: a validated space has at least one point.
    pub fn is_empty(&self) -> bool {
        self.dist.nrows() == 0
    }

    pub fn dist(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Smallest distance between distinct points, `None` for a single point.
    pub fn min_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist[(i, j)];
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.max()
    }

    /// The space `tX` with every distance multiplied by `t`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveScale(t));
        }
        Ok(Self {
            dist: &self.dist * t,
            labels: self.labels.clone(),
        })
    }

    /// The metric subspace on `subset`; its distance matrix is a principal submatrix.
    pub fn restrict(&self, subset: &SubsetSelector) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        subset.check_range(self.len())?;
        let idx = subset.members();
        Ok(Self {
            dist: crate::linalg::principal_submatrix(&self.dist, idx),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i].clone()).collect()),
        })
    }

    /// Reads either format accepted by [`parse_input`].
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        parse_input(&text)
    }
}

fn check_triangle(dist: &DMatrix<f64>, slack: f64) -> Result<()> {
    let n = dist.nrows();
    for i in 0..n {
        for k in (i + 1)..n {
            let direct = dist[(i, k)];
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let excess = direct - (dist[(i, j)] + dist[(j, k)]);
                if excess > slack {
                    return Err(Error::TriangleViolation { i, j, k, excess });
                }
            }
        }
    }
    Ok(())
}

/// A sorted, duplicate-free set of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetSelector {
    members: Vec<usize>,
}

impl SubsetSelector {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn full(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    /// Subset encoded by the set bits of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self {
            members: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self, n: usize) -> Self {
        Self {
            members: (0..n).filter(|i| !self.contains(*i)).collect(),
        }
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.members.last() {
            Some(&index) if index >= n => Err(Error::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonInput {
    Points {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Dist {
        dist: Vec<Vec<f64>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

/// Parses a distance-matrix CSV (`n` rows of `n` comma-separated reals).
pub fn parse_csv(text: &str) -> Result<MetricSpace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| parse_finite(field, line, col))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptySpace);
    }
    MetricSpace::from_rows(&rows, DEFAULT_METRIC_TOLERANCE)
}

fn parse_finite(field: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| {
        Error::Parse(format!(
            "row {}, column {}: `{field}` is not a number",
            row + 1,
            col + 1
        ))
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { i: row, j: col })
    }
}

/// Parses `{"points": [...]}` or `{"dist": [...], "labels": [...]}`.
pub fn parse_json(text: &str) -> Result<MetricSpace> {
    let input: JsonInput = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (space, labels) = match input {
        JsonInput::Points { points, labels } => (MetricSpace::from_points_euclidean(&points)?, labels),
        JsonInput::Dist { dist, labels } => (MetricSpace::from_rows(&dist, DEFAULT_METRIC_TOLERANCE)?, labels),
    };
    match labels {
        Some(l) => space.with_labels(l),
        None => Ok(space),
    }
}

/// JSON when the first non-blank character is `{`, CSV otherwise.
pub fn parse_input(text: &str) -> Result<MetricSpace> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

//! Similarity matrices, weightings, magnitude and definiteness classification.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{max_abs_vec, ones, sorted_eigenvalues, sorted_symmetric_eigen};
use crate::metric::MetricSpace;

/// Eigenvalues within `PD_RELATIVE_CUTOFF * max(1, λ_max)` of zero count as zero.
pub const PD_RELATIVE_CUTOFF: f64 = 1e-10;

/// Largest admissible `‖Zw − 1‖_∞` for a returned weighting.
pub const WEIGHTING_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Definiteness {
    PositiveDefinite,
    InvertibleIndefinite,
    Singular,
}

impl Definiteness {
    pub fn is_positive_definite(self) -> bool {
        self == Definiteness::PositiveDefinite
    }

    pub fn is_invertible(self) -> bool {
        self != Definiteness::Singular
    }
}

/// `z_ij = exp(−d(i,j))`.
pub fn similarity_matrix(space: &MetricSpace) -> DMatrix<f64> {
    space.dist().map(|d| (-d).exp())
}

pub fn pd_threshold(eigenvalues: &[f64], relative: f64) -> f64 {
    let lambda_max = eigenvalues.first().copied().unwrap_or(0.0);
    relative * lambda_max.max(1.0)
}

/// Classifies from eigenvalues sorted in descending order.
pub fn classify_eigenvalues(eigenvalues: &[f64], relative: f64) -> Definiteness {
    let eps = pd_threshold(eigenvalues, relative);
    if eigenvalues.iter().any(|l| l.abs() <= eps) {
        Definiteness::Singular
    } else if eigenvalues.last().is_some_and(|&l| l > eps) {
        Definiteness::PositiveDefinite
    } else {
        Definiteness::InvertibleIndefinite
    }
}

pub fn classify_definiteness(z: &DMatrix<f64>) -> Definiteness {
    classify_definiteness_with(z, PD_RELATIVE_CUTOFF)
}

pub fn classify_definiteness_with(z: &DMatrix<f64>, relative: f64) -> Definiteness {
    classify_eigenvalues(&sorted_eigenvalues(z), relative)
}

/// A solution of `Zw = 1`, or `None` when the system is inconsistent.
pub fn weighting(z: &DMatrix<f64>) -> Option<DVector<f64>> {
    weighting_with(z, PD_RELATIVE_CUTOFF)
}

pub fn weighting_with(z: &DMatrix<f64>, relative: f64) -> Option<DVector<f64>> {
    let eigenvalues = sorted_eigenvalues(z);
    solve_weighting(z, &eigenvalues, relative)
}

fn solve_weighting(z: &DMatrix<f64>, eigenvalues: &[f64], relative: f64) -> Option<DVector<f64>> {
    let n = z.nrows();
    let rhs = ones(n);
    if classify_eigenvalues(eigenvalues, relative).is_positive_definite() {
        if let Some(chol) = Cholesky::new(z.clone()) {
            return Some(chol.solve(&rhs));
        }
    }
    // minimum-norm solution over the numerically nonzero eigenspaces
    let eps = pd_threshold(eigenvalues, relative);
    let (values, vectors) = sorted_symmetric_eigen(z);
    let mut w = DVector::zeros(n);
    for k in 0..n {
        if values[k].abs() > eps {
            let v = vectors.column(k);
            w += v * (v.sum() / values[k]);
        }
    }
    let residual = max_abs_vec(&(z * &w - rhs));
    (residual <= WEIGHTING_RESIDUAL_TOL).then_some(w)
}

/// `|X| = Σ w_i`, or `None` when no weighting exists.
pub fn magnitude(space: &MetricSpace) -> Option<f64> {
    weighting(&similarity_matrix(space)).map(|w| w.sum())
}

/// Similarity matrix of a space together with its spectrum, weighting and magnitude.
#[derive(Debug, Clone)]
pub struct SimilarityData {
    z: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    weighting: Option<DVector<f64>>,
    magnitude: Option<f64>,
    definiteness: Definiteness,
}

impl SimilarityData {
    pub fn new(space: &MetricSpace) -> Self {
        Self::from_matrix(similarity_matrix(space), PD_RELATIVE_CUTOFF)
    }

    pub fn with_pd_cutoff(space: &MetricSpace, relative: f64) -> Self {
        Self::from_matrix(similarity_matrix(space), relative)
    }

    pub fn from_matrix(z: DMatrix<f64>, relative: f64) -> Self {
        let eigenvalues = sorted_eigenvalues(&z);
        let definiteness = classify_eigenvalues(&eigenvalues, relative);
        let weighting = solve_weighting(&z, &eigenvalues, relative);
        let magnitude = weighting.as_ref().map(|w| w.sum());
        Self {
            z,
            eigenvalues,
            weighting,
            magnitude,
            definiteness,
        }
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.nrows() == 0
    }

    /// Eigenvalues of `Z`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weighting(&self) -> Option<&DVector<f64>> {
        self.weighting.as_ref()
    }

    pub fn magnitude(&self) -> Option<f64> {
        self.magnitude
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    /// `‖Zw − 1‖_∞` of the stored weighting.
    pub fn residual(&self) -> Option<f64> {
        self.weighting
            .as_ref()
            .map(|w| max_abs_vec(&(&self.z * w - ones(self.len()))))
    }
}

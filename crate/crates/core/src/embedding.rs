//! The similarity embedding and the circumradius of its simplex.
//!
//! For a positive definite space the centered similarity matrix
//! `K = ½ (I − 11ᵀ/n) Z (I − 11ᵀ/n)` is the Gram matrix of a simplex `S`
//! whose squared edge lengths are `1 − z_ij`. The circumradius `R` of that
//! simplex determines the magnitude through `|X| = 1 / (1 − 2R²)`.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ones, principal_submatrix, sorted_symmetric_eigen, to_rows};
use crate::metric::{MetricSpace, SubsetSelector};
use crate::similarity::{classify_definiteness, similarity_matrix, SimilarityData};

/// Smallest-to-largest singular value ratio below which edge vectors are dependent.
pub const DEGENERATE_SIMPLEX_RATIO: f64 = 1e-12;

/// `½ (I − 11ᵀ/n) Z (I − 11ᵀ/n)`.
pub fn centered_similarity(z: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let nf = n as f64;
    let row_means: Vec<f64> = z.row_iter().map(|r| r.sum() / nf).collect();
    let col_means: Vec<f64> = z.column_iter().map(|c| c.sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let k = DMatrix::from_fn(n, n, |i, j| 0.5 * (z[(i, j)] - row_means[i] - col_means[j] + grand));
    (&k + k.transpose()) * 0.5
}

/// Embedded simplex of a positive definite space.
#[derive(Debug, Clone)]
pub struct EmbeddingData {
    k: DMatrix<f64>,
    sqrt_k: DMatrix<f64>,
    circumradius: f64,
    circumcenter: DVector<f64>,
    mu: Vec<f64>,
}

impl EmbeddingData {
    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// `(n−1) × n` factor with `sqrt_kᵀ sqrt_k = K`; column `i` is `φ(i)`.
    pub fn sqrt_k(&self) -> &DMatrix<f64> {
        &self.sqrt_k
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.sqrt_k.column(i).into_owned()
    }

    pub fn points(&self) -> Vec<DVector<f64>> {
        (0..self.sqrt_k.ncols()).map(|i| self.point(i)).collect()
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Barycentric coordinates of the circumcenter; equal to `w / |X|`.
    pub fn circumcenter_barycentric(&self) -> &DVector<f64> {
        &self.circumcenter
    }

    /// Nonzero eigenvalues of `K`, descending.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `Gram(i, j) = ⟨φ(i), φ(j)⟩`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.sqrt_k.transpose() * &self.sqrt_k
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        (self.sqrt_k.column(i) - self.sqrt_k.column(j)).norm_squared()
    }

    pub fn export(&self) -> EmbeddingExport {
        EmbeddingExport {
            points: to_rows(&self.sqrt_k.transpose()),
            circumradius: self.circumradius,
            circumcenter_barycentric: self.circumcenter.iter().copied().collect(),
        }
    }
}

/// JSON shape of an exported embedding.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingExport {
    pub points: Vec<Vec<f64>>,
    pub circumradius: f64,
    pub circumcenter_barycentric: Vec<f64>,
}

/// Similarity embedding from the eigendecomposition of `K`: the rows of
/// `sqrt_k` are the `n − 1` leading eigenvectors scaled by `√μ`.
pub fn similarity_embedding(space: &MetricSpace) -> Result<EmbeddingData> {
    let z = similarity_matrix(space);
    let (circumradius, circumcenter) = circumradius_equilibrium(&z)?;
    let n = z.nrows();
    let k = centered_similarity(&z);
    let (values, vectors) = sorted_symmetric_eigen(&k);
    let mut sqrt_k = DMatrix::zeros(n - 1, n);
    let mut mu = Vec::with_capacity(n - 1);
    // K is positive semidefinite with kernel span(1); the smallest eigenvalue is that kernel
    for r in 0..n - 1 {
        let m = values[r].max(0.0);
        mu.push(values[r]);
        sqrt_k.set_row(r, &(vectors.column(r).transpose() * m.sqrt()));
    }
    Ok(EmbeddingData {
        k,
        sqrt_k,
        circumradius,
        circumcenter,
        mu,
    })
}

/// Circumradius and barycentric circumcenter from `Zp = (1 − 2R²)·1`, `1ᵀp = 1`.
pub fn circumradius_equilibrium(z: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if !classify_definiteness(z).is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = Cholesky::new(z.clone()).ok_or(Error::NotPositiveDefinite)?;
    let y = chol.solve(&ones(z.nrows()));
    let total = y.sum();
    let r_squared = (0.5 * (1.0 - 1.0 / total)).max(0.0);
    Ok((r_squared.sqrt(), y / total))
}

/// Radius and center of the sphere through affinely independent points.
pub fn circumradius_geometric(points: &[DVector<f64>]) -> Result<(f64, DVector<f64>)> {
    let Some(base) = points.first() else {
        return Err(Error::EmptySubset);
    };
    let m = points.len() - 1;
    if m == 0 {
        return Ok((0.0, base.clone()));
    }
    let dim = base.len();
    if m > dim {
        return Err(Error::DegenerateSimplex);
    }
    let mut edges = DMatrix::zeros(dim, m);
    for (c, p) in points[1..].iter().enumerate() {
        edges.set_column(c, &(p - base));
    }
    let singular = SVD::new(edges.clone(), false, false).singular_values;
    let (smax, smin) = (singular.max(), singular.min());
    if smin.is_nan() || smin <= DEGENERATE_SIMPLEX_RATIO * smax {
        return Err(Error::DegenerateSimplex);
    }
    // center = base + E·λ with 2 (EᵀE) λ = diag(EᵀE)
    let gram = edges.transpose() * &edges;
    let rhs = DVector::from_iterator(m, (0..m).map(|i| 0.5 * gram[(i, i)]));
    let lambda = gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateSimplex)?;
    let offset = &edges * lambda;
    Ok((offset.norm(), base + offset))
}

/// `1 / (1 − 2R²)` with `R` the circumradius of the embedded simplex.
pub fn magnitude_via_circumradius(space: &MetricSpace) -> Result<f64> {
    let embedding = similarity_embedding(space)?;
    let (r, _) = circumradius_geometric(&embedding.points())?;
    Ok(1.0 / (1.0 - 2.0 * r * r))
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceCharacterizationReport {
    pub subsets_checked: usize,
    pub exhaustive: bool,
    pub max_abs_deviation: f64,
    /// Subset attaining the maximal deviation.
    pub worst_subset: Vec<usize>,
}

/// Checks `|Y| = 1 / (1 − 2R(φ(Y))²)` with `φ(Y)` taken from the embedding of the
/// whole space. All nonempty subsets are used when `2ⁿ − 1 ≤ max_subsets`,
/// otherwise `max_subsets` distinct subsets drawn with the given seed.
pub fn verify_subspace_characterization(
    space: &MetricSpace,
    max_subsets: usize,
    seed: u64,
) -> Result<SubspaceCharacterizationReport> {
    let embedding = similarity_embedding(space)?;
    let z = similarity_matrix(space);
    let n = space.len();
    let subsets = enumerate_or_sample(n, max_subsets, seed);
    let exhaustive = n < 64 && ((1u64 << n) - 1) <= max_subsets as u64;
    let points = embedding.points();
    let deviations: Vec<Result<f64>> = subsets
        .par_iter()
        .map(|y| {
            let idx = y.members();
            let magnitude = SimilarityData::from_matrix(
                principal_submatrix(&z, idx),
                crate::similarity::PD_RELATIVE_CUTOFF,
            )
            .magnitude()
            .ok_or(Error::NoSolution)?;
            let sub_points: Vec<DVector<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
            let (r, _) = circumradius_geometric(&sub_points)?;
            Ok((magnitude - 1.0 / (1.0 - 2.0 * r * r)).abs())
        })
        .collect();
    let mut max_abs_deviation = 0.0;
    let mut worst = 0;
    for (k, d) in deviations.into_iter().enumerate() {
        let dev = d?;
        if dev > max_abs_deviation {
            max_abs_deviation = dev;
            worst = k;
        }
    }
    Ok(SubspaceCharacterizationReport {
        subsets_checked: subsets.len(),
        exhaustive,
        max_abs_deviation,
        worst_subset: subsets[worst].members().to_vec(),
    })
}

/// All nonempty subsets of `0..n` when there are at most `limit` of them,
/// otherwise `limit` distinct nonempty subsets drawn uniformly with `seed`.
pub fn enumerate_or_sample(n: usize, limit: usize, seed: u64) -> Vec<SubsetSelector> {
    if n < 64 && ((1u64 << n) - 1) <= limit as u64 {
        return (1..(1u64 << n)).map(|m| SubsetSelector::from_mask(m, n)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n <= 24 {
        let total = (1usize << n) - 1;
        let mut masks: Vec<usize> = sample(&mut rng, total, limit).into_iter().map(|i| i + 1).collect();
        masks.sort_unstable();
        return masks.into_iter().map(|m| SubsetSelector::from_mask(m as u64, n)).collect();
    }
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < limit {
        let y = SubsetSelector::new((0..n).filter(|_| rng.random::<bool>()));
        if !y.is_empty() {
            seen.insert(y);
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DEFAULT_METRIC_TOLERANCE;
    use crate::similarity::magnitude;

    fn golden_triple() -> MetricSpace {
        let (a, b) = (2f64.ln(), 10f64.ln());
        MetricSpace::from_rows(&[vec![0.0, a, b], vec![a, 0.0, b], vec![b, b, 0.0]], DEFAULT_METRIC_TOLERANCE)
            .unwrap()
    }

    fn two_point(d: f64) -> MetricSpace {
        MetricSpace::from_rows(&[vec![0.0, d], vec![d, 0.0]], DEFAULT_METRIC_TOLERANCE).unwrap()
    }

    #[test]
    fn centered_identity_two_points() {
        let k = centered_similarity(&DMatrix::identity(2, 2));
        let expected = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!((k - expected).amax() < 1e-16);
    }

    #[test]
    fn centered_example_matches_printed_values() {
        let k = centered_similarity(&similarity_matrix(&golden_triple()));
        let printed = DMatrix::from_row_slice(
            3,
            3,
            &[1.9, -0.35, -1.55, -0.35, 1.9, -1.55, -1.55, -1.55, 3.1],
        ) / 9.0;
        assert!((k - printed).amax() < 1e-12);
    }

    #[test]
    fn example_embedding_distances() {
        let e = similarity_embedding(&golden_triple()).unwrap();
        assert!((e.squared_distance(0, 1) - 0.5).abs() < 1e-12);
        assert!((e.squared_distance(0, 2) - 0.9).abs() < 1e-12);
        assert!((e.squared_distance(1, 2) - 0.9).abs() < 1e-12);
        // the printed factor (√2/4, −√2/4, 0; −0.2934, −0.2934, 0.5869) has the same Gram matrix
        let s2 = 2f64.sqrt() / 4.0;
        let printed = DMatrix::from_row_slice(2, 3, &[s2, -s2, 0.0, -0.2934, -0.2934, 0.5869]);
        let gram_printed = printed.transpose() * printed;
        assert!((e.gram() - gram_printed).amax() < 1e-3);
    }

    #[test]
    fn two_point_embedding_and_radius() {
        let d = 1.3;
        let e = similarity_embedding(&two_point(d)).unwrap();
        assert_eq!(e.sqrt_k().shape(), (1, 2));
        let dist = (1.0 - (-d).exp()).sqrt();
        assert!((e.squared_distance(0, 1).sqrt() - dist).abs() < 1e-14);
        assert!((e.circumradius() - dist / 2.0).abs() < 1e-14);
        assert!((e.circumcenter_barycentric() - DVector::from_element(2, 0.5)).amax() < 1e-15);
        let via_r = magnitude_via_circumradius(&two_point(d)).unwrap();
        assert!((via_r - (1.0 + (d / 2.0).tanh())).abs() < 1e-13);
    }

    #[test]
    fn discrete_limit_regular_simplex() {
        let z = DMatrix::identity(5, 5);
        let (r, p) = circumradius_equilibrium(&z).unwrap();
        assert!((r * r - 4.0 / 10.0).abs() < 1e-15);
        assert!((p - DVector::from_element(5, 0.2)).amax() < 1e-15);
        let x = MetricSpace::from_points_euclidean(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap();
        let e = similarity_embedding(&x.scale(40.0).unwrap()).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((e.squared_distance(i, j).sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn geometric_circumradius_classics() {
        let (r, c) = circumradius_geometric(&[DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![2.0, 0.0])]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert!((c - DVector::from_vec(vec![1.0, 0.0])).amax() < 1e-15);
        let h = 3f64.sqrt() / 2.0;
        let (r, _) = circumradius_geometric(&[
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.5, h]),
        ])
        .unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let collinear = circumradius_geometric(&[
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![2.0, 0.0]),
        ]);
        assert_eq!(collinear, Err(Error::DegenerateSimplex));
    }

    #[test]
    fn equilibrium_and_geometric_agree_on_example() {
        let x = golden_triple();
        let e = similarity_embedding(&x).unwrap();
        let (rg, center) = circumradius_geometric(&e.points()).unwrap();
        assert!((rg - e.circumradius()).abs() < 1e-10);
        // the circumcenter in barycentric form maps onto the geometric center
        let c = e.sqrt_k() * e.circumcenter_barycentric();
        assert!((c - center).amax() < 1e-10);
        // dense-inverse oracle for the magnitude
        let z = similarity_matrix(&x);
        let oracle = z.try_inverse().unwrap().sum();
        assert!((magnitude_via_circumradius(&x).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn not_positive_definite_is_rejected() {
        let z = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(circumradius_equilibrium(&z), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn subspace_characterization_small() {
        let x = golden_triple();
        let report = verify_subspace_characterization(&x, 1024, 0).unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.subsets_checked, 7);
        assert!(report.max_abs_deviation < 1e-12);
        let sampled = verify_subspace_characterization(&x, 3, 7).unwrap();
        assert!(!sampled.exhaustive);
        assert_eq!(sampled.subsets_checked, 3);
        assert!(magnitude(&x).unwrap() > 1.0);
    }
}

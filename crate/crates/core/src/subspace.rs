//! Magnitude, weighting and `K†` of subspaces from the data of the whole space.
//!
//! A general subset `Y` is handled with a block Schur complement of `K†` on the
//! removed points `Yᶜ` (Cholesky on the pivot block). Removing a single point
//! is a rank-one update costing `O(n²)`, so deletion chains avoid the `O(n³)`
//! recomputation at every step. Results are persistent values: a deletion
//! returns a new [`SubspaceResult`] and leaves its input untouched.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities::CoefficientData;
use crate::linalg::{principal_submatrix, submatrix, subvector, to_rows};
use crate::metric::{MetricSpace, SubsetSelector};
use crate::similarity::{SimilarityData, PD_RELATIVE_CUTOFF};

/// Relative gap between incremental and recomputed `|Y|` that triggers a warning.
pub const CONDITIONING_WARNING_REL: f64 = 1e-6;

/// `M/Yᶜ = M_YY − M_YYᶜ (M_YᶜYᶜ)⁻¹ M_YᶜY`, indexed by the complement of `pivot`.
pub fn schur_complement(m: &DMatrix<f64>, pivot: &SubsetSelector) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    pivot.check_range(n)?;
    if pivot.is_empty() {
        return Ok(m.clone());
    }
    let keep = pivot.complement(n);
    let p = pivot.members();
    let y = keep.members();
    let block = principal_submatrix(m, p);
    let singular = SVD::new(block.clone(), false, false).singular_values;
    if singular.min() <= PD_RELATIVE_CUTOFF * singular.max().max(1.0) {
        return Err(Error::SingularPivotBlock);
    }
    let solved = block
        .lu()
        .solve(&submatrix(m, p, y))
        .ok_or(Error::SingularPivotBlock)?;
    Ok(principal_submatrix(m, y) - submatrix(m, y, p) * solved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Derivation {
    Incremental,
    Recomputed,
}

/// Incremental and recomputed magnitudes that disagree beyond
/// [`CONDITIONING_WARNING_REL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningWarning {
    pub incremental: f64,
    pub recomputed: f64,
    pub relative_gap: f64,
}

/// Magnitude data of a subspace `Y`. Indices in `subset` refer to the
/// original space; vectors and matrices are ordered like `subset`.
#[derive(Debug, Clone)]
pub struct SubspaceResult {
    subset: SubsetSelector,
    magnitude: f64,
    weighting: DVector<f64>,
    kdag: DMatrix<f64>,
    derivation: Derivation,
    warning: Option<ConditioningWarning>,
}

impl SubspaceResult {
    /// Direct computation for the whole of a positive definite space.
    pub fn full(space: &MetricSpace) -> Result<Self> {
        Self::recompute(space, &SubsetSelector::full(space.len()))
    }

    /// Restrict-then-recompute, the reference path for the incremental formulas.
    pub fn recompute(space: &MetricSpace, subset: &SubsetSelector) -> Result<Self> {
        let sub = space.restrict(subset)?;
        let data = SimilarityData::new(&sub);
        if !data.definiteness().is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let weighting = data.weighting().cloned().ok_or(Error::NoSolution)?;
        Ok(Self {
            subset: subset.clone(),
            magnitude: weighting.sum(),
            weighting,
            kdag: CoefficientData::from_similarity(data.z()).into_kdag(),
            derivation: Derivation::Recomputed,
            warning: None,
        })
    }

    pub fn subset(&self) -> &SubsetSelector {
        &self.subset
    }

    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn weighting(&self) -> &DVector<f64> {
        &self.weighting
    }

    pub fn kdag(&self) -> &DMatrix<f64> {
        &self.kdag
    }

    pub fn coefficients(&self) -> CoefficientData {
        CoefficientData::from_pseudoinverse(self.kdag.clone())
    }

    pub fn derivation(&self) -> Derivation {
        self.derivation
    }

    pub fn warning(&self) -> Option<&ConditioningWarning> {
        self.warning.as_ref()
    }

    fn local_index(&self, x: usize) -> Result<usize> {
        self.subset
            .members()
            .binary_search(&x)
            .map_err(|_| Error::NotAMember(x))
    }

    /// Block Schur-complement update to a subset `Y` of the current points.
    pub fn restrict_to(&self, y: &SubsetSelector) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptySubset);
        }
        let keep: Vec<usize> = y
            .members()
            .iter()
            .map(|&x| self.local_index(x))
            .collect::<Result<_>>()?;
        let removed: Vec<usize> = (0..self.len()).filter(|i| keep.binary_search(i).is_err()).collect();
        if removed.is_empty() {
            return Ok(Self {
                derivation: Derivation::Incremental,
                ..self.clone()
            });
        }
        let mag = self.magnitude;
        let pivot = principal_submatrix(&self.kdag, &removed);
        let chol = Cholesky::new(pivot).ok_or(Error::SingularPivotBlock)?;
        let w_removed = subvector(&self.weighting, &removed);
        let w_keep = subvector(&self.weighting, &keep);
        let cross = submatrix(&self.kdag, &keep, &removed);

        let u = chol.solve(&w_removed);
        let magnitude = mag / (1.0 + 2.0 * w_removed.dot(&u) / mag);
        let normalized = w_keep / mag - &cross * u / mag;
        let weighting = normalized * magnitude;
        let kdag = principal_submatrix(&self.kdag, &keep) - &cross * chol.solve(&cross.transpose());
        Ok(Self {
            subset: y.clone(),
            magnitude,
            weighting,
            kdag: (&kdag + kdag.transpose()) * 0.5,
            derivation: Derivation::Incremental,
            warning: None,
        })
    }

    pub fn report(&self) -> SubspaceReport {
        SubspaceReport {
            subset: self.subset.members().to_vec(),
            magnitude: self.magnitude,
            weighting: self.weighting.iter().copied().collect(),
            kdag: to_rows(&self.kdag),
            derivation: self.derivation,
            warning: self.warning.clone(),
        }
    }
}

/// JSON form of a [`SubspaceResult`].
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceReport {
    pub subset: Vec<usize>,
    pub magnitude: f64,
    pub weighting: Vec<f64>,
    pub kdag: Vec<Vec<f64>>,
    pub derivation: Derivation,
    pub warning: Option<ConditioningWarning>,
}

/// Subspace quantities of a positive definite space through the Schur
/// complement of `K†`, cross-checked against a direct solve of `|Y|`.
pub fn subspace_magnitude_weighting(space: &MetricSpace, y: &SubsetSelector) -> Result<SubspaceResult> {
    if y.is_empty() {
        return Err(Error::EmptySubset);
    }
    y.check_range(space.len())?;
    let full = SubspaceResult::full(space)?;
    let mut result = full.restrict_to(y)?;
    let recomputed = SimilarityData::new(&space.restrict(y)?)
        .magnitude()
        .ok_or(Error::NoSolution)?;
    let gap = (result.magnitude - recomputed).abs() / recomputed.abs();
    if gap > CONDITIONING_WARNING_REL {
        result.warning = Some(ConditioningWarning {
            incremental: result.magnitude,
            recomputed,
            relative_gap: gap,
        });
    }
    Ok(result)
}

fn pivot_cutoff(kdag: &DMatrix<f64>) -> f64 {
    PD_RELATIVE_CUTOFF * kdag.amax().max(1.0)
}

/// Removes point `x` (an index of the original space) with the rank-one updates
/// `|X∖x| = |X| (1 + 2w_x²/(c̄_x |X|))⁻¹` and
/// `w'_i/|X∖x| = w_i/|X| + (c_ix/c̄_x)(w_x/|X|)`.
pub fn delete_point(state: &SubspaceResult, x: usize) -> Result<SubspaceResult> {
    let local = state.local_index(x)?;
    if state.len() == 1 {
        return Err(Error::LastPoint);
    }
    let coeffs = state.coefficients();
    let cbar_x = coeffs.cbar(local);
    if cbar_x <= pivot_cutoff(coeffs.kdag()) {
        return Err(Error::SingularPivotBlock);
    }
    let mag = state.magnitude;
    let w_x = state.weighting[local];
    let magnitude = mag / (1.0 + 2.0 * w_x * w_x / (cbar_x * mag));
    let rest: Vec<usize> = (0..state.len()).filter(|&i| i != local).collect();
    let weighting = DVector::from_iterator(
        rest.len(),
        rest.iter().map(|&i| {
            let normalized = state.weighting[i] / mag + coeffs.c(i, local) / cbar_x * (w_x / mag);
            normalized * magnitude
        }),
    );
    let kdag = delete_point_coefficients(&coeffs, local)?.into_kdag();
    let subset = SubsetSelector::new(state.subset.members().iter().copied().filter(|&i| i != x));
    Ok(SubspaceResult {
        subset,
        magnitude,
        weighting,
        kdag,
        derivation: Derivation::Incremental,
        warning: None,
    })
}

/// `c'_ij = c_ij + c_ix c_jx / c̄_x` and `c̄'_i = c̄_i − c_ix² / c̄_x` on the
/// remaining points; `x` is a local index into `coeffs`.
pub fn delete_point_coefficients(coeffs: &CoefficientData, x: usize) -> Result<CoefficientData> {
    let n = coeffs.len();
    if x >= n {
        return Err(Error::IndexOutOfRange { index: x, n });
    }
    if n == 1 {
        return Err(Error::LastPoint);
    }
    let cbar_x = coeffs.cbar(x);
    if cbar_x <= pivot_cutoff(coeffs.kdag()) {
        return Err(Error::SingularPivotBlock);
    }
    let rest: Vec<usize> = (0..n).filter(|&i| i != x).collect();
    let m = rest.len();
    let kdag = DMatrix::from_fn(m, m, |a, b| {
        let (i, j) = (rest[a], rest[b]);
        if a == b {
            coeffs.cbar(i) - coeffs.c(i, x).powi(2) / cbar_x
        } else {
            -(coeffs.c(i, j) + coeffs.c(i, x) * coeffs.c(j, x) / cbar_x)
        }
    });
    Ok(CoefficientData::from_pseudoinverse(kdag))
}

/// Successive deletions; element `k` of the result has the first `k + 1` points removed.
pub fn delete_chain(state: &SubspaceResult, points: &[usize]) -> Result<Vec<SubspaceResult>> {
    let mut out: Vec<SubspaceResult> = Vec::with_capacity(points.len());
    for &x in points {
        let next = delete_point(out.last().unwrap_or(state), x)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DEFAULT_METRIC_TOLERANCE;

    fn cluster_triple(t: f64) -> MetricSpace {
        MetricSpace::from_rows(
            &[vec![0.0, 2.0, 100.0], vec![2.0, 0.0, 100.0], vec![100.0, 100.0, 0.0]],
            DEFAULT_METRIC_TOLERANCE,
        )
        .unwrap()
        .scale(t)
        .unwrap()
    }

    fn discrete(n: usize) -> MetricSpace {
        MetricSpace::from_rows(
            &(0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 800.0 }).collect())
                .collect::<Vec<_>>(),
            DEFAULT_METRIC_TOLERANCE,
        )
        .unwrap()
    }

    #[test]
    fn schur_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 2.0, 5.0, 4.0]);
        let s = schur_complement(&m, &SubsetSelector::new([1])).unwrap();
        assert!((s[(0, 0)] - (3.0 - 2.0 * 5.0 / 4.0)).abs() < 1e-15);
        let id = DMatrix::<f64>::identity(4, 4);
        let s = schur_complement(&id, &SubsetSelector::new([0, 2])).unwrap();
        assert_eq!(s, DMatrix::identity(2, 2));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert_eq!(
            schur_complement(&singular, &SubsetSelector::new([1])),
            Err(Error::SingularPivotBlock)
        );
    }

    #[test]
    fn full_subset_is_unchanged() {
        let x = cluster_triple(1.0);
        let full = SubspaceResult::full(&x).unwrap();
        let same = subspace_magnitude_weighting(&x, &SubsetSelector::full(3)).unwrap();
        assert_eq!(same.magnitude(), full.magnitude());
        assert_eq!(same.weighting(), full.weighting());
        assert_eq!(same.derivation(), Derivation::Incremental);
    }

    #[test]
    fn example_pair_subspace() {
        let x = cluster_triple(1.0);
        let r = subspace_magnitude_weighting(&x, &SubsetSelector::new([0, 1])).unwrap();
        assert!((r.magnitude() - (1.0 + 1f64.tanh())).abs() < 1e-12);
        assert!(r.warning().is_none());
        assert!((r.kdag() * DVector::from_element(2, 1.0)).amax() < 1e-12);
    }

    #[test]
    fn discrete_deletion_gives_two() {
        let full = SubspaceResult::full(&discrete(3)).unwrap();
        assert!((full.coefficients().cbar(0) - 4.0 / 3.0).abs() < 1e-14);
        for x in 0..3 {
            let r = delete_point(&full, x).unwrap();
            assert!((r.magnitude() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn example_deletion_matches_closed_form() {
        for t in [0.2, 1.0, 3.0] {
            let full = SubspaceResult::full(&cluster_triple(t)).unwrap();
            let r = delete_point(&full, 2).unwrap();
            assert!((r.magnitude() - (1.0 + t.tanh())).abs() < 1e-10, "t = {t}");
            let c12 = -r.kdag()[(0, 1)];
            assert!((c12 - 1.0 / (1.0 - (-2.0 * t).exp())).abs() < 1e-9 * c12);
        }
    }

    #[test]
    fn deletion_errors() {
        let one = MetricSpace::from_rows(&[vec![0.0]], 1e-9).unwrap();
        let full = SubspaceResult::full(&one).unwrap();
        assert!(matches!(delete_point(&full, 0), Err(Error::LastPoint)));
        let full = SubspaceResult::full(&discrete(3)).unwrap();
        assert!(matches!(delete_point(&full, 5), Err(Error::NotAMember(5))));
        assert!(matches!(
            delete_point_coefficients(&full.coefficients(), 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            subspace_magnitude_weighting(&discrete(3), &SubsetSelector::new([])),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn row_sums_survive_update() {
        let x = MetricSpace::from_points_euclidean(&[
            vec![0.0, 0.0],
            vec![1.0, 0.2],
            vec![0.3, 1.4],
            vec![2.0, 1.0],
            vec![1.1, 2.2],
        ])
        .unwrap();
        let full = SubspaceResult::full(&x).unwrap();
        let c = delete_point_coefficients(&full.coefficients(), 1).unwrap();
        for i in 0..4 {
            let s: f64 = (0..4).filter(|&j| j != i).map(|j| c.c(i, j)).sum();
            assert!((c.cbar(i) - s).abs() < 1e-10);
        }
    }
}

//! The pseudoinverse centered similarity matrix `K†`, its coefficients and
//! the matrix identities tying `Z`, `K`, `K†` and the weighting together.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::embedding::centered_similarity;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_vec, ones, sorted_symmetric_eigen};
use crate::metric::MetricSpace;
use crate::similarity::{Definiteness, SimilarityData};

/// Eigenvalues of `K` below this multiple of the largest one are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;
/// Default pass threshold for every identity residual.
pub const IDENTITY_TOL: f64 = 1e-9;
/// `‖Z1 − (1ᵀZ1/n)·1‖_∞` at or below this marks a homogeneous space.
pub const HOMOGENEITY_TOL: f64 = 1e-10;
/// Magnitudes with absolute value at or below this are treated as zero.
pub const ZERO_MAGNITUDE_TOL: f64 = 1e-12;

/// Unordered pairs `(i, j)` with `i < j`. Every pair-indexed sum over the
/// coefficients `c_ij` goes through here, so each pair is counted once.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

pub fn pair_sum(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    pairs(n).map(|(i, j)| f(i, j)).sum()
}

/// Moore–Penrose pseudoinverse of a symmetric matrix by eigendecomposition.
pub fn pseudoinverse_centered(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let (values, vectors) = sorted_symmetric_eigen(k);
    let largest = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cutoff = PINV_RELATIVE_CUTOFF * largest;
    let mut pinv = DMatrix::zeros(n, n);
    for (idx, &value) in values.iter().enumerate() {
        if largest > 0.0 && value.abs() > cutoff {
            let v = vectors.column(idx);
            pinv += (v * v.transpose()) / value;
        }
    }
    (&pinv + pinv.transpose()) * 0.5
}

/// `γ = −(1/n) Z1 + (1/(2n²)) (1ᵀZ1)·1`.
pub fn gamma_vector(z: &DMatrix<f64>) -> DVector<f64> {
    let n = z.nrows() as f64;
    let row_sums = z * ones(z.nrows());
    let total = row_sums.sum();
    row_sums * (-1.0 / n) + ones(z.nrows()) * (total / (2.0 * n * n))
}

/// Entries of `K†` read as edge weights: `c_ij = −K†_ij`, `c̄_i = K†_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientData {
    kdag: DMatrix<f64>,
}

impl CoefficientData {
    pub fn from_similarity(z: &DMatrix<f64>) -> Self {
        Self {
            kdag: pseudoinverse_centered(&centered_similarity(z)),
        }
    }

    pub fn from_pseudoinverse(kdag: DMatrix<f64>) -> Self {
        Self { kdag }
    }

    pub fn kdag(&self) -> &DMatrix<f64> {
        &self.kdag
    }

    pub fn into_kdag(self) -> DMatrix<f64> {
        self.kdag
    }

    pub fn len(&self) -> usize {
        self.kdag.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.kdag.nrows() == 0
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        -self.kdag[(i, j)]
    }

    pub fn cbar(&self, i: usize) -> f64 {
        self.kdag[(i, i)]
    }

    pub fn cbar_vector(&self) -> DVector<f64> {
        self.kdag.diagonal()
    }

    /// `Σ_pairs c_ij (y_i − y_j)²`, which equals `yᵀK†y`.
    pub fn pair_quadratic_form(&self, y: &DVector<f64>) -> f64 {
        pair_sum(self.len(), |i, j| self.c(i, j) * (y[i] - y[j]).powi(2))
    }
}

/// `[[0, 1ᵀ], [1, Z]]`.
pub fn bordered_matrix(z: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    let mut b = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        b[(0, i + 1)] = 1.0;
        b[(i + 1, 0)] = 1.0;
    }
    b.view_mut((1, 1), (n, n)).copy_from(z);
    b
}

/// The bordered similarity matrix and its closed-form inverse
/// `[[−1/|X|, wᵀ/|X|], [w/|X|, ½K†]]`.
#[derive(Debug, Clone)]
pub struct FiedlerBapatBlock {
    pub bordered: DMatrix<f64>,
    pub inverse_block: DMatrix<f64>,
}

impl FiedlerBapatBlock {
    /// `‖bordered · inverse_block − I‖_max`.
    pub fn residual(&self) -> f64 {
        let n = self.bordered.nrows();
        max_abs(&(&self.bordered * &self.inverse_block - DMatrix::identity(n, n)))
    }
}

struct InvertibleContext {
    z: DMatrix<f64>,
    w: DVector<f64>,
    magnitude: f64,
    coefficients: CoefficientData,
}

fn invertible_context(space: &MetricSpace) -> Result<InvertibleContext> {
    let data = SimilarityData::new(space);
    if data.definiteness() == Definiteness::Singular {
        return Err(Error::SingularZ);
    }
    let w = data.weighting().cloned().ok_or(Error::SingularZ)?;
    let magnitude = w.sum();
    if magnitude.abs() <= ZERO_MAGNITUDE_TOL {
        return Err(Error::ZeroMagnitude);
    }
    let coefficients = CoefficientData::from_similarity(data.z());
    Ok(InvertibleContext {
        z: data.z().clone(),
        w,
        magnitude,
        coefficients,
    })
}

pub fn fiedler_bapat_block(space: &MetricSpace) -> Result<FiedlerBapatBlock> {
    let ctx = invertible_context(space)?;
    Ok(assemble_block(&ctx))
}

fn assemble_block(ctx: &InvertibleContext) -> FiedlerBapatBlock {
    let n = ctx.z.nrows();
    let mut inv = DMatrix::zeros(n + 1, n + 1);
    inv[(0, 0)] = -1.0 / ctx.magnitude;
    for i in 0..n {
        inv[(0, i + 1)] = ctx.w[i] / ctx.magnitude;
        inv[(i + 1, 0)] = ctx.w[i] / ctx.magnitude;
    }
    inv.view_mut((1, 1), (n, n))
        .copy_from(&(ctx.coefficients.kdag() * 0.5));
    FiedlerBapatBlock {
        bordered: bordered_matrix(&ctx.z),
        inverse_block: inv,
    }
}

/// `−det([[0, 1ᵀ], [1, Z]]) / det(Z)` by LU with partial pivoting.
/// Adequate as a cross-check; loses accuracy for large `n` (≳ 50).
pub fn magnitude_via_determinant(space: &MetricSpace) -> Result<f64> {
    let data = SimilarityData::new(space);
    if !data.definiteness().is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let z = data.z();
    let det_z = z.clone().lu().determinant();
    let det_b = bordered_matrix(z).lu().determinant();
    Ok(-det_b / det_z)
}

/// Magnitude and weighting recovered from the coefficients `c` alone.
#[derive(Debug, Clone, Serialize)]
pub struct CSumResult {
    /// `w_i/|X| = 1 − ½ Σ_j c_ij (1 − z_ij)`.
    pub normalized_weighting: Vec<f64>,
    /// `|X|⁻¹ = 1 − ½ Σ_pairs c_ij (z_ix − z_jx)²`, one value per anchor `x`.
    pub inverse_magnitude_per_anchor: Vec<f64>,
    /// `|X|⁻¹ = tr(I − ½ Z K† Z) / n`.
    pub inverse_magnitude_trace: f64,
    /// `Σ_pairs c_ij (1 − z_ij)`, equal to `n − 1`.
    pub foster_sum: f64,
}

pub fn magnitude_weighting_via_c(space: &MetricSpace) -> Result<CSumResult> {
    let ctx = invertible_context(space)?;
    Ok(c_sums(&ctx.z, &ctx.coefficients))
}

fn c_sums(z: &DMatrix<f64>, coeffs: &CoefficientData) -> CSumResult {
    let n = z.nrows();
    let normalized_weighting = (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| coeffs.c(i, j) * (1.0 - z[(i, j)]))
                .sum();
            1.0 - 0.5 * s
        })
        .collect();
    let inverse_magnitude_per_anchor = (0..n)
        .map(|x| 1.0 - 0.5 * pair_sum(n, |i, j| coeffs.c(i, j) * (z[(i, x)] - z[(j, x)]).powi(2)))
        .collect();
    let zkz = z * coeffs.kdag() * z;
    let inverse_magnitude_trace = (0..n).map(|i| 1.0 - 0.5 * zkz[(i, i)]).sum::<f64>() / n as f64;
    let foster_sum = pair_sum(n, |i, j| coeffs.c(i, j) * (1.0 - z[(i, j)]));
    CSumResult {
        normalized_weighting,
        inverse_magnitude_per_anchor,
        inverse_magnitude_trace,
        foster_sum,
    }
}

/// Eigenvalue interlacing between `Z` and `2K`.
#[derive(Debug, Clone, Serialize)]
pub struct InterlacingReport {
    /// Eigenvalues of `Z`, descending.
    pub lambda: Vec<f64>,
    /// Eigenvalues of `K` with the centering zero removed, descending.
    pub mu: Vec<f64>,
    /// Largest amount by which the chain `λ₁ ≥ 2μ₁ ≥ λ₂ ≥ … ≥ λₙ` fails.
    pub max_violation: f64,
    /// `None` when `Z` is singular; the chain is then reported without a verdict.
    pub holds: Option<bool>,
    pub homogeneous: bool,
    /// For homogeneous spaces, `max |λ_i − 2μ_i|` after removing the eigenvalue of `1`.
    pub equality_residual: Option<f64>,
}

pub fn interlacing_check(space: &MetricSpace) -> InterlacingReport {
    interlacing_check_with(space, IDENTITY_TOL)
}

pub fn interlacing_check_with(space: &MetricSpace, tolerance: f64) -> InterlacingReport {
    let data = SimilarityData::new(space);
    interlacing_from_similarity(&data, tolerance)
}

fn drop_aligned_with_ones(values: &DVector<f64>, vectors: &DMatrix<f64>) -> Vec<f64> {
    let n = values.len();
    let aligned = (0..n)
        .max_by(|&a, &b| {
            vectors.column(a).sum().abs().total_cmp(&vectors.column(b).sum().abs())
        })
        .unwrap_or(0);
    (0..n).filter(|&k| k != aligned).map(|k| values[k]).collect()
}

fn interlacing_from_similarity(data: &SimilarityData, tolerance: f64) -> InterlacingReport {
    let z = data.z();
    let n = z.nrows();
    let lambda = data.eigenvalues().to_vec();
    let (kv, kvec) = sorted_symmetric_eigen(&centered_similarity(z));
    let mu = drop_aligned_with_ones(&kv, &kvec);
    let mut max_violation = 0.0_f64;
    for (i, &m) in mu.iter().enumerate() {
        max_violation = max_violation.max(2.0 * m - lambda[i]).max(lambda[i + 1] - 2.0 * m);
    }
    let row_sums = z * ones(n);
    let mean = row_sums.sum() / n as f64;
    let homogeneous = max_abs_vec(&row_sums.map(|r| r - mean)) <= HOMOGENEITY_TOL;
    let equality_residual = homogeneous.then(|| {
        let (zv, zvec) = sorted_symmetric_eigen(z);
        let rest = drop_aligned_with_ones(&zv, &zvec);
        rest.iter()
            .zip(&mu)
            .fold(0.0_f64, |a, (l, m)| a.max((l - 2.0 * m).abs()))
    });
    let holds = data
        .definiteness()
        .is_invertible()
        .then_some(max_violation <= tolerance);
    InterlacingReport {
        lambda,
        mu,
        max_violation,
        holds,
        homogeneous,
        equality_residual,
    }
}

/// One named identity with its residual and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |a, c| a.max(c.residual))
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn identity_residuals(space: &MetricSpace) -> Result<IdentityReport> {
    identity_residuals_with(space, IDENTITY_TOL)
}

/// Max-norm residuals of the identities relating `Z`, `K`, `K†`, `w` and `γ`,
/// the Penrose axioms for `K†`, the bordered inverse and the interlacing chain.
pub fn identity_residuals_with(space: &MetricSpace, tolerance: f64) -> Result<IdentityReport> {
    let ctx = invertible_context(space)?;
    let z = &ctx.z;
    let n = z.nrows();
    let nf = n as f64;
    let mag = ctx.magnitude;
    let w = &ctx.w;
    let kdag = ctx.coefficients.kdag();
    let k = centered_similarity(z);
    let one = ones(n);
    let eye = DMatrix::<f64>::identity(n, n);
    let zinv = z.clone().try_inverse().ok_or(Error::SingularZ)?;
    let gamma = k.diagonal() - &one * 0.5;

    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64| {
        checks.push(IdentityCheck {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        })
    };

    push(
        "z_kdag",
        max_abs(&(z * kdag - (&eye * 2.0 - &one * w.transpose() * (2.0 / mag)))),
    );
    push(
        "two_k_minus_z",
        max_abs(&(&k * 2.0 - z - (&gamma * one.transpose() + &one * gamma.transpose()))),
    );
    push("gamma_forms", max_abs_vec(&(&gamma - gamma_vector(z))));
    push(
        "two_zinv_minus_kdag",
        max_abs(&(&zinv * 2.0 - kdag - w * w.transpose() * (2.0 / mag))),
    );
    push(
        "weighting_from_gamma",
        max_abs_vec(&(w / mag - (kdag * &gamma * 0.5 + &one / nf))),
    );
    let inv_from_gamma = -0.5 * (gamma.transpose() * kdag * &gamma)[(0, 0)] - 2.0 / nf * gamma.sum();
    push("inverse_magnitude_from_gamma", (1.0 / mag - inv_from_gamma).abs());

    let sums = c_sums(z, &ctx.coefficients);
    push("foster_sum", (sums.foster_sum - (nf - 1.0)).abs());
    let c_weight = DVector::from_vec(sums.normalized_weighting.clone());
    push("weighting_from_c", max_abs_vec(&(w / mag - c_weight)));
    push(
        "inverse_magnitude_anchors",
        sums.inverse_magnitude_per_anchor
            .iter()
            .fold(0.0_f64, |a, v| a.max((v - 1.0 / mag).abs())),
    );
    push(
        "inverse_magnitude_trace",
        (sums.inverse_magnitude_trace - 1.0 / mag).abs(),
    );

    push("penrose_k_kdag_k", max_abs(&(&k * kdag * &k - &k)));
    push("penrose_kdag_k_kdag", max_abs(&(kdag * &k * kdag - kdag)));
    let kk = &k * kdag;
    push("penrose_k_kdag_symmetric", max_abs(&(&kk - kk.transpose())));
    let kk = kdag * &k;
    push("penrose_kdag_k_symmetric", max_abs(&(&kk - kk.transpose())));
    push("kdag_kernel", max_abs_vec(&(kdag * &one)));

    push("fiedler_bapat", assemble_block(&ctx).residual());

    let data = SimilarityData::new(space);
    let interlacing = interlacing_from_similarity(&data, tolerance);
    push("interlacing", interlacing.max_violation.max(0.0));

    Ok(IdentityReport { checks })
}

/// Smallest eigenvalue of `K†` restricted to the complement of `1`.
pub fn kdag_min_on_complement(kdag: &DMatrix<f64>) -> f64 {
    if kdag.nrows() < 2 {
        return f64::INFINITY;
    }
    let (values, vectors) = sorted_symmetric_eigen(kdag);
    drop_aligned_with_ones(&values, &vectors)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

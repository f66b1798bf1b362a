//! Strong positive definiteness, its equivalent characterizations, the scale
//! threshold search, and exhaustive submodularity checks of magnitude-based
//! set functions.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::remainder;
use crate::embedding::{circumradius_geometric, similarity_embedding};
use crate::error::{Error, Result};
use crate::identities::{pairs, CoefficientData};
use crate::linalg::{ones, principal_submatrix, sorted_eigenvalues};
use crate::metric::{MetricSpace, SubsetSelector};
use crate::similarity::{classify_definiteness, similarity_matrix, weighting, SimilarityData};

/// Values of `w` and `c` in `[−STRICT_TOL, STRICT_TOL]` are treated as boundary and fail strictness.
pub const STRICT_TOL: f64 = 1e-12;

/// Largest space for which set functions are evaluated on every subset.
pub const N_EXHAUSTIVE: usize = 16;

/// Relative bisection width for the scale threshold.
pub const THRESHOLD_REL_PRECISION: f64 = 1e-6;

/// Grid density used to sample persistence above a threshold candidate.
const PERSISTENCE_SAMPLES_PER_DECADE: f64 = 16.0;

const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Characterizations {
    /// Every off-diagonal entry of `K†` is negative.
    pub kdag_sign_pattern: bool,
    /// `K†` has nonnegative spectrum and negative off-diagonal entries.
    pub m_matrix: bool,
    /// `K†` is the Laplacian of a complete positively weighted graph with kernel `span(1)`.
    pub laplacian: bool,
    /// The circumcenter of the embedded simplex has positive barycentric coordinates.
    pub circumcenter_interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdCertificate {
    pub is_pd: bool,
    pub w_positive: bool,
    pub c_positive: bool,
    pub verdict: bool,
    pub characterizations: Characterizations,
    /// Entries of `w` and `c` inside the strictness band.
    pub boundary: Vec<BoundaryValue>,
}

/// A weighting entry (`indices = [i]`) or coefficient (`indices = [i, j]`)
/// within [`STRICT_TOL`] of zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryValue {
    pub quantity: &'static str,
    pub indices: Vec<usize>,
    pub value: f64,
}

impl SpdCertificate {
    /// The three `c > 0` characterizations agree with `c_positive` and the
    /// circumcenter test agrees with `w_positive`.
    pub fn consistent(&self) -> bool {
        let ch = &self.characterizations;
        ch.kdag_sign_pattern == self.c_positive
            && ch.m_matrix == self.c_positive
            && ch.laplacian == self.c_positive
            && (!self.is_pd || ch.circumcenter_interior == self.w_positive)
    }
}

pub fn spd_certificate(space: &MetricSpace) -> SpdCertificate {
    let data = SimilarityData::new(space);
    let n = space.len();
    let is_pd = data.definiteness().is_positive_definite();
    let mut boundary = Vec::new();

    let w_positive = match data.weighting() {
        Some(w) => {
            for (i, &v) in w.iter().enumerate() {
                if v.abs() <= STRICT_TOL {
                    boundary.push(BoundaryValue {
                        quantity: "w",
                        indices: vec![i],
                        value: v,
                    });
                }
            }
            w.iter().all(|&v| v > STRICT_TOL)
        }
        None => false,
    };

    let coeffs = CoefficientData::from_similarity(data.z());
    let mut c_positive = true;
    for (i, j) in pairs(n) {
        let c = coeffs.c(i, j);
        if c.abs() <= STRICT_TOL {
            boundary.push(BoundaryValue {
                quantity: "c",
                indices: vec![i, j],
                value: c,
            });
        }
        c_positive &= c > STRICT_TOL;
    }

    let characterizations = Characterizations {
        kdag_sign_pattern: sign_pattern(coeffs.kdag()),
        m_matrix: m_matrix(coeffs.kdag()),
        laplacian: laplacian(coeffs.kdag()),
        circumcenter_interior: is_pd && circumcenter_interior(space),
    };
    SpdCertificate {
        is_pd,
        w_positive,
        c_positive,
        verdict: is_pd && w_positive && c_positive,
        characterizations,
        boundary,
    }
}

fn sign_pattern(kdag: &DMatrix<f64>) -> bool {
    pairs(kdag.nrows()).all(|(i, j)| kdag[(i, j)] < -STRICT_TOL)
}

fn m_matrix(kdag: &DMatrix<f64>) -> bool {
    let spectrum = sorted_eigenvalues(kdag);
    let scale = spectrum.first().copied().unwrap_or(0.0).abs().max(1.0);
    let off_diagonal = (0..kdag.nrows())
        .flat_map(|i| (0..kdag.nrows()).filter(move |&j| j != i).map(move |j| (i, j)))
        .all(|(i, j)| kdag[(i, j)] < -STRICT_TOL);
    off_diagonal && spectrum.iter().all(|&l| l >= -EIGEN_TOL * scale)
}

fn laplacian(kdag: &DMatrix<f64>) -> bool {
    let n = kdag.nrows();
    if n == 1 {
        return true;
    }
    // rebuild the graph Laplacian from the edge weights and compare
    let mut lap = DMatrix::zeros(n, n);
    for (i, j) in pairs(n) {
        let c = -kdag[(i, j)];
        if c <= STRICT_TOL {
            return false;
        }
        lap[(i, j)] = -c;
        lap[(j, i)] = -c;
        lap[(i, i)] += c;
        lap[(j, j)] += c;
    }
    let scale = kdag.amax().max(1.0);
    if (&lap - kdag).amax() > 1e-9 * scale {
        return false;
    }
    // connected: exactly one zero eigenvalue
    let spectrum = sorted_eigenvalues(&lap);
    spectrum[n - 2] > EIGEN_TOL * scale && spectrum[n - 1].abs() <= 1e-9 * scale
}

fn circumcenter_interior(space: &MetricSpace) -> bool {
    let n = space.len();
    if n == 1 {
        return true;
    }
    let Ok(embedding) = similarity_embedding(space) else {
        return false;
    };
    let points = embedding.points();
    let Ok((_, center)) = circumradius_geometric(&points) else {
        return false;
    };
    // barycentric coordinates: [points; 1ᵀ] p = [center; 1]
    let dim = points[0].len();
    let mut a = DMatrix::zeros(dim + 1, n);
    for (c, p) in points.iter().enumerate() {
        a.view_mut((0, c), (dim, 1)).copy_from(p);
        a[(dim, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(dim + 1);
    rhs.rows_mut(0, dim).copy_from(&center);
    rhs[dim] = 1.0;
    match a.lu().solve(&rhs) {
        Some(p) => p.iter().all(|&v| v > STRICT_TOL),
        None => false,
    }
}

/// The polynomial inequalities in `Z⁻¹`: `1ᵀZ⁻¹1 > 0` and, for all `i ≠ j`,
/// `s_i s_j > 0` and `s_i s_j > (1ᵀZ⁻¹1)(Z⁻¹)_ij` where `s = Z⁻¹1`.
pub fn spd_semialgebraic_check(z: &DMatrix<f64>) -> Result<bool> {
    if !classify_definiteness(z).is_invertible() {
        return Err(Error::SingularZ);
    }
    let inv = z.clone().try_inverse().ok_or(Error::SingularZ)?;
    let s = &inv * ones(z.nrows());
    let total = s.sum();
    if total <= 0.0 {
        return Ok(false);
    }
    Ok(pairs(z.nrows()).all(|(i, j)| {
        let prod = s[i] * s[j];
        prod > 0.0 && prod > total * inv[(i, j)]
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub t_star: f64,
    /// Every sampled scale in `[t_star, t_max]` certified.
    pub persistence_verified: bool,
    /// `(t, verdict)` for every evaluated scale, in evaluation order.
    pub trace: Vec<(f64, bool)>,
}

struct Tracer<'a> {
    space: &'a MetricSpace,
    trace: Vec<(f64, bool)>,
}

impl Tracer<'_> {
    fn spd(&mut self, t: f64) -> Result<bool> {
        let verdict = spd_certificate(&self.space.scale(t)?).verdict;
        self.trace.push((t, verdict));
        Ok(verdict)
    }

    /// Shrinks `(lo, hi]` with `lo` failing and `hi` certified.
    fn bisect(&mut self, mut lo: f64, mut hi: f64) -> Result<f64> {
        while hi - lo > THRESHOLD_REL_PRECISION * hi {
            let mid = 0.5 * (lo + hi);
            if self.spd(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// First scale at which `tX` is strongly positive definite and stays so on a
/// logarithmic sample of `[t*, t_max]`.
pub fn spd_scale_threshold(space: &MetricSpace, t_max: f64) -> Result<ThresholdResult> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::NonpositiveScale(t_max));
    }
    let mut tracer = Tracer {
        space,
        trace: Vec::new(),
    };
    let start = t_max.min(1.0);
    let (mut lo, mut hi);
    if tracer.spd(start)? {
        hi = start;
        lo = 0.0;
        for _ in 0..200 {
            let t = 0.5 * hi;
            if tracer.spd(t)? {
                hi = t;
            } else {
                lo = t;
                break;
            }
        }
    } else {
        lo = start;
        hi = f64::NAN;
        let mut t = start;
        while t < t_max {
            t = (2.0 * t).min(t_max);
            if tracer.spd(t)? {
                hi = t;
                break;
            }
            lo = t;
        }
        if hi.is_nan() {
            return Err(Error::ThresholdNotFound { t_max });
        }
    }
    let mut t_star = if lo > 0.0 { tracer.bisect(lo, hi)? } else { hi };

    // persistence: the largest failing sample restarts the search above it
    let decades = (t_max / t_star).log10().max(0.0);
    let count = ((decades * PERSISTENCE_SAMPLES_PER_DECADE).ceil() as usize).max(1);
    let samples: Vec<f64> = (1..=count)
        .map(|k| t_star * (t_max / t_star).powf(k as f64 / count as f64))
        .collect();
    let verdicts = samples
        .iter()
        .map(|&t| tracer.spd(t))
        .collect::<Result<Vec<_>>>()?;
    if let Some(last_fail) = verdicts.iter().rposition(|&v| !v) {
        let Some(&next_ok) = samples.get(last_fail + 1) else {
            return Err(Error::ThresholdNotFound { t_max });
        };
        lo = samples[last_fail];
        hi = next_ok;
        t_star = tracer.bisect(lo, hi)?;
    }
    Ok(ThresholdResult {
        t_star,
        persistence_verified: true,
        trace: tracer.trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetFunctionKind {
    /// `f(Y) = −|Y|⁻¹`.
    InverseMagnitude,
    /// `f(Y) = (m − |tY|)/m² + (m − 1)/m` with `m = #Y`.
    ShiftedRemainder,
}

/// A quadruple `(Y, x, y)` whose second difference is not negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub subset: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub value: f64,
}

/// A covering pair `Y' = Y ∖ {y}` with `f(Y') ≥ f(Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetFunctionSummary {
    pub subsets: usize,
    pub f_count: usize,
    pub g_count: usize,
    pub h_count: usize,
    pub max_f: Option<f64>,
    pub max_g: Option<f64>,
    pub max_h: Option<f64>,
    /// Largest `|F − F(I)|` and `|G − G(I)|` against the discrete-space values.
    pub max_f_target_deviation: Option<f64>,
    pub max_g_target_deviation: Option<f64>,
    pub submodular: bool,
    pub increasing: bool,
}

/// Exhaustive evaluation of a set function on `2^X`.
///
/// `f_values` is indexed by subset bitmask. The family vectors follow a fixed
/// order: masks ascending, then pairs `x < y` inside the mask (`F`, `G`), or
/// removed points ascending (`H`, comparing `Y ∖ {y}` against `Y`).
#[derive(Debug, Clone, Serialize)]
pub struct SetFunctionReport {
    pub alpha: f64,
    pub kind: SetFunctionKind,
    pub t: Option<f64>,
    pub hypothesis_holds: Option<bool>,
    pub warnings: Vec<String>,
    pub violations: Vec<Violation>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    pub summary: SetFunctionSummary,
    #[serde(skip)]
    pub f_values: Vec<f64>,
    #[serde(skip)]
    pub f_family: Vec<f64>,
    #[serde(skip)]
    pub g_family: Vec<f64>,
    #[serde(skip)]
    pub h_family: Vec<f64>,
}

/// `F_{Y,x,y}` at the identity similarity matrix, `m = #Y ≥ 3`.
pub fn f_target(m: usize) -> f64 {
    let m = m as f64;
    -2.0 / (m * (m - 1.0) * (m - 2.0))
}

/// `G_{x,y}` at the identity similarity matrix.
pub fn g_target(alpha: f64) -> f64 {
    0.5 + alpha
}

/// `H_{Y',Y}` at the identity similarity matrix for sizes `m' < m`.
pub fn h_target(m_small: usize, m: usize, alpha: f64) -> f64 {
    let mf = m as f64;
    if m_small == 0 {
        alpha - (mf - 1.0) / mf
    } else {
        let ms = m_small as f64;
        (ms - mf) / (mf * ms)
    }
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn subset_weighting(z: &DMatrix<f64>, mask: u64) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let sub = principal_submatrix(z, &members(mask));
    let w = weighting(&sub)?;
    Some((sub, w))
}

fn evaluate(z: &DMatrix<f64>, kind: SetFunctionKind, alpha: f64) -> Vec<f64> {
    let n = z.nrows();
    (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return alpha;
            }
            let m = mask.count_ones() as f64;
            match (kind, subset_weighting(z, mask)) {
                (_, None) => f64::NAN,
                (SetFunctionKind::InverseMagnitude, Some((_, w))) => -1.0 / w.sum(),
                (SetFunctionKind::ShiftedRemainder, Some((sub, w))) => {
                    remainder(&sub, &w) / (m * m) + (m - 1.0) / m
                }
            }
        })
        .collect()
}

fn build_report(
    f: Vec<f64>,
    n: usize,
    kind: SetFunctionKind,
    alpha: f64,
    t: Option<f64>,
    hypothesis_holds: Option<bool>,
    mut warnings: Vec<String>,
) -> SetFunctionReport {
    let masks = 1u64 << n;
    // (mask, x, y, value) for every quadruple with #Y ≥ 2
    let quads: Vec<(u64, usize, usize, f64)> = (1..masks)
        .into_par_iter()
        .filter(|m| m.count_ones() >= 2)
        .flat_map_iter(|mask| {
            let f = &f;
            let elems = members(mask);
            let list: Vec<_> = pairs(elems.len())
                .map(|(a, b)| {
                    let (x, y) = (elems[a], elems[b]);
                    let (bx, by) = (1u64 << x, 1u64 << y);
                    let v = f[mask as usize] - f[(mask ^ bx) as usize] - f[(mask ^ by) as usize]
                        + f[(mask ^ bx ^ by) as usize];
                    (mask, x, y, v)
                })
                .collect();
            list
        })
        .collect();
    let covers: Vec<(u64, usize, f64)> = (1..masks)
        .into_par_iter()
        .flat_map_iter(|mask| {
            let f = &f;
            members(mask)
                .into_iter()
                .map(move |y| (mask, y, f[(mask ^ (1u64 << y)) as usize] - f[mask as usize]))
        })
        .collect();

    let mut f_family = Vec::new();
    let mut g_family = Vec::new();
    let mut max_f_dev: Option<f64> = None;
    let mut max_g_dev: Option<f64> = None;
    let mut violations = Vec::new();
    for &(mask, x, y, v) in &quads {
        let m = mask.count_ones() as usize;
        if m == 2 {
            g_family.push(v);
            let d = (v - g_target(alpha)).abs();
            max_g_dev = Some(max_g_dev.map_or(d, |c| c.max(d)));
        } else {
            f_family.push(v);
            let d = (v - f_target(m)).abs();
            max_f_dev = Some(max_f_dev.map_or(d, |c| c.max(d)));
        }
        if v >= 0.0 || v.is_nan() {
            violations.push(Violation {
                subset: members(mask),
                x,
                y,
                value: v,
            });
        }
    }
    let mut h_family = Vec::with_capacity(covers.len());
    let mut monotonicity_violations = Vec::new();
    for &(mask, y, v) in &covers {
        h_family.push(v);
        if v >= 0.0 || v.is_nan() {
            monotonicity_violations.push(MonotonicityViolation {
                smaller: members(mask ^ (1u64 << y)),
                larger: members(mask),
                value: v,
            });
        }
    }
    violations.sort_by(|a, b| (&a.subset, a.x, a.y).cmp(&(&b.subset, b.x, b.y)));
    monotonicity_violations.sort_by(|a, b| (&a.larger, &a.smaller).cmp(&(&b.larger, &b.smaller)));

    if f.iter().any(|v| v.is_nan()) {
        warnings.push("some subsets have no magnitude; their quadruples count as violations".into());
    }
    let max = |v: &[f64]| v.iter().copied().reduce(f64::max);
    let summary = SetFunctionSummary {
        subsets: f.len(),
        f_count: f_family.len(),
        g_count: g_family.len(),
        h_count: h_family.len(),
        max_f: max(&f_family),
        max_g: max(&g_family),
        max_h: max(&h_family),
        // the identity-matrix values are targets for the shifted function only
        max_f_target_deviation: max_f_dev.filter(|_| kind == SetFunctionKind::ShiftedRemainder),
        max_g_target_deviation: max_g_dev.filter(|_| kind == SetFunctionKind::ShiftedRemainder),
        submodular: violations.is_empty(),
        increasing: monotonicity_violations.is_empty(),
    };
    SetFunctionReport {
        alpha,
        kind,
        t,
        hypothesis_holds,
        warnings,
        violations,
        monotonicity_violations,
        summary,
        f_values: f,
        f_family,
        g_family,
        h_family,
    }
}

fn check_size(space: &MetricSpace) -> Result<()> {
    if space.len() > N_EXHAUSTIVE {
        return Err(Error::TooManyPoints {
            n: space.len(),
            max: N_EXHAUSTIVE,
        });
    }
    Ok(())
}

/// Exhaustive check of `f(Y) = −|Y|⁻¹`, `f(∅) = α`. A space that is not
/// strongly positive definite is still checked, with a warning.
pub fn check_inverse_submodularity(space: &MetricSpace, alpha: f64) -> Result<SetFunctionReport> {
    check_size(space)?;
    let holds = spd_certificate(space).verdict;
    let mut warnings = Vec::new();
    if !holds {
        warnings.push("space is not strongly positive definite".to_string());
    }
    let f = evaluate(&similarity_matrix(space), SetFunctionKind::InverseMagnitude, alpha);
    Ok(build_report(
        f,
        space.len(),
        SetFunctionKind::InverseMagnitude,
        alpha,
        None,
        Some(holds),
        warnings,
    ))
}

/// Exhaustive check of `f(Y) = (m − |tY|)/m² + (m − 1)/m`, `f(∅) = α`, on `tX`.
pub fn check_shifted_submodularity(space: &MetricSpace, t: f64, alpha: f64) -> Result<SetFunctionReport> {
    check_size(space)?;
    let scaled = space.scale(t)?;
    let f = evaluate(&similarity_matrix(&scaled), SetFunctionKind::ShiftedRemainder, alpha);
    Ok(build_report(
        f,
        space.len(),
        SetFunctionKind::ShiftedRemainder,
        alpha,
        Some(t),
        None,
        Vec::new(),
    ))
}

/// Largest grid scale at which the shifted set function has any violation.
pub fn shifted_violation_onset(space: &MetricSpace, alpha: f64, grid: &[f64]) -> Result<Option<f64>> {
    let mut onset = None;
    for &t in grid {
        let report = check_shifted_submodularity(space, t, alpha)?;
        if !(report.violations.is_empty() && report.monotonicity_violations.is_empty()) {
            onset = Some(onset.map_or(t, |o: f64| o.max(t)));
        }
    }
    Ok(onset)
}

/// Strong positive definiteness of every nonempty subspace.
pub fn closure_holds(space: &MetricSpace) -> Result<bool> {
    check_size(space)?;
    let n = space.len();
    (1..1u64 << n).into_par_iter().try_fold(
        || true,
        |acc, mask| Ok(acc && spd_certificate(&space.restrict(&SubsetSelector::from_mask(mask, n))?).verdict),
    )
    .try_reduce(|| true, |a, b| Ok(a && b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DEFAULT_METRIC_TOLERANCE;

    fn discrete(n: usize, d: f64) -> MetricSpace {
        MetricSpace::from_rows(
            &(0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect())
                .collect::<Vec<_>>(),
            DEFAULT_METRIC_TOLERANCE,
        )
        .unwrap()
    }

    fn cluster_triple() -> MetricSpace {
        MetricSpace::from_rows(
            &[vec![0.0, 2.0, 100.0], vec![2.0, 0.0, 100.0], vec![100.0, 100.0, 0.0]],
            DEFAULT_METRIC_TOLERANCE,
        )
        .unwrap()
    }

    fn k32() -> MetricSpace {
        // complete bipartite graph K_{3,2} with its path metric
        let side = |i: usize| usize::from(i >= 3);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| match (i == j, side(i) == side(j)) {
                        (true, _) => 0.0,
                        (false, true) => 2.0,
                        (false, false) => 1.0,
                    })
                    .collect()
            })
            .collect();
        MetricSpace::from_rows(&rows, DEFAULT_METRIC_TOLERANCE).unwrap()
    }

    #[test]
    fn discrete_space_is_spd() {
        let cert = spd_certificate(&discrete(4, 800.0));
        assert!(cert.verdict && cert.consistent());
        assert_eq!(
            cert.characterizations,
            Characterizations {
                kdag_sign_pattern: true,
                m_matrix: true,
                laplacian: true,
                circumcenter_interior: true
            }
        );
        assert!(spd_semialgebraic_check(&DMatrix::identity(4, 4)).unwrap());
    }

    #[test]
    fn two_point_spaces_are_spd() {
        for d in [0.01, 0.5, 3.0, 30.0] {
            let x = discrete(2, d);
            let cert = spd_certificate(&x);
            assert!(cert.verdict && cert.consistent(), "d = {d}");
            assert!(spd_semialgebraic_check(&similarity_matrix(&x)).unwrap());
        }
    }

    #[test]
    fn example_certificate_is_consistent() {
        for t in [0.05, 0.3, 1.0, 5.0] {
            let x = cluster_triple().scale(t).unwrap();
            let cert = spd_certificate(&x);
            assert!(cert.consistent(), "t = {t}: {cert:?}");
            assert_eq!(cert.verdict, spd_semialgebraic_check(&similarity_matrix(&x)).unwrap());
        }
    }

    #[test]
    fn singular_space_fails_certificate() {
        let x = k32().scale(2f64.sqrt().ln()).unwrap();
        let cert = spd_certificate(&x);
        assert!(!cert.is_pd && !cert.verdict);
        assert_eq!(
            spd_semialgebraic_check(&similarity_matrix(&x)),
            Err(Error::SingularZ)
        );
    }

    #[test]
    fn threshold_of_discrete_is_small() {
        let r = spd_scale_threshold(&discrete(3, 1.0), 100.0).unwrap();
        assert!(r.t_star <= 1.0);
        assert!(r.persistence_verified);
        assert!(spd_certificate(&discrete(3, 1.0).scale(r.t_star).unwrap()).verdict);
    }

    #[test]
    fn threshold_of_k32() {
        let x = k32();
        let r = spd_scale_threshold(&x, 1e4).unwrap();
        assert!(spd_certificate(&x.scale(r.t_star).unwrap()).verdict);
        assert!(!spd_certificate(&x.scale(r.t_star * (1.0 - 1e-5)).unwrap()).verdict);
        assert!(matches!(
            spd_scale_threshold(&x, 0.01),
            Err(Error::ThresholdNotFound { .. })
        ));
    }

    #[test]
    fn targets() {
        assert!((f_target(4) + 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(g_target(-1.0), -0.5);
        assert_eq!(h_target(0, 1, -1.0), -1.0);
        assert!((h_target(2, 3, 0.0) + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_submodularity_two_point_boundary() {
        // the pair quadruple is −(1 + δ)/2 + 2 + α, negative iff α < −3/2 + δ/2
        let d = 2.0f64;
        let delta = (-d).exp();
        let x = discrete(2, d);
        let at = |alpha: f64| check_inverse_submodularity(&x, alpha).unwrap();
        let r = at(-2.0);
        assert!(r.violations.is_empty() && r.monotonicity_violations.is_empty());
        assert_eq!(r.f_values[1], -1.0);
        assert!((r.g_family[0] - (-(1.0 + delta) / 2.0 + 2.0 - 2.0)).abs() < 1e-14);
        assert_eq!(at(-1.4).violations.len(), 1);
        assert!(at(-1.5 + delta / 2.0 - 1e-9).violations.is_empty());
    }

    #[test]
    fn shifted_discrete_limit() {
        let x = discrete(5, 1.0);
        let r = check_shifted_submodularity(&x, 200.0, -1.0).unwrap();
        assert!(r.violations.is_empty() && r.monotonicity_violations.is_empty());
        assert!(r.summary.max_f_target_deviation.unwrap() < 1e-12);
        assert!(r.summary.max_g_target_deviation.unwrap() < 1e-12);
        for mask in 1..32u64 {
            let m = mask.count_ones() as f64;
            assert!((r.f_values[mask as usize] - (m - 1.0) / m).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_points() {
        let x = discrete(17, 1.0);
        assert!(matches!(
            check_inverse_submodularity(&x, -2.0),
            Err(Error::TooManyPoints { n: 17, max: 16 })
        ));
    }

    #[test]
    fn closure_on_discrete() {
        assert!(closure_holds(&discrete(5, 3.0)).unwrap());
    }
}

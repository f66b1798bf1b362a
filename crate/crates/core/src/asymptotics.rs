//! Scale sweeps `t ↦ |tX|`, the remainder `q(tX) = n − |tX|` and its leading
//! asymptote in terms of the circumradius of the scaled embedding.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::circumradius_equilibrium;
use crate::error::{Error, Result};
use crate::identities::CoefficientData;
use crate::metric::MetricSpace;
use crate::similarity::{Definiteness, SimilarityData};

/// Points per decade of [`log_grid`].
pub const GRID_POINTS_PER_DECADE: usize = 32;

/// `n − |tX|` carries no digits below this fraction of `n`.
pub const REMAINDER_FLOOR_REL: f64 = 1e-13;

/// Smallest remainder accepted by [`asymptotic_ratio`].
pub const REMAINDER_UNDERFLOW: f64 = 1e-300;

/// `q = 1ᵀ(Z − I)w = Σ_{i≠j} z_ij w_j`, equal to `n − 1ᵀw` whenever `Zw = 1`.
/// Summing the off-diagonal terms keeps full relative precision when `|X|` is close to `n`.
pub fn remainder(z: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let n = z.nrows();
    let mut q = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                q += z[(i, j)] * w[j];
            }
        }
    }
    q
}

/// `count` log-spaced scales from `t_min` to `t_max`, or [`GRID_POINTS_PER_DECADE`]
/// per decade when `count` is `None`.
pub fn log_grid(t_min: f64, t_max: f64, count: Option<usize>) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max.is_finite() && t_max >= t_min) {
        return Err(Error::InvalidGrid(format!("need 0 < t_min <= t_max, got [{t_min}, {t_max}]")));
    }
    let count = count.unwrap_or_else(|| {
        ((t_max / t_min).log10() * GRID_POINTS_PER_DECADE as f64).round() as usize + 1
    });
    if count == 0 {
        return Err(Error::InvalidGrid("grid size must be positive".into()));
    }
    if count == 1 || t_min == t_max {
        return Ok(vec![t_min]);
    }
    let ratio = (t_max / t_min).ln();
    Ok((0..count)
        .map(|k| match k {
            0 => t_min,
            k if k == count - 1 => t_max,
            k => t_min * (ratio * k as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidGrid(format!("scale {t} is not a positive finite number")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t: f64,
    pub magnitude: Option<f64>,
    /// `n − |tX|`, summed from the off-diagonal terms.
    pub q: Option<f64>,
    /// `q` is below `REMAINDER_FLOOR_REL · n`, where `n − |tX|` itself would be noise.
    pub below_floor: bool,
    pub r_squared: Option<f64>,
    /// `n²((n − 1)/n − 2R²)`.
    pub asymptote: Option<f64>,
    pub definiteness: Definiteness,
}

pub fn sweep_point(space: &MetricSpace, t: f64) -> Result<SweepPoint> {
    let scaled = space.scale(t)?;
    let n = space.len() as f64;
    let data = SimilarityData::new(&scaled);
    let q = data.weighting().map(|w| remainder(data.z(), w));
    let magnitude = data.magnitude();
    let (r_squared, asymptote) = match (data.definiteness().is_positive_definite(), magnitude, q) {
        (true, Some(mag), Some(q)) => {
            let (r, _) = circumradius_equilibrium(data.z())?;
            // (n − 1)/n − 2R² = q / (n |X|) because 1 − 2R² = 1/|X|
            (Some(r * r), Some(n * q / mag))
        }
        _ => (None, None),
    };
    Ok(SweepPoint {
        t,
        magnitude,
        q,
        below_floor: q.is_some_and(|q| q.abs() < REMAINDER_FLOOR_REL * n),
        r_squared,
        asymptote,
        definiteness: data.definiteness(),
    })
}

/// Independent sweep points, evaluated in parallel and returned in grid order.
pub fn magnitude_sweep(space: &MetricSpace, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    check_grid(grid)?;
    grid.par_iter().map(|&t| sweep_point(space, t)).collect()
}

/// `q(tX) / (n²((n − 1)/n − 2R(S_t)²))`, which tends to 1 as `t` grows.
pub fn asymptotic_ratio(space: &MetricSpace, t: f64) -> Result<f64> {
    let p = sweep_point(space, t)?;
    if !p.definiteness.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let (Some(q), Some(asymptote)) = (p.q, p.asymptote) else {
        return Err(Error::NotPositiveDefinite);
    };
    if q.abs() < REMAINDER_UNDERFLOW || asymptote.abs() < REMAINDER_UNDERFLOW {
        return Err(Error::DegenerateRemainder);
    }
    Ok(q / asymptote)
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("t,magnitude,q,R_squared,asymptote,definiteness\n");
    for p in points {
        let q = if p.below_floor { "below_floor".to_string() } else { field(p.q) };
        let _ = writeln!(
            out,
            "{:.16e},{},{},{},{},{:?}",
            p.t,
            field(p.magnitude),
            q,
            field(p.r_squared),
            field(p.asymptote),
            p.definiteness
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointRow {
    pub t: f64,
    pub exact: f64,
    pub approx: f64,
    pub relative_error: f64,
}

/// Exact remainder `2/(1 + e^{td})` of two points at distance `d` against `2e^{−td}`.
pub fn two_point_approximation(d: f64, grid: &[f64]) -> Result<Vec<TwoPointRow>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::NonpositiveScale(d));
    }
    if let Some(t) = grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidGrid(format!("scale {t} is not a nonnegative finite number")));
    }
    Ok(grid
        .iter()
        .map(|&t| {
            let e = (-t * d).exp();
            // 2/(1 + e^{td}) written in e^{−td} to stay finite for large t
            let exact = 2.0 * e / (1.0 + e);
            let approx = 2.0 * e;
            TwoPointRow {
                t,
                exact,
                approx,
                relative_error: (exact - approx).abs() / approx,
            }
        })
        .collect())
}

pub fn two_point_csv(rows: &[TwoPointRow]) -> String {
    let mut out = String::from("t,magnitude,approx_magnitude,exact_q,approx_q,relative_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t,
            2.0 - r.exact,
            2.0 - r.approx,
            r.exact,
            r.approx,
            r.relative_error
        );
    }
    out
}

/// Per-point weights `w_x/|tX|` and deletion changes `2w_x²/(c̄_x|tX|)` along a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionRow {
    pub t: f64,
    pub magnitude: f64,
    pub relative_weight: Vec<f64>,
    pub change: Vec<f64>,
}

pub fn contribution_sweep(space: &MetricSpace, grid: &[f64]) -> Result<Vec<ContributionRow>> {
    check_grid(grid)?;
    grid.par_iter()
        .map(|&t| {
            let data = SimilarityData::new(&space.scale(t)?);
            if !data.definiteness().is_positive_definite() {
                return Err(Error::NotPositiveDefinite);
            }
            let w = data.weighting().ok_or(Error::NoSolution)?;
            let mag = w.sum();
            let coeffs = CoefficientData::from_similarity(data.z());
            Ok(ContributionRow {
                t,
                magnitude: mag,
                relative_weight: w.iter().map(|x| x / mag).collect(),
                change: w
                    .iter()
                    .enumerate()
                    .map(|(i, x)| 2.0 * x * x / (coeffs.cbar(i) * mag))
                    .collect(),
            })
        })
        .collect()
}

pub fn contribution_csv(rows: &[ContributionRow]) -> String {
    let n = rows.first().map_or(0, |r| r.relative_weight.len());
    let mut out = String::from("t,magnitude");
    for i in 1..=n {
        let _ = write!(out, ",weight_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",change_{i}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:.16e},{:.16e}", r.t, r.magnitude);
        for v in r.relative_weight.iter().chain(&r.change) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

//! Small reference spaces with known magnitude behavior.

use crate::error::Result;
use crate::metric::{MetricSpace, DEFAULT_METRIC_TOLERANCE};

fn uniform(n: usize, d: f64) -> Result<MetricSpace> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect())
        .collect();
    MetricSpace::from_rows(&rows, DEFAULT_METRIC_TOLERANCE)
}

/// Two points at distance `d`; `|X| = 1 + tanh(d/2)`.
pub fn two_point(d: f64) -> Result<MetricSpace> {
    uniform(2, d)
}

/// `n` points at mutual distance `d`.
pub fn equidistant(n: usize, d: f64) -> Result<MetricSpace> {
    uniform(n, d)
}

/// Points 1 and 2 at distance 2, both at distance 100 from point 3.
/// Its magnitude has plateaus near 1, 2 and 3 as the scale grows.
pub fn three_point_cluster() -> MetricSpace {
    MetricSpace::from_rows(
        &[vec![0.0, 2.0, 100.0], vec![2.0, 0.0, 100.0], vec![100.0, 100.0, 0.0]],
        DEFAULT_METRIC_TOLERANCE,
    )
    .expect("valid metric")
}

/// Distances `ln 2` between points 1, 2 and `ln 10` to point 3, so that
/// `Z = [[1, ½, 1/10], [½, 1, 1/10], [1/10, 1/10, 1]]`.
pub fn three_point_golden() -> MetricSpace {
    let (a, b) = (2f64.ln(), 10f64.ln());
    MetricSpace::from_rows(
        &[vec![0.0, a, b], vec![a, 0.0, b], vec![b, b, 0.0]],
        DEFAULT_METRIC_TOLERANCE,
    )
    .expect("valid metric")
}

/// Path metric of the complete bipartite graph `K_{3,2}`, whose similarity
/// matrix is singular at scale `ln √2`.
pub fn complete_bipartite_3_2() -> MetricSpace {
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
    MetricSpace::from_rows(&rows, DEFAULT_METRIC_TOLERANCE).expect("valid metric")
}

#![allow(dead_code)]

use magkit::metric::MetricSpace;
use magkit::similarity::similarity_matrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in `[0, side]^dim`, rejecting draws closer than `min_sep` to an earlier point.
pub fn cloud_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, side: f64, min_sep: f64) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    while points.len() < n {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..side)).collect();
        let far = points.iter().all(|q| {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum();
            d2.sqrt() >= min_sep
        });
        if far {
            points.push(p);
        }
    }
    points
}

pub fn cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, side: f64, min_sep: f64) -> MetricSpace {
    MetricSpace::from_points_euclidean(&cloud_points(rng, n, dim, side, min_sep)).unwrap()
}

/// Well-separated Euclidean cloud in 3 dimensions; Euclidean spaces are
/// positive definite at every scale.
pub fn pd_instance(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let side = 1.2 * (n as f64).cbrt() + 0.5;
    cloud(rng, n, 3, side, 0.3)
}

/// Shortest-path metric of a complete graph with random edge lengths.
pub fn graph_metric(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> MetricSpace {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(lo..hi);
            d[(i, j)] = w;
            d[(j, i)] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    MetricSpace::from_distance_matrix(&d, 1e-9).unwrap()
}

/// `1ᵀZ⁻¹1` through a dense inverse.
pub fn dense_magnitude(space: &MetricSpace) -> f64 {
    similarity_matrix(space).try_inverse().unwrap().sum()
}

pub fn dense_weighting(space: &MetricSpace) -> DVector<f64> {
    let n = space.len();
    similarity_matrix(space).try_inverse().unwrap() * DVector::from_element(n, 1.0)
}

pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// `‖a − b‖_max / max(‖b‖_max, 1)`.
pub fn mat_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

pub fn vec_dev(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

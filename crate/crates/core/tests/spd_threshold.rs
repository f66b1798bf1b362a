mod common;

use common::{cloud, graph_metric, pd_instance, rng};
use magkit::spaces::{three_point_cluster, two_point};
use magkit::spd::{
    check_inverse_submodularity, check_shifted_submodularity, closure_holds, shifted_violation_onset, spd_certificate,
    spd_scale_threshold, spd_semialgebraic_check,
};
use magkit::similarity::similarity_matrix;
use magkit::Error;

#[test]
fn cluster_threshold_is_finite_and_persistent() {
    let space = three_point_cluster();
    let result = spd_scale_threshold(&space, 1e4).unwrap();
    assert!(result.t_star.is_finite() && result.t_star > 0.0);
    assert!(result.persistence_verified);
    for factor in [2.0, 10.0] {
        let scaled = space.scale(factor * result.t_star).unwrap();
        assert!(spd_certificate(&scaled).verdict, "not SPD at {factor}·t*");
    }
}

#[test]
fn threshold_exceeds_one_when_a_coefficient_is_negative() {
    let mut found = false;
    for seed in 0..500 {
        let space = cloud(&mut rng(seed), 6, 2, 1.5, 0.1);
        let cert = spd_certificate(&space);
        if !cert.is_pd || cert.c_positive {
            continue;
        }
        let result = spd_scale_threshold(&space, 1e4).unwrap();
        assert!(result.t_star > 1.0, "seed {seed}: t* = {}", result.t_star);
        assert!(spd_certificate(&space.scale(result.t_star).unwrap()).verdict);
        found = true;
        break;
    }
    assert!(found, "no 6-point PD space with a negative coefficient at t = 1");
}

#[test]
fn every_finite_space_is_eventually_spd() {
    for seed in 0..10 {
        let space = graph_metric(&mut rng(seed), 6, 0.5, 3.0);
        let result = spd_scale_threshold(&space, 1e4).unwrap();
        assert!(result.persistence_verified, "seed {seed}");
        assert!(result.trace.iter().any(|&(t, ok)| ok && t == result.t_star));
    }
}

#[test]
fn threshold_rejects_bad_limits() {
    let space = two_point(1.0).unwrap();
    assert!(spd_scale_threshold(&space, 0.0).is_err());
    assert!(spd_scale_threshold(&space, f64::NAN).is_err());
}

#[test]
fn semialgebraic_test_agrees_with_certificate() {
    let mut disagreements = 0;
    for seed in 0..100 {
        let space = cloud(&mut rng(seed), 5, 2, 2.0, 0.2);
        let cert = spd_certificate(&space);
        let z = similarity_matrix(&space);
        if spd_semialgebraic_check(&z).unwrap() != cert.verdict && cert.boundary.is_empty() {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn characterizations_are_consistent() {
    for seed in 0..100 {
        let space = cloud(&mut rng(seed), 6, 2, 2.0, 0.2);
        let cert = spd_certificate(&space);
        if cert.boundary.is_empty() {
            assert!(cert.consistent(), "seed {seed}: {cert:?}");
        }
    }
}

#[test]
fn inverse_magnitude_is_submodular_on_spd_spaces() {
    let mut checked = 0;
    for seed in 0..60 {
        let space = pd_instance(&mut rng(seed), 6);
        if !spd_certificate(&space).verdict {
            continue;
        }
        checked += 1;
        let report = check_inverse_submodularity(&space, -2.0).unwrap();
        assert_eq!(report.hypothesis_holds, Some(true));
        assert!(report.violations.is_empty(), "seed {seed}: {:?}", report.violations.first());
        assert!(report.monotonicity_violations.is_empty());
        assert!(report.summary.submodular && report.summary.increasing);
        assert!(closure_holds(&space).unwrap());
    }
    assert!(checked >= 5);
}

#[test]
fn shifted_function_is_submodular_at_large_scale() {
    let space = pd_instance(&mut rng(11), 5);
    let t = 10.0 / space.min_distance().unwrap();
    let report = check_shifted_submodularity(&space, t, -2.0).unwrap();
    assert!(report.violations.is_empty());
    assert!(report.summary.max_g_target_deviation.is_some());
}

#[test]
fn shifted_onset_lies_on_the_grid() {
    let space = pd_instance(&mut rng(5), 5);
    let grid = magkit::asymptotics::log_grid(1e-2, 1e2, Some(40)).unwrap();
    if let Some(t) = shifted_violation_onset(&space, -2.0, &grid).unwrap() {
        assert!(grid.contains(&t));
        assert!(!check_shifted_submodularity(&space, t, -2.0).unwrap().violations.is_empty());
    }
}

#[test]
fn large_spaces_are_refused() {
    let space = pd_instance(&mut rng(1), 17);
    assert!(matches!(check_inverse_submodularity(&space, -2.0), Err(Error::TooManyPoints { .. })));
}

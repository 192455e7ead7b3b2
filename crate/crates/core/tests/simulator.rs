//! Field sampling, evaluation and critical point counting on the torus.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_crit::error::Error;
use torus_crit::radial_weight::WeightSpec;
use torus_crit::sym_ensembles::Estimate;
use torus_crit::torus_simulator::*;

fn gaussian() -> WeightSpec {
    WeightSpec::gaussian(1.0).unwrap()
}

fn count(m: usize, coeffs: &[([i32; 2], f64)]) -> CriticalPointReport {
    count_critical_points(&FieldSample::from_coefficients(m, 0.1, 8, coeffs).unwrap()).unwrap()
}

#[test]
fn truncation_orders() {
    assert_eq!(truncation_order(&gaussian(), 0.05).unwrap(), 16);
    assert!((-(1.6 * PI).powi(2)).exp() < 1e-10);
    assert_eq!(truncation_order(&gaussian(), 0.1).unwrap(), 8);
    assert!(truncation_order(&gaussian(), 0.3).is_err());
}

#[test]
fn single_cosine() {
    let r = count(1, &[([-1, 0], 1.0)]);
    assert_eq!(r.count, 2);
    let mut xs: Vec<f64> = r.locations.iter().map(|l| l[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert!(xs[0].abs() < 1e-12 || (1.0 - xs[0]).abs() < 1e-12 || (xs[0] - 0.5).abs() < 1e-12);
    assert!((xs[1] - 0.5).abs() < 1e-12 || (xs[1] - 1.0).abs() < 1e-12);
}

#[test]
fn two_harmonic_cosine() {
    // u' ∝ sin 2πθ (1 + 4a cos 2πθ) for u = cos 2πθ + a cos 4πθ: the second
    // factor has zeros iff 4a > 1.
    assert_eq!(count(1, &[([-1, 0], 1.0), ([-2, 0], 0.2)]).count, 2);
    assert_eq!(count(1, &[([-1, 0], 1.0), ([-2, 0], 0.4)]).count, 4);
}

#[test]
fn planar_sum_of_cosines() {
    let r = count(2, &[([-1, 0], 1.0 / SQRT_2), ([0, -1], 1.0 / SQRT_2)]);
    assert_eq!(r.count, 4);
    assert_eq!(r.signed_count, 0);
    let mut indices = r.indices.clone();
    indices.sort();
    assert_eq!(indices, vec![0, 1, 1, 2]);
}

#[test]
fn unit_cosine_value() {
    let s = FieldSample::from_coefficients(1, 0.1, 8, &[([-1, 0], 1.0)]).unwrap();
    assert_eq!(eval_field(&s, &[0.0], 0).unwrap(), FieldEval::Value(SQRT_2));
}

#[test]
fn zero_field() {
    let s = FieldSample::zero(2, 0.1, 8).unwrap();
    assert!(s.modes.iter().all(|m| m.coeff == 0.0));
    assert_eq!(eval_field(&s, &[0.3, 0.7], 0).unwrap(), FieldEval::Value(0.0));
    assert!(matches!(count_critical_points(&s), Err(Error::Counting { .. })));
}

#[test]
fn first_mode_variance() {
    let w = gaussian();
    let eps = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| sample_field(&w, 1, eps, &mut rng).unwrap().coefficient([1, 0]).unwrap().powi(2))
        .collect();
    let e = Estimate::from_samples(&xs);
    let target = (-(2.0 * PI * eps).powi(2)).exp();
    assert!((e.mean - target).abs() < 3.0 * e.std_error, "{} ± {} vs {target}", e.mean, e.std_error);
}

#[test]
fn periodic_in_each_coordinate() {
    let s = sample_indexed_field(&gaussian(), 2, 0.1, 3, 0).unwrap();
    for theta in [[0.125, 0.375], [0.5, 0.0625], [0.8125, 0.9375]] {
        let base = eval_field(&s, &theta, 1).unwrap();
        assert_eq!(eval_field(&s, &[theta[0] + 1.0, theta[1]], 1).unwrap(), base);
        assert_eq!(eval_field(&s, &[theta[0], theta[1] - 1.0], 1).unwrap(), base);
    }
}

fn gradient(s: &FieldSample, theta: &[f64]) -> Vec<f64> {
    match eval_field(s, theta, 1).unwrap() {
        FieldEval::Gradient(g) => g,
        other => panic!("expected a gradient, got {other:?}"),
    }
}

#[test]
fn hessian_matches_finite_differences() {
    let s = sample_indexed_field(&gaussian(), 2, 0.1, 4, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let h = 1e-6;
    for _ in 0..10 {
        let theta = [rng.random::<f64>(), rng.random::<f64>()];
        let FieldEval::Hessian(hess) = eval_field(&s, &theta, 2).unwrap() else { panic!() };
        let scale = hess.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for j in 0..2 {
            let mut plus = theta;
            let mut minus = theta;
            plus[j] += h;
            minus[j] -= h;
            let (gp, gm) = (gradient(&s, &plus), gradient(&s, &minus));
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                assert!((fd - hess[i][j]).abs() < 1e-6 * scale, "({i},{j}): {fd} vs {}", hess[i][j]);
            }
        }
    }
}

#[test]
fn circle_counts_are_even() {
    for i in 0..200 {
        let r = count_critical_points(&sample_indexed_field(&gaussian(), 1, 0.05, 9, i).unwrap()).unwrap();
        assert_eq!(r.count % 2, 0, "field {i}");
        assert_eq!(r.signed_count, 0, "field {i}");
    }
}

#[test]
fn planar_index_sum_vanishes() {
    for i in 0..50 {
        let s = sample_indexed_field(&gaussian(), 2, 0.1, 10, i).unwrap();
        let r = count_critical_points(&s).unwrap();
        let signed: i64 = r.indices.iter().map(|&k| if k % 2 == 0 { 1 } else { -1 }).sum();
        assert_eq!(signed, 0, "field {i}");
        assert_eq!(r.signed_count, 0, "field {i}");
        assert!(r.max_residual < 1e-6, "field {i}: residual {}", r.max_residual);
        for (a, p) in r.locations.iter().enumerate() {
            for q in &r.locations[a + 1..] {
                let d: f64 = (0..2)
                    .map(|k| {
                        let t = (p[k] - q[k]).rem_euclid(1.0);
                        t.min(1.0 - t).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt();
                assert!(d > r.dedup_radius, "field {i}: roots {p:?} and {q:?}");
            }
        }
    }
}

#[test]
fn counts_survive_refinement() {
    // Every count is validated against a doubled grid internally; an
    // unstable count surfaces as an error rather than a number.
    for i in 0..500 {
        let s = sample_indexed_field(&gaussian(), 1, 0.05, 11, i).unwrap();
        count_critical_points(&s).unwrap_or_else(|e| panic!("field {i}: {e}"));
    }
    for i in 0..100 {
        let s = sample_indexed_field(&gaussian(), 2, 0.2, 11, i).unwrap();
        count_critical_points(&s).unwrap_or_else(|e| panic!("field {i}: {e}"));
    }
}

#[test]
fn indexed_fields_are_deterministic() {
    let a = sample_indexed_field(&gaussian(), 2, 0.1, 12, 7).unwrap();
    let b = sample_indexed_field(&gaussian(), 2, 0.1, 12, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.provenance, Some((12, 7)));
    assert_eq!(count_critical_points(&a).unwrap(), count_critical_points(&b).unwrap());
    assert_ne!(a, sample_indexed_field(&gaussian(), 2, 0.1, 12, 8).unwrap());
}

#[test]
fn moments_are_thread_count_independent() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| empirical_moments(&gaussian(), 1, 0.1, 200, 13).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.variance_std_error.to_bits(), b.variance_std_error.to_bits());
}

#[test]
fn mean_scales_inversely_with_epsilon() {
    let coarse = empirical_moments(&gaussian(), 1, 0.05, 2000, 14).unwrap();
    let fine = empirical_moments(&gaussian(), 1, 0.025, 2000, 15).unwrap();
    let se = fine.mean_std_error.hypot(2.0 * coarse.mean_std_error);
    assert!((fine.mean - 2.0 * coarse.mean).abs() < 3.0 * se, "{} vs 2 × {}", fine.mean, coarse.mean);
    assert_eq!(coarse.histogram.values().sum::<usize>(), 2000);
}

#[test]
fn too_few_fields_is_rejected() {
    assert!(empirical_moments(&gaussian(), 1, 0.1, 99, 0).is_err());
    assert!(empirical_moments(&gaussian(), 3, 0.1, 100, 0).is_err());
}

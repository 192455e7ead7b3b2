//! Oracles for the leading constants and the two-point correlation.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use torus_crit::asymptotic_constants::*;
use torus_crit::conditional_hessian::xi_bar;
use torus_crit::kernel::{det_script_h, script_h};
use torus_crit::radial_weight::*;

fn gaussian(m: usize) -> RadialProfile {
    make_profile(&WeightSpec::gaussian(1.0).unwrap(), m).unwrap()
}

fn along_first(m: usize, t: f64) -> Vec<f64> {
    let mut eta = vec![0.0; m];
    eta[0] = t;
    eta
}

/// `E|XY|` for a centred bivariate normal, written out independently.
fn abs_xy(sx2: f64, sy2: f64, cxy: f64) -> f64 {
    let (sx, sy) = (sx2.sqrt(), sy2.sqrt());
    let rho = cxy / (sx * sy);
    2.0 * sx * sy / PI * ((1.0 - rho * rho).sqrt() + rho * rho.asin())
}

#[test]
fn c1_closed_form_and_monte_carlo() {
    let oracle = 1.5f64.sqrt() / PI;
    assert_relative_eq!(oracle, 0.389847, epsilon = 2e-6);
    let c = c_m(&gaussian(1), 100_000, 0).unwrap();
    assert_relative_eq!(c.exact.unwrap(), oracle, max_relative = 1e-12);
    assert!((c.value - oracle).abs() < 1e-3);
    let mc = c.monte_carlo;
    assert!((mc.mean - oracle).abs() < 3.0 * mc.std_error, "{} ± {}", mc.mean, mc.std_error);
    assert!(c.forms_agree(4.0));
}

#[test]
fn c_m_ignores_weight_amplitude() {
    let lambda = 3.0;
    let table: Vec<(f64, f64)> = (0..=800).map(|i| {
        let t = i as f64 * 0.01;
        (t, lambda * (-t * t).exp())
    }).collect();
    let scaled = make_profile(&WeightSpec::tabulated(&table).unwrap(), 1).unwrap();
    let a = c_m(&gaussian(1), 1000, 0).unwrap().value;
    let b = c_m(&scaled, 1000, 0).unwrap().value;
    assert_relative_eq!(a, b, max_relative = 1e-6);
}

#[test]
fn k_at_infinity_and_unit_separation() {
    let p = gaussian(1);
    assert_relative_eq!(k_eta(&p, &EtaArg::Infinity).unwrap(), 1.0 / (PI * PI.sqrt()), max_relative = 1e-12);
    assert_relative_eq!(k_eta(&p, &EtaArg::Infinity).unwrap(), 0.179586, epsilon = 2e-6);
    let unit = k_eta(&p, &EtaArg::Finite(vec![1.0])).unwrap();
    let det = det_script_h(&script_h(&p, &[1.0], 0.0).unwrap());
    assert_relative_eq!(unit, 1.0 / (2.0 * PI * det.sqrt()), max_relative = 1e-12);
    // The quoted value carries a rounded determinant.
    assert_relative_eq!(unit, 0.19500, epsilon = 5e-5);
    assert!(k_eta(&p, &EtaArg::Finite(vec![0.0])).is_err());
}

#[test]
fn k_blows_up_like_inverse_power() {
    for m in 1..=3 {
        let p = gaussian(m);
        let scaled: Vec<f64> = [0.01f64, 0.02, 0.05, 0.1]
            .iter()
            .map(|&t| t.powi(m as i32) * k_eta(&p, &EtaArg::Finite(along_first(m, t))).unwrap())
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 1.02, "m = {m}: {scaled:?}");
    }
}

#[test]
fn delta0_decays() {
    let p = gaussian(1);
    assert!(delta0_exact_m1(&p, 20.0).unwrap().abs() < 1e-8);
    for t in [15.0, 17.5, 20.0, 30.0] {
        assert!(delta0_exact_m1(&p, t).unwrap().abs() < 1e-10, "t = {t}");
    }
    for m in 2..=3 {
        let d = delta0(&gaussian(m), &along_first(m, 20.0), 2000, 0).unwrap();
        assert!(d.mean.abs() < 1e-8, "m = {m}: {}", d.mean);
    }
}

#[test]
fn delta0_bivariate_closed_form() {
    let p = gaussian(1);
    let t = xi_bar(&p, &[1.0], 0.0).unwrap();
    let det = det_script_h(&script_h(&p, &[1.0], 0.0).unwrap());
    let (_, d, h) = p.moments();
    let near = abs_xy(t.same[(0, 0)], t.same[(0, 0)], t.cross[(0, 0)]) / det.sqrt();
    let far = 2.0 * 3.0 * h / PI / d;
    let exact = delta0_exact_m1(&p, 1.0).unwrap();
    assert_relative_eq!(exact, near - far, max_relative = 1e-12);
    let mc = delta0(&p, &[1.0], 100_000, 3).unwrap();
    assert!((mc.mean - exact).abs() < 4.0 * mc.std_error, "{} ± {} vs {exact}", mc.mean, mc.std_error);
}

#[test]
fn delta0_bounded_near_diagonal() {
    // |η|^{m-2}|δ₀(η)| on (0, 0.2], one frozen bound. For m = 1 the
    // subtracted far-field term is a nonzero constant, so only |δ₀| is bounded.
    const BOUND: f64 = 2.0;
    for m in 1..=3 {
        let radii: Vec<f64> = (1..=10).map(|k| 0.02 * k as f64).collect();
        for (t, v, _) in delta0_curve(&gaussian(m), &radii, 4000, 0).unwrap() {
            let scaled = t.powi(m as i32 - 2).min(1.0) * v.abs();
            assert!(scaled < BOUND, "m = {m}, t = {t}: {scaled}");
        }
    }
}

#[test]
fn product_law_consistency() {
    for m in 1..=2 {
        let p = gaussian(m);
        let c = c_m(&p, 100_000, 0).unwrap();
        let check = consistency_check(&p, &c, 100_000, 0).unwrap();
        assert!(check.within(3.0), "m = {m}: {check:?}");
    }
}

#[test]
fn prediction_scaling() {
    let p = gaussian(1);
    let config = CPrimeConfig::default();
    let c = c_m(&p, 1000, 0).unwrap();
    let cp = c_prime_m(&p, &config).unwrap();
    let coarse = predict_moments(&p, 0.05, &c, &cp, 1000, 0).unwrap();
    let fine = predict_moments(&p, 0.025, &c, &cp, 1000, 0).unwrap();
    assert_relative_eq!(coarse.mean_leading, 7.79694, epsilon = 1e-4);
    assert_relative_eq!(coarse.mean, coarse.mean_leading, max_relative = 1e-6);
    assert_relative_eq!(fine.mean_leading, 2.0 * coarse.mean_leading, max_relative = 1e-12);
    assert_relative_eq!(
        fine.variance_leading / fine.mean_leading,
        coarse.variance_leading / coarse.mean_leading,
        max_relative = 1e-12
    );
    assert!(coarse.warnings.is_empty());
    assert!(!predict_moments(&p, 0.3, &c, &cp, 1000, 0).unwrap().warnings.is_empty());
}

#[test]
fn two_point_tends_to_one() {
    for m in 1..=3 {
        let p = gaussian(m);
        let mut eta = vec![0.0; m];
        eta[m - 1] = 20.0;
        let r = two_point_correlation(&p, &eta, 4000, 0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6 + 3.0 * r.ratio_std_error, "m = {m}: {}", r.ratio);
    }
}

#[test]
fn two_point_hessian_factor_is_quadratic() {
    for m in 1..=3 {
        let p = gaussian(m);
        let f = |t: f64| two_point_correlation(&p, &along_first(m, t), 20_000, 0).unwrap().hessian_factor;
        let slope = (f(0.1) / f(0.02)).ln() / 5f64.ln();
        assert!((slope - 2.0).abs() < 0.2, "m = {m}: slope {slope}");
    }
}

#[test]
fn two_point_near_diagonal_bound() {
    // |η|^{m-2} times the ratio stays below one frozen constant on a small-η grid.
    const BOUND: f64 = 1.0;
    for m in 1..=3 {
        let p = gaussian(m);
        for t in [0.01, 0.02, 0.05, 0.1, 0.2] {
            let r = two_point_correlation(&p, &along_first(m, t), 20_000, 0).unwrap();
            assert!(r.ratio * t.powi(m as i32 - 2) < BOUND, "m = {m}, t = {t}: {}", r.ratio);
        }
    }
}

#[test]
fn two_point_is_rotation_invariant() {
    let p = gaussian(2);
    let a = two_point_correlation(&p, &[0.7, 0.0], 20_000, 0).unwrap();
    let (s, c) = 0.9f64.sin_cos();
    let b = two_point_correlation(&p, &[0.7 * c, 0.7 * s], 20_000, 5).unwrap();
    let se = a.ratio_std_error.hypot(b.ratio_std_error);
    assert!((a.ratio - b.ratio).abs() < 3.0 * se, "{} vs {}", a.ratio, b.ratio);
}

#[test]
fn radial_integral_matches_planar_grid() {
    let p = gaussian(2);
    let config = CPrimeConfig { n_mc: 2000, ..CPrimeConfig::default() };
    let radial = c_prime_m(&p, &config).unwrap();
    let grid = delta0_grid_integral(&p, radial.cutoff, 40, config.n_mc, config.seed).unwrap();
    assert_relative_eq!(radial.delta0_integral, grid, max_relative = 5e-2);
}

#[test]
fn c_prime_m1_is_deterministic_and_exact() {
    let p = gaussian(1);
    let a = c_prime_m(&p, &CPrimeConfig::default()).unwrap();
    let b = c_prime_m(&p, &CPrimeConfig { seed: 99, ..CPrimeConfig::default() }).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.mc_error, 0.0);
    assert!(a.quadrature_error < 1e-6);
    assert!(a.tail_bound < 1e-8);
}

#[test]
fn standard_error_follows_root_n() {
    let p = gaussian(2);
    let small = delta0(&p, &[0.5, 0.0], 2000, 1).unwrap().std_error;
    let large = delta0(&p, &[0.5, 0.0], 8000, 1).unwrap().std_error;
    let ratio = small / large;
    assert!((ratio - 2.0).abs() < 0.4, "SE ratio {ratio}");
}

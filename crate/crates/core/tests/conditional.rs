//! Oracles for the conditional Hessian covariance tensors.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use torus_crit::conditional_hessian::*;
use torus_crit::kernel::{sigma_tilde, IndexJ};
use torus_crit::radial_weight::*;

fn gaussian(m: usize) -> RadialProfile {
    make_profile(&WeightSpec::gaussian(1.0).unwrap(), m).unwrap()
}

fn along_first(m: usize, t: f64) -> Vec<f64> {
    let mut eta = vec![0.0; m];
    eta[0] = t;
    eta
}

/// `f^{(k)}(s)` for the unit Gaussian weight with `m = 1`.
fn f1(k: i32, s: f64) -> f64 {
    PI.sqrt() * (-0.5f64).powi(k) * (-s / 2.0).exp()
}

#[test]
fn unit_separation_in_one_dimension() {
    // Hand-assembled regression at η = 1: V₁₁₁₁(0) = 3f''(0),
    // V₁₁₁(1) = 3f''(½) + f'''(½), V₁₁₁₁(1) = 3f''(½) + 6f'''(½) + f''''(½).
    let v4_zero = 3.0 * f1(2, 0.0);
    let v3 = 3.0 * f1(2, 0.5) + f1(3, 0.5);
    let v4 = 3.0 * f1(2, 0.5) + 6.0 * f1(3, 0.5) + f1(4, 0.5);
    let det = f1(1, 0.0).powi(2) - (f1(1, 0.5) + f1(2, 0.5)).powi(2);
    let same = -f1(1, 0.0) / det;
    let cross = (f1(1, 0.5) + f1(2, 0.5)) / det;

    let t = xi_bar(&gaussian(1), &[1.0], 0.0).unwrap();
    let xi_same = t.get(1, 1, 1, 1).unwrap();
    let xi_cross = t.get(-1, -1, 1, 1).unwrap();
    assert_relative_eq!(xi_same, v4_zero - v3 * v3 * same, max_relative = 1e-10);
    assert_relative_eq!(xi_cross, v4 + v3 * v3 * cross, max_relative = 1e-10);
    assert_relative_eq!(xi_same, 0.3393, epsilon = 1e-4);
    assert_relative_eq!(xi_cross, -0.2993, epsilon = 1e-4);
}

#[test]
fn axial_entries_vanish_quadratically() {
    // Frozen bound C for |Ξ̄_{±1,j|k,l}(t e₁)| ≤ C t² on (0, 0.2], m ≤ 3.
    const C: f64 = 1.1;
    for m in 1..=3 {
        let p = gaussian(m);
        for k in 1..=20 {
            let t = 0.01 * k as f64;
            let x = xi_bar(&p, &along_first(m, t), 0.0).unwrap();
            for (i, j, _, _, v) in x.rows() {
                if i.abs() == 1 || j.abs() == 1 {
                    assert!(v.abs() <= C * t * t, "m = {m}, t = {t}: ({i},{j}) {v:e}");
                }
            }
        }
    }
}

#[test]
fn infinity_tensor() {
    let x = xi_infinity(&gaussian(2));
    assert_relative_eq!(x.get(1, 1, 1, 1).unwrap(), 3.0 * PI / 4.0, max_relative = 1e-12);
    assert_relative_eq!(x.get(1, 1, 2, 2).unwrap(), PI / 4.0, max_relative = 1e-12);
    for m in 1..=3 {
        let x = xi_infinity(&gaussian(m));
        assert!(x.cross.amax() == 0.0);
    }
}

#[test]
fn large_separation_matches_infinity() {
    for m in 1..=3 {
        let p = gaussian(m);
        let mut eta = vec![0.0; m];
        eta[m - 1] = 20.0;
        let far = xi_bar(&p, &eta, 0.0).unwrap();
        let inf = xi_infinity(&p);
        assert!((&far.same - &inf.same).amax() < 1e-8, "m = {m}");
        assert!(far.cross.amax() < 1e-8, "m = {m}");
    }
}

#[test]
fn rescaling_rules() {
    let p = gaussian(3);
    let eta = [0.3, 0.0, 0.0];
    let t = xi_bar(&p, &eta, 0.0).unwrap();
    let r = xi_rescale(&t).unwrap();
    assert_eq!(r.get(2, 3, 2, 2).unwrap(), t.get(2, 3, 2, 2).unwrap());
    assert_eq!(r.get(-2, -2, 3, 3).unwrap(), t.get(-2, -2, 3, 3).unwrap());
    assert_relative_eq!(r.get(1, 1, 1, 1).unwrap(), t.get(1, 1, 1, 1).unwrap() / 0.09, max_relative = 1e-14);
    assert_relative_eq!(r.get(1, 2, 1, 2).unwrap(), t.get(1, 2, 1, 2).unwrap() / 0.3, max_relative = 1e-14);
    assert_relative_eq!(r.get(1, 1, 2, 2).unwrap(), t.get(1, 1, 2, 2).unwrap() / 0.3, max_relative = 1e-14);

    let unit = xi_bar(&gaussian(1), &[1.0], 0.0).unwrap();
    let same = xi_rescale(&unit).unwrap();
    assert!((&same.same - &unit.same).amax() < 1e-15 && (&same.cross - &unit.cross).amax() < 1e-15);
}

#[test]
fn origin_limits() {
    for m in 2..=4 {
        let p = gaussian(m);
        let h = p.moments().2;
        let lim = xi_limit_origin(&p, &along_first(m, 1.0), 0.0).unwrap();
        assert_relative_eq!(lim.get(2, 2, 2, 2).unwrap(), 8.0 / 3.0 * h, max_relative = 5e-3);
        if m >= 3 {
            assert_relative_eq!(lim.get(2, 2, 3, 3).unwrap(), 2.0 / 3.0 * h, max_relative = 5e-3);
        }
    }
}

#[test]
fn transverse_mixed_entry_over_separation_squared() {
    let p = gaussian(2);
    let t = 0.05;
    let v = xi_bar(&p, &along_first(2, t), 0.0).unwrap().get(1, 2, 1, 2).unwrap() / (t * t);
    assert_relative_eq!(v, PI / 16.0, max_relative = 2e-2);
    assert_relative_eq!(expansion_constants(&p).cbar0, PI / 16.0, max_relative = 1e-12);
}

#[test]
fn gaussian_leading_constants() {
    for m in 1..=4 {
        let k = expansion_constants(&gaussian(m));
        assert_relative_eq!(k.c11, 7.0 / 12.0, max_relative = 1e-12);
        assert_relative_eq!(k.c0, 0.25, max_relative = 1e-12);
    }
}

#[test]
fn cross_transverse_entry_tends_to_second_derivative() {
    let p = gaussian(3);
    let h = p.moments().2;
    let v = xi_bar(&p, &along_first(3, 1e-3), 0.0).unwrap().get(-2, -3, 2, 3).unwrap();
    assert_relative_eq!(v, h, max_relative = 1e-5);
}

#[test]
fn mixed_axial_transverse_entry_is_quadratic() {
    let p = gaussian(3);
    let v = |t: f64| xi_bar(&p, &along_first(3, t), 0.0).unwrap().get(1, 1, 2, 2).unwrap();
    let slope = (v(0.02) / v(0.01)).log2();
    assert_relative_eq!(slope, 2.0, epsilon = 1e-2);
}

fn catalogue_value(p: &RadialProfile, m: usize, entry: &CatalogueEntry, t: f64) -> f64 {
    let q = entry.indices.expect("indexed entry");
    let eta = along_first(m, t);
    if entry.lead == -2 {
        let s = sigma_tilde(p, &eta, 0.0).unwrap();
        t * t * s.get(IndexJ::new(q[0], m).unwrap(), IndexJ::new(q[1], m).unwrap())
    } else {
        xi_bar(p, &eta, 0.0).unwrap().get(q[0], q[1], q[2], q[3]).unwrap()
    }
}

#[test]
fn catalogue_matches_numerical_expansion() {
    for entry in CATALOGUE.iter().filter(|e| e.indices.is_some()) {
        for m in entry.min_dim.max(2)..=3 {
            let p = gaussian(m);
            let (t1, t2) = (0.02, 0.01);
            let (v1, v2) = (catalogue_value(&p, m, entry, t1), catalogue_value(&p, m, entry, t2));
            let a0 = expansion_coefficient(&p, m, entry.id, 0).unwrap();
            let a0_est = (4.0 * v2 - v1) / 3.0;
            assert!((a0 - a0_est).abs() < 1e-6 * a0.abs().max(1.0), "{} m={m}: {a0} vs {a0_est}", entry.id);
            if let Ok(a1) = expansion_coefficient(&p, m, entry.id, 1) {
                let g = |v: f64, t: f64| (v - a0) / (t * t);
                let a1_est = (4.0 * g(v2, t2) - g(v1, t1)) / 3.0;
                assert!((a1 - a1_est).abs() < 1e-5 * a1.abs().max(1.0), "{} m={m}: {a1} vs {a1_est}", entry.id);
            }
        }
    }
}

#[test]
fn zero_pattern_holds() {
    for m in 2..=3 {
        let p = gaussian(m);
        for eps in [0.0, 0.1] {
            for r in [0.05, 0.3, 1.0, 2.5] {
                // Off-axis directions only keep the reflection symmetry without periodization.
                let mut eta = vec![if eps == 0.0 { 0.4 * r } else { 0.0 }; m];
                eta[0] = r;
                let x = xi_bar(&p, &eta, eps).unwrap();
                for q in zero_entries(m) {
                    let v = x.get(q[0], q[1], q[2], q[3]).unwrap();
                    assert!(v.abs() < 1e-12, "m={m} ε={eps} |η|≈{r}: {q:?} = {v:e}");
                }
            }
        }
    }
}

#[test]
fn tensors_are_positive_semidefinite() {
    for m in 1..=3 {
        let p = gaussian(m);
        for r in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let eta = along_first(m, r);
            for eps in [0.0, 0.1] {
                let (lowest, ok) = xi_bar(&p, &eta, eps).unwrap().psd_check();
                assert!(ok, "m={m} |η|={r} ε={eps}: {lowest:e}");
                let (lowest, ok) = xi_rescale(&xi_bar(&p, &eta, eps).unwrap()).unwrap().psd_check();
                assert!(ok, "rescaled m={m} |η|={r} ε={eps}: {lowest:e}");
            }
        }
        assert!(upsilon(&p, 0.1).unwrap().psd_check().1);
    }
}

#[test]
fn periodized_tensor_converges_quickly() {
    let p = gaussian(2);
    let gap = |eps: f64| {
        [0.1, 0.3, 0.6, 1.0]
            .iter()
            .map(|&r| {
                let eta = [r * 0.8, r * 0.6];
                let a = xi_rescale(&xi_bar(&p, &eta, eps).unwrap()).unwrap();
                let b = xi_rescale(&xi_bar(&p, &eta, 0.0).unwrap()).unwrap();
                (&a.same - &b.same).amax().max((&a.cross - &b.cross).amax())
            })
            .fold(0.0, f64::max)
    };
    let (g1, g2, g3) = (gap(0.2), gap(0.1), gap(0.05));
    assert!(g2 < g1 / 4.0, "{g1:e} {g2:e}");
    assert!(g3 <= (g2 / 4.0).max(1e-13), "{g2:e} {g3:e}");
}

#[test]
fn upsilon_is_the_infinity_law_for_small_epsilon() {
    for m in 1..=3 {
        let p = gaussian(m);
        let u = upsilon(&p, 0.05).unwrap();
        let inf = xi_infinity(&p);
        assert!((&u.same - &inf.same).amax() < 1e-12, "m = {m}");
    }
}

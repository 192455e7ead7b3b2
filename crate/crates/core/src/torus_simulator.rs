//! Random trigonometric fields on `T^m = R^m / Z^m` (`m ∈ {1, 2}`) and
//! their critical points.
//!
//! The field is `u(θ) = Σ_k X_k Ψ_k(θ)` with `Ψ_0 = 1`,
//! `Ψ_k = √2 sin 2π⟨k,θ⟩` for `k ≻ 0` and `Ψ_k = √2 cos 2π⟨k,θ⟩` for
//! `k ≺ 0` (lexicographic order), and independent `X_k ~ N(0, w(2πε|k|))`.
//! Modes with `|k| > K` are dropped, where `K` is the first integer with
//! `w(2πεK) < TRUNCATION_FLOOR · max w`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial_weight::WeightSpec;
use crate::rng::{streams, substream};

/// Relative variance below which modes are truncated.
pub const TRUNCATION_FLOOR: f64 = 1e-10;
/// Largest `ε` accepted by the sampler.
pub const EPSILON_MAX: f64 = 0.2;
/// Scan points per unit of `K` along each axis: `64 K` for `m = 1`.
pub const SCAN_DENSITY_1D: usize = 64;
/// Seed grid points per unit of `K` along each axis: `(32 K)²` for `m = 2`.
pub const SCAN_DENSITY_2D: usize = 32;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-12;
const BOOTSTRAP_RESAMPLES: usize = 200;
const NEWTON_STEPS: usize = 60;
/// Extra grid doublings tried when a refinement check disagrees.
pub const REFINEMENT_ESCALATIONS: usize = 3;

/// Which basis function a mode uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    Constant,
    Sin,
    Cos,
}

/// One term `X_k Ψ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    /// Frequency vector; the second entry is zero when `m = 1`.
    pub k: [i32; 2],
    pub basis: Basis,
    pub coeff: f64,
}

/// A sampled (or constructed) field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub m: usize,
    pub epsilon: f64,
    pub k_trunc: usize,
    pub modes: Vec<Mode>,
    /// `(seed, field index)` when the field came from the substream sampler.
    pub provenance: Option<(u64, u64)>,
}

fn basis_of(k: [i32; 2]) -> Basis {
    match (k[0].signum(), k[1].signum()) {
        (0, 0) => Basis::Constant,
        (1, _) | (0, 1) => Basis::Sin,
        _ => Basis::Cos,
    }
}

/// Lattice vectors with `|k| ≤ K`, in lexicographic order.
fn lattice(m: usize, k_trunc: usize) -> Vec<[i32; 2]> {
    let k = k_trunc as i32;
    let r2 = k * k;
    let second = if m == 2 { -k..=k } else { 0..=0 };
    let mut out = Vec::new();
    for a in -k..=k {
        for b in second.clone() {
            if a * a + b * b <= r2 {
                out.push([a, b]);
            }
        }
    }
    out
}

/// First `K ≥ 1` with `w(2πεK) < TRUNCATION_FLOOR · max w`.
pub fn truncation_order(w: &WeightSpec, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let floor = TRUNCATION_FLOOR * w.max_value();
    (1..=100_000)
        .find(|&k| w.eval(2.0 * PI * epsilon * k as f64) < floor)
        .ok_or_else(|| Error::Policy(format!("no truncation order found for epsilon {epsilon}")))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= EPSILON_MAX) {
        return Err(Error::Policy(format!("epsilon must lie in (0, {EPSILON_MAX}], got {epsilon}")));
    }
    Ok(())
}

fn check_dim(m: usize) -> Result<()> {
    if m == 1 || m == 2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("the simulator supports m = 1 or 2, got {m}")))
    }
}

impl FieldSample {
    /// A field with the given coefficients; unspecified modes are zero.
    pub fn from_coefficients(m: usize, epsilon: f64, k_trunc: usize, coeffs: &[([i32; 2], f64)]) -> Result<Self> {
        check_dim(m)?;
        let mut modes: Vec<Mode> =
            lattice(m, k_trunc).into_iter().map(|k| Mode { k, basis: basis_of(k), coeff: 0.0 }).collect();
        for &(k, c) in coeffs {
            let slot = modes
                .iter_mut()
                .find(|mode| mode.k == k)
                .ok_or_else(|| Error::InvalidInput(format!("mode {k:?} lies outside |k| ≤ {k_trunc} in dimension {m}")))?;
            slot.coeff = c;
        }
        Ok(FieldSample { m, epsilon, k_trunc, modes, provenance: None })
    }

    /// The identically zero field.
    pub fn zero(m: usize, epsilon: f64, k_trunc: usize) -> Result<Self> {
        Self::from_coefficients(m, epsilon, k_trunc, &[])
    }

    pub fn coefficient(&self, k: [i32; 2]) -> Option<f64> {
        self.modes.iter().find(|mode| mode.k == k).map(|mode| mode.coeff)
    }

    /// Modes with nonzero coefficient and nonzero frequency.
    fn active(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| m.coeff != 0.0 && m.basis != Basis::Constant)
    }

    /// `Σ |X_k| (2π|k|)^order`, a scale for derivatives of that order.
    fn derivative_scale(&self, order: i32) -> f64 {
        self.active()
            .map(|md| {
                let len = ((md.k[0] * md.k[0] + md.k[1] * md.k[1]) as f64).sqrt();
                SQRT_2 * md.coeff.abs() * (2.0 * PI * len).powi(order)
            })
            .sum()
    }
}

/// Draw the coefficients from `rng`, in lattice order.
pub fn sample_field<R: Rng + ?Sized>(w: &WeightSpec, m: usize, epsilon: f64, rng: &mut R) -> Result<FieldSample> {
    check_dim(m)?;
    let k_trunc = truncation_order(w, epsilon)?;
    let modes = lattice(m, k_trunc)
        .into_iter()
        .map(|k| {
            let len = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            let sd = w.eval(2.0 * PI * epsilon * len).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            Mode { k, basis: basis_of(k), coeff: sd * z }
        })
        .collect();
    Ok(FieldSample { m, epsilon, k_trunc, modes, provenance: None })
}

/// The field with index `field` of the run seeded by `seed`.
pub fn sample_indexed_field(w: &WeightSpec, m: usize, epsilon: f64, seed: u64, field: u64) -> Result<FieldSample> {
    let mut rng = substream(seed, streams::FIELDS + field);
    let mut s = sample_field(w, m, epsilon, &mut rng)?;
    s.provenance = Some((seed, field));
    Ok(s)
}

/// Value, gradient or Hessian of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldEval {
    Value(f64),
    Gradient(Vec<f64>),
    Hessian(Vec<Vec<f64>>),
}

/// Value (`order = 0`), gradient (`1`) or Hessian (`2`) at `theta`.
/// Coordinates are reduced modulo 1 before evaluation.
pub fn eval_field(s: &FieldSample, theta: &[f64], order: u8) -> Result<FieldEval> {
    if theta.len() != s.m {
        return Err(Error::InvalidInput(format!("point has {} coordinates, field lives on T^{}", theta.len(), s.m)));
    }
    let (v, g, h) = jet(s, theta);
    match order {
        0 => Ok(FieldEval::Value(v)),
        1 => Ok(FieldEval::Gradient(g[..s.m].to_vec())),
        2 => Ok(FieldEval::Hessian((0..s.m).map(|i| h[i][..s.m].to_vec()).collect())),
        _ => Err(Error::InvalidInput(format!("derivative order {order} is not supported"))),
    }
}

/// Value, gradient and Hessian at once (second coordinate padded with 0).
fn jet(s: &FieldSample, theta: &[f64]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let t0 = theta[0].rem_euclid(1.0);
    let t1 = if s.m == 2 { theta[1].rem_euclid(1.0) } else { 0.0 };
    let mut v = 0.0;
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for md in &s.modes {
        if md.coeff == 0.0 {
            continue;
        }
        if md.basis == Basis::Constant {
            v += md.coeff;
            continue;
        }
        let k = [md.k[0] as f64, md.k[1] as f64];
        // Reduce the phase modulo one turn before scaling by 2π.
        let turns = (k[0] * t0 + k[1] * t1).rem_euclid(1.0);
        let (sn, cs) = (2.0 * PI * turns).sin_cos();
        let a = SQRT_2 * md.coeff;
        let (f, df) = match md.basis {
            Basis::Sin => (sn, cs),
            _ => (cs, -sn),
        };
        v += a * f;
        for i in 0..2 {
            g[i] += a * 2.0 * PI * k[i] * df;
            for j in 0..2 {
                h[i][j] -= a * 4.0 * PI * PI * k[i] * k[j] * f;
            }
        }
    }
    (v, g, h)
}

/// Critical points found on one field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    pub count: usize,
    /// Locations in `[0, 1)^m`.
    pub locations: Vec<Vec<f64>>,
    /// Morse index of each location.
    pub indices: Vec<usize>,
    /// `Σ (-1)^{index}`; zero on the torus.
    pub signed_count: i64,
    /// Scan points per axis.
    pub grid_size: usize,
    pub dedup_radius: f64,
    /// Newton steps (`m = 2`) or bisection steps (`m = 1`), summed.
    pub iterations: usize,
    /// Largest `|∇u|` over the reported locations.
    pub max_residual: f64,
}

fn counting_error(s: &FieldSample, reason: String) -> Error {
    Error::Counting { field: s.provenance.map(|p| p.1).unwrap_or(0), reason }
}

/// Count critical points; see the module docs for the two algorithms.
pub fn count_critical_points(s: &FieldSample) -> Result<CriticalPointReport> {
    check_dim(s.m)?;
    if s.derivative_scale(1) == 0.0 {
        return Err(counting_error(s, "the field is constant, every point is critical".into()));
    }
    match s.m {
        1 => count_1d(s),
        _ => count_2d(s),
    }
}

// ---------------------------------------------------------------- m = 1

/// `u'` on the grid `j / n` from a table of `e^{2πi j/n}`.
fn derivative_on_grid(s: &FieldSample, n: usize) -> Vec<f64> {
    let table: Vec<(f64, f64)> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin_cos()).collect();
    let terms: Vec<(usize, f64, Basis)> = s
        .active()
        .map(|md| {
            let k = md.k[0];
            (k.rem_euclid(n as i32) as usize, SQRT_2 * md.coeff * 2.0 * PI * k as f64, md.basis)
        })
        .collect();
    (0..n)
        .map(|j| {
            terms
                .iter()
                .map(|&(k, a, basis)| {
                    let (sn, cs) = table[(k * j) % n];
                    match basis {
                        Basis::Sin => a * cs,
                        _ => -a * sn,
                    }
                })
                .sum()
        })
        .collect()
}

fn derivative_1d(s: &FieldSample, theta: f64) -> (f64, f64) {
    let (_, g, h) = jet(s, &[theta]);
    (g[0], h[0][0])
}

/// Sign-change brackets of `u'` on the grid `j / n`; zero counts as
/// nonnegative.
fn brackets_1d(s: &FieldSample, n: usize) -> Vec<usize> {
    let d = derivative_on_grid(s, n);
    (0..n).filter(|&j| (d[j] < 0.0) != (d[(j + 1) % n] < 0.0)).collect()
}

/// Roots of `u'` from the sign changes on the grid `j / n`.
fn roots_1d(s: &FieldSample, n: usize, iterations: &mut usize) -> Result<Vec<(f64, usize, f64)>> {
    let curvature_floor = 1e-8 * s.derivative_scale(2);
    let mut roots = Vec::new();
    for j in brackets_1d(s, n) {
        let mut lo = j as f64 / n as f64;
        let mut hi = (j + 1) as f64 / n as f64;
        let lo_negative = derivative_1d(s, lo).0 < 0.0;
        while hi - lo > BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if (derivative_1d(s, mid).0 < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
            *iterations += 1;
        }
        let root = 0.5 * (lo + hi);
        let (g, h) = derivative_1d(s, root);
        if h.abs() <= curvature_floor {
            return Err(counting_error(s, format!("degenerate critical point at θ = {root} (u'' = {h:e})")));
        }
        roots.push((root.rem_euclid(1.0), if h < 0.0 { 1 } else { 0 }, g.abs()));
    }
    Ok(roots)
}

fn count_1d(s: &FieldSample) -> Result<CriticalPointReport> {
    let base = SCAN_DENSITY_1D * s.k_trunc.max(1);
    let mut iterations = 0;
    let mut n = base;
    let mut roots = roots_1d(s, n, &mut iterations)?;
    let mut history = vec![roots.len()];
    for _ in 0..=REFINEMENT_ESCALATIONS {
        let mut check_iterations = 0;
        let refined = roots_1d(s, 2 * n, &mut check_iterations)?;
        history.push(refined.len());
        if refined.len() == roots.len() {
            let indices: Vec<usize> = roots.iter().map(|r| r.1).collect();
            return Ok(CriticalPointReport {
                count: roots.len(),
                signed_count: signed_count(&indices),
                locations: roots.iter().map(|r| vec![r.0]).collect(),
                indices,
                grid_size: n,
                dedup_radius: 0.0,
                iterations,
                max_residual: roots.iter().map(|r| r.2).fold(0.0, f64::max),
            });
        }
        n *= 2;
        roots = refined;
        iterations = check_iterations;
    }
    Err(counting_error(s, format!("count did not stabilise under grid doubling from {base} points: {history:?}")))
}

fn signed_count(indices: &[usize]) -> i64 {
    indices.iter().map(|&i| if i % 2 == 0 { 1 } else { -1 }).sum()
}

// ---------------------------------------------------------------- m = 2

/// `∇u` on the grid `(p/n, q/n)`, from separable complex sums.
fn gradient_grid(s: &FieldSample, n: usize) -> Vec<[f64; 2]> {
    let table: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
    let k = s.k_trunc as i32;
    let width = (2 * k + 1) as usize;
    // u = Re Σ a_k e^{2πi⟨k,θ⟩} with a_k = √2 X_k (cos) or -i√2 X_k (sin);
    // ∂_j u = Re Σ (2πi k_j a_k) e^{2πi⟨k,θ⟩}.
    let mut rows: Vec<Vec<(usize, [Complex64; 2])>> = vec![Vec::new(); width];
    for md in s.active() {
        let a = match md.basis {
            Basis::Sin => Complex64::new(0.0, -SQRT_2 * md.coeff),
            _ => Complex64::new(SQRT_2 * md.coeff, 0.0),
        };
        let i2pi = Complex64::new(0.0, 2.0 * PI);
        let b = [a * i2pi * md.k[0] as f64, a * i2pi * md.k[1] as f64];
        rows[(md.k[1] + k) as usize].push((md.k[0].rem_euclid(n as i32) as usize, b));
    }
    let k2_index: Vec<usize> = (-k..=k).map(|v| v.rem_euclid(n as i32) as usize).collect();
    let mut out = vec![[0.0; 2]; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(p, row_out)| {
        let partial: Vec<[Complex64; 2]> = rows
            .iter()
            .map(|row| {
                let mut acc = [Complex64::new(0.0, 0.0); 2];
                for &(k1, b) in row {
                    let e = table[(k1 * p) % n];
                    acc[0] += b[0] * e;
                    acc[1] += b[1] * e;
                }
                acc
            })
            .collect();
        for (q, slot) in row_out.iter_mut().enumerate() {
            for (r, acc) in partial.iter().enumerate() {
                let e = table[(k2_index[r] * q) % n];
                slot[0] += (acc[0] * e).re;
                slot[1] += (acc[1] * e).re;
            }
        }
    });
    out
}

/// Newton starting points: grid minima of `|∇u|²` over the eight
/// neighbours, plus centres of cells where both gradient components change
/// sign across the corners.
fn seeds(grid: &[[f64; 2]], n: usize) -> Vec<[f64; 2]> {
    let norm = |p: usize, q: usize| {
        let g = grid[(p % n) * n + q % n];
        g[0] * g[0] + g[1] * g[1]
    };
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let v = norm(p, q);
            let is_min = [n - 1, 0, 1]
                .iter()
                .flat_map(|&dp| [n - 1, 0, 1].map(move |dq| (dp, dq)))
                .filter(|&d| d != (0, 0))
                .all(|(dp, dq)| norm(p + dp, q + dq) >= v);
            if is_min {
                out.push([p as f64 / n as f64, q as f64 / n as f64]);
            }
            let corners = [(p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)].map(|(a, b)| grid[(a % n) * n + b % n]);
            let changes = |c: usize| {
                let neg = corners.iter().filter(|g| g[c] < 0.0).count();
                neg != 0 && neg != 4
            };
            if changes(0) && changes(1) {
                out.push([(p as f64 + 0.5) / n as f64, (q as f64 + 0.5) / n as f64]);
            }
        }
    }
    out
}

fn torus_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = |x: f64, y: f64| {
        let t = (x - y).rem_euclid(1.0);
        t.min(1.0 - t)
    };
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}

struct Root {
    at: [f64; 2],
    index: usize,
    residual: f64,
}

/// Newton on `∇u` with steps capped at `max_step`.
fn newton(s: &FieldSample, start: [f64; 2], max_step: f64, grad_tol: f64, iterations: &mut usize) -> Option<Root> {
    let mut x = Vector2::new(start[0], start[1]);
    for _ in 0..NEWTON_STEPS {
        *iterations += 1;
        let (_, g, h) = jet(s, &[x[0], x[1]]);
        let hm = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
        let mut step = hm.lu().solve(&Vector2::new(g[0], g[1]))?;
        let len = step.norm();
        if len > max_step {
            step *= max_step / len;
        }
        x -= step;
        if len < 1e-13 {
            break;
        }
    }
    let (_, g, h) = jet(s, &[x[0], x[1]]);
    let residual = g[0].hypot(g[1]);
    if residual > grad_tol {
        return None;
    }
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let trace = h[0][0] + h[1][1];
    let index = if det < 0.0 {
        1
    } else if trace > 0.0 {
        0
    } else {
        2
    };
    Some(Root { at: [x[0].rem_euclid(1.0), x[1].rem_euclid(1.0)], index, residual })
}

fn roots_2d(s: &FieldSample, n: usize, dedup: f64, iterations: &mut usize) -> Result<Vec<Root>> {
    let grid = gradient_grid(s, n);
    let grad_tol = 1e-9 * s.derivative_scale(1);
    let det_floor = 1e-8 * s.derivative_scale(2).powi(2);
    let mut roots: Vec<Root> = Vec::new();
    for seed in seeds(&grid, n) {
        let Some(root) = newton(s, seed, 2.0 / n as f64, grad_tol, iterations) else { continue };
        if roots.iter().any(|r| torus_distance(&r.at, &root.at) < dedup) {
            continue;
        }
        let (_, _, h) = jet(s, &root.at);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() <= det_floor {
            return Err(counting_error(s, format!("degenerate critical point at {:?} (det Hess = {det:e})", root.at)));
        }
        roots.push(root);
    }
    roots.sort_by(|a, b| a.at[0].total_cmp(&b.at[0]).then(a.at[1].total_cmp(&b.at[1])));
    Ok(roots)
}

fn same_roots(a: &[Root], b: &[Root], dedup: f64) -> bool {
    a.len() == b.len() && b.iter().all(|r| a.iter().any(|q| torus_distance(&q.at, &r.at) < dedup))
}

fn count_2d(s: &FieldSample) -> Result<CriticalPointReport> {
    let base = SCAN_DENSITY_2D * s.k_trunc.max(1);
    let dedup = s.epsilon / 100.0;
    let mut n = base;
    let mut iterations = 0;
    let mut roots = roots_2d(s, n, dedup, &mut iterations)?;
    let mut history = vec![roots.len()];
    for _ in 0..=REFINEMENT_ESCALATIONS {
        let mut check_iterations = 0;
        let refined = roots_2d(s, 2 * n, dedup, &mut check_iterations)?;
        history.push(refined.len());
        let indices: Vec<usize> = roots.iter().map(|r| r.index).collect();
        // On the torus the signed count is the Euler characteristic, zero.
        if same_roots(&roots, &refined, dedup) && signed_count(&indices) == 0 {
            return Ok(CriticalPointReport {
                count: roots.len(),
                locations: roots.iter().map(|r| r.at.to_vec()).collect(),
                signed_count: 0,
                indices,
                grid_size: n,
                dedup_radius: dedup,
                iterations,
                max_residual: roots.iter().map(|r| r.residual).fold(0.0, f64::max),
            });
        }
        n *= 2;
        roots = refined;
        iterations = check_iterations;
    }
    Err(counting_error(s, format!("count did not stabilise under grid doubling from {base} points per axis: {history:?}")))
}

// ------------------------------------------------------------- moments

/// Sample moments of the critical point count over many fields.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalMoments {
    pub m: usize,
    pub epsilon: f64,
    pub n_fields: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    /// Bootstrap standard errors.
    pub mean_std_error: f64,
    pub variance_std_error: f64,
    /// `count → number of fields`.
    pub histogram: BTreeMap<usize, usize>,
    pub counts: Vec<usize>,
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Count critical points of fields `0..n_fields` of the run `seed`.
pub fn empirical_moments(w: &WeightSpec, m: usize, epsilon: f64, n_fields: usize, seed: u64) -> Result<EmpiricalMoments> {
    if n_fields < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 fields, got {n_fields}")));
    }
    check_dim(m)?;
    truncation_order(w, epsilon)?;
    let results: Vec<Result<usize>> = (0..n_fields as u64)
        .into_par_iter()
        .map(|i| Ok(count_critical_points(&sample_indexed_field(w, m, epsilon, seed, i)?)?.count))
        .collect();
    let counts = results.into_iter().collect::<Result<Vec<usize>>>()?;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, variance) = mean_and_variance(&xs);
    let mut rng = substream(seed, streams::BOOTSTRAP);
    let mut boot_means = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut boot_vars = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0; xs.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in resample.iter_mut() {
            *slot = *xs.choose(&mut rng).expect("nonempty sample");
        }
        let (bm, bv) = mean_and_variance(&resample);
        boot_means.push(bm);
        boot_vars.push(bv);
    }
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    Ok(EmpiricalMoments {
        m,
        epsilon,
        n_fields,
        seed,
        mean,
        variance,
        mean_std_error: mean_and_variance(&boot_means).1.sqrt(),
        variance_std_error: mean_and_variance(&boot_vars).1.sqrt(),
        histogram,
        counts,
    })
}

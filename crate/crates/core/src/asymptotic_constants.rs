//! Leading constants for the mean and variance of the number of critical
//! points, and the two-point correlation.
//!
//! * `C_m = (2π d)^{-m/2} E_{Γ_{h,h}}|det A|`, so the mean count is
//!   `C_m ε^{-m}` up to `O(ε^∞)`.
//! * `K(η) = (2π)^{-m} det ℋ(V, η)^{-1/2}` and `K(∞) = (2π d)^{-m}`. The
//!   latter uses `det ℋ_∞ = det(-Hess V(0))² = d^{2m}`.
//! * `δ₀(η) = det ℋ(V,η)^{-1/2} E_{Ξ̄⁰(η)}|det B| - d^{-m} E_{Γ_{h,h}×Γ_{h,h}}|det B|`.
//! * `C'_m = C_m + (2π)^{-m} ∫ δ₀`. The variance at scale `ε` is predicted as
//!   `N_ε + ε^{-m}(2π)^{-m} ∫ δ₀`, where `N_ε` is the exact finite-`ε` mean.
//!
//! Expectations of `|det|` are Monte Carlo estimates, except for `m = 1`
//! where the bivariate absolute-moment formula gives them exactly. Across
//! values of `η`, one block of standard normals is reused (common random
//! numbers), so `δ₀` is a smooth function of `η` for a fixed block.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::conditional_hessian::{upsilon, xi_bar, xi_infinity, xi_rescale, CovTensor};
use crate::error::{Error, Result};
use crate::kernel::{det_script_h, norm, script_h, DIAGONAL_RADIUS};
use crate::quadrature::{adaptive_gk, gk15_rule, IntervalEstimate, Tolerance};
use crate::radial_weight::{sphere_area, RadialProfile};
use crate::rng::streams;
use crate::sym_ensembles::{
    abs_det_samples, abs_product_moment, entry_count, EnsembleSpec, Estimate, IsoSpec, MatrixLaw, NormalBlock,
};

use std::f64::consts::PI;

/// Largest `ε` for which predictions are reported without a warning.
pub const EPSILON_POLICY_MAX: f64 = 0.2;

/// A constant with its Monte Carlo error and any closed-form value.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    /// Closed form when available, otherwise the Monte Carlo value.
    pub value: f64,
    pub std_error: f64,
    pub monte_carlo: Estimate,
    /// The same constant through `(h/(2πd))^{m/2} E_{Γ_{1,1}}|det B|`,
    /// sampled from an independent stream.
    pub normalized: Estimate,
    pub exact: Option<f64>,
}

impl ConstantEstimate {
    /// Whether the two Monte Carlo forms agree within `k` combined standard errors.
    pub fn forms_agree(&self, k: f64) -> bool {
        let se = self.monte_carlo.std_error.hypot(self.normalized.std_error);
        (self.monte_carlo.mean - self.normalized.mean).abs() <= k * se
    }
}

fn scaled(e: Estimate, factor: f64) -> Estimate {
    Estimate { mean: e.mean * factor, std_error: e.std_error * factor.abs(), n: e.n }
}

/// `E_{Γ_{h,h}}|det A|` in closed form for `m = 1`: `√(6h/π)`.
fn abs_det_gamma_hh_exact(m: usize, h: f64) -> Option<f64> {
    (m == 1).then(|| (6.0 * h / PI).sqrt())
}

/// `C_m(w)`.
pub fn c_m(p: &RadialProfile, n_mc: usize, seed: u64) -> Result<ConstantEstimate> {
    let m = p.dim();
    let (_, d, h) = p.moments();
    let mf = m as f64;
    let prefactor = (2.0 * PI * d).powf(-0.5 * mf);
    let direct = crate::sym_ensembles::expect_abs_det(&EnsembleSpec::Iso(IsoSpec::new(m, h, h)?), n_mc, seed)?;
    let unit = MatrixLaw::from_spec(&EnsembleSpec::Iso(IsoSpec::new(m, 1.0, 1.0)?))?;
    let normalized = Estimate::from_samples(&abs_det_samples(&unit, n_mc, seed, streams::ENSEMBLE_ALT));
    let monte_carlo = scaled(direct, prefactor);
    let normalized = scaled(normalized, (h / (2.0 * PI * d)).powf(0.5 * mf));
    let exact = abs_det_gamma_hh_exact(m, h).map(|e| prefactor * e);
    let (value, std_error) = match exact {
        Some(v) => (v, 0.0),
        None => (monte_carlo.mean, monte_carlo.std_error),
    };
    Ok(ConstantEstimate { value, std_error, monte_carlo, normalized, exact })
}

/// Argument of [`k_eta`]: a finite separation or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaArg {
    Finite(Vec<f64>),
    Infinity,
}

/// `K(η) = (2π)^{-m} det ℋ(V, η)^{-1/2}`; `K(∞) = (2π d)^{-m}`.
pub fn k_eta(p: &RadialProfile, eta: &EtaArg) -> Result<f64> {
    let m = p.dim() as i32;
    match eta {
        EtaArg::Infinity => {
            let (_, d, _) = p.moments();
            Ok((2.0 * PI * d).powi(-m))
        }
        EtaArg::Finite(eta) => {
            if norm(eta) < DIAGONAL_RADIUS {
                return Err(Error::InvalidInput("K(η) diverges at η = 0".into()));
            }
            let det = det_script_h(&script_h(p, eta, 0.0)?);
            if !(det > 0.0) {
                return Err(Error::Singular(format!("det ℋ(V, η) = {det} is not positive")));
            }
            Ok((2.0 * PI).powi(-m) / det.sqrt())
        }
    }
}

/// `det ℋ(V, η)^{-1/2}`.
fn inv_sqrt_det(p: &RadialProfile, eta: &[f64]) -> Result<f64> {
    Ok(k_eta(p, &EtaArg::Finite(eta.to_vec()))? * (2.0 * PI).powi(p.dim() as i32))
}

/// Per-sample values of `|det B⁻ det B⁺|` under `t` for a common block.
fn pair_samples(t: &CovTensor, block: &NormalBlock) -> Result<Vec<f64>> {
    let law = MatrixLaw::pair(&t.to_pair_spec()?)?;
    Ok(block.abs_det(&law))
}

/// Common random numbers for the pair expectations in dimension `m`.
pub fn crn_block(m: usize, n_mc: usize, seed: u64) -> NormalBlock {
    NormalBlock::generate(n_mc, 2 * entry_count(m), seed, streams::CRN_BLOCK)
}

/// Per-sample `δ₀` contributions on a common block; their mean is `δ₀(η)`.
/// `reference` holds the samples of the subtracted product term, already
/// multiplied by `d^{-m}`.
fn delta0_samples(p: &RadialProfile, eta: &[f64], block: &NormalBlock, reference: &[f64]) -> Result<Vec<f64>> {
    let pref = inv_sqrt_det(p, eta)?;
    let near = pair_samples(&xi_bar(p, eta, 0.0)?, block)?;
    Ok(near.iter().zip(reference).map(|(a, b)| pref * a - b).collect())
}

fn reference_samples(p: &RadialProfile, block: &NormalBlock) -> Result<Vec<f64>> {
    let (_, d, _) = p.moments();
    let scale = d.powi(-(p.dim() as i32));
    Ok(pair_samples(&xi_infinity(p), block)?.into_iter().map(|v| v * scale).collect())
}

/// `δ₀(η)` by Monte Carlo with common random numbers between the two terms.
pub fn delta0(p: &RadialProfile, eta: &[f64], n_mc: usize, seed: u64) -> Result<Estimate> {
    if norm(eta) < DIAGONAL_RADIUS {
        return Err(Error::InvalidInput("δ₀ is evaluated off the diagonal only".into()));
    }
    let block = crn_block(p.dim(), n_mc, seed);
    let reference = reference_samples(p, &block)?;
    Ok(Estimate::from_samples(&delta0_samples(p, eta, &block, &reference)?))
}

/// `δ₀(η)` for `m = 1` from `E|XY| = (2σ₁σ₂/π)(√(1-ρ²) + ρ arcsin ρ)`.
pub fn delta0_exact_m1(p: &RadialProfile, eta: f64) -> Result<f64> {
    if p.dim() != 1 {
        return Err(Error::InvalidInput("the bivariate closed form applies to m = 1 only".into()));
    }
    if eta.abs() < DIAGONAL_RADIUS {
        return Err(Error::InvalidInput("δ₀ is evaluated off the diagonal only".into()));
    }
    let t = xi_bar(p, &[eta], 0.0)?;
    let near = abs_product_moment(t.same[(0, 0)], t.same[(0, 0)], t.cross[(0, 0)]);
    let (_, d, h) = p.moments();
    let far = abs_product_moment(3.0 * h, 3.0 * h, 0.0);
    Ok(inv_sqrt_det(p, &[eta])? * near - far / d)
}

/// Settings for [`c_prime_m`].
#[derive(Debug, Clone, Copy)]
pub struct CPrimeConfig {
    pub tolerance: Tolerance,
    pub n_mc: usize,
    pub seed: u64,
    /// Use the closed form for `m = 1` instead of Monte Carlo.
    pub exact_when_available: bool,
}

impl Default for CPrimeConfig {
    fn default() -> Self {
        CPrimeConfig {
            tolerance: Tolerance { abs: 1e-7, rel: 1e-5, max_intervals: 64 },
            n_mc: 20_000,
            seed: 0,
            exact_when_available: true,
        }
    }
}

/// `C'_m` with its error budget.
#[derive(Debug, Clone, Serialize)]
pub struct CPrimeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub c_m: f64,
    /// `∫_{R^m} δ₀`.
    pub delta0_integral: f64,
    /// Quadrature error estimate of the integral (Kronrod vs Gauss).
    pub quadrature_error: f64,
    /// Monte Carlo standard error of the integral.
    pub mc_error: f64,
    pub intervals: usize,
    pub evaluations: usize,
    /// Radius beyond which `δ₀` is treated as zero.
    pub cutoff: f64,
    /// `|δ₀(T)| T^m` at the cutoff `T`.
    pub tail_bound: f64,
    pub n_mc: usize,
    pub seed: u64,
}

/// Radial integrand evaluator: per-sample values of `δ₀(t e₁)` (a single
/// value when exact).
enum Delta0Source {
    Exact,
    Sampled { block: NormalBlock, reference: Vec<f64> },
}

impl Delta0Source {
    fn samples(&self, p: &RadialProfile, t: f64) -> Result<Vec<f64>> {
        let m = p.dim();
        let mut eta = vec![0.0; m];
        eta[0] = t;
        match self {
            Delta0Source::Exact => Ok(vec![delta0_exact_m1(p, t)?]),
            Delta0Source::Sampled { block, reference } => delta0_samples(p, &eta, block, reference),
        }
    }

    fn width(&self) -> usize {
        match self {
            Delta0Source::Exact => 1,
            Delta0Source::Sampled { block, .. } => block.n,
        }
    }
}

/// Radial breakpoints `0, 1, 2, 4, …` up to the cutoff.
fn radial_breakpoints(cutoff: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut x = 1.0;
    while x < cutoff {
        out.push(x);
        x *= 2.0;
    }
    out.push(cutoff);
    out
}

/// `C'_m = C_m + (2π)^{-m} ω_{m-1} ∫₀^T δ₀(t e₁) t^{m-1} dt`, using the
/// `O(m)`-equivariance of the integrand. The radial integral is adaptive
/// Gauss–Kronrod; each leaf keeps per-sample partial integrals so that the
/// Monte Carlo error of the whole integral is measured on one block. For
/// `m ≥ 3`, `[0, 1]` is integrated in `s` with `t = s²`.
pub fn c_prime_m(p: &RadialProfile, config: &CPrimeConfig) -> Result<CPrimeEstimate> {
    let m = p.dim();
    let c = c_m(p, config.n_mc.max(2), config.seed)?;
    let source = if m == 1 && config.exact_when_available {
        Delta0Source::Exact
    } else {
        let block = crn_block(m, config.n_mc, config.seed);
        let reference = reference_samples(p, &block)?;
        Delta0Source::Sampled { block, reference }
    };
    let width = source.width();
    let cutoff = p.decay_radius().max(2.0);
    let substitute = m >= 3;
    let mf = m as i32;
    // Integrand in the integration variable x; returns per-sample values.
    let integrand = |x: f64| -> Result<Vec<f64>> {
        let (t, jac) = if substitute && x < 1.0 { (x * x, 2.0 * x) } else { (x, 1.0) };
        let g = t.powi(mf - 1) * jac;
        Ok(source.samples(p, t)?.into_iter().map(|v| v * g).collect())
    };
    let outcome = adaptive_gk(&radial_breakpoints(cutoff), config.tolerance, |lo, hi| {
        let mut kron = vec![0.0; width];
        let mut gauss = 0.0;
        for (x, wk, wg) in gk15_rule(lo, hi) {
            let v = integrand(x)?;
            for (acc, s) in kron.iter_mut().zip(&v) {
                *acc += wk * s;
            }
            gauss += wg * v.iter().sum::<f64>() / width as f64;
        }
        let kronrod = kron.iter().sum::<f64>() / width as f64;
        Ok(IntervalEstimate { kronrod, gauss, payload: kron })
    })?;
    let mut per_sample = vec![0.0; width];
    for (_, _, leaf) in &outcome.leaves {
        for (acc, v) in per_sample.iter_mut().zip(&leaf.payload) {
            *acc += v;
        }
    }
    let radial = Estimate::from_samples(&per_sample);
    let radial_mc = if width > 1 { radial.std_error } else { 0.0 };
    let tail_values = source.samples(p, cutoff)?;
    let tail = tail_values.iter().sum::<f64>() / tail_values.len() as f64;
    let tail_bound = tail.abs() * cutoff.powi(mf);
    let omega = sphere_area(m - 1);
    let integral = omega * outcome.value;
    if tail_bound > 1e-8_f64.max(1e-4 * integral.abs()) {
        return Err(Error::Quadrature(format!(
            "δ₀ does not decay: |δ₀(T)| T^m = {tail_bound:e} at T = {cutoff}"
        )));
    }
    let norm_factor = (2.0 * PI).powi(-mf);
    let mc_error = omega * radial_mc;
    let value = c.value + norm_factor * integral;
    let std_error = c.std_error.hypot(norm_factor * mc_error);
    Ok(CPrimeEstimate {
        value,
        std_error,
        c_m: c.value,
        delta0_integral: integral,
        quadrature_error: omega * outcome.error,
        mc_error,
        intervals: outcome.leaves.len(),
        evaluations: outcome.evaluations,
        cutoff,
        tail_bound,
        n_mc: config.n_mc,
        seed: config.seed,
    })
}

/// `(t, δ₀(t e₁), SE)` on a list of radii, sharing one block.
pub fn delta0_curve(p: &RadialProfile, radii: &[f64], n_mc: usize, seed: u64) -> Result<Vec<(f64, f64, f64)>> {
    if p.dim() == 1 {
        return radii.iter().map(|&t| Ok((t, delta0_exact_m1(p, t)?, 0.0))).collect();
    }
    let block = crn_block(p.dim(), n_mc, seed);
    let reference = reference_samples(p, &block)?;
    radii
        .iter()
        .map(|&t| {
            let mut eta = vec![0.0; p.dim()];
            eta[0] = t;
            let e = Estimate::from_samples(&delta0_samples(p, &eta, &block, &reference)?);
            Ok((t, e.mean, e.std_error))
        })
        .collect()
}

/// The exact mean count at scale `ε`,
/// `N_ε = ε^{-m} (2π)^{-m/2} det(-Hess V^ε(0))^{-1/2} E_{Υ^ε}|det A|`.
///
/// For `m ≥ 2` the expectation is expressed relative to `C_m` through the
/// ratio `E_{Υ^ε}|det| / E_{Υ⁰}|det|` on common random numbers.
pub fn n_eps(p: &RadialProfile, eps: f64, c: &ConstantEstimate, n_mc: usize, seed: u64) -> Result<Estimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    let m = p.dim();
    let mi = m as i32;
    let (_, d, _) = p.moments();
    let periodic = upsilon(p, eps)?;
    let flat = upsilon(p, 0.0)?;
    let hess = crate::kernel::derivative_tensors(p, &vec![0.0; m], eps, &crate::kernel::Frame::identity(m)).hess_matrix();
    let det_ratio = ((-hess).determinant() / d.powi(mi)).sqrt();
    let ratio = if m == 1 {
        Estimate { mean: (periodic.same[(0, 0)] / flat.same[(0, 0)]).sqrt(), std_error: 0.0, n: 0 }
    } else {
        let block = NormalBlock::generate(n_mc, entry_count(m), seed, streams::ENSEMBLE);
        let a = block.abs_det(&MatrixLaw::single(m, &periodic.same)?);
        let b = block.abs_det(&MatrixLaw::single(m, &flat.same)?);
        ratio_estimate(&a, &b)
    };
    let scale = eps.powi(-mi) / det_ratio;
    Ok(Estimate {
        mean: c.value * scale * ratio.mean,
        std_error: scale * (c.std_error * ratio.mean).hypot(c.value * ratio.std_error),
        n: n_mc,
    })
}

/// `Σa / Σb` with its delta-method standard error.
fn ratio_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len();
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let r = ma / mb;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - r * y) / mb).collect();
    Estimate { mean: r, std_error: Estimate::from_samples(&resid).std_error, n }
}

/// Predicted moments of the critical point count at scale `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub epsilon: f64,
    /// `N_ε`.
    pub mean: f64,
    pub mean_std_error: f64,
    /// `C_m ε^{-m}`.
    pub mean_leading: f64,
    /// `N_ε + ε^{-m}(2π)^{-m}∫δ₀`.
    pub variance: f64,
    pub variance_std_error: f64,
    /// `C'_m ε^{-m}`.
    pub variance_leading: f64,
    /// `(C'_m / C_m²) ε^m`.
    pub normalized_variance: f64,
    pub warnings: Vec<String>,
}

pub fn predict_moments(
    p: &RadialProfile,
    eps: f64,
    c: &ConstantEstimate,
    c_prime: &CPrimeEstimate,
    n_mc: usize,
    seed: u64,
) -> Result<Prediction> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    let mut warnings = Vec::new();
    if eps > EPSILON_POLICY_MAX {
        warnings.push(format!("epsilon {eps} exceeds {EPSILON_POLICY_MAX}; asymptotic predictions may be poor"));
    }
    let mi = p.dim() as i32;
    let scale = eps.powi(-mi);
    let n = n_eps(p, eps, c, n_mc, seed)?;
    let correction = scale * (2.0 * PI).powi(-mi) * c_prime.delta0_integral;
    let correction_se = scale * (c_prime.std_error.powi(2) - c.std_error.powi(2)).max(0.0).sqrt();
    Ok(Prediction {
        epsilon: eps,
        mean: n.mean,
        mean_std_error: n.std_error,
        mean_leading: c.value * scale,
        variance: n.mean + correction,
        variance_std_error: n.std_error.hypot(correction_se),
        variance_leading: c_prime.value * scale,
        normalized_variance: c_prime.value / (c.value * c.value) * eps.powi(mi),
        warnings,
    })
}

/// The two-point correlation at separation `η`, with its Hessian factor.
#[derive(Debug, Clone, Serialize)]
pub struct TwoPointCorrelation {
    pub eta: Vec<f64>,
    /// `[det ℋ^{-1/2} E_{Ξ̄⁰(η)}|det B|] / [d^{-m} E_{Γ∞}|det B|]`.
    pub ratio: f64,
    pub ratio_std_error: f64,
    /// `E_{Ξ̄⁰(η)}|det B| / E_{Γ∞}|det B|`, which vanishes like `|η|²`.
    pub hessian_factor: f64,
    pub hessian_factor_std_error: f64,
    /// `d^m det ℋ(V,η)^{-1/2}`, which grows like `|η|^{-m}`.
    pub prefactor: f64,
}

/// Two-point correlation by Monte Carlo. For `|η| < 1`, `E_{Ξ̄⁰(η)}|det B|`
/// is sampled as `|η|² E|det B^η|` from the rescaled tensor, which keeps the
/// estimate's relative error flat as `η → 0`. Farther out the unrescaled
/// tensor is used so that, on common random numbers, the ratio tends to 1
/// sample by sample. For `m = 1` both expectations are exact.
pub fn two_point_correlation(p: &RadialProfile, eta: &[f64], n_mc: usize, seed: u64) -> Result<TwoPointCorrelation> {
    let len = norm(eta);
    if len < DIAGONAL_RADIUS {
        return Err(Error::InvalidInput("the two-point correlation is evaluated off the diagonal only".into()));
    }
    let m = p.dim();
    let (_, d, h) = p.moments();
    let prefactor = inv_sqrt_det(p, eta)? * d.powi(m as i32);
    let raw = xi_bar(p, eta, 0.0)?;
    let (conditioned, gain) = if len < 1.0 { (xi_rescale(&raw)?, len * len) } else { (raw, 1.0) };
    let (factor, factor_se) = if m == 1 {
        let near = gain * abs_product_moment(conditioned.same[(0, 0)], conditioned.same[(0, 0)], conditioned.cross[(0, 0)]);
        let far = abs_product_moment(3.0 * h, 3.0 * h, 0.0);
        (near / far, 0.0)
    } else {
        let block = crn_block(m, n_mc, seed);
        let near: Vec<f64> = pair_samples(&conditioned, &block)?.into_iter().map(|v| v * gain).collect();
        let far = pair_samples(&xi_infinity(p), &block)?;
        let r = ratio_estimate(&near, &far);
        (r.mean, r.std_error)
    };
    Ok(TwoPointCorrelation {
        eta: eta.to_vec(),
        ratio: prefactor * factor,
        ratio_std_error: prefactor * factor_se,
        hessian_factor: factor,
        hessian_factor_std_error: factor_se,
        prefactor,
    })
}

/// Residual of `C_m² = K(∞) E_{Γ∞}|det B|` with its combined standard error.
#[derive(Debug, Clone, Serialize)]
pub struct Consistency {
    pub c_m_squared: f64,
    pub k_infinity_times_expectation: f64,
    pub residual: f64,
    pub std_error: f64,
}

impl Consistency {
    pub fn within(&self, k: f64) -> bool {
        self.residual.abs() <= k * self.std_error + 1e-12 * self.c_m_squared.abs()
    }
}

/// Compare `C_m²` from the one-matrix Monte Carlo against `K(∞)` times an
/// independent estimate of `E|det B⁻ det B⁺|` under the product law.
pub fn consistency_check(p: &RadialProfile, c: &ConstantEstimate, n_mc: usize, seed: u64) -> Result<Consistency> {
    let k_inf = k_eta(p, &EtaArg::Infinity)?;
    let law = MatrixLaw::pair(&xi_infinity(p).to_pair_spec()?)?;
    let product = Estimate::from_samples(&abs_det_samples(&law, n_mc, seed, streams::ENSEMBLE_ALT + (1 << 32)));
    let (cm, cm_se) = (c.monte_carlo.mean, c.monte_carlo.std_error);
    let lhs = cm * cm;
    let rhs = k_inf * product.mean;
    Ok(Consistency {
        c_m_squared: lhs,
        k_infinity_times_expectation: rhs,
        residual: lhs - rhs,
        std_error: (2.0 * cm * cm_se).hypot(k_inf * product.std_error),
    })
}

/// Everything the `constants` command reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub m: usize,
    pub c_m: ConstantEstimate,
    pub c_prime_m: CPrimeEstimate,
    pub k_infinity: f64,
    pub consistency: Consistency,
    pub prediction: Option<Prediction>,
}

pub fn constants_report(p: &RadialProfile, eps: Option<f64>, config: &CPrimeConfig) -> Result<ConstantsReport> {
    let c = c_m(p, config.n_mc, config.seed)?;
    let c_prime = c_prime_m(p, config)?;
    let consistency = consistency_check(p, &c, config.n_mc, config.seed)?;
    let prediction = match eps {
        Some(e) => Some(predict_moments(p, e, &c, &c_prime, config.n_mc, config.seed)?),
        None => None,
    };
    Ok(ConstantsReport { m: p.dim(), c_m: c, c_prime_m: c_prime, k_infinity: k_eta(p, &EtaArg::Infinity)?, consistency, prediction })
}

/// Matrix of `δ₀` on a square grid of half-width `radius` (for checking the
/// radial reduction in `m = 2`); returns `∫δ₀` by the midpoint rule.
pub fn delta0_grid_integral(p: &RadialProfile, radius: f64, cells: usize, n_mc: usize, seed: u64) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::InvalidInput("grid integration is implemented for m = 2".into()));
    }
    let block = crn_block(2, n_mc, seed);
    let reference = reference_samples(p, &block)?;
    let h = 2.0 * radius / cells as f64;
    let mut values = DMatrix::zeros(cells, cells);
    for a in 0..cells {
        for b in 0..cells {
            let eta = [-radius + (a as f64 + 0.5) * h, -radius + (b as f64 + 0.5) * h];
            let s = delta0_samples(p, &eta, &block, &reference)?;
            values[(a, b)] = s.iter().sum::<f64>() / s.len() as f64;
        }
    }
    Ok(values.sum() * h * h)
}

//! The radial weight `w` and its Fourier-side profile.
//!
//! For a weight `w` on `[0, ∞)` the function `V(ξ) = ∫ e^{-i⟨ξ,x⟩} w(|x|) dx`
//! on `R^m` is radial, so `V(ξ) = f(|ξ|²/2)` for a scalar profile `f`. The
//! profile and its first four derivatives drive every other computation in
//! the crate. Three moments get names of their own:
//! `s = f(0)`, `d = -f'(0)` and `h = f''(0)`.

use std::f64::consts::PI;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Weight values below this fraction of the maximum are treated as zero.
pub const DECAY_FLOOR: f64 = 1e-16;

/// Highest derivative order of `f` the crate ever needs.
pub const MAX_ORDER: usize = 4;

/// Below this argument the kernel functions use their power series.
const SERIES_SWITCH: f64 = 2.0;

/// Cap on the lattice cutoff radius for tabulated profiles, whose numerically
/// transformed tails never drop below the floor.
const TABULATED_MAX_RADIUS: f64 = 40.0;

/// A nonnegative even weight `w` on the real line, stored for `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// `w(t) = exp(-(t/scale)²)`.
    Gaussian { scale: f64 },
    /// Cubic spline through sampled values.
    Tabulated(Table),
}

/// Clamped cubic spline on `[0, t_max]` with zero slope at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
    max_value: f64,
}

impl WeightSpec {
    /// Gaussian weight with the given scale.
    pub fn gaussian(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidWeight(format!("gaussian scale must be positive, got {scale}")));
        }
        Ok(WeightSpec::Gaussian { scale })
    }

    /// Weight interpolated from `(t, w(t))` samples.
    ///
    /// Samples at negative `t` are accepted only when they mirror a sample at
    /// `|t|` with the same value. The table must contain `t = 0` and its last
    /// value must lie below [`DECAY_FLOOR`] times the maximum.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(Error::InvalidWeight("non-finite sample".into()));
        }
        if let Some((t, w)) = samples.iter().find(|(_, w)| *w < 0.0) {
            return Err(Error::InvalidWeight(format!("negative weight {w} at t={t}")));
        }
        let mut positive: Vec<(f64, f64)> = samples.iter().copied().filter(|(t, _)| *t >= 0.0).collect();
        positive.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in positive.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidWeight(format!("duplicate sample at t={}", pair[0].0)));
            }
        }
        for &(t, w) in samples.iter().filter(|(t, _)| *t < 0.0) {
            let mirror = positive.iter().find(|(s, _)| (*s - (-t)).abs() <= 1e-12 * t.abs().max(1.0));
            match mirror {
                Some(&(_, wm)) if (wm - w).abs() <= 1e-12 * wm.abs().max(w.abs()).max(f64::MIN_POSITIVE) => {}
                Some(&(_, wm)) => {
                    return Err(Error::InvalidWeight(format!("table is not even: w({t})={w} but w({})={wm}", -t)))
                }
                None => return Err(Error::InvalidWeight(format!("sample at t={t} has no mirror at t={}", -t))),
            }
        }
        if positive.len() < 4 {
            return Err(Error::InvalidWeight("need at least four samples with t >= 0".into()));
        }
        if positive[0].0 != 0.0 {
            return Err(Error::InvalidWeight("table must contain t = 0".into()));
        }
        let max_value = positive.iter().map(|p| p.1).fold(0.0, f64::max);
        if max_value <= 0.0 {
            return Err(Error::InvalidWeight("weight is identically zero".into()));
        }
        let last = positive.last().expect("non-empty").1;
        if last > DECAY_FLOOR * max_value {
            return Err(Error::InvalidWeight(format!(
                "table ends at w={last:e}, above the decay floor {DECAY_FLOOR:e} times the maximum"
            )));
        }
        let knots: Vec<f64> = positive.iter().map(|p| p.0).collect();
        let values: Vec<f64> = positive.iter().map(|p| p.1).collect();
        let second = clamped_spline_second_derivatives(&knots, &values);
        Ok(WeightSpec::Tabulated(Table { knots, values, second, max_value }))
    }

    /// Parse a two-column CSV table `t, w(t)`; a header row is optional.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidWeight(format!("csv: {e}")))?;
            if record.len() < 2 {
                return Err(Error::InvalidWeight(format!("line {} has fewer than two columns", line + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(w)) => samples.push((t, w)),
                _ if line == 0 => continue,
                _ => return Err(Error::InvalidWeight(format!("line {} is not numeric", line + 1))),
            }
        }
        Self::tabulated(&samples)
    }

    /// `w(t)` for any real `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            WeightSpec::Gaussian { scale } => (-(t / scale).powi(2)).exp(),
            WeightSpec::Tabulated(table) => table.eval(t),
        }
    }

    /// Largest value of `w`.
    pub fn max_value(&self) -> f64 {
        match self {
            WeightSpec::Gaussian { .. } => 1.0,
            WeightSpec::Tabulated(table) => table.max_value,
        }
    }

    /// Radius beyond which `w` (times any polynomial of degree ≤ 8 that the
    /// crate integrates against) is negligible.
    pub fn integration_radius(&self) -> f64 {
        match self {
            WeightSpec::Gaussian { scale } => scale * (-(DECAY_FLOOR.ln()) + 10.0).sqrt(),
            WeightSpec::Tabulated(table) => *table.knots.last().expect("non-empty"),
        }
    }

    /// Spacing used to lay out quadrature panels.
    fn panel_width(&self) -> f64 {
        match self {
            WeightSpec::Gaussian { scale } => 0.25 * scale,
            WeightSpec::Tabulated(table) => {
                let min_gap = table.knots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                (4.0 * min_gap).min(0.25 * table.knots.last().expect("non-empty"))
            }
        }
    }

    /// Marginal of `x ↦ w(|x|)` along the first axis of `R^m`:
    /// `∫_{R^{m-1}} w(√(x₁² + |y|²)) dy`.
    pub fn marginal(&self, x1: f64, m: usize) -> f64 {
        self.axis_integral(x1, m, 0)
    }

    /// `∫_{R^{m-1}} y₁² w(√(x₁² + |y|²)) dy`; zero when `m = 1`.
    pub fn transverse_marginal(&self, x1: f64, m: usize) -> f64 {
        if m < 2 {
            return 0.0;
        }
        self.axis_integral(x1, m, 2) / (m - 1) as f64
    }

    /// `ω_{m-2} ∫_0^∞ u^{m-2+extra} w(√(x² + u²)) du`.
    fn axis_integral(&self, x1: f64, m: usize, extra: i32) -> f64 {
        if m == 1 {
            return if extra == 0 { self.eval(x1) } else { 0.0 };
        }
        let big = self.integration_radius();
        if x1.abs() >= big {
            return 0.0;
        }
        let upper = (big * big - x1 * x1).sqrt();
        let rule = GaussLegendre::new(16);
        let power = m as i32 - 2 + extra;
        let integral = rule.integrate_composite(0.0, upper, self.panel_width(), |u| {
            u.powi(power) * self.eval((x1 * x1 + u * u).sqrt())
        });
        sphere_area(m - 2) * integral
    }

    /// `∫_0^∞ w(r) r^power dr` by composite Gauss–Legendre quadrature.
    pub fn radial_integral(&self, power: i32) -> f64 {
        let rule = GaussLegendre::new(16);
        rule.integrate_composite(0.0, self.integration_radius(), self.panel_width(), |r| r.powi(power) * self.eval(r))
    }
}

impl Table {
    fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let last = self.knots[n - 1];
        if t >= last {
            return 0.0;
        }
        let i = self.knots.partition_point(|&k| k <= t).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - t, t - x0);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let v = m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (self.values[i] / h - m0 * h / 6.0) * a
            + (self.values[i + 1] / h - m1 * h / 6.0) * b;
        v.max(0.0)
    }
}

/// Second derivatives of the cubic spline with zero slope at the first knot
/// and zero curvature at the last.
fn clamped_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h[0];
    upper[0] = h[0];
    rhs[0] = 6.0 * (y[1] - y[0]) / h[0];
    for i in 1..n - 1 {
        lower[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i];
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    diag[n - 1] = 1.0;
    rhs[n - 1] = 0.0;
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut out = vec![0.0; n];
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
    out
}

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n > 0, "gamma_half needs a positive argument");
    let mut value = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Surface area of the unit sphere `S^k ⊂ R^{k+1}`; `S^0` has two points.
pub fn sphere_area(k: usize) -> f64 {
    2.0 * PI.powf((k as f64 + 1.0) / 2.0) / gamma_half(k as u32 + 1)
}

/// `∫_{S^{m-1}} x^α dσ`: zero if some exponent is odd, otherwise
/// `2 Π Γ((α_i+1)/2) / Γ((m+|α|)/2)`.
pub fn sphere_moment(m: usize, alpha: &[u32]) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if alpha.len() > m {
        return Err(Error::InvalidInput(format!("multi-index has {} entries for dimension {m}", alpha.len())));
    }
    if alpha.iter().any(|a| a % 2 == 1) {
        return Ok(0.0);
    }
    let total: u32 = alpha.iter().sum();
    let mut num = 2.0;
    for i in 0..m {
        let a = alpha.get(i).copied().unwrap_or(0);
        num *= gamma_half(a + 1);
    }
    Ok(num / gamma_half(m as u32 + total))
}

/// `φ_k(z) = ((1/z) d/dz)^k cos z`, the building block of `f^{(k)}`.
pub fn cos_kernel(k: usize, z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_SWITCH {
        return cos_kernel_series(k, z, 0);
    }
    let (s, c) = z.sin_cos();
    match k {
        0 => c,
        1 => -s / z,
        2 => (s - z * c) / z.powi(3),
        3 => s / z.powi(3) + 3.0 * c / z.powi(4) - 3.0 * s / z.powi(5),
        4 => c / z.powi(4) - 6.0 * s / z.powi(5) - 15.0 * c / z.powi(6) + 15.0 * s / z.powi(7),
        _ => panic!("derivative order {k} exceeds {MAX_ORDER}"),
    }
}

/// `φ_k(z) - φ_k(0)` without cancellation near `z = 0`.
pub fn cos_kernel_increment(k: usize, z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_SWITCH {
        cos_kernel_series(k, z, 1)
    } else {
        cos_kernel(k, z) - cos_kernel_series(k, 0.0, 0)
    }
}

/// Power series of `φ_k`, summed from term index `first`.
fn cos_kernel_series(k: usize, z: f64, first: usize) -> f64 {
    assert!(k <= MAX_ORDER, "derivative order {k} exceeds {MAX_ORDER}");
    let z2 = z * z;
    let kf = k as f64;
    // Leading coefficient (-1)^k / (2k-1)!!.
    let mut term = if k % 2 == 0 { 1.0 } else { -1.0 };
    for j in 1..=k {
        term /= (2 * j - 1) as f64;
    }
    let mut sum = 0.0;
    for j in 0..60usize {
        if j >= first {
            sum += term;
            if term.abs() <= 1e-18 * sum.abs().max(1e-300) && j > first + 2 {
                break;
            }
        }
        let jf = j as f64;
        term *= -(jf + kf + 1.0) * z2 / ((jf + 1.0) * (2.0 * jf + 2.0 * kf + 1.0) * (2.0 * jf + 2.0 * kf + 2.0));
    }
    sum
}

#[derive(Debug, Clone)]
enum ProfileRepr {
    /// `f^{(k)}(s) = amp · (-rate)^k · e^{-rate s}`.
    Gaussian { amp: f64, rate: f64 },
    /// `f^{(k)}(s) = Σ_q weight_q x_q^{2k} φ_k(√(2s) x_q)` from the marginal.
    Marginal { nodes: Vec<f64>, weights: Vec<f64> },
}

/// The profile `f` with `V(ξ) = f(|ξ|²/2)`, plus derivatives up to order 4.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    m: usize,
    weight: WeightSpec,
    repr: ProfileRepr,
    at_zero: [f64; 5],
    decay_radius: f64,
}

/// Build the profile of `w` in dimension `m`.
pub fn make_profile(w: &WeightSpec, m: usize) -> Result<RadialProfile> {
    if m == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let repr = match w {
        WeightSpec::Gaussian { scale } => ProfileRepr::Gaussian {
            amp: PI.powf(m as f64 / 2.0) * scale.powi(m as i32),
            rate: scale * scale / 2.0,
        },
        WeightSpec::Tabulated(table) => {
            let rule = GaussLegendre::new(8);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for pair in table.knots.windows(2) {
                let (xs, ws) = rule.composite_points(pair[0], pair[1], f64::INFINITY);
                nodes.extend(xs);
                weights.extend(ws);
            }
            let marg: Vec<f64> = nodes.par_iter().map(|&x| w.marginal(x, m)).collect();
            // The marginal is even, so integrate over x ≥ 0 and double.
            let weights = weights.iter().zip(&marg).map(|(q, r)| 2.0 * q * r).collect();
            ProfileRepr::Marginal { nodes, weights }
        }
    };
    let mut profile = RadialProfile { m, weight: w.clone(), repr, at_zero: [0.0; 5], decay_radius: 0.0 };
    profile.at_zero = profile.derivs(0.0);
    if profile.at_zero[0] <= 0.0 || profile.at_zero[1] >= 0.0 || profile.at_zero[2] <= 0.0 {
        return Err(Error::InvalidWeight("weight has vanishing moments".into()));
    }
    profile.decay_radius = profile.find_decay_radius();
    Ok(profile)
}

impl RadialProfile {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// `f(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        self.derivs(s)[0]
    }

    /// `[f(s), f'(s), f''(s), f'''(s), f''''(s)]`.
    pub fn derivs(&self, s: f64) -> [f64; 5] {
        let s = s.max(0.0);
        match &self.repr {
            ProfileRepr::Gaussian { amp, rate } => {
                let base = amp * (-rate * s).exp();
                let mut out = [0.0; 5];
                let mut factor = 1.0;
                for slot in out.iter_mut() {
                    *slot = base * factor;
                    factor *= -rate;
                }
                out
            }
            ProfileRepr::Marginal { nodes, weights } => {
                let t = (2.0 * s).sqrt();
                let mut out = [0.0; 5];
                for (&x, &q) in nodes.iter().zip(weights) {
                    let x2 = x * x;
                    let mut pw = q;
                    for (k, slot) in out.iter_mut().enumerate() {
                        *slot += pw * cos_kernel(k, t * x);
                        pw *= x2;
                    }
                }
                out
            }
        }
    }

    /// `f^{(k)}(s) - f^{(k)}(0)` for `k = 0..=4`, accurate for small `s`.
    pub fn derivs_increment(&self, s: f64) -> [f64; 5] {
        let s = s.max(0.0);
        match &self.repr {
            ProfileRepr::Gaussian { amp, rate } => {
                let base = amp * (-rate * s).exp_m1();
                let mut out = [0.0; 5];
                let mut factor = 1.0;
                for slot in out.iter_mut() {
                    *slot = base * factor;
                    factor *= -rate;
                }
                out
            }
            ProfileRepr::Marginal { nodes, weights } => {
                let t = (2.0 * s).sqrt();
                let mut out = [0.0; 5];
                for (&x, &q) in nodes.iter().zip(weights) {
                    let x2 = x * x;
                    let mut pw = q;
                    for (k, slot) in out.iter_mut().enumerate() {
                        *slot += pw * cos_kernel_increment(k, t * x);
                        pw *= x2;
                    }
                }
                out
            }
        }
    }

    /// Derivatives at the origin.
    pub fn at_zero(&self) -> [f64; 5] {
        self.at_zero
    }

    /// `(s, d, h) = (f(0), -f'(0), f''(0))`.
    pub fn moments(&self) -> (f64, f64, f64) {
        (self.at_zero[0], -self.at_zero[1], self.at_zero[2])
    }

    /// The same triple computed directly from `w` by radial quadrature
    /// against sphere moments, independently of the Fourier path.
    pub fn direct_moments(&self) -> (f64, f64, f64) {
        let m = self.m;
        let mut a2 = vec![0u32; m];
        a2[0] = 2;
        let mut a4 = vec![0u32; m];
        a4[0] = 4;
        let z0 = sphere_moment(m, &vec![0; m]).expect("valid dimension");
        let z2 = sphere_moment(m, &a2).expect("valid dimension");
        let z4 = sphere_moment(m, &a4).expect("valid dimension");
        let w = &self.weight;
        let mi = m as i32;
        (
            z0 * w.radial_integral(mi - 1),
            z2 * w.radial_integral(mi + 1),
            z4 * w.radial_integral(mi + 3) / 3.0,
        )
    }

    /// Radius beyond which `V` and its derivatives up to order 4 are below
    /// `1e-16` relative to `f(0)`; lattice sums are truncated there.
    pub fn decay_radius(&self) -> f64 {
        self.decay_radius
    }

    fn find_decay_radius(&self) -> f64 {
        let (r_max, step) = match &self.weight {
            WeightSpec::Gaussian { scale } => (200.0 / scale, 0.05 / scale),
            WeightSpec::Tabulated(_) => (TABULATED_MAX_RADIUS, 0.1),
        };
        let threshold = 1e-16 * self.at_zero[0];
        let mut last_above = 0.0;
        let mut r = 0.0;
        while r <= r_max {
            let d = self.derivs(r * r / 2.0);
            let bound = d.iter().enumerate().map(|(k, v)| v.abs() * (1.0 + r).powi(k as i32)).fold(0.0, f64::max);
            if bound >= threshold {
                last_above = r;
            }
            r += step;
        }
        (last_above + step).min(r_max)
    }
}

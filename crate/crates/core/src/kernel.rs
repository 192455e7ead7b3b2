//! Derivatives of `V`, its lattice periodization `V^ε(η) = Σ_ν V(η + ν/ε)`,
//! and the two-point gradient covariance matrix
//!
//! ```text
//! ℋ(η) = [[A, B(η)], [B(η), A]],   A = -Hess V^ε(0),  B(η) = -Hess V^ε(η)
//! ```
//!
//! together with its determinant and inverse. Because ℋ is block-symmetric,
//! conjugating by `(1/√2)[[I, I], [I, -I]]` turns it into `diag(A+B, A-B)`.
//! The inverse and determinant are computed from those two blocks, and `A-B`
//! is assembled from increments of `f'` so that small `|η|` does not cancel.
//!
//! Quantities tied to a nonzero `η` are expressed in the *adapted frame*: an
//! orthonormal basis whose first vector is `η/|η|` (a Householder reflection
//! of the standard basis). Index `1` in that frame is the axial direction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::radial_weight::{RadialProfile, MAX_ORDER};

/// Points closer than this to the origin count as the diagonal.
pub const DIAGONAL_RADIUS: f64 = 1e-10;

/// A signed index in `{-m, …, -1, 1, …, m}`. Negative values address the
/// first block of a pair, positive values the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexJ(i32);

impl IndexJ {
    pub fn new(value: i32, m: usize) -> Result<Self> {
        if value == 0 || value.unsigned_abs() as usize > m {
            return Err(Error::InvalidInput(format!("index {value} outside J_{m}")));
        }
        Ok(IndexJ(value))
    }

    pub fn value(self) -> i32 {
        self.0
    }

    /// Zero-based coordinate index.
    pub fn axis(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_first_block(self) -> bool {
        self.0 < 0
    }
}

/// Orthonormal frame; column `i` is the `i`-th frame vector in ambient
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    q: DMatrix<f64>,
}

impl Frame {
    pub fn identity(m: usize) -> Self {
        Frame { q: DMatrix::identity(m, m) }
    }

    /// Frame whose first vector is `dir/|dir|`; the identity when `dir` is
    /// already along the first axis or is zero.
    pub fn adapted(dir: &[f64]) -> Self {
        let m = dir.len();
        let norm = norm(dir);
        if norm == 0.0 {
            return Frame::identity(m);
        }
        let u: Vec<f64> = dir.iter().map(|x| x / norm).collect();
        let mut v: Vec<f64> = u.iter().map(|x| -x).collect();
        v[0] += 1.0;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv < 1e-30 {
            return Frame::identity(m);
        }
        let q = DMatrix::from_fn(m, m, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - 2.0 * v[i] * v[j] / vv
        });
        Frame { q }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Coordinates of the ambient vector `x` in this frame.
    pub fn to_frame(&self, x: &[f64]) -> Vec<f64> {
        let m = x.len();
        (0..m).map(|j| (0..m).map(|i| self.q[(i, j)] * x[i]).sum()).collect()
    }

    /// Ambient form of a bilinear form given in frame coordinates.
    pub fn to_ambient(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.q * a * self.q.transpose()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Derivative of `V` at `y` along the coordinate axes listed in `idx`,
/// given the profile derivatives `d` at `|y|²/2`.
pub fn radial_derivative(d: &[f64; 5], y: &[f64], idx: &[usize]) -> f64 {
    let delta = |a: usize, b: usize| if idx[a] == idx[b] { 1.0 } else { 0.0 };
    let yy = |a: usize| y[idx[a]];
    match idx.len() {
        0 => d[0],
        1 => yy(0) * d[1],
        2 => delta(0, 1) * d[1] + yy(0) * yy(1) * d[2],
        3 => (delta(0, 1) * yy(2) + delta(0, 2) * yy(1) + delta(1, 2) * yy(0)) * d[2] + yy(0) * yy(1) * yy(2) * d[3],
        4 => {
            let pairs = delta(0, 1) * delta(2, 3) + delta(0, 2) * delta(1, 3) + delta(0, 3) * delta(1, 2);
            let mixed = delta(0, 1) * yy(2) * yy(3)
                + delta(0, 2) * yy(1) * yy(3)
                + delta(0, 3) * yy(1) * yy(2)
                + delta(1, 2) * yy(0) * yy(3)
                + delta(1, 3) * yy(0) * yy(2)
                + delta(2, 3) * yy(0) * yy(1);
            pairs * d[2] + mixed * d[3] + yy(0) * yy(1) * yy(2) * yy(3) * d[4]
        }
        n => panic!("derivative order {n} exceeds {MAX_ORDER}"),
    }
}

fn multi_index_to_axes(alpha: &[u32], m: usize) -> Result<Vec<usize>> {
    if alpha.len() > m {
        return Err(Error::InvalidInput(format!("multi-index has {} entries for dimension {m}", alpha.len())));
    }
    let order: u32 = alpha.iter().sum();
    if order as usize > MAX_ORDER {
        return Err(Error::InvalidInput(format!("derivative order {order} exceeds {MAX_ORDER}")));
    }
    let mut axes = Vec::with_capacity(order as usize);
    for (i, &a) in alpha.iter().enumerate() {
        axes.extend(std::iter::repeat_n(i, a as usize));
    }
    Ok(axes)
}

fn check_dim(p: &RadialProfile, eta: &[f64]) -> Result<()> {
    if eta.len() != p.dim() {
        return Err(Error::InvalidInput(format!("point has {} coordinates, profile dimension is {}", eta.len(), p.dim())));
    }
    if eta.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    Ok(())
}

/// `∂^α V(η)` for a multi-index of order at most 4.
pub fn v_eval(p: &RadialProfile, eta: &[f64], alpha: &[u32]) -> Result<f64> {
    check_dim(p, eta)?;
    let axes = multi_index_to_axes(alpha, p.dim())?;
    let d = p.derivs(0.5 * norm(eta).powi(2));
    Ok(radial_derivative(&d, eta, &axes))
}

/// Lattice offsets `ν/ε` that contribute to the periodization at `eta`.
///
/// All `ν ∈ Z^m` with `min(|η + ν/ε|, |ν/ε|) ≤ R_cut` are kept, where
/// `R_cut` is the profile's decay radius, together with the shell
/// `max_i |ν_i| ≤ 1`. Terms beyond `R_cut` are below `1e-16·f(0)`.
pub fn lattice_offsets(p: &RadialProfile, eta: &[f64], eps: f64) -> Vec<Vec<f64>> {
    let m = p.dim();
    let r_cut = p.decay_radius();
    let bound = (eps * (r_cut + norm(eta))).ceil().max(1.0) as i64;
    let mut out = Vec::new();
    let mut nu = vec![-bound; m];
    loop {
        let shift: Vec<f64> = nu.iter().map(|&n| n as f64 / eps).collect();
        let near_shell = nu.iter().all(|n| n.abs() <= 1);
        let moved: Vec<f64> = eta.iter().zip(&shift).map(|(a, b)| a + b).collect();
        if near_shell || norm(&moved).min(norm(&shift)) <= r_cut {
            out.push(shift);
        }
        let mut axis = 0;
        loop {
            if axis == m {
                return out;
            }
            nu[axis] += 1;
            if nu[axis] <= bound {
                break;
            }
            nu[axis] = -bound;
            axis += 1;
        }
    }
}

/// `∂^α V^ε(η)`. The zero shift is summed last so that the result is
/// insensitive to the order of the far shells.
pub fn periodize(p: &RadialProfile, eta: &[f64], eps: f64, alpha: &[u32]) -> Result<f64> {
    check_dim(p, eta)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    let axes = multi_index_to_axes(alpha, p.dim())?;
    let mut far = 0.0;
    let mut near = 0.0;
    for shift in lattice_offsets(p, eta, eps) {
        let y: Vec<f64> = eta.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let v = radial_derivative(&p.derivs(0.5 * norm(&y).powi(2)), &y, &axes);
        if shift.iter().all(|s| *s == 0.0) {
            near = v;
        } else {
            far += v;
        }
    }
    Ok(near + far)
}

/// Derivatives of order 2, 3 and 4 of `V` (or `V^ε`) at one point, stored as
/// flat row-major tensors in some fixed frame.
#[derive(Debug, Clone)]
pub struct DerivativeTensors {
    pub m: usize,
    pub hess: Vec<f64>,
    pub third: Vec<f64>,
    pub fourth: Vec<f64>,
}

impl DerivativeTensors {
    fn zeros(m: usize) -> Self {
        DerivativeTensors { m, hess: vec![0.0; m * m], third: vec![0.0; m * m * m], fourth: vec![0.0; m * m * m * m] }
    }

    fn add_point(&mut self, d: &[f64; 5], y: &[f64]) {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                self.hess[i * m + j] += radial_derivative(d, y, &[i, j]);
                for k in 0..m {
                    self.third[(i * m + j) * m + k] += radial_derivative(d, y, &[i, j, k]);
                    for l in 0..m {
                        self.fourth[((i * m + j) * m + k) * m + l] += radial_derivative(d, y, &[i, j, k, l]);
                    }
                }
            }
        }
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.m + j]
    }

    pub fn t(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.m + j) * self.m + k]
    }

    pub fn q(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.fourth[((i * self.m + j) * self.m + k) * self.m + l]
    }

    pub fn hess_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &self.hess)
    }
}

/// Derivative tensors of `V^ε` at `eta` (of `V` when `eps == 0`), expressed
/// in `frame`.
pub fn derivative_tensors(p: &RadialProfile, eta: &[f64], eps: f64, frame: &Frame) -> DerivativeTensors {
    let m = p.dim();
    let mut near = DerivativeTensors::zeros(m);
    let y0 = frame.to_frame(eta);
    near.add_point(&p.derivs(0.5 * norm(&y0).powi(2)), &y0);
    if eps > 0.0 {
        let mut far = DerivativeTensors::zeros(m);
        for shift in lattice_offsets(p, eta, eps) {
            if shift.iter().all(|s| *s == 0.0) {
                continue;
            }
            let x: Vec<f64> = eta.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let y = frame.to_frame(&x);
            far.add_point(&p.derivs(0.5 * norm(&y).powi(2)), &y);
        }
        for (a, b) in near.hess.iter_mut().zip(&far.hess) {
            *a += b;
        }
        for (a, b) in near.third.iter_mut().zip(&far.third) {
            *a += b;
        }
        for (a, b) in near.fourth.iter_mut().zip(&far.fourth) {
            *a += b;
        }
    }
    near
}

/// `Hess V^ε(η) - Hess V^ε(0)` in `frame`, with the zero-shift term built
/// from increments of `f'` so it stays accurate as `η → 0`.
fn hessian_increment(p: &RadialProfile, eta: &[f64], eps: f64, frame: &Frame) -> DMatrix<f64> {
    let m = p.dim();
    let y = frame.to_frame(eta);
    let r = 0.5 * norm(&y).powi(2);
    let d = p.derivs(r);
    let inc = p.derivs_increment(r);
    let mut out = DMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { inc[1] } else { 0.0 };
        delta + y[i] * y[j] * d[2]
    });
    if eps > 0.0 {
        let mut far = DMatrix::zeros(m, m);
        for shift in lattice_offsets(p, eta, eps) {
            if shift.iter().all(|s| *s == 0.0) {
                continue;
            }
            let x: Vec<f64> = eta.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let ys = frame.to_frame(&x);
            let y0 = frame.to_frame(&shift);
            let ds = p.derivs(0.5 * norm(&ys).powi(2));
            let d0 = p.derivs(0.5 * norm(&y0).powi(2));
            for i in 0..m {
                for j in 0..m {
                    far[(i, j)] += radial_derivative(&ds, &ys, &[i, j]) - radial_derivative(&d0, &y0, &[i, j]);
                }
            }
        }
        out += far;
    }
    out
}

/// The matrix ℋ(V^ε, η) with blocks stored in the adapted frame of `eta`.
#[derive(Debug, Clone)]
pub struct ScriptH {
    pub m: usize,
    pub eta: Vec<f64>,
    pub eps: f64,
    pub frame: Frame,
    /// `A = -Hess V^ε(0)`, frame coordinates.
    pub a: DMatrix<f64>,
    /// `B = -Hess V^ε(η)`, frame coordinates.
    pub b: DMatrix<f64>,
    /// `A - B`, assembled without cancellation.
    pub a_minus_b: DMatrix<f64>,
    /// Profile data for the closed-form determinant when `eps == 0`:
    /// `(f'(0), f'(r), f''(r), f'(r) - f'(0), |η|²)`.
    closed: Option<[f64; 5]>,
}

/// Assemble ℋ(V^ε, η); `eps == 0` uses `V` itself.
pub fn script_h(p: &RadialProfile, eta: &[f64], eps: f64) -> Result<ScriptH> {
    check_dim(p, eta)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {eps}")));
    }
    let m = p.dim();
    let frame = Frame::adapted(eta);
    let zero = vec![0.0; m];
    let h0 = derivative_tensors(p, &zero, eps, &frame).hess_matrix();
    let h_eta = derivative_tensors(p, eta, eps, &frame).hess_matrix();
    let a_minus_b = hessian_increment(p, eta, eps, &frame);
    let closed = if eps == 0.0 {
        let e2 = norm(eta).powi(2);
        let d = p.derivs(0.5 * e2);
        let inc = p.derivs_increment(0.5 * e2);
        Some([p.at_zero()[1], d[1], d[2], inc[1], e2])
    } else {
        None
    };
    Ok(ScriptH { m, eta: eta.to_vec(), eps, frame, a: -h0, b: -h_eta, a_minus_b, closed })
}

impl ScriptH {
    /// `A + B` in frame coordinates.
    pub fn a_plus_b(&self) -> DMatrix<f64> {
        &self.a + &self.b
    }

    /// The assembled `2m × 2m` matrix in ambient coordinates.
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.m;
        let a = self.frame.to_ambient(&self.a);
        let b = self.frame.to_ambient(&self.b);
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(&a);
        out.view_mut((m, m), (m, m)).copy_from(&a);
        out.view_mut((0, m), (m, m)).copy_from(&b);
        out.view_mut((m, 0), (m, m)).copy_from(&b);
        out
    }
}

/// `det ℋ`. For `eps == 0` this is the closed form
/// `(f'(0)² - (f'(r) + |η|² f''(r))²)(f'(0)² - f'(r)²)^{m-1}`, `r = |η|²/2`;
/// otherwise `det(A + B) · det(A - B)`.
pub fn det_script_h(h: &ScriptH) -> f64 {
    match h.closed {
        Some([fp0, fp_r, fpp_r, fp_inc, e2]) => {
            let axial = -(fp_inc + e2 * fpp_r) * (fp0 + fp_r + e2 * fpp_r);
            let transverse = -fp_inc * (fp0 + fp_r);
            axial * transverse.powi(h.m as i32 - 1)
        }
        None => h.a_plus_b().determinant() * h.a_minus_b.determinant(),
    }
}

/// `(A+B)^{-1}` and `(A-B)^{-1}` in frame coordinates.
fn half_inverses(h: &ScriptH) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if norm(&h.eta) < DIAGONAL_RADIUS {
        return Err(Error::Singular("ℋ is singular on the diagonal η = 0".into()));
    }
    let plus = h.a_plus_b().try_inverse().ok_or_else(|| Error::Singular("A + B is not invertible".into()))?;
    let minus = h.a_minus_b.clone().try_inverse().ok_or_else(|| Error::Singular("A - B is not invertible".into()))?;
    Ok((plus, minus))
}

/// `ℋ^{-1}` in ambient coordinates.
pub fn inv_script_h(h: &ScriptH) -> Result<DMatrix<f64>> {
    let (plus, minus) = half_inverses(h)?;
    let m = h.m;
    let diag = h.frame.to_ambient(&((&plus + &minus) * 0.5));
    let off = h.frame.to_ambient(&((&plus - &minus) * 0.5));
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&diag);
    out.view_mut((m, m), (m, m)).copy_from(&diag);
    out.view_mut((0, m), (m, m)).copy_from(&off);
    out.view_mut((m, 0), (m, m)).copy_from(&off);
    Ok(out)
}

/// Entries `σ̃_{i,j}`, `i, j ∈ J_m`, of `ℋ^{-1}` in the adapted frame.
#[derive(Debug, Clone)]
pub struct SigmaTilde {
    pub m: usize,
    pub eta: Vec<f64>,
    pub eps: f64,
    pub frame: Frame,
    /// Same-block entries `σ̃_{i,j} = σ̃_{-i,-j}`, `i, j > 0`.
    pub same: DMatrix<f64>,
    /// Cross-block entries `σ̃_{-i,j} = σ̃_{i,-j}`.
    pub cross: DMatrix<f64>,
}

impl SigmaTilde {
    pub fn get(&self, i: IndexJ, j: IndexJ) -> f64 {
        let (a, b) = (i.axis(), j.axis());
        if i.is_first_block() == j.is_first_block() {
            self.same[(a, b)]
        } else {
            self.cross[(a, b)]
        }
    }
}

/// The entries of `ℋ(V^ε, η)^{-1}` in the adapted frame of `eta`.
pub fn sigma_tilde(p: &RadialProfile, eta: &[f64], eps: f64) -> Result<SigmaTilde> {
    let h = script_h(p, eta, eps)?;
    sigma_from_script_h(&h)
}

pub(crate) fn sigma_from_script_h(h: &ScriptH) -> Result<SigmaTilde> {
    let (plus, minus) = half_inverses(h)?;
    Ok(SigmaTilde {
        m: h.m,
        eta: h.eta.clone(),
        eps: h.eps,
        frame: h.frame.clone(),
        same: (&plus + &minus) * 0.5,
        cross: (&plus - &minus) * 0.5,
    })
}

/// `lim_{t→0} t² σ̃_{i,j}(t·dir)`, `i, j > 0`, in the adapted frame of `dir`:
/// the inverse of the matrix `(∂_i ∂_j ∂_1 ∂_1 V^ε(0))`.
pub fn sigma_rescaled_limit(p: &RadialProfile, direction: &[f64], eps: f64) -> Result<DMatrix<f64>> {
    check_dim(p, direction)?;
    let len = norm(direction);
    if (len - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("direction must be a unit vector, |dir| = {len}")));
    }
    let m = p.dim();
    let frame = Frame::adapted(direction);
    let t = derivative_tensors(p, &vec![0.0; m], eps, &frame);
    let k = DMatrix::from_fn(m, m, |i, j| t.q(i, j, 0, 0));
    k.try_inverse().ok_or_else(|| Error::Singular("fourth-derivative block is singular".into()))
}

/// Margins (left side minus right side) of the two inequalities
///
/// ```text
/// |f'(0)| - |f'(t²/2) + t² f''(t²/2)| ≥ 2 ∫ α(t x₁) x₁² w(|x|) dx
/// |f'(0)| - |f'(t²/2)|                ≥ 2 ∫ α(t x₁) x₂² w(|x|) dx
/// ```
///
/// with `α(x) = min(sin²(x/2), cos²(x/2))`. The right sides are integrated
/// directly against the marginals of `w`; the second one is zero for `m = 1`.
pub fn tech_margin(p: &RadialProfile, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("t must be nonnegative, got {t}")));
    }
    let r = 0.5 * t * t;
    let d = p.derivs(r);
    let inc = p.derivs_increment(r);
    let fp0 = p.at_zero()[1];
    let axial = d[1] + t * t * d[2];
    let lhs1 = if axial <= 0.0 { inc[1] + t * t * d[2] } else { -fp0 - axial };
    let lhs2 = if d[1] <= 0.0 { inc[1] } else { -fp0 - d[1] };
    if t == 0.0 {
        return Ok((lhs1, lhs2));
    }
    let w = p.weight();
    let m = p.dim();
    let big = w.integration_radius();
    let alpha = |x: f64| {
        let s = (0.5 * t * x).sin().powi(2);
        s.min(1.0 - s)
    };
    // α(t x) has kinks where sin² = cos², i.e. t x = π/2 + kπ.
    let mut breaks = vec![0.0];
    let mut k = 0.0;
    loop {
        let x = (std::f64::consts::FRAC_PI_2 + k * std::f64::consts::PI) / t;
        if x >= big {
            break;
        }
        breaks.push(x);
        k += 1.0;
    }
    breaks.push(big);
    let rule = GaussLegendre::new(16);
    let width = 0.25 * big / 7.0;
    let mut rhs1 = 0.0;
    let mut rhs2 = 0.0;
    for seg in breaks.windows(2) {
        rhs1 += rule.integrate_composite(seg[0], seg[1], width, |x| alpha(x) * x * x * w.marginal(x, m));
        if m >= 2 {
            rhs2 += rule.integrate_composite(seg[0], seg[1], width, |x| alpha(x) * w.transverse_marginal(x, m));
        }
    }
    // Integrands are even in x₁; double the half-line integrals, then the
    // factor 2 of the inequality.
    Ok((lhs1 - 4.0 * rhs1, lhs2 - 4.0 * rhs2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_weight::{make_profile, WeightSpec};

    fn gaussian(m: usize) -> RadialProfile {
        make_profile(&WeightSpec::gaussian(1.0).unwrap(), m).unwrap()
    }

    #[test]
    fn adapted_frame_maps_first_axis_to_direction() {
        let dir = [0.3, -0.4, 1.2];
        let f = Frame::adapted(&dir);
        let n = norm(&dir);
        for i in 0..3 {
            assert!((f.matrix()[(i, 0)] - dir[i] / n).abs() < 1e-15);
        }
        let qtq = f.matrix().transpose() * f.matrix();
        assert!((qtq - DMatrix::identity(3, 3)).amax() < 1e-14);
        let y = f.to_frame(&dir);
        assert!((y[0] - n).abs() < 1e-14 && y[1].abs() < 1e-14 && y[2].abs() < 1e-14);
    }

    #[test]
    fn index_j_rejects_zero_and_out_of_range() {
        assert!(IndexJ::new(0, 2).is_err());
        assert!(IndexJ::new(3, 2).is_err());
        assert!(IndexJ::new(-2, 2).is_ok());
    }

    #[test]
    fn order_above_four_is_rejected() {
        let p = gaussian(2);
        assert!(v_eval(&p, &[0.1, 0.2], &[3, 2]).is_err());
    }

    #[test]
    fn inverse_refuses_the_diagonal() {
        let p = gaussian(2);
        let h = script_h(&p, &[0.0, 0.0], 0.0).unwrap();
        assert!(matches!(inv_script_h(&h), Err(Error::Singular(_))));
        assert_eq!(det_script_h(&h), 0.0);
    }

    #[test]
    fn periodized_determinant_matches_closed_form_when_shells_vanish() {
        let p = gaussian(2);
        let eta = [0.7, -0.2];
        let exact = det_script_h(&script_h(&p, &eta, 0.0).unwrap());
        let periodic = det_script_h(&script_h(&p, &eta, 0.02).unwrap());
        assert!((exact - periodic).abs() < 1e-12 * exact.abs());
    }
}

//! Covariances of the pair of Hessians `(Hess u(x), Hess u(y))` conditioned
//! on `∇u(x) = ∇u(y) = 0`, with `η = x - y` scaled by `ε`.
//!
//! Signed indices follow [`IndexJ`]: negative indices address the Hessian at
//! one point (`B⁻`), positive indices the other (`B⁺`). By the regression
//! formula, in the adapted frame of `η`,
//!
//! ```text
//! Ξ_{i,j|k,ℓ}   = V_{ijkℓ}(0) - Σ V_{ija}(η) σ̃_{a,b} V_{kℓb}(η)
//! Ξ_{-i,-j|k,ℓ} = V_{ijkℓ}(η) + Σ V_{ija}(η) σ̃_{-a,b} V_{kℓb}(η)
//! ```
//!
//! for `i, j, k, ℓ > 0`, and `Ξ_{-i,-j|-k,-ℓ} = Ξ_{i,j|k,ℓ}`. A tensor
//! therefore reduces to two symmetric matrices over index pairs `i ≤ j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{derivative_tensors, norm, script_h, sigma_from_script_h, Frame, IndexJ, DIAGONAL_RADIUS};
use crate::radial_weight::RadialProfile;
use crate::sym_ensembles::{entry_count, entry_index, entry_pairs, entry_scale, PairGaussianSpec, PSD_TOLERANCE};

/// Which construction produced a tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// `Ξ̄^ε(η)` for `ε > 0`.
    XiEps { eta: Vec<f64>, eps: f64 },
    /// `Ξ̄⁰(η)`, built from `V` itself.
    XiZero { eta: Vec<f64> },
    /// The product measure `Γ_{h,h} × Γ_{h,h}`.
    XiInfinity,
    /// `Ξ̄^{ε,η}`: axial rows and columns scaled by `|η|^{-1/2}`. A zero
    /// `eta` marks the limit at the origin along `direction`.
    XiRescaled { eta: Vec<f64>, eps: f64, direction: Vec<f64> },
    /// `Υ^ε ⊕ Υ^ε`, the unconditioned one-point Hessian law twice.
    Upsilon { eps: f64 },
}

/// Covariance tensor of a conditioned Hessian pair.
#[derive(Debug, Clone)]
pub struct CovTensor {
    pub m: usize,
    /// `Ξ_{i,j|k,ℓ}` for `i, j, k, ℓ > 0`, indexed by [`entry_index`].
    pub same: DMatrix<f64>,
    /// `Ξ_{-i,-j|k,ℓ}`, same indexing.
    pub cross: DMatrix<f64>,
    pub provenance: Provenance,
    /// Frame in which indices are read (adapted to `η` when there is one).
    pub frame: Frame,
}

impl CovTensor {
    /// `Ξ_{i,j|k,ℓ}` for signed indices with `i·j > 0` and `k·ℓ > 0`.
    pub fn get(&self, i: i32, j: i32, k: i32, l: i32) -> Result<f64> {
        let (i, j) = (IndexJ::new(i, self.m)?, IndexJ::new(j, self.m)?);
        let (k, l) = (IndexJ::new(k, self.m)?, IndexJ::new(l, self.m)?);
        if i.is_first_block() != j.is_first_block() || k.is_first_block() != l.is_first_block() {
            return Err(Error::InvalidInput("mixed-sign index pairs are not part of the tensor".into()));
        }
        let a = entry_index(i.axis(), j.axis(), self.m);
        let b = entry_index(k.axis(), l.axis(), self.m);
        Ok(if i.is_first_block() == k.is_first_block() { self.same[(a, b)] } else { self.cross[(a, b)] })
    }

    /// Covariance of the normalized entries of `(B⁻, B⁺)`.
    pub fn pair_covariance(&self) -> DMatrix<f64> {
        let pairs = entry_pairs(self.m);
        let n = pairs.len();
        let scale: Vec<f64> = pairs.iter().map(|&(i, j)| entry_scale(i, j)).collect();
        DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (a, b) = (r % n, c % n);
            let block = if (r < n) == (c < n) { &self.same } else { &self.cross };
            scale[a] * scale[b] * block[(a, b)]
        })
    }

    pub fn to_pair_spec(&self) -> Result<PairGaussianSpec> {
        PairGaussianSpec::new(self.m, self.pair_covariance())
    }

    /// Smallest eigenvalue of the pair covariance, and whether it passes the
    /// PSD tolerance used by the samplers.
    pub fn psd_check(&self) -> (f64, bool) {
        let eig = self.pair_covariance().symmetric_eigen().eigenvalues;
        let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lowest = eig.iter().copied().fold(f64::INFINITY, f64::min);
        (lowest, lowest >= -PSD_TOLERANCE * scale)
    }

    /// `η` for tensors tied to a separation.
    pub fn eta(&self) -> Option<&[f64]> {
        match &self.provenance {
            Provenance::XiEps { eta, .. } | Provenance::XiZero { eta } | Provenance::XiRescaled { eta, .. } => Some(eta),
            Provenance::XiInfinity | Provenance::Upsilon { .. } => None,
        }
    }

    /// All entries as `(i, j, k, ℓ, value)` over representative quadruples:
    /// `0 < |i| ≤ |j|`, `0 < k ≤ ℓ`, with `i, j` negative for cross entries.
    pub fn rows(&self) -> Vec<(i32, i32, i32, i32, f64)> {
        let pairs = entry_pairs(self.m);
        let mut out = Vec::new();
        for (sign, block) in [(1, &self.same), (-1, &self.cross)] {
            for (a, &(i, j)) in pairs.iter().enumerate() {
                for (b, &(k, l)) in pairs.iter().enumerate() {
                    out.push((sign * (i as i32 + 1), sign * (j as i32 + 1), k as i32 + 1, l as i32 + 1, block[(a, b)]));
                }
            }
        }
        out
    }
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// `Ξ̄^ε(η)`; `eps == 0` gives `Ξ̄⁰(η)`.
pub fn xi_bar(p: &RadialProfile, eta: &[f64], eps: f64) -> Result<CovTensor> {
    if norm(eta) < DIAGONAL_RADIUS {
        return Err(Error::InvalidInput("η = 0 is the diagonal; use xi_limit_origin".into()));
    }
    let h = script_h(p, eta, eps)?;
    let sigma = sigma_from_script_h(&h)?;
    let m = p.dim();
    let frame = h.frame.clone();
    let at_zero = derivative_tensors(p, &vec![0.0; m], eps, &frame);
    let at_eta = derivative_tensors(p, eta, eps, &frame);
    let pairs = entry_pairs(m);
    let n = pairs.len();
    // Rows T[(i,j), a] = V_{ija}(η).
    let third = DMatrix::from_fn(n, m, |r, a| {
        let (i, j) = pairs[r];
        at_eta.t(i, j, a)
    });
    let q0 = DMatrix::from_fn(n, n, |r, c| {
        let ((i, j), (k, l)) = (pairs[r], pairs[c]);
        at_zero.q(i, j, k, l)
    });
    let q_eta = DMatrix::from_fn(n, n, |r, c| {
        let ((i, j), (k, l)) = (pairs[r], pairs[c]);
        at_eta.q(i, j, k, l)
    });
    let same = q0 - &third * &sigma.same * third.transpose();
    let cross = q_eta + &third * &sigma.cross * third.transpose();
    let provenance = if eps > 0.0 { Provenance::XiEps { eta: eta.to_vec(), eps } } else { Provenance::XiZero { eta: eta.to_vec() } };
    Ok(CovTensor { m, same: symmetrize(same), cross: symmetrize(cross), provenance, frame })
}

/// `Υ^ε ⊕ Υ^ε`: entries `V^ε_{ijkℓ}(0)` on both diagonal blocks, zero cross
/// block.
pub fn upsilon(p: &RadialProfile, eps: f64) -> Result<CovTensor> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {eps}")));
    }
    let m = p.dim();
    let frame = Frame::identity(m);
    let t = derivative_tensors(p, &vec![0.0; m], eps, &frame);
    let pairs = entry_pairs(m);
    let n = pairs.len();
    let same = DMatrix::from_fn(n, n, |r, c| {
        let ((i, j), (k, l)) = (pairs[r], pairs[c]);
        t.q(i, j, k, l)
    });
    Ok(CovTensor { m, same: symmetrize(same), cross: DMatrix::zeros(n, n), provenance: Provenance::Upsilon { eps }, frame })
}

/// `Ξ̄^∞`: the product of two independent `Γ_{h,h}` laws, with
/// `Ξ_{i,j|k,ℓ} = h(δ_ij δ_kℓ + δ_ik δ_jℓ + δ_iℓ δ_jk)`.
pub fn xi_infinity(p: &RadialProfile) -> CovTensor {
    let m = p.dim();
    let (_, _, h) = p.moments();
    let pairs = entry_pairs(m);
    let n = pairs.len();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let same = DMatrix::from_fn(n, n, |r, c| {
        let ((i, j), (k, l)) = (pairs[r], pairs[c]);
        h * (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k))
    });
    CovTensor { m, same, cross: DMatrix::zeros(n, n), provenance: Provenance::XiInfinity, frame: Frame::identity(m) }
}

/// Factor `|η|^{-n/2}` for an entry `(i, j)` with `n` axial indices.
fn axial_scale(i: usize, j: usize, len: f64) -> f64 {
    let n = (i == 0) as i32 + (j == 0) as i32;
    len.powf(-0.5 * n as f64)
}

/// `Ξ̄^{ε,η}`: the covariance of `B^η = D B D` with `D = diag(|η|^{-1/2}, 1, …, 1)`
/// in the adapted frame, i.e. each entry scaled by `|η|^{-1/2}` per axial
/// index. Then `det B⁻ det B⁺ = |η|² det B^η₋ det B^η₊` sample by sample.
pub fn xi_rescale(t: &CovTensor) -> Result<CovTensor> {
    let (eta, eps) = match &t.provenance {
        Provenance::XiEps { eta, eps } => (eta.clone(), *eps),
        Provenance::XiZero { eta } => (eta.clone(), 0.0),
        other => return Err(Error::InvalidInput(format!("cannot rescale a tensor of provenance {other:?}"))),
    };
    let len = norm(&eta);
    let pairs = entry_pairs(t.m);
    let factor: Vec<f64> = pairs.iter().map(|&(i, j)| axial_scale(i, j, len)).collect();
    let scale = |block: &DMatrix<f64>| DMatrix::from_fn(block.nrows(), block.ncols(), |r, c| factor[r] * factor[c] * block[(r, c)]);
    let direction = eta.iter().map(|v| v / len).collect();
    Ok(CovTensor {
        m: t.m,
        same: scale(&t.same),
        cross: scale(&t.cross),
        provenance: Provenance::XiRescaled { eta, eps, direction },
        frame: t.frame.clone(),
    })
}

/// Apply the `B ↦ B^η` rescaling to a sample given as normalized entries of
/// the pair `(B⁻, B⁺)` in the adapted frame.
pub fn rescale_pair_entries(entries: &mut [f64], m: usize, eta_norm: f64) {
    let n = entry_count(m);
    for (a, (i, j)) in entry_pairs(m).into_iter().enumerate() {
        let f = axial_scale(i, j, eta_norm);
        entries[a] *= f;
        entries[n + a] *= f;
    }
}

/// Base radius of the extrapolation ladder `{4u, 2u, u}`.
pub const ORIGIN_LADDER: f64 = 2.5e-3;
/// Agreement required between the primary and the halved ladder.
pub const ORIGIN_TOLERANCE: f64 = 1e-6;

fn rescaled_at(p: &RadialProfile, direction: &[f64], eps: f64, t: f64) -> Result<CovTensor> {
    let eta: Vec<f64> = direction.iter().map(|v| v * t).collect();
    xi_rescale(&xi_bar(p, &eta, eps)?)
}

fn extrapolate(p: &RadialProfile, direction: &[f64], eps: f64, u: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let far = rescaled_at(p, direction, eps, 4.0 * u)?;
    let mid = rescaled_at(p, direction, eps, 2.0 * u)?;
    let near = rescaled_at(p, direction, eps, u)?;
    // Quadratic extrapolation to t = 0 from t ∈ {4u, 2u, u}.
    let combine = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>| a / 3.0 - b * 2.0 + c * (8.0 / 3.0);
    Ok((combine(&far.same, &mid.same, &near.same), combine(&far.cross, &mid.cross, &near.cross)))
}

/// `lim_{t→0} Ξ̄^{ε,t·dir}` by polynomial extrapolation from
/// `t ∈ {1e-2, 5e-3, 2.5e-3}`, confirmed against the same extrapolation
/// from the halved ladder.
pub fn xi_limit_origin(p: &RadialProfile, direction: &[f64], eps: f64) -> Result<CovTensor> {
    let len = norm(direction);
    if direction.len() != p.dim() || (len - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("direction must be a unit vector in R^{}", p.dim())));
    }
    let (same, cross) = extrapolate(p, direction, eps, ORIGIN_LADDER)?;
    let (same_check, cross_check) = extrapolate(p, direction, eps, 0.5 * ORIGIN_LADDER)?;
    let pairs = entry_pairs(p.dim());
    for (label, a, b) in [("same", &same, &same_check), ("cross", &cross, &cross_check)] {
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                let gap = (a[(r, c)] - b[(r, c)]).abs();
                if gap > ORIGIN_TOLERANCE * a[(r, c)].abs().max(1.0) {
                    let ((i, j), (k, l)) = (pairs[r], pairs[c]);
                    return Err(Error::NoConvergence(format!(
                        "origin limit of {label} entry ({},{}|{},{}) moved by {gap:e} ({} vs {})",
                        i + 1,
                        j + 1,
                        k + 1,
                        l + 1,
                        a[(r, c)],
                        b[(r, c)]
                    )));
                }
            }
        }
    }
    Ok(CovTensor {
        m: p.dim(),
        same: symmetrize(same),
        cross: symmetrize(cross),
        provenance: Provenance::XiRescaled { eta: vec![0.0; p.dim()], eps, direction: direction.to_vec() },
        frame: Frame::adapted(direction),
    })
}

/// Small-`|η|` expansion constants built from `f'(0), f''(0), f'''(0)`.
///
/// `σ̃⁰₁,₁ = (1 + c₁₁|η|²)/(3f''|η|²)`, `σ̃⁰ᵢ,ᵢ = (1 + c₀|η|²)/(f''|η|²)`,
/// `σ̃⁰₋₁,₁ = -(1 + d₁₁|η|²)/(3f''|η|²)`, `σ̃⁰₋ᵢ,ᵢ = -(1 + d₀|η|²)/(f''|η|²)`,
/// up to `O(|η|²)` relative corrections. The barred constants are the
/// `|η|²` coefficients of the corresponding conditional covariances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConstants {
    pub c11: f64,
    pub c0: f64,
    pub d11: f64,
    pub d0: f64,
    pub cbar11: f64,
    pub cbar0: f64,
    pub dbar11: f64,
    pub dbar0: f64,
}

pub fn expansion_constants(p: &RadialProfile) -> ExpansionConstants {
    let [_, f1, f2, f3, _] = p.at_zero();
    let c11 = -0.75 * f2 / f1 - (5.0 / 12.0) * f3 / f2;
    let c0 = -0.25 * (f3 / f2 + f2 / f1);
    // σ̃₋₁,₁ = -(f'(r) + |η|² f''(r))/f'(0) · σ̃₁,₁, whose |η|² coefficient
    // is 3f''/(2f').
    let d11 = c11 + 1.5 * f2 / f1;
    let d0 = c0 + 0.5 * f2 / f1;
    ExpansionConstants {
        c11,
        c0,
        d11,
        d0,
        cbar11: -5.0 * f3 - 3.0 * c11 * f2,
        cbar0: -f3 - f2 * c0,
        dbar11: 2.5 * f3 - 3.0 * f2 * d11,
        dbar0: 0.5 * f3 - d0 * f2,
    }
}

/// A catalogued small-`|η|` expansion: the quantity behaves like
/// `|η|^{lead} Σ_k a_k |η|^{2k}` and `order` selects `a_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogueEntry {
    pub id: &'static str,
    /// Signed indices (one-based, adapted frame) of the tensor or `σ̃` entry,
    /// if the id names one.
    pub indices: Option<[i32; 4]>,
    /// Power of `|η|` in front of the series.
    pub lead: i32,
    pub min_dim: usize,
}

/// The catalogue of region-pair expansions. Region names follow the split
/// of a symmetric array into `a = {(1,1)}`, `b = {(1,i)}`, `c = {(i,i)}` and
/// `d = {(i,j)}` with `1 < i < j`; `±` marks the block.
pub const CATALOGUE: &[CatalogueEntry] = &[
    CatalogueEntry { id: "c11", indices: None, lead: 0, min_dim: 1 },
    CatalogueEntry { id: "c0", indices: None, lead: 0, min_dim: 2 },
    CatalogueEntry { id: "d11", indices: None, lead: 0, min_dim: 1 },
    CatalogueEntry { id: "d0", indices: None, lead: 0, min_dim: 2 },
    CatalogueEntry { id: "cbar11", indices: None, lead: 0, min_dim: 1 },
    CatalogueEntry { id: "cbar0", indices: None, lead: 0, min_dim: 2 },
    CatalogueEntry { id: "dbar11", indices: None, lead: 0, min_dim: 1 },
    CatalogueEntry { id: "dbar0", indices: None, lead: 0, min_dim: 2 },
    CatalogueEntry { id: "sigma:1,1", indices: Some([1, 1, 0, 0]), lead: -2, min_dim: 1 },
    CatalogueEntry { id: "sigma:i,i", indices: Some([2, 2, 0, 0]), lead: -2, min_dim: 2 },
    CatalogueEntry { id: "sigma:-1,1", indices: Some([-1, 1, 0, 0]), lead: -2, min_dim: 1 },
    CatalogueEntry { id: "sigma:-i,i", indices: Some([-2, 2, 0, 0]), lead: -2, min_dim: 2 },
    CatalogueEntry { id: "a+a+", indices: Some([1, 1, 1, 1]), lead: 0, min_dim: 1 },
    CatalogueEntry { id: "b+b+", indices: Some([1, 2, 1, 2]), lead: 0, min_dim: 2 },
    CatalogueEntry { id: "c+c+:ii|ii", indices: Some([2, 2, 2, 2]), lead: 0, min_dim: 2 },
    CatalogueEntry { id: "c+c+:ii|jj", indices: Some([2, 2, 3, 3]), lead: 0, min_dim: 3 },
    CatalogueEntry { id: "d+d+", indices: Some([2, 3, 2, 3]), lead: 0, min_dim: 3 },
    CatalogueEntry { id: "a-a+", indices: Some([-1, -1, 1, 1]), lead: 0, min_dim: 1 },
    CatalogueEntry { id: "b-b+", indices: Some([-1, -2, 1, 2]), lead: 0, min_dim: 2 },
    CatalogueEntry { id: "c-c+:ii|ii", indices: Some([-2, -2, 2, 2]), lead: 0, min_dim: 2 },
    CatalogueEntry { id: "c-c+:ii|jj", indices: Some([-2, -2, 3, 3]), lead: 0, min_dim: 3 },
    CatalogueEntry { id: "d-d+", indices: Some([-2, -3, 2, 3]), lead: 0, min_dim: 3 },
];

pub fn catalogue_entry(id: &str) -> Result<&'static CatalogueEntry> {
    CATALOGUE.iter().find(|e| e.id == id).ok_or_else(|| Error::InvalidInput(format!("no catalogued expansion named {id:?}")))
}

/// Coefficient `a_order` of the catalogued expansion `id` for dimension `m`.
pub fn expansion_coefficient(p: &RadialProfile, m: usize, id: &str, order: usize) -> Result<f64> {
    let entry = catalogue_entry(id)?;
    if m < entry.min_dim {
        return Err(Error::InvalidInput(format!("{id} needs m ≥ {}", entry.min_dim)));
    }
    let k = expansion_constants(p);
    let [_, _, f2, f3, _] = p.at_zero();
    let series: &[f64] = match id {
        "c11" => &[k.c11],
        "c0" => &[k.c0],
        "d11" => &[k.d11],
        "d0" => &[k.d0],
        "cbar11" => &[k.cbar11],
        "cbar0" => &[k.cbar0],
        "dbar11" => &[k.dbar11],
        "dbar0" => &[k.dbar0],
        "sigma:1,1" => &[1.0 / (3.0 * f2), k.c11 / (3.0 * f2)],
        "sigma:i,i" => &[1.0 / f2, k.c0 / f2],
        "sigma:-1,1" => &[-1.0 / (3.0 * f2), -k.d11 / (3.0 * f2)],
        "sigma:-i,i" => &[-1.0 / f2, -k.d0 / f2],
        "a+a+" => &[0.0, k.cbar11],
        "b+b+" => &[0.0, k.cbar0],
        "c+c+:ii|ii" | "c-c+:ii|ii" => &[8.0 / 3.0 * f2],
        "c+c+:ii|jj" | "c-c+:ii|jj" => &[2.0 / 3.0 * f2],
        "d+d+" => &[f2, 0.0, 0.0],
        "a-a+" => &[0.0, k.dbar11],
        "b-b+" => &[0.0, k.dbar0],
        "d-d+" => &[f2, 0.5 * f3],
        _ => unreachable!("catalogue and coefficient table list the same ids"),
    };
    series
        .get(order)
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("{id} has no catalogued coefficient of order {order}")))
}

/// Representative quadruples `(i, j | k, ℓ)` (one-based, adapted frame) in
/// which some coordinate occurs an odd number of times. Reflection in that
/// coordinate fixes the axial direction and flips the sign of the entry,
/// so these vanish identically.
pub fn zero_entries(m: usize) -> Vec<[i32; 4]> {
    let pairs = entry_pairs(m);
    let mut out = Vec::new();
    for sign in [1, -1] {
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                let mut count = vec![0usize; m];
                for a in [i, j, k, l] {
                    count[a] += 1;
                }
                if count.iter().any(|c| c % 2 == 1) {
                    out.push([sign * (i as i32 + 1), sign * (j as i32 + 1), k as i32 + 1, l as i32 + 1]);
                }
            }
        }
    }
    out
}

//! Gaussian measures on real symmetric `m × m` matrices and Monte Carlo
//! estimates of `E|det|`.
//!
//! Covariances are written on *normalized entries*: `â_ii = a_ii` and
//! `â_ij = √2 a_ij` for `i < j`, listed row by row over the upper triangle.
//! A pair of matrices `(B⁻, B⁺)` uses the concatenation of both lists.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Frame;
use crate::rng::{substream, CHUNK};

/// Relative eigenvalue tolerance below which a covariance is clamped to
/// positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Number of normalized entries of an `m × m` symmetric matrix.
pub fn entry_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Position of `(i, j)`, `i ≤ j`, in the normalized-entry list.
pub fn entry_index(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

/// The `(i, j)` pairs in normalized-entry order.
pub fn entry_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

/// Scale between a raw entry and its normalized counterpart.
pub fn entry_scale(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

/// Row-major symmetric matrix from normalized entries.
pub fn unpack(entries: &[f64], m: usize, out: &mut [f64]) {
    let mut idx = 0;
    for i in 0..m {
        out[i * m + i] = entries[idx];
        idx += 1;
        for j in i + 1..m {
            let v = entries[idx] / std::f64::consts::SQRT_2;
            out[i * m + j] = v;
            out[j * m + i] = v;
            idx += 1;
        }
    }
}

/// Normalized entries of a symmetric matrix.
pub fn pack(a: &DMatrix<f64>) -> Vec<f64> {
    let m = a.nrows();
    entry_pairs(m).into_iter().map(|(i, j)| a[(i, j)] * entry_scale(i, j)).collect()
}

/// Determinant by Gaussian elimination with partial pivoting; destroys `a`.
pub fn det_in_place(a: &mut [f64], m: usize) -> f64 {
    match m {
        0 => return 1.0,
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut det = 1.0;
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].abs();
        for row in col + 1..m {
            let v = a[row * m + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            det = -det;
        }
        let d = a[col * m + col];
        det *= d;
        for row in col + 1..m {
            let factor = a[row * m + col] / d;
            if factor != 0.0 {
                for k in col + 1..m {
                    a[row * m + k] -= factor * a[col * m + k];
                }
            }
        }
    }
    det
}

/// The O(m)-invariant family with `E(a_ij a_kl) = u δ_ij δ_kl + v(δ_ik δ_jl + δ_il δ_jk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoSpec {
    pub m: usize,
    pub u: f64,
    pub v: f64,
}

impl IsoSpec {
    pub fn new(m: usize, u: f64, v: f64) -> Result<Self> {
        let spec = IsoSpec { m, u, v };
        spec.validate()?;
        Ok(spec)
    }

    /// Requires `v > 0` and `m u + 2 v > 0`.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if !(self.v > 0.0) || !(self.m as f64 * self.u + 2.0 * self.v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "invariant ensemble needs v > 0 and m·u + 2v > 0, got u={}, v={}",
                self.u, self.v
            )));
        }
        Ok(())
    }

    /// Covariance on normalized entries.
    pub fn covariance_form(&self) -> DMatrix<f64> {
        let pairs = entry_pairs(self.m);
        DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
            let (i, j) = pairs[a];
            let (k, l) = pairs[b];
            if i == j && k == l {
                self.u + if i == k { 2.0 * self.v } else { 0.0 }
            } else if a == b {
                2.0 * self.v
            } else {
                0.0
            }
        })
    }

    /// Linear map from standard normals to normalized entries. For `u ≥ 0`
    /// this is GOE with off-diagonal variance `v` plus an independent scalar
    /// multiple of the identity; otherwise the symmetric square root of the
    /// covariance.
    fn factor(&self) -> Result<(usize, Vec<f64>)> {
        let n = entry_count(self.m);
        if self.u >= 0.0 {
            let dim_in = n + 1;
            let mut f = vec![0.0; n * dim_in];
            let goe = (2.0 * self.v).sqrt();
            for (a, (i, j)) in entry_pairs(self.m).into_iter().enumerate() {
                f[a * dim_in + a] = goe;
                if i == j {
                    f[a * dim_in + n] = self.u.sqrt();
                }
            }
            Ok((dim_in, f))
        } else {
            let s = symmetric_sqrt(&self.covariance_form())?;
            Ok((n, s))
        }
    }
}

/// The five-parameter family invariant under rotations fixing `axis`:
/// `Q_c = c₁q₁ + … + c₅q₅` on normalized entries in a frame whose first
/// vector is `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialSpec {
    pub m: usize,
    pub c: [f64; 5],
    pub axis: Vec<f64>,
}

/// Outcome of [`validate_axial`].
#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    Valid,
    Invalid(String),
}

impl AxialSpec {
    pub fn new(m: usize, c: [f64; 5], axis: Vec<f64>) -> Result<Self> {
        if m == 0 || axis.len() != m {
            return Err(Error::InvalidInput(format!("axis has {} coordinates for dimension {m}", axis.len())));
        }
        if crate::kernel::norm(&axis) == 0.0 {
            return Err(Error::InvalidInput("axis must be nonzero".into()));
        }
        Ok(AxialSpec { m, c, axis })
    }

    /// The form `Q_c` on normalized entries, in the axis-adapted frame.
    ///
    /// With regions `a = {â₁₁}`, `b = {â₁ₖ}`, `c = {â_kk}`, `d = {â_kl, 1<k<l}`:
    /// `Q(a,a) = c₁`, `Q(b,b) = c₂ I`, `Q(a,c) = c₃`, `Q(c,c) = c₅ I + c₄ J`,
    /// `Q(d,d) = c₅ I`, all other blocks zero.
    pub fn q_form(&self) -> DMatrix<f64> {
        let [c1, c2, c3, c4, c5] = self.c;
        let pairs = entry_pairs(self.m);
        DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
            let (i, j) = pairs[a];
            let (k, l) = pairs[b];
            match ((i, j), (k, l)) {
                ((0, 0), (0, 0)) => c1,
                ((0, 0), (k, l)) if k == l => c3,
                ((i, j), (0, 0)) if i == j => c3,
                ((0, _), (0, _)) if a == b => c2,
                ((i, j), (k, l)) if i > 0 && k > 0 && i == j && k == l => c4 + if i == k { c5 } else { 0.0 },
                ((i, _), (k, _)) if i > 0 && k > 0 && a == b => c5,
                _ => 0.0,
            }
        })
    }

    /// The `2 × 2` reduction `[[c₁, √(m-1) c₃], [√(m-1) c₃, c₅ + (m-1) c₄]]`.
    pub fn reduced_form(&self) -> [[f64; 2]; 2] {
        let [c1, _, c3, c4, c5] = self.c;
        let k = (self.m as f64 - 1.0).max(0.0);
        [[c1, k.sqrt() * c3], [k.sqrt() * c3, c5 + k * c4]]
    }
}

/// Positive definiteness of `Q_c` from its block structure: `c₂ > 0` (when
/// `m ≥ 2`), `c₅ > 0` (when `m ≥ 3`, where `c₅` is an eigenvalue on the
/// `d` region and on the trace-free part of the `c` region), and a positive
/// definite reduced `2 × 2` form. For `m = 1` only `c₁ > 0` matters.
pub fn validate_axial(spec: &AxialSpec) -> Validity {
    let [c1, c2, _, _, c5] = spec.c;
    if spec.m == 1 {
        return if c1 > 0.0 { Validity::Valid } else { Validity::Invalid(format!("c1 = {c1} must be positive")) };
    }
    if !(c2 > 0.0) {
        return Validity::Invalid(format!("c2 = {c2} must be positive"));
    }
    if spec.m >= 3 && !(c5 > 0.0) {
        return Validity::Invalid(format!("c5 = {c5} must be positive"));
    }
    let s = spec.reduced_form();
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if !(s[0][0] > 0.0 && det > 0.0) {
        return Validity::Invalid(format!("reduced form is not positive definite (c1 = {}, det = {det:e})", s[0][0]));
    }
    Validity::Valid
}

/// `det Q_c = c₂^{m-1} c₅^{(m-1)(m-2)/2 + m-2} det Σ̂`.
pub fn det_qc(spec: &AxialSpec) -> f64 {
    let m = spec.m as i32;
    let [c1, c2, _, _, c5] = spec.c;
    if m == 1 {
        return c1;
    }
    let s = spec.reduced_form();
    let det_reduced = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    c2.powi(m - 1) * c5.powi((m - 1) * (m - 2) / 2 + m - 2) * det_reduced
}

/// A centered Gaussian pair `(B⁻, B⁺)` of symmetric matrices given by the
/// covariance of the `2·m(m+1)/2` normalized entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGaussianSpec {
    pub m: usize,
    pub covariance: DMatrix<f64>,
}

impl PairGaussianSpec {
    pub fn new(m: usize, covariance: DMatrix<f64>) -> Result<Self> {
        let n = 2 * entry_count(m);
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::InvalidInput(format!("pair covariance must be {n}×{n}")));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 * covariance.amax().max(1.0) {
            return Err(Error::InvalidInput(format!("pair covariance is not symmetric (defect {asym:e})")));
        }
        Ok(PairGaussianSpec { m, covariance })
    }
}

/// Any of the laws whose `E|det|` the crate estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Iso(IsoSpec),
    Axial(AxialSpec),
    Pair(PairGaussianSpec),
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// Sample mean and standard error `s/√n` (two-pass).
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, std_error: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Estimate { mean, std_error: f64::NAN, n };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Estimate { mean, std_error: (var / n as f64).sqrt(), n }
    }
}

/// Symmetric square root of a PSD matrix, row-major. Eigenvalues above
/// `-PSD_TOLERANCE·‖cov‖` are clamped to zero; anything lower is an error.
pub fn symmetric_sqrt(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows();
    let eig = cov.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = PSD_TOLERANCE * scale;
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < -tol {
        return Err(Error::NotPsd { eigenvalue: lowest, tolerance: tol });
    }
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    let u = &eig.eigenvectors;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| u[(i, k)] * roots[k] * u[(j, k)]).sum();
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    Ok(out)
}

/// A law on one matrix or a pair, realized as a linear map from standard
/// normals to normalized entries.
#[derive(Debug, Clone)]
pub struct MatrixLaw {
    m: usize,
    paired: bool,
    dim_in: usize,
    dim_out: usize,
    factor: Vec<f64>,
}

impl MatrixLaw {
    pub fn from_spec(spec: &EnsembleSpec) -> Result<Self> {
        match spec {
            EnsembleSpec::Iso(s) => {
                s.validate()?;
                let (dim_in, factor) = s.factor()?;
                Ok(MatrixLaw { m: s.m, paired: false, dim_in, dim_out: entry_count(s.m), factor })
            }
            EnsembleSpec::Axial(s) => {
                if let Validity::Invalid(reason) = validate_axial(s) {
                    return Err(Error::InvalidInput(format!("axial ensemble: {reason}")));
                }
                let n = entry_count(s.m);
                Ok(MatrixLaw { m: s.m, paired: false, dim_in: n, dim_out: n, factor: symmetric_sqrt(&s.q_form())? })
            }
            EnsembleSpec::Pair(s) => Self::pair(s),
        }
    }

    /// One `m × m` matrix whose normalized entries have covariance `cov`.
    pub fn single(m: usize, cov: &DMatrix<f64>) -> Result<Self> {
        let n = entry_count(m);
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidInput(format!("covariance must be {n}×{n}")));
        }
        Ok(MatrixLaw { m, paired: false, dim_in: n, dim_out: n, factor: symmetric_sqrt(cov)? })
    }

    pub fn pair(spec: &PairGaussianSpec) -> Result<Self> {
        let n = 2 * entry_count(spec.m);
        Ok(MatrixLaw { m: spec.m, paired: true, dim_in: n, dim_out: n, factor: symmetric_sqrt(&spec.covariance)? })
    }

    /// Number of standard normals consumed per sample.
    pub fn input_dim(&self) -> usize {
        self.dim_in
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Normalized entries for the standard normal vector `z`.
    pub fn entries(&self, z: &[f64], out: &mut [f64]) {
        for (row, slot) in out.iter_mut().enumerate().take(self.dim_out) {
            let f = &self.factor[row * self.dim_in..(row + 1) * self.dim_in];
            *slot = f.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// `|det A|` for a single law, `|det B⁻ · det B⁺|` for a pair.
    pub fn abs_det(&self, z: &[f64], scratch: &mut Scratch) -> f64 {
        self.entries(z, &mut scratch.entries);
        abs_det_of_entries(&scratch.entries[..self.dim_out], self.m, self.paired, &mut scratch.matrix)
    }

    pub fn scratch(&self) -> Scratch {
        Scratch { entries: vec![0.0; self.dim_out], matrix: vec![0.0; self.m * self.m] }
    }
}

/// `|det|` of the matrix (or product over the pair) encoded by normalized entries.
pub fn abs_det_of_entries(entries: &[f64], m: usize, paired: bool, matrix: &mut [f64]) -> f64 {
    let n = entry_count(m);
    unpack(&entries[..n], m, matrix);
    let mut det = det_in_place(matrix, m);
    if paired {
        unpack(&entries[n..2 * n], m, matrix);
        det *= det_in_place(matrix, m);
    }
    det.abs()
}

/// Reusable buffers for [`MatrixLaw::abs_det`].
#[derive(Debug, Clone)]
pub struct Scratch {
    pub entries: Vec<f64>,
    matrix: Vec<f64>,
}

/// `n` rows of `dim` standard normals, generated in chunks of
/// [`CHUNK`](crate::rng::CHUNK) rows from substreams `stream_base + chunk`.
#[derive(Debug, Clone)]
pub struct NormalBlock {
    pub n: usize,
    pub dim: usize,
    data: Vec<f64>,
}

impl NormalBlock {
    pub fn generate(n: usize, dim: usize, seed: u64, stream_base: u64) -> Self {
        let mut data = vec![0.0; n * dim];
        data.par_chunks_mut((CHUNK * dim).max(1)).enumerate().for_each(|(c, chunk)| {
            let mut rng = substream(seed, stream_base + c as u64);
            for v in chunk.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
        });
        NormalBlock { n, dim, data }
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.dim..(s + 1) * self.dim]
    }

    /// Evaluate `f` on every row, in parallel, keeping row order. `init`
    /// builds per-worker scratch state.
    pub fn map_with<S, I, F>(&self, init: I, f: F) -> Vec<f64>
    where
        I: Fn() -> S + Sync,
        F: Fn(&mut S, &[f64]) -> f64 + Sync,
    {
        let mut out = vec![0.0; self.n];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, part)| {
            let mut state = init();
            for (k, slot) in part.iter_mut().enumerate() {
                *slot = f(&mut state, self.row(c * CHUNK + k));
            }
        });
        out
    }

    /// `|det|` of `law` on every row.
    pub fn abs_det(&self, law: &MatrixLaw) -> Vec<f64> {
        assert_eq!(law.input_dim(), self.dim, "normal block width must match the law");
        self.map_with(|| law.scratch(), |s, z| law.abs_det(z, s))
    }
}

/// Per-sample `|det|` values of `law` over `n` draws.
pub fn abs_det_samples(law: &MatrixLaw, n: usize, seed: u64, stream_base: u64) -> Vec<f64> {
    let dim = law.input_dim();
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, part)| {
        let mut rng = substream(seed, stream_base + c as u64);
        let mut z = vec![0.0; dim];
        let mut scratch = law.scratch();
        for slot in part.iter_mut() {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            *slot = law.abs_det(&z, &mut scratch);
        }
    });
    out
}

/// Monte Carlo mean of `|det|` with its standard error.
pub fn expect_abs_det(spec: &EnsembleSpec, n: usize, seed: u64) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let law = MatrixLaw::from_spec(spec)?;
    Ok(Estimate::from_samples(&abs_det_samples(&law, n, seed, crate::rng::streams::ENSEMBLE)))
}

/// Draw one matrix from the O(m)-invariant family.
pub fn sample_iso<R: Rng + ?Sized>(spec: &IsoSpec, rng: &mut R) -> Result<DMatrix<f64>> {
    let law = MatrixLaw::from_spec(&EnsembleSpec::Iso(*spec))?;
    let z: Vec<f64> = (0..law.input_dim()).map(|_| rng.sample(StandardNormal)).collect();
    let mut entries = vec![0.0; entry_count(spec.m)];
    law.entries(&z, &mut entries);
    let mut a = vec![0.0; spec.m * spec.m];
    unpack(&entries, spec.m, &mut a);
    Ok(DMatrix::from_row_slice(spec.m, spec.m, &a))
}

/// Draw one matrix from the axial family, in ambient coordinates.
pub fn sample_axial<R: Rng + ?Sized>(spec: &AxialSpec, rng: &mut R) -> Result<DMatrix<f64>> {
    let law = MatrixLaw::from_spec(&EnsembleSpec::Axial(spec.clone()))?;
    let z: Vec<f64> = (0..law.input_dim()).map(|_| rng.sample(StandardNormal)).collect();
    let mut entries = vec![0.0; entry_count(spec.m)];
    law.entries(&z, &mut entries);
    let mut a = vec![0.0; spec.m * spec.m];
    unpack(&entries, spec.m, &mut a);
    let local = DMatrix::from_row_slice(spec.m, spec.m, &a);
    Ok(Frame::adapted(&spec.axis).to_ambient(&local))
}

/// `|Ê_A|det| − Ê_B|det|| / ‖A − B‖^{1/2}` with common random numbers, where
/// `‖·‖` is the spectral norm of the covariance difference.
pub fn holder_probe(a: &PairGaussianSpec, b: &PairGaussianSpec, n: usize, seed: u64) -> Result<f64> {
    if a.m != b.m {
        return Err(Error::InvalidInput("holder probe needs specs of equal dimension".into()));
    }
    let diff = &a.covariance - &b.covariance;
    let gap = diff.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if gap == 0.0 {
        return Ok(0.0);
    }
    let la = MatrixLaw::pair(a)?;
    let lb = MatrixLaw::pair(b)?;
    let ea = Estimate::from_samples(&abs_det_samples(&la, n, seed, crate::rng::streams::PROBE));
    let eb = Estimate::from_samples(&abs_det_samples(&lb, n, seed, crate::rng::streams::PROBE));
    Ok((ea.mean - eb.mean).abs() / gap.sqrt())
}

/// `E|XY|` for a centered bivariate normal with variances `var_x`, `var_y`
/// and covariance `cov`: `(2 σ_x σ_y / π)(√(1-ρ²) + ρ arcsin ρ)`.
pub fn abs_product_moment(var_x: f64, var_y: f64, cov: f64) -> f64 {
    if var_x <= 0.0 || var_y <= 0.0 {
        return 0.0;
    }
    let sx = var_x.sqrt();
    let sy = var_y.sqrt();
    let rho = (cov / (sx * sy)).clamp(-1.0, 1.0);
    2.0 * sx * sy / std::f64::consts::PI * ((1.0 - rho * rho).sqrt() + rho * rho.asin())
}

//! Bipartite structure on operators and vectors of `A ⊗ B`.
//!
//! Index convention, used everywhere in the crate: the basis vector
//! `|i⟩_A |j⟩_B` has flat index `i·d_B + j`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

pub type CVector = DVector<Complex64>;

/// Default cap on the matrix dimension of tensor powers (e.g. 3⊗3 at two copies,
/// 2⊗2 at three copies).
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Default relative threshold separating support from eigensolver noise.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Schmidt coefficients at or below this are treated as zero.
pub const SCHMIDT_TOL: f64 = 1e-10;

/// Square operator on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

impl BipartiteOperator {
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Result<Self> {
        linalg::check_square(&matrix)?;
        if dim_a == 0 || dim_b == 0 || matrix.nrows() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "operator of size {} does not live on {dim_a}⊗{dim_b}",
                matrix.nrows()
            )));
        }
        Ok(Self { dim_a, dim_b, matrix })
    }

    pub fn identity(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b, matrix: linalg::identity(dim_a * dim_b) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector_onto(dim_a: usize, dim_b: usize, psi: &CVector) -> Result<Self> {
        Self::new(dim_a, dim_b, psi * psi.adjoint())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: self.matrix.scale(factor), ..*self }
    }

    pub fn partial_transpose(&self) -> Self {
        partial_transpose(self)
    }

    /// Tensor product regrouped onto `(A₁A₂) ⊗ (B₁B₂)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let dims = [(self.dim_a, self.dim_b), (other.dim_a, other.dim_b)];
        let perm = regroup_permutation(&dims);
        let raw = linalg::kron(&self.matrix, &other.matrix);
        Self { dim_a: self.dim_a * other.dim_a, dim_b: self.dim_b * other.dim_b, matrix: permute_operator(&raw, &perm) }
    }

    /// Checks the density-operator invariants: Hermitian, PSD to `tol` and unit trace to 1e-10.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        linalg::check_hermitian(&self.matrix)?;
        let lmin = linalg::min_eigenvalue(&self.matrix)?;
        if lmin < -tol * linalg::scale_factor(&self.matrix) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: lmin });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }
}

/// `((i,j),(k,l)) ↦ ((i,l),(k,j))`: transposes the B factor only.
pub fn partial_transpose(e: &BipartiteOperator) -> BipartiteOperator {
    let (da, db) = (e.dim_a, e.dim_b);
    let m = &e.matrix;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out[(i * db + j, k * db + l)] = m[(i * db + l, k * db + j)];
                }
            }
        }
    }
    BipartiteOperator { dim_a: da, dim_b: db, matrix: out }
}

/// Partial transpose of a plain matrix on `dim_a ⊗ dim_b`.
pub(crate) fn partial_transpose_matrix(m: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
    let op = BipartiteOperator { dim_a, dim_b, matrix: m.clone() };
    partial_transpose(&op).matrix
}

/// `|ψ⟩ = Σᵢ λᵢ |uᵢ⟩|vᵢ⟩` with `λ₁ ≥ λ₂ ≥ … > 0`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Descending; only coefficients above [`SCHMIDT_TOL`] are kept.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Largest coefficient λ₁.
    pub fn largest(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CVector {
        let da = self.left_vectors.first().map_or(0, |v| v.len());
        let db = self.right_vectors.first().map_or(0, |v| v.len());
        let mut psi = CVector::zeros(da * db);
        for ((lambda, u), v) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors) {
            for i in 0..da {
                for j in 0..db {
                    psi[i * db + j] += u[i] * v[j] * *lambda;
                }
            }
        }
        psi
    }
}

pub fn schmidt_decompose(dim_a: usize, dim_b: usize, psi: &CVector) -> Result<SchmidtForm> {
    if psi.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!("vector of length {} on {dim_a}⊗{dim_b}", psi.len())));
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidState("zero vector has no Schmidt form".into()));
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state is not normalized (norm {norm})")));
    }
    let coeffs = CMatrix::from_fn(dim_a, dim_b, |i, j| psi[i * dim_b + j]);
    let svd = coeffs.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut form = SchmidtForm { coefficients: vec![], left_vectors: vec![], right_vectors: vec![] };
    for k in order {
        let lambda = svd.singular_values[k];
        if lambda <= SCHMIDT_TOL {
            continue;
        }
        form.coefficients.push(lambda);
        form.left_vectors.push(u.column(k).into_owned());
        form.right_vectors.push(v_t.row(k).transpose().into_owned());
    }
    Ok(form)
}

/// Subspace of `A ⊗ B` given by an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim_a: usize,
    dim_b: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Wraps a basis that must already be orthonormal to 1e-10.
    pub fn from_orthonormal(dim_a: usize, dim_b: usize, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "basis vectors of length {} on {dim_a}⊗{dim_b}",
                basis.nrows()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let dev = linalg::max_abs(&(gram - linalg::identity(basis.ncols())));
        if dev > 1e-10 {
            return Err(Error::InvalidState(format!("basis is not orthonormal (deviation {dev:.3e})")));
        }
        Ok(Self { dim_a, dim_b, basis })
    }

    /// Orthonormal basis of the span of arbitrary vectors. Directions whose
    /// Gram weight is below `tol` times the largest are dropped.
    pub fn span(dim_a: usize, dim_b: usize, vectors: &[CVector], tol: f64) -> Result<Self> {
        let d = dim_a * dim_b;
        let mut gram = CMatrix::zeros(d, d);
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch(format!("vector of length {} on {dim_a}⊗{dim_b}", v.len())));
            }
            gram += v * v.adjoint();
        }
        let eig = linalg::jacobi(&gram)?;
        let cutoff = tol * eig.max().max(0.0);
        let basis = if eig.max() <= 0.0 { CMatrix::zeros(d, 0) } else { eig.select(|x| x > cutoff) };
        Ok(Self { dim_a, dim_b, basis })
    }

    pub fn full(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b, basis: linalg::identity(dim_a * dim_b) }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Dimension of the ambient space `A ⊗ B`.
    pub fn ambient_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.basis.column(k).into_owned()
    }

    pub fn projector(&self) -> BipartiteOperator {
        BipartiteOperator { dim_a: self.dim_a, dim_b: self.dim_b, matrix: &self.basis * self.basis.adjoint() }
    }

    pub fn complement(&self) -> Result<Self> {
        let d = self.ambient_dim();
        let q = linalg::identity(d) - &self.basis * self.basis.adjoint();
        let eig = linalg::jacobi(&q)?;
        Ok(Self { dim_a: self.dim_a, dim_b: self.dim_b, basis: eig.select(|x| x > 0.5) })
    }

    /// Largest distance of a unit vector of `other` from `self`.
    pub fn distance_from(&self, other: &Subspace) -> f64 {
        let p = &self.basis * self.basis.adjoint();
        let resid = &other.basis - &p * &other.basis;
        (0..resid.ncols()).map(|k| resid.column(k).norm()).fold(0.0, f64::max)
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.distance_from(other) <= tol
    }

    /// `S₁ ⊗ S₂` regrouped onto `(A₁A₂) ⊗ (B₁B₂)`.
    pub fn tensor(&self, other: &Subspace) -> Subspace {
        let dims = [(self.dim_a, self.dim_b), (other.dim_a, other.dim_b)];
        let perm = regroup_permutation(&dims);
        let raw = linalg::kron(&self.basis, &other.basis);
        let mut basis = CMatrix::zeros(raw.nrows(), raw.ncols());
        for (old, &new) in perm.iter().enumerate() {
            basis.set_row(new, &raw.row(old));
        }
        Subspace { dim_a: self.dim_a * other.dim_a, dim_b: self.dim_b * other.dim_b, basis }
    }

    /// `S^{⊗k}` regrouped onto `A^{⊗k} ⊗ B^{⊗k}`.
    pub fn tensor_power(&self, k: usize, max_dim: usize) -> Result<Subspace> {
        if k == 0 {
            return Err(Error::OutOfRange("copy count must be at least 1".into()));
        }
        check_power_cap(self.ambient_dim(), k, max_dim)?;
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self);
        }
        Ok(out)
    }
}

/// Subspace spanned by eigenvectors with eigenvalue above `tol · λ_max(ρ)`.
pub fn support_projector(rho: &BipartiteOperator, tol: f64) -> Result<Subspace> {
    linalg::check_hermitian(rho.matrix())?;
    let eig = linalg::jacobi(rho.matrix())?;
    let lmax = eig.max();
    if lmax <= 1e-14 {
        return Err(Error::EmptySupport);
    }
    if eig.min() < -1e-8 * lmax.max(1.0) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: eig.min() });
    }
    let basis = eig.select(|x| x > tol * lmax);
    Ok(Subspace { dim_a: rho.dim_a, dim_b: rho.dim_b, basis })
}

fn ppt_margin(e: &BipartiteOperator, tol: f64) -> Result<(f64, f64)> {
    linalg::check_hermitian(e.matrix())?;
    let scale = linalg::scale_factor(e.matrix());
    let lmin = linalg::min_eigenvalue(e.matrix())?;
    if lmin < -tol * scale {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: lmin });
    }
    let pt_min = linalg::min_eigenvalue(partial_transpose(e).matrix())?;
    Ok((pt_min, scale))
}

/// `λ_min(E^{T_B}) ≥ -tol · scale`. Rejects non-PSD input.
pub fn is_ppt(e: &BipartiteOperator, tol: f64) -> Result<bool> {
    let (pt_min, scale) = ppt_margin(e, tol)?;
    Ok(pt_min >= -tol * scale)
}

/// `λ_min(E^{T_B}) > tol · scale`. Rejects non-PSD input.
pub fn is_ppt_definite(e: &BipartiteOperator, tol: f64) -> Result<bool> {
    let (pt_min, scale) = ppt_margin(e, tol)?;
    Ok(pt_min > tol * scale)
}

fn check_power_cap(dim: usize, k: usize, max_dim: usize) -> Result<()> {
    let mut total: usize = 1;
    for _ in 0..k {
        total = total.saturating_mul(dim);
        if total > max_dim {
            return Err(Error::SizeCap { dim: total, cap: max_dim });
        }
    }
    Ok(())
}

/// `E^{⊗k}` on `(A₁…A_k) ⊗ (B₁…B_k)`.
pub fn tensor_power_reorder(e: &BipartiteOperator, k: usize, max_dim: usize) -> Result<BipartiteOperator> {
    if k == 0 {
        return Err(Error::OutOfRange("copy count must be at least 1".into()));
    }
    check_power_cap(e.dim(), k, max_dim)?;
    let mut out = e.clone();
    for _ in 1..k {
        out = out.tensor(e);
    }
    Ok(out)
}

/// Permutation taking the flat index of `(A₁B₁)(A₂B₂)…` to that of
/// `(A₁A₂…)(B₁B₂…)`, as `perm[old] = new`.
pub fn regroup_permutation(dims: &[(usize, usize)]) -> Vec<usize> {
    let total: usize = dims.iter().map(|(a, b)| a * b).product();
    let db_total: usize = dims.iter().map(|(_, b)| b).product();
    let mut perm = vec![0; total];
    let mut digits_a = vec![0usize; dims.len()];
    let mut digits_b = vec![0usize; dims.len()];
    for (old, slot) in perm.iter_mut().enumerate() {
        let mut rest = old;
        for (s, &(da, db)) in dims.iter().enumerate().rev() {
            digits_b[s] = rest % db;
            rest /= db;
            digits_a[s] = rest % da;
            rest /= da;
        }
        let mut ia = 0;
        let mut ib = 0;
        for (s, &(da, db)) in dims.iter().enumerate() {
            ia = ia * da + digits_a[s];
            ib = ib * db + digits_b[s];
        }
        *slot = ia * db_total + ib;
    }
    perm
}

fn permute_operator(m: &CMatrix, perm: &[usize]) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

/// Computational basis vector `|i⟩_A |j⟩_B`.
pub fn basis_ket(dim_a: usize, dim_b: usize, i: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(dim_a * dim_b);
    v[i * dim_b + j] = linalg::ONE;
    v
}

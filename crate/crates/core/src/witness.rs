//! PPT-definite witnesses for strong PPT-unextendibility.
//!
//! For a subspace `S` with projector `P` the witness value is
//!
//! ```text
//!     T(S) = max t   s.t.   0 ⪯ R ⪯ P,   R^{T_B} ⪰ t·𝟙.
//! ```
//!
//! `T(S) > 0` holds exactly when some PPT-definite operator is supported on
//! `S`: the optimal `R` is one, and conversely any PPT-definite `σ` on `S`
//! scaled so that `σ ⪯ P` is feasible with `t = λ_min(σ^{T_B}) > 0`. A positive
//! value therefore certifies that no PPT operator is supported on the
//! orthogonal complement of `S^{⊗k}` for any `k` (the value is
//! supermultiplicative under tensor products). `T(S) = 0` is inconclusive.
//!
//! The program is solved in the coordinates `R = V X V†`, `V` an orthonormal
//! basis of `S`, which keeps the feasible set full-dimensional.

use crate::bipartite::{self, BipartiteOperator, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sdp::{self, Coefficient, LmiBlock, LmiProblem, SolveStatus, SolverOptions};

/// Values above this count as strictly positive witnesses.
pub const WITNESS_TOL: f64 = 1e-6;

/// Extendibility margins at or above `-EXTENDIBLE_TOL` count as feasible.
pub const EXTENDIBLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmaxStatus {
    /// Interior-point solve converged; `value` is certified by the certificate
    /// and `upper_bound` comes from the dual multipliers.
    Optimal,
    /// Solver failed; `value` is the spectral lower bound with `R = P`.
    LowerBoundOnly,
}

#[derive(Debug, Clone)]
pub struct TmaxResult {
    /// Largest `t` found, equal to `λ_min(R^{T_B})` of the certificate (≥ 0).
    pub value: f64,
    /// Dual bound on `T(S)`; `trace(P)/dim` when no solve succeeded.
    pub upper_bound: f64,
    /// Feasible `R` with `0 ⪯ R ⪯ P`.
    pub certificate: BipartiteOperator,
    pub iterations: usize,
    /// `upper_bound - value`.
    pub residual: f64,
    pub status: TmaxStatus,
}

/// Independent re-check of a certificate.
#[derive(Debug, Clone, Copy)]
pub struct CertificateCheck {
    /// `λ_min(R)`.
    pub lower_margin: f64,
    /// `λ_min(P - R)`.
    pub upper_margin: f64,
    /// `λ_min(R^{T_B}) - value`.
    pub pt_margin: f64,
}

impl CertificateCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower_margin >= -tol && self.upper_margin >= -tol && self.pt_margin >= -tol
    }
}

impl TmaxResult {
    pub fn check(&self, s: &Subspace) -> Result<CertificateCheck> {
        let r = self.certificate.matrix();
        let p = s.projector();
        Ok(CertificateCheck {
            lower_margin: linalg::min_eigenvalue(&linalg::hermitian_part(r))?,
            upper_margin: linalg::min_eigenvalue(&linalg::hermitian_part(&(p.matrix() - r)))?,
            pt_margin: linalg::min_eigenvalue(&linalg::hermitian_part(self.certificate.partial_transpose().matrix()))?
                - self.value,
        })
    }
}

/// `max(0, λ_min(P^{T_B}))`, the value of the feasible point `R = P`.
pub fn tmax_lower_bound(s: &Subspace) -> Result<f64> {
    let pt = s.projector().partial_transpose();
    Ok(linalg::jacobi(pt.matrix())?.min().max(0.0))
}

pub fn tmax(s: &Subspace) -> Result<TmaxResult> {
    tmax_with(s, &SolverOptions::default())
}

pub fn tmax_with(s: &Subspace, options: &SolverOptions) -> Result<TmaxResult> {
    let r = s.dim();
    if r == 0 {
        return Err(Error::OutOfRange("witness value needs a non-zero subspace".into()));
    }
    let (da, db) = (s.dim_a(), s.dim_b());
    let d = da * db;
    let v = s.basis();
    let basis = sdp::hermitian_basis(r);
    let t_var = basis.len();

    let mut lower = LmiBlock::new(CMatrix::zeros(r, r));
    let mut upper = LmiBlock::new(linalg::identity(r));
    let mut pt_block = LmiBlock::new(CMatrix::zeros(d, d));
    for (k, e) in basis.iter().enumerate() {
        lower.push(k, Coefficient::Sparse(e.clone()));
        upper.push(k, Coefficient::Sparse(e.iter().map(|&(a, b, z)| (a, b, -z)).collect()));
        let mapped = bipartite::partial_transpose_matrix(&sdp::congruence(v, e), da, db);
        pt_block.push(k, Coefficient::Dense(mapped));
    }
    pt_block.push(t_var, Coefficient::Sparse((0..d).map(|i| (i, i, linalg::c(-1.0, 0.0))).collect()));
    let mut objective = vec![0.0; t_var + 1];
    objective[t_var] = 1.0;
    let problem = LmiProblem { objective, blocks: vec![lower, upper, pt_block] };

    let projector = s.projector();
    let fallback_value = tmax_lower_bound(s)?;
    let trace_bound = r as f64 / d as f64;

    let solved = sdp::solve(&problem, options)?;
    if solved.status == SolveStatus::Failed {
        return Ok(TmaxResult {
            value: fallback_value,
            upper_bound: trace_bound,
            certificate: projector,
            iterations: solved.iterations,
            residual: trace_bound - fallback_value,
            status: TmaxStatus::LowerBoundOnly,
        });
    }

    // Project X onto [0, 1] in spectrum so the certificate is exactly feasible.
    let x = problem.blocks[0].evaluate(&solved.y);
    let clipped = linalg::jacobi(&x)?.apply(|lambda| lambda.clamp(0.0, 1.0));
    let r_mat = linalg::hermitian_part(&(v * clipped * v.adjoint()));
    let candidate = BipartiteOperator::new(da, db, r_mat)?;
    let cert_value = linalg::jacobi(candidate.partial_transpose().matrix())?.min();

    let (value, certificate) = if cert_value >= fallback_value && cert_value > 0.0 {
        (cert_value, candidate)
    } else if fallback_value > 0.0 {
        (fallback_value, projector)
    } else {
        // R = 0 attains t = 0
        (0.0, BipartiteOperator::new(da, db, CMatrix::zeros(d, d))?)
    };
    let upper_bound = solved.upper_bound.max(value).min(trace_bound.max(value));
    Ok(TmaxResult {
        value,
        upper_bound,
        certificate,
        iterations: solved.iterations,
        residual: upper_bound - value,
        status: TmaxStatus::Optimal,
    })
}

#[derive(Debug, Clone)]
pub enum Witness {
    /// A PPT-definite operator supported on `S` exists; `S` is strongly
    /// PPT-unextendible.
    Witnessed(TmaxResult),
    /// No witness found. This does not imply that `S` is extendible.
    Inconclusive(TmaxResult),
}

impl Witness {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, Witness::Witnessed(_))
    }

    pub fn result(&self) -> &TmaxResult {
        match self {
            Witness::Witnessed(r) | Witness::Inconclusive(r) => r,
        }
    }
}

pub fn strong_unextendibility_witness(s: &Subspace) -> Result<Witness> {
    let result = tmax(s)?;
    Ok(if result.value > WITNESS_TOL { Witness::Witnessed(result) } else { Witness::Inconclusive(result) })
}

#[derive(Debug, Clone)]
pub enum Extendibility {
    /// A PPT state supported on `S^⊥` (PPT up to `EXTENDIBLE_TOL`).
    Extendible { certificate: BipartiteOperator, margin: f64 },
    /// No PPT state on `S^⊥`. `margin` is the best achievable
    /// `λ_min(σ^{T_B})` over states on `S^⊥` (negative), or `None` when the
    /// complement is zero.
    Unextendible { margin: Option<f64> },
}

impl Extendibility {
    pub fn is_extendible(&self) -> bool {
        matches!(self, Extendibility::Extendible { .. })
    }
}

/// Decides whether some PPT state is supported on the orthogonal complement
/// of `S`, by maximizing `λ_min(σ^{T_B})` over states `σ` on `S^⊥`.
pub fn is_ppt_extendible_single(s: &Subspace) -> Result<Extendibility> {
    let comp = s.complement()?;
    let r = comp.dim();
    if r == 0 {
        return Ok(Extendibility::Unextendible { margin: None });
    }
    let (da, db) = (s.dim_a(), s.dim_b());
    let d = da * db;
    let w = comp.basis();

    // traceless Hermitian basis: off-diagonal elements plus generalized
    // Gell-Mann diagonals
    let mut traceless: Vec<Vec<_>> = sdp::hermitian_basis(r).into_iter().skip(r).collect();
    for l in 1..r {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut e: Vec<_> = (0..l).map(|j| (j, j, linalg::c(norm, 0.0))).collect();
        e.push((l, l, linalg::c(-(l as f64) * norm, 0.0)));
        traceless.push(e);
    }
    let lam_var = traceless.len();

    let mut psd = LmiBlock::new(linalg::identity(r).scale(1.0 / r as f64));
    let centre = bipartite::partial_transpose_matrix(&(w * w.adjoint()).scale(1.0 / r as f64), da, db);
    let mut pt_block = LmiBlock::new(centre);
    for (k, e) in traceless.iter().enumerate() {
        psd.push(k, Coefficient::Sparse(e.clone()));
        pt_block.push(k, Coefficient::Dense(bipartite::partial_transpose_matrix(&sdp::congruence(w, e), da, db)));
    }
    pt_block.push(lam_var, Coefficient::Sparse((0..d).map(|i| (i, i, linalg::c(-1.0, 0.0))).collect()));
    let mut objective = vec![0.0; lam_var + 1];
    objective[lam_var] = 1.0;
    let problem = LmiProblem { objective, blocks: vec![psd, pt_block] };
    let solved = sdp::solve(&problem, &SolverOptions::default())?;
    if solved.status == SolveStatus::Failed {
        return Err(Error::Solver(format!("extendibility program did not converge (gap {:.2e})", solved.relative_gap)));
    }

    let y = psd_state(&problem.blocks[0], &solved.y)?;
    let sigma = BipartiteOperator::new(da, db, linalg::hermitian_part(&(w * y * w.adjoint())))?;
    let margin = linalg::jacobi(sigma.partial_transpose().matrix())?.min();
    Ok(if margin >= -EXTENDIBLE_TOL {
        Extendibility::Extendible { certificate: sigma, margin }
    } else {
        Extendibility::Unextendible { margin: Some(solved.objective.max(margin)) }
    })
}

/// The state block evaluated at `y`, clipped to PSD and renormalized.
fn psd_state(block: &LmiBlock, y: &[f64]) -> Result<CMatrix> {
    let raw = block.evaluate(y);
    let clipped = linalg::jacobi(&raw)?.apply(|x| x.max(0.0));
    let tr = linalg::trace_re(&clipped);
    Ok(clipped.scale(1.0 / tr))
}

#[derive(Debug, Clone, Copy)]
pub struct SupermultiplicativityGap {
    pub first: f64,
    pub second: f64,
    pub product: f64,
    /// `T(S₁⊗S₂) - T(S₁)·T(S₂)`.
    pub gap: f64,
}

pub fn supermultiplicativity_check(s1: &Subspace, s2: &Subspace, max_dim: usize) -> Result<SupermultiplicativityGap> {
    let dim = s1.ambient_dim() * s2.ambient_dim();
    if dim > max_dim {
        return Err(Error::SizeCap { dim, cap: max_dim });
    }
    let first = tmax(s1)?.value;
    let second = tmax(s2)?.value;
    let product = tmax(&s1.tensor(s2))?.value;
    Ok(SupermultiplicativityGap { first, second, product, gap: product - first * second })
}

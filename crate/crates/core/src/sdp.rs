//! Small dense semidefinite programs in linear-matrix-inequality form:
//!
//! ```text
//!     maximize   cᵀy
//!     subject to F_k(y) = F_k0 + Σᵢ yᵢ F_ki ⪰ 0      for every block k
//! ```
//!
//! with Hermitian blocks `F_ki` and real variables `y`. The solver is an
//! infeasible-start primal-dual interior-point method using the HKM search
//! direction and a Mehrotra predictor-corrector. The Lagrange multipliers
//! `X_k ⪰ 0` of the blocks form a feasible point of the dual program
//!
//! ```text
//!     minimize   Σ_k tr(F_k0 X_k)
//!     subject to Σ_k tr(F_ki X_k) = -cᵢ,   X_k ⪰ 0,
//! ```
//!
//! whose value bounds the primal optimum from above.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// A coefficient matrix `F_ki`.
#[derive(Debug, Clone)]
pub enum Coefficient {
    /// `(row, col, value)` triples; entries absent from the list are zero.
    Sparse(Vec<(usize, usize, Complex64)>),
    Dense(CMatrix),
}

impl Coefficient {
    fn add_scaled_to(&self, target: &mut CMatrix, s: f64) {
        match self {
            Coefficient::Sparse(entries) => {
                for &(a, b, v) in entries {
                    target[(a, b)] += v * s;
                }
            }
            Coefficient::Dense(m) => {
                *target += m.scale(s);
            }
        }
    }

    /// `Re tr(F W)`.
    fn trace_with(&self, w: &CMatrix) -> f64 {
        match self {
            Coefficient::Sparse(entries) => entries.iter().map(|&(a, b, v)| (v * w[(b, a)]).re).sum(),
            Coefficient::Dense(m) => linalg::trace_product_re(m, w),
        }
    }

    /// `X F Y`.
    fn sandwich(&self, x: &CMatrix, y: &CMatrix) -> CMatrix {
        match self {
            Coefficient::Sparse(entries) => {
                let n = x.nrows();
                let mut out = CMatrix::zeros(n, n);
                for &(a, b, v) in entries {
                    for i in 0..n {
                        let xv = x[(i, a)] * v;
                        if xv == ZERO {
                            continue;
                        }
                        for j in 0..n {
                            out[(i, j)] += xv * y[(b, j)];
                        }
                    }
                }
                out
            }
            Coefficient::Dense(m) => x * (m * y),
        }
    }

    fn norm_sqr(&self) -> f64 {
        match self {
            Coefficient::Sparse(entries) => {
                // entries may repeat a position; accumulate first
                let mut acc: Vec<((usize, usize), Complex64)> = Vec::new();
                for &(a, b, v) in entries {
                    match acc.iter_mut().find(|(pos, _)| *pos == (a, b)) {
                        Some((_, s)) => *s += v,
                        None => acc.push(((a, b), v)),
                    }
                }
                acc.iter().map(|(_, v)| v.norm_sqr()).sum()
            }
            Coefficient::Dense(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmiBlock {
    /// `F_k0`.
    pub constant: CMatrix,
    /// `(variable index, F_ki)`; variables not listed have a zero coefficient.
    pub terms: Vec<(usize, Coefficient)>,
}

impl LmiBlock {
    pub fn new(constant: CMatrix) -> Self {
        Self { constant, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn push(&mut self, var: usize, coeff: Coefficient) {
        self.terms.push((var, coeff));
    }

    /// `F_k(y)`.
    pub fn evaluate(&self, y: &[f64]) -> CMatrix {
        let mut m = self.constant.clone();
        for (var, coeff) in &self.terms {
            coeff.add_scaled_to(&mut m, y[*var]);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

impl LmiProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target for relative gap and both relative infeasibilities.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Refuse problems with more scalar variables than this.
    pub max_variables: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_iterations: 120, max_variables: 2500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// All stopping criteria met at the requested tolerance.
    Optimal,
    /// Stopped early (stall or iteration cap) with relative gap and
    /// infeasibilities below 1e-6.
    NearOptimal,
    Failed,
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub y: Vec<f64>,
    /// `cᵀy` at the returned point.
    pub objective: f64,
    /// Value of the dual program at the returned multipliers; an upper bound on
    /// the optimum up to the reported dual infeasibility.
    pub upper_bound: f64,
    pub multipliers: Vec<CMatrix>,
    pub iterations: usize,
    pub relative_gap: f64,
    /// Relative violation of `F(y) ⪰ 0` carried by the infeasible-start iterate.
    pub primal_infeasibility: f64,
    /// Relative violation of the multiplier equations.
    pub dual_infeasibility: f64,
    pub status: SolveStatus,
}

// Internally the problem is treated in the standard pair
//   (D) min aᵀy  s.t.  Z = Σ yᵢAᵢ − C ⪰ 0,    (P) max tr(CX)  s.t.  A(X) = a, X ⪰ 0
// with Aᵢ = Fᵢ, C = −F₀, a = −c, so that Z = F(y).
struct Workspace<'a> {
    problem: &'a LmiProblem,
    a: Vec<f64>,
    c_blocks: Vec<CMatrix>,
    total_dim: usize,
}

impl<'a> Workspace<'a> {
    fn adjoint(&self, y: &[f64]) -> Vec<CMatrix> {
        self.problem
            .blocks
            .iter()
            .map(|b| {
                let mut m = CMatrix::zeros(b.dim(), b.dim());
                for (var, coeff) in &b.terms {
                    coeff.add_scaled_to(&mut m, y[*var]);
                }
                m
            })
            .collect()
    }

    fn op(&self, w: &[CMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.a.len()];
        for (b, wk) in self.problem.blocks.iter().zip(w) {
            for (var, coeff) in &b.terms {
                out[*var] += coeff.trace_with(wk);
            }
        }
        out
    }

    fn schur(&self, x: &[CMatrix], zinv: &[CMatrix]) -> DMatrix<f64> {
        let p = self.a.len();
        let mut o = DMatrix::<f64>::zeros(p, p);
        for (k, block) in self.problem.blocks.iter().enumerate() {
            for (j, (vj, cj)) in block.terms.iter().enumerate() {
                let g = cj.sandwich(&x[k], &zinv[k]);
                for (vi, ci) in &block.terms[..=j] {
                    let val = ci.trace_with(&g);
                    o[(*vi, *vj)] += val;
                    if vi != vj {
                        o[(*vj, *vi)] += val;
                    }
                }
            }
        }
        o
    }
}

fn herm(m: &CMatrix) -> CMatrix {
    linalg::hermitian_part(m)
}

fn inverse_hpd(m: &CMatrix) -> Option<CMatrix> {
    Cholesky::new(herm(m)).map(|ch| herm(&ch.inverse()))
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite if `dX ⪰ 0`).
fn max_step(x: &CMatrix, dx: &CMatrix) -> Option<f64> {
    let ch = Cholesky::new(herm(x))?;
    let l = ch.l();
    let t = l.solve_lower_triangular(dx)?;
    let m = l.solve_lower_triangular(&t.adjoint())?.adjoint();
    let lmin = linalg::jacobi(&herm(&m)).ok()?.min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn solve_schur(o: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let p = o.nrows();
    let diag_max = (0..p).map(|i| o[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut m = o.clone();
        for i in 0..p {
            m[(i, i)] += shift;
        }
        if let Some(ch) = Cholesky::new(m) {
            let sol = ch.solve(&DVector::from_column_slice(rhs));
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol.iter().copied().collect());
            }
        }
        shift = if shift == 0.0 { 1e-14 * diag_max } else { shift * 100.0 };
    }
    None
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn blocks_norm(m: &[CMatrix]) -> f64 {
    m.iter().map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt()
}

fn blocks_inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::trace_product_re(x, y)).sum()
}

struct Direction {
    dy: Vec<f64>,
    dx: Vec<CMatrix>,
    dz: Vec<CMatrix>,
}

pub fn solve(problem: &LmiProblem, options: &SolverOptions) -> Result<LmiSolution> {
    let p = problem.num_vars();
    if p > options.max_variables {
        return Err(Error::SizeCap { dim: p, cap: options.max_variables });
    }
    for (k, b) in problem.blocks.iter().enumerate() {
        linalg::check_square(&b.constant)?;
        if let Some((var, _)) = b.terms.iter().find(|(v, _)| *v >= p) {
            return Err(Error::DimensionMismatch(format!("block {k} references variable {var} of {p}")));
        }
    }
    let ws = Workspace {
        problem,
        a: problem.objective.iter().map(|c| -c).collect(),
        c_blocks: problem.blocks.iter().map(|b| -&b.constant).collect(),
        total_dim: problem.blocks.iter().map(|b| b.dim()).sum(),
    };
    let n = ws.total_dim.max(1) as f64;
    let norm_a = norm(&ws.a);
    let norm_c = blocks_norm(&ws.c_blocks);

    // column norms of the constraint operator
    let mut coeff_norm = vec![0.0; p];
    for b in &problem.blocks {
        for (var, coeff) in &b.terms {
            coeff_norm[*var] += coeff.norm_sqr();
        }
    }
    let coeff_norm: Vec<f64> = coeff_norm.into_iter().map(f64::sqrt).collect();
    let xi = (0..p).map(|i| (1.0 + ws.a[i].abs()) / (1.0 + coeff_norm[i])).fold(10f64.max(n.sqrt()), f64::max);
    let eta = coeff_norm.iter().copied().fold(10f64.max(n.sqrt()).max(norm_c), f64::max);

    let mut x: Vec<CMatrix> = problem.blocks.iter().map(|b| CMatrix::identity(b.dim(), b.dim()).scale(xi)).collect();
    let mut z: Vec<CMatrix> = problem.blocks.iter().map(|b| CMatrix::identity(b.dim(), b.dim()).scale(eta)).collect();
    let mut y = vec![0.0; p];

    let tol = options.tolerance;
    let mut best_mu = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;
    let mut status = SolveStatus::Failed;

    let measure = |x: &[CMatrix], y: &[f64], z: &[CMatrix]| {
        let aty = ws.adjoint(y);
        let fd: Vec<CMatrix> = aty.iter().zip(&ws.c_blocks).zip(z).map(|((at, c), zk)| at - c - zk).collect();
        let ax = ws.op(x);
        let rp: Vec<f64> = ws.a.iter().zip(&ax).map(|(a, v)| a - v).collect();
        let pobj = blocks_inner(&ws.c_blocks, x);
        let dobj: f64 = ws.a.iter().zip(y).map(|(a, v)| a * v).sum();
        let mu = blocks_inner(x, z) / n;
        let relgap = (dobj - pobj).abs().max(mu * n) / (1.0 + pobj.abs() + dobj.abs());
        let pinf = norm(&rp) / (1.0 + norm_a);
        let dinf = blocks_norm(&fd) / (1.0 + norm_c);
        (fd, pobj, dobj, mu, relgap, pinf, dinf)
    };

    while iterations < options.max_iterations {
        let (fd, _, _, mu, relgap, pinf, dinf) = measure(&x, &y, &z);
        if relgap < tol && pinf < tol && dinf < tol {
            status = SolveStatus::Optimal;
            break;
        }
        if mu < best_mu * 0.9 {
            best_mu = mu;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 5 {
                break;
            }
        }

        let Some(zinv) = z.iter().map(inverse_hpd).collect::<Option<Vec<_>>>() else {
            break;
        };
        let o = ws.schur(&x, &zinv);
        let xfz: Vec<CMatrix> = x.iter().zip(&fd).zip(&zinv).map(|((xk, f), zi)| xk * f * zi).collect();
        let base = ws.op(&xfz);

        let direction = |sigma_mu: f64, second_order: Option<&[CMatrix]>| -> Option<Direction> {
            let az = ws.op(&zinv);
            let corr = second_order.map(|s| ws.op(s));
            let rhs: Vec<f64> =
                (0..p).map(|i| sigma_mu * az[i] - ws.a[i] - base[i] - corr.as_ref().map_or(0.0, |c| c[i])).collect();
            let dy = solve_schur(&o, &rhs)?;
            let atdy = ws.adjoint(&dy);
            let dz: Vec<CMatrix> = atdy.iter().zip(&fd).map(|(a, f)| a + f).collect();
            let dx: Vec<CMatrix> = (0..x.len())
                .map(|k| {
                    let mut d = zinv[k].scale(sigma_mu) - &x[k] - &x[k] * &dz[k] * &zinv[k];
                    if let Some(s) = second_order {
                        d -= &s[k];
                    }
                    herm(&d)
                })
                .collect();
            Some(Direction { dy, dx, dz })
        };
        let steps = |d: &Direction, tau: f64| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..x.len() {
                ap = ap.min(max_step(&x[k], &d.dx[k])?);
                ad = ad.min(max_step(&z[k], &d.dz[k])?);
            }
            Some(((tau * ap).min(1.0), (tau * ad).min(1.0)))
        };

        let Some(pred) = direction(0.0, None) else { break };
        let Some((ap, ad)) = steps(&pred, 1.0) else { break };
        let mu_aff = (0..x.len())
            .map(|k| linalg::trace_product_re(&(&x[k] + pred.dx[k].scale(ap)), &(&z[k] + pred.dz[k].scale(ad))))
            .sum::<f64>()
            / n;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let second: Vec<CMatrix> = (0..x.len()).map(|k| &pred.dx[k] * &pred.dz[k] * &zinv[k]).collect();
        let Some(corr) = direction(sigma * mu, Some(&second)) else { break };
        let tau = if relgap < 1e-4 { 0.98 } else { 0.95 };
        let Some((ap, ad)) = steps(&corr, tau) else { break };

        for k in 0..x.len() {
            x[k] = herm(&(&x[k] + corr.dx[k].scale(ap)));
            z[k] = herm(&(&z[k] + corr.dz[k].scale(ad)));
        }
        for (yi, d) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * d;
        }
        iterations += 1;
    }

    let (_, pobj, dobj, _, relgap, pinf, dinf) = measure(&x, &y, &z);
    if status != SolveStatus::Optimal {
        status =
            if relgap < 1e-6 && pinf < 1e-6 && dinf < 1e-6 { SolveStatus::NearOptimal } else { SolveStatus::Failed };
    }
    // Translate back: our objective is -aᵀy, the bound is -tr(CX).
    Ok(LmiSolution {
        y,
        objective: -dobj,
        upper_bound: -pobj,
        multipliers: x,
        iterations,
        relative_gap: relgap,
        primal_infeasibility: dinf,
        dual_infeasibility: pinf,
        status,
    })
}

/// Orthonormal real basis of the `r×r` Hermitian matrices as sparse triples:
/// `E_ii`, then `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2` for `i < j`.
pub(crate) fn hermitian_basis(r: usize) -> Vec<Vec<(usize, usize, Complex64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        out.push(vec![(i, i, linalg::ONE)]);
    }
    for i in 0..r {
        for j in (i + 1)..r {
            out.push(vec![(i, j, linalg::c(s, 0.0)), (j, i, linalg::c(s, 0.0))]);
            out.push(vec![(i, j, linalg::c(0.0, s)), (j, i, linalg::c(0.0, -s))]);
        }
    }
    out
}

/// `V E V†` for a sparse `E`.
pub(crate) fn congruence(v: &CMatrix, entries: &[(usize, usize, Complex64)]) -> CMatrix {
    let d = v.nrows();
    let mut m = CMatrix::zeros(d, d);
    for &(a, b, val) in entries {
        for i in 0..d {
            let left = v[(i, a)] * val;
            if left == ZERO {
                continue;
            }
            for j in 0..d {
                m[(i, j)] += left * v[(j, b)].conj();
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};
    use approx::assert_abs_diff_eq;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    #[test]
    fn linear_program_in_lmi_form() {
        // max y0 + y1 s.t. y0 ≥ 0, y1 ≥ 0, 1 - y0 - 2 y1 ≥ 0, 1 - 2 y0 - y1 ≥ 0 -> 2/3
        let mut blocks = vec![];
        let mut b = LmiBlock::new(scalar(0.0));
        b.push(0, Coefficient::Dense(scalar(1.0)));
        blocks.push(b);
        let mut b = LmiBlock::new(scalar(0.0));
        b.push(1, Coefficient::Dense(scalar(1.0)));
        blocks.push(b);
        let mut b = LmiBlock::new(scalar(1.0));
        b.push(0, Coefficient::Dense(scalar(-1.0)));
        b.push(1, Coefficient::Dense(scalar(-2.0)));
        blocks.push(b);
        let mut b = LmiBlock::new(scalar(1.0));
        b.push(0, Coefficient::Dense(scalar(-2.0)));
        b.push(1, Coefficient::Dense(scalar(-1.0)));
        blocks.push(b);
        let sol = solve(&LmiProblem { objective: vec![1.0, 1.0], blocks }, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, 2.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.upper_bound, 2.0 / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn minimum_eigenvalue_as_sdp() {
        // max t s.t. M - tI ⪰ 0  ->  λ_min(M) = 1 for [[2,1],[1,2]]
        let m = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let mut b = LmiBlock::new(m);
        b.push(0, Coefficient::Sparse(vec![(0, 0, c(-1.0, 0.0)), (1, 1, c(-1.0, 0.0))]));
        let sol = solve(&LmiProblem { objective: vec![1.0], blocks: vec![b] }, &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn hermitian_parametrization_recovers_matrix() {
        // max tr(C X) over 0 ⪯ X ⪯ I, C = diag(1,-1) + complex off-diagonal:
        // optimum is the sum of positive eigenvalues of C.
        let cm = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(-1.0, 0.0)]);
        let basis = hermitian_basis(2);
        let objective: Vec<f64> = basis.iter().map(|e| Coefficient::Sparse(e.clone()).trace_with(&cm)).collect();
        let mut lower = LmiBlock::new(CMatrix::zeros(2, 2));
        let mut upper = LmiBlock::new(CMatrix::identity(2, 2));
        for (k, e) in basis.iter().enumerate() {
            lower.push(k, Coefficient::Sparse(e.clone()));
            upper.push(k, Coefficient::Sparse(e.iter().map(|&(a, b, v)| (a, b, -v)).collect()));
        }
        let sol = solve(&LmiProblem { objective, blocks: vec![lower, upper] }, &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.objective, 2f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn rejects_oversized_problem() {
        let opts = SolverOptions { max_variables: 1, ..Default::default() };
        let problem = LmiProblem { objective: vec![0.0, 0.0], blocks: vec![] };
        assert!(matches!(solve(&problem, &opts), Err(Error::SizeCap { .. })));
    }
}

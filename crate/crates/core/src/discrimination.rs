//! Sets of orthogonal bipartite states and their PPT distinguishability.
//!
//! Two routes are offered. The witness route looks for a PPT-definite
//! operator supported on the support of one state; if one exists, that
//! support is strongly PPT-unextendible and no PPT measurement can
//! discriminate the set unambiguously, for any number of copies. The
//! direct route solves the single-shot discrimination SDP on `k` copies.
//!
//! Both are sufficient criteria only, so every verdict is three-valued.

use num_complex::Complex64;

use crate::bipartite::{self, BipartiteOperator, CVector, Subspace, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sdp::{self, Coefficient, LmiBlock, LmiProblem, SolveStatus, SolverOptions};
use crate::witness::{self, TmaxResult, WITNESS_TOL};

/// Largest pairwise `tr(ρᵢρⱼ)` accepted as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Cross terms at or below this count as zero in the discrimination SDP.
pub const CROSS_TERM_TOL: f64 = 1e-6;

/// PSD tolerance used when validating density operators.
pub const DENSITY_TOL: f64 = 1e-10;

/// Name of the argument that turns a witness into a many-copy verdict.
pub const INFERENCE_CHAIN: &str = "ppt-definite operator on a support -> strong PPT-unextendibility (supermultiplicative witness value) -> many-copy PPT indistinguishability";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Indistinguishable,
    Distinguishable,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LabeledState {
    pub label: String,
    pub rho: BipartiteOperator,
}

#[derive(Debug, Clone)]
pub struct StateSet {
    dim_a: usize,
    dim_b: usize,
    states: Vec<LabeledState>,
}

impl StateSet {
    /// Validates every state as a density operator on `dim_a ⊗ dim_b`.
    /// Orthogonality is checked separately.
    pub fn new(dim_a: usize, dim_b: usize, states: Vec<LabeledState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidState("a state set needs at least one state".into()));
        }
        for s in &states {
            if s.rho.dim_a() != dim_a || s.rho.dim_b() != dim_b {
                return Err(Error::DimensionMismatch(format!(
                    "state '{}' lives on {}⊗{}, set is {dim_a}⊗{dim_b}",
                    s.label,
                    s.rho.dim_a(),
                    s.rho.dim_b()
                )));
            }
            s.rho.check_density(DENSITY_TOL).map_err(|e| Error::InvalidState(format!("state '{}': {e}", s.label)))?;
        }
        Ok(Self { dim_a, dim_b, states })
    }

    /// Pure states labeled `rho1`, `rho2`, … in order.
    pub fn from_pure(dim_a: usize, dim_b: usize, psis: &[CVector]) -> Result<Self> {
        let states = psis
            .iter()
            .enumerate()
            .map(|(i, psi)| {
                Ok(LabeledState {
                    label: format!("rho{}", i + 1),
                    rho: BipartiteOperator::projector_onto(dim_a, dim_b, psi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim_a, dim_b, states)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[LabeledState] {
        &self.states
    }

    pub fn rho(&self, i: usize) -> &BipartiteOperator {
        &self.states[i].rho
    }

    /// Largest `tr(ρᵢρⱼ)` over pairs `i < j` and the pair attaining it.
    pub fn max_overlap(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let ov = linalg::trace_product_re(self.rho(i).matrix(), self.rho(j).matrix());
                if best.is_none_or(|(_, _, b)| ov > b) {
                    best = Some((i, j, ov));
                }
            }
        }
        best
    }

    /// `k`-fold tensor powers of every state, regrouped onto `(A^k)(B^k)`.
    pub fn tensor_power(&self, k: usize, max_dim: usize) -> Result<StateSet> {
        let states = self
            .states
            .iter()
            .map(|s| {
                Ok(LabeledState { label: s.label.clone(), rho: bipartite::tensor_power_reorder(&s.rho, k, max_dim)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let first = &states[0].rho;
        Ok(StateSet { dim_a: first.dim_a(), dim_b: first.dim_b(), states })
    }
}

pub fn check_orthogonality(set: &StateSet) -> bool {
    set.max_overlap().is_none_or(|(_, _, ov)| ov <= ORTHOGONALITY_TOL)
}

fn require_orthogonal(set: &StateSet) -> Result<()> {
    match set.max_overlap() {
        Some((i, j, overlap)) if overlap > ORTHOGONALITY_TOL => Err(Error::NotOrthogonal { i, j, overlap }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct StateWitness {
    pub label: String,
    pub support_dim: usize,
    pub tmax: TmaxResult,
    pub witnessed: bool,
}

#[derive(Debug, Clone)]
pub struct ManyCopyAnalysis {
    pub per_state: Vec<StateWitness>,
    /// `Indistinguishable` or `Inconclusive`; the witness never proves
    /// distinguishability.
    pub verdict: Verdict,
    /// Index of the first witnessed state.
    pub witnessed_state: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    /// Relative eigenvalue cut used to extract supports.
    pub support_tol: f64,
    pub solver: SolverOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { support_tol: SUPPORT_TOL, solver: SolverOptions::default() }
    }
}

/// Computes the witness value on the support of every state. The set is
/// PPT-indistinguishable in the many-copy scenario as soon as one value is
/// positive.
pub fn many_copy_ppt_indistinguishable(set: &StateSet) -> Result<ManyCopyAnalysis> {
    many_copy_ppt_indistinguishable_with(set, &AnalysisOptions::default())
}

pub fn many_copy_ppt_indistinguishable_with(set: &StateSet, options: &AnalysisOptions) -> Result<ManyCopyAnalysis> {
    require_orthogonal(set)?;
    if set.len() < 2 {
        return Err(Error::InvalidState("many-copy analysis needs at least two states".into()));
    }
    let mut per_state = Vec::with_capacity(set.len());
    for s in set.states() {
        let support = bipartite::support_projector(&s.rho, options.support_tol)?;
        let t = witness::tmax_with(&support, &options.solver)?;
        per_state.push(StateWitness {
            label: s.label.clone(),
            support_dim: support.dim(),
            witnessed: t.value > WITNESS_TOL,
            tmax: t,
        });
    }
    let witnessed_state = per_state.iter().position(|w| w.witnessed);
    let verdict = if witnessed_state.is_some() { Verdict::Indistinguishable } else { Verdict::Inconclusive };
    Ok(ManyCopyAnalysis { per_state, verdict, witnessed_state })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminationMode {
    /// `tr(Mᵢρⱼ) = δᵢⱼ`.
    Perfect,
    /// `tr(Mᵢρⱼ) = pᵢδᵢⱼ` with every `pᵢ > 0`.
    Unambiguous,
}

#[derive(Debug, Clone)]
pub struct DiscriminationResult {
    pub mode: DiscriminationMode,
    pub copies: usize,
    /// `minᵢ tr(Mᵢρᵢ^{⊗k})` when a zero-cross-term PPT measurement was found,
    /// otherwise 0.
    pub value: f64,
    /// The measurement minimizing the largest cross term.
    pub measurements: Vec<BipartiteOperator>,
    /// `maxᵢ≠ⱼ tr(Mᵢρⱼ^{⊗k})` of `measurements`.
    pub max_cross_term: f64,
    /// Certified lower bound on the smallest achievable largest cross term.
    pub cross_term_lower_bound: f64,
    pub iterations: usize,
    pub verdict: Verdict,
}

/// Searches for a PPT POVM on `k` copies with vanishing cross terms.
///
/// The program minimizes the largest cross term `s` over PPT POVMs
/// `{M₁…M_n}` with `ΣMᵢ = 𝟙`. Because `ΣⱼMⱼ = 𝟙` and every state has unit
/// trace, zero cross terms force `tr(Mᵢρᵢ) = 1`, so unambiguous and perfect
/// discrimination without an inconclusive outcome coincide and both modes
/// solve the same program.
pub fn ppt_discrimination_sdp(
    set: &StateSet,
    mode: DiscriminationMode,
    copies: usize,
    max_dim: usize,
) -> Result<DiscriminationResult> {
    ppt_discrimination_sdp_with(set, mode, copies, max_dim, &SolverOptions::default())
}

pub fn ppt_discrimination_sdp_with(
    set: &StateSet,
    mode: DiscriminationMode,
    copies: usize,
    max_dim: usize,
    options: &SolverOptions,
) -> Result<DiscriminationResult> {
    require_orthogonal(set)?;
    let powered = set.tensor_power(copies, max_dim)?;
    let (da, db) = (powered.dim_a(), powered.dim_b());
    let d = da * db;
    let n = powered.len();

    if n == 1 {
        return Ok(DiscriminationResult {
            mode,
            copies,
            value: 1.0,
            measurements: vec![BipartiteOperator::identity(da, db)],
            max_cross_term: 0.0,
            cross_term_lower_bound: 0.0,
            iterations: 0,
            verdict: Verdict::Distinguishable,
        });
    }

    let basis = sdp::hermitian_basis(d);
    let per = basis.len();
    let s_var = (n - 1) * per;
    let var = |i: usize, k: usize| i * per + k;
    let pt_basis: Vec<Vec<(usize, usize, Complex64)>> =
        basis.iter().map(|e| partial_transpose_entries(e, da, db)).collect();
    // overlaps[j][k] = tr(E_k ρ_j)
    let overlaps: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let rho = powered.rho(j).matrix();
            basis.iter().map(|e| e.iter().map(|&(a, b, v)| (v * rho[(b, a)]).re).sum()).collect()
        })
        .collect();

    let mut blocks = Vec::new();
    for i in 0..(n - 1) {
        let mut psd = LmiBlock::new(CMatrix::zeros(d, d));
        let mut ppt = LmiBlock::new(CMatrix::zeros(d, d));
        for k in 0..per {
            psd.push(var(i, k), Coefficient::Sparse(basis[k].clone()));
            ppt.push(var(i, k), Coefficient::Sparse(pt_basis[k].clone()));
        }
        blocks.push(psd);
        blocks.push(ppt);
    }
    // M_n = 𝟙 - Σ Mᵢ
    let mut psd_last = LmiBlock::new(linalg::identity(d));
    let mut ppt_last = LmiBlock::new(linalg::identity(d));
    for i in 0..(n - 1) {
        for k in 0..per {
            psd_last.push(var(i, k), Coefficient::Sparse(negate(&basis[k])));
            ppt_last.push(var(i, k), Coefficient::Sparse(negate(&pt_basis[k])));
        }
    }
    blocks.push(psd_last);
    blocks.push(ppt_last);

    let scalar = |z: f64| Coefficient::Sparse(vec![(0, 0, linalg::c(z, 0.0))]);
    for i in 0..n {
        for (j, ov) in overlaps.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut b;
            if i < n - 1 {
                // s - tr(Mᵢρⱼ) ≥ 0
                b = LmiBlock::new(CMatrix::zeros(1, 1));
                for (k, &o) in ov.iter().enumerate() {
                    b.push(var(i, k), scalar(-o));
                }
            } else {
                // s - 1 + Σₗ tr(Mₗρⱼ) ≥ 0
                b = LmiBlock::new(CMatrix::from_element(1, 1, linalg::c(-1.0, 0.0)));
                for l in 0..(n - 1) {
                    for (k, &o) in ov.iter().enumerate() {
                        b.push(var(l, k), scalar(o));
                    }
                }
            }
            b.push(s_var, scalar(1.0));
            blocks.push(b);
        }
    }

    let mut objective = vec![0.0; s_var + 1];
    objective[s_var] = -1.0;
    let problem = LmiProblem { objective, blocks };
    let solved = sdp::solve(&problem, options)?;
    if solved.status == SolveStatus::Failed {
        return Err(Error::Solver(format!(
            "discrimination program did not converge (gap {:.2e}, primal {:.2e}, dual {:.2e})",
            solved.relative_gap, solved.primal_infeasibility, solved.dual_infeasibility
        )));
    }

    let mut measurements = Vec::with_capacity(n);
    for i in 0..(n - 1) {
        let m = linalg::hermitian_part(&problem.blocks[2 * i].evaluate(&solved.y));
        measurements.push(BipartiteOperator::new(da, db, m)?);
    }
    let last = linalg::hermitian_part(&problem.blocks[2 * (n - 1)].evaluate(&solved.y));
    measurements.push(BipartiteOperator::new(da, db, last)?);

    let mut max_cross: f64 = 0.0;
    let mut min_diag = f64::INFINITY;
    for (i, m) in measurements.iter().enumerate() {
        for j in 0..n {
            let p = linalg::trace_product_re(m.matrix(), powered.rho(j).matrix());
            if i == j {
                min_diag = min_diag.min(p);
            } else {
                max_cross = max_cross.max(p);
            }
        }
    }
    // maximizing -s, so the dual bound caps -s from above
    let lower = (-solved.upper_bound).max(0.0);

    let (value, verdict) = if max_cross <= CROSS_TERM_TOL {
        (min_diag, Verdict::Distinguishable)
    } else if lower > CROSS_TERM_TOL {
        (0.0, Verdict::Indistinguishable)
    } else {
        (0.0, Verdict::Inconclusive)
    };
    Ok(DiscriminationResult {
        mode,
        copies,
        value,
        measurements,
        max_cross_term: max_cross,
        cross_term_lower_bound: lower,
        iterations: solved.iterations,
        verdict,
    })
}

fn negate(e: &[(usize, usize, Complex64)]) -> Vec<(usize, usize, Complex64)> {
    e.iter().map(|&(a, b, v)| (a, b, -v)).collect()
}

/// Partial transpose of a sparse operator: swaps the B indices of each entry.
fn partial_transpose_entries(e: &[(usize, usize, Complex64)], da: usize, db: usize) -> Vec<(usize, usize, Complex64)> {
    debug_assert!(e.iter().all(|&(a, b, _)| a < da * db && b < da * db));
    e.iter()
        .map(|&(a, b, v)| {
            let (i, j) = (a / db, a % db);
            let (k, l) = (b / db, b % db);
            (i * db + l, k * db + j, v)
        })
        .collect()
}

/// A pure state paired with the normalized projector onto its complement.
#[derive(Debug, Clone)]
pub struct ComplementPair {
    pub set: StateSet,
    pub schmidt_rank: usize,
    /// Largest squared Schmidt coefficient, `λ_max(|φ⟩⟨φ|^{T_B})`.
    pub largest_schmidt_sq: f64,
    /// `1 - λ₁²`, a lower bound on the witness value of the complement.
    pub witness_bound: f64,
    /// False for product states, where the construction gives no witness.
    pub entangled: bool,
}

/// `{|φ⟩⟨φ|, (𝟙 - |φ⟩⟨φ|)/(d² - 1)}` on `d ⊗ d`.
pub fn pure_state_complement_pair(d: usize, phi: &CVector) -> Result<ComplementPair> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("local dimension {d} must be at least 2")));
    }
    if phi.len() != d * d {
        return Err(Error::DimensionMismatch(format!("vector of length {} is not on {d}⊗{d}", phi.len())));
    }
    let form = bipartite::schmidt_decompose(d, d, phi)?;
    let proj = BipartiteOperator::projector_onto(d, d, phi)?;
    let comp = (linalg::identity(d * d) - proj.matrix()).scale(1.0 / (d * d - 1) as f64);
    let states = vec![
        LabeledState { label: "phi".into(), rho: proj },
        LabeledState { label: "complement".into(), rho: BipartiteOperator::new(d, d, linalg::hermitian_part(&comp))? },
    ];
    let lam1 = form.largest();
    Ok(ComplementPair {
        set: StateSet::new(d, d, states)?,
        schmidt_rank: form.rank(),
        largest_schmidt_sq: lam1 * lam1,
        witness_bound: 1.0 - lam1 * lam1,
        entangled: form.rank() > 1,
    })
}

/// `(XᵖZ^q ⊗ 𝟙)|Φ⟩` for `p, q = 0…d-1`, ordered by `(p, q)`, where
/// `|Φ⟩ = Σᵢ|ii⟩/√d`, `X|j⟩ = |j+1⟩` and `Z|j⟩ = ωʲ|j⟩`.
pub fn generalized_bell_basis(d: usize) -> Result<Vec<CVector>> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("local dimension {d} must be at least 2")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            let mut v = CVector::zeros(d * d);
            for i in 0..d {
                let phase = Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * ((q * i) % d) as f64 / d as f64);
                v[((i + p) % d) * d + i] = phase;
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MaximallyEntangledFamily {
    pub set: StateSet,
    pub d: usize,
    pub m: usize,
    /// `λ_min(P^{T_B})` for `P` the rank-`m` support projector of the first state.
    pub measured_min_pt: f64,
    /// `1 - (d² - m)/d`.
    pub bound: f64,
}

/// `ρ₁ = (1/m)Σ_{i≤m}|φᵢ⟩⟨φᵢ|` and `ρ_j = |φ_{m+j-1}⟩⟨φ_{m+j-1}|` for
/// `j = 2…k`, with `φᵢ` the generalized Bell basis.
pub fn maximally_entangled_family(d: usize, m: usize, k: usize) -> Result<MaximallyEntangledFamily> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("local dimension {d} must be at least 2")));
    }
    let dd = d * d;
    if m + d < dd + 1 || m > dd {
        return Err(Error::OutOfRange(format!("m = {m} violates d²-d+1 ≤ m ≤ d² (= {}..={dd})", dd - d + 1)));
    }
    if k < 2 || k > dd - m + 1 {
        return Err(Error::OutOfRange(format!("k = {k} violates 2 ≤ k ≤ d²-m+1 (= {})", dd - m + 1)));
    }
    let basis = generalized_bell_basis(d)?;
    let mut p = CMatrix::zeros(dd, dd);
    for v in &basis[..m] {
        p += v * v.adjoint();
    }
    let support = BipartiteOperator::new(d, d, p)?;
    let measured_min_pt = linalg::min_eigenvalue(&linalg::hermitian_part(support.partial_transpose().matrix()))?;
    let mut states = vec![LabeledState { label: "rho1".into(), rho: support.scaled(1.0 / m as f64) }];
    for j in 2..=k {
        states.push(LabeledState {
            label: format!("rho{j}"),
            rho: BipartiteOperator::projector_onto(d, d, &basis[m + j - 2])?,
        });
    }
    Ok(MaximallyEntangledFamily {
        set: StateSet::new(d, d, states)?,
        d,
        m,
        measured_min_pt,
        bound: 1.0 - (dd - m) as f64 / d as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralBound {
    /// `B < 1`: the complement projector of the listed states has
    /// `λ_min((𝟙 - ΣΠᵢ)^{T_B}) ≥ 1 - B`. `degenerate` marks an empty list.
    Applicable {
        sum: f64,
        bound: f64,
        degenerate: bool,
    },
    NotApplicable {
        sum: f64,
    },
}

/// `B = Σᵢ λ_max(Πᵢ^{T_B})` for mutually orthogonal pure states `ψᵢ`.
/// For a pure state the summand is its largest squared Schmidt coefficient.
pub fn schmidt_bound_check(dim_a: usize, dim_b: usize, psis: &[CVector]) -> Result<SpectralBound> {
    if psis.is_empty() {
        return Ok(SpectralBound::Applicable { sum: 0.0, bound: 1.0, degenerate: true });
    }
    let mut projectors = Vec::with_capacity(psis.len());
    for psi in psis {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("vector norm {norm} differs from 1")));
        }
        projectors.push(BipartiteOperator::projector_onto(dim_a, dim_b, psi)?);
    }
    for i in 0..psis.len() {
        for j in (i + 1)..psis.len() {
            let overlap = psis[i].dotc(&psis[j]).norm_sqr();
            if overlap > ORTHOGONALITY_TOL {
                return Err(Error::NotOrthogonal { i, j, overlap });
            }
        }
    }
    let mut sum = 0.0;
    for p in &projectors {
        sum += linalg::max_eigenvalue(&linalg::hermitian_part(p.partial_transpose().matrix()))?;
    }
    Ok(if sum < 1.0 {
        SpectralBound::Applicable { sum, bound: 1.0 - sum, degenerate: false }
    } else {
        SpectralBound::NotApplicable { sum }
    })
}

/// Subspace spanned by the first `m` generalized Bell vectors.
pub fn maximally_entangled_support(d: usize, m: usize) -> Result<Subspace> {
    let basis = generalized_bell_basis(d)?;
    if m == 0 || m > d * d {
        return Err(Error::OutOfRange(format!("m = {m} must lie in 1..={}", d * d)));
    }
    Subspace::span(d, d, &basis[..m], 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::basis_ket;
    use crate::linalg::c;
    use approx::assert_abs_diff_eq;

    fn bell() -> CVector {
        (basis_ket(2, 2, 0, 0) + basis_ket(2, 2, 1, 1)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    fn classical_pair() -> StateSet {
        StateSet::from_pure(2, 2, &[basis_ket(2, 2, 0, 0), basis_ket(2, 2, 1, 1)]).unwrap()
    }

    #[test]
    fn orthogonality_examples() {
        assert!(check_orthogonality(&classical_pair()));
        let pair = pure_state_complement_pair(2, &bell()).unwrap();
        assert!(check_orthogonality(&pair.set));
        let plus = (basis_ket(2, 2, 0, 0) + basis_ket(2, 2, 0, 1)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let overlapping = StateSet::from_pure(2, 2, &[basis_ket(2, 2, 0, 0), plus]).unwrap();
        assert!(!check_orthogonality(&overlapping));
        assert!(matches!(many_copy_ppt_indistinguishable(&overlapping), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn bell_pair_metadata_and_spectrum() {
        let pair = pure_state_complement_pair(2, &bell()).unwrap();
        assert_eq!(pair.schmidt_rank, 2);
        assert_abs_diff_eq!(pair.largest_schmidt_sq, 0.5, epsilon = 1e-12);
        let ev = linalg::eigenvalues(pair.set.rho(1).matrix()).unwrap();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        for &x in &ev.as_slice()[1..] {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn skewed_state_and_product_state() {
        let phi = basis_ket(2, 2, 0, 0) * c(0.9f64.sqrt(), 0.0) + basis_ket(2, 2, 1, 1) * c(0.1f64.sqrt(), 0.0);
        let pair = pure_state_complement_pair(2, &phi).unwrap();
        assert_abs_diff_eq!(pair.largest_schmidt_sq, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.witness_bound, 0.1, epsilon = 1e-12);
        let product = pure_state_complement_pair(2, &basis_ket(2, 2, 0, 0)).unwrap();
        assert!(!product.entangled);
        assert_eq!(product.schmidt_rank, 1);
    }

    #[test]
    fn bell_pair_is_many_copy_indistinguishable() {
        let pair = pure_state_complement_pair(2, &bell()).unwrap();
        let analysis = many_copy_ppt_indistinguishable(&pair.set).unwrap();
        assert_eq!(analysis.verdict, Verdict::Indistinguishable);
        assert_eq!(analysis.witnessed_state, Some(1));
        assert!(analysis.per_state[1].tmax.value >= 0.5 - 1e-6);
    }

    #[test]
    fn classical_pair_is_inconclusive_and_distinguishable() {
        let set = classical_pair();
        let analysis = many_copy_ppt_indistinguishable(&set).unwrap();
        assert_eq!(analysis.verdict, Verdict::Inconclusive);
        let r = ppt_discrimination_sdp(&set, DiscriminationMode::Unambiguous, 1, 4096).unwrap();
        assert_eq!(r.verdict, Verdict::Distinguishable);
        assert!(r.value >= 1.0 - 1e-5, "value {}", r.value);
    }

    #[test]
    fn bell_pair_discrimination_fails() {
        let pair = pure_state_complement_pair(2, &bell()).unwrap();
        let r = ppt_discrimination_sdp(&pair.set, DiscriminationMode::Unambiguous, 1, 4096).unwrap();
        assert!(r.value <= 1e-6);
        assert_eq!(r.verdict, Verdict::Indistinguishable);
        assert_abs_diff_eq!(r.max_cross_term, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn single_state_set_is_trivial() {
        let set = StateSet::from_pure(2, 2, &[bell()]).unwrap();
        let r = ppt_discrimination_sdp(&set, DiscriminationMode::Perfect, 1, 4096).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.measurements[0].matrix(), &linalg::identity(4));
    }

    #[test]
    fn bell_basis_properties() {
        for d in 2..=4 {
            let basis = generalized_bell_basis(d).unwrap();
            assert_eq!(basis.len(), d * d);
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let ip = u.dotc(v).norm();
                    assert_abs_diff_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
                let pt = BipartiteOperator::projector_onto(d, d, u).unwrap().partial_transpose();
                let ev = linalg::eigenvalues(pt.matrix()).unwrap();
                for &x in ev.iter() {
                    assert!((x.abs() - 1.0 / d as f64).abs() < 1e-12, "eigenvalue {x}");
                }
                assert_abs_diff_eq!(ev[ev.len() - 1], 1.0 / d as f64, epsilon = 1e-12);
            }
        }
        let b = generalized_bell_basis(2).unwrap();
        assert_abs_diff_eq!((b[0].clone() - bell()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn family_ranges() {
        let f = maximally_entangled_family(2, 3, 2).unwrap();
        assert_eq!(f.set.len(), 2);
        assert!(f.measured_min_pt >= 0.5 - 1e-9);
        let f = maximally_entangled_family(3, 7, 3).unwrap();
        assert_eq!(f.set.len(), 3);
        assert!(f.measured_min_pt >= f.bound - 1e-9);
        assert!(matches!(maximally_entangled_family(2, 2, 2), Err(Error::OutOfRange(_))));
        assert!(matches!(maximally_entangled_family(2, 3, 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn spectral_bound_examples() {
        let basis = generalized_bell_basis(2).unwrap();
        match schmidt_bound_check(2, 2, &basis[..3]).unwrap() {
            SpectralBound::NotApplicable { sum } => assert_abs_diff_eq!(sum, 1.5, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        let phi = basis_ket(2, 2, 0, 0) * c(0.9f64.sqrt(), 0.0) + basis_ket(2, 2, 1, 1) * c(0.1f64.sqrt(), 0.0);
        match schmidt_bound_check(2, 2, &[phi]).unwrap() {
            SpectralBound::Applicable { sum, bound, degenerate } => {
                assert_abs_diff_eq!(sum, 0.9, epsilon = 1e-12);
                assert_abs_diff_eq!(bound, 0.1, epsilon = 1e-12);
                assert!(!degenerate);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            schmidt_bound_check(2, 2, &[]).unwrap(),
            SpectralBound::Applicable { sum: 0.0, bound: 1.0, degenerate: true }
        );
    }

    #[test]
    fn sparse_partial_transpose_matches_dense() {
        let basis = sdp::hermitian_basis(6);
        for e in &basis {
            let mut dense = CMatrix::zeros(6, 6);
            for &(a, b, v) in e {
                dense[(a, b)] += v;
            }
            let mut sparse = CMatrix::zeros(6, 6);
            for (a, b, v) in partial_transpose_entries(e, 2, 3) {
                sparse[(a, b)] += v;
            }
            assert_eq!(sparse, bipartite::partial_transpose_matrix(&dense, 2, 3));
        }
    }
}

//! Minimal strongly PPT-unextendible subspaces of `m ⊗ n`, `2 ≤ m ≤ n`.
//!
//! The generator space `S = span{|j⟩|k+1⟩ − |j+1⟩|k⟩}` has dimension
//! `(m−1)(n−1)`; its complement `S_mn` is spanned by the uniform
//! anti-diagonal vectors `v_D = Σ_{j+k=D} |j⟩|k⟩`, `D = 0..m+n−2`, so
//! `dim S_mn = m+n−1`. A PPT-definite operator on `S_mn` is built as
//! `ρ = Σ_D w_D |v_D⟩⟨v_D|` with positive weights. Under the partial
//! transpose the entry between `|a b⟩` and `|a' b'⟩` is `w_{a+b'}` when
//! `a−b = a'−b'` and zero otherwise, so `ρ^{T_B}` splits into Hankel blocks,
//! one per diagonal `a − b = const`: the families `P_a` (`a − b = m−1−a ≥ 0`)
//! and `Q_b` (`a − b = −b < 0`).
//!
//! Weights are labelled `x_0..x_{m−1}` and `y_m..y_{m+n−2}`: anti-diagonal
//! `D < m` carries `x_{m−1−D}` and `D ≥ m` carries `y_D`. With this labelling
//! `P_a[r][c] = x_{a−r−c}` for `r+c ≤ a` and `y_{m−1+r+c−a}` otherwise, and the
//! 2⊗2 weights `x = (1, 2)` give `ρ = 2(|00⟩⟨00| + |11⟩⟨11|) + (|01⟩+|10⟩)(⟨01|+⟨10|)`.

use crate::bipartite::{self, BipartiteOperator, CVector, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Doublings allowed when searching for a new weight.
pub const MAX_DOUBLINGS: usize = 200;

/// Off-block entries of `ρ^{T_B}` above this are a convention bug.
pub const OFF_BLOCK_TOL: f64 = 1e-12;

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m < 2 || m > n {
        return Err(Error::OutOfRange(format!("need 2 ≤ m ≤ n, got m={m}, n={n}")));
    }
    Ok(())
}

/// `span{|j⟩|k+1⟩ − |j+1⟩|k⟩ : 0 ≤ j ≤ m−2, 0 ≤ k ≤ n−2}`.
pub fn build_generator_space(m: usize, n: usize) -> Result<Subspace> {
    check_dims(m, n)?;
    let mut gens = Vec::with_capacity((m - 1) * (n - 1));
    for j in 0..m - 1 {
        for k in 0..n - 1 {
            gens.push(bipartite::basis_ket(m, n, j, k + 1) - bipartite::basis_ket(m, n, j + 1, k));
        }
    }
    Subspace::span(m, n, &gens, 1e-10)
}

/// Unnormalized `v_D = Σ_{j+k=D} |j⟩|k⟩` on `m ⊗ n`.
pub fn anti_diagonal_vector(m: usize, n: usize, diagonal: usize) -> CVector {
    let mut v = CVector::zeros(m * n);
    for j in 0..m {
        if diagonal >= j && diagonal - j < n {
            v[j * n + (diagonal - j)] = linalg::ONE;
        }
    }
    v
}

/// Orthonormal basis of `S_mn`: the normalized `|ψ_s⟩` (`s = 0..m−1`, on
/// anti-diagonal `m−1−s`) followed by the normalized `|φ_t⟩` (`t = m..m+n−2`).
pub fn build_smn_basis(m: usize, n: usize) -> Result<Subspace> {
    check_dims(m, n)?;
    let diagonals = (0..m).map(|s| m - 1 - s).chain(m..=m + n - 2);
    let cols: Vec<CVector> = diagonals
        .map(|dg| {
            let v = anti_diagonal_vector(m, n, dg);
            let norm = v.norm();
            v / linalg::c(norm, 0.0)
        })
        .collect();
    Subspace::from_orthonormal(m, n, CMatrix::from_columns(&cols))
}

/// Positive weights `x_0..x_{m−1}`, `y_m..y_{m+n−2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub m: usize,
    pub n: usize,
    /// `x[a] = x_a`.
    pub x: Vec<f64>,
    /// `y[t - m] = y_t`.
    pub y: Vec<f64>,
}

impl CoefficientSet {
    pub fn new(m: usize, n: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_dims(m, n)?;
        if x.len() != m || y.len() != n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} x-weights and {} y-weights, got {} and {}",
                n - 1,
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(Error::OutOfRange("weights must be finite and strictly positive".into()));
        }
        Ok(Self { m, n, x, y })
    }

    pub fn y_at(&self, t: usize) -> f64 {
        self.y[t - self.m]
    }

    /// Weight carried by anti-diagonal `D`.
    pub fn weight(&self, diagonal: usize) -> f64 {
        if diagonal < self.m {
            self.x[self.m - 1 - diagonal]
        } else {
            self.y_at(diagonal)
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.m + self.n - 1).map(|dg| self.weight(dg)).collect()
    }

    /// `x_a = y_{m−1+a}` for `a = 1..m−1`.
    pub fn is_symmetric(&self) -> bool {
        (1..self.m).all(|a| self.x[a] == self.y_at(self.m - 1 + a))
    }

    pub fn is_integral(&self) -> bool {
        self.x.iter().chain(&self.y).all(|w| w.fract() == 0.0)
    }
}

/// Basis labels `(a, b)` of `|a⟩|b⟩` grouped by the diagonal `a − b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFamilies {
    pub m: usize,
    pub n: usize,
    /// `𝒫_a = {|m−1−a+t⟩|t⟩ : 0 ≤ t ≤ a}`, `a = 0..m−1`.
    pub p: Vec<Vec<(usize, usize)>>,
    /// `𝒬_b = {|r⟩|r+b⟩ : 0 ≤ r ≤ min(n−1−b, m−1)}`, `b = 1..n−1` (index `b−1`).
    pub q: Vec<Vec<(usize, usize)>>,
}

impl BlockFamilies {
    pub fn all(&self) -> impl Iterator<Item = &Vec<(usize, usize)>> {
        self.p.iter().chain(&self.q)
    }

    /// Flat indices in family order: `𝒫_0, …, 𝒫_{m−1}, 𝒬_1, …, 𝒬_{n−1}`.
    pub fn ordering(&self) -> Vec<usize> {
        self.all().flatten().map(|&(a, b)| a * self.n + b).collect()
    }

    /// Each basis label appears in exactly one family.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![0usize; self.m * self.n];
        for &(a, b) in self.all().flatten() {
            if a >= self.m || b >= self.n {
                return false;
            }
            seen[a * self.n + b] += 1;
        }
        seen.iter().all(|&c| c == 1)
    }
}

pub fn block_families(m: usize, n: usize) -> Result<BlockFamilies> {
    check_dims(m, n)?;
    let p = (0..m).map(|a| (0..=a).map(|t| (m - 1 - a + t, t)).collect()).collect();
    let q = (1..n).map(|b| (0..=(n - 1 - b).min(m - 1)).map(|r| (r, r + b)).collect()).collect();
    Ok(BlockFamilies { m, n, p, q })
}

/// `H[r][c] = w[start + r + c]`, `r, c < size`.
fn hankel_window(w: &[f64], start: usize, size: usize) -> CMatrix {
    CMatrix::from_fn(size, size, |r, c| linalg::c(w[start + r + c], 0.0))
}

fn all_minors_positive(m: &CMatrix) -> Result<bool> {
    linalg::sylvester_positive(m)
}

/// Doubles `start` until `accept` holds.
fn doubling_search(start: f64, what: &str, mut accept: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    let mut candidate = start;
    for _ in 0..=MAX_DOUBLINGS {
        if accept(candidate)? {
            return Ok(candidate);
        }
        candidate *= 2.0;
    }
    Err(Error::CoefficientSearch(format!("no admissible {what} after {MAX_DOUBLINGS} doublings")))
}

/// Weights making every `P_a` and `Q_b` positive definite.
///
/// Starts from `x = (1, 2)` for 2⊗2. The square case grows `x` one entry at
/// a time: with the symmetric choice `x_a = y_{m−1+a}` the new top block is
/// `[x_{|k−r−c|}]` and only its corners carry the new weight, found by
/// doubling until all its leading principal minors are positive. The
/// rectangular case then fixes `y_{2m−1}, …, y_{m+n−2}` in turn, each the
/// bottom-right corner of `Q_1, …, Q_{n−m}`, by the same search.
pub fn find_coefficients(m: usize, n: usize) -> Result<CoefficientSet> {
    check_dims(m, n)?;
    let mut x = vec![1.0, 2.0];
    for k in 2..m {
        let start = x.iter().copied().fold(0.0, f64::max);
        let new = doubling_search(start, &format!("x_{k}"), |cand| {
            let block = CMatrix::from_fn(k + 1, k + 1, |r, c| {
                let idx = (k as isize - (r + c) as isize).unsigned_abs();
                linalg::c(if idx == k { cand } else { x[idx] }, 0.0)
            });
            all_minors_positive(&block)
        })?;
        x.push(new);
    }

    // weights along anti-diagonals 0..=2m−2 from the symmetric square solution
    let mut w: Vec<f64> = (0..m).map(|dg| x[m - 1 - dg]).chain((1..m).map(|a| x[a])).collect();
    for b in 1..=(n - m) {
        let start = w.iter().copied().fold(0.0, f64::max);
        let new = doubling_search(start, &format!("y_{}", 2 * m - 2 + b), |cand| {
            let mut trial = w.clone();
            trial.push(cand);
            all_minors_positive(&hankel_window(&trial, b, m))
        })?;
        w.push(new);
    }
    let y = w[m..].to_vec();
    let coeffs = CoefficientSet::new(m, n, x, y)?;

    for block in blocks_from_weights(&coeffs)? {
        if !all_minors_positive(&block)? {
            return Err(Error::CoefficientSearch(format!("found weights leave a non-positive block for ({m},{n})")));
        }
    }
    Ok(coeffs)
}

/// The Hankel blocks `P_0..P_{m−1}, Q_1..Q_{n−1}` predicted from the weights.
pub fn blocks_from_weights(coeffs: &CoefficientSet) -> Result<Vec<CMatrix>> {
    let families = block_families(coeffs.m, coeffs.n)?;
    let w = coeffs.weights();
    Ok(families
        .all()
        .map(|fam| {
            let (a0, b0) = fam[0];
            // a0 + b0 is the first anti-diagonal touched by the family
            hankel_window(&w, a0 + b0, fam.len())
        })
        .collect())
}

/// `ρ_mn = Σ_D w_D |v_D⟩⟨v_D|` with the unnormalized anti-diagonal vectors.
pub fn assemble_rho(m: usize, n: usize, coeffs: &CoefficientSet) -> Result<BipartiteOperator> {
    check_dims(m, n)?;
    if coeffs.m != m || coeffs.n != n {
        return Err(Error::DimensionMismatch(format!(
            "weights are for ({},{}), operator requested on ({m},{n})",
            coeffs.m, coeffs.n
        )));
    }
    let mut rho = CMatrix::zeros(m * n, m * n);
    for dg in 0..m + n - 1 {
        let v = anti_diagonal_vector(m, n, dg);
        rho += (&v * v.adjoint()).scale(coeffs.weight(dg));
    }
    BipartiteOperator::new(m, n, rho)
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub families: BlockFamilies,
    /// `P_0..P_{m−1}`.
    pub p_blocks: Vec<CMatrix>,
    /// `Q_1..Q_{n−1}`.
    pub q_blocks: Vec<CMatrix>,
    /// Largest entry of the permuted `ρ^{T_B}` outside the diagonal blocks.
    pub off_block_max: f64,
    /// Largest deviation of a block entry from the Hankel pattern of the
    /// weights read off `ρ`. Zero for operators built by [`assemble_rho`].
    pub pattern_deviation: f64,
}

impl BlockDecomposition {
    pub fn blocks(&self) -> impl Iterator<Item = &CMatrix> {
        self.p_blocks.iter().chain(&self.q_blocks)
    }

    pub fn block_spectra(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for b in self.blocks() {
            all.extend(linalg::eigenvalues(b)?);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }
}

/// Splits `ρ^{T_B}` along the families and checks that nothing lives outside
/// the diagonal blocks.
pub fn verify_block_decomposition(rho: &BipartiteOperator, m: usize, n: usize) -> Result<BlockDecomposition> {
    check_dims(m, n)?;
    if rho.dim_a() != m || rho.dim_b() != n {
        return Err(Error::DimensionMismatch(format!("operator on {}⊗{}, expected {m}⊗{n}", rho.dim_a(), rho.dim_b())));
    }
    let families = block_families(m, n)?;
    let pt = rho.partial_transpose();
    let order = families.ordering();
    let permuted = CMatrix::from_fn(m * n, m * n, |i, j| pt.matrix()[(order[i], order[j])]);

    let mut block_of = Vec::with_capacity(m * n);
    let mut blocks = Vec::new();
    let mut offset = 0;
    for (id, fam) in families.all().enumerate() {
        block_of.extend(std::iter::repeat_n(id, fam.len()));
        blocks.push(permuted.view((offset, offset), (fam.len(), fam.len())).into_owned());
        offset += fam.len();
    }
    let mut off_block_max = 0.0_f64;
    for i in 0..m * n {
        for j in 0..m * n {
            if block_of[i] != block_of[j] {
                off_block_max = off_block_max.max(permuted[(i, j)].norm());
            }
        }
    }
    if off_block_max > OFF_BLOCK_TOL * linalg::max_abs(rho.matrix()).max(1.0) {
        return Err(Error::Structure(format!("off-block entry {off_block_max:.3e} in permuted partial transpose")));
    }

    // weights read from the diagonal of ρ: ⟨j, D−j|ρ|j, D−j⟩ = w_D
    let w: Vec<f64> = (0..m + n - 1)
        .map(|dg| {
            let j = dg.saturating_sub(n - 1);
            rho.matrix()[(j * n + (dg - j), j * n + (dg - j))].re
        })
        .collect();
    let mut pattern_deviation = 0.0_f64;
    for (fam, block) in families.all().zip(&blocks) {
        let (a0, b0) = fam[0];
        let expected = hankel_window(&w, a0 + b0, fam.len());
        pattern_deviation = pattern_deviation.max(linalg::max_abs(&(block - expected)));
    }

    let q_blocks = blocks.split_off(m);
    Ok(BlockDecomposition { families, p_blocks: blocks, q_blocks, off_block_max, pattern_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    #[test]
    fn generator_space_dimensions() {
        let s = build_generator_space(2, 2).unwrap();
        assert_eq!(s.dim(), 1);
        // spanned by (|01⟩ − |10⟩)/√2
        let v = s.vector(0);
        assert!((v[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((v[1] + v[2]).norm() < 1e-12);
        assert_eq!(build_generator_space(2, 3).unwrap().dim(), 2);
        assert_eq!(build_generator_space(3, 3).unwrap().dim(), 4);
        assert!(build_generator_space(1, 3).is_err());
        assert!(build_generator_space(3, 2).is_err());
    }

    #[test]
    fn smn_basis_two_by_two() {
        let s = build_smn_basis(2, 2).unwrap();
        assert_eq!(s.dim(), 3);
        let expected = Subspace::span(
            2,
            2,
            &[
                bipartite::basis_ket(2, 2, 0, 0),
                bipartite::basis_ket(2, 2, 0, 1) + bipartite::basis_ket(2, 2, 1, 0),
                bipartite::basis_ket(2, 2, 1, 1),
            ],
            1e-10,
        )
        .unwrap();
        assert!(s.contains(&expected, 1e-12) && expected.contains(&s, 1e-12));
        assert_eq!(build_smn_basis(3, 4).unwrap().dim(), 6);
    }

    #[test]
    fn families_two_by_two_by_hand() {
        let f = block_families(2, 2).unwrap();
        assert_eq!(f.p, vec![vec![(1, 0)], vec![(0, 0), (1, 1)]]);
        assert_eq!(f.q, vec![vec![(0, 1)]]);
        assert!(f.is_partition());
    }

    #[test]
    fn family_sizes() {
        let f = block_families(3, 5).unwrap();
        assert!(f.is_partition());
        assert_eq!(f.all().map(Vec::len).sum::<usize>(), 15);
        assert_eq!(f.p[2].len(), 3);
        for (i, q) in f.q.iter().enumerate() {
            let b = i + 1;
            assert_eq!(q.len(), (5 - 1 - b).min(2) + 1);
        }
        let f = block_families(3, 3).unwrap();
        let mut sizes: Vec<usize> = f.all().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn base_case_reproduces_explicit_rho() {
        let coeffs = find_coefficients(2, 2).unwrap();
        assert_eq!(coeffs.x, vec![1.0, 2.0]);
        assert_eq!(coeffs.y, vec![2.0]);
        let rho = assemble_rho(2, 2, &coeffs).unwrap();
        let expected = from_real_rows(&[
            &[2.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ]);
        assert_eq!(rho.matrix(), &expected);
    }

    #[test]
    fn block_pattern_two_by_two() {
        let coeffs = find_coefficients(2, 2).unwrap();
        let rho = assemble_rho(2, 2, &coeffs).unwrap();
        let dec = verify_block_decomposition(&rho, 2, 2).unwrap();
        // P_0 = (x_0), P_1 = [[x_1, x_0], [x_0, y_2]], Q_1 = (x_0)
        assert_eq!(dec.p_blocks[0], from_real_rows(&[&[1.0]]));
        assert_eq!(dec.p_blocks[1], from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]));
        assert_eq!(dec.q_blocks[0], from_real_rows(&[&[1.0]]));
        assert_eq!(dec.off_block_max, 0.0);
        assert_eq!(dec.pattern_deviation, 0.0);
    }

    #[test]
    fn three_by_three_search_is_integral_and_symmetric() {
        let coeffs = find_coefficients(3, 3).unwrap();
        assert_eq!(coeffs.x, vec![1.0, 2.0, 8.0]);
        assert!(coeffs.is_symmetric() && coeffs.is_integral());
        let rho = assemble_rho(3, 3, &coeffs).unwrap();
        assert!(bipartite::is_ppt_definite(&rho, 1e-9).unwrap());
    }

    #[test]
    fn rectangular_search_satisfies_q_minors() {
        let coeffs = find_coefficients(2, 4).unwrap();
        for block in blocks_from_weights(&coeffs).unwrap() {
            assert!(linalg::leading_principal_minors(&block).unwrap().iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn pattern_mismatch_is_reported_as_data() {
        let coeffs = find_coefficients(2, 3).unwrap();
        let mut rho = assemble_rho(2, 3, &coeffs).unwrap().into_matrix();
        // rescale one off-diagonal coupling within an anti-diagonal
        rho[(1, 3)] *= linalg::c(2.0, 0.0);
        rho[(3, 1)] *= linalg::c(2.0, 0.0);
        let rho = BipartiteOperator::new(2, 3, rho).unwrap();
        let dec = verify_block_decomposition(&rho, 2, 3).unwrap();
        assert!(dec.pattern_deviation > 0.5);
    }

    #[test]
    fn off_block_mass_is_a_structural_error() {
        let mut rho = linalg::identity(4);
        rho[(0, 1)] = linalg::c(0.1, 0.0);
        rho[(1, 0)] = linalg::c(0.1, 0.0);
        let rho = BipartiteOperator::new(2, 2, rho).unwrap();
        assert!(matches!(verify_block_decomposition(&rho, 2, 2), Err(Error::Structure(_))));
    }

    #[test]
    fn coefficient_set_validation() {
        assert!(CoefficientSet::new(2, 2, vec![1.0, 0.0], vec![2.0]).is_err());
        assert!(CoefficientSet::new(2, 2, vec![1.0], vec![2.0]).is_err());
        assert!(assemble_rho(2, 3, &find_coefficients(2, 2).unwrap()).is_err());
    }
}

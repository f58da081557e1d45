//! Dense complex matrix kernels.
//!
//! Everything here works on [`CMatrix`] (an `nalgebra` dynamic complex matrix).
//! The Hermitian eigensolver is a cyclic Jacobi iteration, which is accurate
//! to a few ulps for the small dense problems this crate deals with (dimension
//! up to a few hundred).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance used by [`check_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a complex matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j], 0.0))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Re tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `max(1, tr(M)/dim)`, the scale every relative tolerance is measured against.
pub fn scale_factor(m: &CMatrix) -> f64 {
    let n = m.nrows().max(1);
    (trace_re(m) / n as f64).max(1.0)
}

pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

/// Rejects matrices with `max |M_ij - conj(M_ji)| > 1e-12 (1 + max |M|)`.
pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_TOL * (1.0 + max_abs(m)) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Columns of `vectors` whose eigenvalue satisfies `keep`.
    pub fn select(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let cols: Vec<usize> = (0..self.values.len()).filter(|&j| keep(self.values[j])).collect();
        CMatrix::from_fn(self.vectors.nrows(), cols.len(), |i, k| self.vectors[(i, cols[k])])
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    jacobi(m)
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.min())
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.max())
}

/// Jacobi on the Hermitian part of `m`; skips the Hermiticity check. Used by
/// internal callers whose inputs are Hermitian up to accumulated round-off.
pub(crate) fn jacobi(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    // row-major working copies
    let mut a: Vec<Complex64> = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)].conj());
        }
    }
    let mut v: Vec<Complex64> = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }

    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 4.0 * f64::EPSILON * total;

    let mut sweep = 0;
    loop {
        let off = off_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweep >= MAX_SWEEPS {
            return Err(Error::EigenNotConverged { sweeps: sweep, residual: off });
        }
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 || mag <= threshold {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // negligible against both diagonal entries
                if sweep > 3 && app.abs() + 1e2 * mag == app.abs() && aqq.abs() + 1e2 * mag == aqq.abs() {
                    a[p * n + q] = ZERO;
                    a[q * n + p] = ZERO;
                    continue;
                }
                let phase = apq.conj() / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let sphase = phase * sn;
                let cphase = phase * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * cs - akq * sphase;
                    a[k * n + q] = akp * sn + akq * cphase;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * cs - aqk * sphase.conj();
                    a[q * n + k] = apk * sn + aqk * cphase.conj();
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = c(app - t * mag, 0.0);
                a[q * n + q] = c(aqq + t * mag, 0.0);
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * cs - vkq * sphase;
                    v[k * n + q] = vkp * sn + vkq * cphase;
                }
            }
        }
        sweep += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(HermitianEigen { values, vectors })
}

/// Kronecker product: `(A⊗B)[i·rB + k][j·cB + l] = A[i][j]·B[k][l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `λ_min(M) > tol · max(1, tr(M)/dim)`.
pub fn is_positive_definite(m: &CMatrix, tol: f64) -> Result<bool> {
    let lmin = min_eigenvalue(m)?;
    Ok(lmin > tol * scale_factor(m))
}

/// Determinants of the top-left k×k blocks, k = 1..dim.
///
/// Computed by an LDL† elimination on the diagonally scaled matrix
/// `S M S`, `S = diag(|M_ii|^{-1/2})`, so each minor is the running product of
/// pivots times the product of the removed diagonal scales. If a pivot
/// vanishes the remaining minors fall back to LU determinants.
pub fn leading_principal_minors(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let n = m.nrows();
    let scales: Vec<f64> = (0..n)
        .map(|i| {
            let d = m[(i, i)].re.abs();
            if d > 0.0 {
                d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let a = CMatrix::from_fn(n, n, |i, j| m[(i, j)] / (scales[i] * scales[j]));

    let mut l = CMatrix::identity(n, n);
    let mut d = vec![0.0; n];
    let mut minors = Vec::with_capacity(n);
    let mut running = 1.0;
    let mut scale_product = 1.0;
    for k in 0..n {
        let mut dk = a[(k, k)].re;
        for j in 0..k {
            dk -= l[(k, j)].norm_sqr() * d[j];
        }
        scale_product *= scales[k] * scales[k];
        if dk.abs() <= 64.0 * f64::EPSILON * (k + 1) as f64 {
            // singular leading block: finish with direct determinants
            minors.push(0.0);
            for kk in (k + 1)..n {
                let block = m.view((0, 0), (kk + 1, kk + 1)).into_owned();
                minors.push(block.determinant().re);
            }
            return Ok(minors);
        }
        d[k] = dk;
        running *= dk;
        minors.push(running * scale_product);
        for i in (k + 1)..n {
            let mut s = a[(i, k)];
            for j in 0..k {
                s -= l[(i, j)] * l[(k, j)].conj() * d[j];
            }
            l[(i, k)] = s / dk;
        }
    }
    Ok(minors)
}

/// Sylvester's criterion: every leading principal minor strictly positive.
pub fn sylvester_positive(m: &CMatrix) -> Result<bool> {
    Ok(leading_principal_minors(m)?.iter().all(|&x| x > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eig(&identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let e = hermitian_eig(&from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-14);

        let e = hermitian_eig(&from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_hermitian_residual() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let e = hermitian_eig(&m).unwrap();
        assert_abs_diff_eq!(e.values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 2.0, epsilon = 1e-14);
        let resid = &m * &e.vectors - &e.vectors * diag_real(&e.values);
        assert!(frobenius(&resid) < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let k = kron(&diag_real(&[1.0, 2.0]), &diag_real(&[3.0, 4.0]));
        assert_eq!(k, diag_real(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn positive_definite_examples() {
        assert!(is_positive_definite(&identity(4), 1e-9).unwrap());
        assert!(!is_positive_definite(&diag_real(&[1.0, 0.0]), 1e-9).unwrap());
        assert!(is_positive_definite(&from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]), 1e-9).unwrap());
    }

    #[test]
    fn minors_examples() {
        assert_eq!(leading_principal_minors(&identity(3)).unwrap(), vec![1.0, 1.0, 1.0]);
        let m = leading_principal_minors(&from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_abs_diff_eq!(m[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[1], 3.0, epsilon = 1e-14);
        let m = leading_principal_minors(&diag_real(&[1.0, -1.0])).unwrap();
        assert_eq!(m, vec![1.0, -1.0]);
    }

    #[test]
    fn minors_with_singular_leading_block() {
        // leading 1x1 block is zero; the 2x2 determinant is -1
        let m = from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 2.0]]);
        let minors = leading_principal_minors(&m).unwrap();
        assert_eq!(minors[0], 0.0);
        assert_abs_diff_eq!(minors[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(minors[2], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn empty_matrix() {
        let e = hermitian_eig(&CMatrix::zeros(0, 0)).unwrap();
        assert!(e.values.is_empty());
    }
}

//! Dense complex-matrix kernel.
//!
//! Everything in the crate runs on small dense matrices (d ≤ 16 for the
//! core, d^n ≤ 4096 for tensor spaces), so the kernel is a thin layer over
//! `nalgebra::DMatrix<Complex64>` plus a comparison policy. All predicates
//! take an explicit [`Tolerance`]; the matrix norm used throughout is the
//! maximum absolute entry.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Comparison policy for all tolerance-aware predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_eps: 1e-10,
            rel_eps: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if !abs_eps.is_finite() || abs_eps < 0.0 || !rel_eps.is_finite() || rel_eps < 0.0 {
            return Err(Error::Domain(
                "tolerance components must be finite and nonnegative".into(),
            ));
        }
        Ok(Tolerance { abs_eps, rel_eps })
    }

    /// Absolute-or-relative closeness of two scalars.
    pub fn close(&self, a: f64, b: f64) -> bool {
        let diff = (a - b).abs();
        diff <= self.abs_eps || diff <= self.rel_eps * a.abs().max(b.abs())
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<CMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Shape("matrix must have at least one row".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("ragged or empty matrix literal".into()));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix contains NaN or Inf entries".into()));
    }
    Ok(())
}

/// Maximum absolute entry of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry norm of the difference `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    max_abs(&(a - b))
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "matmul dimension mismatch: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn trace(a: &CMatrix) -> Result<Complex64> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "trace requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.trace())
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn is_hermitian(m: &CMatrix, tol: &Tolerance) -> bool {
    m.nrows() == m.ncols() && max_abs_diff(m, &m.adjoint()) <= tol.abs_eps
}

/// exp(scale·h) for Hermitian h, via the unitary eigendecomposition
/// h = VΛV†.
pub fn hermitian_expm(h: &CMatrix, scale: Complex64) -> Result<CMatrix> {
    hermitian_expm_tol(h, scale, &Tolerance::default())
}

pub fn hermitian_expm_tol(h: &CMatrix, scale: Complex64, tol: &Tolerance) -> Result<CMatrix> {
    if !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::Domain("expm scale must be finite".into()));
    }
    if !is_hermitian(h, tol) {
        return Err(Error::Domain(
            "hermitian_expm requires a Hermitian matrix".into(),
        ));
    }
    let (vals, vecs) = orthonormal_eigen(h);
    let exp_diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter()
            .map(|&lambda| (scale * Complex64::new(lambda, 0.0)).exp()),
    ));
    let result = &vecs * exp_diag * vecs.adjoint();
    ensure_finite(&result)?;
    Ok(result)
}

/// Eigendecomposition with the eigenvector columns re-orthonormalized by
/// modified Gram–Schmidt in ascending eigenvalue order. The raw solver can
/// return visibly non-orthogonal vectors for near-degenerate clusters; the
/// polish keeps spectral reconstructions unitary to machine precision.
fn orthonormal_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    for k in 0..n {
        for j in 0..k {
            let proj: Complex64 = (0..n).map(|i| vecs[(i, j)].conj() * vecs[(i, k)]).sum();
            for i in 0..n {
                let correction = proj * vecs[(i, j)];
                vecs[(i, k)] -= correction;
            }
        }
        let norm: f64 = (0..n).map(|i| vecs[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            vecs[(i, k)] /= norm;
        }
    }
    (vals, vecs)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Spectral decomposition of a Hermitian matrix: (eigenvalue, unit column)
/// pairs with orthonormal columns.
pub fn hermitian_eigenpairs(m: &CMatrix) -> Vec<(f64, Vec<Complex64>)> {
    let (vals, vecs) = orthonormal_eigen(m);
    vals.into_iter()
        .enumerate()
        .map(|(k, lambda)| (lambda, vecs.column(k).iter().copied().collect()))
        .collect()
}

/// True iff ‖P² − P‖ and ‖P† − P‖ are within tolerance (max-entry norm).
pub fn is_projector(p: &CMatrix, tol: &Tolerance) -> bool {
    if p.nrows() != p.ncols() {
        return false;
    }
    let p2 = p * p;
    max_abs_diff(&p2, p) <= tol.abs_eps && max_abs_diff(&p.adjoint(), p) <= tol.abs_eps
}

/// True iff Hermitian, eigenvalues ≥ −abs_eps and trace 1 within tolerance.
pub fn is_density(r: &CMatrix, tol: &Tolerance) -> bool {
    if !is_hermitian(r, tol) {
        return false;
    }
    let tr = r.trace();
    if !tol.close(tr.re, 1.0) || tr.im.abs() > tol.abs_eps {
        return false;
    }
    hermitian_eigenvalues(r)
        .iter()
        .all(|&lambda| lambda >= -tol.abs_eps)
}

pub fn is_unitary(u: &CMatrix, tol: &Tolerance) -> bool {
    u.nrows() == u.ncols() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol.abs_eps
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE])
}

/// Outer product |v⟩⟨v| of a column vector with itself.
pub fn outer(v: &[Complex64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

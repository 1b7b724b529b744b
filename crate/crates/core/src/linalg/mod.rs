//! Dense complex linear algebra shared by the plant, synthesis and simulation
//! layers.
//!
//! Matrices are plain [`nalgebra::DMatrix`] values over [`Complex64`]; the
//! helpers here add the checked constructors, norms and structural predicates
//! the rest of the crate relies on. Factorizations are delegated to nalgebra
//! (LU, Hessenberg/Schur, bidiagonal SVD) and wrapped so that numerical
//! failures surface as [`LinalgError`] values instead of panics or `None`.

mod decomp;
mod eig;
mod expm;
mod solve;
mod sylvester;

pub use decomp::{operator_norm, pinv, rank, svd, PseudoInverse, SvdResult};
pub use eig::{eig, Spectrum};
pub use expm::{expm, expm_with_cap, EXPM_NORM_CAP};
pub use solve::solve_dense;
pub use sylvester::{sylvester_diag, sylvester_kron};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative rank tolerance used for pseudoinverses and rank tests.
pub const DEFAULT_RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{rows}x{cols} matrix needs {expected} entries, got {actual}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is numerically singular: pivot {pivot} has magnitude {magnitude:e}")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("exponent norm {norm:e} exceeds the cap {cap:e}")]
    Overflow { norm: f64, cap: f64 },
    #[error("i*omega = {omega}i (index {index}) is numerically an eigenvalue of the operator")]
    Resonance { index: usize, omega: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(LinalgError::EntryCount {
            rows,
            cols,
            expected: rows * cols,
            actual: entries.len(),
        });
    }
    let m = ComplexMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for (col, column) in m.column_iter().enumerate() {
        for (row, z) in column.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Lifts a real matrix into the complex field.
pub fn complexify(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Diagonal matrix with the given complex entries.
pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(entries))
}

/// `diag(i*omega_1, ..., i*omega_q)`.
pub fn imaginary_diag(omegas: &[f64]) -> ComplexMatrix {
    let entries: Vec<Complex64> = omegas.iter().map(|&w| Complex64::new(0.0, w)).collect();
    diag(&entries)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Frobenius norm.
pub fn fro_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn norm_two(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // The Frobenius norm bounds the spectral norm from above.
    operator_norm(m).map_or_else(|_| fro_norm(m), |(s, _)| s)
}

pub fn vec_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest imaginary-part modulus, used to assert that a complex-coded
/// real signal stayed real.
pub fn max_imag(v: &ComplexVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

/// Places `blocks` on the diagonal of a new matrix.
pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Assembles a 2x2 block matrix; blocks in each row/column must agree in size.
pub fn block2(
    a11: &ComplexMatrix,
    a12: &ComplexMatrix,
    a21: &ComplexMatrix,
    a22: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dim("block row 1", a11.nrows(), a12.nrows())?;
    check_dim("block row 2", a21.nrows(), a22.nrows())?;
    check_dim("block column 1", a11.ncols(), a21.ncols())?;
    check_dim("block column 2", a12.ncols(), a22.ncols())?;
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    let mut out = zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    Ok(out)
}

/// Stacks matrices vertically.
pub fn vstack(parts: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let mut rows = 0;
    for p in parts {
        check_dim("vstack columns", cols, p.ncols())?;
        rows += p.nrows();
    }
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    Ok(out)
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(LinalgError::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn row_major_construction_checks_shape_and_finiteness() {
        let m = from_row_major(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 1.0)])
            .unwrap();
        assert_eq!(m[(0, 1)], c(2.0, 0.0));
        assert_eq!(m[(1, 1)], c(4.0, 1.0));
        assert!(matches!(
            from_row_major(2, 2, &[c(1.0, 0.0)]),
            Err(LinalgError::EntryCount { .. })
        ));
        assert!(matches!(
            from_row_major(1, 2, &[c(1.0, 0.0), c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn block_assembly() {
        let a = identity(2);
        let b = zeros(2, 1);
        let cc = zeros(1, 2);
        let d = diag(&[c(5.0, 0.0)]);
        let m = block2(&a, &b, &cc, &d).unwrap();
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(m[(2, 2)], c(5.0, 0.0));
        assert!(block2(&a, &cc, &cc, &d).is_err());
        let bd = block_diag(&[&a, &d]);
        assert_eq!(bd, m);
    }
}

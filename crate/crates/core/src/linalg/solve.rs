use super::{check_dim, ensure_square, max_abs, ComplexMatrix, LinalgError, Result};

/// Pivots below `PIVOT_SCALE * n * eps * max|a_ij|` are treated as zero.
const PIVOT_SCALE: f64 = 64.0;

/// Solves `A X = B` by LU with partial pivoting.
///
/// A pivot that falls below the scale-aware threshold is reported as
/// [`LinalgError::Singular`]; in resolvent use this means the shift is
/// (numerically) an eigenvalue, and callers decide how to react.
pub fn solve_dense(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    check_dim("solve_dense right-hand side rows", n, b.nrows())?;
    if n == 0 {
        return Ok(b.clone());
    }
    let scale = max_abs(a);
    let threshold = PIVOT_SCALE * n as f64 * f64::EPSILON * scale;
    let lu = a.clone().lu();
    let u = lu.u();
    for (pivot, z) in u.diagonal().iter().enumerate() {
        let magnitude = z.norm();
        if magnitude <= threshold || scale == 0.0 {
            return Err(LinalgError::Singular { pivot, magnitude });
        }
    }
    lu.solve(b).ok_or(LinalgError::Singular {
        pivot: 0,
        magnitude: 0.0,
    })
}

use super::eig::schur;
use super::{ensure_square, fro_norm, identity, norm_one, solve_dense, ComplexMatrix, LinalgError, Result};

/// Default cap on `||A t||_1` beyond which [`expm`] refuses to evaluate.
pub const EXPM_NORM_CAP: f64 = 1e6;

/// Matrices with `||AA* - A*A||_F < NORMAL_RTOL ||A||_F^2` take the
/// eigendecomposition path.
const NORMAL_RTOL: f64 = 1e-12;

// Degree-13 Padé coefficients and the matching 1-norm bound.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{A t}`, capped at [`EXPM_NORM_CAP`].
pub fn expm(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    expm_with_cap(a, t, EXPM_NORM_CAP)
}

/// `e^{A t}` by eigendecomposition when `A` is normal, otherwise by
/// scaling-and-squaring with a degree-13 Padé approximant.
pub fn expm_with_cap(a: &ComplexMatrix, t: f64, cap: f64) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    if !t.is_finite() {
        return Err(LinalgError::Overflow { norm: f64::INFINITY, cap });
    }
    let at = a * num_complex::Complex64::from(t);
    let norm = norm_one(&at);
    if norm > cap {
        return Err(LinalgError::Overflow { norm, cap });
    }
    if n == 0 || norm == 0.0 {
        return Ok(identity(n));
    }
    if is_normal(&at) {
        return expm_normal(&at);
    }
    expm_pade(&at, norm)
}

fn is_normal(a: &ComplexMatrix) -> bool {
    let adj = a.adjoint();
    let commutator = a * &adj - &adj * a;
    let scale = fro_norm(a);
    fro_norm(&commutator) < NORMAL_RTOL * scale * scale
}

fn expm_normal(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    // For a normal matrix the Schur factor is diagonal up to rounding.
    let (q, t) = schur(a)?;
    let mut scaled = q.clone();
    for (j, lambda) in t.diagonal().iter().enumerate() {
        let mut column = scaled.column_mut(j);
        column *= lambda.exp();
    }
    Ok(scaled * q.adjoint())
}

fn expm_pade(a: &ComplexMatrix, norm: f64) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.unscale(2f64.powi(squarings));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);
    let mut r = solve_dense(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

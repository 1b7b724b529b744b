//! Pre-stabilized finite-dimensional plants.

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, ensure_square, identity, solve_dense, Complex64, ComplexMatrix, LinalgError,
};

/// A plant `ẋ = A x + B(R₁u + R₂w)`, `y = C x`, together with the static
/// output feedback `Q` that pre-stabilizes it: `A_s = A − B R₁ Q C`.
///
/// In this finite-dimensional setting the boundary input map is the bounded
/// matrix `B`, so the transfer function of the pre-stabilized plant is
/// `P₀(λ) = C(λ − A_s)⁻¹B` and `P_s(λ) = P₀(λ)R₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub q: ComplexMatrix,
    pub r1: ComplexMatrix,
    pub r2: ComplexMatrix,
    pub a_s: ComplexMatrix,
}

impl Plant {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        q: ComplexMatrix,
        r1: ComplexMatrix,
        r2: ComplexMatrix,
    ) -> Result<Self> {
        let n = ensure_square(&a)?;
        check_dim("B rows", n, b.nrows())?;
        check_dim("C columns", n, c.ncols())?;
        check_dim("R1 rows", b.ncols(), r1.nrows())?;
        check_dim("R2 rows", b.ncols(), r2.nrows())?;
        check_dim("Q rows", r1.ncols(), q.nrows())?;
        check_dim("Q columns", c.nrows(), q.ncols())?;
        let a_s = &a - &b * &r1 * &q * &c;
        Ok(Self {
            a,
            b,
            c,
            q,
            r1,
            r2,
            a_s,
        })
    }

    /// Plant with `R₁ = R₂ = I` and `Q = q·I` (square input/output spaces).
    pub fn collocated(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix, q: f64) -> Result<Self> {
        let m = b.ncols();
        check_dim("collocated input/output dimension", m, c.nrows())?;
        Self::new(a, b, c, identity(m) * Complex64::from(q), identity(m), identity(m))
    }

    /// Same plant with a different stabilizing feedback `Q`.
    pub fn with_feedback(&self, q: ComplexMatrix) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            q,
            self.r1.clone(),
            self.r2.clone(),
        )
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    /// Dimension of the control input `u` (columns of `R₁`).
    pub fn n_inputs(&self) -> usize {
        self.r1.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `(λ − A_s)⁻¹ rhs`, with a singular shift reported as resonance at
    /// frequency index `index`.
    pub fn resolvent(&self, lambda: Complex64, rhs: &ComplexMatrix, index: usize) -> Result<ComplexMatrix> {
        let shifted = identity(self.n_states()) * lambda - &self.a_s;
        solve_dense(&shifted, rhs).map_err(|e| match e {
            LinalgError::Singular { .. } => Error::Resonance {
                index,
                omega: lambda.im,
            },
            other => other.into(),
        })
    }

    /// `P₀(λ) = C(λ − A_s)⁻¹B`.
    pub fn p0(&self, lambda: Complex64) -> Result<ComplexMatrix> {
        Ok(&self.c * self.resolvent(lambda, &self.b, 0)?)
    }

    /// `P_s(λ) = P₀(λ)R₁`.
    pub fn ps(&self, lambda: Complex64) -> Result<ComplexMatrix> {
        Ok(self.p0(lambda)? * &self.r1)
    }

    /// `E_s = R₂E − R₁QF`.
    pub fn e_s(&self, e: &ComplexMatrix, f: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dim("E rows", self.r2.ncols(), e.nrows())?;
        check_dim("F rows", self.n_outputs(), f.nrows())?;
        check_dim("E/F columns", e.ncols(), f.ncols())?;
        Ok(&self.r2 * e - &self.r1 * &self.q * f)
    }
}

/// Transfer function of the pre-stabilized plant at `λ`: `P_s(λ)`.
pub fn eval_transfer(plant: &Plant, lambda: Complex64) -> Result<ComplexMatrix> {
    plant.ps(lambda)
}

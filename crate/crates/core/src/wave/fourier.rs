use std::f64::consts::PI;

use crate::linalg::{Complex64, ComplexMatrix, ComplexVector};

/// Angular parity of a basis function or mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Axisymmetric,
    Cos,
    Sin,
}

/// Orthonormal trigonometric basis of `L^2([0, 2π])` truncated at order `M`,
/// ordered `[1, cos θ, sin θ, …, cos Mθ, sin Mθ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierOutputBasis {
    pub max_order: usize,
}

impl FourierOutputBasis {
    pub fn new(max_order: usize) -> Self {
        Self { max_order }
    }

    pub fn dim(&self) -> usize {
        2 * self.max_order + 1
    }

    /// Position of `(order, parity)` in the coefficient vector.
    pub fn index(order: usize, parity: Parity) -> usize {
        match parity {
            Parity::Axisymmetric => 0,
            Parity::Cos => 2 * order - 1,
            Parity::Sin => 2 * order,
        }
    }

    /// Inverse of [`FourierOutputBasis::index`].
    pub fn label(index: usize) -> (usize, Parity) {
        if index == 0 {
            (0, Parity::Axisymmetric)
        } else if index % 2 == 1 {
            (index.div_ceil(2), Parity::Cos)
        } else {
            (index / 2, Parity::Sin)
        }
    }

    /// Value of basis function `index` at angle `theta`.
    pub fn eval(index: usize, theta: f64) -> f64 {
        let (order, parity) = Self::label(index);
        let m = order as f64;
        match parity {
            Parity::Axisymmetric => 1.0 / (2.0 * PI).sqrt(),
            Parity::Cos => (m * theta).cos() / PI.sqrt(),
            Parity::Sin => (m * theta).sin() / PI.sqrt(),
        }
    }

    /// Real profile represented by coefficient vector `coeffs` (real parts).
    pub fn synthesize(&self, coeffs: &ComplexVector, theta: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c.re * Self::eval(l, theta))
            .sum()
    }

    /// Orthogonal projection onto `Y_N = span{1, cos kθ, sin kθ : k ≤ N}`,
    /// as a `dim × dim` matrix in coefficient space.
    pub fn projection(&self, n: usize) -> ComplexMatrix {
        let keep = (2 * n + 1).min(self.dim());
        ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j && i < keep {
                Complex64::from(1.0)
            } else {
                Complex64::from(0.0)
            }
        })
    }

    /// Coordinate map `Y → Y_N` (the first `2N+1` coefficients).
    pub fn selection(&self, n: usize) -> ComplexMatrix {
        let keep = (2 * n + 1).min(self.dim());
        ComplexMatrix::from_fn(keep, self.dim(), |i, j| {
            Complex64::from(if i == j { 1.0 } else { 0.0 })
        })
    }
}

/// Uniform periodic grid `θ_j = 2πj / n`.
pub fn angular_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Fourier coefficients of a real profile sampled on [`angular_grid`], by the
/// periodic trapezoid rule. Exact for trigonometric polynomials of order
/// below `n/2`.
pub fn project_profile(samples: &[f64], max_order: usize) -> ComplexVector {
    let basis = FourierOutputBasis::new(max_order);
    let n = samples.len();
    let h = 2.0 * PI / n as f64;
    let grid = angular_grid(n);
    ComplexVector::from_fn(basis.dim(), |l, _| {
        let s: f64 = samples
            .iter()
            .zip(&grid)
            .map(|(f, &t)| f * FourierOutputBasis::eval(l, t))
            .sum();
        Complex64::from(h * s)
    })
}

/// Samples `f` on an `n`-point grid and projects it.
pub fn project_fn(f: impl Fn(f64) -> f64, n: usize, max_order: usize) -> ComplexVector {
    let samples: Vec<f64> = angular_grid(n).into_iter().map(f).collect();
    project_profile(&samples, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_norm, identity, vec_norm};

    #[test]
    fn index_label_roundtrip() {
        assert_eq!(FourierOutputBasis::index(0, Parity::Axisymmetric), 0);
        assert_eq!(FourierOutputBasis::index(1, Parity::Cos), 1);
        assert_eq!(FourierOutputBasis::index(1, Parity::Sin), 2);
        assert_eq!(FourierOutputBasis::index(11, Parity::Sin), 22);
        for l in 0..23 {
            let (m, p) = FourierOutputBasis::label(l);
            assert_eq!(FourierOutputBasis::index(m, p), l);
        }
    }

    #[test]
    fn constant_profile() {
        let c = project_fn(|_| 1.0, 512, 11);
        assert!((c[0].re - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn single_cosine() {
        let c = project_fn(|t| (3.0 * t).cos(), 512, 11);
        for (l, z) in c.iter().enumerate() {
            let expected = if l == FourierOutputBasis::index(3, Parity::Cos) { PI.sqrt() } else { 0.0 };
            assert!((z.re - expected).abs() < 1e-12 && z.im == 0.0);
        }
    }

    #[test]
    fn quadratic_matches_analytic_series() {
        // (π − θ)² = π²/3 + Σ 4 cos(kθ)/k² on [0, 2π].
        let c = project_fn(|t| (PI - t).powi(2), 8192, 11);
        assert!((c[0].re - PI * PI / 3.0 * (2.0 * PI).sqrt()).abs() < 1e-6);
        for k in 1..=11 {
            let cos = c[FourierOutputBasis::index(k, Parity::Cos)].re;
            let sin = c[FourierOutputBasis::index(k, Parity::Sin)].re;
            assert!((cos - 4.0 * PI.sqrt() / (k * k) as f64).abs() < 1e-6, "k={k}");
            assert!(sin.abs() < 1e-6);
        }
    }

    #[test]
    fn basis_is_orthonormal_under_trapezoid_rule() {
        let n = 512;
        let basis = FourierOutputBasis::new(11);
        let gram = ComplexMatrix::from_fn(basis.dim(), basis.dim(), |i, j| {
            let s: f64 = angular_grid(n)
                .iter()
                .map(|&t| FourierOutputBasis::eval(i, t) * FourierOutputBasis::eval(j, t))
                .sum();
            Complex64::from(2.0 * PI / n as f64 * s)
        });
        assert!(fro_norm(&(gram - identity(basis.dim()))) < 1e-12);
    }

    #[test]
    fn synthesis_inverts_projection_for_band_limited_profiles() {
        let f = |t: f64| 0.3 + (2.0 * t).sin() - 0.7 * (5.0 * t).cos();
        let basis = FourierOutputBasis::new(11);
        let c = project_fn(f, 256, 11);
        for t in [0.0, 0.4, 2.2, 5.9] {
            assert!((basis.synthesize(&c, t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_and_selection() {
        let basis = FourierOutputBasis::new(11);
        let p = basis.projection(5);
        let s = basis.selection(5);
        assert_eq!(s.shape(), (11, 23));
        assert!(fro_norm(&(&p * &p - &p)) == 0.0);
        assert!(fro_norm(&(s.adjoint() * &s - &p)) == 0.0);
        assert!(fro_norm(&(&s * s.adjoint() - identity(11))) == 0.0);
        let v = ComplexVector::from_element(23, Complex64::from(1.0));
        assert!((vec_norm(&(&p * v)) - 11f64.sqrt()).abs() < 1e-15);
        assert_eq!(basis.projection(11), identity(23));
    }
}

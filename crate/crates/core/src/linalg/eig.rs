use nalgebra::Schur;

use super::{ensure_square, Complex64, ComplexMatrix, LinalgError, Result};

const SCHUR_MAX_ITER_PER_DIM: usize = 100;

/// Eigenvalues of a square matrix and its spectral abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `max Re(lambda)`; `-inf` for the empty matrix.
    pub abscissa: f64,
}

impl Spectrum {
    pub(crate) fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Self {
        let abscissa = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            eigenvalues,
            abscissa,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `|Im(lambda)|`-normalized real part, i.e. the largest distance
    /// of any eigenvalue from the imaginary axis.
    pub fn max_abs_real(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, z| acc.max(z.re.abs()))
    }

    /// Multiset distance: each eigenvalue is paired greedily with its nearest
    /// unused counterpart and the largest pair distance is returned
    /// (`inf` when the sizes differ).
    pub fn distance(&self, other: &Spectrum) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let mut remaining = other.eigenvalues.clone();
        let mut worst = 0.0f64;
        for z in &self.eigenvalues {
            let (idx, d) = remaining
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (z - w).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("sizes checked above");
            worst = worst.max(d);
            remaining.swap_remove(idx);
        }
        worst
    }

    /// Eigenvalues sorted by (real, imaginary) part, for multiset comparisons.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }
}

/// Complex Schur form `A = Q T Q*` with `T` upper triangular.
pub(crate) fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = ensure_square(a)?;
    let decomposition = Schur::try_new(
        a.clone(),
        f64::EPSILON,
        SCHUR_MAX_ITER_PER_DIM * n.max(10),
    )
    .ok_or(LinalgError::NoConvergence("Schur eigenvalue iteration"))?;
    Ok(decomposition.unpack())
}

/// Eigenvalues via the complex Schur form.
pub fn eig(a: &ComplexMatrix) -> Result<Spectrum> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(Spectrum::from_eigenvalues(Vec::new()));
    }
    let (_, t) = schur(a)?;
    Ok(Spectrum::from_eigenvalues(t.diagonal().iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, identity, svd};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multiset_distance() {
        let a = Spectrum::from_eigenvalues(vec![c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 3.0)]);
        let b = Spectrum::from_eigenvalues(vec![c(-2.0, 3.0), c(1.0, 1e-9), c(1.0, 0.0)]);
        assert!(a.distance(&b) <= 1e-9 && a.distance(&b) > 0.0);
        let c3 = Spectrum::from_eigenvalues(vec![c(1.0, 0.0), c(-2.0, 3.0), c(-2.0, 3.0)]);
        assert!(a.distance(&c3) > 1.0);
        assert_eq!(a.distance(&Spectrum::from_eigenvalues(vec![c(1.0, 0.0)])), f64::INFINITY);
    }

    fn contains(spectrum: &Spectrum, z: Complex64, tol: f64) -> bool {
        spectrum.eigenvalues.iter().any(|w| (w - z).norm() < tol)
    }

    #[test]
    fn diagonal_spectrum() {
        let s = eig(&diag(&[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)])).unwrap();
        assert_eq!(s.len(), 3);
        for z in [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)] {
            assert!(contains(&s, z, 1e-14));
        }
        assert_eq!(s.abscissa, 1.0);
    }

    #[test]
    fn companion_of_z_squared_plus_one() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let s = eig(&a).unwrap();
        assert!(contains(&s, c(0.0, 1.0), 1e-12));
        assert!(contains(&s, c(0.0, -1.0), 1e-12));
        assert!(s.abscissa.abs() < 1e-12);
    }

    #[test]
    fn random_trace_identity_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let n = 50;
        let a = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let s = eig(&a).unwrap();
        assert_eq!(s.len(), n);
        let sum: Complex64 = s.eigenvalues.iter().sum();
        let trace = a.trace();
        assert!((sum - trace).norm() <= 1e-8 * trace.norm().max(1.0));
        // min_v |(A - lambda) v| for unit v is the smallest singular value.
        let norm_a = svd(&a).unwrap().sigma_max();
        for &lambda in s.eigenvalues.iter().take(10) {
            let shifted = &a - identity(n) * lambda;
            let smin = *svd(&shifted).unwrap().singular_values.last().unwrap();
            assert!(smin <= 1e-8 * norm_a, "residual {smin:e}");
        }
        let max_re = s.eigenvalues.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        assert_eq!(s.abscissa, max_re);
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            eig(&ComplexMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }
}

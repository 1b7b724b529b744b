use nalgebra::SVD;

use super::{ComplexMatrix, ComplexVector, LinalgError, Result};

const SVD_MAX_ITER_PER_DIM: usize = 200;

/// Thin singular value decomposition `A = U diag(s) V*`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `m x k` left singular vectors, `k = min(m, n)`.
    pub u: ComplexMatrix,
    /// `n x k` right singular vectors.
    pub v: ComplexMatrix,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rtol * sigma_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cutoff = rtol * self.sigma_max();
        self.singular_values
            .iter()
            .filter(|&&s| s > cutoff && s > 0.0)
            .count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdResult {
            singular_values: Vec::new(),
            u: ComplexMatrix::zeros(m, 0),
            v: ComplexMatrix::zeros(n, 0),
        });
    }
    let decomposition = SVD::try_new(
        a.clone(),
        true,
        true,
        f64::EPSILON,
        SVD_MAX_ITER_PER_DIM * k.max(8),
    )
    .ok_or(LinalgError::NoConvergence("singular value decomposition"))?;
    let u = decomposition
        .u
        .ok_or(LinalgError::NoConvergence("singular value decomposition"))?;
    let v = decomposition
        .v_t
        .ok_or(LinalgError::NoConvergence("singular value decomposition"))?
        .adjoint();
    Ok(SvdResult {
        singular_values: decomposition.singular_values.iter().copied().collect(),
        u,
        v,
    })
}

/// Moore–Penrose pseudoinverse together with the effective rank it used.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: ComplexMatrix,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Pseudoinverse with singular values below `rtol * sigma_max` dropped.
///
/// For a surjective `A` this is the minimum-norm right inverse.
pub fn pinv(a: &ComplexMatrix, rtol: f64) -> Result<PseudoInverse> {
    let decomposition = svd(a)?;
    let rank = decomposition.rank(rtol);
    let (m, n) = a.shape();
    let mut matrix = ComplexMatrix::zeros(n, m);
    for j in 0..rank {
        let s = decomposition.singular_values[j];
        let vj = decomposition.v.column(j);
        let uj = decomposition.u.column(j);
        matrix += (vj * uj.adjoint()).unscale(s);
    }
    Ok(PseudoInverse {
        matrix,
        rank,
        singular_values: decomposition.singular_values,
    })
}

pub fn rank(a: &ComplexMatrix, rtol: f64) -> Result<usize> {
    Ok(svd(a)?.rank(rtol))
}

/// Largest singular value and a unit right singular vector attaining it.
pub fn operator_norm(a: &ComplexMatrix) -> Result<(f64, ComplexVector)> {
    let n = a.ncols();
    let decomposition = svd(a)?;
    if decomposition.singular_values.is_empty() || decomposition.sigma_max() == 0.0 {
        let mut e1 = ComplexVector::zeros(n);
        if n > 0 {
            e1[0] = 1.0.into();
        }
        return Ok((0.0, e1));
    }
    Ok((
        decomposition.sigma_max(),
        decomposition.v.column(0).into_owned(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, fro_norm, identity, vec_norm, Complex64, DEFAULT_RANK_RTOL};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, r: usize, c: usize) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn singular_values_sorted_and_reconstruct() {
        let a = random(3, 7, 5);
        let s = svd(&a).unwrap();
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        let err = fro_norm(&(s.reconstruct() - &a));
        assert!(err <= 1e-12 * s.sigma_max(), "reconstruction error {err:e}");
    }

    #[test]
    fn pinv_of_rank_deficient_diagonal() {
        let a = diag(&[re(2.0), re(0.0)]);
        let p = pinv(&a, DEFAULT_RANK_RTOL).unwrap();
        assert_eq!(p.rank, 1);
        assert!(fro_norm(&(p.matrix - diag(&[re(0.5), re(0.0)]))) < 1e-15);
    }

    #[test]
    fn pinv_of_row_is_min_norm_right_inverse() {
        let a = ComplexMatrix::from_row_slice(1, 2, &[re(1.0), re(1.0)]);
        let p = pinv(&a, DEFAULT_RANK_RTOL).unwrap();
        let expected = ComplexMatrix::from_column_slice(2, 1, &[re(0.5), re(0.5)]);
        assert!(fro_norm(&(p.matrix - expected)) < 1e-15);
    }

    #[test]
    fn pinv_right_inverse_of_wide_full_rank() {
        let a = random(11, 5, 9);
        let p = pinv(&a, DEFAULT_RANK_RTOL).unwrap();
        assert_eq!(p.rank, 5);
        assert!(fro_norm(&(&a * &p.matrix - identity(5))) < 1e-10);
    }

    #[test]
    fn operator_norm_examples() {
        let (s, v) = operator_norm(&diag(&[re(3.0), re(1.0)])).unwrap();
        assert!((s - 3.0).abs() < 1e-14);
        assert!((v[0].norm() - 1.0).abs() < 1e-14 && v[1].norm() < 1e-14);

        let col = ComplexMatrix::from_column_slice(3, 1, &[re(3.0), re(0.0), re(4.0)]);
        let (s, _) = operator_norm(&col).unwrap();
        assert!((s - 5.0).abs() < 1e-14);

        let a = random(5, 6, 4);
        let (s, v) = operator_norm(&a).unwrap();
        assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
        assert!((vec_norm(&(&a * &v)) - s).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_norm() {
        let (s, v) = operator_norm(&ComplexMatrix::zeros(2, 3)).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(v.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pinv_penrose_identity(seed in 0u64..10_000, m in 1usize..8, n in 1usize..8) {
            let a = random(seed, m, n);
            let p = pinv(&a, DEFAULT_RANK_RTOL).unwrap();
            let apa = &a * &p.matrix * &a;
            prop_assert!(fro_norm(&(apa - &a)) <= 1e-9 * fro_norm(&a));
        }
    }
}

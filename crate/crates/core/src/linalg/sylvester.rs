use super::{
    check_dim, ensure_square, identity, solve_dense, Complex64, ComplexMatrix, LinalgError, Result,
};

fn check_inputs(ae: &ComplexMatrix, be: &ComplexMatrix, omegas: &[f64]) -> Result<usize> {
    let n = ensure_square(ae)?;
    check_dim("Sylvester right-hand side rows", n, be.nrows())?;
    check_dim("Sylvester frequency count", be.ncols(), omegas.len())?;
    Ok(n)
}

fn resonance(index: usize, omega: f64, err: LinalgError) -> LinalgError {
    match err {
        LinalgError::Singular { .. } => LinalgError::Resonance { index, omega },
        other => other,
    }
}

/// Solves `Sigma S = Ae Sigma + Be` for `S = diag(i*omega_k)` one column at a
/// time: `(i*omega_k - Ae) Sigma e_k = Be e_k`.
pub fn sylvester_diag(ae: &ComplexMatrix, be: &ComplexMatrix, omegas: &[f64]) -> Result<ComplexMatrix> {
    let n = check_inputs(ae, be, omegas)?;
    let mut sigma = ComplexMatrix::zeros(n, omegas.len());
    if n == 0 {
        return Ok(sigma);
    }
    for (k, &omega) in omegas.iter().enumerate() {
        let shifted = identity(n) * Complex64::new(0.0, omega) - ae;
        let rhs = be.column(k).into_owned();
        let col = solve_dense(&shifted, &ComplexMatrix::from_column_slice(n, 1, rhs.as_slice()))
            .map_err(|e| resonance(k, omega, e))?;
        sigma.set_column(k, &col.column(0));
    }
    Ok(sigma)
}

/// Brute-force oracle: solves `(S^T ⊗ I - I ⊗ Ae) vec(Sigma) = vec(Be)` as one
/// dense system of size `n q`. Only meant for small instances.
pub fn sylvester_kron(ae: &ComplexMatrix, be: &ComplexMatrix, omegas: &[f64]) -> Result<ComplexMatrix> {
    let n = check_inputs(ae, be, omegas)?;
    let q = omegas.len();
    if n == 0 || q == 0 {
        return Ok(ComplexMatrix::zeros(n, q));
    }
    let dim = n * q;
    let mut big = ComplexMatrix::zeros(dim, dim);
    for (k, &omega) in omegas.iter().enumerate() {
        let off = k * n;
        for i in 0..n {
            big[(off + i, off + i)] += Complex64::new(0.0, omega);
            for j in 0..n {
                big[(off + i, off + j)] -= ae[(i, j)];
            }
        }
    }
    // Column-major storage makes `vec` a plain reshape.
    let rhs = ComplexMatrix::from_column_slice(dim, 1, be.as_slice());
    let x = solve_dense(&big, &rhs).map_err(|e| {
        let k = match e {
            LinalgError::Singular { pivot, .. } => pivot / n,
            _ => 0,
        };
        resonance(k.min(q - 1), omegas[k.min(q - 1)], e)
    })?;
    Ok(ComplexMatrix::from_column_slice(n, q, x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, fro_norm, imaginary_diag, norm_two};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    /// Random matrix shifted left so that its spectrum avoids the imaginary axis.
    fn stable(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        random(rng, n, n) - identity(n) * Complex64::from(n as f64)
    }

    fn residual(ae: &ComplexMatrix, be: &ComplexMatrix, omegas: &[f64], sigma: &ComplexMatrix) -> f64 {
        norm_two(&(sigma * imaginary_diag(omegas) - ae * sigma - be))
    }

    #[test]
    fn scalar_formula() {
        let (a, b, w) = (Complex64::new(-0.7, 0.2), Complex64::new(1.3, -0.4), 2.5);
        let expected = b / (Complex64::new(0.0, w) - a);
        let ae = diag(&[a]);
        let be = diag(&[b]);
        for sigma in [
            sylvester_diag(&ae, &be, &[w]).unwrap(),
            sylvester_kron(&ae, &be, &[w]).unwrap(),
        ] {
            assert!((sigma[(0, 0)] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn minus_identity_at_zero_frequency() {
        let sigma = sylvester_diag(&(-identity(1)), &identity(1), &[0.0]).unwrap();
        assert!((sigma[(0, 0)] - Complex64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_ae_entrywise_division() {
        let a = [Complex64::new(-1.0, 0.0), Complex64::new(-3.0, 1.0)];
        let omegas = [1.0, -2.0, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let be = random(&mut rng, 2, 3);
        let sigma = sylvester_kron(&diag(&a), &be, &omegas).unwrap();
        for i in 0..2 {
            for (k, w) in omegas.iter().enumerate() {
                let expected = be[(i, k)] / (Complex64::new(0.0, *w) - a[i]);
                assert!((sigma[(i, k)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_stable_residual_and_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ae = stable(&mut rng, 12);
        let be = random(&mut rng, 12, 3);
        let omegas = [-1.0, 0.5, 3.0];
        let s1 = sylvester_diag(&ae, &be, &omegas).unwrap();
        let s2 = sylvester_kron(&ae, &be, &omegas).unwrap();
        assert!(fro_norm(&(&s1 - &s2)) <= 1e-10 * fro_norm(&s1));
        let bound = 1e-8 * (norm_two(&ae) * norm_two(&s1) + norm_two(&be));
        assert!(residual(&ae, &be, &omegas, &s1) <= bound);
    }

    #[test]
    fn resonance_is_reported() {
        let pi = std::f64::consts::PI;
        let ae = ComplexMatrix::from_row_slice(
            2,
            2,
            &[0.0.into(), pi.into(), (-pi).into(), 0.0.into()],
        );
        let be = ComplexMatrix::from_element(2, 2, Complex64::from(1.0));
        assert!(matches!(
            sylvester_diag(&ae, &be, &[0.0, pi]),
            Err(LinalgError::Resonance { index: 1, .. })
        ));
        assert!(matches!(
            sylvester_kron(&ae, &be, &[0.0, pi]),
            Err(LinalgError::Resonance { .. })
        ));
    }

    #[test]
    fn frequency_count_must_match_columns() {
        assert!(matches!(
            sylvester_diag(&(-identity(2)), &identity(2), &[1.0]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solvers_agree_on_small_instances(seed in 0u64..10_000, n in 1usize..=20, q in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ae = stable(&mut rng, n);
            let be = random(&mut rng, n, q);
            let omegas: Vec<f64> = (0..q).map(|k| k as f64 * 1.3 - 2.0).collect();
            let s1 = sylvester_diag(&ae, &be, &omegas).unwrap();
            let s2 = sylvester_kron(&ae, &be, &omegas).unwrap();
            prop_assert!(fro_norm(&(&s1 - &s2)) <= 1e-10 * fro_norm(&s1).max(1e-300));
        }
    }
}

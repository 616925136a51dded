use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Thin QR factorization `a = q · r` by Householder reflections.
///
/// `q` is `m×n` with orthonormal columns and `r` is `n×n` upper-triangular
/// with a real, strictly positive diagonal. Fails when `a` has more columns
/// than rows or any `|r_kk| < 1e-12·‖a‖_F`.
pub fn qr_decompose(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let tol = 1e-12 * a.frobenius_norm();
    let mut work = a.clone();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);

    for k in 0..n {
        let x: Vec<Complex64> = (k..m).map(|i| work[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= tol {
            return Err(Error::SingularChannel(format!(
                "column {k} is numerically dependent (|r_kk| = {norm:e})"
            )));
        }
        // alpha = -e^{i arg x0}·‖x‖ keeps v0 = x0 - alpha free of cancellation.
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            apply_reflector(&mut work, &v, vnorm2, k, k..n);
        }
        reflectors.push(v);
    }

    // Accumulate q = H_0 H_1 … H_{n-1} applied to the first n columns of I.
    let mut q = ComplexMatrix::zeros(m, n);
    for i in 0..n {
        q[(i, i)] = Complex64::new(1.0, 0.0);
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            apply_reflector(&mut q, v, vnorm2, k, k..n);
        }
    }

    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = work[(i, j)];
        }
    }

    // Force a real positive diagonal: row k of r by conj(p), column k of q by p.
    for k in 0..n {
        let d = r[(k, k)];
        let mag = d.norm();
        let p = d / mag;
        for j in k..n {
            r[(k, j)] *= p.conj();
        }
        r[(k, k)] = Complex64::new(mag, 0.0);
        for i in 0..m {
            q[(i, k)] *= p;
        }
    }
    Ok((q, r))
}

/// `a[k.., cols] ← (I − 2 v vᴴ / vᴴv) · a[k.., cols]`.
fn apply_reflector(
    a: &mut ComplexMatrix,
    v: &[Complex64],
    vnorm2: f64,
    k: usize,
    cols: std::ops::Range<usize>,
) {
    for j in cols {
        let dot: Complex64 = v
            .iter()
            .enumerate()
            .map(|(i, vi)| vi.conj() * a[(k + i, j)])
            .sum();
        let f = dot * (2.0 / vnorm2);
        for (i, vi) in v.iter().enumerate() {
            a[(k + i, j)] -= vi * f;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn check_qr(a: &ComplexMatrix) {
        let (q, r) = qr_decompose(a).unwrap();
        assert!(q.unitarity_deviation() <= 1e-12, "qᴴq deviates");
        assert!(r.is_upper_triangular());
        for d in r.diagonal() {
            assert_eq!(d.im, 0.0);
            assert!(d.re > 0.0);
        }
        let err = q.matmul(&r).unwrap().relative_error(a).unwrap();
        assert!(err <= 1e-12, "reconstruction error {err:e}");
    }

    #[test]
    fn identity_gives_identity_factors() {
        let (q, r) = qr_decompose(&ComplexMatrix::identity(4)).unwrap();
        assert!(q.sub(&ComplexMatrix::identity(4)).unwrap().max_abs() < 1e-15);
        assert!(r.sub(&ComplexMatrix::identity(4)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn triangular_input_is_returned() {
        let a = ComplexMatrix::from_real_diagonal(&[2.0, 3.0]);
        let (q, r) = qr_decompose(&a).unwrap();
        assert!(q.sub(&ComplexMatrix::identity(2)).unwrap().max_abs() < 1e-15);
        assert!(r.sub(&a).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn tall_matrix() {
        check_qr(&random_matrix(9, 4, 11));
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(qr_decompose(&a), Err(Error::SingularChannel(_))));
        assert!(qr_decompose(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_7x7_qr_invariants(seed in any::<u64>()) {
            check_qr(&random_matrix(7, 7, seed));
        }
    }
}

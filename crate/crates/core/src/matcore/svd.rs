use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::Result;

const MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `a = u · diag(sigma) · vᴴ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m×n` with orthonormal columns (`n = min(rows, cols)`).
    pub u: ComplexMatrix,
    /// Nonnegative, sorted in descending order.
    pub sigma: Vec<f64>,
    /// `cols×n` with orthonormal columns.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            for i in 0..us.rows() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.conj_transpose())
            .expect("svd factor shapes agree")
    }
}

/// Full (thin) SVD by one-sided Jacobi rotations.
///
/// Zero singular values are allowed; the matching columns of `u` are
/// completed to an orthonormal set so that `u` stays semi-unitary.
pub fn svd_full(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_full(&a.conj_transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (m, n) = (a.rows(), a.cols());
    // Columns of `work` converge to u_j·σ_j while `v` accumulates the rotations.
    let mut work = a.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (work[(i, p)], work[(i, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Remove the phase of gamma, then a real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let block = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [-phase.conj() * s, phase.conj() * c],
                ];
                work.rotate_columns(p, q, &block, 0..m);
                v.rotate_columns(p, q, &block, 0..n);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| work[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let tiny = scale * (m as f64) * f64::EPSILON;
    let mut u = ComplexMatrix::zeros(m, n);
    let mut sigma = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (j, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > tiny {
            for i in 0..m {
                u[(i, j)] = work[(i, src)] / s;
            }
            sigma.push(s);
        } else {
            sigma.push(0.0);
            missing.push(j);
        }
    }
    complete_orthonormal(&mut u, &missing);
    let v = v.permute_columns(&order);
    Ok(Svd { u, sigma, v })
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to
/// every other column, drawing candidates from the standard basis.
fn complete_orthonormal(u: &mut ComplexMatrix, missing: &[usize]) {
    let m = u.rows();
    let mut candidate = 0;
    for &j in missing {
        loop {
            assert!(candidate < m, "standard basis exhausted while completing u");
            let mut x = vec![Complex64::new(0.0, 0.0); m];
            x[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            // Two passes of Gram-Schmidt against the filled columns.
            for _ in 0..2 {
                for k in 0..u.cols() {
                    if k == j || missing.contains(&k) && k > j {
                        continue;
                    }
                    let dot: Complex64 = (0..m).map(|i| u[(i, k)].conj() * x[i]).sum();
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi -= u[(i, k)] * dot;
                    }
                }
            }
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for (i, xi) in x.iter().enumerate() {
                    u[(i, j)] = xi / norm;
                }
                break;
            }
        }
    }
}

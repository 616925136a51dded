use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// SVD of a 2×2 upper-triangular block: `r = u · diag(sigma1, sigma2) · vᴴ`.
#[derive(Debug, Clone)]
pub struct Svd2x2 {
    pub u: [[Complex64; 2]; 2],
    pub sigma1: f64,
    pub sigma2: f64,
    pub v: [[Complex64; 2]; 2],
}

impl Svd2x2 {
    pub fn u_matrix(&self) -> ComplexMatrix {
        block_to_matrix(&self.u)
    }

    pub fn v_matrix(&self) -> ComplexMatrix {
        block_to_matrix(&self.v)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u_matrix();
        for i in 0..2 {
            us[(i, 0)] *= self.sigma1;
            us[(i, 1)] *= self.sigma2;
        }
        us.matmul(&self.v_matrix().conj_transpose())
            .expect("2x2 shapes agree")
    }
}

pub(crate) fn block_to_matrix(b: &[[Complex64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[b[0], b[1]]).expect("2x2 block is finite")
}

/// Closed-form SVD of `[[a, b], [0, d]]` with `a, d` real positive and `b`
/// complex.
///
/// The off-diagonal phase `e^{iφ}` is moved out with `diag(1, e^{iφ})` on the
/// left and `diag(1, e^{-iφ})` on the right, leaving a real triangle whose
/// SVD is two plane rotations. The phases are folded back into `u` and `v`,
/// so both are a diagonal phase times a real rotation and exactly unitary.
pub fn svd_2x2_upper(r: &ComplexMatrix) -> Result<Svd2x2> {
    if r.rows() != 2 || r.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2x2 block, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    if r[(1, 0)] != Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition(
            "2x2 block is not upper-triangular".into(),
        ));
    }
    let (a, d) = (r[(0, 0)], r[(1, 1)]);
    if a.im != 0.0
        || d.im != 0.0
        || !(a.re.is_finite() && a.re > 0.0 && d.re.is_finite() && d.re > 0.0)
    {
        return Err(Error::Precondition(
            "2x2 block diagonal must be real and strictly positive".into(),
        ));
    }
    Ok(svd_2x2_parts(a.re, r[(0, 1)], d.re))
}

/// Unchecked core of [`svd_2x2_upper`].
pub(crate) fn svd_2x2_parts(a: f64, b: Complex64, d: f64) -> Svd2x2 {
    let babs = b.norm();
    let phase = if babs > 0.0 {
        b / babs
    } else {
        Complex64::new(1.0, 0.0)
    };

    // Real block [[a, babs], [0, d]] = Rot(phi) diag(sx, sy) Rot(theta).
    let e = 0.5 * (a + d);
    let f = 0.5 * (a - d);
    let g = 0.5 * babs;
    let h = -0.5 * babs;
    let qn = e.hypot(h);
    let rn = f.hypot(g);
    let sigma1 = qn + rn;
    // a·d is the exact determinant; dividing avoids cancellation in qn − rn.
    let sigma2 = (a * d / sigma1).min(sigma1);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();

    // U = diag(1, e^{-iφ_b})·Rot(phi), V = diag(1, e^{-iφ_b})·Rot(theta)ᵀ.
    let pc = phase.conj();
    let re = |x: f64| Complex64::new(x, 0.0);
    let u = [[re(cp), re(-sp)], [pc * sp, pc * cp]];
    let v = [[re(ct), re(st)], [-pc * st, pc * ct]];
    Svd2x2 {
        u,
        sigma1,
        sigma2,
        v,
    }
}

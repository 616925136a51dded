//! Starting decompositions `H = Q R Sᴴ` for the iteration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::engine::DecompositionTriple;
use crate::error::{Error, Result};
use crate::matcore::{qr_decompose, svd_full, ComplexMatrix};

/// Which orthogonal decomposition seeds the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitKind {
    /// SVD with singular values in descending order.
    PlainSvd,
    /// SVD with singular values reordered largest, smallest, second largest, ...
    InterleavedSvd,
    /// QR of `H` in its natural column order.
    PlainQr,
    /// QR of `H` with columns in VBLAST detection order.
    VblastQr,
}

impl InitKind {
    pub const ALL: [InitKind; 4] = [
        InitKind::PlainSvd,
        InitKind::InterleavedSvd,
        InitKind::PlainQr,
        InitKind::VblastQr,
    ];

    /// CLI / CSV spelling.
    pub fn name(self) -> &'static str {
        match self {
            InitKind::PlainSvd => "svd",
            InitKind::InterleavedSvd => "intrlv-svd",
            InitKind::PlainQr => "qr",
            InitKind::VblastQr => "vbqr",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        InitKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown init `{s}` (expected svd, intrlv-svd, qr or vbqr)"
                ))
            })
    }
}

/// Alternating order `0, k−1, 1, k−2, ...` over indices of the descending
/// singular values. `[0, 6, 1, 5, 2, 4, 3]` for `k = 7`.
pub fn interleave_permutation(k: usize) -> Vec<usize> {
    let (mut lo, mut hi) = (0usize, k);
    let mut out = Vec::with_capacity(k);
    while lo < hi {
        out.push(lo);
        lo += 1;
        if lo < hi {
            hi -= 1;
            out.push(hi);
        }
    }
    out
}

/// VBLAST detection ordering as a column permutation.
///
/// Positions are filled from the last (detected first) to the first. At each
/// step the remaining column whose zero-forcing nulling vector (row of the
/// pseudo-inverse of the remaining columns) has the smallest norm takes the
/// current last free position. The result satisfies: column `j` of `h·Π` is
/// column `perm[j]` of `h`. Ties go to the lowest column index.
pub fn vblast_order(h: &ComplexMatrix) -> Result<Vec<usize>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "VBLAST ordering expects a square channel, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let k = h.cols();
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut perm = vec![0; k];
    for pos in (0..k).rev() {
        let sub = h.permute_columns_subset(&remaining);
        let (_, r) = qr_decompose(&sub)?;
        let norms = inverse_row_norms(&r);
        let best = norms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("remaining columns are never empty here");
        perm[pos] = remaining.remove(best);
    }
    Ok(perm)
}

/// Squared row norms of `r⁻¹` for upper-triangular `r`, i.e. the diagonal of
/// `(AᴴA)⁻¹` when `A = QR`.
fn inverse_row_norms(r: &ComplexMatrix) -> Vec<f64> {
    let n = r.rows();
    let mut norms = vec![0.0; n];
    // Solve r·x = e_j for each column j of the inverse.
    for j in 0..n {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..=j).rev() {
            let mut acc = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for l in i + 1..=j {
                acc -= r[(i, l)] * x[l];
            }
            x[i] = acc / r[(i, i)];
            norms[i] += x[i].norm_sqr();
        }
    }
    norms
}

impl ComplexMatrix {
    /// Matrix formed by the listed columns, in order.
    pub(crate) fn permute_columns_subset(&self, cols: &[usize]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows(), cols.len());
        for i in 0..self.rows() {
            for (j, &c) in cols.iter().enumerate() {
                out[(i, j)] = self[(i, c)];
            }
        }
        out
    }
}

/// Initial decomposition of a square, full-rank `h` under `kind`.
pub fn init_decompose(h: &ComplexMatrix, kind: InitKind) -> Result<DecompositionTriple> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "initialization expects a square channel, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    match kind {
        InitKind::PlainSvd | InitKind::InterleavedSvd => {
            let svd = svd_full(h)?;
            let smallest = *svd.sigma.last().expect("matrix is non-empty");
            if smallest < 1e-12 * h.frobenius_norm() {
                return Err(Error::SingularChannel(format!(
                    "smallest singular value {smallest:e} is numerically zero"
                )));
            }
            let order: Vec<usize> = match kind {
                InitKind::InterleavedSvd => interleave_permutation(h.cols()),
                _ => (0..h.cols()).collect(),
            };
            let diag: Vec<f64> = order.iter().map(|&i| svd.sigma[i]).collect();
            Ok(DecompositionTriple {
                q: svd.u.permute_columns(&order),
                r: ComplexMatrix::from_real_diagonal(&diag),
                s: svd.v.permute_columns(&order),
            })
        }
        InitKind::PlainQr => {
            let (q, r) = qr_decompose(h)?;
            Ok(DecompositionTriple {
                q,
                r,
                s: ComplexMatrix::identity(h.cols()),
            })
        }
        InitKind::VblastQr => {
            let perm = vblast_order(h)?;
            let (q, r) = qr_decompose(&h.permute_columns(&perm))?;
            // h·Π = q·r, so h = q·r·Πᵀ and s = Π with s[perm[j], j] = 1.
            let mut s = ComplexMatrix::zeros(h.cols(), h.cols());
            for (j, &p) in perm.iter().enumerate() {
                s[(p, j)] = Complex64::new(1.0, 0.0);
            }
            Ok(DecompositionTriple { q, r, s })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::testutil::random_matrix;

    fn product(xs: &[f64]) -> f64 {
        xs.iter().product()
    }

    #[test]
    fn interleave_examples() {
        let one_based = |k| -> Vec<usize> {
            interleave_permutation(k)
                .into_iter()
                .map(|i| i + 1)
                .collect()
        };
        assert_eq!(one_based(7), vec![1, 7, 2, 6, 3, 5, 4]);
        assert_eq!(one_based(1), vec![1]);
        assert_eq!(one_based(4), vec![1, 4, 2, 3]);
        for k in 1..20 {
            let mut p = interleave_permutation(k);
            p.sort();
            assert_eq!(p, (0..k).collect::<Vec<_>>());
        }
    }

    #[test]
    fn names_parse_case_insensitively() {
        for kind in InitKind::ALL {
            assert_eq!(kind.name().parse::<InitKind>().unwrap(), kind);
            assert_eq!(
                kind.name().to_uppercase().parse::<InitKind>().unwrap(),
                kind
            );
        }
        assert!("sqrd".parse::<InitKind>().is_err());
    }

    #[test]
    fn diagonal_svd_init() {
        let h = ComplexMatrix::from_real_diagonal(&[3.0, 2.0, 1.0]);
        let t = init_decompose(&h, InitKind::PlainSvd).unwrap();
        assert_eq!(t.diag(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn identity_channel_gives_unit_diagonal_for_every_kind() {
        let h = ComplexMatrix::identity(7);
        for kind in InitKind::ALL {
            let t = init_decompose(&h, kind).unwrap();
            assert!(t.diag().iter().all(|d| (d - 1.0).abs() < 1e-14), "{kind}");
        }
    }

    #[test]
    fn vblast_order_on_sorted_diagonal_is_identity() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(vblast_order(&h).unwrap(), vec![0, 1, 2]);
        let h = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        // Weakest stream first in R, strongest detected first (last position).
        assert_eq!(vblast_order(&h).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn vblast_order_is_deterministic_for_unitary_channels() {
        let (q, _) = qr_decompose(&random_matrix(5, 5, 3)).unwrap();
        let a = vblast_order(&q).unwrap();
        assert_eq!(a, vblast_order(&q).unwrap());
        let t = init_decompose(&q, InitKind::VblastQr).unwrap();
        assert!(t.diag().iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn every_kind_satisfies_triple_invariants() {
        for seed in 0..20 {
            let h = random_matrix(7, 7, seed);
            let sv = svd_full(&h).unwrap().sigma;
            for kind in InitKind::ALL {
                let t = init_decompose(&h, kind).unwrap();
                t.check_invariants(&h, 1e-10, 1e-10).unwrap();
                let rel = (product(&t.diag()) - product(&sv)).abs() / product(&sv);
                assert!(rel < 1e-9, "{kind}: product drift {rel:e}");
            }
            let mut plain = init_decompose(&h, InitKind::PlainSvd).unwrap().diag();
            let inter = init_decompose(&h, InitKind::InterleavedSvd).unwrap().diag();
            let expected: Vec<f64> = interleave_permutation(7)
                .iter()
                .map(|&i| plain[i])
                .collect();
            assert_eq!(inter, expected);
            let mut sorted = inter.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            plain.sort_by(|a, b| b.total_cmp(a));
            assert_eq!(sorted, plain);
        }
    }

    #[test]
    fn singular_channel_is_rejected() {
        let h = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        for kind in InitKind::ALL {
            let err = init_decompose(&h, kind).unwrap_err();
            assert!(matches!(err, Error::SingularChannel(_)), "{kind}: {err}");
        }
        assert!(init_decompose(&ComplexMatrix::zeros(2, 3), InitKind::PlainQr).is_err());
    }

    #[test]
    fn vblast_maximizes_weakest_stream_against_plain_qr() {
        let trials = 1000;
        let mut wins = 0;
        for seed in 0..trials {
            let h = random_matrix(7, 7, 10_000 + seed);
            let vb = init_decompose(&h, InitKind::VblastQr).unwrap().diag();
            let qr = init_decompose(&h, InitKind::PlainQr).unwrap().diag();
            let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
            if min(&vb) >= min(&qr) * (1.0 - 1e-12) {
                wins += 1;
            }
        }
        assert!(wins as f64 >= 0.95 * trials as f64, "{wins}/{trials}");
    }
}

//! Exact (non-iterative) geometric mean decomposition.
//!
//! Starts from the SVD and fixes one diagonal entry to `σ̄` per step. Before
//! step `k` the trailing block `r[k.., k..]` is diagonal; a partner `j > k`
//! on the other side of `σ̄` is swapped into position `k+1`, and a single
//! stage with `Ω = σ̄` equalizes position `k`. This is the reference the
//! iterative results are compared against.

use crate::engine::{apply_stage, geometric_mean_target, DecompositionTriple};
use crate::error::{Error, Result};
use crate::init::{init_decompose, InitKind};
use crate::matcore::ComplexMatrix;

pub fn exact_gmd(h: &ComplexMatrix) -> Result<DecompositionTriple> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "exact GMD expects a square channel, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let sigma_bar = geometric_mean_target(h)?;
    let mut state = init_decompose(h, InitKind::PlainSvd)?;
    let n = state.k();

    for k in 0..n.saturating_sub(1) {
        let diag = state.diag();
        let lead_high = diag[k] >= sigma_bar;
        // Closest partner on the opposite side of σ̄ keeps the rotation mild.
        let partner = (k + 1..n)
            .filter(|&j| {
                if lead_high {
                    diag[j] <= sigma_bar
                } else {
                    diag[j] >= sigma_bar
                }
            })
            .min_by(|&a, &b| {
                (diag[a] - sigma_bar)
                    .abs()
                    .total_cmp(&(diag[b] - sigma_bar).abs())
            })
            // Rounding can leave no entry strictly across σ̄; fall back to the
            // entry nearest to it.
            .unwrap_or_else(|| {
                (k + 1..n)
                    .min_by(|&a, &b| {
                        (diag[a] - sigma_bar)
                            .abs()
                            .total_cmp(&(diag[b] - sigma_bar).abs())
                    })
                    .expect("k + 1 < n")
            });
        swap_symmetric(&mut state, k + 1, partner);
        apply_stage(&mut state, k, |a, b| {
            // Keep the target inside [min, max] so the rotation exists.
            Ok(sigma_bar.clamp(a.min(b), a.max(b)))
        })?;
    }
    Ok(state)
}

/// `r ← P r P`, `q ← q P`, `s ← s P` for the transposition `P = (a b)`.
fn swap_symmetric(state: &mut DecompositionTriple, a: usize, b: usize) {
    if a == b {
        return;
    }
    state.r.swap_rows(a, b);
    state.r.swap_columns(a, b);
    state.q.swap_columns(a, b);
    state.s.swap_columns(a, b);
}

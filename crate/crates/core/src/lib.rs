//! Iterative geometric mean decomposition (IGMD) of complex matrices.
//!
//! The crate factors a full-rank matrix `H = Q R Sᴴ` so that the diagonal of
//! the upper-triangular `R` converges to the geometric mean of the singular
//! values of `H`, without ever computing that geometric mean. Each sweep walks
//! the adjacent 2×2 diagonal blocks of `R`, takes their SVD and applies a pair
//! of planar rotations that move the leading diagonal entry to a two-argument
//! mean (`Ω`) of the pair.
//!
//! Modules:
//!
//! * [`matcore`]: dense complex matrices, QR, full SVD and the closed-form
//!   2×2 upper-triangular SVD.
//! * [`init`]: the four starting decompositions (SVD, interleaved SVD, QR,
//!   VBLAST-ordered QR).
//! * [`engine`]: the `Ω` mappings, stage rotations, sweeps and traces.
//! * [`gmdref`]: the exact, non-iterative GMD used as a reference.
//! * [`mimosim`]: Rayleigh channels, 16-QAM, ZF Tomlinson-Harashima precoding
//!   and the Monte Carlo MSE / BER experiment drivers.
//!
//! ```
//! use igmd::{igmd, ComplexMatrix, InitKind, OmegaKind};
//!
//! let h = ComplexMatrix::from_real_diagonal(&[8.0, 1.0]);
//! let (triple, trace) = igmd(&h, InitKind::PlainSvd, OmegaKind::Gm, 1).unwrap();
//! let diag = triple.diag();
//! assert!((diag[0] - 8f64.sqrt()).abs() < 1e-12);
//! assert!((diag[1] - 8f64.sqrt()).abs() < 1e-12);
//! assert_eq!(trace.diag_history.len(), 2);
//! ```

pub mod engine;
pub mod error;
pub mod gmdref;
pub mod init;
pub mod matcore;
pub mod mimosim;

pub use engine::{
    geometric_mean_target, igmd, igmd_with_options, mse_diag, omega, rotation_pair, stage_update,
    sweep, DecompositionTriple, IgmdOptions, OmegaKind, RotationPair, SweepTrace,
};
pub use error::{Error, Result};
pub use gmdref::exact_gmd;
pub use init::{init_decompose, interleave_permutation, vblast_order, InitKind};
pub use matcore::{qr_decompose, svd_2x2_upper, svd_full, ComplexMatrix, Svd, Svd2x2};
pub use num_complex::Complex64;

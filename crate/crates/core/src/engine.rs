//! The iterative GMD engine.
//!
//! A sweep visits the adjacent diagonal pairs `(k, k+1)` of `R` for
//! `k = 0..K−1`. At each stage the 2×2 block is diagonalized, then a left
//! and a right plane rotation turn `diag(σ₁, σ₂)` back into a triangle whose
//! leading entry is `Ω(r_kk, r_k+1,k+1)`. The product of the diagonal is
//! preserved, and for any `Ω` with `Ω + z₁z₂/Ω ≤ z₁ + z₂` the diagonal sum
//! decreases until every entry equals the geometric mean.
//!
//! Stage indices are zero-based: stage `k` rotates rows/columns `k` and `k+1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::init::{init_decompose, InitKind};
use crate::matcore::{svd_2x2_upper, svd_full, ComplexMatrix};

/// Slack allowed when `Ω` lands outside `[σ₂, σ₁]` by rounding only.
const MAJORIZATION_SLACK: f64 = 1e-10;
/// `|σ₁ − σ₂| ≤ DEGENERATE_GAP·σ₁` is treated as equal singular values.
const DEGENERATE_GAP: f64 = 1e-12;

/// Two-argument mean used to pick the new leading diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OmegaKind {
    /// Arithmetic mean `(z₁ + z₂)/2`.
    Am,
    /// Geometric mean `√(z₁z₂)`.
    Gm,
    /// Harmonic mean `2z₁z₂/(z₁ + z₂)`.
    Hm,
}

impl OmegaKind {
    pub const ALL: [OmegaKind; 3] = [OmegaKind::Am, OmegaKind::Gm, OmegaKind::Hm];

    pub fn name(self) -> &'static str {
        match self {
            OmegaKind::Am => "am",
            OmegaKind::Gm => "gm",
            OmegaKind::Hm => "hm",
        }
    }

    #[inline]
    pub(crate) fn apply(self, z1: f64, z2: f64) -> f64 {
        match self {
            OmegaKind::Am => 0.5 * (z1 + z2),
            OmegaKind::Gm => (z1 * z2).sqrt(),
            OmegaKind::Hm => 2.0 * z1 * z2 / (z1 + z2),
        }
    }
}

impl fmt::Display for OmegaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OmegaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        OmegaKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown omega kind `{s}` (expected am, gm or hm)"))
            })
    }
}

/// `Ω(z1, z2)` for the chosen mean. Both arguments must be positive.
pub fn omega(z1: f64, z2: f64, kind: OmegaKind) -> Result<f64> {
    for (what, value) in [("z1", z1), ("z2", z2)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositive { what, value });
        }
    }
    Ok(kind.apply(z1, z2))
}

/// The left/right plane rotations of one stage.
///
/// `phi_l · diag(σ₁, σ₂) · phi_r = [[Ω, ⋆], [0, σ₁σ₂/Ω]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPair {
    pub phi_l: [[f64; 2]; 2],
    pub phi_r: [[f64; 2]; 2],
    pub omega_value: f64,
    pub c: f64,
    pub s: f64,
}

/// Builds the rotations that move `diag(σ₁, σ₂)` to leading entry `Ω`.
///
/// `c = √((Ω² − σ₂²)/(σ₁² − σ₂²))`, `s = √(1 − c²)`,
/// `phi_l = [[cσ₁, sσ₂], [−sσ₂, cσ₁]]/Ω` and `phi_r = [[c, −s], [s, c]]`.
/// Requires `σ₂ ≤ Ω ≤ σ₁`.
pub fn rotation_pair(sigma1: f64, sigma2: f64, omega_value: f64) -> Result<RotationPair> {
    if !(sigma1.is_finite() && sigma1 > 0.0) {
        return Err(Error::NonPositive {
            what: "sigma1",
            value: sigma1,
        });
    }
    if sigma2.is_nan() || sigma2 < 0.0 || sigma2 > sigma1 {
        return Err(Error::Precondition(format!(
            "singular values must satisfy 0 <= sigma2 <= sigma1, got ({sigma1}, {sigma2})"
        )));
    }
    if !(omega_value.is_finite() && omega_value > 0.0) {
        return Err(Error::NonPositive {
            what: "omega",
            value: omega_value,
        });
    }
    if omega_value > sigma1 * (1.0 + MAJORIZATION_SLACK)
        || omega_value < sigma2 * (1.0 - MAJORIZATION_SLACK)
    {
        return Err(Error::MajorizationViolated {
            sigma1,
            sigma2,
            omega: omega_value,
        });
    }

    let (c, s) = if sigma1 - sigma2 <= DEGENERATE_GAP * sigma1 {
        (1.0, 0.0)
    } else {
        let radicand =
            (omega_value * omega_value - sigma2 * sigma2) / ((sigma1 - sigma2) * (sigma1 + sigma2));
        let c = radicand.clamp(0.0, 1.0).sqrt();
        (c, (1.0 - c * c).max(0.0).sqrt())
    };

    // Row norm of phi_l is exactly one when Ω² = c²σ₁² + s²σ₂²; renormalize so
    // rounding in Ω never leaks into unitarity.
    let (cl, sl) = (c * sigma1, s * sigma2);
    let norm = cl.hypot(sl);
    let (cl, sl) = (cl / norm, sl / norm);
    Ok(RotationPair {
        phi_l: [[cl, sl], [-sl, cl]],
        phi_r: [[c, -s], [s, c]],
        omega_value,
        c,
        s,
    })
}

/// `H = q · r · sᴴ` with `q`, `s` semi-unitary and `r` upper-triangular with
/// a real, strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTriple {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    pub s: ComplexMatrix,
}

impl DecompositionTriple {
    /// Number of streams (size of `r`).
    pub fn k(&self) -> usize {
        self.r.rows()
    }

    /// Real parts of the diagonal of `r`.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.k()).map(|i| self.r[(i, i)].re).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.q
            .matmul(&self.r)
            .and_then(|qr| qr.matmul(&self.s.conj_transpose()))
            .expect("triple factor shapes agree")
    }

    /// `‖q r sᴴ − h‖_F / ‖h‖_F`.
    pub fn reconstruction_error(&self, h: &ComplexMatrix) -> Result<f64> {
        self.reconstruct().relative_error(h)
    }

    /// Largest of the unitarity deviations of `q` and `s`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.q
            .unitarity_deviation()
            .max(self.s.unitarity_deviation())
    }

    /// Verifies the triple invariants against the matrix it came from.
    pub fn check_invariants(&self, h: &ComplexMatrix, recon_tol: f64, unit_tol: f64) -> Result<()> {
        let k = self.k();
        if self.r.cols() != k || self.q.cols() != k || self.s.cols() != k {
            return Err(Error::DimensionMismatch(
                "triple factors disagree on K".into(),
            ));
        }
        if !self.r.is_upper_triangular() {
            return Err(Error::Precondition("r is not upper-triangular".into()));
        }
        if let Some(d) = self
            .r
            .diagonal()
            .into_iter()
            .find(|d| d.im != 0.0 || d.re.is_nan() || d.re <= 0.0)
        {
            return Err(Error::Precondition(format!(
                "diagonal entry {d} is not real positive"
            )));
        }
        let unit = self.unitarity_deviation();
        if unit > unit_tol {
            return Err(Error::Precondition(format!("unitarity deviation {unit:e}")));
        }
        let recon = self.reconstruction_error(h)?;
        if recon > recon_tol {
            return Err(Error::Precondition(format!(
                "reconstruction error {recon:e}"
            )));
        }
        Ok(())
    }
}

/// Applies one stage in place, with the new leading entry chosen by `target`
/// from the current diagonal pair.
pub(crate) fn apply_stage<F>(state: &mut DecompositionTriple, k: usize, target: F) -> Result<()>
where
    F: FnOnce(f64, f64) -> Result<f64>,
{
    let n = state.k();
    if k + 1 >= n {
        return Err(Error::InvalidArgument(format!(
            "stage index {k} out of range for K = {n}"
        )));
    }
    let block = state.r.block2(k, k);
    let svd = svd_2x2_upper(&block)?;
    let om = target(block[(0, 0)].re, block[(1, 1)].re)?;
    let rot = rotation_pair(svd.sigma1, svd.sigma2, om)?;

    // Θ_L = Φ_L·Uᴴ and Θ_R = V·Φ_R.
    let theta_l = mul2(&real2(&rot.phi_l), &adjoint2(&svd.u));
    let theta_r = mul2(&svd.v, &real2(&rot.phi_r));

    let r = &mut state.r;
    r.rotate_rows(k, k + 1, &theta_l, k..n);
    r.rotate_columns(k, k + 1, &theta_r, 0..k + 2);
    r[(k + 1, k)] = Complex64::new(0.0, 0.0);
    state
        .q
        .rotate_columns(k, k + 1, &adjoint2(&theta_l), 0..state.q.rows());
    let srows = state.s.rows();
    state.s.rotate_columns(k, k + 1, &theta_r, 0..srows);

    // Absorb any residual phase of the new diagonal into q.
    for i in [k, k + 1] {
        let d = state.r[(i, i)];
        let mag = d.norm();
        if d.im != 0.0 || d.re < 0.0 {
            let p = d / mag;
            for j in i + 1..n {
                state.r[(i, j)] *= p.conj();
            }
            for row in 0..state.q.rows() {
                state.q[(row, i)] *= p;
            }
        }
        state.r[(i, i)] = Complex64::new(mag, 0.0);
    }
    Ok(())
}

fn real2(m: &[[f64; 2]; 2]) -> [[Complex64; 2]; 2] {
    m.map(|row| row.map(|x| Complex64::new(x, 0.0)))
}

fn adjoint2(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// One stage: equalizes the pair `(k, k+1)` towards `Ω` of its diagonal.
pub fn stage_update(
    state: &DecompositionTriple,
    k: usize,
    kind: OmegaKind,
) -> Result<DecompositionTriple> {
    let mut next = state.clone();
    apply_stage(&mut next, k, |a, b| omega(a, b, kind))?;
    Ok(next)
}

pub(crate) fn sweep_in_place(state: &mut DecompositionTriple, kind: OmegaKind) -> Result<()> {
    for k in 0..state.k().saturating_sub(1) {
        apply_stage(state, k, |a, b| omega(a, b, kind))?;
    }
    Ok(())
}

/// Stages `0, 1, ..., K−2` in order.
pub fn sweep(state: &DecompositionTriple, kind: OmegaKind) -> Result<DecompositionTriple> {
    let mut next = state.clone();
    sweep_in_place(&mut next, kind)?;
    Ok(next)
}

/// Diagonal of `r` before the first sweep and after each sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTrace {
    /// `diag_history[ℓ]` is the diagonal after `ℓ` sweeps (index 0 is the
    /// initial decomposition).
    pub diag_history: Vec<Vec<f64>>,
    /// Diagonal sum for each entry of `diag_history`.
    pub f_history: Vec<f64>,
}

impl SweepTrace {
    pub fn push(&mut self, diag: Vec<f64>) {
        self.f_history.push(diag.iter().sum());
        self.diag_history.push(diag);
    }

    /// Number of completed sweeps.
    pub fn iterations(&self) -> usize {
        self.diag_history.len().saturating_sub(1)
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgmdOptions {
    pub iterations: usize,
    /// Stop early once `max(diag)/min(diag) − 1` falls below this value.
    /// Off by default so that every run performs exactly `iterations` sweeps.
    pub spread_tolerance: Option<f64>,
}

impl IgmdOptions {
    pub fn fixed(iterations: usize) -> Self {
        Self {
            iterations,
            spread_tolerance: None,
        }
    }
}

/// Initializes with `init` and runs `iterations` sweeps with mean `kind`.
pub fn igmd(
    h: &ComplexMatrix,
    init: InitKind,
    kind: OmegaKind,
    iterations: usize,
) -> Result<(DecompositionTriple, SweepTrace)> {
    igmd_with_options(h, init, kind, &IgmdOptions::fixed(iterations))
}

pub fn igmd_with_options(
    h: &ComplexMatrix,
    init: InitKind,
    kind: OmegaKind,
    options: &IgmdOptions,
) -> Result<(DecompositionTriple, SweepTrace)> {
    let mut state = init_decompose(h, init)?;
    let mut trace = SweepTrace::default();
    trace.push(state.diag());
    for _ in 0..options.iterations {
        if let Some(tol) = options.spread_tolerance {
            if spread(trace.diag_history.last().expect("trace is seeded")) - 1.0 < tol {
                break;
            }
        }
        sweep_in_place(&mut state, kind)?;
        trace.push(state.diag());
    }
    Ok((state, trace))
}

fn spread(diag: &[f64]) -> f64 {
    let max = diag.iter().cloned().fold(f64::MIN, f64::max);
    let min = diag.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Geometric mean of the singular values of `h`, via a log-sum.
///
/// Used for metrics and reference results only; the sweep never needs it.
pub fn geometric_mean_target(h: &ComplexMatrix) -> Result<f64> {
    let svd = svd_full(h)?;
    let k = svd.sigma.len();
    let tol = 1e-12 * h.frobenius_norm();
    if let Some(&s) = svd.sigma.iter().find(|&&s| s <= tol) {
        return Err(Error::SingularChannel(format!(
            "singular value {s:e} is numerically zero"
        )));
    }
    let log_sum: f64 = svd.sigma.iter().map(|s| s.ln()).sum();
    Ok((log_sum / k as f64).exp())
}

/// Per-entry `(1/K)·Σ_k (r_kk − σ̄)²` over the trace.
pub fn mse_diag(trace: &SweepTrace, sigma_bar: f64) -> Vec<f64> {
    trace
        .diag_history
        .iter()
        .map(|d| d.iter().map(|x| (x - sigma_bar).powi(2)).sum::<f64>() / d.len() as f64)
        .collect()
}

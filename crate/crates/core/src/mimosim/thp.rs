use num_complex::Complex64;

use crate::engine::DecompositionTriple;
use crate::error::{Error, Result};
use crate::matcore::ComplexMatrix;

/// Modulo period of the 16-QAM lattice, `8/√10`.
pub const THP_DELTA: f64 = 2.529_822_128_134_703_5;

/// Folds each component into `[−Δ/2, Δ/2)`.
pub fn modulo_delta(z: Complex64) -> Complex64 {
    let fold = |x: f64| x - THP_DELTA * (x / THP_DELTA + 0.5).floor();
    Complex64::new(fold(z.re), fold(z.im))
}

/// Zero-forcing Tomlinson-Harashima transceiver built on `H = Q R Sᴴ`.
///
/// The transmitter pre-cancels the interference described by the
/// unit-diagonal feedback `diag(R)⁻¹R` from the last stream to the first,
/// folding each stream with [`modulo_delta`], and precodes with `S`. The
/// receiver applies `Qᴴ`, scales stream `k` by `1/R_kk` and folds again.
#[derive(Debug, Clone)]
pub struct ZfThp {
    channel: ComplexMatrix,
    q_adj: ComplexMatrix,
    s: ComplexMatrix,
    feedback: ComplexMatrix,
    inv_diag: Vec<f64>,
}

impl ZfThp {
    pub fn new(channel: &ComplexMatrix, triple: &DecompositionTriple) -> Result<Self> {
        let k = triple.k();
        if triple.r.cols() != k
            || triple.q.cols() != k
            || triple.s.cols() != k
            || channel.rows() != triple.q.rows()
            || channel.cols() != triple.s.rows()
        {
            return Err(Error::DimensionMismatch(format!(
                "channel {}x{} does not match triple with q {}x{}, r {}x{}, s {}x{}",
                channel.rows(),
                channel.cols(),
                triple.q.rows(),
                triple.q.cols(),
                triple.r.rows(),
                triple.r.cols(),
                triple.s.rows(),
                triple.s.cols()
            )));
        }
        let diag = triple.diag();
        if let Some(&d) = diag.iter().find(|d| d.is_nan() || **d <= 0.0) {
            return Err(Error::NonPositive {
                what: "diagonal of r",
                value: d,
            });
        }
        let mut feedback = triple.r.clone();
        for (i, &d) in diag.iter().enumerate() {
            for j in 0..k {
                feedback[(i, j)] /= d;
            }
        }
        Ok(Self {
            channel: channel.clone(),
            q_adj: triple.q.conj_transpose(),
            s: triple.s.clone(),
            feedback,
            inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
        })
    }

    pub fn streams(&self) -> usize {
        self.inv_diag.len()
    }

    /// Precoded transmit vector `S·x` for the symbol vector.
    pub fn transmit(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        let k = self.streams();
        if symbols.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "expected {k} symbols, got {}",
                symbols.len()
            )));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let interference: Complex64 = (i + 1..k).map(|j| self.feedback[(i, j)] * x[j]).sum();
            x[i] = modulo_delta(symbols[i] - interference);
        }
        self.s.mul_vec(&x)
    }

    /// Passes the transmit vector through the channel and adds `noise`.
    pub fn propagate(&self, tx: &[Complex64], noise: &[Complex64]) -> Result<Vec<Complex64>> {
        if noise.len() != self.channel.rows() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} noise samples, got {}",
                self.channel.rows(),
                noise.len()
            )));
        }
        let mut y = self.channel.mul_vec(tx)?;
        for (yi, ni) in y.iter_mut().zip(noise) {
            *yi += ni;
        }
        Ok(y)
    }

    /// Decision-point signals: `mod_Δ((Qᴴy)_k / R_kk)`.
    pub fn receive(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let z = self.q_adj.mul_vec(y)?;
        Ok(z.iter()
            .zip(&self.inv_diag)
            .map(|(zk, inv)| modulo_delta(zk * inv))
            .collect())
    }
}

/// One symbol vector through transmitter, channel and receiver.
pub fn zfthp_link(
    channel: &ComplexMatrix,
    triple: &DecompositionTriple,
    symbols: &[Complex64],
    noise: &[Complex64],
) -> Result<Vec<Complex64>> {
    let link = ZfThp::new(channel, triple)?;
    let tx = link.transmit(symbols)?;
    let y = link.propagate(&tx, noise)?;
    link.receive(&y)
}

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::ComplexMatrix;

/// Point index reserved for the channel draw of a trial.
pub const CHANNEL_STREAM: u64 = u64::MAX;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the independent stream for `(master, trial, point)`.
pub fn stream_seed(master: u64, trial: u64, point: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ trial) ^ point)
}

pub fn stream_rng(master: u64, trial: u64, point: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, trial, point))
}

/// Circularly symmetric complex Gaussian with `E|z|² = variance`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// `k×k` i.i.d. Rayleigh channel: entries `CN(0, 1)`.
pub fn gen_rayleigh<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..k * k).map(|_| complex_gaussian(rng, 1.0)).collect();
    ComplexMatrix::from_vec(k, k, data).expect("gaussian draws are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_power_zero_mean() {
        let mut rng = stream_rng(1, 0, CHANNEL_STREAM);
        let draws = 100_000 / 49 + 1;
        let (mut power, mut re, mut im, mut n) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..draws {
            for z in gen_rayleigh(7, &mut rng).as_slice() {
                power += z.norm_sqr();
                re += z.re;
                im += z.im;
                n += 1.0;
            }
        }
        assert!((power / n - 1.0).abs() < 0.02, "{}", power / n);
        assert!((re / n).abs() < 0.02 && (im / n).abs() < 0.02);
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = gen_rayleigh(7, &mut stream_rng(9, 3, CHANNEL_STREAM));
        let b = gen_rayleigh(7, &mut stream_rng(9, 3, CHANNEL_STREAM));
        assert_eq!(a, b);
        let c = gen_rayleigh(7, &mut stream_rng(9, 4, CHANNEL_STREAM));
        assert_ne!(a, c);
    }

    #[test]
    fn stream_seeds_differ_across_coordinates() {
        let base = stream_seed(1, 2, 3);
        assert_ne!(base, stream_seed(2, 2, 3));
        assert_ne!(base, stream_seed(1, 3, 3));
        assert_ne!(base, stream_seed(1, 2, 4));
        assert_ne!(stream_seed(0, 1, 0), stream_seed(0, 0, 1));
    }
}

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::channel::{complex_gaussian, gen_rayleigh, stream_rng, CHANNEL_STREAM};
use super::qam::{qam16_demap, qam16_map};
use super::thp::ZfThp;
use crate::engine::{
    geometric_mean_target, igmd, mse_diag, sweep_in_place, DecompositionTriple, OmegaKind,
};
use crate::error::{Error, Result};
use crate::gmdref::exact_gmd;
use crate::init::{init_decompose, InitKind};
use crate::matcore::ComplexMatrix;

const BITS_PER_SYMBOL: usize = 4;

/// Size, realization count and master seed of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelConfig {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidArgument(format!(
                "k must be >= 2, got {}",
                self.k
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        Ok(())
    }

    fn channel(&self, trial: usize) -> ComplexMatrix {
        gen_rayleigh(
            self.k,
            &mut stream_rng(self.seed, trial as u64, CHANNEL_STREAM),
        )
    }
}

/// Trial-averaged diagonal MSE after each sweep (index 0 is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct MseCurve {
    pub init: InitKind,
    pub kind: OmegaKind,
    pub mse_per_iteration: Vec<f64>,
    /// Standard error of each mean, `sd/√trials`.
    pub std_error_per_iteration: Vec<f64>,
}

/// Averages the diagonal MSE over the given channels for every
/// `(init, kind)` combination, inits outermost.
pub fn mse_curves_for_channels(
    channels: &[ComplexMatrix],
    inits: &[InitKind],
    kinds: &[OmegaKind],
    iterations: usize,
) -> Result<Vec<MseCurve>> {
    let per_trial: Vec<Vec<Vec<f64>>> = channels
        .par_iter()
        .map(|h| trial_mse(h, inits, kinds, iterations))
        .collect::<Result<_>>()?;
    Ok(reduce_mse(&per_trial, inits, kinds, iterations))
}

fn trial_mse(
    h: &ComplexMatrix,
    inits: &[InitKind],
    kinds: &[OmegaKind],
    iterations: usize,
) -> Result<Vec<Vec<f64>>> {
    let sigma_bar = geometric_mean_target(h)?;
    let mut out = Vec::with_capacity(inits.len() * kinds.len());
    for &init in inits {
        for &kind in kinds {
            let (_, trace) = igmd(h, init, kind, iterations)?;
            out.push(mse_diag(&trace, sigma_bar));
        }
    }
    Ok(out)
}

fn reduce_mse(
    per_trial: &[Vec<Vec<f64>>],
    inits: &[InitKind],
    kinds: &[OmegaKind],
    iterations: usize,
) -> Vec<MseCurve> {
    let n = per_trial.len() as f64;
    let combos = inits
        .iter()
        .flat_map(|&i| kinds.iter().map(move |&k| (i, k)));
    combos
        .enumerate()
        .map(|(c, (init, kind))| {
            let mut sum = vec![0.0; iterations + 1];
            let mut sum_sq = vec![0.0; iterations + 1];
            // Trial order is fixed, so the float sums are reproducible.
            for trial in per_trial {
                for (l, &v) in trial[c].iter().enumerate() {
                    sum[l] += v;
                    sum_sq[l] += v * v;
                }
            }
            let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
            let std_error = sum_sq
                .iter()
                .zip(&mean)
                .map(|(sq, m)| {
                    if n < 2.0 {
                        0.0
                    } else {
                        let var = ((sq - n * m * m) / (n - 1.0)).max(0.0);
                        (var / n).sqrt()
                    }
                })
                .collect();
            MseCurve {
                init,
                kind,
                mse_per_iteration: mean,
                std_error_per_iteration: std_error,
            }
        })
        .collect()
}

/// MSE curves over `cfg.trials` Rayleigh channels.
pub fn run_mse_experiment(
    cfg: &ChannelConfig,
    inits: &[InitKind],
    kinds: &[OmegaKind],
    iterations: usize,
) -> Result<Vec<MseCurve>> {
    cfg.validate()?;
    let channels: Vec<ComplexMatrix> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| cfg.channel(t))
        .collect();
    mse_curves_for_channels(&channels, inits, kinds, iterations)
}

/// Which decomposition a BER curve was measured with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecompositionLabel {
    Iterations(usize),
    ExactGmd,
}

impl fmt::Display for DecompositionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionLabel::Iterations(n) => write!(f, "{n}"),
            DecompositionLabel::ExactGmd => f.write_str("exact-gmd"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_sent: u64,
    pub ber: f64,
}

impl BerPoint {
    pub fn new(snr_db: f64, bit_errors: u64, bits_sent: u64) -> Self {
        Self {
            snr_db,
            bit_errors,
            bits_sent,
            ber: bit_errors as f64 / bits_sent as f64,
        }
    }

    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits_sent as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub init: InitKind,
    pub kind: OmegaKind,
    pub label: DecompositionLabel,
    pub points: Vec<BerPoint>,
}

/// BER of the ZF-THP link versus SNR.
///
/// One curve per entry of `iterations_list` (IGMD with `init`/`kind` after
/// that many sweeps) followed by the exact-GMD baseline. Each SNR point sends
/// at least `bits_per_point` bits, spread evenly over `cfg.trials` channels;
/// the symbols and noise of a `(trial, point)` pair are shared by every
/// curve. Per-stream noise variance is `10^(−snr/10)` for unit-energy
/// symbols.
pub fn run_ber_experiment(
    cfg: &ChannelConfig,
    init: InitKind,
    kind: OmegaKind,
    iterations_list: &[usize],
    snr_grid_db: &[f64],
    bits_per_point: u64,
) -> Result<Vec<BerCurve>> {
    cfg.validate()?;
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidArgument("SNR grid is empty".into()));
    }
    if let Some(s) = snr_grid_db.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("SNR {s} is not finite")));
    }
    if bits_per_point == 0 {
        return Err(Error::InvalidArgument(
            "bits per point must be positive".into(),
        ));
    }
    let bits_per_vector = (BITS_PER_SYMBOL * cfg.k) as u64;
    let vectors_total = bits_per_point.div_ceil(bits_per_vector);
    let vectors_per_trial = vectors_total.div_ceil(cfg.trials as u64).max(1);
    let bits_sent = vectors_per_trial * bits_per_vector * cfg.trials as u64;

    let mut labels: Vec<DecompositionLabel> = iterations_list
        .iter()
        .map(|&n| DecompositionLabel::Iterations(n))
        .collect();
    labels.push(DecompositionLabel::ExactGmd);

    let per_trial: Vec<Vec<Vec<u64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            ber_trial(
                cfg,
                trial,
                init,
                kind,
                iterations_list,
                snr_grid_db,
                vectors_per_trial,
            )
        })
        .collect::<Result<_>>()?;

    Ok(labels
        .iter()
        .enumerate()
        .map(|(c, &label)| {
            let points = snr_grid_db
                .iter()
                .enumerate()
                .map(|(p, &snr)| {
                    let errors = per_trial.iter().map(|t| t[c][p]).sum();
                    BerPoint::new(snr, errors, bits_sent)
                })
                .collect();
            BerCurve {
                init,
                kind,
                label,
                points,
            }
        })
        .collect())
}

/// Triples after each requested sweep count, in the order given.
fn igmd_snapshots(
    h: &ComplexMatrix,
    init: InitKind,
    kind: OmegaKind,
    iterations_list: &[usize],
) -> Result<Vec<DecompositionTriple>> {
    let mut order: Vec<usize> = (0..iterations_list.len()).collect();
    order.sort_by_key(|&i| iterations_list[i]);
    let mut state = init_decompose(h, init)?;
    let mut done = 0;
    let mut out = vec![None; iterations_list.len()];
    for i in order {
        while done < iterations_list[i] {
            sweep_in_place(&mut state, kind)?;
            done += 1;
        }
        out[i] = Some(state.clone());
    }
    Ok(out
        .into_iter()
        .map(|t| t.expect("every slot filled"))
        .collect())
}

/// Bit errors for one channel realization, indexed `[curve][snr point]`.
fn ber_trial(
    cfg: &ChannelConfig,
    trial: usize,
    init: InitKind,
    kind: OmegaKind,
    iterations_list: &[usize],
    snr_grid_db: &[f64],
    vectors: u64,
) -> Result<Vec<Vec<u64>>> {
    let h = cfg.channel(trial);
    let mut triples = igmd_snapshots(&h, init, kind, iterations_list)?;
    triples.push(exact_gmd(&h)?);
    let links: Vec<ZfThp> = triples
        .iter()
        .map(|t| ZfThp::new(&h, t))
        .collect::<Result<_>>()?;

    let k = cfg.k;
    let mut errors = vec![vec![0u64; snr_grid_db.len()]; links.len()];
    let mut labels = vec![0u8; k];
    let mut symbols = vec![Complex64::new(0.0, 0.0); k];
    let mut noise = vec![Complex64::new(0.0, 0.0); k];
    for (p, &snr_db) in snr_grid_db.iter().enumerate() {
        let n0 = 10f64.powf(-snr_db / 10.0);
        let mut rng = stream_rng(cfg.seed, trial as u64, p as u64);
        for _ in 0..vectors {
            for i in 0..k {
                labels[i] = rng.random::<u8>() & 0x0F;
                symbols[i] = qam16_map(labels[i]);
            }
            for n in noise.iter_mut() {
                *n = complex_gaussian(&mut rng, n0);
            }
            for (c, link) in links.iter().enumerate() {
                let tx = link.transmit(&symbols)?;
                let y = link.propagate(&tx, &noise)?;
                let decided = link.receive(&y)?;
                errors[c][p] += decided
                    .iter()
                    .zip(&labels)
                    .map(|(&z, &b)| (qam16_demap(z) ^ b).count_ones() as u64)
                    .sum::<u64>();
            }
        }
    }
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::qr_decompose;
    use crate::matcore::testutil::random_matrix;

    fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(f)
    }

    #[test]
    fn scaled_unitary_channel_gives_zero_curves() {
        let (u, _) = qr_decompose(&random_matrix(7, 7, 1)).unwrap();
        let curves =
            mse_curves_for_channels(&[u.scale(1.7)], &[InitKind::PlainSvd], &OmegaKind::ALL, 4)
                .unwrap();
        assert_eq!(curves.len(), 3);
        for c in curves {
            assert_eq!(c.mse_per_iteration.len(), 5);
            assert!(c.mse_per_iteration.iter().all(|&m| m < 1e-24));
        }
    }

    #[test]
    fn gm_curves_decrease() {
        let cfg = ChannelConfig {
            k: 5,
            trials: 200,
            seed: 3,
        };
        let curves = run_mse_experiment(&cfg, &InitKind::ALL, &[OmegaKind::Gm], 6).unwrap();
        for c in curves {
            assert!(
                c.mse_per_iteration.windows(2).all(|w| w[1] < w[0]),
                "{}: {:?}",
                c.init,
                c.mse_per_iteration
            );
        }
    }

    #[test]
    fn mse_is_independent_of_thread_count() {
        let cfg = ChannelConfig {
            k: 4,
            trials: 64,
            seed: 11,
        };
        let run = || run_mse_experiment(&cfg, &InitKind::ALL, &OmegaKind::ALL, 3).unwrap();
        assert_eq!(in_pool(1, run), in_pool(4, run));
    }

    #[test]
    fn ber_zero_noise_limit_and_determinism() {
        let cfg = ChannelConfig {
            k: 4,
            trials: 20,
            seed: 5,
        };
        let run = || {
            run_ber_experiment(
                &cfg,
                InitKind::VblastQr,
                OmegaKind::Gm,
                &[1, 3],
                &[300.0, 5.0],
                20_000,
            )
            .unwrap()
        };
        let serial = in_pool(1, run);
        assert_eq!(serial, in_pool(3, run));
        assert_eq!(serial.len(), 3);
        assert_eq!(serial[2].label, DecompositionLabel::ExactGmd);
        for curve in &serial {
            assert_eq!(curve.points[0].bit_errors, 0, "{}", curve.label);
            assert!(curve.points[1].bit_errors > 0);
            assert!(curve.points[0].bits_sent >= 20_000);
        }
    }

    #[test]
    fn snapshots_follow_requested_order() {
        let h = random_matrix(4, 4, 8);
        let snaps = igmd_snapshots(&h, InitKind::PlainQr, OmegaKind::Hm, &[3, 0, 1]).unwrap();
        let (t3, _) = igmd(&h, InitKind::PlainQr, OmegaKind::Hm, 3).unwrap();
        let (t1, _) = igmd(&h, InitKind::PlainQr, OmegaKind::Hm, 1).unwrap();
        assert_eq!(snaps[0], t3);
        assert_eq!(snaps[1], init_decompose(&h, InitKind::PlainQr).unwrap());
        assert_eq!(snaps[2], t1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = ChannelConfig {
            k: 1,
            trials: 1,
            seed: 0,
        };
        assert!(run_mse_experiment(&cfg, &InitKind::ALL, &OmegaKind::ALL, 1).is_err());
        let cfg = ChannelConfig { k: 3, ..cfg };
        let ber = |snr: &[f64], bits| {
            run_ber_experiment(&cfg, InitKind::PlainQr, OmegaKind::Gm, &[1], snr, bits)
        };
        assert!(ber(&[], 100).is_err());
        assert!(ber(&[10.0], 0).is_err());
        assert!(ber(&[f64::NAN], 10).is_err());
    }

    #[test]
    fn ber_point_arithmetic() {
        let p = BerPoint::new(10.0, 25, 1000);
        assert_eq!(p.ber, 0.025);
        assert!((p.std_error() - (0.025f64 * 0.975 / 1000.0).sqrt()).abs() < 1e-15);
    }
}

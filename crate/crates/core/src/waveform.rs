//! OOK waveforms and bit-error-rate measurement.
//!
//! PRBS generation, bipolar NRZ mapping, hard-decision demodulation, the
//! Gaussian-tail BER oracle, and Monte Carlo BER experiments through the
//! fixed-gain, settled-AGC or feedback-loop signal path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::agc_loop::{LoopParams, LoopSim};
use crate::agc_static::AgcStaticParams;
use crate::error::{require_positive, Error, Result};
use crate::seeding::derive_seed;

/// Bits per sub-seeded Monte Carlo batch.
const BER_BATCH: u64 = 1 << 15;

/// Maximal-length LFSR feedback taps, indexed by register order.
/// One primitive polynomial per order from the standard tables.
const LFSR_TAPS: [(u32, &[u32]); 31] = [
    (2, &[2, 1]),
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
    (17, &[17, 14]),
    (18, &[18, 11]),
    (19, &[19, 6, 2, 1]),
    (20, &[20, 17]),
    (21, &[21, 19]),
    (22, &[22, 21]),
    (23, &[23, 18]),
    (24, &[24, 23, 22, 17]),
    (25, &[25, 22]),
    (26, &[26, 6, 2, 1]),
    (27, &[27, 5, 2, 1]),
    (28, &[28, 25]),
    (29, &[29, 27]),
    (30, &[30, 6, 4, 1]),
    (31, &[31, 28]),
    (32, &[32, 22, 2, 1]),
];

/// Fibonacci linear feedback shift register over GF(2).
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    tap_mask: u32,
    state_mask: u32,
}

impl Lfsr {
    /// Build an order-`order` maximal-length register (2 ≤ order ≤ 32).
    /// The seed selects a nonzero starting state.
    pub fn new(order: u32, seed: u64) -> Result<Self> {
        let taps = LFSR_TAPS
            .iter()
            .find(|(n, _)| *n == order)
            .map(|(_, taps)| *taps)
            .ok_or_else(|| Error::invalid("prbs_order", format!("unsupported order {order}")))?;
        let mut tap_mask = 0u32;
        for &t in taps {
            tap_mask |= 1 << (t - 1);
        }
        let period = if order == 32 {
            u32::MAX
        } else {
            (1u32 << order) - 1
        };
        let state = (seed % period as u64) as u32 + 1;
        Ok(Self {
            state,
            tap_mask,
            state_mask: if order == 32 { u32::MAX } else { period },
        })
    }

    /// Next PRBS bit.
    pub fn next_bit(&mut self) -> bool {
        let feedback = (self.state & self.tap_mask).count_ones() & 1;
        self.state = ((self.state << 1) | feedback) & self.state_mask;
        feedback == 1
    }
}

/// Where the transmitted bits come from.
#[derive(Debug, Clone)]
pub enum BitSource {
    /// Maximal-length PRBS of the given register order.
    Prbs { order: u32 },
    /// A fixed pattern repeated end to end.
    Pattern(Vec<bool>),
}

/// OOK waveform configuration. Bipolar NRZ: bit 1 → +a, bit 0 → −a.
#[derive(Debug, Clone)]
pub struct OokConfig {
    /// Bit rate (bits/s).
    pub bit_rate: f64,
    /// Samples per bit.
    pub samples_per_bit: usize,
    /// Signal amplitude a (A); the drive variance is a².
    pub amplitude: f64,
    /// Bit source.
    pub source: BitSource,
    /// Seed for PRBS state selection.
    pub seed: u64,
}

impl OokConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_bit < 1 {
            return Err(Error::invalid("samples_per_bit", "must be ≥ 1"));
        }
        require_positive("amplitude", self.amplitude)?;
        require_positive("bit_rate", self.bit_rate)?;
        match &self.source {
            BitSource::Pattern(bits) if bits.is_empty() => {
                return Err(Error::invalid("pattern", "must not be empty"));
            }
            BitSource::Prbs { order } => {
                Lfsr::new(*order, 0)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn bit_iter(&self, seed: u64) -> Result<Box<dyn Iterator<Item = bool> + '_>> {
        match &self.source {
            BitSource::Prbs { order } => {
                let mut lfsr = Lfsr::new(*order, seed)?;
                Ok(Box::new(std::iter::from_fn(move || Some(lfsr.next_bit()))))
            }
            BitSource::Pattern(bits) => Ok(Box::new(bits.iter().copied().cycle())),
        }
    }
}

/// Measured bit-error rate with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerResult {
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub wilson_ci95: (f64, f64),
}

impl BerResult {
    pub fn from_counts(bit_errors: u64, bits_total: u64) -> Self {
        let ber = if bits_total == 0 {
            0.0
        } else {
            bit_errors as f64 / bits_total as f64
        };
        Self {
            bit_errors,
            bits_total,
            ber,
            wilson_ci95: wilson_interval(bit_errors, bits_total, 1.96),
        }
    }

    /// True when `value` lies inside the Wilson interval.
    pub fn ci_contains(&self, value: f64) -> bool {
        value >= self.wilson_ci95.0 && value <= self.wilson_ci95.1
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Generate `n_bits` of bipolar NRZ: the bit sequence and its sample stream.
pub fn generate_ook(cfg: &OokConfig, n_bits: u64) -> Result<(Vec<bool>, Vec<f64>)> {
    cfg.validate()?;
    if n_bits < 1 {
        return Err(Error::invalid("n_bits", "must be ≥ 1"));
    }
    let mut bits = Vec::with_capacity(n_bits as usize);
    let mut samples = Vec::with_capacity(n_bits as usize * cfg.samples_per_bit);
    for bit in cfg.bit_iter(cfg.seed)?.take(n_bits as usize) {
        bits.push(bit);
        let level = if bit { cfg.amplitude } else { -cfg.amplitude };
        samples.extend(std::iter::repeat_n(level, cfg.samples_per_bit));
    }
    Ok((bits, samples))
}

/// Threshold decision on the per-bit sample mean. Ties decide bit 0.
pub fn hard_decision_demod(samples: &[f64], cfg: &OokConfig, threshold: f64) -> Result<Vec<bool>> {
    if !samples.len().is_multiple_of(cfg.samples_per_bit) {
        return Err(Error::LengthMismatch {
            samples: samples.len(),
            samples_per_bit: cfg.samples_per_bit,
        });
    }
    Ok(samples
        .chunks(cfg.samples_per_bit)
        .map(|chunk| chunk.iter().sum::<f64>() / chunk.len() as f64 > threshold)
        .collect())
}

/// Count positions where the two bit streams disagree.
pub fn count_errors(sent: &[bool], received: &[bool]) -> u64 {
    sent.iter()
        .zip(received)
        .filter(|(a, b)| a != b)
        .count() as u64
}

/// Hard-decision BER of bipolar OOK in Gaussian noise: Q(√SNR).
pub fn analytic_ber_ook(snr: f64) -> f64 {
    0.5 * statrs::function::erf::erfc((snr.max(0.0) / 2.0).sqrt())
}

/// Signal path applied between the synthesized noisy input and the
/// demodulator.
#[derive(Debug, Clone)]
pub enum AgcMode {
    /// Plain amplifier with a fixed power gain and noise power.
    Fixed { gain: f64, noise_power: f64 },
    /// Settled-AGC model: gain from the piecewise law at the input power.
    Static(AgcStaticParams),
    /// Full feedback loop stepped sample by sample.
    Loop(LoopParams),
}

/// One point of a BER-versus-SNR experiment.
#[derive(Debug, Clone)]
pub struct BerPoint {
    /// Input SNR the point was synthesized at (linear).
    pub input_snr: f64,
    /// Output SNR after the gain stage (linear).
    pub output_snr: f64,
    /// Measured errors.
    pub result: BerResult,
    /// Model prediction Q(√SNR_o).
    pub predicted_ber: f64,
}

/// A measured BER curve plus any precondition warnings.
#[derive(Debug, Clone)]
pub struct BerExperiment {
    pub points: Vec<BerPoint>,
    pub warnings: Vec<String>,
}

/// Run a Monte Carlo BER experiment.
///
/// For each SNR point the input stream is synthesized at a fixed total AC
/// power `input_power`: bipolar OOK of power p_s plus white Gaussian noise
/// of power p_n with p_s/p_n equal to the requested SNR. The stream passes
/// through the selected gain stage (which adds its own noise power) and a
/// zero-threshold hard decision. Deterministic per seed and independent of
/// worker count.
pub fn run_ber_experiment(
    cfg: &OokConfig,
    mode: &AgcMode,
    input_power: f64,
    load_resistance: f64,
    snr_points: &[f64],
    n_bits: u64,
    seed: u64,
) -> Result<BerExperiment> {
    cfg.validate()?;
    require_positive("input_power", input_power)?;
    require_positive("load_resistance", load_resistance)?;

    let mut points = Vec::with_capacity(snr_points.len());
    let mut warnings = Vec::new();
    let mut min_expected_errors = f64::INFINITY;

    for (idx, &snr) in snr_points.iter().enumerate() {
        crate::error::require_nonnegative("snr_points", snr)?;
        let signal_power = input_power * snr / (1.0 + snr);
        let noise_power = input_power - signal_power;
        let amplitude = (signal_power / load_resistance).sqrt();
        let noise_sigma = (noise_power / load_resistance).sqrt();

        let (gain, added_noise) = match mode {
            AgcMode::Fixed { gain, noise_power } => (*gain, *noise_power),
            AgcMode::Static(params) => (params.gain(input_power), params.agc_noise_power),
            AgcMode::Loop(params) => {
                let mut sim = LoopSim::new(*params, derive_seed(seed, 0xA6C))?;
                sim.settle(input_power, 1.0)?;
                (sim.effective_gain(), params.agc_noise_power)
            }
        };
        let output_snr = if added_noise == 0.0 && noise_power == 0.0 {
            f64::INFINITY
        } else {
            gain * signal_power / (gain * noise_power + added_noise)
        };

        let point_cfg = OokConfig {
            amplitude: if amplitude > 0.0 { amplitude } else { f64::MIN_POSITIVE },
            ..cfg.clone()
        };
        let errors = match mode {
            AgcMode::Loop(params) => loop_mode_errors(
                &point_cfg,
                params,
                input_power,
                noise_sigma,
                n_bits,
                derive_seed(seed, idx as u64),
            )?,
            _ => scalar_mode_errors(
                &point_cfg,
                gain,
                added_noise,
                load_resistance,
                noise_sigma,
                n_bits,
                derive_seed(seed, idx as u64),
            )?,
        };

        let predicted_ber = analytic_ber_ook(output_snr);
        min_expected_errors = min_expected_errors.min(predicted_ber * n_bits as f64);
        points.push(BerPoint {
            input_snr: snr,
            output_snr,
            result: BerResult::from_counts(errors, n_bits),
            predicted_ber,
        });
    }

    if min_expected_errors < 100.0 {
        warnings.push(format!(
            "expected errors at the best SNR point ≈ {min_expected_errors:.1} (< 100); \
             widen n_bits for a trustworthy tail"
        ));
    }
    Ok(BerExperiment { points, warnings })
}

/// Scalar gain path: batched, sub-seeded, merged by addition.
fn scalar_mode_errors(
    cfg: &OokConfig,
    gain: f64,
    added_noise_power: f64,
    load_resistance: f64,
    noise_sigma: f64,
    n_bits: u64,
    seed: u64,
) -> Result<u64> {
    let amp_gain = gain.sqrt();
    let added_sigma = (added_noise_power / load_resistance).sqrt();
    let n_batches = n_bits.div_ceil(BER_BATCH);
    let spb = cfg.samples_per_bit;
    let errors = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let bits_here = BER_BATCH.min(n_bits - batch * BER_BATCH);
            let batch_seed = derive_seed(seed, batch);
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
            let unit = Normal::new(0.0, 1.0).expect("unit normal");
            let mut bit_iter = match cfg.bit_iter(batch_seed) {
                Ok(it) => it,
                Err(_) => unreachable!("config validated"),
            };
            let mut errors = 0u64;
            for _ in 0..bits_here {
                let bit = bit_iter.next().expect("endless source");
                let level = if bit { cfg.amplitude } else { -cfg.amplitude };
                let mut acc = 0.0;
                for _ in 0..spb {
                    let x = level + noise_sigma * unit.sample(&mut rng);
                    let y = amp_gain * x + added_sigma * unit.sample(&mut rng);
                    acc += y;
                }
                let decided = acc / spb as f64 > 0.0;
                if decided != bit {
                    errors += 1;
                }
            }
            errors
        })
        .sum();
    Ok(errors)
}

/// Feedback-loop path: strictly sequential, warmed up before counting.
fn loop_mode_errors(
    cfg: &OokConfig,
    params: &LoopParams,
    input_power: f64,
    noise_sigma: f64,
    n_bits: u64,
    seed: u64,
) -> Result<u64> {
    let mut sim = LoopSim::new(*params, derive_seed(seed, 0))?;
    sim.settle(input_power, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut bit_iter = cfg.bit_iter(derive_seed(seed, 2))?;
    let mut errors = 0u64;
    for _ in 0..n_bits {
        let bit = bit_iter.next().expect("endless source");
        let level = if bit { cfg.amplitude } else { -cfg.amplitude };
        let mut acc = 0.0;
        for _ in 0..cfg.samples_per_bit {
            let x = level + noise_sigma * unit.sample(&mut rng);
            acc += sim.step(x);
        }
        let decided = acc / cfg.samples_per_bit as f64 > 0.0;
        if decided != bit {
            errors += 1;
        }
    }
    Ok(errors)
}

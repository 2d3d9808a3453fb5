//! Receiver front-end model.
//!
//! Noisy transmitter, optical-to-electrical conversion through an APD, the
//! receiver noise terms, the electrical power decomposition and input SNR,
//! and per-sample Monte Carlo generation of the received current.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::seeding::derive_seed;

/// Samples per deterministic sub-seeded batch in stream generation.
const STREAM_BATCH: usize = 1 << 16;

/// Transmit-side parameters: drive signal statistics and LED conversion.
#[derive(Debug, Clone, Copy)]
pub struct TransmitterParams {
    /// Variance of the electrical drive signal `D[s]` (A²).
    pub signal_variance: f64,
    /// Mean of the electrical drive signal `E[s]` (A).
    pub signal_mean: f64,
    /// DC bias v_b (V).
    pub bias_voltage: f64,
    /// Electro-optical conversion coefficient α (W/A).
    pub conversion_coeff: f64,
    /// Transmitted noise-to-signal ratio λ = `σ_t²/D[s]`, linear.
    pub noise_signal_ratio: f64,
}

impl TransmitterParams {
    pub fn new(
        signal_variance: f64,
        signal_mean: f64,
        bias_voltage: f64,
        conversion_coeff: f64,
        noise_signal_ratio: f64,
    ) -> Result<Self> {
        require_positive("signal_variance", signal_variance)?;
        require_positive("bias_voltage", bias_voltage)?;
        require_positive("conversion_coeff", conversion_coeff)?;
        require_nonnegative("noise_signal_ratio", noise_signal_ratio)?;
        Ok(Self {
            signal_variance,
            signal_mean,
            bias_voltage,
            conversion_coeff,
            noise_signal_ratio,
        })
    }

    /// Transmitter noise variance `σ_t² = λ·D[s]` (A²).
    pub fn noise_variance(&self) -> f64 {
        self.noise_signal_ratio * self.signal_variance
    }

    /// Check that the drive stays above the LED threshold for a symmetric
    /// swing of the given amplitude around the bias.
    pub fn check_drive_margin(&self, led_threshold_voltage: f64, amplitude: f64) -> Result<()> {
        if self.bias_voltage - amplitude.abs() < led_threshold_voltage {
            return Err(Error::invalid(
                "bias_voltage",
                format!(
                    "bias {} V minus swing {} A-equivalent falls below the LED threshold {} V",
                    self.bias_voltage, amplitude, led_threshold_voltage
                ),
            ));
        }
        Ok(())
    }
}

/// Detector-side parameters: APD, bandwidth, noise sources and load.
#[derive(Debug, Clone, Copy)]
pub struct DetectorParams {
    /// APD responsivity β (A/W).
    pub responsivity: f64,
    /// Electron charge q (C).
    pub electron_charge: f64,
    /// APD multiplication factor M.
    pub multiplication: f64,
    /// APD excess noise factor F_A.
    pub excess_noise_factor: f64,
    /// System bandwidth Δf (Hz).
    pub bandwidth: f64,
    /// Ambient optical power b₀ (W).
    pub ambient_optical_power: f64,
    /// Circuit noise variance σ_c² (A²).
    pub circuit_noise_variance: f64,
    /// Load resistance r_l (Ω).
    pub load_resistance: f64,
    /// Measured lumped input-independent noise density (W/Hz referred to
    /// σ_i²·r_l). When present it supersedes the σ_c²/ambient computation.
    pub independent_noise_density_override: Option<f64>,
}

impl DetectorParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        responsivity: f64,
        electron_charge: f64,
        multiplication: f64,
        excess_noise_factor: f64,
        bandwidth: f64,
        ambient_optical_power: f64,
        circuit_noise_variance: f64,
        load_resistance: f64,
        independent_noise_density_override: Option<f64>,
    ) -> Result<Self> {
        let positive = [
            ("responsivity", responsivity),
            ("electron_charge", electron_charge),
            ("multiplication", multiplication),
            ("excess_noise_factor", excess_noise_factor),
            ("bandwidth", bandwidth),
            ("circuit_noise_variance", circuit_noise_variance),
            ("load_resistance", load_resistance),
        ];
        for (name, value) in positive {
            require_positive(name, value)?;
        }
        require_nonnegative("ambient_optical_power", ambient_optical_power)?;
        if let Some(d) = independent_noise_density_override {
            require_positive("independent_noise_density_override", d)?;
        }
        Ok(Self {
            responsivity,
            electron_charge,
            multiplication,
            excess_noise_factor,
            bandwidth,
            ambient_optical_power,
            circuit_noise_variance,
            load_resistance,
            independent_noise_density_override,
        })
    }

    /// 2qMF_AΔf, the scale of every shot-noise variance term (A²/A of drive).
    pub fn shot_coefficient(&self) -> f64 {
        2.0 * self.electron_charge
            * self.multiplication
            * self.excess_noise_factor
            * self.bandwidth
    }
}

/// Electrical AC power decomposition at the front-end output.
#[derive(Debug, Clone, Copy)]
pub struct FrontEndPowers {
    /// Signal power p_s (W).
    pub signal_power: f64,
    /// Total noise power p_n (W).
    pub noise_power: f64,
    /// Total AC power p_x = p_s + p_n (W).
    pub total_power: f64,
    /// Input SNR p_s/p_n.
    pub input_snr: f64,
}

/// A simulated stream of received current samples.
#[derive(Debug, Clone)]
pub struct RxSampleStream {
    /// Received current x per transmit sample (A), DC included.
    pub samples: Vec<f64>,
    /// Seed the stream was generated from.
    pub seed: u64,
}

/// Stream generation with the internal optical and shot-noise series kept,
/// for statistical checks on the model itself.
#[derive(Debug, Clone)]
pub struct RxStreamParts {
    /// Received current x (A).
    pub samples: Vec<f64>,
    /// Instantaneous LED optical power b (W).
    pub optical_power: Vec<f64>,
    /// Signal-induced shot-noise draw n_d (A).
    pub shot_noise: Vec<f64>,
}

/// Input-independent noise variance σ_i² (A²).
///
/// Computed as σ_c² + 2qMF_AΔf·β·b₀, unless a measured lumped density is
/// configured, in which case σ_i² = density·Δf/r_l.
pub fn independent_noise_variance(det: &DetectorParams) -> f64 {
    match det.independent_noise_density_override {
        Some(density) => density * det.bandwidth / det.load_resistance,
        None => {
            det.circuit_noise_variance
                + det.shot_coefficient() * det.responsivity * det.ambient_optical_power
        }
    }
}

/// Electrical signal power `p_s = (hαβ)²·D[s]·r_l` (W).
pub fn signal_power(h: f64, tx: &TransmitterParams, det: &DetectorParams) -> f64 {
    let gain = h * tx.conversion_coeff * det.responsivity;
    gain * gain * tx.signal_variance * det.load_resistance
}

/// Total front-end noise power (W): amplified transmitter noise, average
/// signal-induced shot noise, and the input-independent floor.
pub fn noise_power(h: f64, tx: &TransmitterParams, det: &DetectorParams) -> f64 {
    let p_s = signal_power(h, tx, det);
    let transmitter_term = tx.noise_signal_ratio * p_s;
    let shot_term = det.shot_coefficient()
        * (p_s * det.load_resistance / tx.signal_variance).sqrt()
        * (tx.signal_mean + tx.bias_voltage);
    let floor = independent_noise_variance(det) * det.load_resistance;
    transmitter_term + shot_term + floor
}

/// Input SNR p_s/p_n; zero when the channel gain is zero.
pub fn input_snr(h: f64, tx: &TransmitterParams, det: &DetectorParams) -> f64 {
    let p_s = signal_power(h, tx, det);
    if p_s == 0.0 {
        return 0.0;
    }
    p_s / noise_power(h, tx, det)
}

/// Full power decomposition at channel gain `h`.
pub fn front_end_powers(h: f64, tx: &TransmitterParams, det: &DetectorParams) -> FrontEndPowers {
    let signal_power = signal_power(h, tx, det);
    let noise_power = noise_power(h, tx, det);
    FrontEndPowers {
        signal_power,
        noise_power,
        total_power: signal_power + noise_power,
        input_snr: if signal_power == 0.0 {
            0.0
        } else {
            signal_power / noise_power
        },
    }
}

/// Monte Carlo generation of the received current for a transmit sample
/// stream, keeping the internal series. Deterministic for a given seed and
/// independent of how batches are scheduled.
pub fn simulate_rx_stream_parts(
    tx: &TransmitterParams,
    det: &DetectorParams,
    h: f64,
    tx_samples: &[f64],
    seed: u64,
) -> Result<RxStreamParts> {
    if let Some(s) = tx_samples
        .iter()
        .find(|&&s| s + tx.bias_voltage < 0.0)
    {
        return Err(Error::Domain(format!(
            "transmit sample {s} drives the optical power negative at bias {}",
            tx.bias_voltage
        )));
    }
    let sigma_t = tx.noise_variance().sqrt();
    let sigma_i = independent_noise_variance(det).sqrt();
    // per-sample shot variance scale: σ_d²(s) = 2qMF_AΔf·hαβ·(s + v_b)
    let shot_scale = det.shot_coefficient() * h * tx.conversion_coeff * det.responsivity;

    let chunks: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = tx_samples
        .par_chunks(STREAM_BATCH)
        .enumerate()
        .map(|(batch, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, batch as u64));
            let unit = Normal::new(0.0, 1.0).expect("unit normal");
            let mut x = Vec::with_capacity(chunk.len());
            let mut b = Vec::with_capacity(chunk.len());
            let mut nd = Vec::with_capacity(chunk.len());
            for &s in chunk {
                let n_t = sigma_t * unit.sample(&mut rng);
                let optical = tx.conversion_coeff * (s + n_t + tx.bias_voltage);
                let n_i = sigma_i * unit.sample(&mut rng);
                let n_d = (shot_scale * (s + tx.bias_voltage)).sqrt() * unit.sample(&mut rng);
                x.push(det.responsivity * (h * optical + det.ambient_optical_power) + n_i + n_d);
                b.push(optical);
                nd.push(n_d);
            }
            (x, b, nd)
        })
        .collect();

    let mut parts = RxStreamParts {
        samples: Vec::with_capacity(tx_samples.len()),
        optical_power: Vec::with_capacity(tx_samples.len()),
        shot_noise: Vec::with_capacity(tx_samples.len()),
    };
    for (x, b, nd) in chunks {
        parts.samples.extend(x);
        parts.optical_power.extend(b);
        parts.shot_noise.extend(nd);
    }
    Ok(parts)
}

/// Monte Carlo generation of the received current stream.
pub fn simulate_rx_stream(
    tx: &TransmitterParams,
    det: &DetectorParams,
    h: f64,
    tx_samples: &[f64],
    seed: u64,
) -> Result<RxSampleStream> {
    let parts = simulate_rx_stream_parts(tx, det, h, tx_samples, seed)?;
    Ok(RxSampleStream {
        samples: parts.samples,
        seed,
    })
}

/// Empirical AC power of a current stream: variance (mean removed) times r_l.
pub fn ac_power(samples: &[f64], load_resistance: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var * load_resistance
}

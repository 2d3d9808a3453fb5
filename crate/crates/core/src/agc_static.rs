//! Settled (equilibrium) AGC amplifier model.
//!
//! Piecewise gain between the equilibrium thresholds, output power and SNR,
//! the maximum-gain design margin, the dynamic-range analysis, and the sweep
//! generators behind the SNR and maximum-gain studies.

use crate::error::{require_positive, Error, Result};
use crate::frontend::{self, DetectorParams, TransmitterParams};
use crate::units::linear_to_db;

/// Linear input SNR both thresholds must exceed for p_x ≈ p_s to hold.
const DYNAMIC_RANGE_SNR_FLOOR: f64 = 10.0;

/// Equilibrium-state AGC amplifier parameters. All values linear SI.
#[derive(Debug, Clone, Copy)]
pub struct AgcStaticParams {
    /// Maximum VGA power gain g_max.
    pub max_gain: f64,
    /// Minimum VGA power gain g_min.
    pub min_gain: f64,
    /// Equilibrium output power p_e (W).
    pub equilibrium_power: f64,
    /// Amplifier-added noise power p_a (W).
    pub agc_noise_power: f64,
}

/// Operating region of the piecewise gain law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Input below the lower threshold; amplifier pinned at g_max.
    BelowEquilibrium,
    /// Input inside [p_l, p_u]; output held at p_e.
    Equilibrium,
    /// Input above the upper threshold; amplifier pinned at g_min.
    AboveEquilibrium,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::BelowEquilibrium => "below_equilibrium",
            Region::Equilibrium => "equilibrium",
            Region::AboveEquilibrium => "above_equilibrium",
        }
    }
}

/// Output of the settled amplifier for one input condition.
#[derive(Debug, Clone, Copy)]
pub struct AgcOutput {
    /// Gain actually applied.
    pub gain_applied: f64,
    /// Output power p_y = g·p_x + p_a (W).
    pub output_power: f64,
    /// Output SNR (linear).
    pub output_snr: f64,
    /// Region the input power falls in.
    pub region: Region,
    /// True in the saturated high-input region, where the real circuit
    /// produces large harmonic distortion.
    pub distortion_flag: bool,
}

/// Dynamic-range figures implied by the equilibrium thresholds.
#[derive(Debug, Clone, Copy)]
pub struct DynamicRangeReport {
    /// Equilibrium range DR = 10·log₁₀(p_u/p_l) (dB).
    pub equilibrium_range_db: f64,
    /// Received-optical-power range, DR/2 under the p_x ≈ p_s approximation (dB).
    pub optical_range_db: f64,
    /// Channel gain at the lower threshold.
    pub gain_at_lower: f64,
    /// Channel gain at the upper threshold.
    pub gain_at_upper: f64,
    /// Input SNR at the lower threshold (linear).
    pub snr_at_lower: f64,
    /// Input SNR at the upper threshold (linear).
    pub snr_at_upper: f64,
    /// True when the SNR at both thresholds exceeds 10, so p_x ≈ p_s holds.
    pub validity: bool,
}

/// One row of the equilibrium-state SNR sweep.
#[derive(Debug, Clone, Copy)]
pub struct SnrSweepRow {
    pub agc_index: f64,
    pub input_snr: f64,
    pub output_snr: f64,
}

/// One row of the maximum-gain sweep across a channel-gain grid.
#[derive(Debug, Clone, Copy)]
pub struct GmaxSweepRow {
    pub max_gain: f64,
    pub channel_gain: f64,
    pub total_power: f64,
    pub input_snr: f64,
    pub output_snr: f64,
    pub region: Region,
    /// Output SNR of the fixed-gain reference amplifier with the same p_a.
    pub reference_snr: f64,
}

impl AgcStaticParams {
    pub fn new(
        max_gain: f64,
        min_gain: f64,
        equilibrium_power: f64,
        agc_noise_power: f64,
    ) -> Result<Self> {
        require_positive("min_gain", min_gain)?;
        require_positive("max_gain", max_gain)?;
        if min_gain > max_gain {
            return Err(Error::invalid(
                "min_gain",
                format!("need g_min ≤ g_max, got g_min {min_gain}, g_max {max_gain}"),
            ));
        }
        require_positive("agc_noise_power", agc_noise_power)?;
        if agc_noise_power >= equilibrium_power {
            return Err(Error::invalid(
                "agc_noise_power",
                format!(
                    "need p_a < p_e, got p_a {agc_noise_power}, p_e {equilibrium_power}"
                ),
            ));
        }
        Ok(Self {
            max_gain,
            min_gain,
            equilibrium_power,
            agc_noise_power,
        })
    }

    /// Build from a measured amplifier noise density (W/Hz) and bandwidth.
    pub fn from_noise_density(
        max_gain: f64,
        min_gain: f64,
        equilibrium_power: f64,
        noise_density: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        Self::new(max_gain, min_gain, equilibrium_power, noise_density * bandwidth)
    }

    /// AGC index m = p_e/p_a.
    pub fn agc_index(&self) -> f64 {
        self.equilibrium_power / self.agc_noise_power
    }

    /// Equilibrium thresholds (p_l, p_u).
    pub fn thresholds(&self) -> (f64, f64) {
        let net = self.equilibrium_power - self.agc_noise_power;
        (net / self.max_gain, net / self.min_gain)
    }

    /// Piecewise gain law: g_max below p_l, (p_e−p_a)/p_x in between, g_min
    /// above p_u. Continuous at both thresholds.
    pub fn gain(&self, total_power: f64) -> f64 {
        let (p_l, p_u) = self.thresholds();
        if total_power < p_l {
            self.max_gain
        } else if total_power <= p_u {
            (self.equilibrium_power - self.agc_noise_power) / total_power
        } else {
            self.min_gain
        }
    }

    /// Region of the gain law the input falls in.
    pub fn region(&self, total_power: f64) -> Region {
        let (p_l, p_u) = self.thresholds();
        if total_power < p_l {
            Region::BelowEquilibrium
        } else if total_power <= p_u {
            Region::Equilibrium
        } else {
            Region::AboveEquilibrium
        }
    }

    /// Output power p_y = g·p_x + p_a; equals p_e exactly on [p_l, p_u].
    pub fn output_power(&self, total_power: f64) -> f64 {
        self.gain(total_power) * total_power + self.agc_noise_power
    }

    /// Settled-amplifier response for an input described by its SNR and
    /// noise power (so p_x = p_n·(1 + SNR_i)).
    pub fn output_snr(&self, input_snr: f64, noise_power: f64) -> AgcOutput {
        let total_power = noise_power * (1.0 + input_snr);
        let gain = self.gain(total_power);
        let region = self.region(total_power);
        let output_snr = input_snr / (1.0 + self.agc_noise_power / (gain * noise_power));
        AgcOutput {
            gain_applied: gain,
            output_power: gain * total_power + self.agc_noise_power,
            output_snr,
            region,
            distortion_flag: region == Region::AboveEquilibrium,
        }
    }
}

/// AGC index m = p_e/p_a; requires p_a < p_e so the index exceeds one.
pub fn agc_index(equilibrium_power: f64, agc_noise_power: f64) -> Result<f64> {
    require_positive("agc_noise_power", agc_noise_power)?;
    if agc_noise_power >= equilibrium_power {
        return Err(Error::invalid(
            "agc_noise_power",
            format!("need p_a < p_e, got p_a {agc_noise_power}, p_e {equilibrium_power}"),
        ));
    }
    Ok(equilibrium_power / agc_noise_power)
}

/// The ratio p_a to the front-end noise floor: the scale g_max must be large
/// against to avoid an output-SNR penalty at weak inputs.
pub fn gmax_design_margin(agc_noise_power: f64, noise_floor: f64) -> f64 {
    agc_noise_power / noise_floor
}

/// Closed-form equilibrium-region output SNR (m−1)·SNR_i/(m+SNR_i).
pub fn equilibrium_output_snr(agc_index: f64, input_snr: f64) -> f64 {
    (agc_index - 1.0) * input_snr / (agc_index + input_snr)
}

/// Equilibrium-state output SNR over a grid of AGC indices and input SNRs.
/// All values linear; indices below one are rejected.
pub fn snr_sweep(index_list: &[f64], input_snr_grid: &[f64]) -> Result<Vec<SnrSweepRow>> {
    for &m in index_list {
        if !m.is_finite() || m < 1.0 {
            return Err(Error::invalid(
                "index_list",
                format!("AGC index must be ≥ 1, got {m}"),
            ));
        }
    }
    let mut rows = Vec::with_capacity(index_list.len() * input_snr_grid.len());
    for &m in index_list {
        for &snr in input_snr_grid {
            rows.push(SnrSweepRow {
                agc_index: m,
                input_snr: snr,
                output_snr: equilibrium_output_snr(m, snr),
            });
        }
    }
    Ok(rows)
}

/// Output-SNR sweep across a channel-gain grid for several maximum gains,
/// with a fixed-gain reference amplifier (same noise power) alongside.
#[allow(clippy::too_many_arguments)]
pub fn gmax_sweep(
    tx: &TransmitterParams,
    det: &DetectorParams,
    max_gain_list: &[f64],
    gain_range: f64,
    equilibrium_power: f64,
    agc_noise_power: f64,
    reference_gain: f64,
    channel_gain_grid: &[f64],
) -> Result<Vec<GmaxSweepRow>> {
    if !gain_range.is_finite() || gain_range < 1.0 {
        return Err(Error::invalid(
            "gain_range",
            format!("linear gain range must be ≥ 1, got {gain_range}"),
        ));
    }
    let mut rows = Vec::with_capacity(max_gain_list.len() * channel_gain_grid.len());
    for &g_max in max_gain_list {
        let params = AgcStaticParams::new(
            g_max,
            g_max / gain_range,
            equilibrium_power,
            agc_noise_power,
        )?;
        for &h in channel_gain_grid {
            let powers = frontend::front_end_powers(h, tx, det);
            let out = params.output_snr(powers.input_snr, powers.noise_power);
            let reference_snr = powers.input_snr
                / (1.0 + agc_noise_power / (reference_gain * powers.noise_power));
            rows.push(GmaxSweepRow {
                max_gain: g_max,
                channel_gain: h,
                total_power: powers.total_power,
                input_snr: powers.input_snr,
                output_snr: out.output_snr,
                region: out.region,
                reference_snr,
            });
        }
    }
    Ok(rows)
}

/// Dynamic-range analysis of the equilibrium range, mapped back to channel
/// gain through p ≈ p_s (valid while the SNR at both thresholds exceeds 10).
pub fn dynamic_range(
    params: &AgcStaticParams,
    tx: &TransmitterParams,
    det: &DetectorParams,
) -> DynamicRangeReport {
    let (p_l, p_u) = params.thresholds();
    let equilibrium_range_db = linear_to_db(p_u / p_l);
    // invert p ≈ p_s = (hαβ)²·D[s]·r_l for the threshold channel gains
    let alpha_beta = tx.conversion_coeff * det.responsivity;
    let h_for = |p: f64| (p / (tx.signal_variance * det.load_resistance)).sqrt() / alpha_beta;
    let gain_at_lower = h_for(p_l);
    let gain_at_upper = h_for(p_u);
    let snr_at_lower = frontend::input_snr(gain_at_lower, tx, det);
    let snr_at_upper = frontend::input_snr(gain_at_upper, tx, det);
    DynamicRangeReport {
        equilibrium_range_db,
        optical_range_db: 0.5 * equilibrium_range_db,
        gain_at_lower,
        gain_at_upper,
        snr_at_lower,
        snr_at_upper,
        validity: snr_at_lower > DYNAMIC_RANGE_SNR_FLOOR && snr_at_upper > DYNAMIC_RANGE_SNR_FLOOR,
    }
}

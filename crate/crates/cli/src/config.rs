//! Run configuration.
//!
//! Plain-text TOML with explicit unit suffixes on every dimensioned key
//! (`_db`, `_dbm`, `_hz`, `_m`, `_s`, ...). Unspecified keys take the
//! reference bench defaults; unknown keys are errors. All dB/dBm values are
//! converted to linear SI when the core parameter types are built.

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use vlc_agc_core::agc_loop::LoopParams;
use vlc_agc_core::agc_static::AgcStaticParams;
use vlc_agc_core::channel::ChannelParams;
use vlc_agc_core::frontend::{DetectorParams, TransmitterParams};
use vlc_agc_core::scenario::{Tracking, TrajectoryConfig, Vibration};
use vlc_agc_core::system::SystemParams;
use vlc_agc_core::units::{db_to_linear, dbm_to_watts};
use vlc_agc_core::waveform::{AgcMode, BitSource, OokConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub transmitter: TransmitterSection,
    pub detector: DetectorSection,
    pub channel: ChannelSection,
    pub agc: AgcSection,
    #[serde(rename = "loop")]
    pub loop_section: LoopSection,
    pub ook: OokSection,
    pub sweep: SweepSection,
    pub ber: BerSection,
    pub loop_step: LoopStepSection,
    pub trajectory: TrajectorySection,
    pub mobile: MobileSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            transmitter: Default::default(),
            detector: Default::default(),
            channel: Default::default(),
            agc: Default::default(),
            loop_section: Default::default(),
            ook: Default::default(),
            sweep: Default::default(),
            ber: Default::default(),
            loop_step: Default::default(),
            trajectory: Default::default(),
            mobile: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmitterSection {
    pub signal_variance_a2: f64,
    pub signal_mean_a: f64,
    pub bias_voltage_v: f64,
    pub led_threshold_voltage_v: f64,
    pub noise_signal_ratio_db: f64,
    pub conversion_coeff_w_per_a: f64,
}

impl Default for TransmitterSection {
    fn default() -> Self {
        Self {
            signal_variance_a2: 0.08,
            signal_mean_a: 0.0,
            bias_voltage_v: 8.0,
            led_threshold_voltage_v: 6.0,
            noise_signal_ratio_db: -30.0,
            conversion_coeff_w_per_a: 0.125,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub responsivity_a_per_w: f64,
    pub electron_charge_c: f64,
    pub multiplication: f64,
    pub excess_noise_factor: f64,
    pub bandwidth_hz: f64,
    pub ambient_optical_power_w: f64,
    pub circuit_noise_variance_a2: f64,
    /// Measured lumped input-independent noise density (mW/Hz). Set to a
    /// negative value to disable the override and use the circuit/ambient
    /// computation instead.
    pub independent_noise_density_mw_per_hz: f64,
    pub load_resistance_ohm: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 460.0,
            electron_charge_c: 1.6e-19,
            multiplication: 30.0,
            excess_noise_factor: 4.77,
            bandwidth_hz: 12.5e6,
            ambient_optical_power_w: 0.0,
            circuit_noise_variance_a2: 6.654e-18 * 12.5e6 / 50.0,
            independent_noise_density_mw_per_hz: 6.654e-15,
            load_resistance_ohm: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub half_power_angle_deg: f64,
    pub receiver_area_m2: f64,
    pub optical_filter_gain: f64,
    pub half_fov_deg: f64,
    pub refractive_index: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            half_power_angle_deg: 60.0,
            receiver_area_m2: 7.07e-6,
            optical_filter_gain: 1.0,
            half_fov_deg: 60.0,
            refractive_index: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgcSection {
    pub max_gain_db: f64,
    pub gain_range_db: f64,
    pub equilibrium_output_dbm: f64,
    pub noise_density_mw_per_hz: f64,
}

impl Default for AgcSection {
    fn default() -> Self {
        Self {
            max_gain_db: 40.0,
            gain_range_db: 48.0,
            equilibrium_output_dbm: 0.0,
            noise_density_mw_per_hz: 2.71e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopSection {
    /// Linearized loop time constant the integrator gain is calibrated to (s).
    pub time_constant_s: f64,
    pub sample_interval_s: f64,
    /// Optional overrides of the calibrated constants.
    pub ref_scale: Option<f64>,
    pub integrator_gain_per_v_s: Option<f64>,
    pub reference_voltage_v: Option<f64>,
    pub vga_base_gain: Option<f64>,
    pub vga_exponent_slope_per_v: Option<f64>,
    pub detector_gain_v_per_w: Option<f64>,
    pub detector_time_constant_s: Option<f64>,
}

impl Default for LoopSection {
    fn default() -> Self {
        Self {
            time_constant_s: vlc_agc_core::system::DEFAULT_LOOP_TIME_CONSTANT,
            sample_interval_s: vlc_agc_core::system::DEFAULT_LOOP_SAMPLE_INTERVAL,
            ref_scale: None,
            integrator_gain_per_v_s: None,
            reference_voltage_v: None,
            vga_base_gain: None,
            vga_exponent_slope_per_v: None,
            detector_gain_v_per_w: None,
            detector_time_constant_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OokSection {
    pub bit_rate_hz: f64,
    pub samples_per_bit: usize,
    pub prbs_order: u32,
    /// Explicit repeating bit pattern, e.g. "1011001"; overrides the PRBS.
    pub pattern: Option<String>,
}

impl Default for OokSection {
    fn default() -> Self {
        Self {
            bit_rate_hz: 25e6,
            samples_per_bit: 1,
            prbs_order: 23,
            pattern: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub m_list_db: Vec<f64>,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    pub snr_step_db: f64,
    pub gmax_list_db: Vec<f64>,
    pub reference_gain_db: f64,
    pub channel_gain_min: f64,
    pub channel_gain_max: f64,
    pub channel_gain_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m_list_db: vec![0.0, 10.0, 20.0, 30.0, 40.0],
            snr_min_db: 0.0,
            snr_max_db: 50.0,
            snr_step_db: 1.0,
            gmax_list_db: vec![25.0, 31.0, 37.0, 40.0],
            reference_gain_db: 10.0,
            channel_gain_min: 1e-9,
            channel_gain_max: 1e-3,
            channel_gain_points: 121,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerSection {
    /// Amplifier stage: "fixed", "static" or "loop".
    pub agc_mode: String,
    pub fixed_gain_db: f64,
    /// Noise density of the fixed amplifier (mW/Hz); zero means noiseless.
    pub fixed_noise_density_mw_per_hz: f64,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    pub snr_step_db: f64,
    pub n_bits: u64,
    /// Total input AC power (dBm); defaults to the middle of the AGC
    /// equilibrium range when unset.
    pub input_power_dbm: Option<f64>,
}

impl Default for BerSection {
    fn default() -> Self {
        Self {
            agc_mode: "static".into(),
            fixed_gain_db: 10.0,
            fixed_noise_density_mw_per_hz: 0.0,
            snr_min_db: 0.0,
            snr_max_db: 12.0,
            snr_step_db: 1.0,
            n_bits: 4_000_000,
            input_power_dbm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopStepSection {
    pub base_input_power_dbm: f64,
    pub step_db: f64,
    pub duration_s: f64,
}

impl Default for LoopStepSection {
    fn default() -> Self {
        Self {
            base_input_power_dbm: -20.0,
            step_db: 3.0,
            duration_s: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub rail_length_m: f64,
    pub speed_mps: f64,
    pub standoff_m: f64,
    pub start_position_m: f64,
    /// "ideal" or "lag".
    pub tracking: String,
    pub tracking_lag_s: f64,
    pub vibration_amplitude_db: Option<f64>,
    pub vibration_frequency_hz: Option<f64>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            rail_length_m: 2.0,
            speed_mps: 0.25,
            standoff_m: 3.0,
            start_position_m: 0.0,
            tracking: "ideal".into(),
            tracking_lag_s: 0.05,
            vibration_amplitude_db: None,
            vibration_frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobileSection {
    /// Amplifier stage during the mobile run: "fixed", "static" or "loop".
    pub agc_mode: String,
    /// Fixed-mode power gain (dB); shares the AGC amplifier noise.
    pub fixed_gain_db: f64,
    pub duration_s: f64,
    pub window_s: f64,
    pub bits_per_window: u64,
}

impl Default for MobileSection {
    fn default() -> Self {
        Self {
            agc_mode: "static".into(),
            fixed_gain_db: 4.5,
            duration_s: 16.0,
            window_s: 1.0,
            bits_per_window: 100_000,
        }
    }
}

impl RunConfig {
    /// Parse a configuration file. An empty file yields all defaults.
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
        // revalidate everything through the core constructors
        config.system()?;
        config.loop_params()?;
        config.ook_config()?;
        config.trajectory()?;
        config.ber_mode()?;
        config.mobile_mode()?;
        Ok(config)
    }

    /// Canonical serialized form; parsing it back is a fixed point.
    pub fn canonical(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn system(&self) -> anyhow::Result<SystemParams> {
        let t = &self.transmitter;
        let transmitter = TransmitterParams::new(
            t.signal_variance_a2,
            t.signal_mean_a,
            t.bias_voltage_v,
            t.conversion_coeff_w_per_a,
            db_to_linear(t.noise_signal_ratio_db),
        )
        .map_err(|e| anyhow!("[transmitter] {e}"))?;
        let d = &self.detector;
        let override_density = if d.independent_noise_density_mw_per_hz < 0.0 {
            None
        } else {
            Some(d.independent_noise_density_mw_per_hz * 1e-3)
        };
        let detector = DetectorParams::new(
            d.responsivity_a_per_w,
            d.electron_charge_c,
            d.multiplication,
            d.excess_noise_factor,
            d.bandwidth_hz,
            d.ambient_optical_power_w,
            d.circuit_noise_variance_a2,
            d.load_resistance_ohm,
            override_density,
        )
        .map_err(|e| anyhow!("[detector] {e}"))?;
        let c = &self.channel;
        let channel = ChannelParams::new(
            c.half_power_angle_deg.to_radians(),
            c.receiver_area_m2,
            c.optical_filter_gain,
            c.half_fov_deg.to_radians(),
            c.refractive_index,
        )
        .map_err(|e| anyhow!("[channel] {e}"))?;
        let a = &self.agc;
        let agc = AgcStaticParams::from_noise_density(
            db_to_linear(a.max_gain_db),
            db_to_linear(a.max_gain_db - a.gain_range_db),
            dbm_to_watts(a.equilibrium_output_dbm),
            a.noise_density_mw_per_hz * 1e-3,
            d.bandwidth_hz,
        )
        .map_err(|e| anyhow!("[agc] {e}"))?;
        let system = SystemParams {
            transmitter,
            detector,
            channel,
            agc,
            led_threshold_voltage: t.led_threshold_voltage_v,
        };
        system
            .check_drive(t.signal_variance_a2.sqrt())
            .map_err(|e| anyhow!("[transmitter] {e}"))?;
        Ok(system)
    }

    pub fn loop_params(&self) -> anyhow::Result<LoopParams> {
        let system = self.system()?;
        let l = &self.loop_section;
        let mut params = LoopParams::calibrated(
            system.agc.equilibrium_power,
            system.agc.agc_noise_power,
            system.agc.min_gain,
            system.agc.max_gain,
            system.detector.load_resistance,
            l.time_constant_s,
            l.sample_interval_s,
        )
        .map_err(|e| anyhow!("[loop] {e}"))?;
        if let Some(v) = l.ref_scale {
            params.ref_scale = v;
        }
        if let Some(v) = l.integrator_gain_per_v_s {
            params.integrator_gain = v;
        }
        if let Some(v) = l.reference_voltage_v {
            params.reference_voltage = v;
        }
        if let Some(v) = l.vga_base_gain {
            params.vga_base_gain = v;
        }
        if let Some(v) = l.vga_exponent_slope_per_v {
            params.vga_exponent_slope = v;
        }
        if let Some(v) = l.detector_gain_v_per_w {
            params.detector_gain = v;
        }
        if let Some(v) = l.detector_time_constant_s {
            params.detector_time_constant = v;
        }
        params.validate().map_err(|e| anyhow!("[loop] {e}"))?;
        Ok(params)
    }

    pub fn ook_config(&self) -> anyhow::Result<OokConfig> {
        let o = &self.ook;
        let source = match &o.pattern {
            Some(text) => {
                let mut bits = Vec::with_capacity(text.len());
                for ch in text.chars() {
                    match ch {
                        '0' => bits.push(false),
                        '1' => bits.push(true),
                        _ => bail!("[ook] pattern may contain only '0' and '1', found {ch:?}"),
                    }
                }
                BitSource::Pattern(bits)
            }
            None => BitSource::Prbs { order: o.prbs_order },
        };
        let cfg = OokConfig {
            bit_rate: o.bit_rate_hz,
            samples_per_bit: o.samples_per_bit,
            amplitude: self.transmitter.signal_variance_a2.sqrt(),
            source,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| anyhow!("[ook] {e}"))?;
        Ok(cfg)
    }

    pub fn trajectory(&self) -> anyhow::Result<TrajectoryConfig> {
        let t = &self.trajectory;
        let tracking = match t.tracking.as_str() {
            "ideal" => Tracking::Ideal,
            "lag" => Tracking::Lag {
                delay: t.tracking_lag_s,
            },
            other => bail!("[trajectory] tracking must be \"ideal\" or \"lag\", got {other:?}"),
        };
        let vibration = match (t.vibration_amplitude_db, t.vibration_frequency_hz) {
            (Some(amplitude_db), Some(frequency_hz)) => Some(Vibration {
                amplitude_db,
                frequency_hz,
            }),
            (None, None) => None,
            _ => bail!(
                "[trajectory] vibration_amplitude_db and vibration_frequency_hz \
                 must be set together"
            ),
        };
        let cfg = TrajectoryConfig {
            rail_length: t.rail_length_m,
            speed: t.speed_mps,
            standoff: t.standoff_m,
            start_position: t.start_position_m,
            tracking,
            vibration,
        };
        cfg.validate(self.detector.bandwidth_hz)
            .map_err(|e| anyhow!("[trajectory] {e}"))?;
        Ok(cfg)
    }

    /// Amplifier stage for the BER experiment.
    pub fn ber_mode(&self) -> anyhow::Result<AgcMode> {
        let system = self.system()?;
        mode_from(
            &self.ber.agc_mode,
            self.ber.fixed_gain_db,
            self.ber.fixed_noise_density_mw_per_hz * 1e-3 * self.detector.bandwidth_hz,
            &system,
            self,
        )
        .map_err(|e| anyhow!("[ber] {e}"))
    }

    /// Amplifier stage for the mobile run; the fixed amplifier shares the
    /// AGC's measured noise power.
    pub fn mobile_mode(&self) -> anyhow::Result<AgcMode> {
        let system = self.system()?;
        mode_from(
            &self.mobile.agc_mode,
            self.mobile.fixed_gain_db,
            system.agc.agc_noise_power,
            &system,
            self,
        )
        .map_err(|e| anyhow!("[mobile] {e}"))
    }

    /// Default BER-experiment input power: middle of the equilibrium range.
    pub fn ber_input_power(&self) -> anyhow::Result<f64> {
        if let Some(dbm) = self.ber.input_power_dbm {
            return Ok(dbm_to_watts(dbm));
        }
        let agc = self.system()?.agc;
        let (p_l, p_u) = agc.thresholds();
        Ok((p_l * p_u).sqrt())
    }
}

fn mode_from(
    name: &str,
    fixed_gain_db: f64,
    fixed_noise_power: f64,
    system: &SystemParams,
    config: &RunConfig,
) -> anyhow::Result<AgcMode> {
    match name {
        "fixed" => Ok(AgcMode::Fixed {
            gain: db_to_linear(fixed_gain_db),
            noise_power: fixed_noise_power,
        }),
        "static" => Ok(AgcMode::Static(system.agc)),
        "loop" => Ok(AgcMode::Loop(config.loop_params()?)),
        other => bail!("agc_mode must be \"fixed\", \"static\" or \"loop\", got {other:?}"),
    }
}

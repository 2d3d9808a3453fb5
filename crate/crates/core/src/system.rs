//! Bundled system parameters.
//!
//! One struct carrying every component parameter of the simulated link, with
//! defaults matching the reference bench setup: an APD front-end at 12.5 MHz
//! behind a 3 mm photodiode, and an AGC amplifier with a 48 dB gain range
//! regulating to 0 dBm.

use crate::agc_loop::LoopParams;
use crate::agc_static::AgcStaticParams;
use crate::channel::ChannelParams;
use crate::error::Result;
use crate::frontend::{DetectorParams, TransmitterParams};
use crate::units::db_to_linear;

/// Loop time constant giving a 10–90% rise time of roughly 1 ms.
pub const DEFAULT_LOOP_TIME_CONSTANT: f64 = 4.55e-4;

/// Default loop simulation tick (s).
pub const DEFAULT_LOOP_SAMPLE_INTERVAL: f64 = 1e-6;

/// Every physical constant and component parameter of the simulated chain.
#[derive(Debug, Clone, Copy)]
pub struct SystemParams {
    pub transmitter: TransmitterParams,
    pub detector: DetectorParams,
    pub channel: ChannelParams,
    pub agc: AgcStaticParams,
    /// LED turn-on threshold (V); the bias minus signal swing must clear it.
    pub led_threshold_voltage: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let transmitter = TransmitterParams::new(0.08, 0.0, 8.0, 0.125, db_to_linear(-30.0))
            .expect("reference transmitter");
        let detector = DetectorParams::new(
            460.0,
            1.6e-19,
            30.0,
            4.77,
            12.5e6,
            0.0,
            // lumped measured density referred back through the load
            6.654e-18 * 12.5e6 / 50.0,
            50.0,
            Some(6.654e-18),
        )
        .expect("reference detector");
        let channel = ChannelParams::new(
            60f64.to_radians(),
            7.07e-6,
            1.0,
            60f64.to_radians(),
            1.5,
        )
        .expect("reference channel");
        let agc = AgcStaticParams::from_noise_density(
            db_to_linear(40.0),
            db_to_linear(40.0 - 48.0),
            1e-3,
            2.71e-15,
            12.5e6,
        )
        .expect("reference AGC");
        Self {
            transmitter,
            detector,
            channel,
            agc,
            led_threshold_voltage: 6.0,
        }
    }
}

impl SystemParams {
    /// Feedback-loop constants consistent with the static AGC parameters,
    /// calibrated to the default time constant.
    pub fn loop_params(&self) -> Result<LoopParams> {
        LoopParams::calibrated(
            self.agc.equilibrium_power,
            self.agc.agc_noise_power,
            self.agc.min_gain,
            self.agc.max_gain,
            self.detector.load_resistance,
            DEFAULT_LOOP_TIME_CONSTANT,
            DEFAULT_LOOP_SAMPLE_INTERVAL,
        )
    }

    /// Validate the cross-component drive constraint for a given signal
    /// amplitude.
    pub fn check_drive(&self, amplitude: f64) -> Result<()> {
        self.transmitter
            .check_drive_margin(self.led_threshold_voltage, amplitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::linear_to_db;

    #[test]
    fn defaults_are_consistent() {
        let sys = SystemParams::default();
        assert!((linear_to_db(sys.agc.agc_index()) - 44.7012).abs() < 1e-3);
        assert!((sys.channel.lambertian_index() - 1.0).abs() < 1e-12);
        sys.check_drive(0.08f64.sqrt()).unwrap();
        assert!(sys.check_drive(2.5).is_err());
        let lp = sys.loop_params().unwrap();
        assert!(
            (lp.linearized_time_constant() - DEFAULT_LOOP_TIME_CONSTANT).abs()
                / DEFAULT_LOOP_TIME_CONSTANT
                < 1e-9
        );
        assert!((lp.equilibrium_output_power() - 1e-3).abs() < 1e-15);
    }
}

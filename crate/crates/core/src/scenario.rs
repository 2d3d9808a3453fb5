//! Mobile-link simulation.
//!
//! A transmitter shuttles along a rail in front of a fixed receiver; channel
//! gain follows the geometry, the AGC (fixed, settled or feedback-loop model)
//! tracks the received power, and the bit-error rate is measured in
//! quasi-static windows through the full front-end Monte Carlo path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::agc_loop::LoopSim;
use crate::agc_static::Region;
use crate::channel::{channel_gain, ChannelGeometry};
use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::frontend::{front_end_powers, simulate_rx_stream};
use crate::seeding::derive_seed;
use crate::system::SystemParams;
use crate::waveform::{
    count_errors, generate_ook, hard_decision_demod, AgcMode, BerResult, OokConfig,
};

/// How the receiver is pointed at the moving transmitter.
#[derive(Debug, Clone, Copy)]
pub enum Tracking {
    /// Receiver normal always on the transmitter: zero incidence angle.
    Ideal,
    /// Receiver points at where the transmitter was `delay` seconds ago.
    Lag { delay: f64 },
}

/// Sinusoidal received-power perturbation, e.g. from vehicle vibration.
#[derive(Debug, Clone, Copy)]
pub struct Vibration {
    /// Peak electrical input-power deviation (dB).
    pub amplitude_db: f64,
    /// Perturbation frequency (Hz).
    pub frequency_hz: f64,
}

/// Rail geometry and motion profile.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryConfig {
    /// Rail length (m).
    pub rail_length: f64,
    /// Shuttle speed (m/s); zero freezes the transmitter in place.
    pub speed: f64,
    /// Perpendicular receiver standoff from the rail (m).
    pub standoff: f64,
    /// Starting rail position (m from the rail end the run begins at).
    pub start_position: f64,
    pub tracking: Tracking,
    pub vibration: Option<Vibration>,
}

impl TrajectoryConfig {
    pub fn validate(&self, bandwidth: f64) -> Result<()> {
        require_positive("rail_length", self.rail_length)?;
        require_nonnegative("speed", self.speed)?;
        require_positive("standoff", self.standoff)?;
        if !(0.0..=self.rail_length).contains(&self.start_position) {
            return Err(Error::invalid("start_position", "must lie on the rail"));
        }
        if let Tracking::Lag { delay } = self.tracking {
            require_nonnegative("tracking", delay)?;
        }
        if let Some(v) = self.vibration {
            require_positive("vibration", v.frequency_hz)?;
            if v.frequency_hz >= bandwidth / 100.0 {
                return Err(Error::invalid(
                    "vibration",
                    format!(
                        "frequency {} Hz too close to the system bandwidth {} Hz",
                        v.frequency_hz, bandwidth
                    ),
                ));
            }
        }
        Ok(())
    }

    /// One full back-and-forth period (s); infinite when parked.
    pub fn period(&self) -> f64 {
        if self.speed == 0.0 {
            f64::INFINITY
        } else {
            2.0 * self.rail_length / self.speed
        }
    }
}

/// Rail position at time `t`: a triangular wave over [0, rail_length]
/// starting from `start_position` on the ascending leg.
pub fn position_at(cfg: &TrajectoryConfig, t: f64) -> f64 {
    if cfg.speed == 0.0 {
        return cfg.start_position;
    }
    let shifted = cfg.speed * t + cfg.start_position;
    let wrapped = shifted.rem_euclid(2.0 * cfg.rail_length);
    if wrapped <= cfg.rail_length {
        wrapped
    } else {
        2.0 * cfg.rail_length - wrapped
    }
}

/// Link geometry for a transmitter at `position` with ideal pointing.
pub fn geometry_at(cfg: &TrajectoryConfig, position: f64) -> ChannelGeometry {
    let lateral = position - 0.5 * cfg.rail_length;
    ChannelGeometry {
        distance: cfg.standoff.hypot(lateral),
        emission_angle: (lateral.abs() / cfg.standoff).atan(),
        incidence_angle: 0.0,
    }
}

/// Link geometry at time `t` including the tracking model: lag pointing
/// turns into a nonzero incidence angle between the true line of sight and
/// the delayed estimate the receiver is aimed at.
pub fn geometry_at_time(cfg: &TrajectoryConfig, t: f64) -> ChannelGeometry {
    let position = position_at(cfg, t);
    let mut geometry = geometry_at(cfg, position);
    if let Tracking::Lag { delay } = cfg.tracking {
        let estimated = position_at(cfg, (t - delay).max(0.0));
        let lateral = position - 0.5 * cfg.rail_length;
        let lateral_est = estimated - 0.5 * cfg.rail_length;
        let error = (lateral.atan2(cfg.standoff) - lateral_est.atan2(cfg.standoff)).abs();
        geometry.incidence_angle = error.min(std::f64::consts::FRAC_PI_2);
    }
    geometry
}

/// Channel gain at time `t`, tracking and vibration included.
pub fn channel_gain_at_time(system: &SystemParams, cfg: &TrajectoryConfig, t: f64) -> f64 {
    let geometry = geometry_at_time(cfg, t);
    let mut h = channel_gain(&system.channel, &geometry);
    if let Some(v) = cfg.vibration {
        // peak power deviation of A dB → gain deviation of A/2 dB
        let db = v.amplitude_db * (2.0 * std::f64::consts::PI * v.frequency_hz * t).sin();
        h *= 10f64.powf(db / 20.0);
    }
    h
}

/// One quasi-static sample of the chain state.
#[derive(Debug, Clone, Copy)]
pub struct MobileSimRow {
    /// Window midpoint time (s).
    pub time: f64,
    /// Rail position (m).
    pub position: f64,
    /// Channel gain.
    pub channel_gain: f64,
    /// Front-end electrical AC power p_x (W).
    pub input_power: f64,
    /// Power gain actually applied by the amplifier stage.
    pub applied_gain: f64,
    /// Output power p_y (W).
    pub output_power: f64,
    /// Where p_x sits relative to the AGC equilibrium range.
    pub region: Region,
}

/// Windowed BER sample.
#[derive(Debug, Clone)]
pub struct WindowBer {
    /// Window midpoint time (s).
    pub time: f64,
    /// Rail position at the midpoint (m).
    pub position: f64,
    pub result: BerResult,
}

/// Output of a mobile run.
#[derive(Debug, Clone)]
pub struct MobileSimResult {
    pub rows: Vec<MobileSimRow>,
    pub windowed_ber: Vec<WindowBer>,
}

/// Length and windowing of a mobile run.
#[derive(Debug, Clone, Copy)]
pub struct MobileRunConfig {
    /// Total simulated time (s).
    pub duration: f64,
    /// BER window length (s).
    pub window: f64,
    /// Bits actually simulated per window (a sample of the window's bits).
    pub bits_per_window: u64,
}

/// One row of the parked-transmitter reference sweep.
#[derive(Debug, Clone)]
pub struct BenchmarkPoint {
    pub position: f64,
    pub channel_gain: f64,
    pub input_power: f64,
    pub output_power: f64,
    pub result: BerResult,
}

/// Mobile run: quasi-static windows, physical front-end Monte Carlo BER,
/// AGC tracking per the selected mode. Deterministic per seed.
pub fn run_mobile_sim(
    system: &SystemParams,
    mode: &AgcMode,
    trajectory: &TrajectoryConfig,
    run: &MobileRunConfig,
    ook: &OokConfig,
    seed: u64,
) -> Result<MobileSimResult> {
    trajectory.validate(system.detector.bandwidth)?;
    require_positive("window", run.window)?;
    if run.duration < run.window {
        return Err(Error::invalid(
            "window",
            "need 0 < window ≤ duration for at least one window",
        ));
    }
    let window_capacity = run.window * ook.bit_rate;
    if window_capacity < 1e4 {
        return Err(Error::invalid(
            "window",
            format!(
                "window holds only {window_capacity:.0} bits; need ≥ 10⁴ for quasi-static BER"
            ),
        ));
    }
    if run.bits_per_window as f64 > window_capacity {
        return Err(Error::invalid(
            "bits_per_window",
            "cannot simulate more bits than the window holds",
        ));
    }
    let amplitude = system.transmitter.signal_variance.sqrt();
    system.check_drive(amplitude)?;

    // loop mode keeps one continuously-stepped simulation across windows
    let mut loop_sim = match mode {
        AgcMode::Loop(params) => {
            let mut sim = LoopSim::new(*params, derive_seed(seed, 0xB00))?;
            let h0 = channel_gain_at_time(system, trajectory, 0.0);
            let p0 = front_end_powers(h0, &system.transmitter, &system.detector).total_power;
            sim.settle(p0, 1.0)?;
            Some(sim)
        }
        _ => None,
    };

    let n_windows = (run.duration / run.window).floor() as usize;
    let mut rows = Vec::with_capacity(n_windows);
    let mut windowed_ber = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let t_start = w as f64 * run.window;
        let t_mid = t_start + 0.5 * run.window;

        // advance the loop continuously over the first half of the window,
        // sample its gain at the midpoint, then finish the window
        let applied_gain;
        let added_noise;
        let h_mid = channel_gain_at_time(system, trajectory, t_mid);
        let powers_mid = front_end_powers(h_mid, &system.transmitter, &system.detector);
        match (mode, loop_sim.as_mut()) {
            (AgcMode::Fixed { gain, noise_power }, _) => {
                applied_gain = *gain;
                added_noise = *noise_power;
            }
            (AgcMode::Static(params), _) => {
                applied_gain = params.gain(powers_mid.total_power);
                added_noise = params.agc_noise_power;
            }
            (AgcMode::Loop(params), Some(sim)) => {
                advance_loop(system, trajectory, sim, t_start, t_mid);
                applied_gain = sim.effective_gain();
                advance_loop(system, trajectory, sim, t_mid, t_start + run.window);
                added_noise = params.agc_noise_power;
            }
            (AgcMode::Loop(_), None) => unreachable!("loop sim built above"),
        }

        rows.push(MobileSimRow {
            time: t_mid,
            position: position_at(trajectory, t_mid),
            channel_gain: h_mid,
            input_power: powers_mid.total_power,
            applied_gain,
            output_power: applied_gain * powers_mid.total_power + added_noise,
            region: system.agc.region(powers_mid.total_power),
        });

        let result = physical_window_ber(
            system,
            ook,
            h_mid,
            applied_gain,
            added_noise,
            run.bits_per_window,
            derive_seed(seed, 1 + w as u64),
        )?;
        windowed_ber.push(WindowBer {
            time: t_mid,
            position: position_at(trajectory, t_mid),
            result,
        });
    }
    Ok(MobileSimResult { rows, windowed_ber })
}

/// Parked-transmitter reference: steady-state power and BER at fixed rail
/// positions under ideal pointing.
pub fn static_benchmark(
    system: &SystemParams,
    mode: &AgcMode,
    trajectory: &TrajectoryConfig,
    positions: &[f64],
    ook: &OokConfig,
    n_bits: u64,
    seed: u64,
) -> Result<Vec<BenchmarkPoint>> {
    let mut points = Vec::with_capacity(positions.len());
    for (idx, &position) in positions.iter().enumerate() {
        let geometry = geometry_at(trajectory, position);
        let h = channel_gain(&system.channel, &geometry);
        points.push(benchmark_point_at_gain(
            system,
            mode,
            position,
            h,
            ook,
            n_bits,
            derive_seed(seed, idx as u64),
        )?);
    }
    Ok(points)
}

fn benchmark_point_at_gain(
    system: &SystemParams,
    mode: &AgcMode,
    position: f64,
    h: f64,
    ook: &OokConfig,
    n_bits: u64,
    seed: u64,
) -> Result<BenchmarkPoint> {
    let powers = front_end_powers(h, &system.transmitter, &system.detector);
    let (gain, added_noise) = match mode {
        AgcMode::Fixed { gain, noise_power } => (*gain, *noise_power),
        AgcMode::Static(params) => (params.gain(powers.total_power), params.agc_noise_power),
        AgcMode::Loop(params) => {
            let mut sim = LoopSim::new(*params, derive_seed(seed, 0xB01))?;
            sim.settle(powers.total_power, 1.0)?;
            (sim.effective_gain(), params.agc_noise_power)
        }
    };
    let result = physical_window_ber(system, ook, h, gain, added_noise, n_bits, seed)?;
    Ok(BenchmarkPoint {
        position,
        channel_gain: h,
        input_power: powers.total_power,
        output_power: gain * powers.total_power + added_noise,
        result,
    })
}

/// Step a loop simulation across [t_from, t_to] with the input power
/// refreshed from the trajectory once per millisecond block.
fn advance_loop(
    system: &SystemParams,
    trajectory: &TrajectoryConfig,
    sim: &mut LoopSim,
    t_from: f64,
    t_to: f64,
) {
    let dt = sim.params().sample_interval;
    let block = (1e-3 / dt).max(1.0) as usize;
    let total = ((t_to - t_from) / dt).round() as usize;
    let mut done = 0usize;
    let mut sign = 1.0;
    while done < total {
        let t = t_from + done as f64 * dt;
        let h = channel_gain_at_time(system, trajectory, t);
        let p = front_end_powers(h, &system.transmitter, &system.detector).total_power;
        let amplitude = (p / sim.params().load_resistance).sqrt();
        for _ in 0..block.min(total - done) {
            sim.step(sign * amplitude);
            sign = -sign;
        }
        done += block.min(total - done);
    }
}

/// Monte Carlo BER of one quasi-static window through the physical chain:
/// OOK drive → noisy front end at channel gain `h` → AC coupling → scalar
/// amplifier stage with its own noise → zero-threshold hard decision.
fn physical_window_ber(
    system: &SystemParams,
    ook: &OokConfig,
    h: f64,
    gain: f64,
    added_noise_power: f64,
    n_bits: u64,
    seed: u64,
) -> Result<BerResult> {
    let cfg = OokConfig {
        amplitude: system.transmitter.signal_variance.sqrt(),
        seed: derive_seed(seed, 0),
        ..ook.clone()
    };
    let (bits, tx_samples) = generate_ook(&cfg, n_bits)?;
    let stream = simulate_rx_stream(
        &system.transmitter,
        &system.detector,
        h,
        &tx_samples,
        derive_seed(seed, 1),
    )?;
    // capacitive coupling: remove the empirical DC component
    let mean = stream.samples.iter().sum::<f64>() / stream.samples.len() as f64;
    let amp_gain = gain.sqrt();
    let noise_sigma = (added_noise_power / system.detector.load_resistance).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let output: Vec<f64> = stream
        .samples
        .iter()
        .map(|x| {
            let mut y = amp_gain * (x - mean);
            if noise_sigma > 0.0 {
                y += noise_sigma * unit.sample(&mut rng);
            }
            y
        })
        .collect();
    let decided = hard_decision_demod(&output, &cfg, 0.0)?;
    Ok(BerResult::from_counts(count_errors(&bits, &decided), n_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{linear_to_db, watts_to_dbm};
    use crate::waveform::BitSource;

    fn rail() -> TrajectoryConfig {
        TrajectoryConfig {
            rail_length: 2.0,
            speed: 1.0,
            standoff: 3.0,
            start_position: 0.0,
            tracking: Tracking::Ideal,
            vibration: None,
        }
    }

    fn ook() -> OokConfig {
        OokConfig {
            bit_rate: 25e6,
            samples_per_bit: 1,
            amplitude: 0.08f64.sqrt(),
            source: BitSource::Prbs { order: 15 },
            seed: 1,
        }
    }

    #[test]
    fn triangular_motion() {
        let cfg = rail();
        assert_eq!(cfg.period(), 4.0);
        assert_eq!(position_at(&cfg, 0.0), 0.0);
        assert!((position_at(&cfg, 1.0) - 1.0).abs() < 1e-12);
        assert!((position_at(&cfg, 2.0) - 2.0).abs() < 1e-12);
        assert!((position_at(&cfg, 3.0) - 1.0).abs() < 1e-12);
        assert!((position_at(&cfg, 4.0) - 0.0).abs() < 1e-12);
        // speed everywhere ±v except at turnarounds
        let dt = 1e-6;
        for &t in &[0.5, 1.7, 2.4, 3.9] {
            let v = (position_at(&cfg, t + dt) - position_at(&cfg, t - dt)) / (2.0 * dt);
            assert!((v.abs() - cfg.speed).abs() < 1e-6, "speed {v} at t {t}");
        }
        let parked = TrajectoryConfig {
            speed: 0.0,
            start_position: 1.0,
            ..cfg
        };
        assert_eq!(position_at(&parked, 123.0), 1.0);
    }

    #[test]
    fn geometry_reference_points() {
        let cfg = rail();
        let center = geometry_at(&cfg, 1.0);
        assert!((center.distance - 3.0).abs() < 1e-12);
        assert_eq!(center.emission_angle, 0.0);
        assert_eq!(center.incidence_angle, 0.0);
        // lateral equal to standoff: distance √2·standoff, emission 45°
        let wide = TrajectoryConfig {
            rail_length: 6.0,
            ..cfg
        };
        let corner = geometry_at(&wide, 6.0);
        assert!((corner.distance - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((corner.emission_angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn lag_pointing_error_near_center() {
        let delay = 0.05;
        let cfg = TrajectoryConfig {
            tracking: Tracking::Lag { delay },
            ..rail()
        };
        // mid-rail, steady motion: error ≈ atan(v·delay/standoff)
        let t = 1.0; // position 1.0 m = rail center
        let geom = geometry_at_time(&cfg, t);
        let expected = (cfg.speed * delay / cfg.standoff).atan();
        assert!(
            (geom.incidence_angle - expected).abs() < 0.02 * expected,
            "pointing error {} vs {}",
            geom.incidence_angle,
            expected
        );
        // ideal tracking has none
        let geom = geometry_at_time(&rail(), t);
        assert_eq!(geom.incidence_angle, 0.0);
    }

    // shared by the tests below: equilibrium across the whole rail and a
    // measurable BER floor dominated by transmitter noise
    fn equilibrium_mobile_system() -> SystemParams {
        let defaults = SystemParams::default();
        let mut sys = SystemParams {
            channel: crate::channel::ChannelParams::new(
                60f64.to_radians(),
                4e-5,
                1.0,
                6f64.to_radians(),
                1.5,
            )
            .unwrap(),
            ..defaults
        };
        sys.transmitter.noise_signal_ratio = 0.1;
        sys
    }

    #[test]
    fn benchmark_flat_output_power_in_equilibrium() {
        let sys = equilibrium_mobile_system();
        let mode = AgcMode::Static(sys.agc);
        let positions: Vec<f64> = (0..9).map(|k| 0.25 * k as f64).collect();
        let points = static_benchmark(
            &sys,
            &mode,
            &rail(),
            &positions,
            &ook(),
            20_000,
            5,
        )
        .unwrap();
        let mut spread: (f64, f64) = (f64::MAX, f64::MIN);
        for p in &points {
            let db = watts_to_dbm(p.output_power);
            spread = (spread.0.min(db), spread.1.max(db));
        }
        assert!(
            spread.1 - spread.0 <= 0.05,
            "output power spread {:?} dB",
            spread
        );
        // symmetric positions give identical gain and power
        let a = &points[1];
        let b = &points[7];
        assert!((a.channel_gain - b.channel_gain).abs() / a.channel_gain < 1e-12);
        assert!((a.input_power - b.input_power).abs() / a.input_power < 1e-12);
    }

    #[test]
    fn fixed_gain_tracks_input_power() {
        let sys = equilibrium_mobile_system();
        let gain = crate::units::db_to_linear(4.5);
        let mode = AgcMode::Fixed {
            gain,
            noise_power: sys.agc.agc_noise_power,
        };
        let positions = [0.2, 1.0, 1.9];
        let points =
            static_benchmark(&sys, &mode, &rail(), &positions, &ook(), 15_000, 9).unwrap();
        for p in &points {
            let expected = gain * p.input_power + sys.agc.agc_noise_power;
            assert!((p.output_power - expected).abs() / expected < 1e-12);
        }
    }

    #[test]
    fn agc_output_power_steadier_than_fixed_gain() {
        let sys = equilibrium_mobile_system();
        let trajectory = rail();
        let run = MobileRunConfig {
            duration: 4.0,
            window: 0.25,
            bits_per_window: 12_000,
        };
        let agc = run_mobile_sim(&sys, &AgcMode::Static(sys.agc), &trajectory, &run, &ook(), 3)
            .unwrap();
        let fixed_mode = AgcMode::Fixed {
            gain: crate::units::db_to_linear(4.5),
            noise_power: sys.agc.agc_noise_power,
        };
        let fixed = run_mobile_sim(&sys, &fixed_mode, &trajectory, &run, &ook(), 3).unwrap();
        let var_db = |rows: &[MobileSimRow]| {
            let dbs: Vec<f64> = rows.iter().map(|r| watts_to_dbm(r.output_power)).collect();
            let mean = dbs.iter().sum::<f64>() / dbs.len() as f64;
            dbs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / dbs.len() as f64
        };
        assert!(
            var_db(&agc.rows) < var_db(&fixed.rows),
            "AGC {} vs fixed {}",
            var_db(&agc.rows),
            var_db(&fixed.rows)
        );
        for row in &agc.rows {
            assert_eq!(row.region, Region::Equilibrium);
        }
    }

    #[test]
    fn loop_gain_tracks_static_gain_during_motion() {
        let sys = equilibrium_mobile_system();
        let trajectory = rail();
        let run = MobileRunConfig {
            duration: 2.0,
            window: 0.25,
            bits_per_window: 10_000,
        };
        let lp = sys.loop_params().unwrap();
        let looped =
            run_mobile_sim(&sys, &AgcMode::Loop(lp), &trajectory, &run, &ook(), 21).unwrap();
        for row in &looped.rows {
            let static_gain = sys.agc.gain(row.input_power);
            let dev_db = (linear_to_db(row.applied_gain / static_gain)).abs();
            assert!(
                dev_db <= 0.1,
                "loop gain deviates {dev_db} dB from the settled law at t {}",
                row.time
            );
        }
    }

    #[test]
    fn parked_run_matches_benchmark() {
        let sys = equilibrium_mobile_system();
        let trajectory = TrajectoryConfig {
            speed: 0.0,
            start_position: 1.0,
            ..rail()
        };
        let run = MobileRunConfig {
            duration: 1.0,
            window: 0.25,
            bits_per_window: 30_000,
        };
        let mode = AgcMode::Static(sys.agc);
        let sim = run_mobile_sim(&sys, &mode, &trajectory, &run, &ook(), 31).unwrap();
        let bench =
            static_benchmark(&sys, &mode, &trajectory, &[1.0], &ook(), 120_000, 77)
                .unwrap();
        for w in &sim.windowed_ber {
            assert!(
                w.result.wilson_ci95.0 <= bench[0].result.wilson_ci95.1
                    && bench[0].result.wilson_ci95.0 <= w.result.wilson_ci95.1,
                "window {:?} vs benchmark {:?}",
                w.result,
                bench[0].result
            );
        }
    }

    #[test]
    fn vibration_rejected_by_the_loop() {
        let sys = equilibrium_mobile_system();
        let trajectory = TrajectoryConfig {
            speed: 0.0,
            start_position: 1.0,
            vibration: Some(Vibration {
                amplitude_db: 1.0,
                frequency_hz: 20.0,
            }),
            ..rail()
        };
        let lp = sys.loop_params().unwrap();
        let mut sim = LoopSim::new(lp, 41).unwrap();
        let h0 = channel_gain_at_time(&sys, &trajectory, 0.0);
        let p0 = front_end_powers(h0, &sys.transmitter, &sys.detector).total_power;
        sim.settle(p0, 1.0).unwrap();
        // three vibration periods, checking the regulated output power
        let dt = lp.sample_interval;
        let ticks = (0.15 / dt) as usize;
        let mut worst: f64 = 0.0;
        let mut sign = 1.0;
        for k in 0..ticks {
            let t = k as f64 * dt;
            let h = channel_gain_at_time(&sys, &trajectory, t);
            let p = front_end_powers(h, &sys.transmitter, &sys.detector).total_power;
            sim.step(sign * (p / lp.load_resistance).sqrt());
            sign = -sign;
            let p_y = sim.effective_gain() * p + lp.agc_noise_power;
            worst = worst.max((watts_to_dbm(p_y) - watts_to_dbm(1e-3)).abs());
        }
        assert!(worst <= 0.2, "output power deviated {worst} dB under vibration");
        // and the input really was wobbling ±1 dB
        let h_hi = channel_gain_at_time(&sys, &trajectory, 0.25 / 20.0);
        let h_lo = channel_gain_at_time(&sys, &trajectory, 0.75 / 20.0);
        assert!((linear_to_db(h_hi / h_lo) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn preconditions_enforced() {
        let sys = equilibrium_mobile_system();
        let mode = AgcMode::Static(sys.agc);
        let bad_window = MobileRunConfig {
            duration: 1.0,
            window: 1e-4,
            bits_per_window: 1_000,
        };
        assert!(run_mobile_sim(&sys, &mode, &rail(), &bad_window, &ook(), 1).is_err());
        let too_many_bits = MobileRunConfig {
            duration: 1.0,
            window: 0.25,
            bits_per_window: 10_000_000,
        };
        assert!(run_mobile_sim(&sys, &mode, &rail(), &too_many_bits, &ook(), 1).is_err());
        let mut vib = rail();
        vib.vibration = Some(Vibration {
            amplitude_db: 1.0,
            frequency_hz: 1e6,
        });
        assert!(vib.validate(sys.detector.bandwidth).is_err());
    }
}

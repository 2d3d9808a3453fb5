//! The experiment pipelines behind each CLI subcommand.

use anyhow::Context;
use std::path::{Path, PathBuf};

use vlc_agc_core::agc_loop::measure_step_response;
use vlc_agc_core::agc_static::{dynamic_range, gmax_sweep, snr_sweep};
use vlc_agc_core::channel::{distance_for_gain, emission_angle_for_gain, IncidenceCoupling};
use vlc_agc_core::scenario::{run_mobile_sim, MobileRunConfig};
use vlc_agc_core::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use vlc_agc_core::waveform::run_ber_experiment;

use crate::config::RunConfig;
use crate::table::{config_hash, fmt_float, CurveTable};

/// Everything a command needs to emit reproducible output.
pub struct CommandContext {
    pub config: RunConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub hash: String,
}

impl CommandContext {
    pub fn new(config: RunConfig, seed_override: Option<u64>, out_dir: &Path) -> Self {
        let seed = seed_override.unwrap_or(config.seed);
        let hash = config_hash(&config.canonical());
        Self {
            config,
            seed,
            out_dir: out_dir.to_path_buf(),
            hash,
        }
    }

    fn table(&self, command: &str, columns: &[&str]) -> CurveTable {
        CurveTable::new(command, &self.hash, self.seed, columns)
    }
}

fn grid(min_db: f64, max_db: f64, step_db: f64) -> Vec<f64> {
    let n = ((max_db - min_db) / step_db).round() as usize + 1;
    (0..n).map(|k| min_db + k as f64 * step_db).collect()
}

/// Equilibrium-state output SNR against input SNR for each AGC index.
pub fn cmd_snr_curves(ctx: &CommandContext) -> anyhow::Result<PathBuf> {
    let sweep = &ctx.config.sweep;
    let m_list: Vec<f64> = sweep.m_list_db.iter().map(|&db| db_to_linear(db)).collect();
    let snr_grid: Vec<f64> = grid(sweep.snr_min_db, sweep.snr_max_db, sweep.snr_step_db)
        .iter()
        .map(|&db| db_to_linear(db))
        .collect();
    let rows = snr_sweep(&m_list, &snr_grid)?;
    let mut table = ctx.table("snr-curves", &["m_db", "snr_i_db", "snr_o_db"]);
    for row in rows {
        table.push_row(vec![
            fmt_float(linear_to_db(row.agc_index)),
            fmt_float(linear_to_db(row.input_snr)),
            fmt_float(linear_to_db(row.output_snr)),
        ]);
    }
    Ok(table.write_to(&ctx.out_dir, "snr_curves.csv")?)
}

/// Output SNR across a channel-gain grid for each maximum VGA gain.
pub fn cmd_gmax_sweep(ctx: &CommandContext) -> anyhow::Result<PathBuf> {
    let system = ctx.config.system()?;
    let sweep = &ctx.config.sweep;
    let gmax_list: Vec<f64> = sweep.gmax_list_db.iter().map(|&db| db_to_linear(db)).collect();
    let points = sweep.channel_gain_points.max(2);
    let h_grid: Vec<f64> = (0..points)
        .map(|k| {
            let f = k as f64 / (points - 1) as f64;
            sweep.channel_gain_min * (sweep.channel_gain_max / sweep.channel_gain_min).powf(f)
        })
        .collect();
    let rows = gmax_sweep(
        &system.transmitter,
        &system.detector,
        &gmax_list,
        db_to_linear(ctx.config.agc.gain_range_db),
        system.agc.equilibrium_power,
        system.agc.agc_noise_power,
        db_to_linear(sweep.reference_gain_db),
        &h_grid,
    )?;
    let mut table = ctx.table(
        "gmax-sweep",
        &[
            "g_max_db",
            "p_x_dbm",
            "snr_i_db",
            "snr_o_db",
            "region",
            "snr_o_fixed_ref_db",
        ],
    );
    for row in rows {
        table.push_row(vec![
            fmt_float(linear_to_db(row.max_gain)),
            fmt_float(watts_to_dbm(row.total_power)),
            fmt_float(linear_to_db(row.input_snr)),
            fmt_float(linear_to_db(row.output_snr)),
            row.region.label().into(),
            fmt_float(linear_to_db(row.reference_snr)),
        ]);
    }
    Ok(table.write_to(&ctx.out_dir, "gmax_sweep.csv")?)
}

/// Dynamic-range report: thresholds, ranges and the channel inversions.
pub fn cmd_dynamic_range(ctx: &CommandContext) -> anyhow::Result<(PathBuf, String)> {
    let system = ctx.config.system()?;
    let report = dynamic_range(&system.agc, &system.transmitter, &system.detector);
    let (p_l, p_u) = system.agc.thresholds();

    let mut lines = Vec::new();
    lines.push("# command = dynamic-range".to_string());
    lines.push(format!("# config_sha256 = {}", ctx.hash));
    lines.push(format!("# seed = {}", ctx.seed));
    lines.push(format!("# tool_version = {}", env!("CARGO_PKG_VERSION")));
    lines.push(format!("p_l_dbm = {}", fmt_float(watts_to_dbm(p_l))));
    lines.push(format!("p_u_dbm = {}", fmt_float(watts_to_dbm(p_u))));
    lines.push(format!(
        "equilibrium_range_db = {}",
        fmt_float(report.equilibrium_range_db)
    ));
    lines.push(format!(
        "optical_range_db = {}",
        fmt_float(report.optical_range_db)
    ));
    lines.push(format!("h_lower = {}", fmt_float(report.gain_at_lower)));
    lines.push(format!("h_upper = {}", fmt_float(report.gain_at_upper)));
    lines.push(format!(
        "snr_at_lower_db = {}",
        fmt_float(linear_to_db(report.snr_at_lower))
    ));
    lines.push(format!(
        "snr_at_upper_db = {}",
        fmt_float(linear_to_db(report.snr_at_upper))
    ));
    lines.push(format!("validity = {}", report.validity));

    // channel inversions at the lower threshold: boresight distance, and the
    // rail deviation angle at 1 m for both incidence couplings
    match distance_for_gain(&system.channel, report.gain_at_lower, 0.0, 0.0) {
        Ok(d) => lines.push(format!("distance_at_lower_m = {}", fmt_float(d))),
        Err(e) => lines.push(format!("distance_at_lower_m = unsolvable ({e})")),
    }
    match emission_angle_for_gain(
        &system.channel,
        report.gain_at_lower,
        1.0,
        IncidenceCoupling::Fixed(0.0),
    ) {
        Ok(a) => lines.push(format!(
            "deviation_angle_pointed_deg = {}",
            fmt_float(a.to_degrees())
        )),
        Err(e) => lines.push(format!("deviation_angle_pointed_deg = unsolvable ({e})")),
    }
    match emission_angle_for_gain(
        &system.channel,
        report.gain_at_lower,
        1.0,
        IncidenceCoupling::EqualsEmission,
    ) {
        Ok(a) => lines.push(format!(
            "deviation_angle_coupled_deg = {}",
            fmt_float(a.to_degrees())
        )),
        Err(e) => lines.push(format!("deviation_angle_coupled_deg = unsolvable ({e})")),
    }

    let text = lines.join("\n") + "\n";
    std::fs::create_dir_all(&ctx.out_dir)?;
    let path = ctx.out_dir.join("dynamic_range.txt");
    std::fs::write(&path, &text).context("writing dynamic-range report")?;
    Ok((path, text))
}

/// Monte Carlo BER curve through the configured amplifier stage.
pub fn cmd_ber(ctx: &CommandContext) -> anyhow::Result<PathBuf> {
    let ber = &ctx.config.ber;
    let ook = ctx.config.ook_config()?;
    let mode = ctx.config.ber_mode()?;
    let system = ctx.config.system()?;
    let snr_points: Vec<f64> = grid(ber.snr_min_db, ber.snr_max_db, ber.snr_step_db)
        .iter()
        .map(|&db| db_to_linear(db))
        .collect();
    let experiment = run_ber_experiment(
        &ook,
        &mode,
        ctx.config.ber_input_power()?,
        system.detector.load_resistance,
        &snr_points,
        ber.n_bits,
        ctx.seed,
    )?;
    let mut table = ctx.table(
        "ber",
        &[
            "snr_i_db",
            "snr_o_db",
            "ber",
            "ci_low",
            "ci_high",
            "analytic_ber",
        ],
    );
    table.add_metadata("n_bits", ber.n_bits.to_string());
    for warning in &experiment.warnings {
        table.add_metadata("warning", warning.clone());
        eprintln!("warning: {warning}");
    }
    for point in &experiment.points {
        table.push_row(vec![
            fmt_float(linear_to_db(point.input_snr)),
            fmt_float(linear_to_db(point.output_snr)),
            fmt_float(point.result.ber),
            fmt_float(point.result.wilson_ci95.0),
            fmt_float(point.result.wilson_ci95.1),
            fmt_float(point.predicted_ber),
        ]);
    }
    Ok(table.write_to(&ctx.out_dir, "ber.csv")?)
}

/// Feedback-loop step response with the fitted time constant.
pub fn cmd_loop_step(ctx: &CommandContext) -> anyhow::Result<PathBuf> {
    let params = ctx.config.loop_params()?;
    let step = &ctx.config.loop_step;
    let response = measure_step_response(
        &params,
        dbm_to_watts(step.base_input_power_dbm),
        step.step_db,
        step.duration_s,
        ctx.seed,
    )?;
    let mut table = ctx.table("loop-step", &["t_s", "p_y_dbm"]);
    table.add_metadata("step_db", fmt_float(step.step_db));
    for (t, p_db) in &response.series {
        table.push_row(vec![fmt_float(*t), fmt_float(*p_db)]);
    }
    table.add_footer("tau_s", fmt_float(response.measured_tau));
    table.add_footer("t95_s", fmt_float(response.t95));
    Ok(table.write_to(&ctx.out_dir, "loop_step.csv")?)
}

/// Mobile rail run with windowed BER.
pub fn cmd_mobile(ctx: &CommandContext) -> anyhow::Result<PathBuf> {
    let system = ctx.config.system()?;
    let trajectory = ctx.config.trajectory()?;
    let mode = ctx.config.mobile_mode()?;
    let ook = ctx.config.ook_config()?;
    let mobile = &ctx.config.mobile;
    let result = run_mobile_sim(
        &system,
        &mode,
        &trajectory,
        &MobileRunConfig {
            duration: mobile.duration_s,
            window: mobile.window_s,
            bits_per_window: mobile.bits_per_window,
        },
        &ook,
        ctx.seed,
    )?;
    let mut table = ctx.table(
        "mobile",
        &[
            "t_s",
            "position_m",
            "h",
            "p_x_dbm",
            "gain_db",
            "p_y_dbm",
            "region",
            "ber",
            "ci_low",
            "ci_high",
        ],
    );
    table.add_metadata("agc_mode", mobile.agc_mode.clone());
    table.add_metadata("bits_per_window", mobile.bits_per_window.to_string());
    for (row, window) in result.rows.iter().zip(&result.windowed_ber) {
        table.push_row(vec![
            fmt_float(row.time),
            fmt_float(row.position),
            fmt_float(row.channel_gain),
            fmt_float(watts_to_dbm(row.input_power)),
            fmt_float(linear_to_db(row.applied_gain)),
            fmt_float(watts_to_dbm(row.output_power)),
            row.region.label().into(),
            fmt_float(window.result.ber),
            fmt_float(window.result.wilson_ci95.0),
            fmt_float(window.result.wilson_ci95.1),
        ]);
    }
    Ok(table.write_to(&ctx.out_dir, "mobile.csv")?)
}

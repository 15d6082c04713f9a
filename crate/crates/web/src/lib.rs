//! Browser bindings: each exported function runs a small piece of the
//! simulation and returns its result as a JSON string for plotting.

use coexist_core::config::ScenarioConfig;
use coexist_core::metrics::radar_interference_power;
use coexist_core::sim::{
    beam_pattern, design_trial, draw_channels, run_sweep_with, score_design, train_rf, Execution,
    LinkSnrs, Scenario,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest trial budget the page may request, to keep the tab responsive.
pub const MAX_TRIALS: usize = 200;
pub const PATTERN_POINTS: usize = 361;

#[derive(Debug, Serialize)]
pub struct BeamPatternDemo {
    pub angles_deg: Vec<f64>,
    /// Radiated power summed over streams, dB.
    pub design_db: Vec<f64>,
    pub baseline_db: Vec<f64>,
    /// Departure angles of the radar's point targets, degrees.
    pub target_angles_deg: Vec<f64>,
    pub r_ij: f64,
    pub baseline_r_ij: f64,
    pub sir_db: f64,
    pub baseline_sir_db: f64,
    pub interference_power: f64,
    pub baseline_interference_power: f64,
}

#[derive(Debug, Serialize)]
pub struct SirCdfDemo {
    pub sir_db: Vec<f64>,
    pub cdf_with_design: Vec<f64>,
    pub cdf_without_design: Vec<f64>,
    pub fraction_above_30_db: f64,
}

#[derive(Debug, Serialize)]
pub struct RateCurveDemo {
    pub snr_db: Vec<f64>,
    pub mean_r_ij: Vec<f64>,
    pub mean_r_ki: Vec<f64>,
    pub mean_sum: Vec<f64>,
    pub baseline_sum: Vec<f64>,
}

fn demo_config(num_targets: usize, trials: usize, seed: u32) -> Result<ScenarioConfig, String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be in 1..={MAX_TRIALS}"));
    }
    let config = ScenarioConfig {
        num_targets,
        trials_per_point: trials,
        base_seed: u64::from(seed),
        ..Default::default()
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn to_db(p: f64) -> f64 {
    10.0 * p.max(1e-30).log10()
}

pub fn beam_pattern_json(seed: u32, snr_db: f64, num_targets: usize) -> Result<String, String> {
    let config = demo_config(num_targets, 1, seed)?;
    let scenario = Scenario::new(&config).map_err(|e| e.to_string())?;
    let run = || -> coexist_core::Result<BeamPatternDemo> {
        let channels = draw_channels(&scenario, u64::from(seed))?;
        let rf = train_rf(&scenario, &channels)?;
        let snrs = LinkSnrs::from_config(&config, snr_db);
        let design = design_trial(&scenario, &channels, &rf, snrs, 0)?;
        let scores = score_design(&scenario, &channels, &design, snrs)?;

        let angles_deg: Vec<f64> = (0..PATTERN_POINTS)
            .map(|k| -90.0 + 180.0 * k as f64 / (PATTERN_POINTS - 1) as f64)
            .collect();
        let angles: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
        let summed = |composite| -> coexist_core::Result<Vec<f64>> {
            Ok(beam_pattern(&scenario.radio, &composite, &angles)?
                .into_iter()
                .map(|streams| to_db(streams.iter().sum()))
                .collect())
        };
        let power = |set: &coexist_core::beamforming::BeamformerSet| {
            radar_interference_power(&channels.h_ir.entries, &set.rf_precoder, &set.bb_precoder, config.ns)
        };
        Ok(BeamPatternDemo {
            design_db: summed(design.transmit.composite_precoder())?,
            baseline_db: summed(design.transmit_baseline.composite_precoder())?,
            angles_deg,
            target_angles_deg: channels.scene.targets.iter().map(|t| t.aod.to_degrees()).collect(),
            r_ij: scores.r_ij,
            baseline_r_ij: scores.baseline_r_ij,
            sir_db: scores.sir_rr_db,
            baseline_sir_db: scores.baseline_sir_rr_db,
            interference_power: power(&design.transmit)?,
            baseline_interference_power: power(&design.transmit_baseline)?,
        })
    };
    let demo = run().map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&demo).expect("demo output is serializable"))
}

pub fn sir_cdf_json(trials: usize, num_targets: usize, seed: u32) -> Result<String, String> {
    let config = ScenarioConfig {
        snr_grid_db: vec![0.0],
        ..demo_config(num_targets, trials, seed)?
    };
    let sweep = run_sweep_with(&config, Execution::Sequential).map_err(|e| e.to_string())?;
    let table = sweep.sir_cdf_table();
    let with = sweep.pooled_sir(true);
    let above = with.iter().filter(|&&s| s > 30.0).count() as f64 / with.len() as f64;
    let demo = SirCdfDemo {
        sir_db: table.iter().map(|r| r.sir_db).collect(),
        cdf_with_design: table.iter().map(|r| r.cdf_with_design).collect(),
        cdf_without_design: table.iter().map(|r| r.cdf_without_design).collect(),
        fraction_above_30_db: above,
    };
    Ok(serde_json::to_string(&demo).expect("demo output is serializable"))
}

pub fn rate_curve_json(trials: usize, num_targets: usize, seed: u32) -> Result<String, String> {
    let config = demo_config(num_targets, trials, seed)?;
    let sweep = run_sweep_with(&config, Execution::Sequential).map_err(|e| e.to_string())?;
    let rows = sweep.rate_table();
    let demo = RateCurveDemo {
        snr_db: rows.iter().map(|r| r.snr_db).collect(),
        mean_r_ij: rows.iter().map(|r| r.mean_r_ij).collect(),
        mean_r_ki: rows.iter().map(|r| r.mean_r_ki).collect(),
        mean_sum: rows.iter().map(|r| r.mean_sum).collect(),
        baseline_sum: rows.iter().map(|r| r.baseline_sum).collect(),
    };
    Ok(serde_json::to_string(&demo).expect("demo output is serializable"))
}

/// Transmit beam pattern of radio `i` for one trial, with and without the
/// radar-aware design.
#[wasm_bindgen(js_name = beamPattern)]
pub fn beam_pattern_js(seed: u32, snr_db: f64, num_targets: usize) -> Result<String, JsError> {
    beam_pattern_json(seed, snr_db, num_targets).map_err(|e| JsError::new(&e))
}

/// Radar SIR CDFs pooled over `trials` draws at 0 dB link SNR.
#[wasm_bindgen(js_name = sirCdf)]
pub fn sir_cdf_js(trials: usize, num_targets: usize, seed: u32) -> Result<String, JsError> {
    sir_cdf_json(trials, num_targets, seed).map_err(|e| JsError::new(&e))
}

/// Mean spectral efficiency over the default SNR grid.
#[wasm_bindgen(js_name = rateCurve)]
pub fn rate_curve_js(trials: usize, num_targets: usize, seed: u32) -> Result<String, JsError> {
    rate_curve_json(trials, num_targets, seed).map_err(|e| JsError::new(&e))
}

//! Monte Carlo harness: one trial draws a scene and both communication
//! channels, runs beamtraining and the baseband design for the transmit slot
//! (`i -> j`) and the receive slot (`k -> i`), and scores the result against
//! an interference-ignorant SVD design on the same draw.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::array::{dft_codebook, ArrayGeometry, Codebook};
use crate::beamforming::{
    beamtrain, effective_channels, lmmse_combiner, normalize_precoder, rzf_precoder,
    svd_combiner, svd_precoder, validate_dof, BeamTraining, BeamformerSet, DofWarning,
    EffectiveChannels, RawChannels, RfStages,
};
use crate::channel::{
    sample_radar_scene, synth_clustered_channel, synth_interference_channels, synth_radar_channel,
    ChannelMatrix, PointTargetSet,
};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::metrics::{cdf_at, sir_radar, spectral_efficiency_on_range, InterferenceTerm};
use crate::random::{derive_seed, rng_from_seed};
use crate::C64;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Array geometries and codebooks shared by every trial of a scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub radio: ArrayGeometry,
    pub radar_tx: ArrayGeometry,
    pub radar_rx: ArrayGeometry,
    pub radio_codebook: Codebook,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config
            .validate()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let radio = ArrayGeometry::new(config.radio_antennas, config.element_spacing)?;
        Ok(Self {
            config: config.clone(),
            radio,
            radar_tx: ArrayGeometry::new(config.radar_tx_antennas, config.element_spacing)?,
            radar_rx: ArrayGeometry::new(config.radar_rx_antennas, config.element_spacing)?,
            radio_codebook: dft_codebook(&radio),
        })
    }

    pub fn dof_warnings(&self) -> Vec<DofWarning> {
        validate_dof(&self.config.dof_params())
    }
}

/// Every channel drawn for one trial.
#[derive(Debug, Clone)]
pub struct TrialChannels {
    pub scene: PointTargetSet,
    /// Radar receive x radar transmit.
    pub h_rr: ChannelMatrix,
    /// `j` receive x `i` transmit.
    pub h_ij: ChannelMatrix,
    /// `i` receive x `k` transmit.
    pub h_ki: ChannelMatrix,
    /// Radar receive x `i` transmit.
    pub h_ir: ChannelMatrix,
    /// `i` receive x radar transmit.
    pub h_ri: ChannelMatrix,
}

pub fn draw_channels(scenario: &Scenario, seed: u64) -> Result<TrialChannels> {
    let cfg = &scenario.config;
    let mut rng = rng_from_seed(seed);
    let scene = sample_radar_scene(&mut rng, cfg.num_targets, cfg.max_range_m, cfg.carrier_freq_hz)?;
    let clusters = cfg.cluster_params();
    let h_ij = synth_clustered_channel(&mut rng, &scenario.radio, &scenario.radio, &clusters)?;
    let h_ki = synth_clustered_channel(&mut rng, &scenario.radio, &scenario.radio, &clusters)?;
    let h_rr = synth_radar_channel(&scene, &scenario.radar_rx, &scenario.radar_tx)?;
    let (h_ir, h_ri) = synth_interference_channels(
        &scene,
        &scenario.radio,
        &scenario.radio,
        &scenario.radar_tx,
        &scenario.radar_rx,
    )?;
    Ok(TrialChannels {
        scene,
        h_rr,
        h_ij,
        h_ki,
        h_ir,
        h_ri,
    })
}

/// Beamtraining on both links of a trial.
#[derive(Debug, Clone)]
pub struct RfTraining {
    /// Link `i -> j`: `F_RF(i)` and `W_RF(j)`.
    pub link_ij: BeamTraining,
    /// Link `k -> i`: `F_RF(k)` and `W_RF(i)`.
    pub link_ki: BeamTraining,
}

pub fn train_rf(scenario: &Scenario, channels: &TrialChannels) -> Result<RfTraining> {
    let cfg = &scenario.config;
    let cb = &scenario.radio_codebook;
    Ok(RfTraining {
        link_ij: beamtrain(&channels.h_ij.entries, cb, cb, cfg.rf_chains_i_tx, cfg.rf_chains_j)?,
        link_ki: beamtrain(&channels.h_ki.entries, cb, cb, cfg.rf_chains_k, cfg.rf_chains_i_rx)?,
    })
}

/// Baseband designs of one trial, with and without the radar taken into account.
#[derive(Debug, Clone)]
pub struct TrialDesign {
    pub effective: EffectiveChannels,
    /// Transmit slot: RZF at `i`, SVD combiner at `j`.
    pub transmit: BeamformerSet,
    /// Receive slot: SVD precoder at `k`, LMMSE combiner at `i`.
    pub receive: BeamformerSet,
    /// Transmit slot ignoring the radar: SVD precoder at `i`.
    pub transmit_baseline: BeamformerSet,
    /// Receive slot ignoring the radar: SVD combiner at `i`.
    pub receive_baseline: BeamformerSet,
    /// Radar transmit antenna active during the receive slot.
    pub radar_antenna: usize,
    pub rank_deficient: bool,
}

/// Link SNRs (linear) used by the design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnrs {
    /// `SNR_ij = SNR_ki`.
    pub link: f64,
    pub ir: f64,
    pub ri: f64,
}

impl LinkSnrs {
    pub fn from_config(cfg: &ScenarioConfig, link_snr_db: f64) -> Self {
        Self {
            link: db_to_linear(link_snr_db),
            ir: db_to_linear(cfg.snr_ir_db()),
            ri: db_to_linear(cfg.snr_ri_db()),
        }
    }
}

pub fn design_trial(
    scenario: &Scenario,
    channels: &TrialChannels,
    rf: &RfTraining,
    snrs: LinkSnrs,
    radar_antenna: usize,
) -> Result<TrialDesign> {
    let ns = scenario.config.ns;
    let (f_rf_i, w_rf_j) = (&rf.link_ij.rf_precoder, &rf.link_ij.rf_combiner);
    let (f_rf_k, w_rf_i) = (&rf.link_ki.rf_precoder, &rf.link_ki.rf_combiner);
    let effective = effective_channels(
        &RawChannels {
            h_ij: &channels.h_ij.entries,
            h_ki: &channels.h_ki.entries,
            h_ir: &channels.h_ir.entries,
            h_ri: &channels.h_ri.entries,
        },
        &RfStages {
            f_rf_i,
            w_rf_j,
            f_rf_k,
            w_rf_i,
        },
    )?;

    // transmit slot
    let w_j = svd_combiner(&effective.h_eff_ij, ns)?;
    let f_i = rzf_precoder(&effective.h_eff_ij, &w_j.beams, &effective.h_eff_ir, snrs.link, snrs.ir, ns)?;
    let f_i = normalize_precoder(f_rf_i, &f_i)?;
    let f_i_svd = svd_precoder(&effective.h_eff_ij, ns)?;
    let f_i_svd_norm = normalize_precoder(f_rf_i, &f_i_svd.beams)?;

    // receive slot
    let f_k = svd_precoder(&effective.h_eff_ki, ns)?;
    let f_k_norm = normalize_precoder(f_rf_k, &f_k.beams)?;
    let w_i = lmmse_combiner(&effective.h_eff_ki, &f_k_norm, &effective.h_eff_ri, snrs.link, snrs.ri, ns)?;
    let w_i_svd = svd_combiner(&effective.h_eff_ki, ns)?;

    let rank_deficient =
        w_j.rank_deficient || f_i_svd.rank_deficient || f_k.rank_deficient || w_i_svd.rank_deficient;
    Ok(TrialDesign {
        transmit: BeamformerSet {
            rf_precoder: f_rf_i.clone(),
            bb_precoder: f_i,
            rf_combiner: w_rf_j.clone(),
            bb_combiner: w_j.beams.clone(),
        },
        receive: BeamformerSet {
            rf_precoder: f_rf_k.clone(),
            bb_precoder: f_k_norm.clone(),
            rf_combiner: w_rf_i.clone(),
            bb_combiner: w_i,
        },
        transmit_baseline: BeamformerSet {
            rf_precoder: f_rf_i.clone(),
            bb_precoder: f_i_svd_norm,
            rf_combiner: w_rf_j.clone(),
            bb_combiner: w_j.beams,
        },
        receive_baseline: BeamformerSet {
            rf_precoder: f_rf_k.clone(),
            bb_precoder: f_k_norm,
            rf_combiner: w_rf_i.clone(),
            bb_combiner: w_i_svd.beams,
        },
        effective,
        radar_antenna,
        rank_deficient,
    })
}

/// Scores of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub point_index: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub snr_db: f64,
    /// Spectral efficiency `i -> j` with the design (bits/s/Hz).
    pub r_ij: f64,
    /// Spectral efficiency `k -> i` with the design, radar interference included.
    pub r_ki: f64,
    /// Radar SIR with the design (dB, capped).
    pub sir_rr_db: f64,
    /// `i -> j` with pure SVD beamforming and no radar present.
    pub baseline_r_ij: f64,
    /// `k -> i` with pure SVD beamforming and no radar present.
    pub baseline_r_ki: f64,
    /// Radar SIR when `i` ignores the radar (SVD precoder).
    pub baseline_sir_rr_db: f64,
    pub beamtraining_degenerate: bool,
    pub rank_deficient: bool,
}

impl TrialResult {
    pub fn sum_rate(&self) -> f64 {
        self.r_ij + self.r_ki
    }

    pub fn baseline_sum_rate(&self) -> f64 {
        self.baseline_r_ij + self.baseline_r_ki
    }
}

/// Rates and radar SIR of one design, and of its radar-ignorant baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialScores {
    pub r_ij: f64,
    pub r_ki: f64,
    pub sir_rr_db: f64,
    pub baseline_r_ij: f64,
    pub baseline_r_ki: f64,
    pub baseline_sir_rr_db: f64,
    /// Some combiner lost rank and its rate was evaluated on its column space.
    pub combiner_rank_deficient: bool,
}

/// Scores a design on its trial's channels.
pub fn score_design(
    scenario: &Scenario,
    channels: &TrialChannels,
    design: &TrialDesign,
    snrs: LinkSnrs,
) -> Result<TrialScores> {
    let ns = scenario.config.ns;
    let eff = &design.effective;
    let (r_ij, r_ij_deficient) = spectral_efficiency_on_range(
        &eff.h_eff_ij,
        &design.transmit.bb_precoder,
        &design.transmit.bb_combiner,
        snrs.link,
        ns,
        &[],
    )?;
    let sir = sir_radar(
        &channels.h_ir.entries,
        &design.transmit.rf_precoder,
        &design.transmit.bb_precoder,
        ns,
    )?;
    let radar = InterferenceTerm::antenna_selection(eff.h_eff_ri.clone(), snrs.ri, design.radar_antenna)?;
    let (r_ki, r_ki_deficient) = spectral_efficiency_on_range(
        &eff.h_eff_ki,
        &design.receive.bb_precoder,
        &design.receive.bb_combiner,
        snrs.link,
        ns,
        std::slice::from_ref(&radar),
    )?;
    let (base_r_ij, base_r_ij_deficient) = spectral_efficiency_on_range(
        &eff.h_eff_ij,
        &design.transmit_baseline.bb_precoder,
        &design.transmit_baseline.bb_combiner,
        snrs.link,
        ns,
        &[],
    )?;
    let base_sir = sir_radar(
        &channels.h_ir.entries,
        &design.transmit_baseline.rf_precoder,
        &design.transmit_baseline.bb_precoder,
        ns,
    )?;
    let (base_r_ki, base_r_ki_deficient) = spectral_efficiency_on_range(
        &eff.h_eff_ki,
        &design.receive_baseline.bb_precoder,
        &design.receive_baseline.bb_combiner,
        snrs.link,
        ns,
        &[],
    )?;
    Ok(TrialScores {
        r_ij,
        r_ki,
        sir_rr_db: sir,
        baseline_r_ij: base_r_ij,
        baseline_r_ki: base_r_ki,
        baseline_sir_rr_db: base_sir,
        combiner_rank_deficient: r_ij_deficient || r_ki_deficient || base_r_ij_deficient || base_r_ki_deficient,
    })
}

/// Identifies one trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialId {
    pub point_index: usize,
    pub trial_index: usize,
    pub seed: u64,
}

impl TrialId {
    pub fn in_sweep(config: &ScenarioConfig, point_index: usize, trial_index: usize) -> Self {
        Self {
            point_index,
            trial_index,
            seed: derive_seed(config.base_seed, point_index as u64, trial_index as u64),
        }
    }
}

/// Runs one trial at grid point `id.point_index`.
///
/// The radar's active transmit antenna cycles with the trial index.
pub fn run_trial(scenario: &Scenario, id: TrialId) -> Result<TrialResult> {
    let snr_db = *scenario
        .config
        .snr_grid_db
        .get(id.point_index)
        .ok_or_else(|| Error::InvalidArgument(format!("no SNR grid point {}", id.point_index)))?;
    run_trial_at(scenario, id, snr_db).map_err(|e| Error::Trial {
        point: id.point_index,
        trial: id.trial_index,
        seed: id.seed,
        source: Box::new(e),
    })
}

fn run_trial_at(scenario: &Scenario, id: TrialId, snr_db: f64) -> Result<TrialResult> {
    let channels = draw_channels(scenario, id.seed)?;
    let rf = train_rf(scenario, &channels)?;
    let snrs = LinkSnrs::from_config(&scenario.config, snr_db);
    let antenna = id.trial_index % scenario.config.radar_tx_antennas;
    let design = design_trial(scenario, &channels, &rf, snrs, antenna)?;
    let s = score_design(scenario, &channels, &design, snrs)?;
    Ok(TrialResult {
        point_index: id.point_index,
        trial_index: id.trial_index,
        seed: id.seed,
        snr_db,
        r_ij: s.r_ij,
        r_ki: s.r_ki,
        sir_rr_db: s.sir_rr_db,
        baseline_r_ij: s.baseline_r_ij,
        baseline_r_ki: s.baseline_r_ki,
        baseline_sir_rr_db: s.baseline_sir_rr_db,
        beamtraining_degenerate: rf.link_ij.degenerate || rf.link_ki.degenerate,
        rank_deficient: design.rank_deficient || s.combiner_rank_deficient,
    })
}

/// All trials of one SNR grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub snr_db: f64,
    pub trials: Vec<TrialResult>,
}

/// Mean rates at one SNR grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub snr_db: f64,
    pub mean_r_ij: f64,
    pub mean_r_ki: f64,
    pub mean_sum: f64,
    pub baseline_sum: f64,
}

/// Pooled SIR CDFs evaluated on the merged set of observed values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirCdfRow {
    pub sir_db: f64,
    pub cdf_with_design: f64,
    pub cdf_without_design: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
}

impl SweepResult {
    /// Groups trials by grid point in `(point, trial)` order, regardless of
    /// the order they were produced in.
    pub fn from_trials(config: &ScenarioConfig, mut trials: Vec<TrialResult>) -> Self {
        trials.sort_by_key(|t| (t.point_index, t.trial_index));
        let mut points: Vec<PointResult> = config
            .snr_grid_db
            .iter()
            .map(|&snr_db| PointResult {
                snr_db,
                trials: Vec::with_capacity(config.trials_per_point),
            })
            .collect();
        for t in trials {
            points[t.point_index].trials.push(t);
        }
        Self { points }
    }

    pub fn trials(&self) -> impl Iterator<Item = &TrialResult> {
        self.points.iter().flat_map(|p| p.trials.iter())
    }

    pub fn num_trials(&self) -> usize {
        self.points.iter().map(|p| p.trials.len()).sum()
    }

    pub fn rate_table(&self) -> Vec<RateRow> {
        self.points
            .iter()
            .map(|p| {
                let n = p.trials.len().max(1) as f64;
                let mean = |f: fn(&TrialResult) -> f64| p.trials.iter().map(f).sum::<f64>() / n;
                let mean_r_ij = mean(|t| t.r_ij);
                let mean_r_ki = mean(|t| t.r_ki);
                RateRow {
                    snr_db: p.snr_db,
                    mean_r_ij,
                    mean_r_ki,
                    mean_sum: mean_r_ij + mean_r_ki,
                    baseline_sum: mean(|t| t.baseline_r_ij) + mean(|t| t.baseline_r_ki),
                }
            })
            .collect()
    }

    /// Radar SIR of every trial, pooled over all grid points.
    pub fn pooled_sir(&self, with_design: bool) -> Vec<f64> {
        self.trials()
            .map(|t| if with_design { t.sir_rr_db } else { t.baseline_sir_rr_db })
            .collect()
    }

    pub fn sir_cdf_table(&self) -> Vec<SirCdfRow> {
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let with = sorted(self.pooled_sir(true));
        let without = sorted(self.pooled_sir(false));
        let mut grid: Vec<f64> = with.iter().chain(without.iter()).copied().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid.into_iter()
            .map(|x| SirCdfRow {
                sir_db: x,
                cdf_with_design: cdf_at(&with, x),
                cdf_without_design: cdf_at(&without, x),
            })
            .collect()
    }
}

/// How trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon thread pool when the `parallel` feature is enabled,
    /// otherwise runs sequentially.
    Parallel,
}

pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    run_sweep_with(config, Execution::Parallel)
}

pub fn run_sweep_with(config: &ScenarioConfig, execution: Execution) -> Result<SweepResult> {
    let scenario = Scenario::new(config)?;
    let ids: Vec<TrialId> = (0..config.snr_grid_db.len())
        .flat_map(|p| (0..config.trials_per_point).map(move |t| (p, t)))
        .map(|(p, t)| TrialId::in_sweep(config, p, t))
        .collect();
    let results = run_ids(&scenario, &ids, execution);
    // report the first failure in (point, trial) order
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_trials(config, trials))
}

fn run_ids(scenario: &Scenario, ids: &[TrialId], execution: Execution) -> Vec<Result<TrialResult>> {
    #[cfg(feature = "parallel")]
    if execution == Execution::Parallel {
        use rayon::prelude::*;
        return ids.par_iter().map(|&id| run_trial(scenario, id)).collect();
    }
    let _ = execution;
    ids.iter().map(|&id| run_trial(scenario, id)).collect()
}

/// Composite beam pattern `|a(angle)^H F[:, stream]|^2` of a precoder over a
/// grid of angles.
pub fn beam_pattern(geometry: &ArrayGeometry, composite: &DMatrix<C64>, angles: &[f64]) -> Result<Vec<Vec<f64>>> {
    angles
        .iter()
        .map(|&a| {
            let v = geometry.steering_vector(a)?;
            Ok(composite.column_iter().map(|c| v.dotc(&c).norm_sqr()).collect())
        })
        .collect()
}

//! Hybrid beamforming design for radio `i` colocated with the radar.
//!
//! The pipeline is:
//!
//! 1. Beamtraining fixes the RF stages `F_RF(i)`, `W_RF(j)`, `F_RF(k)`,
//!    `W_RF(i)` by picking the strongest DFT beam pairs on each link.
//! 2. The raw channels are reduced to effective channels seen by the
//!    baseband stages.
//! 3. Transmit slot (`i -> j`): SVD combiner at `j`, regularized zero-forcing
//!    precoder at `i` that penalizes energy pushed into the radar receiver.
//! 4. Receive slot (`k -> i`): SVD precoder at `k`, LMMSE combiner at `i` that
//!    suppresses the radar's transmit signal.
//!
//! Precoders are normalized so every stream leaves the array with unit power.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::array::Codebook;
use crate::error::{check_dims, Error, Result};
use crate::linalg::{
    complete_orthonormal, fix_phase, rank_tolerance, sorted_left_svd,
};
use crate::C64;

/// RF and baseband stages of one hybrid transmitter/receiver pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// `Nt x Nrf_tx`, unit-modulus entries.
    pub rf_precoder: DMatrix<C64>,
    /// `Nrf_tx x Ns`.
    pub bb_precoder: DMatrix<C64>,
    /// `Nr x Nrf_rx`, unit-modulus entries.
    pub rf_combiner: DMatrix<C64>,
    /// `Nrf_rx x Ns`.
    pub bb_combiner: DMatrix<C64>,
}

impl BeamformerSet {
    pub fn composite_precoder(&self) -> DMatrix<C64> {
        &self.rf_precoder * &self.bb_precoder
    }

    pub fn composite_combiner(&self) -> DMatrix<C64> {
        &self.rf_combiner * &self.bb_combiner
    }

    /// True if each RF matrix has entries of one common magnitude.
    pub fn rf_is_constant_modulus(&self, tol: f64) -> bool {
        is_constant_modulus(&self.rf_precoder, tol) && is_constant_modulus(&self.rf_combiner, tol)
    }
}

pub fn is_constant_modulus(m: &DMatrix<C64>, tol: f64) -> bool {
    match m.iter().next() {
        None => true,
        Some(first) => {
            let mag = first.norm();
            m.iter().all(|x| (x.norm() - mag).abs() <= tol)
        }
    }
}

/// Outcome of a codebook sweep on one link.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamTraining {
    /// Selected transmit beams scaled to unit-modulus entries, in selection order.
    pub rf_precoder: DMatrix<C64>,
    /// Selected receive beams scaled to unit-modulus entries, in selection order.
    pub rf_combiner: DMatrix<C64>,
    pub tx_indices: Vec<usize>,
    pub rx_indices: Vec<usize>,
    /// The channel carried no power through any beam pair; selection fell back
    /// to the lowest indices.
    pub degenerate: bool,
}

/// Power `|w_r^H H f_t|^2` for every receive beam `r` (rows) and transmit beam
/// `t` (columns).
pub fn beam_pair_powers(
    channel: &DMatrix<C64>,
    tx_codebook: &Codebook,
    rx_codebook: &Codebook,
) -> Result<DMatrix<f64>> {
    check_dims(
        "beam_pair_powers",
        (rx_codebook.num_elements(), tx_codebook.num_elements()),
        channel.shape(),
    )?;
    let g = rx_codebook.as_matrix().adjoint() * channel * tx_codebook.as_matrix();
    Ok(g.map(|x| x.norm_sqr()))
}

/// Exhaustive beam-pair sweep with greedy distinct-index selection.
///
/// Each step takes the strongest eligible pair (ties broken by lower transmit
/// index, then lower receive index). While both sides have free RF chains a
/// pair is eligible only if both of its beams are new. Once one side is full,
/// the other side keeps filling with pairs whose partner beam is already
/// selected.
pub fn beamtrain(
    channel: &DMatrix<C64>,
    tx_codebook: &Codebook,
    rx_codebook: &Codebook,
    num_tx_beams: usize,
    num_rx_beams: usize,
) -> Result<BeamTraining> {
    if num_tx_beams == 0 || num_tx_beams > tx_codebook.len() {
        return Err(Error::InvalidArgument(format!(
            "num_tx_beams = {num_tx_beams} must be in 1..={}",
            tx_codebook.len()
        )));
    }
    if num_rx_beams == 0 || num_rx_beams > rx_codebook.len() {
        return Err(Error::InvalidArgument(format!(
            "num_rx_beams = {num_rx_beams} must be in 1..={}",
            rx_codebook.len()
        )));
    }
    let power = beam_pair_powers(channel, tx_codebook, rx_codebook)?;

    let mut pairs: Vec<(usize, usize)> = (0..tx_codebook.len())
        .flat_map(|t| (0..rx_codebook.len()).map(move |r| (t, r)))
        .collect();
    pairs.sort_by(|&(ta, ra), &(tb, rb)| {
        power[(rb, tb)]
            .total_cmp(&power[(ra, ta)])
            .then(ta.cmp(&tb))
            .then(ra.cmp(&rb))
    });

    let mut tx_sel: Vec<usize> = Vec::with_capacity(num_tx_beams);
    let mut rx_sel: Vec<usize> = Vec::with_capacity(num_rx_beams);
    // each step takes the strongest pair eligible now; a pair skipped while
    // both sides were filling may become eligible once one side is full
    while tx_sel.len() < num_tx_beams || rx_sel.len() < num_rx_beams {
        let tx_full = tx_sel.len() == num_tx_beams;
        let rx_full = rx_sel.len() == num_rx_beams;
        let eligible = |&&(t, r): &&(usize, usize)| {
            let t_new = !tx_sel.contains(&t);
            let r_new = !rx_sel.contains(&r);
            match (tx_full, rx_full) {
                (false, false) => t_new && r_new,
                (true, _) => r_new && !t_new,
                (false, true) => t_new && !r_new,
            }
        };
        let &(t, r) = pairs
            .iter()
            .find(eligible)
            .expect("counts within codebook sizes leave an eligible pair");
        if !tx_sel.contains(&t) {
            tx_sel.push(t);
        }
        if !rx_sel.contains(&r) {
            rx_sel.push(r);
        }
    }

    let pick = |cb: &Codebook, idx: &[usize]| {
        let scale = C64::new((cb.num_elements() as f64).sqrt(), 0.0);
        let cols: Vec<DVector<C64>> = idx.iter().map(|&m| &cb.beams()[m] * scale).collect();
        DMatrix::from_columns(&cols)
    };
    Ok(BeamTraining {
        rf_precoder: pick(tx_codebook, &tx_sel),
        rf_combiner: pick(rx_codebook, &rx_sel),
        tx_indices: tx_sel,
        rx_indices: rx_sel,
        degenerate: power.iter().all(|&p| p == 0.0),
    })
}

/// `W_RF^H * H * F_RF`.
pub fn reduce_link(w_rf: &DMatrix<C64>, h: &DMatrix<C64>, f_rf: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_dims("reduce_link (combiner rows)", (h.nrows(), w_rf.ncols()), (w_rf.nrows(), w_rf.ncols()))?;
    check_dims("reduce_link (precoder rows)", (h.ncols(), f_rf.ncols()), (f_rf.nrows(), f_rf.ncols()))?;
    Ok(w_rf.adjoint() * h * f_rf)
}

/// `H * F_RF`: a radio transmitter seen through its RF precoder.
pub fn reduce_tx_interference(h: &DMatrix<C64>, f_rf: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_dims("reduce_tx_interference", (h.ncols(), f_rf.ncols()), f_rf.shape())?;
    Ok(h * f_rf)
}

/// `W_RF^H * H`: a radio receiver seen through its RF combiner.
pub fn reduce_rx_interference(w_rf: &DMatrix<C64>, h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_dims("reduce_rx_interference", (h.nrows(), w_rf.ncols()), w_rf.shape())?;
    Ok(w_rf.adjoint() * h)
}

/// Raw antenna-domain channels of one trial.
#[derive(Debug, Clone)]
pub struct RawChannels<'a> {
    pub h_ij: &'a DMatrix<C64>,
    pub h_ki: &'a DMatrix<C64>,
    pub h_ir: &'a DMatrix<C64>,
    pub h_ri: &'a DMatrix<C64>,
}

/// RF beamformers fixed by beamtraining.
#[derive(Debug, Clone)]
pub struct RfStages<'a> {
    pub f_rf_i: &'a DMatrix<C64>,
    pub w_rf_j: &'a DMatrix<C64>,
    pub f_rf_k: &'a DMatrix<C64>,
    pub w_rf_i: &'a DMatrix<C64>,
}

/// Channels seen by the baseband stages.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    /// `Nrf_rx(j) x Nrf_tx(i)`.
    pub h_eff_ij: DMatrix<C64>,
    /// `Nrf_rx(i) x Nrf_tx(k)`.
    pub h_eff_ki: DMatrix<C64>,
    /// `Nr(radar) x Nrf_tx(i)`.
    pub h_eff_ir: DMatrix<C64>,
    /// `Nrf_rx(i) x Nt(radar)`.
    pub h_eff_ri: DMatrix<C64>,
}

pub fn effective_channels(raw: &RawChannels<'_>, rf: &RfStages<'_>) -> Result<EffectiveChannels> {
    Ok(EffectiveChannels {
        h_eff_ij: reduce_link(rf.w_rf_j, raw.h_ij, rf.f_rf_i)?,
        h_eff_ki: reduce_link(rf.w_rf_i, raw.h_ki, rf.f_rf_k)?,
        h_eff_ir: reduce_tx_interference(raw.h_ir, rf.f_rf_i)?,
        h_eff_ri: reduce_rx_interference(rf.w_rf_i, raw.h_ri)?,
    })
}

/// Leading singular vectors selected for a baseband stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularBeams {
    /// Orthonormal columns ordered by decreasing singular value, each rotated
    /// so its largest-magnitude entry is real positive.
    pub beams: DMatrix<C64>,
    pub singular_values: Vec<f64>,
    /// Fewer than `Ns` singular values were numerically nonzero; the trailing
    /// columns were completed deterministically from the standard basis.
    pub rank_deficient: bool,
}

fn leading_left_vectors(h: &DMatrix<C64>, ns: usize) -> Result<SingularBeams> {
    let (m, n) = h.shape();
    if ns == 0 || ns > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "Ns = {ns} must be in 1..={} for a {m}x{n} channel",
            m.min(n)
        )));
    }
    let svd = sorted_left_svd(h);
    let s_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance((m, n), s_max);
    let rank = if s_max > 0.0 {
        svd.singular_values.iter().take_while(|&&s| s > tol).count()
    } else {
        0
    };
    let keep = rank.min(ns);
    let leading: Vec<DVector<C64>> = (0..keep).map(|c| svd.u.column(c).into_owned()).collect();
    let mut cols = complete_orthonormal(leading, m, ns);
    cols.iter_mut().for_each(fix_phase);
    Ok(SingularBeams {
        beams: DMatrix::from_columns(&cols),
        singular_values: svd.singular_values[..ns].to_vec(),
        rank_deficient: rank < ns,
    })
}

/// Baseband combiner from the `Ns` strongest left singular vectors.
pub fn svd_combiner(h_eff: &DMatrix<C64>, ns: usize) -> Result<SingularBeams> {
    leading_left_vectors(h_eff, ns)
}

/// Baseband precoder from the `Ns` strongest right singular vectors.
pub fn svd_precoder(h_eff: &DMatrix<C64>, ns: usize) -> Result<SingularBeams> {
    leading_left_vectors(&h_eff.adjoint(), ns)
}

fn check_snr(name: &str, value: f64, strictly_positive: bool) -> Result<()> {
    let ok = value.is_finite() && if strictly_positive { value > 0.0 } else { value >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and {} (linear), got {value}",
            if strictly_positive { "positive" } else { "non-negative" })))
    }
}

/// Regularized zero-forcing baseband precoder at `i`:
///
/// `[(H_ij^H W W^H H_ij + (snr_ir/snr_ij) H_ir^H H_ir + (Ns/snr_ij) I)^-1 H_ij^H W]_{:, 0..Ns}`
///
/// `h_eff_ij` is `Nrf_rx(j) x Nrf_tx(i)`, `w_bb_j` the combiner at `j`, and
/// `h_eff_ir` the `Nr(radar) x Nrf_tx(i)` interference channel. The result is
/// not yet power-normalized.
pub fn rzf_precoder(
    h_eff_ij: &DMatrix<C64>,
    w_bb_j: &DMatrix<C64>,
    h_eff_ir: &DMatrix<C64>,
    snr_ij: f64,
    snr_ir: f64,
    ns: usize,
) -> Result<DMatrix<C64>> {
    check_snr("snr_ij", snr_ij, true)?;
    check_snr("snr_ir", snr_ir, false)?;
    check_dims("rzf_precoder (combiner rows)", (h_eff_ij.nrows(), w_bb_j.ncols()), w_bb_j.shape())?;
    regularized_solve(
        &(h_eff_ij.adjoint() * w_bb_j),
        h_eff_ir.adjoint(),
        snr_ir / snr_ij,
        ns as f64 / snr_ij,
        ns,
        ("rzf_precoder", h_eff_ij.shape(), w_bb_j.shape(), h_eff_ir.shape()),
    )
}

/// LMMSE baseband combiner at `i`:
///
/// `[(H_ki F F^H H_ki^H + (snr_ri/snr_ki) H_ri H_ri^H + (Ns/snr_ki) I)^-1 H_ki F]_{:, 0..Ns}`
///
/// `h_eff_ki` is `Nrf_rx(i) x Nrf_tx(k)`, `f_bb_k` the (normalized) precoder
/// at `k`, and `h_eff_ri` the `Nrf_rx(i) x Nt(radar)` interference channel.
pub fn lmmse_combiner(
    h_eff_ki: &DMatrix<C64>,
    f_bb_k: &DMatrix<C64>,
    h_eff_ri: &DMatrix<C64>,
    snr_ki: f64,
    snr_ri: f64,
    ns: usize,
) -> Result<DMatrix<C64>> {
    check_snr("snr_ki", snr_ki, true)?;
    check_snr("snr_ri", snr_ri, false)?;
    check_dims("lmmse_combiner (desired channel columns)", (h_eff_ki.ncols(), f_bb_k.ncols()), f_bb_k.shape())?;
    regularized_solve(
        &(h_eff_ki * f_bb_k),
        h_eff_ri.clone(),
        snr_ri / snr_ki,
        ns as f64 / snr_ki,
        ns,
        ("lmmse_combiner", h_eff_ki.shape(), f_bb_k.shape(), h_eff_ri.shape()),
    )
}

/// Solves `(G G^H + penalty * A A^H + loading * I) X = G[:, 0..ns]` where
/// `g` is the desired-signal matrix and `a` the interference matrix, both
/// with one row per baseband dimension.
fn regularized_solve(
    g: &DMatrix<C64>,
    a: DMatrix<C64>,
    penalty: f64,
    loading: f64,
    ns: usize,
    shapes: (&'static str, (usize, usize), (usize, usize), (usize, usize)),
) -> Result<DMatrix<C64>> {
    let (context, desired, stage, interference) = shapes;
    let dim = g.nrows();
    if a.nrows() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: format!("interference channel compatible with {}x{} desired channel", desired.0, desired.1),
            actual: format!("{}x{}", interference.0, interference.1),
        });
    }
    if ns == 0 || g.ncols() < ns {
        return Err(Error::InvalidArgument(format!(
            "{context}: Ns = {ns} needs a {}x{} partner stage with at least Ns columns",
            stage.0, stage.1
        )));
    }
    // These are the normal equations of min ||S X - B|| with
    // S = [G^H; sqrt(penalty) A^H; sqrt(loading) I] and B = [E; 0; 0], E the
    // first ns columns of the identity. Solving through a QR of S keeps the
    // conditioning at cond(S) instead of cond(S)^2, which matters when the
    // interference penalty is many orders above the loading.
    let (kg, ka) = (g.ncols(), a.ncols());
    let mut stacked = DMatrix::zeros(kg + ka + dim, dim);
    stacked.rows_mut(0, kg).copy_from(&g.adjoint());
    stacked
        .rows_mut(kg, ka)
        .copy_from(&(a.adjoint() * C64::new(penalty.sqrt(), 0.0)));
    for d in 0..dim {
        stacked[(kg + ka + d, d)] = C64::new(loading.sqrt(), 0.0);
    }
    let qr = stacked.qr();
    // Q^H B keeps only the first ns rows of Q (the G^H block)
    let qhb = qr.q().rows(0, kg).adjoint().columns(0, ns).into_owned();
    qr.r().solve_upper_triangular(&qhb).ok_or_else(|| {
        Error::InvalidArgument(format!("{context}: regularized system is singular"))
    })
}

/// Scales each baseband column so that `||F_RF * F_BB[:, l]|| = 1`, hence
/// `||F_RF * F_BB||_F^2 = Ns`.
pub fn normalize_precoder(f_rf: &DMatrix<C64>, f_bb: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_dims("normalize_precoder", (f_rf.ncols(), f_bb.ncols()), f_bb.shape())?;
    let composite = f_rf * f_bb;
    let mut out = f_bb.clone();
    for (stream, col) in composite.column_iter().enumerate() {
        let norm = col.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateStream { stream });
        }
        out.column_mut(stream).scale_mut(1.0 / norm);
    }
    Ok(out)
}

/// Removes from each precoder column its component in the row space of the
/// effective interference channel, leaving `h_eff_ir * F ~ 0`.
pub fn project_out_interference(f_bb: &DMatrix<C64>, h_eff_ir: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_dims("project_out_interference", (h_eff_ir.ncols(), f_bb.ncols()), f_bb.shape())?;
    let row_space = sorted_left_svd(&h_eff_ir.adjoint());
    let s_max = row_space.singular_values.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance(h_eff_ir.shape(), s_max);
    let rank = row_space.singular_values.iter().take_while(|&&s| s > tol && s_max > 0.0).count();
    let basis = row_space.u.columns(0, rank);
    let mut out = f_bb - &basis * (basis.adjoint() * f_bb);
    // a second pass removes the rounding residue of the first
    out -= &basis * (basis.adjoint() * &out);
    Ok(out)
}

/// Which side of radio `i` lacks baseband dimensions for full nulling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DofSide {
    Transmit,
    Receive,
}

/// A violated degrees-of-freedom condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofWarning {
    pub side: DofSide,
    pub rf_chains: usize,
    pub required: usize,
}

impl std::fmt::Display for DofWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (what, radar) = match self.side {
            DofSide::Transmit => ("transmit", "receive antennas"),
            DofSide::Receive => ("receive", "transmit antennas"),
        };
        write!(
            f,
            "radio i has {} {what} RF chains but needs at least {} (radar {radar} + Ns) to fully null the radar",
            self.rf_chains, self.required
        )
    }
}

/// Dimension counts that decide whether radio `i` can null the radar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofParams {
    pub rf_chains_tx_i: usize,
    pub rf_chains_rx_i: usize,
    pub radar_tx_antennas: usize,
    pub radar_rx_antennas: usize,
    pub ns: usize,
}

/// Checks `Nrf_tx(i) >= Nr(radar) + Ns` and `Nrf_rx(i) >= Nt(radar) + Ns`.
pub fn validate_dof(p: &DofParams) -> Vec<DofWarning> {
    let mut warnings = Vec::new();
    if p.ns == 0 {
        return warnings;
    }
    let tx_required = p.radar_rx_antennas + p.ns;
    if p.rf_chains_tx_i < tx_required {
        warnings.push(DofWarning {
            side: DofSide::Transmit,
            rf_chains: p.rf_chains_tx_i,
            required: tx_required,
        });
    }
    let rx_required = p.radar_tx_antennas + p.ns;
    if p.rf_chains_rx_i < rx_required {
        warnings.push(DofWarning {
            side: DofSide::Receive,
            rf_chains: p.rf_chains_rx_i,
            required: rx_required,
        });
    }
    warnings
}

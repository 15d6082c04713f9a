//! Link spectral efficiency, radar SIR and empirical CDFs.

use nalgebra::DMatrix;

use crate::error::{check_dims, Error, Result};
use crate::linalg::{hermitian_part, ln_det_hpd, rank_tolerance, sorted_left_svd};
use crate::C64;

/// SIR reported when the coupled interference power is below
/// [`SIR_FLOOR_POWER`].
pub const SIR_CAP_DB: f64 = 300.0;
pub const SIR_FLOOR_POWER: f64 = 1e-30;

/// An interfering transmitter as seen at the input of a baseband combiner.
#[derive(Debug, Clone)]
pub struct InterferenceTerm {
    /// Effective channel from the interferer's precoder input to the
    /// combiner's input space.
    pub channel: DMatrix<C64>,
    /// Linear SNR of the interfering link.
    pub snr: f64,
    pub precoder: DMatrix<C64>,
    /// Covariance of the interferer's symbols.
    pub symbol_cov: DMatrix<C64>,
}

impl InterferenceTerm {
    /// A radar transmitting a unit-variance symbol from antenna `active` only.
    pub fn antenna_selection(channel: DMatrix<C64>, snr: f64, active: usize) -> Result<Self> {
        let nt = channel.ncols();
        if active >= nt {
            return Err(Error::InvalidArgument(format!(
                "active antenna {active} out of range for {nt} transmit antennas"
            )));
        }
        let mut precoder = DMatrix::zeros(nt, 1);
        precoder[(active, 0)] = C64::new(1.0, 0.0);
        Ok(Self {
            channel,
            snr,
            precoder,
            symbol_cov: DMatrix::identity(1, 1),
        })
    }

    /// `snr * (W^H H P) S (W^H H P)^H`: the covariance after combining with `w`.
    fn combined_covariance(&self, w: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        check_dims(
            "interference channel rows",
            (w.nrows(), self.channel.ncols()),
            self.channel.shape(),
        )?;
        check_dims(
            "interference precoder",
            (self.channel.ncols(), self.symbol_cov.nrows()),
            self.precoder.shape(),
        )?;
        check_dims(
            "interference symbol covariance",
            (self.precoder.ncols(), self.precoder.ncols()),
            self.symbol_cov.shape(),
        )?;
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interference snr must be finite and non-negative, got {}",
                self.snr
            )));
        }
        // project before forming the outer product, so a strong interferer
        // does not swamp the unit noise floor in rounding
        let whp = w.adjoint() * &self.channel * &self.precoder;
        Ok(&whp * &self.symbol_cov * whp.adjoint() * C64::new(self.snr, 0.0))
    }
}

/// Achievable rate in bits/s/Hz with Gaussian signaling:
///
/// `log2 det(I + Q^-1 (snr/Ns) T T^H)` with `T = W^H H F` and
/// `Q = W^H (I + sum_k snr_k H_k P_k S_k P_k^H H_k^H) W` (unit noise power).
///
/// A rank-deficient `W` makes `Q` singular and is rejected; see
/// [`spectral_efficiency_on_range`] for the rate such a combiner still
/// delivers.
pub fn spectral_efficiency(
    h_eff: &DMatrix<C64>,
    f_bb: &DMatrix<C64>,
    w_bb: &DMatrix<C64>,
    snr_link: f64,
    ns: usize,
    interference: &[InterferenceTerm],
) -> Result<f64> {
    check_rate_inputs(h_eff, f_bb, w_bb, snr_link, ns)?;
    // test rank on W^H W, whose conditioning does not depend on the
    // interference strength the way Q's does
    let gram = hermitian_part(&(w_bb.adjoint() * w_bb))
        .cholesky()
        .ok_or(Error::DegenerateCombiner)?;
    let pivots = gram.l_dirty().diagonal().map(|x| x.re);
    // pivots are square roots of the spectrum scale, so rounding leaves ~1e-8
    if pivots.min() <= 1e-7 * pivots.max() {
        return Err(Error::DegenerateCombiner);
    }
    rate(h_eff, f_bb, w_bb, snr_link, ns, interference)
}

/// Like [`spectral_efficiency`], but a rank-deficient combiner is evaluated
/// on its column space.
///
/// With `W = U B`, `U` an orthonormal basis of `range(W)` and `B` of full row
/// rank, `W^H y` carries exactly the information in `U^H y`, so the rate is
/// that of `U`. Returns the rate and whether `W` was rank-deficient. A zero
/// combiner delivers rate 0.
pub fn spectral_efficiency_on_range(
    h_eff: &DMatrix<C64>,
    f_bb: &DMatrix<C64>,
    w_bb: &DMatrix<C64>,
    snr_link: f64,
    ns: usize,
    interference: &[InterferenceTerm],
) -> Result<(f64, bool)> {
    check_rate_inputs(h_eff, f_bb, w_bb, snr_link, ns)?;
    match spectral_efficiency(h_eff, f_bb, w_bb, snr_link, ns, interference) {
        Err(Error::DegenerateCombiner) => {}
        other => return other.map(|r| (r, false)),
    }
    let svd = sorted_left_svd(w_bb);
    let s_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance(w_bb.shape(), s_max).max(1e-7 * s_max);
    let rank = svd.singular_values.iter().take_while(|&&s| s > tol && s_max > 0.0).count();
    if rank == 0 {
        return Ok((0.0, true));
    }
    let basis = svd.u.columns(0, rank).into_owned();
    Ok((rate(h_eff, f_bb, &basis, snr_link, ns, interference)?, true))
}

fn check_rate_inputs(
    h_eff: &DMatrix<C64>,
    f_bb: &DMatrix<C64>,
    w_bb: &DMatrix<C64>,
    snr_link: f64,
    ns: usize,
) -> Result<()> {
    if !(snr_link.is_finite() && snr_link > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "link snr must be finite and positive, got {snr_link}"
        )));
    }
    if ns == 0 {
        return Err(Error::InvalidArgument("Ns must be at least 1".into()));
    }
    check_dims("spectral_efficiency precoder", (h_eff.ncols(), ns), f_bb.shape())?;
    check_dims("spectral_efficiency combiner", (h_eff.nrows(), ns), w_bb.shape())
}

/// The rate formula for a combiner of any width with full column rank.
fn rate(
    h_eff: &DMatrix<C64>,
    f_bb: &DMatrix<C64>,
    w: &DMatrix<C64>,
    snr_link: f64,
    ns: usize,
    interference: &[InterferenceTerm],
) -> Result<f64> {
    let mut q = w.adjoint() * w;
    for term in interference {
        q += term.combined_covariance(w)?;
    }
    let q = hermitian_part(&q);
    let chol = q.cholesky().ok_or(Error::DegenerateCombiner)?;
    let t = w.adjoint() * h_eff * f_bb;
    // whitened signal: L^-1 T
    let x = chol
        .l_dirty()
        .solve_lower_triangular(&t)
        .ok_or(Error::DegenerateCombiner)?;
    let mut s = &x * x.adjoint() * C64::new(snr_link / ns as f64, 0.0);
    for d in 0..s.nrows() {
        s[(d, d)] += 1.0;
    }
    let ln_det = ln_det_hpd(&s).ok_or(Error::DegenerateCombiner)?;
    Ok((ln_det / std::f64::consts::LN_2).max(0.0))
}

/// Interference power `tr(H F R_s F^H H^H)` coupled into the radar receiver,
/// with `F = F_RF F_BB` and `R_s = I / Ns`.
pub fn radar_interference_power(
    h_ir: &DMatrix<C64>,
    f_rf: &DMatrix<C64>,
    f_bb: &DMatrix<C64>,
    ns: usize,
) -> Result<f64> {
    if ns == 0 {
        return Err(Error::InvalidArgument("Ns must be at least 1".into()));
    }
    check_dims("radar SIR (RF precoder)", (h_ir.ncols(), f_rf.ncols()), f_rf.shape())?;
    check_dims("radar SIR (baseband precoder)", (f_rf.ncols(), f_bb.ncols()), f_bb.shape())?;
    Ok((h_ir * f_rf * f_bb).norm_squared() / ns as f64)
}

/// Radar SIR in dB: the inverse of [`radar_interference_power`], capped at
/// [`SIR_CAP_DB`].
pub fn sir_radar(h_ir: &DMatrix<C64>, f_rf: &DMatrix<C64>, f_bb: &DMatrix<C64>, ns: usize) -> Result<f64> {
    Ok(sir_db_from_power(radar_interference_power(h_ir, f_rf, f_bb, ns)?))
}

pub fn sir_db_from_power(power: f64) -> f64 {
    if power < SIR_FLOOR_POWER {
        SIR_CAP_DB
    } else {
        (-10.0 * power.log10()).min(SIR_CAP_DB)
    }
}

/// Step-function CDF: the k-th smallest sample (1-based) maps to `k/n`.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empirical CDF of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("empirical CDF sample contains NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v, (k + 1) as f64 / n))
        .collect())
}

/// Fraction of `sorted` samples that are `<= x`.
pub fn cdf_at(sorted: &[f64], x: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::{svd_combiner, svd_precoder};
    use crate::random::{complex_normal, rng_from_seed};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut rng))
    }

    #[test]
    fn scalar_rate_is_one_bit() {
        let one = DMatrix::identity(1, 1);
        let r = spectral_efficiency(&one, &one, &one, 1.0, 1, &[]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_two_streams() {
        let i2 = DMatrix::identity(2, 2);
        let r = spectral_efficiency(&i2, &i2, &i2, 2.0, 2, &[]).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn svd_design_matches_per_stream_closed_form() {
        let h = diag(&[2.0, 1.0]);
        let f = svd_precoder(&h, 2).unwrap().beams;
        let w = svd_combiner(&h, 2).unwrap().beams;
        let r = spectral_efficiency(&h, &f, &w, 10.0, 2, &[]).unwrap();
        let closed = (1.0f64 + 5.0 * 4.0).log2() + (1.0f64 + 5.0).log2();
        assert!((r - closed).abs() < 1e-12, "{r} vs {closed}");
    }

    #[test]
    fn rate_rejects_bad_inputs() {
        let i2 = DMatrix::identity(2, 2);
        assert!(spectral_efficiency(&i2, &i2, &i2, 0.0, 2, &[]).is_err());
        assert!(spectral_efficiency(&i2, &i2, &i2, f64::NAN, 2, &[]).is_err());
        assert!(matches!(
            spectral_efficiency(&i2, &i2, &DMatrix::identity(3, 2), 1.0, 2, &[]),
            Err(Error::DimensionMismatch { .. })
        ));
        let rank_one = DMatrix::from_element(2, 2, c(1.0));
        assert!(matches!(
            spectral_efficiency(&i2, &i2, &rank_one, 1.0, 2, &[]),
            Err(Error::DegenerateCombiner)
        ));
    }

    #[test]
    fn rank_deficient_combiner_is_evaluated_on_its_range() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(1.0)]));
        let f = DMatrix::identity(2, 2);
        // both columns along e0, so only stream 0 is observed
        let w = DMatrix::from_row_slice(2, 2, &[c(1.0), c(3.0), c(0.0), c(0.0)]);
        let (r, flagged) = spectral_efficiency_on_range(&h, &f, &w, 2.0, 2, &[]).unwrap();
        assert!(flagged);
        assert!((r - (1.0f64 + 4.0).log2()).abs() < 1e-12, "{r}");

        let (r, flagged) = spectral_efficiency_on_range(&h, &f, &f, 2.0, 2, &[]).unwrap();
        assert!(!flagged);
        assert_eq!(r, spectral_efficiency(&h, &f, &f, 2.0, 2, &[]).unwrap());

        let (r, flagged) = spectral_efficiency_on_range(&h, &f, &DMatrix::zeros(2, 2), 2.0, 2, &[]).unwrap();
        assert!(flagged && r == 0.0);
    }

    #[test]
    fn radar_interference_lowers_rate() {
        let h = random(8, 2, 1);
        let f = svd_precoder(&h, 2).unwrap().beams;
        let w = svd_combiner(&h, 2).unwrap().beams;
        let clean = spectral_efficiency(&h, &f, &w, 3.0, 2, &[]).unwrap();
        let term = InterferenceTerm::antenna_selection(random(8, 3, 2), 10.0, 1).unwrap();
        let dirty = spectral_efficiency(&h, &f, &w, 3.0, 2, &[term]).unwrap();
        assert!(dirty < clean);
        assert!(InterferenceTerm::antenna_selection(random(8, 3, 2), 1.0, 3).is_err());
    }

    #[test]
    fn sir_examples() {
        let one = DMatrix::identity(1, 1);
        assert!(sir_radar(&one, &one, &one, 1).unwrap().abs() < 1e-15);

        // precoder orthogonal to the interference channel
        let h = DMatrix::from_row_slice(1, 2, &[c(1.0), c(0.0)]);
        let f_rf = DMatrix::identity(2, 2);
        let f_bb = DMatrix::from_column_slice(2, 1, &[c(0.0), c(1.0)]);
        assert_eq!(sir_radar(&h, &f_rf, &f_bb, 1).unwrap(), SIR_CAP_DB);

        assert!((sir_db_from_power(1e-3) - 30.0).abs() < 1e-12);
        assert_eq!(sir_db_from_power(0.0), SIR_CAP_DB);
        assert_eq!(sir_db_from_power(1e-31), SIR_CAP_DB);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(empirical_cdf(&[5.0]).unwrap(), vec![(5.0, 1.0)]);
        let probs: Vec<f64> = empirical_cdf(&[3.0, 1.0, 4.0, 2.0])
            .unwrap()
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        assert_eq!(probs, vec![0.25, 0.5, 0.75, 1.0]);
        assert!(empirical_cdf(&[]).is_err());
        assert!(empirical_cdf(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn cdf_of_uniform_samples_is_near_diagonal() {
        // DKW: P(sup|F_n - F| > eps) <= 2 exp(-2 n eps^2) ~ 1.5e-3 at n=1000, eps=0.06
        use rand::Rng;
        let mut rng = rng_from_seed(99);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let cdf = empirical_cdf(&xs).unwrap();
        let n = cdf.len() as f64;
        let dev = cdf
            .iter()
            .enumerate()
            .map(|(k, &(x, p))| (p - x).abs().max((x - k as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(dev < 0.06, "{dev}");
    }

    #[test]
    fn cdf_at_counts_inclusive() {
        let sorted = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(cdf_at(&sorted, 0.5), 0.0);
        assert_eq!(cdf_at(&sorted, 2.0), 0.75);
        assert_eq!(cdf_at(&sorted, 3.0), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rate_is_monotone_in_snr(seed in 0u64..10_000) {
            let h = random(4, 3, seed);
            let f = svd_precoder(&h, 2).unwrap().beams;
            let w = random(4, 2, seed ^ 0xabc);
            let term = InterferenceTerm::antenna_selection(random(4, 3, seed + 1), 5.0, 0).unwrap();
            let mut last = 0.0;
            for k in 0..10 {
                let snr = 10f64.powf(-3.0 + 0.7 * k as f64);
                let r = spectral_efficiency(&h, &f, &w, snr, 2, std::slice::from_ref(&term)).unwrap();
                prop_assert!(r >= last - 1e-12);
                last = r;
            }
        }

        #[test]
        fn interference_never_helps(seed in 0u64..10_000, snr_int in 0.0f64..1e3) {
            let h = random(5, 4, seed);
            let f = random(4, 2, seed + 7);
            let w = random(5, 2, seed + 8);
            let clean = spectral_efficiency(&h, &f, &w, 2.0, 2, &[]).unwrap();
            let term = InterferenceTerm::antenna_selection(random(5, 3, seed + 9), snr_int, 2).unwrap();
            let dirty = spectral_efficiency(&h, &f, &w, 2.0, 2, &[term]).unwrap();
            prop_assert!(dirty <= clean + 1e-12);
        }

        #[test]
        fn cdf_is_monotone_and_ends_at_one(xs in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let cdf = empirical_cdf(&xs).unwrap();
            for pair in cdf.windows(2) {
                prop_assert!(pair[0].0 <= pair[1].0);
                prop_assert!(pair[0].1 < pair[1].1);
            }
            prop_assert_eq!(cdf.last().unwrap().1, 1.0);
        }
    }
}

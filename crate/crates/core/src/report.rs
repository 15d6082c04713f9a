//! CSV renderings of sweep results.
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! parses back to the identical `f64`.

use std::fmt::Write;

use crate::sim::SweepResult;

pub const RATES_HEADER: &str = "snr_db,mean_r_ij,mean_r_ki,mean_sum,baseline_sum";
pub const SIR_CDF_HEADER: &str = "sir_db,cdf_with_design,cdf_without_design";
pub const TRIALS_HEADER: &str = "point_index,trial_index,seed,snr_db,r_ij,r_ki,sir_rr_db,baseline_r_ij,baseline_r_ki,baseline_sir_rr_db,beamtraining_degenerate,rank_deficient";

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, fields: &[f64]) {
    let line: Vec<String> = fields.iter().map(|&x| fmt_real(x)).collect();
    out.push_str(&line.join(","));
    out.push('\n');
}

/// Mean spectral efficiencies per SNR point.
pub fn rates_csv(sweep: &SweepResult) -> String {
    let mut out = format!("{RATES_HEADER}\n");
    for r in sweep.rate_table() {
        row(&mut out, &[r.snr_db, r.mean_r_ij, r.mean_r_ki, r.mean_sum, r.baseline_sum]);
    }
    out
}

/// Pooled radar-SIR CDFs with and without the design on a merged grid.
pub fn sir_cdf_csv(sweep: &SweepResult) -> String {
    let mut out = format!("{SIR_CDF_HEADER}\n");
    for r in sweep.sir_cdf_table() {
        row(&mut out, &[r.sir_db, r.cdf_with_design, r.cdf_without_design]);
    }
    out
}

/// One row per trial.
pub fn trials_csv(sweep: &SweepResult) -> String {
    let mut out = format!("{TRIALS_HEADER}\n");
    for t in sweep.trials() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            t.point_index,
            t.trial_index,
            t.seed,
            fmt_real(t.snr_db),
            fmt_real(t.r_ij),
            fmt_real(t.r_ki),
            fmt_real(t.sir_rr_db),
            fmt_real(t.baseline_r_ij),
            fmt_real(t.baseline_r_ki),
            fmt_real(t.baseline_sir_rr_db),
            t.beamtraining_degenerate,
            t.rank_deficient,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(-0.1), "-1.0000000000000001e-1");
        let digits: String = fmt_real(std::f64::consts::PI)
            .chars()
            .take_while(|&c| c != 'e')
            .filter(|c| c.is_ascii_digit())
            .collect();
        assert_eq!(digits.len(), 17);
    }

    proptest! {
        #[test]
        fn reals_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = fmt_real(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}

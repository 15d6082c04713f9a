use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// A composite precoder column `F_RF * F_BB[:, stream]` has zero norm.
    #[error("degenerate stream {stream}: composite precoder column has zero norm")]
    DegenerateStream { stream: usize },

    /// The post-combiner noise-plus-interference covariance is singular.
    #[error("degenerate combiner: noise-plus-interference covariance is not positive definite")]
    DegenerateCombiner,

    #[error("trial (point {point}, trial {trial}, seed {seed:#018x}) failed: {source}")]
    Trial {
        point: usize,
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(
    context: &'static str,
    expected: (usize, usize),
    actual: (usize, usize),
) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", actual.0, actual.1),
        })
    }
}

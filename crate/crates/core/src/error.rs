//! Crate-wide error type and its mapping to process exit codes.

use std::path::PathBuf;
use thiserror::Error;

/// All failure modes surfaced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter values or incompatible dimensions chosen by the user.
    #[error("configuration error: {0}")]
    Config(String),

    /// Matrix or vector shapes do not line up for an operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// Every received training vector has zero energy, so trial weights are undefined.
    #[error("degenerate observations: all received training vectors have zero energy")]
    DegenerateObservations,

    /// The combiner Gram matrix W W^H is singular, so noise whitening is impossible.
    #[error("combiner rank deficiency: W W^H is not invertible")]
    CombinerRank,

    /// A numerical routine failed to produce a usable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A Monte Carlo iteration failed; carries the grid location for context.
    #[error("sweep aborted at snr {snr_db} dB, iteration {iteration}: {source}")]
    Sweep {
        snr_db: f64,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Filesystem failure, annotated with the offending path.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// CLI exit code: 1 configuration, 2 runtime/numerical, 3 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DimensionMismatch { .. } => 1,
            Error::DegenerateObservations | Error::CombinerRank | Error::Numerical(_) => 2,
            Error::Sweep { source, .. } => source.exit_code(),
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
        assert_eq!(Error::DegenerateObservations.exit_code(), 2);
        assert_eq!(Error::CombinerRank.exit_code(), 2);
        assert_eq!(
            Error::Io {
                path: "out.csv".into(),
                source: std::io::Error::other("disk"),
            }
            .exit_code(),
            3
        );
    }

    #[test]
    fn sweep_error_inherits_source_code() {
        let inner = Error::DegenerateObservations;
        let wrapped = Error::Sweep {
            snr_db: 10.0,
            iteration: 3,
            source: Box::new(inner),
        };
        assert_eq!(wrapped.exit_code(), 2);
        let text = wrapped.to_string();
        assert!(text.contains("10 dB"));
        assert!(text.contains("iteration 3"));
    }
}

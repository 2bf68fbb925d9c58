use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature vector ({0}, {1}) is outside the unit square")]
    Domain(f64, f64),

    #[error("invalid prior schedule: {0}")]
    Schedule(String),

    #[error(
        "no example with label {label} after {attempts} rejection-sampling attempts at step {step}"
    )]
    Generation {
        label: u8,
        attempts: usize,
        step: u64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run {run} of `{config}` failed: {source}")]
    Run {
        config: String,
        run: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

//! Application sources: the MMORPG generator and the bulk FTP upload.

pub mod distribution;
pub mod ftp;
pub mod wow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use distribution::{Component, DiscreteSizes, MixtureDistribution, SizeChoice};
pub use ftp::FtpSource;
pub use wow::{Apdu, LognormalSize, Side, WowGenerator, WowGeneratorConfig};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("model structure: {0}")]
    Structure(String),
    #[error("{0}: {1}")]
    Field(&'static str, Box<TrafficError>),
    #[error("traffic parameters: {0}")]
    Parse(String),
}

/// Independent generator for one consumer of randomness. Distinct `stream`
/// values give non-overlapping sequences for the same seed.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

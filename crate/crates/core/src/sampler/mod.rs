//! Markov chain samplers for random-cluster and Potts measures.

mod chain;
mod stats;
mod steps;

pub use chain::{
    run_chain, run_chain_series, series_file_name, stream_rng, write_series, Algorithm, Chain, ChainConfig,
    ChainSeries, Host, ModelParams, Observable,
};
pub use stats::{binned_stats, pairwise_sum, EstimatorResult, MIN_SERIES_LEN};
pub use steps::{cm_step, heat_bath_step, sw_step, SwSample};

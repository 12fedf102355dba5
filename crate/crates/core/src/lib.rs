//! Coded distributed computation on Markov workers under a per-round deadline.
//!
//! The master Lagrange-encodes its data over a prime field, hands every
//! worker `r` shards, and must collect `K*` results within the deadline.
//! Workers flip between a fast and a slow state following independent
//! two-state Markov chains. Each round the scheduler estimates which workers
//! are likely fast and picks loads that maximize the probability of
//! finishing on time.
//!
//! Probability code is generic over [`Probability`], implemented for `f64`,
//! `f32` and exact rationals; field arithmetic uses a runtime modulus.

pub mod allocation;
pub mod coding;
pub mod error;
pub mod field;
pub mod lea;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod success_model;
pub mod verify;
pub mod worker_net;

pub use allocation::{
    bruteforce_allocation, optimal_prefix_allocation, order_by_good_probability, AllocationVector,
    BruteForceMode, BruteForceOptimum, PrefixSolution,
};
pub use coding::{
    apply_function, decode, encode, recovery_threshold, CodingMode, CodingScheme, Dataset,
    EncodedShard, WorkFunction,
};
pub use error::{Error, Result};
pub use field::{
    fp_inv, lagrange_interpolate, poly_eval, FieldPolynomial, Fp, PrimeField, DEFAULT_MODULUS,
};
pub use lea::{infer_state, EstimatorState, TransitionCounts};
pub use scalar::Probability;
pub use sim::{
    genie_assign, run_compared, run_simulation, run_simulation_with, static_assign, throughput,
    Fidelity, RoundOutcome, RoundRecord, RunOptions, ScenarioConfig, Simulation, StrategyKind,
    SummaryReport, TrajectoryMode,
};
pub use success_model::{
    min_good_required, success_probability_bruteforce, success_probability_dp,
    success_probability_for_loads, GoodProbabilities, LoadProfile, Timing,
};
pub use worker_net::{
    completion_time, sample_initial_states, stationary_distribution, step_states, NetworkState,
    WorkerParams, WorkerState, WorkerStreams,
};

/// Exact probabilities; `i128` keeps denominators from overflowing for
/// moderate worker counts.
pub type ExactProb = num_rational::Ratio<i128>;

pub type GoodProbs = GoodProbabilities<f64>;
pub type GoodProbsExact = GoodProbabilities<ExactProb>;
pub type Estimator = EstimatorState<f64>;
pub type Solution = PrefixSolution<f64>;
pub type SolutionExact = PrefixSolution<ExactProb>;

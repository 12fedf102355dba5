//! Online estimate-and-allocate scheduling.
//!
//! The master never sees worker states directly. Because per-state speeds are
//! deterministic, each worker's completion time reveals the state it was in;
//! the estimator counts observed transitions, turns them into plug-in
//! transition probabilities, and feeds the resulting good-state probabilities
//! to the prefix allocation search.

use crate::allocation::{optimal_prefix_allocation, PrefixSolution};
use crate::error::{Error, Result};
use crate::scalar::Probability;
use crate::success_model::{GoodProbabilities, LoadProfile};
use crate::worker_net::WorkerState;

/// Default matching tolerance for observed completion times, in seconds.
pub const DEFAULT_TIME_TOLERANCE: f64 = 1e-9;

/// Initial value of every transition count.
pub const LAPLACE_PRIOR: u64 = 1;

/// Observed transition counts of one worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionCounts {
    pub gg: u64,
    pub gb: u64,
    pub bg: u64,
    pub bb: u64,
}

impl TransitionCounts {
    pub fn uniform(c: u64) -> Self {
        Self {
            gg: c,
            gb: c,
            bg: c,
            bb: c,
        }
    }

    pub fn total(&self) -> u64 {
        self.gg + self.gb + self.bg + self.bb
    }

    pub fn record(&mut self, from: WorkerState, to: WorkerState) {
        use WorkerState::*;
        match (from, to) {
            (Good, Good) => self.gg += 1,
            (Good, Bad) => self.gb += 1,
            (Bad, Good) => self.bg += 1,
            (Bad, Bad) => self.bb += 1,
        }
    }
}

/// The state a worker was in, judged by how long its load took.
pub fn infer_state(
    load: usize,
    observed_time: f64,
    mu_g: f64,
    mu_b: f64,
    tol: f64,
) -> Result<WorkerState> {
    let unclassifiable = Error::UnclassifiableObservation {
        load,
        time: observed_time,
    };
    if load == 0 || observed_time.is_nan() || observed_time <= 0.0 {
        return Err(unclassifiable);
    }
    let gap_g = (observed_time - load as f64 / mu_g).abs();
    let gap_b = (observed_time - load as f64 / mu_b).abs();
    match (gap_g <= tol, gap_b <= tol) {
        (true, true) if gap_b < gap_g => Ok(WorkerState::Bad),
        (true, _) => Ok(WorkerState::Good),
        (false, true) => Ok(WorkerState::Bad),
        (false, false) => Err(unclassifiable),
    }
}

/// Plug-in transition estimates for every worker.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState<P> {
    counts: Vec<TransitionCounts>,
    last_state: Vec<Option<WorkerState>>,
    p_hat_gg: Vec<P>,
    p_hat_bb: Vec<P>,
    p_hat_g_next: Vec<P>,
    prior: P,
}

impl<P: Probability> EstimatorState<P> {
    /// Every count starts at [`LAPLACE_PRIOR`], so all estimates start at 1/2.
    pub fn new(n: usize) -> Self {
        Self::with_initial_count(n, LAPLACE_PRIOR)
    }

    pub fn with_initial_count(n: usize, c: u64) -> Self {
        assert!(c > 0, "initial count must be positive");
        let half = P::from_ratio(1, 2);
        Self {
            counts: vec![TransitionCounts::uniform(c); n],
            last_state: vec![None; n],
            p_hat_gg: vec![half; n],
            p_hat_bb: vec![half; n],
            p_hat_g_next: vec![half; n],
            prior: half,
        }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[TransitionCounts] {
        &self.counts
    }

    pub fn last_state(&self) -> &[Option<WorkerState>] {
        &self.last_state
    }

    pub fn p_hat_gg(&self) -> &[P] {
        &self.p_hat_gg
    }

    pub fn p_hat_bb(&self) -> &[P] {
        &self.p_hat_bb
    }

    /// Records one round of observations. `None` means the worker's state
    /// could not be observed; its next transition is then not counted.
    pub fn update_estimates(&mut self, observed: &[Option<WorkerState>]) {
        assert_eq!(observed.len(), self.n(), "one observation per worker");
        for (i, &obs) in observed.iter().enumerate() {
            if let (Some(prev), Some(now)) = (self.last_state[i], obs) {
                self.counts[i].record(prev, now);
            }
            let c = self.counts[i];
            self.p_hat_gg[i] = P::from_ratio(c.gg, c.gg + c.gb);
            self.p_hat_bb[i] = P::from_ratio(c.bb, c.bg + c.bb);
            self.last_state[i] = obs;
            self.p_hat_g_next[i] = match obs {
                Some(WorkerState::Good) => self.p_hat_gg[i],
                Some(WorkerState::Bad) => P::one() - self.p_hat_bb[i],
                None => self.prior,
            };
        }
    }

    /// Estimated probability that each worker is good in the coming round.
    pub fn current_good_probabilities(&self) -> GoodProbabilities<P> {
        GoodProbabilities::new(self.p_hat_g_next.clone())
            .expect("ratios of counts are probabilities")
    }

    /// The allocation maximizing the estimated success probability.
    pub fn assign_loads(&self, profile: &LoadProfile) -> Result<PrefixSolution<P>> {
        optimal_prefix_allocation(&self.current_good_probabilities(), profile)
    }
}

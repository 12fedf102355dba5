//! Two-state Markov workers with deterministic per-state speeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkerState {
    Good,
    Bad,
}

impl WorkerState {
    pub fn is_good(self) -> bool {
        self == WorkerState::Good
    }
}

/// Transition probabilities and speeds (evaluations per second) of one worker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerParams {
    pub p_gg: f64,
    pub p_bb: f64,
    pub mu_g: f64,
    pub mu_b: f64,
}

impl WorkerParams {
    /// Accepts closed-interval probabilities so absorbing chains can be
    /// simulated; scenarios additionally require [`Self::is_irreducible`].
    pub fn new(p_gg: f64, p_bb: f64, mu_g: f64, mu_b: f64) -> Result<Self> {
        for (name, p) in [("p_gg", p_gg), ("p_bb", p_bb)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidWorker(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        if p_gg == 1.0 && p_bb == 1.0 {
            return Err(Error::InvalidWorker(
                "p_gg = p_bb = 1 has no unique stationary distribution".into(),
            ));
        }
        if !(mu_b > 0.0 && mu_g > mu_b && mu_g.is_finite()) {
            return Err(Error::InvalidWorker(format!(
                "speeds must satisfy mu_g > mu_b > 0 (got mu_g = {mu_g}, mu_b = {mu_b})"
            )));
        }
        Ok(Self {
            p_gg,
            p_bb,
            mu_g,
            mu_b,
        })
    }

    pub fn is_irreducible(&self) -> bool {
        0.0 < self.p_gg && self.p_gg < 1.0 && 0.0 < self.p_bb && self.p_bb < 1.0
    }

    pub fn speed(&self, state: WorkerState) -> f64 {
        match state {
            WorkerState::Good => self.mu_g,
            WorkerState::Bad => self.mu_b,
        }
    }

    /// Probability of being good next round given the current state.
    pub fn good_next(&self, state: WorkerState) -> f64 {
        match state {
            WorkerState::Good => self.p_gg,
            WorkerState::Bad => 1.0 - self.p_bb,
        }
    }
}

/// `(pi_g, pi_b)` of the two-state chain.
pub fn stationary_distribution(params: &WorkerParams) -> (f64, f64) {
    let leave_g = 1.0 - params.p_gg;
    let leave_b = 1.0 - params.p_bb;
    let pi_g = leave_b / (leave_g + leave_b);
    (pi_g, 1.0 - pi_g)
}

/// Worker states in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    pub states: Vec<WorkerState>,
    /// 1-based round number.
    pub round: u64,
}

impl NetworkState {
    pub fn n_good(&self) -> usize {
        self.states.iter().filter(|s| s.is_good()).count()
    }
}

/// One independent random stream per worker, all derived from a single seed.
#[derive(Debug, Clone)]
pub struct WorkerStreams {
    rngs: Vec<ChaCha8Rng>,
}

impl WorkerStreams {
    pub fn new(seed: u64, n: usize) -> Self {
        let rngs = (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                rng
            })
            .collect();
        Self { rngs }
    }

    pub fn len(&self) -> usize {
        self.rngs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rngs.is_empty()
    }
}

fn draw(rng: &mut ChaCha8Rng, p_good: f64) -> WorkerState {
    if rng.gen::<f64>() < p_good {
        WorkerState::Good
    } else {
        WorkerState::Bad
    }
}

/// Round-1 states, each drawn from its worker's stationary distribution.
pub fn sample_initial_states(params: &[WorkerParams], streams: &mut WorkerStreams) -> NetworkState {
    assert_eq!(params.len(), streams.len());
    let states = params
        .iter()
        .zip(streams.rngs.iter_mut())
        .map(|(p, rng)| draw(rng, stationary_distribution(p).0))
        .collect();
    NetworkState { states, round: 1 }
}

/// Advances every worker one step along its own chain.
pub fn step_states(
    state: &NetworkState,
    params: &[WorkerParams],
    streams: &mut WorkerStreams,
) -> NetworkState {
    assert_eq!(params.len(), state.states.len());
    assert_eq!(params.len(), streams.len());
    let states = state
        .states
        .iter()
        .zip(params)
        .zip(streams.rngs.iter_mut())
        .map(|((&s, p), rng)| draw(rng, p.good_next(s)))
        .collect();
    NetworkState {
        states,
        round: state.round + 1,
    }
}

/// Seconds to finish `load` evaluations in `state`.
pub fn completion_time(load: usize, state: WorkerState, params: &WorkerParams) -> f64 {
    if load == 0 {
        return 0.0;
    }
    load as f64 / params.speed(state)
}

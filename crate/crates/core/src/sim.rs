//! Multi-round simulation of a master and its Markov workers.
//!
//! Each round a strategy picks an allocation, every worker finishes its load
//! at the speed of its true state, and the round succeeds when the on-time
//! evaluations reach `K*`. Worker states are driven by per-worker streams that
//! no strategy touches, so runs with the same seed see the same trajectory
//! regardless of strategy.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{optimal_prefix_allocation, AllocationVector, PrefixSolution};
use crate::coding::{
    apply_function, decode, encode, CodingScheme, Dataset, EncodedShard, WorkFunction,
};
use crate::error::{Error, Result};
use crate::field::{PrimeField, DEFAULT_MODULUS};
use crate::lea::{infer_state, EstimatorState, DEFAULT_TIME_TOLERANCE};
use crate::success_model::{GoodProbabilities, LoadProfile, Timing};
use crate::worker_net::{
    completion_time, sample_initial_states, stationary_distribution, step_states, NetworkState,
    WorkerParams, WorkerState, WorkerStreams,
};

/// Payload length of the random dataset used in full-fidelity runs.
pub const DEFAULT_CHUNK_LEN: usize = 2;

// Stream ids outside the per-worker range `1..=n`.
const STATIC_STREAM: u64 = 0;
const CODING_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Lea,
    Static,
    Genie,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] =
        [StrategyKind::Lea, StrategyKind::Static, StrategyKind::Genie];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lea => "lea",
            Self::Static => "static",
            Self::Genie => "genie",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lea" => Ok(Self::Lea),
            "static" => Ok(Self::Static),
            "genie" => Ok(Self::Genie),
            _ => Err(Error::InvalidScenario(format!(
                "unknown strategy {s:?} (expected lea, static or genie)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    /// Success decided from load counts alone.
    Analytic,
    /// Additionally encodes, computes and decodes real data every round.
    Full,
}

impl Fidelity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Full => "full",
        }
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "full" => Ok(Self::Full),
            _ => Err(Error::InvalidScenario(format!(
                "unknown fidelity {s:?} (expected analytic or full)"
            ))),
        }
    }
}

/// Whether different strategies with the same seed share worker trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMode {
    Paired,
    Independent,
}

impl TrajectoryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Paired => "paired",
            Self::Independent => "independent",
        }
    }
}

impl fmt::Display for TrajectoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrajectoryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paired" => Ok(Self::Paired),
            "independent" => Ok(Self::Independent),
            _ => Err(Error::InvalidScenario(format!(
                "unknown trajectory mode {s:?} (expected paired or independent)"
            ))),
        }
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub deg_f: usize,
    /// Seconds.
    pub deadline: f64,
    pub mu_g: f64,
    pub mu_b: f64,
    /// One entry per worker.
    pub workers: Vec<WorkerParams>,
    pub strategy: StrategyKind,
    /// Overrides the stationary good probability of the static strategy.
    pub static_good_prob: Option<f64>,
    pub rounds: u64,
    pub seed: u64,
    pub fidelity: Fidelity,
    pub trajectory: TrajectoryMode,
    pub modulus: u64,
    pub chunk_len: usize,
}

impl ScenarioConfig {
    /// All workers share `(p_gg, p_bb)`. Defaults: LEA, seed 0, 10^5 rounds,
    /// analytic fidelity, paired trajectories.
    #[allow(clippy::too_many_arguments)]
    pub fn homogeneous(
        n: usize,
        r: usize,
        k: usize,
        deg_f: usize,
        deadline: f64,
        mu_g: f64,
        mu_b: f64,
        p_gg: f64,
        p_bb: f64,
    ) -> Result<Self> {
        let worker = WorkerParams::new(p_gg, p_bb, mu_g, mu_b)?;
        Ok(Self {
            n,
            r,
            k,
            deg_f,
            deadline,
            mu_g,
            mu_b,
            workers: vec![worker; n],
            strategy: StrategyKind::Lea,
            static_good_prob: None,
            rounds: 100_000,
            seed: 0,
            fidelity: Fidelity::Analytic,
            trajectory: TrajectoryMode::Paired,
            modulus: DEFAULT_MODULUS,
            chunk_len: DEFAULT_CHUNK_LEN,
        })
    }

    /// The four reference scenarios (`1..=4`): 15 workers, 10 shards each,
    /// 50 chunks, quadratic work, one-second deadline, speeds (10, 3), with
    /// good-state probabilities 0.5, 0.6, 0.7 and 0.8.
    pub fn reference_scenario(index: usize) -> Result<Self> {
        let (p_gg, p_bb) = match index {
            1 => (0.8, 0.8),
            2 => (0.8, 0.7),
            3 => (0.8, 0.533),
            4 => (0.9, 0.6),
            _ => {
                return Err(Error::InvalidScenario(format!(
                    "reference scenarios are numbered 1 to 4, got {index}"
                )))
            }
        };
        Self::homogeneous(15, 10, 50, 2, 1.0, 10.0, 3.0, p_gg, p_bb)
    }

    pub fn with_strategy(mut self, strategy: StrategyKind) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_fidelity(mut self, fidelity: Fidelity) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn timing(&self) -> Timing {
        Timing {
            mu_g: self.mu_g,
            mu_b: self.mu_b,
            deadline: self.deadline,
        }
    }

    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.modulus)
    }

    /// Validates the scenario and builds its coding scheme.
    pub fn scheme(&self) -> Result<CodingScheme> {
        self.validate()?;
        self.scheme_unchecked()
    }

    fn scheme_unchecked(&self) -> Result<CodingScheme> {
        CodingScheme::new(self.field()?, self.n, self.r, self.k, self.deg_f)
    }

    /// Validates the scenario and returns its load profile.
    pub fn profile(&self) -> Result<LoadProfile> {
        let scheme = self.scheme()?;
        LoadProfile::from_timing(&self.timing(), self.r, scheme.recovery_threshold(), self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.workers.len() != self.n {
            return bad(format!(
                "{} worker entries for n = {}",
                self.workers.len(),
                self.n
            ));
        }
        if !(self.deadline > 0.0 && self.deadline.is_finite()) {
            return bad(format!("deadline must be positive, got {}", self.deadline));
        }
        // Checks the speeds once more for configs built field by field.
        WorkerParams::new(0.5, 0.5, self.mu_g, self.mu_b)?;
        for (i, w) in self.workers.iter().enumerate() {
            if w.mu_g != self.mu_g || w.mu_b != self.mu_b {
                return bad(format!(
                    "worker {} has speeds different from the scenario",
                    i + 1
                ));
            }
            if !w.is_irreducible() {
                return bad(format!(
                    "worker {} needs 0 < p_gg, p_bb < 1 (got {}, {})",
                    i + 1,
                    w.p_gg,
                    w.p_bb
                ));
            }
        }
        if let Some(p) = self.static_good_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("static_good_prob = {p} is not a probability"));
            }
        }
        if self.rounds == 0 {
            return bad("rounds must be >= 1".into());
        }
        if self.chunk_len == 0 {
            return bad("chunk_len must be >= 1".into());
        }
        let scheme = self.scheme_unchecked()?;
        let profile =
            LoadProfile::from_timing(&self.timing(), self.r, scheme.recovery_threshold(), self.n)?;
        if profile.l_g == 0 {
            return bad(format!(
                "a good worker finishes no evaluation within the deadline (mu_g * d = {})",
                self.mu_g * self.deadline
            ));
        }
        if !profile.is_feasible() {
            return Err(Error::DeadlineInfeasible {
                capacity: profile.capacity(self.n),
                k_star: profile.k_star,
            });
        }
        Ok(())
    }

    /// Non-fatal remarks about a valid scenario.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(profile) = self.profile() {
            if profile.always_succeeds() {
                out.push(format!(
                    "K* = {} does not exceed n * l_b = {}: every round succeeds",
                    profile.k_star,
                    self.n * profile.l_b
                ));
            }
        }
        out
    }

    /// Seed of the worker trajectory.
    pub fn trajectory_seed(&self) -> u64 {
        match self.trajectory {
            TrajectoryMode::Paired => self.seed,
            TrajectoryMode::Independent => {
                let salt = match self.strategy {
                    StrategyKind::Lea => 1u64,
                    StrategyKind::Static => 2,
                    StrategyKind::Genie => 3,
                };
                self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            }
        }
    }

    /// Stationary good probability of every worker.
    pub fn stationary_good(&self) -> Vec<f64> {
        self.workers
            .iter()
            .map(|w| stationary_distribution(w).0)
            .collect()
    }
}

/// Everything observed in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub round: u64,
    pub allocation: AllocationVector,
    pub true_states: Vec<WorkerState>,
    pub completion_times: Vec<f64>,
    pub on_time_evaluations: usize,
    pub success: bool,
    /// Success probability the strategy predicted (LEA and genie).
    pub estimated_success_prob: Option<f64>,
    /// Whether decoding the on-time results reproduced the direct
    /// evaluations (full fidelity only).
    pub decoded: Option<bool>,
}

impl RoundOutcome {
    pub fn record(&self, strategy: StrategyKind) -> RoundRecord {
        RoundRecord {
            round: self.round,
            strategy,
            i_star: self.allocation.prefix_size,
            est_success_prob: self.estimated_success_prob,
            n_good_true: self.true_states.iter().filter(|s| s.is_good()).count(),
            on_time_evals: self.on_time_evaluations,
            success: self.success,
        }
    }
}

/// One row of the per-round log.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub strategy: StrategyKind,
    pub i_star: usize,
    pub est_success_prob: Option<f64>,
    pub n_good_true: usize,
    pub on_time_evals: usize,
    pub success: bool,
}

/// Estimator state of one worker after some round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSnapshot {
    pub round: u64,
    /// 1-based.
    pub worker: usize,
    pub p_hat_gg: f64,
    pub p_hat_bb: f64,
}

/// Result of a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub strategy: StrategyKind,
    pub rounds: u64,
    pub seed: u64,
    pub k_star: usize,
    pub l_g: usize,
    pub l_b: usize,
    pub successes: u64,
    pub throughput: f64,
    /// Empty unless requested in [`RunOptions`].
    pub records: Vec<RoundRecord>,
    /// Final `(p_hat_gg, p_hat_bb)` per worker (LEA only).
    pub final_estimates: Option<Vec<(f64, f64)>>,
    pub snapshots: Vec<EstimateSnapshot>,
    /// Rounds whose decode was checked (full fidelity only).
    pub decode_checks: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub keep_records: bool,
    /// Snapshot the estimator every this many rounds (LEA only).
    pub estimate_every: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            keep_records: true,
            estimate_every: None,
        }
    }
}

/// Fraction of successful rounds.
pub fn throughput(successes: impl IntoIterator<Item = bool>) -> Result<f64> {
    let (mut hits, mut total) = (0u64, 0u64);
    for s in successes {
        hits += s as u64;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyRun);
    }
    Ok(hits as f64 / total as f64)
}

/// Each worker independently takes the high tier with its probability in
/// `good_probs`; the draw is repeated until the total load reaches `K*`.
pub fn static_assign<R: Rng + ?Sized>(
    profile: &LoadProfile,
    good_probs: &[f64],
    rng: &mut R,
) -> Result<AllocationVector> {
    if good_probs.len() != profile.n {
        return Err(Error::DimensionMismatch {
            expected: profile.n,
            got: good_probs.len(),
        });
    }
    let reachable = good_probs.iter().filter(|&&p| p > 0.0).count();
    if profile.capacity(reachable) < profile.k_star {
        return Err(Error::DeadlineInfeasible {
            capacity: profile.capacity(reachable),
            k_star: profile.k_star,
        });
    }
    let mut high = vec![false; profile.n];
    loop {
        for (h, &p) in high.iter_mut().zip(good_probs) {
            *h = rng.gen::<f64>() < p;
        }
        let g = high.iter().filter(|&&h| h).count();
        if profile.capacity(g) >= profile.k_star {
            return Ok(AllocationVector::from_membership(&high, profile));
        }
    }
}

/// Optimal allocation under the true transition probabilities and the true
/// previous states; stationary probabilities before any state is known.
pub fn genie_assign(
    previous: Option<&[WorkerState]>,
    params: &[WorkerParams],
    profile: &LoadProfile,
) -> Result<PrefixSolution<f64>> {
    let probs: Vec<f64> = match previous {
        Some(states) => {
            if states.len() != params.len() {
                return Err(Error::DimensionMismatch {
                    expected: params.len(),
                    got: states.len(),
                });
            }
            states
                .iter()
                .zip(params)
                .map(|(&s, p)| p.good_next(s))
                .collect()
        }
        None => params
            .iter()
            .map(|p| stationary_distribution(p).0)
            .collect(),
    };
    optimal_prefix_allocation(&GoodProbabilities::new(probs)?, profile)
}

struct CodedSetup {
    scheme: CodingScheme,
    data: Dataset,
    shards: Vec<EncodedShard>,
    rng: ChaCha8Rng,
}

/// A simulation in progress.
pub struct Simulation {
    config: ScenarioConfig,
    profile: LoadProfile,
    timing: Timing,
    streams: WorkerStreams,
    state: NetworkState,
    previous: Option<Vec<WorkerState>>,
    estimator: EstimatorState<f64>,
    static_probs: Vec<f64>,
    static_rng: ChaCha8Rng,
    coded: Option<CodedSetup>,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let scheme = config.scheme()?;
        let timing = config.timing();
        let profile =
            LoadProfile::from_timing(&timing, config.r, scheme.recovery_threshold(), config.n)?;
        let seed = config.trajectory_seed();
        let mut streams = WorkerStreams::new(seed, config.n);
        let state = sample_initial_states(&config.workers, &mut streams);
        let mut static_rng = ChaCha8Rng::seed_from_u64(seed);
        static_rng.set_stream(STATIC_STREAM);
        let static_probs = match config.static_good_prob {
            Some(p) => vec![p; config.n],
            None => config.stationary_good(),
        };
        let coded = match config.fidelity {
            Fidelity::Analytic => None,
            Fidelity::Full => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(CODING_STREAM);
                let data = Dataset::random(scheme.field(), config.k, config.chunk_len, &mut rng)?;
                let shards = encode(&data, &scheme)?;
                Some(CodedSetup {
                    scheme,
                    data,
                    shards,
                    rng,
                })
            }
        };
        Ok(Self {
            estimator: EstimatorState::new(config.n),
            config,
            profile,
            timing,
            streams,
            state,
            previous: None,
            static_probs,
            static_rng,
            coded,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn profile(&self) -> &LoadProfile {
        &self.profile
    }

    pub fn estimator(&self) -> &EstimatorState<f64> {
        &self.estimator
    }

    /// Number of the next round to run (1-based).
    pub fn next_round(&self) -> u64 {
        self.state.round
    }

    pub fn run_round(&mut self) -> Result<RoundOutcome> {
        let (allocation, estimated_success_prob) = match self.config.strategy {
            StrategyKind::Lea => {
                let sol = self.estimator.assign_loads(&self.profile)?;
                (sol.allocation, Some(sol.success_prob))
            }
            StrategyKind::Genie => {
                let sol = genie_assign(
                    self.previous.as_deref(),
                    &self.config.workers,
                    &self.profile,
                )?;
                (sol.allocation, Some(sol.success_prob))
            }
            StrategyKind::Static => (
                static_assign(&self.profile, &self.static_probs, &mut self.static_rng)?,
                None,
            ),
        };

        let states = &self.state.states;
        let completion_times: Vec<f64> = allocation
            .loads
            .iter()
            .zip(states)
            .zip(&self.config.workers)
            .map(|((&l, &s), p)| completion_time(l, s, p))
            .collect();
        // For integer loads, finishing by the deadline is the same as
        // fitting within the state's capacity; comparing integers avoids
        // rounding at the boundary.
        let on_time: Vec<bool> = allocation
            .loads
            .iter()
            .zip(states)
            .map(|(&l, s)| l <= self.capacity(*s))
            .collect();
        let on_time_evaluations: usize = allocation
            .loads
            .iter()
            .zip(&on_time)
            .filter(|(_, &ok)| ok)
            .map(|(&l, _)| l)
            .sum();
        let success = on_time_evaluations >= self.profile.k_star;

        let decoded = match &mut self.coded {
            Some(setup) => {
                let ok = decode_round(setup, &allocation.loads, &on_time)?;
                if ok != success {
                    return Err(Error::DecodeMismatch {
                        round: self.state.round,
                        success,
                    });
                }
                Some(ok)
            }
            None => None,
        };

        if self.config.strategy == StrategyKind::Lea {
            let observed: Vec<Option<WorkerState>> = allocation
                .loads
                .iter()
                .zip(&completion_times)
                .map(|(&l, &t)| {
                    infer_state(
                        l,
                        t,
                        self.timing.mu_g,
                        self.timing.mu_b,
                        DEFAULT_TIME_TOLERANCE,
                    )
                    .ok()
                })
                .collect();
            self.estimator.update_estimates(&observed);
        }

        let outcome = RoundOutcome {
            round: self.state.round,
            allocation,
            true_states: self.state.states.clone(),
            completion_times,
            on_time_evaluations,
            success,
            estimated_success_prob,
            decoded,
        };
        let next = step_states(&self.state, &self.config.workers, &mut self.streams);
        self.previous = Some(std::mem::replace(&mut self.state, next).states);
        Ok(outcome)
    }

    fn capacity(&self, state: WorkerState) -> usize {
        match state {
            WorkerState::Good => self.timing.good_capacity(),
            WorkerState::Bad => self.timing.bad_capacity(),
        }
    }
}

/// Runs the round's computation on real shards and reports whether the
/// on-time results decode to the direct evaluations.
fn decode_round(setup: &mut CodedSetup, loads: &[usize], on_time: &[bool]) -> Result<bool> {
    let scheme = &setup.scheme;
    let f = WorkFunction::random(
        scheme.field(),
        scheme.deg_f(),
        setup.data.chunk_len(),
        &mut setup.rng,
    )?;
    let mut results = Vec::new();
    for (i, (&load, &ok)) in loads.iter().zip(on_time).enumerate() {
        if !ok {
            continue;
        }
        for v in scheme.shards_for(i + 1, load) {
            results.push((v, apply_function(&f, &setup.shards[v - 1])?));
        }
    }
    let expected = setup
        .data
        .chunks()
        .iter()
        .map(|x| f.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    match decode(&results, scheme, &f) {
        Ok(got) => Ok(got == expected),
        Err(Error::NotDecodable { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Runs every round of `config` and keeps the per-round log.
pub fn run_simulation(config: ScenarioConfig) -> Result<SummaryReport> {
    run_simulation_with(config, &RunOptions::default())
}

pub fn run_simulation_with(config: ScenarioConfig, options: &RunOptions) -> Result<SummaryReport> {
    let warnings = config.warnings();
    let rounds = config.rounds;
    let strategy = config.strategy;
    let seed = config.seed;
    let mut sim = Simulation::new(config)?;
    let mut successes = 0u64;
    let mut decode_checks = 0u64;
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    for _ in 0..rounds {
        let outcome = sim.run_round()?;
        successes += outcome.success as u64;
        decode_checks += outcome.decoded.is_some() as u64;
        if options.keep_records {
            records.push(outcome.record(strategy));
        }
        if strategy == StrategyKind::Lea {
            if let Some(every) = options.estimate_every.filter(|&e| e > 0) {
                if outcome.round % every == 0 {
                    snapshots.extend(estimate_rows(outcome.round, sim.estimator()));
                }
            }
        }
    }
    let final_estimates = (strategy == StrategyKind::Lea).then(|| {
        let est = sim.estimator();
        est.p_hat_gg()
            .iter()
            .copied()
            .zip(est.p_hat_bb().iter().copied())
            .collect()
    });
    let profile = *sim.profile();
    Ok(SummaryReport {
        strategy,
        rounds,
        seed,
        k_star: profile.k_star,
        l_g: profile.l_g,
        l_b: profile.l_b,
        successes,
        throughput: successes as f64 / rounds as f64,
        records,
        final_estimates,
        snapshots,
        decode_checks,
        warnings,
    })
}

fn estimate_rows(
    round: u64,
    est: &EstimatorState<f64>,
) -> impl Iterator<Item = EstimateSnapshot> + '_ {
    est.p_hat_gg()
        .iter()
        .zip(est.p_hat_bb())
        .enumerate()
        .map(move |(i, (&gg, &bb))| EstimateSnapshot {
            round,
            worker: i + 1,
            p_hat_gg: gg,
            p_hat_bb: bb,
        })
}

/// Runs the same scenario under each strategy. In paired mode every run sees
/// the same worker trajectory.
pub fn run_compared(
    config: &ScenarioConfig,
    strategies: &[StrategyKind],
    options: &RunOptions,
) -> Result<Vec<SummaryReport>> {
    strategies
        .iter()
        .map(|&s| run_simulation_with(config.clone().with_strategy(s), options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario1() -> ScenarioConfig {
        ScenarioConfig::reference_scenario(1).unwrap()
    }

    #[test]
    fn reference_scenarios_validate() {
        for i in 1..=4 {
            let cfg = ScenarioConfig::reference_scenario(i).unwrap();
            let p = cfg.profile().unwrap();
            assert_eq!((p.l_g, p.l_b, p.k_star, p.n), (10, 3, 99, 15));
            assert!(cfg.warnings().is_empty());
        }
        assert!(ScenarioConfig::reference_scenario(5).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = scenario1();
        cfg.deadline = 0.5; // l_g = 5, 75 < 99
        assert!(matches!(
            cfg.validate(),
            Err(Error::DeadlineInfeasible { .. })
        ));

        let mut cfg = scenario1();
        cfg.deadline = 0.05;
        assert!(matches!(cfg.validate(), Err(Error::InvalidScenario(_))));

        let mut cfg = scenario1();
        cfg.workers[3] = WorkerParams::new(1.0, 0.5, 10.0, 3.0).unwrap();
        assert!(cfg.validate().is_err());

        let mut cfg = scenario1();
        cfg.workers.pop();
        assert!(cfg.validate().is_err());

        let mut cfg = scenario1();
        cfg.rounds = 0;
        assert!(cfg.validate().is_err());

        assert!(ScenarioConfig::homogeneous(15, 10, 50, 2, 1.0, 3.0, 3.0, 0.8, 0.8).is_err());
    }

    #[test]
    fn warns_when_bad_tier_suffices() {
        let cfg = ScenarioConfig::homogeneous(15, 10, 10, 1, 1.0, 10.0, 3.0, 0.8, 0.8).unwrap();
        assert_eq!(cfg.profile().unwrap().k_star, 10);
        assert_eq!(cfg.warnings().len(), 1);
        let report = run_simulation(cfg.with_rounds(200)).unwrap();
        assert_eq!(report.throughput, 1.0);
    }

    #[test]
    fn throughput_examples() {
        assert_eq!(throughput([true; 7]).unwrap(), 1.0);
        assert_eq!(throughput([true, false, true, false]).unwrap(), 0.5);
        let mixed = (0..200).map(|i| i < 120);
        assert_eq!(throughput(mixed).unwrap(), 0.6);
        assert_eq!(throughput(std::iter::empty()), Err(Error::EmptyRun));
    }

    #[test]
    fn success_threshold_examples() {
        let profile = scenario1().profile().unwrap();
        let all_high = AllocationVector::from_prefix((0..15).collect(), 15, &profile);
        // 9 good workers on the high tier: 90 on time.
        let on_time = |n_good: usize| all_high.loads[..n_good].iter().sum::<usize>();
        assert_eq!(on_time(9), 90);
        assert!(on_time(9) < profile.k_star);
        assert_eq!(on_time(10), 100);
        assert!(on_time(10) >= profile.k_star);
    }

    #[test]
    fn outcome_matches_threshold() {
        let mut sim = Simulation::new(scenario1().with_strategy(StrategyKind::Genie)).unwrap();
        for _ in 0..2000 {
            let out = sim.run_round().unwrap();
            let expected: usize = out
                .allocation
                .loads
                .iter()
                .zip(&out.true_states)
                .zip(&out.completion_times)
                .filter(|((_, _), &t)| t <= 1.0 + 1e-12)
                .map(|((&l, _), _)| l)
                .sum();
            assert_eq!(out.on_time_evaluations, expected);
            assert_eq!(out.success, expected >= 99);
            for ((&l, s), &t) in out
                .allocation
                .loads
                .iter()
                .zip(&out.true_states)
                .zip(&out.completion_times)
            {
                let speed = if s.is_good() { 10.0 } else { 3.0 };
                assert_eq!(t, l as f64 / speed);
            }
        }
    }

    #[test]
    fn permanently_good_workers_always_succeed() {
        let mut cfg = scenario1();
        cfg.workers = vec![WorkerParams::new(0.999_999_999, 1e-9, 10.0, 3.0).unwrap(); 15];
        for strategy in StrategyKind::ALL {
            let report =
                run_simulation(cfg.clone().with_strategy(strategy).with_rounds(500)).unwrap();
            assert_eq!(report.throughput, 1.0, "{strategy}");
        }
    }

    #[test]
    fn static_assign_examples() {
        let profile = scenario1().profile().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let all = static_assign(&profile, &[1.0; 15], &mut rng).unwrap();
        assert_eq!(all.loads, vec![10; 15]);

        let easy = LoadProfile::new(10, 3, 40, 15).unwrap();
        let none = static_assign(&easy, &[0.0; 15], &mut rng).unwrap();
        assert_eq!(none.loads, vec![3; 15]);

        assert!(static_assign(&profile, &[0.0; 15], &mut rng).is_err());
        let mut probs = vec![0.0; 15];
        // 7 high-tier workers give 7 * 10 + 8 * 3 = 94 < 99.
        probs[..7].iter_mut().for_each(|p| *p = 1.0);
        assert!(static_assign(&profile, &probs, &mut rng).is_err());
        probs[7] = 1e-3;
        assert!(static_assign(&profile, &probs, &mut rng).is_ok());
    }

    #[test]
    fn static_acceptance_probability() {
        // One draw is accepted iff at least 8 of 15 fair coins come up good.
        let profile = scenario1().profile().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 100_000;
        let accepted = (0..trials)
            .filter(|_| {
                let g = (0..15).filter(|_| rng.gen::<f64>() < 0.5).count();
                profile.capacity(g) >= 99
            })
            .count();
        let frac = accepted as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
        // And every accepted vector clears K*.
        for _ in 0..1000 {
            let a = static_assign(&profile, &[0.5; 15], &mut rng).unwrap();
            assert!(a.total_load() >= 99);
            assert!(a.loads.iter().all(|&l| l == 3 || l == 10));
        }
    }

    #[test]
    fn genie_examples() {
        let profile = scenario1().profile().unwrap();
        let params = vec![WorkerParams::new(0.9, 0.6, 10.0, 3.0).unwrap(); 15];
        let good = vec![WorkerState::Good; 15];
        let a = genie_assign(Some(&good), &params, &profile).unwrap();
        let expected =
            optimal_prefix_allocation(&GoodProbabilities::uniform(15, 0.9).unwrap(), &profile)
                .unwrap();
        assert_eq!(a, expected);

        // p_gg = 1 - p_bb: rows coincide with the stationary distribution.
        let iid = vec![WorkerParams::new(0.7, 0.3, 10.0, 3.0).unwrap(); 15];
        let bad = vec![WorkerState::Bad; 15];
        let from_bad = genie_assign(Some(&bad), &iid, &profile).unwrap();
        let first = genie_assign(None, &iid, &profile).unwrap();
        assert_eq!(from_bad.i_star(), first.i_star());
        assert!((from_bad.success_prob - first.success_prob).abs() < 1e-12);
    }

    #[test]
    fn runs_are_deterministic() {
        for strategy in StrategyKind::ALL {
            let cfg = scenario1()
                .with_strategy(strategy)
                .with_rounds(3000)
                .with_seed(11);
            assert_eq!(
                run_simulation(cfg.clone()).unwrap(),
                run_simulation(cfg).unwrap()
            );
        }
    }

    #[test]
    fn paired_runs_share_trajectories() {
        let cfg = scenario1().with_rounds(500).with_seed(3);
        let reports = run_compared(&cfg, &StrategyKind::ALL, &RunOptions::default()).unwrap();
        let goods = |r: &SummaryReport| r.records.iter().map(|x| x.n_good_true).collect::<Vec<_>>();
        assert_eq!(goods(&reports[0]), goods(&reports[1]));
        assert_eq!(goods(&reports[0]), goods(&reports[2]));

        let mut independent = cfg.clone();
        independent.trajectory = TrajectoryMode::Independent;
        let reports =
            run_compared(&independent, &StrategyKind::ALL, &RunOptions::default()).unwrap();
        assert_ne!(goods(&reports[0]), goods(&reports[2]));
    }

    #[test]
    fn genie_dominates_on_shared_trajectory() {
        let cfg = scenario1().with_rounds(20_000).with_seed(21);
        let opts = RunOptions {
            keep_records: false,
            estimate_every: None,
        };
        let r = run_compared(&cfg, &StrategyKind::ALL, &opts).unwrap();
        let (lea, stat, genie) = (r[0].throughput, r[1].throughput, r[2].throughput);
        assert!(genie + 0.01 >= lea, "{genie} {lea}");
        assert!(genie >= stat, "{genie} {stat}");
    }

    #[test]
    fn snapshots_and_estimates() {
        let cfg = scenario1().with_rounds(100);
        let opts = RunOptions {
            keep_records: false,
            estimate_every: Some(25),
        };
        let report = run_simulation_with(cfg, &opts).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.snapshots.len(), 4 * 15);
        assert_eq!(report.final_estimates.as_ref().unwrap().len(), 15);
        let last = &report.snapshots[report.snapshots.len() - 15..];
        for (s, &(gg, bb)) in last.iter().zip(report.final_estimates.as_ref().unwrap()) {
            assert_eq!(s.round, 100);
            assert_eq!((s.p_hat_gg, s.p_hat_bb), (gg, bb));
        }
    }

    #[test]
    fn full_fidelity_agrees_with_threshold() {
        for strategy in StrategyKind::ALL {
            let cfg = scenario1()
                .with_strategy(strategy)
                .with_rounds(60)
                .with_fidelity(Fidelity::Full);
            let report = run_simulation(cfg).unwrap();
            assert_eq!(report.decode_checks, 60);
        }
    }

    #[test]
    fn full_fidelity_repetition_mode() {
        // n r = 8 < k deg_f - 1 = 9: repetition coding, K* = 8 - 1 + 1 = 8.
        let mut cfg = ScenarioConfig::homogeneous(4, 2, 5, 2, 1.0, 2.0, 1.0, 0.7, 0.6).unwrap();
        cfg.rounds = 300;
        cfg.fidelity = Fidelity::Full;
        let profile = cfg.profile().unwrap();
        assert_eq!((profile.l_g, profile.l_b, profile.k_star), (2, 1, 8));
        let report = run_simulation(cfg).unwrap();
        assert_eq!(report.decode_checks, 300);
    }

    #[test]
    fn parses_enums() {
        for s in StrategyKind::ALL {
            assert_eq!(s.as_str().parse::<StrategyKind>().unwrap(), s);
        }
        assert!("oracle".parse::<StrategyKind>().is_err());
        assert_eq!("full".parse::<Fidelity>().unwrap(), Fidelity::Full);
        assert_eq!(
            "paired".parse::<TrajectoryMode>().unwrap(),
            TrajectoryMode::Paired
        );
    }
}

//! Randomized cross-checks of the fast solvers against exhaustive oracles.
//!
//! Used by the `verify` command; each check reports the worst discrepancy it
//! saw rather than stopping at the first one.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{bruteforce_allocation, optimal_prefix_allocation, BruteForceMode};
use crate::coding::{
    apply_function, decode, encode, recovery_threshold, CodingScheme, Dataset, WorkFunction,
};
use crate::error::Result;
use crate::field::PrimeField;
use crate::success_model::{
    success_probability_bruteforce, success_probability_dp, GoodProbabilities, LoadProfile, Timing,
};

/// Agreement tolerance between a solver and its oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Number of random instances per check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSize {
    pub success_model: usize,
    pub prefix: usize,
    pub general_loads: usize,
    pub coding: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        Self {
            success_model: 1000,
            prefix: 500,
            general_loads: 200,
            coding: 20,
        }
    }
}

/// Random probabilities, mixing in exact 0, 1 and repeated values so ties and
/// degenerate workers are exercised.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GoodProbabilities<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => rng.gen(),
        })
        .collect();
    if n > 1 && rng.gen_bool(0.3) {
        p[1] = p[0];
    }
    GoodProbabilities::new(p).expect("values in [0, 1]")
}

/// A random profile with `1 <= l_b < l_g` and `K* <= n l_g`.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LoadProfile {
    let l_g = rng.gen_range(2..=10);
    let l_b = rng.gen_range(0..l_g);
    let k_star = rng.gen_range(1..=n * l_g);
    LoadProfile::new(l_g, l_b, k_star, n).expect("valid by construction")
}

pub fn check_success_model(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(1..=12);
        let probs = random_probabilities(&mut rng, n);
        let profile = random_profile(&mut rng, n);
        let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let dp = success_probability_dp(&set, &probs, &profile);
        let bf = success_probability_bruteforce(&set, &probs, &profile).expect("n <= 12");
        worst = worst.max((dp - bf).abs());
    }
    CheckResult {
        name: "success_model",
        passed: worst <= ORACLE_TOLERANCE,
        detail: format!("{trials} instances, max |dp - brute force| = {worst:e}"),
    }
}

pub fn check_prefix_optimality(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let timing = Timing {
        mu_g: 1.0,
        mu_b: 0.5,
        deadline: 1.0,
    };
    for _ in 0..trials {
        let n = rng.gen_range(1..=10);
        let probs = random_probabilities(&mut rng, n);
        let profile = random_profile(&mut rng, n);
        let fast = optimal_prefix_allocation(&probs, &profile).expect("feasible by construction");
        let slow = bruteforce_allocation(&probs, &profile, 0, &timing, BruteForceMode::Subsets)
            .expect("n <= 10");
        worst = worst.max((fast.success_prob - slow.success_prob).abs());
    }
    CheckResult {
        name: "allocation.prefix",
        passed: worst <= ORACLE_TOLERANCE,
        detail: format!("{trials} instances, max |prefix - all subsets| = {worst:e}"),
    }
}

pub fn check_two_tier_sufficiency(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let r = rng.gen_range(1..=4);
        let mu_b = rng.gen_range(0..r) as f64;
        let mu_g = rng.gen_range(mu_b as usize + 1..=r + 1) as f64;
        let timing = Timing {
            mu_g,
            mu_b: mu_b.max(0.25),
            deadline: 1.0,
        };
        let probs = random_probabilities(&mut rng, n);
        let l_g = timing.good_capacity().min(r);
        let k_star = rng.gen_range(1..=n * l_g);
        let profile = LoadProfile::from_timing(&timing, r, k_star, n).expect("l_b <= l_g");
        let two_tier =
            optimal_prefix_allocation(&probs, &profile).expect("feasible by construction");
        let general =
            bruteforce_allocation(&probs, &profile, r, &timing, BruteForceMode::GeneralLoads)
                .expect("within guards");
        worst = worst.max((two_tier.success_prob - general.success_prob).abs());
    }
    CheckResult {
        name: "allocation.two_tier",
        passed: worst <= ORACLE_TOLERANCE,
        detail: format!("{trials} instances, max |two-tier - general loads| = {worst:e}"),
    }
}

/// Decodes from random threshold-size subsets of shard results.
pub fn check_coding(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = PrimeField::default();
    let mut failures = 0usize;
    for _ in 0..trials {
        let outcome = (|| -> Result<bool> {
            let n = rng.gen_range(1..=8);
            let r = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=6);
            let deg_f = rng.gen_range(1..=3);
            if recovery_threshold(n, r, k, deg_f) > n * r {
                return Ok(true);
            }
            let scheme = CodingScheme::new(field, n, r, k, deg_f)?;
            let data = Dataset::random(field, k, rng.gen_range(1..=3), &mut rng)?;
            let shards = encode(&data, &scheme)?;
            let f = WorkFunction::random(field, deg_f, data.chunk_len(), &mut rng)?;
            let picked = rand::seq::index::sample(&mut rng, n * r, scheme.recovery_threshold());
            let results = picked
                .iter()
                .map(|i| Ok((i + 1, apply_function(&f, &shards[i])?)))
                .collect::<Result<Vec<_>>>()?;
            let expected = data
                .chunks()
                .iter()
                .map(|x| f.evaluate(x))
                .collect::<Result<Vec<_>>>()?;
            Ok(decode(&results, &scheme, &f)? == expected)
        })();
        if !matches!(outcome, Ok(true)) {
            failures += 1;
        }
    }
    CheckResult {
        name: "coding",
        passed: failures == 0,
        detail: format!("{trials} random schemes, {failures} decode failures"),
    }
}

pub fn run_oracle_suite(seed: u64, size: SuiteSize) -> Vec<CheckResult> {
    vec![
        check_success_model(seed, size.success_model),
        check_prefix_optimality(seed.wrapping_add(1), size.prefix),
        check_two_tier_sufficiency(seed.wrapping_add(2), size.general_loads),
        check_coding(seed.wrapping_add(3), size.coding),
    ]
}

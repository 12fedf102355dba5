//! Load allocation: choosing which workers get the high load tier.
//!
//! Only the two tiers `l_g` and `l_b` need to be considered, and for a fixed
//! number of high-tier workers the best choice is the workers most likely to
//! be good. The optimum is therefore found by a linear scan over prefix sizes
//! of the workers sorted by good-state probability. The brute-force searches
//! below exist to check both of those reductions.

use crate::error::{Error, Result};
use crate::scalar::{strictly_greater, Probability};
use crate::success_model::{
    min_good_required, push_trial, success_probability_bruteforce, success_probability_for_loads,
    tail_from, GoodProbabilities, LoadProfile, Timing,
};

/// Largest `n` accepted by the subset search.
pub const SUBSET_SEARCH_MAX_WORKERS: usize = 10;
/// Largest `n` and `r` accepted by the general integer-load search.
pub const GENERAL_SEARCH_MAX_WORKERS: usize = 5;
pub const GENERAL_SEARCH_MAX_SHARDS: usize = 4;

/// Per-worker loads for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationVector {
    /// Load of worker `i` (0-based).
    pub loads: Vec<usize>,
    /// Number of workers on the high tier.
    pub prefix_size: usize,
    /// Worker indices, high-tier workers first.
    pub ordering: Vec<usize>,
    /// Total load reaches `K*`.
    pub feasible: bool,
}

impl AllocationVector {
    /// High tier for `ordering[..prefix_size]`, low tier for the rest.
    pub fn from_prefix(ordering: Vec<usize>, prefix_size: usize, profile: &LoadProfile) -> Self {
        let mut loads = vec![profile.l_b; ordering.len()];
        for &i in &ordering[..prefix_size] {
            loads[i] = profile.l_g;
        }
        Self {
            loads,
            prefix_size,
            ordering,
            feasible: profile.capacity(prefix_size) >= profile.k_star,
        }
    }

    /// Builds the vector from a high-tier membership mask, keeping worker
    /// index order inside each tier.
    pub fn from_membership(high: &[bool], profile: &LoadProfile) -> Self {
        let ordering: Vec<usize> = (0..high.len())
            .filter(|&i| high[i])
            .chain((0..high.len()).filter(|&i| !high[i]))
            .collect();
        let prefix_size = high.iter().filter(|&&h| h).count();
        Self::from_prefix(ordering, prefix_size, profile)
    }

    pub fn total_load(&self) -> usize {
        self.loads.iter().sum()
    }

    pub fn high_tier(&self) -> &[usize] {
        &self.ordering[..self.prefix_size]
    }
}

/// Result of the prefix search.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSolution<P> {
    pub allocation: AllocationVector,
    pub success_prob: P,
    /// Success probability of every prefix size `0..=n`.
    pub curve: Vec<P>,
}

impl<P: Probability> PrefixSolution<P> {
    pub fn i_star(&self) -> usize {
        self.allocation.prefix_size
    }
}

/// Worker indices sorted by decreasing good probability; equal
/// probabilities keep index order.
pub fn order_by_good_probability<P: Probability>(probs: &GoodProbabilities<P>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        probs
            .get(b)
            .partial_cmp(&probs.get(a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// Success probability of every prefix of `order`, in one incremental pass
/// of the count-distribution recurrence (O(n^2) overall).
pub fn prefix_success_curve<P: Probability>(
    probs: &GoodProbabilities<P>,
    order: &[usize],
    profile: &LoadProfile,
) -> Vec<P> {
    let mut dist = vec![P::one()];
    let mut curve = Vec::with_capacity(order.len() + 1);
    let value = |dist: &[P], size: usize| match min_good_required(size, profile) {
        Some(a) if a <= size => tail_from(dist, a),
        _ => P::zero(),
    };
    curve.push(value(&dist, 0));
    for (size, &i) in order.iter().enumerate() {
        push_trial(&mut dist, probs.get(i));
        curve.push(value(&dist, size + 1));
    }
    curve
}

/// Best two-tier allocation among the `n + 1` prefixes of the
/// good-probability order.
///
/// Ties within the scalar's tolerance go to the smallest prefix; prefixes
/// whose total load is below `K*` are never chosen.
pub fn optimal_prefix_allocation<P: Probability>(
    probs: &GoodProbabilities<P>,
    profile: &LoadProfile,
) -> Result<PrefixSolution<P>> {
    if probs.len() != profile.n {
        return Err(Error::DimensionMismatch {
            expected: profile.n,
            got: probs.len(),
        });
    }
    if !profile.is_feasible() {
        return Err(Error::DeadlineInfeasible {
            capacity: profile.capacity(profile.n),
            k_star: profile.k_star,
        });
    }
    let order = order_by_good_probability(probs);
    let curve = prefix_success_curve(probs, &order, profile);
    let first_feasible = (0..=profile.n)
        .find(|&g| profile.capacity(g) >= profile.k_star)
        .expect("feasible profile has a feasible prefix");
    let mut best = first_feasible;
    for g in first_feasible + 1..=profile.n {
        if strictly_greater(curve[g], curve[best]) {
            best = g;
        }
    }
    Ok(PrefixSolution {
        allocation: AllocationVector::from_prefix(order, best, profile),
        success_prob: curve[best],
        curve,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceMode {
    /// Every high-tier set `G_g`, scored by literal subset enumeration.
    Subsets,
    /// Every integer load vector in `{0..r}^n` with total at least `K*`.
    GeneralLoads,
}

/// Best allocation found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptimum<P> {
    /// `None` when no load vector reaches `K*`.
    pub loads: Option<Vec<usize>>,
    pub success_prob: P,
}

/// Exhaustive allocation search, for validating the prefix search.
pub fn bruteforce_allocation<P: Probability>(
    probs: &GoodProbabilities<P>,
    profile: &LoadProfile,
    r: usize,
    timing: &Timing,
    mode: BruteForceMode,
) -> Result<BruteForceOptimum<P>> {
    let n = profile.n;
    if probs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: probs.len(),
        });
    }
    match mode {
        BruteForceMode::Subsets => {
            if n > SUBSET_SEARCH_MAX_WORKERS {
                return Err(Error::GuardExceeded(format!(
                    "subset search needs n <= {SUBSET_SEARCH_MAX_WORKERS}, got {n}"
                )));
            }
            let mut best: Option<(u32, P)> = None;
            for mask in 0u32..1 << n {
                let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let p = success_probability_bruteforce(&set, probs, profile)?;
                if best.is_none_or(|(_, b)| p > b) {
                    best = Some((mask, p));
                }
            }
            let (mask, p) = best.expect("at least the empty set");
            let loads = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        profile.l_g
                    } else {
                        profile.l_b
                    }
                })
                .collect();
            Ok(BruteForceOptimum {
                loads: Some(loads),
                success_prob: p,
            })
        }
        BruteForceMode::GeneralLoads => {
            if n > GENERAL_SEARCH_MAX_WORKERS || r > GENERAL_SEARCH_MAX_SHARDS {
                return Err(Error::GuardExceeded(format!(
                    "general search needs n <= {GENERAL_SEARCH_MAX_WORKERS} and r <= \
                     {GENERAL_SEARCH_MAX_SHARDS}, got n = {n}, r = {r}"
                )));
            }
            let expected = LoadProfile::from_timing(timing, r, profile.k_star, n)?;
            if expected != *profile {
                return Err(Error::InvalidProfile(format!(
                    "profile {profile:?} does not match timing {timing:?} with r = {r}"
                )));
            }
            let mut best: Option<(Vec<usize>, P)> = None;
            let mut loads = vec![0usize; n];
            loop {
                if loads.iter().sum::<usize>() >= profile.k_star {
                    let p = success_probability_for_loads(&loads, probs, timing, profile.k_star)?;
                    if best.as_ref().is_none_or(|(_, b)| p > *b) {
                        best = Some((loads.clone(), p));
                    }
                }
                // Odometer increment over {0..r}^n.
                let Some(pos) = loads.iter().position(|&l| l < r) else {
                    break;
                };
                loads[pos] += 1;
                loads[..pos].iter_mut().for_each(|l| *l = 0);
            }
            Ok(match best {
                Some((loads, p)) => BruteForceOptimum {
                    loads: Some(loads),
                    success_prob: p,
                },
                None => BruteForceOptimum {
                    loads: None,
                    success_prob: P::zero(),
                },
            })
        }
    }
}

//! Per-round success probability under a two-tier load allocation.
//!
//! Workers in the high tier `G_g` compute `l_g` evaluations and finish on time
//! only in the good state; everyone else computes `l_b` and always finishes.
//! The round succeeds when at least `a(G_g)` members of `G_g` are good, so the
//! success probability is a Poisson-binomial tail, computed here by dynamic
//! programming and, for checking, by literal enumeration.

use crate::error::{Error, Result};
use crate::scalar::Probability;

/// Absolute slack added before flooring `mu * d`, so that products such as
/// `0.1 * 30.0` land on the intended integer.
const FLOOR_SLACK: f64 = 1e-9;

/// Enumeration guard for the brute-force routines.
pub const BRUTE_FORCE_MAX_WORKERS: usize = 20;

/// Speeds and deadline shared by every worker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mu_g: f64,
    pub mu_b: f64,
    pub deadline: f64,
}

impl Timing {
    /// Most evaluations a good worker finishes by the deadline.
    pub fn good_capacity(&self) -> usize {
        (self.mu_g * self.deadline + FLOOR_SLACK).floor() as usize
    }

    /// Most evaluations a bad worker finishes by the deadline.
    pub fn bad_capacity(&self) -> usize {
        (self.mu_b * self.deadline + FLOOR_SLACK).floor() as usize
    }
}

/// The two canonical load tiers together with `K*` and `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadProfile {
    pub l_g: usize,
    pub l_b: usize,
    pub k_star: usize,
    pub n: usize,
}

impl LoadProfile {
    pub fn new(l_g: usize, l_b: usize, k_star: usize, n: usize) -> Result<Self> {
        if k_star == 0 {
            return Err(Error::InvalidProfile("K* must be >= 1".into()));
        }
        if l_b > l_g {
            return Err(Error::InvalidProfile(format!(
                "l_b = {l_b} exceeds l_g = {l_g}"
            )));
        }
        Ok(Self {
            l_g,
            l_b,
            k_star,
            n,
        })
    }

    /// `l_g = min(floor(mu_g d), r)` and `l_b = min(floor(mu_b d), r)`.
    pub fn from_timing(timing: &Timing, r: usize, k_star: usize, n: usize) -> Result<Self> {
        Self::new(
            timing.good_capacity().min(r),
            timing.bad_capacity().min(r),
            k_star,
            n,
        )
    }

    /// Total load when `g` workers take the high tier.
    pub fn capacity(&self, g: usize) -> usize {
        g * self.l_g + (self.n - g) * self.l_b
    }

    pub fn is_feasible(&self) -> bool {
        self.capacity(self.n) >= self.k_star
    }

    /// Bad-tier loads alone already reach `K*`.
    pub fn always_succeeds(&self) -> bool {
        self.n * self.l_b >= self.k_star
    }
}

/// `p_{g,i}` for every worker.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodProbabilities<P> {
    p_g: Vec<P>,
}

impl<P: Probability> GoodProbabilities<P> {
    pub fn new(p_g: Vec<P>) -> Result<Self> {
        if let Some(p) = p_g.iter().find(|&&p| !(p >= P::zero() && p <= P::one())) {
            return Err(Error::InvalidProfile(format!("{p:?} is not a probability")));
        }
        Ok(Self { p_g })
    }

    pub fn uniform(n: usize, p: P) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.p_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_g.is_empty()
    }

    pub fn get(&self, i: usize) -> P {
        self.p_g[i]
    }

    pub fn as_slice(&self) -> &[P] {
        &self.p_g
    }
}

/// `a(G_g) = max(0, ceil((K* - (n - |G_g|) l_b) / l_g))`.
///
/// `None` when the requirement is positive but `l_g = 0`, i.e. no number of
/// good workers suffices.
pub fn min_good_required(g_size: usize, profile: &LoadProfile) -> Option<usize> {
    assert!(
        g_size <= profile.n,
        "|G_g| = {g_size} exceeds n = {}",
        profile.n
    );
    let low_tier = (profile.n - g_size) * profile.l_b;
    if low_tier >= profile.k_star {
        return Some(0);
    }
    let deficit = profile.k_star - low_tier;
    if profile.l_g == 0 {
        return None;
    }
    Some(deficit.div_ceil(profile.l_g))
}

/// `P(at least a successes)` for independent Bernoulli trials, by the
/// standard O(m^2) count-distribution recurrence.
pub fn poisson_binomial_tail<P: Probability>(probs: impl IntoIterator<Item = P>, a: usize) -> P {
    let mut dist = vec![P::one()];
    for p in probs {
        push_trial(&mut dist, p);
    }
    tail_from(&dist, a)
}

/// Folds one more Bernoulli(p) trial into a count distribution.
pub(crate) fn push_trial<P: Probability>(dist: &mut Vec<P>, p: P) {
    let q = P::one() - p;
    dist.push(P::zero());
    for c in (1..dist.len()).rev() {
        dist[c] = dist[c] * q + dist[c - 1] * p;
    }
    dist[0] = dist[0] * q;
}

pub(crate) fn tail_from<P: Probability>(dist: &[P], a: usize) -> P {
    if a == 0 {
        return P::one();
    }
    // Summing from the top makes tail(a) = tail(a + 1) + dist[a] exactly as
    // evaluated, so rounding can never break monotonicity in `a`.
    let tail = dist.iter().skip(a).rev().fold(P::zero(), |acc, &x| acc + x);
    if tail > P::one() {
        P::one()
    } else {
        tail
    }
}

/// Success probability of the allocation whose high tier is `g_set`
/// (0-based worker indices), via the Poisson-binomial recurrence.
pub fn success_probability_dp<P: Probability>(
    g_set: &[usize],
    probs: &GoodProbabilities<P>,
    profile: &LoadProfile,
) -> P {
    match min_good_required(g_set.len(), profile) {
        Some(a) if a <= g_set.len() => {
            poisson_binomial_tail(g_set.iter().map(|&i| probs.get(i)), a)
        }
        _ => P::zero(),
    }
}

/// The same quantity by summing over all `2^|G_g|` good/bad assignments.
pub fn success_probability_bruteforce<P: Probability>(
    g_set: &[usize],
    probs: &GoodProbabilities<P>,
    profile: &LoadProfile,
) -> Result<P> {
    let m = g_set.len();
    if m > BRUTE_FORCE_MAX_WORKERS {
        return Err(Error::GuardExceeded(format!(
            "|G_g| = {m} exceeds {BRUTE_FORCE_MAX_WORKERS}"
        )));
    }
    let Some(a) = min_good_required(m, profile) else {
        return Ok(P::zero());
    };
    let mut total = P::zero();
    for mask in 0u32..1 << m {
        if (mask.count_ones() as usize) < a {
            continue;
        }
        let mut term = P::one();
        for (bit, &i) in g_set.iter().enumerate() {
            let p = probs.get(i);
            term = term
                * if mask >> bit & 1 == 1 {
                    p
                } else {
                    P::one() - p
                };
        }
        total = total + term;
    }
    Ok(total)
}

/// Success probability of an arbitrary integer load vector.
///
/// Enumerates every good/bad assignment of all workers and counts
/// evaluations from workers whose load fits their state's capacity.
pub fn success_probability_for_loads<P: Probability>(
    loads: &[usize],
    probs: &GoodProbabilities<P>,
    timing: &Timing,
    k_star: usize,
) -> Result<P> {
    let n = loads.len();
    if n != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: n,
        });
    }
    if n > BRUTE_FORCE_MAX_WORKERS {
        return Err(Error::GuardExceeded(format!(
            "n = {n} exceeds {BRUTE_FORCE_MAX_WORKERS}"
        )));
    }
    let (cap_g, cap_b) = (timing.good_capacity(), timing.bad_capacity());
    let mut total = P::zero();
    for mask in 0u32..1 << n {
        let mut on_time = 0;
        let mut term = P::one();
        for (i, &load) in loads.iter().enumerate() {
            let p = probs.get(i);
            let (good, weight) = if mask >> i & 1 == 1 {
                (true, p)
            } else {
                (false, P::one() - p)
            };
            term = term * weight;
            if load <= if good { cap_g } else { cap_b } {
                on_time += load;
            }
        }
        if on_time >= k_star {
            total = total + term;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = Ratio<i128>;

    fn scenario1() -> LoadProfile {
        LoadProfile::new(10, 3, 99, 15).unwrap()
    }

    #[test]
    fn min_good_examples() {
        assert_eq!(min_good_required(8, &scenario1()), Some(8));
        assert_eq!(min_good_required(10, &scenario1()), Some(9));
        assert_eq!(min_good_required(15, &scenario1()), Some(10));
        let easy = LoadProfile::new(10, 3, 30, 15).unwrap();
        assert_eq!(min_good_required(0, &easy), Some(0));
        assert_eq!(min_good_required(5, &easy), Some(0));
        let stuck = LoadProfile::new(0, 0, 5, 4).unwrap();
        assert_eq!(min_good_required(4, &stuck), None);
    }

    #[test]
    fn profile_from_timing() {
        let t = Timing {
            mu_g: 10.0,
            mu_b: 3.0,
            deadline: 1.0,
        };
        assert_eq!(
            LoadProfile::from_timing(&t, 10, 99, 15).unwrap(),
            scenario1()
        );
        let capped = LoadProfile::from_timing(&t, 4, 20, 15).unwrap();
        assert_eq!((capped.l_g, capped.l_b), (4, 3));
        let t = Timing {
            mu_g: 0.1,
            mu_b: 0.05,
            deadline: 30.0,
        };
        assert_eq!((t.good_capacity(), t.bad_capacity()), (3, 1));
        assert!(LoadProfile::new(2, 3, 5, 4).is_err());
        assert!(LoadProfile::new(3, 2, 0, 4).is_err());
    }

    #[test]
    fn three_worker_example() {
        let profile = LoadProfile::new(4, 1, 6, 3).unwrap();
        let probs = GoodProbabilities::new(vec![0.8f64, 0.5, 0.3]).unwrap();
        assert_eq!(min_good_required(2, &profile), Some(2));
        let p = success_probability_dp(&[0, 1], &probs, &profile);
        assert!((p - 0.4).abs() < 1e-15);
        let exact =
            GoodProbabilities::new(vec![Q::new(4, 5), Q::new(1, 2), Q::new(3, 10)]).unwrap();
        assert_eq!(
            success_probability_dp(&[0, 1], &exact, &profile),
            Q::new(2, 5)
        );
        assert_eq!(
            success_probability_bruteforce(&[0, 1], &exact, &profile).unwrap(),
            Q::new(2, 5)
        );
    }

    #[test]
    fn edge_requirements() {
        let probs = GoodProbabilities::uniform(15, 0.3).unwrap();
        let easy = LoadProfile::new(10, 3, 30, 15).unwrap();
        assert_eq!(success_probability_dp(&[0, 1, 2], &probs, &easy), 1.0);
        // a = 10 > |G_g| = 5
        let hard = scenario1();
        assert_eq!(success_probability_dp(&[0, 1, 2, 3, 4], &probs, &hard), 0.0);
        assert_eq!(
            success_probability_bruteforce(&[0, 1, 2, 3, 4], &probs, &hard).unwrap(),
            0.0
        );
    }

    #[test]
    fn certain_and_impossible_workers() {
        let profile = LoadProfile::new(4, 1, 9, 4).unwrap();
        let set = [0, 1, 2];
        let ones = GoodProbabilities::uniform(4, 1.0).unwrap();
        assert_eq!(
            success_probability_bruteforce(&set, &ones, &profile).unwrap(),
            1.0
        );
        assert_eq!(success_probability_dp(&set, &ones, &profile), 1.0);
        let zeros = GoodProbabilities::uniform(4, 0.0).unwrap();
        assert_eq!(
            success_probability_bruteforce(&set, &zeros, &profile).unwrap(),
            0.0
        );
        assert_eq!(success_probability_dp(&set, &zeros, &profile), 0.0);
    }

    #[test]
    fn brute_force_guard() {
        let probs = GoodProbabilities::uniform(25, 0.5).unwrap();
        let profile = LoadProfile::new(2, 1, 30, 25).unwrap();
        let set: Vec<usize> = (0..21).collect();
        assert!(matches!(
            success_probability_bruteforce(&set, &probs, &profile),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn rejects_non_probabilities() {
        assert!(GoodProbabilities::new(vec![0.5, 1.5]).is_err());
        assert!(GoodProbabilities::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dp_matches_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=12);
            let l_g = rng.gen_range(1..=6);
            let l_b = rng.gen_range(0..=l_g);
            let k_star = rng.gen_range(1..=n * l_g);
            let profile = LoadProfile::new(l_g, l_b, k_star, n).unwrap();
            let probs = GoodProbabilities::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap();
            let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
            let dp = success_probability_dp(&set, &probs, &profile);
            let bf = success_probability_bruteforce(&set, &probs, &profile).unwrap();
            assert!((dp - bf).abs() <= 1e-12, "{dp} vs {bf}");
        }
    }

    #[test]
    fn dp_matches_enumeration_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let l_g = rng.gen_range(1..=5);
            let l_b = rng.gen_range(0..=l_g);
            let k_star = rng.gen_range(1..=n * l_g);
            let profile = LoadProfile::new(l_g, l_b, k_star, n).unwrap();
            let probs =
                GoodProbabilities::new((0..n).map(|_| Q::new(rng.gen_range(0..=20), 20)).collect())
                    .unwrap();
            let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.7)).collect();
            assert_eq!(
                success_probability_dp(&set, &probs, &profile),
                success_probability_bruteforce(&set, &probs, &profile).unwrap()
            );
        }
    }

    #[test]
    fn single_precision_tracks_double() {
        let profile = scenario1();
        let set: Vec<usize> = (0..15).collect();
        let p64 = success_probability_dp(
            &set,
            &GoodProbabilities::uniform(15, 0.5f64).unwrap(),
            &profile,
        );
        let p32 = success_probability_dp(
            &set,
            &GoodProbabilities::uniform(15, 0.5f32).unwrap(),
            &profile,
        );
        assert!((p64 - 4944.0 / 32768.0).abs() < 1e-15);
        assert!((p32 as f64 - p64).abs() < 1e-6);
    }

    #[test]
    fn loads_enumeration_agrees_with_two_tier_model() {
        let timing = Timing {
            mu_g: 4.0,
            mu_b: 1.0,
            deadline: 1.0,
        };
        let profile = LoadProfile::from_timing(&timing, 4, 6, 3).unwrap();
        let probs = GoodProbabilities::new(vec![0.8f64, 0.5, 0.3]).unwrap();
        let p = success_probability_for_loads(&[4, 4, 1], &probs, &timing, 6).unwrap();
        let dp = success_probability_dp(&[0, 1], &probs, &profile);
        assert!((p - dp).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn tail_is_monotone_in_threshold_and_probabilities(
            ps in prop::collection::vec(0.0f64..=1.0, 1..12),
            l_g in 1usize..6,
            l_b_frac in 0.0f64..=1.0,
            bump_idx in any::<prop::sample::Index>(),
            bump in 0.0f64..=1.0,
        ) {
            let n = ps.len();
            let l_b = ((l_g as f64) * l_b_frac).floor() as usize;
            let probs = GoodProbabilities::new(ps.clone()).unwrap();
            let set: Vec<usize> = (0..n).collect();
            let mut prev = f64::INFINITY;
            for k_star in 1..=n * l_g + 1 {
                let profile = LoadProfile::new(l_g, l_b, k_star, n).unwrap();
                let p = success_probability_dp(&set, &probs, &profile);
                prop_assert!(p <= prev + 1e-12);
                prev = p;
            }
            let profile = LoadProfile::new(l_g, l_b, (n * l_g).div_ceil(2), n).unwrap();
            let base = success_probability_dp(&set, &probs, &profile);
            let mut raised = ps.clone();
            let i = bump_idx.index(n);
            raised[i] = raised[i] + (1.0 - raised[i]) * bump;
            let raised = GoodProbabilities::new(raised).unwrap();
            prop_assert!(success_probability_dp(&set, &raised, &profile) >= base - 1e-12);
        }

        #[test]
        fn adding_a_sure_worker_never_hurts(
            ps in prop::collection::vec(0.0f64..=1.0, 1..10),
            k_star in 1usize..40,
        ) {
            // With l_b = 0 the requirement a does not depend on |G_g|.
            let n = ps.len() + 1;
            let mut all = ps.clone();
            all.push(1.0);
            let probs = GoodProbabilities::new(all).unwrap();
            let profile = LoadProfile::new(4, 0, k_star, n).unwrap();
            let without: Vec<usize> = (0..n - 1).collect();
            let with: Vec<usize> = (0..n).collect();
            prop_assert_eq!(
                min_good_required(without.len(), &profile),
                min_good_required(with.len(), &profile)
            );
            let before = success_probability_dp(&without, &probs, &profile);
            let after = success_probability_dp(&with, &probs, &profile);
            prop_assert!(after >= before - 1e-12);
        }
    }
}

use lea_core::{Fidelity, ScenarioConfig, Simulation, StrategyKind};
use proptest::prelude::*;

fn small_scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        2usize..=6,
        1usize..=4,
        1usize..=5,
        1usize..=3,
        1u32..=4,
        1u32..=3,
        0.05f64..0.95,
        0.05f64..0.95,
        any::<u64>(),
    )
        .prop_filter_map(
            "infeasible",
            |(n, r, k, deg_f, mu_b, gap, p_gg, p_bb, seed)| {
                let mut cfg = ScenarioConfig::homogeneous(
                    n,
                    r,
                    k,
                    deg_f,
                    1.0,
                    (mu_b + gap) as f64,
                    mu_b as f64,
                    p_gg,
                    p_bb,
                )
                .ok()?;
                cfg.seed = seed;
                cfg.rounds = 40;
                cfg.fidelity = Fidelity::Full;
                cfg.validate().ok().map(|_| cfg)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rounds_are_consistent(cfg in small_scenario(), which in 0usize..3) {
        let strategy = StrategyKind::ALL[which];
        let profile = cfg.profile().unwrap();
        let mut sim = Simulation::new(cfg.clone().with_strategy(strategy)).unwrap();
        for _ in 0..cfg.rounds {
            let out = sim.run_round().unwrap();
            prop_assert_eq!(out.success, out.on_time_evaluations >= profile.k_star);
            prop_assert_eq!(out.decoded, Some(out.success));
            prop_assert!(out.allocation.loads.iter().all(|&l| l == profile.l_g || l == profile.l_b));
            prop_assert!(out.allocation.total_load() >= profile.k_star);
            let on_time: usize = out
                .allocation
                .loads
                .iter()
                .zip(&out.completion_times)
                .filter(|(_, &t)| t <= cfg.deadline + 1e-9)
                .map(|(&l, _)| l)
                .sum();
            prop_assert_eq!(on_time, out.on_time_evaluations);
            if out.true_states.iter().all(|s| s.is_good()) {
                prop_assert!(out.success);
            }
        }
    }
}

use lea_core::{run_compared, RunOptions, ScenarioConfig, StrategyKind};

#[test]
fn lea_allocations_settle_on_the_genie_choice() {
    let cfg = ScenarioConfig::reference_scenario(1)
        .unwrap()
        .with_rounds(100_000)
        .with_seed(12);
    let reports = run_compared(
        &cfg,
        &[StrategyKind::Lea, StrategyKind::Genie],
        &RunOptions::default(),
    )
    .unwrap();
    let (lea, genie) = (&reports[0].records, &reports[1].records);
    let window = 49_999..100_000;
    let differing = lea[window.clone()]
        .iter()
        .zip(&genie[window.clone()])
        .filter(|(a, b)| {
            assert_eq!(a.round, b.round);
            assert_eq!(a.n_good_true, b.n_good_true);
            a.i_star != b.i_star
        })
        .count();
    let frac = differing as f64 / window.len() as f64;
    assert!(frac <= 0.01, "i* differs in {frac:.4} of late rounds");
}

#[test]
fn genie_throughput_is_reproducible() {
    let cfg = ScenarioConfig::reference_scenario(1)
        .unwrap()
        .with_strategy(StrategyKind::Genie)
        .with_rounds(200_000)
        .with_seed(2);
    let opts = RunOptions {
        keep_records: false,
        estimate_every: None,
    };
    let a = lea_core::run_simulation_with(cfg.clone(), &opts).unwrap();
    let b = lea_core::run_simulation_with(cfg, &opts).unwrap();
    assert_eq!(a.throughput.to_bits(), b.throughput.to_bits());
    assert_eq!(a.successes, b.successes);
}

#[test]
fn every_scenario_orders_the_strategies() {
    for s in 1..=4 {
        let cfg = ScenarioConfig::reference_scenario(s)
            .unwrap()
            .with_rounds(50_000)
            .with_seed(40 + s as u64);
        let opts = RunOptions {
            keep_records: false,
            estimate_every: None,
        };
        let r = run_compared(&cfg, &StrategyKind::ALL, &opts).unwrap();
        let (lea, stat, genie) = (r[0].throughput, r[1].throughput, r[2].throughput);
        assert!(genie >= stat, "scenario {s}: genie {genie} static {stat}");
        assert!(
            (lea - genie).abs() <= 0.01,
            "scenario {s}: lea {lea} genie {genie}"
        );
    }
}

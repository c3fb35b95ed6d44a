mod common;

use proptest::prelude::*;
use truthful_cascade::mechanisms::{vcg_expected_payments, MechanismKind, MechanismParams, MechanismState, Phase};
use truthful_cascade::model::{AuctionEnv, BidProfile, CascadeModel};
use truthful_cascade::simulation::{run, run_replication_with, sample_cascade_clicks, stream_rng, RunConfig, Stream};

fn config(kind: MechanismKind, tau: u64, horizon: u64, replications: u64) -> RunConfig {
    let env = AuctionEnv::new(vec![0.3, 0.6, 0.1, 0.8, 0.45], vec![0.9, 0.2, 1.0, 0.5, 0.7], 2, 1.0).unwrap();
    let model = match kind {
        MechanismKind::PadAvcg => CascadeModel::general(vec![vec![0.9, 0.7, 0.8, 0.6, 1.0], vec![1.0; 5]]).unwrap(),
        _ => CascadeModel::position_dependent(vec![0.7]).unwrap(),
    };
    RunConfig { env, model, mechanism: MechanismParams::new(kind).with_tau(tau), horizon, seed: 42, replications }
}

#[test]
fn oracle_rounds_are_identical_vcg() {
    let cfg = config(MechanismKind::OracleVcg, 0, 10, 1);
    let p = vcg_expected_payments(&cfg.env, &BidProfile::truthful(&cfg.env), &cfg.model).unwrap();
    let traces = run(&cfg).unwrap();
    for t in &traces[0] {
        assert_eq!(t.allocation, traces[0][0].allocation);
        for (a, b) in t.expected_payments.iter().zip(&p) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn pure_exploration_is_free() {
    for kind in [MechanismKind::Avcg1, MechanismKind::Avcg3, MechanismKind::PadAvcg] {
        let traces = run(&config(kind, 50, 50, 2)).unwrap();
        for t in traces.iter().flatten() {
            assert_eq!(t.phase, Phase::Exploration);
            assert!(t.realized_payments.iter().chain(&t.expected_payments).all(|&p| p == 0.0));
        }
    }
}

#[test]
fn same_seed_same_traces() {
    for kind in [MechanismKind::Avcg1, MechanismKind::Avcg2Prime, MechanismKind::Avcg3] {
        let cfg = config(kind, 20, 200, 3);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }
}

#[test]
fn replications_do_not_depend_on_how_many_run() {
    let few = run(&config(MechanismKind::Avcg3, 20, 100, 2)).unwrap();
    let many = run(&config(MechanismKind::Avcg3, 20, 100, 7)).unwrap();
    assert_eq!(few[..], many[..2]);
    let mut alone = Vec::new();
    run_replication_with(&config(MechanismKind::Avcg3, 20, 100, 1), 1, |t| alone.push(t)).unwrap();
    assert_eq!(alone, many[1]);
}

fn explore(kind: MechanismKind, cfg: &RunConfig, tau: u64, r: u64) -> MechanismState {
    let bids = BidProfile::truthful(&cfg.env);
    let mut state = MechanismState::new(MechanismParams::new(kind).with_tau(tau), &cfg.env, &cfg.model).unwrap();
    for t in 1..=tau {
        let plan = state.plan(&cfg.env, &bids, &mut stream_rng(cfg.seed, r, t, Stream::Mechanism)).unwrap();
        let clicks = sample_cascade_clicks(&plan.allocation, &cfg.env, &cfg.model, &mut stream_rng(cfg.seed, r, t, Stream::Clicks));
        state.observe(&plan, &clicks).unwrap();
    }
    state
}

/// Number of rounds `1..=tau` in which the cyclic shift puts `ad` in one of the first `depth` slots.
fn shift_visits(ad: u64, n: u64, depth: u64, tau: u64) -> u64 {
    (1..=tau).filter(|t| (ad + n - t % n) % n < depth).count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exploration_visits_follow_the_cyclic_shift(tau in 5u64..200) {
        let (n, k) = (5u64, 2u64);
        for (kind, depth) in [(MechanismKind::Avcg1, k), (MechanismKind::PadAvcg, k), (MechanismKind::Avcg3, 1)] {
            if tau < n {
                continue;
            }
            let cfg = config(kind, 0, 0, 1);
            let state = explore(kind, &cfg, tau, 0);
            for (ad, &c) in state.samples().iter().enumerate() {
                prop_assert_eq!(c, shift_visits(ad as u64, n, depth, tau));
                prop_assert!(depth * (tau / n) <= c && c <= depth * tau.div_ceil(n));
                if tau % n == 0 || depth == 1 {
                    prop_assert!((depth * tau) / n <= c && c <= (depth * tau).div_ceil(n));
                }
            }
        }
    }
}

#[test]
fn exploration_estimates_are_unbiased() {
    let reps = 10_000u64;
    for kind in [MechanismKind::Avcg1, MechanismKind::Avcg3, MechanismKind::PadAvcg] {
        let cfg = config(kind, 0, 0, 1);
        let n = cfg.env.n_ads();
        let estimates = truthful_cascade::simulation::par_map((0..reps).collect(), |r| {
            explore(kind, &cfg, 200, r).estimate().unwrap().q_hat.clone()
        });
        for i in 0..n {
            let xs: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
            let mean = xs.iter().sum::<f64>() / reps as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let q = cfg.env.qualities()[i];
            assert!((mean - q).abs() <= 3.0 * se, "{kind:?} ad {i}: mean {mean} q {q} se {se}");
        }
    }
}

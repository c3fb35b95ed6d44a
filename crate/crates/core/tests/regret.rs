use truthful_cascade::mechanisms::{MechanismKind, MechanismParams};
use truthful_cascade::model::{AuctionEnv, BidProfile, CascadeModel};
use truthful_cascade::regret::{bound, deviation_regret, revenue_regret, sw_regret, tune, BoundInputs, TheoremId};
use truthful_cascade::simulation::{run, RunConfig};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn t1_single_slot_value() {
    // 4 * 2^(1/3) * 1000^(2/3) * ln(10)^(1/3)
    let expected = 4.0 * 2f64.powf(1.0 / 3.0) * 100.0 * 10f64.ln().powf(1.0 / 3.0);
    let got = bound(TheoremId::T1, &BoundInputs::new(1000, 1, 1)).value;
    assert!(rel(got, expected) < 1e-12, "{got} vs {expected}");
    assert!((got - 665.49).abs() < 0.01);
    let t = tune(TheoremId::T1, &BoundInputs::new(1000, 1, 1)).unwrap();
    assert!((t.delta - 0.1).abs() < 1e-15);
}

#[test]
fn t1_scales_with_prominence_and_value() {
    let base = bound(TheoremId::T1, &BoundInputs::new(10_000, 2, 10)).value;
    let scaled = bound(TheoremId::T1, &BoundInputs::new(10_000, 2, 10).with_prominence_min(0.8).with_v_max(3.0)).value;
    assert!(rel(scaled, base * 3.0 * 0.8f64.powf(-2.0 / 3.0)) < 1e-12);
    let t = tune(TheoremId::T1, &BoundInputs::new(10_000, 2, 10).with_prominence_min(0.8)).unwrap();
    let log = (20_000f64.powf(1.0 / 3.0) * 100f64.powf(1.0 / 3.0)).ln();
    let raw = 1e4f64.powf(2.0 / 3.0) * 10f64.cbrt() * 0.8f64.powf(-2.0 / 3.0) * log.cbrt();
    assert_eq!(t.tau, raw.ceil() as u64);
    assert!(t.tau >= 5);
}

#[test]
fn t7_tuning_has_exact_cube_roots() {
    let t = tune(TheoremId::T7, &BoundInputs::new(512, 1, 8)).unwrap();
    assert!((t.mu.unwrap() - 1.0 / 32.0).abs() < 1e-15);
    assert!((t.delta - 0.25).abs() < 1e-15);
    let expected = 6.0 * 512f64.powf(2.0 / 3.0) * 2.0 * (2.0 * 4.0 * 8.0f64).ln().cbrt();
    assert!(rel(bound(TheoremId::T7, &BoundInputs::new(512, 1, 8)).value, expected) < 1e-12);
}

#[test]
fn resampling_bounds_are_linear_in_mu() {
    let x = BoundInputs::new(1000, 3, 5).with_mu(0.01).with_v_max(2.0);
    assert!(rel(bound(TheoremId::T4, &x).value, 2.0 * 9.0 * 0.01 * 2.0 * 1000.0) < 1e-15);
    assert!(rel(bound(TheoremId::T5, &x).value, 9.0 * 0.01 * 2.0 * 1000.0) < 1e-15);
    let t = tune(TheoremId::T4, &BoundInputs::new(10_000, 3, 5)).unwrap();
    assert!(rel(t.mu.unwrap(), 1e-6) < 1e-12);
    assert_eq!((t.tau, t.delta), (0, 0.0));
}

#[test]
fn exploration_longer_than_horizon_is_infeasible() {
    assert!(tune(TheoremId::T1, &BoundInputs::new(3, 1, 10)).is_err());
    assert!(tune(TheoremId::T7, &BoundInputs::new(5, 1, 8)).is_err());
}

#[test]
fn every_theorem_round_trips_its_name() {
    for id in TheoremId::ALL {
        let parsed: TheoremId = id.to_string().parse().unwrap();
        assert_eq!(parsed, id);
        let x = BoundInputs::new(100_000, 2, 4).with_mu(0.01).with_q_min(0.1).with_prominence_min(0.9);
        assert!(bound(id, &x).value > 0.0);
    }
    assert_eq!(TheoremId::revenue_for(MechanismKind::Avcg1), Some(TheoremId::T1));
}

fn setup(kind: MechanismKind, tau: u64) -> RunConfig {
    let env = AuctionEnv::new(vec![0.2, 0.5, 0.35, 0.6], vec![0.9, 0.4, 0.8, 0.3], 2, 1.0).unwrap();
    let model = CascadeModel::position_dependent(vec![0.8]).unwrap();
    let mechanism = MechanismParams::new(kind).with_tau(tau).with_mu(0.05);
    RunConfig { env, model, mechanism, horizon: 400, seed: 8, replications: 6 }
}

#[test]
fn oracle_has_no_regret() {
    let cfg = setup(MechanismKind::OracleVcg, 0);
    let traces = run(&cfg).unwrap();
    let bids = BidProfile::truthful(&cfg.env);
    assert!(revenue_regret(&traces, &cfg.env, &bids, &cfg.model).unwrap().revenue.abs() < 1e-9);
    assert!(sw_regret(&traces, &cfg.env, &bids, &cfg.model).unwrap().abs() < 1e-9);
}

#[test]
fn deviation_dominates_revenue_regret() {
    for kind in [MechanismKind::Avcg1, MechanismKind::Avcg2Prime, MechanismKind::Avcg3] {
        let cfg = setup(kind, 40);
        let traces = run(&cfg).unwrap();
        let bids = BidProfile::truthful(&cfg.env);
        let r = revenue_regret(&traces, &cfg.env, &bids, &cfg.model).unwrap().revenue;
        let d = deviation_regret(&traces, &cfg.env, &bids, &cfg.model).unwrap();
        assert!(d >= r.abs() - 1e-9, "{kind:?}: {d} < |{r}|");
    }
}

//! A-VCG2 charges click-contingent payments built from bids alone, so its
//! expected revenue equals the oracle VCG revenue without any exploration.

use truthful_cascade::mechanisms::{avcg2_contingent, vcg_expected_payments, MechanismKind, MechanismParams};
use truthful_cascade::model::{cumulative_observation, AuctionEnv, BidProfile, CascadeModel};
use truthful_cascade::simulation::{run, RunConfig};

fn main() -> truthful_cascade::Result<()> {
    let env = AuctionEnv::new(vec![0.3, 0.7, 0.5, 0.2], vec![0.8, 0.4, 0.9, 1.0], 2, 1.0)?;
    let model = CascadeModel::position_dependent(vec![0.85])?;
    let bids = BidProfile::truthful(&env);

    let (alloc, pay) = avcg2_contingent(&env, &bids, &model)?;
    let gamma = cumulative_observation(&alloc, &model)?;
    let ctr: Vec<f64> = (0..env.n_slots()).map(|m| gamma[m] * env.qualities()[alloc.ad_at(m)]).collect();
    let expected = pay.expected(&ctr);
    let oracle = vcg_expected_payments(&env, &bids, &model)?;
    println!("expected contingent payments {expected:.6?}");
    println!("oracle VCG payments          {oracle:.6?}");

    let config = RunConfig {
        env: env.clone(),
        model: model.clone(),
        mechanism: MechanismParams::new(MechanismKind::Avcg2),
        horizon: 20_000,
        seed: 3,
        replications: 1,
    };
    let traces = run(&config)?;
    let realized: f64 = traces[0].iter().map(|t| t.realized_payments.iter().sum::<f64>()).sum();
    let target = oracle.iter().sum::<f64>() * config.horizon as f64;
    println!("realized revenue {realized:.2} vs T * oracle {target:.2}");
    Ok(())
}

//! Optimal allocation under estimated per-ad continuations is not monotone:
//! raising a bid can lower the ad's true click-through rate.

use truthful_cascade::allocation::{monotonicity_witness, optimal_allocation};
use truthful_cascade::model::{AuctionEnv, BidProfile, CascadeModel};

fn main() -> truthful_cascade::Result<()> {
    let env = AuctionEnv::new(vec![1.0; 3], vec![0.85, 1.0, 1.4], 2, 2.0)?;
    let estimated = CascadeModel::factorized(vec![1.0], vec![1.0, 0.9, 0.0])?;
    let truth = CascadeModel::factorized(vec![1.0], vec![0.89, 0.9, 0.0])?;

    for b in [1.4, 1.6] {
        let bids = BidProfile::truthful(&env).with_bid(2, b)?;
        let a = optimal_allocation(&env, &bids, env.qualities(), &estimated)?;
        println!("b_2 = {b}: ranking {:?}", &a.ranking()[..2]);
    }

    let rule = |b: &BidProfile| optimal_allocation(&env, b, env.qualities(), &estimated);
    let grid: Vec<f64> = (0..=20).map(|k| 1.0 + 0.05 * k as f64).collect();
    match monotonicity_witness(rule, &env, &BidProfile::truthful(&env), &truth, &grid)? {
        Some(w) => println!(
            "ad {} bid {} -> {}: true CTR {} -> {}",
            w.ad, w.bid_low, w.bid_high, w.ctr_low, w.ctr_high
        ),
        None => println!("allocation is monotone on this grid"),
    }

    let pd = CascadeModel::position_dependent(vec![0.9])?;
    let rule = |b: &BidProfile| optimal_allocation(&env, b, env.qualities(), &pd);
    let w = monotonicity_witness(rule, &env, &BidProfile::truthful(&env), &pd, &grid)?;
    println!("position-dependent model: witness = {w:?}");
    Ok(())
}

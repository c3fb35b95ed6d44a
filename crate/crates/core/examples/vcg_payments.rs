//! VCG on a three-slot position-dependent instance: allocation, expected
//! payments in both forms, and per-click prices.

use truthful_cascade::allocation::optimal_allocation;
use truthful_cascade::mechanisms::{vcg_click_payment, vcg_expected_payments, vcg_position_payments};
use truthful_cascade::model::{cumulative_observation, social_welfare, AuctionEnv, BidProfile, CascadeModel};

fn main() -> truthful_cascade::Result<()> {
    let env = AuctionEnv::new(vec![0.08, 0.05, 0.1, 0.03, 0.06], vec![0.9, 1.0, 0.4, 0.7, 0.6], 3, 1.0)?;
    let model = CascadeModel::position_dependent(vec![0.9, 0.8])?;
    let bids = BidProfile::truthful(&env);

    let alloc = optimal_allocation(&env, &bids, env.qualities(), &model)?;
    let gamma = cumulative_observation(&alloc, &model)?;
    let sw = social_welfare(&alloc, &model, env.qualities(), env.true_values())?;
    println!("ranking {:?}  SW = {sw:.6}", &alloc.ranking()[..env.n_slots()]);

    let p = vcg_expected_payments(&env, &bids, &model)?;
    let closed = vcg_position_payments(&env, &bids, &model)?;
    println!("{:>3} {:>5} {:>12} {:>12} {:>12}", "ad", "slot", "p* (SW)", "p* (ladder)", "per click");
    for i in 0..env.n_ads() {
        let s = alloc.slot_of(i);
        let displayed = s < env.n_slots();
        let click = vcg_click_payment(i, &env, &bids, &model, displayed)?;
        let shown = if displayed { s.to_string() } else { "-".into() };
        println!("{i:>3} {shown:>5} {:>12.6} {:>12.6} {:>12.6}", p[i], closed[i], click);
        if displayed {
            assert!((click * gamma[s] * env.qualities()[i] - p[i]).abs() < 1e-12);
        }
    }
    println!("revenue = {:.6}", p.iter().sum::<f64>());
    Ok(())
}

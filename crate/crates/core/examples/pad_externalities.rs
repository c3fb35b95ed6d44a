//! PAD-A-VCG on an ad-dependent cascade: explore with importance-weighted
//! clicks, then run VCG on the estimated qualities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truthful_cascade::mechanisms::{pad_avcg_step, MechanismKind, MechanismParams, MechanismState};
use truthful_cascade::model::{AuctionEnv, BidProfile, CascadeModel};
use truthful_cascade::simulation::{sample_cascade_clicks, stream_rng, Stream};

fn main() -> truthful_cascade::Result<()> {
    let env = AuctionEnv::new(vec![0.3, 0.5, 0.2, 0.6, 0.4], vec![0.9, 0.5, 1.0, 0.3, 0.7], 2, 1.0)?;
    let model = CascadeModel::general(vec![vec![0.9, 0.8, 0.95, 0.85, 1.0], vec![1.0; 5]])?;
    println!("Gamma_min = {:.4}", model.gamma_min(env.n_ads()));

    let bids = BidProfile::truthful(&env);
    let params = MechanismParams::new(MechanismKind::PadAvcg).with_tau(2_000).with_delta(0.1);
    let mut state = MechanismState::new(params, &env, &model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for t in 1..=params.tau {
        let plan = pad_avcg_step(&mut state, &env, &bids, &mut rng)?;
        let clicks = sample_cascade_clicks(&plan.allocation, &env, &model, &mut stream_rng(1, 0, t, Stream::Clicks));
        state.observe(&plan, &clicks)?;
    }
    let est = state.estimate().expect("exploration finished");
    println!("eta = {:.4}", est.eta);
    for i in 0..env.n_ads() {
        println!("ad {i}: q = {:.2}  q_hat = {:.4}  q+ = {:.4}", env.qualities()[i], est.q_hat[i], est.q_plus[i]);
    }
    let plan = pad_avcg_step(&mut state, &env, &bids, &mut rng)?;
    println!("exploitation ranking {:?}", &plan.allocation.ranking()[..2]);
    println!("expected payments {:.4?}", plan.expected_payments(&env, &model));
    Ok(())
}

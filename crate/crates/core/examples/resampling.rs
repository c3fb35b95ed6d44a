//! Canonical self-resampling: resampled-bid distribution and A-VCG2'
//! revenue as mu varies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truthful_cascade::mechanisms::{csrp, MechanismKind, MechanismParams};
use truthful_cascade::model::{AuctionEnv, CascadeModel};
use truthful_cascade::simulation::{run, RunConfig};

fn main() -> truthful_cascade::Result<()> {
    let mu = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 200_000;
    let (mut moved, mut sum_x) = (0usize, 0.0);
    for _ in 0..draws {
        let (x, _) = csrp(1.0, mu, &mut rng)?;
        moved += usize::from(x < 1.0);
        sum_x += x;
    }
    println!("P(x < b) = {:.4} (mu = {mu}), E[x] = {:.4}", moved as f64 / draws as f64, sum_x / draws as f64);

    let env = AuctionEnv::new(vec![0.4, 0.6, 0.5], vec![0.7, 0.5, 0.9], 2, 1.0)?;
    let model = CascadeModel::position_dependent(vec![0.8])?;
    for mu in [0.01, 0.05, 0.2] {
        let config = RunConfig {
            env: env.clone(),
            model: model.clone(),
            mechanism: MechanismParams::new(MechanismKind::Avcg2Prime).with_mu(mu),
            horizon: 5_000,
            seed: 9,
            replications: 4,
        };
        let traces = run(&config)?;
        let revenue: f64 = traces.iter().flatten().map(|t| t.expected_payments.iter().sum::<f64>()).sum::<f64>()
            / traces.len() as f64;
        println!("mu = {mu:<5} expected revenue over T = {revenue:.2}");
    }
    Ok(())
}

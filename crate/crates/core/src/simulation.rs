//! Click sampling and the repeated-auction driver.
//!
//! Every random draw comes from a stream keyed by `(seed, replication, round,
//! purpose)`, so replications are independent of how many others run and of
//! the order in which workers execute them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::{MechanismParams, MechanismState, Phase, ResampledBids};
use crate::model::{AuctionEnv, Allocation, BidProfile, CascadeModel, ClickRealization};

/// Purpose tag of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Instance = 1,
    Clicks = 2,
    Mechanism = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one `(seed, replication, round, purpose)` key.
pub fn stream_rng(seed: u64, replication: u64, round: u64, purpose: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = splitmix(seed);
    for (chunk, word) in key.chunks_exact_mut(8).zip([replication, round, purpose as u64, 0]) {
        h = splitmix(h ^ word);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Draws one user session down the cascade.
///
/// Each real slot consumes two uniforms (click, continuation) whether or not
/// it is observed.
pub fn sample_cascade_clicks<R: Rng + ?Sized>(
    alloc: &Allocation,
    env: &AuctionEnv,
    model: &CascadeModel,
    rng: &mut R,
) -> ClickRealization {
    let k = env.n_slots();
    let mut clicked = vec![false; k];
    let mut observed = vec![false; k];
    let mut looking = true;
    for m in 0..k {
        let ad = alloc.ad_at(m);
        let click_draw: f64 = rng.gen();
        let continue_draw: f64 = rng.gen();
        observed[m] = looking;
        clicked[m] = looking && click_draw < env.qualities()[ad];
        looking = looking && m + 1 < k && continue_draw < model.gamma(m, ad);
    }
    ClickRealization { clicked, observed }
}

/// Every click realization with non-zero probability, with its probability.
pub fn enumerate_click_realizations(
    alloc: &Allocation,
    env: &AuctionEnv,
    model: &CascadeModel,
) -> Vec<(ClickRealization, f64)> {
    fn walk(
        m: usize,
        p: f64,
        cur: &mut ClickRealization,
        alloc: &Allocation,
        env: &AuctionEnv,
        model: &CascadeModel,
        out: &mut Vec<(ClickRealization, f64)>,
    ) {
        let k = env.n_slots();
        let ad = alloc.ad_at(m);
        let q = env.qualities()[ad];
        cur.observed[m] = true;
        for click in [true, false] {
            let pc = if click { q } else { 1.0 - q };
            if pc == 0.0 {
                continue;
            }
            cur.clicked[m] = click;
            if m + 1 == k {
                out.push((cur.clone(), p * pc));
                continue;
            }
            let g = model.gamma(m, ad);
            if g < 1.0 {
                out.push((cur.clone(), p * pc * (1.0 - g)));
            }
            if g > 0.0 {
                walk(m + 1, p * pc * g, cur, alloc, env, model, out);
                cur.observed[m + 1] = false;
                cur.clicked[m + 1] = false;
            }
        }
        cur.clicked[m] = false;
    }
    let k = env.n_slots();
    let mut cur = ClickRealization { clicked: vec![false; k], observed: vec![false; k] };
    let mut out = Vec::new();
    walk(0, 1.0, &mut cur, alloc, env, model, &mut out);
    out
}

/// One fully specified simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: AuctionEnv,
    pub model: CascadeModel,
    pub mechanism: MechanismParams,
    pub horizon: u64,
    pub seed: u64,
    pub replications: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.mechanism.kind.explores() && self.horizon < self.mechanism.tau {
            return Err(Error::Config(format!(
                "horizon {} shorter than exploration length {}",
                self.horizon, self.mechanism.tau
            )));
        }
        MechanismState::new(self.mechanism, &self.env, &self.model).map(|_| ())
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub t: u64,
    pub phase: Phase,
    pub allocation: Allocation,
    pub resampled: Option<ResampledBids>,
    pub clicks: ClickRealization,
    pub expected_payments: Vec<f64>,
    pub realized_payments: Vec<f64>,
}

/// Runs replication `r` under truthful bidding, handing each round to `visit`.
pub fn run_replication_with<F>(config: &RunConfig, r: u64, mut visit: F) -> Result<()>
where
    F: FnMut(RoundTrace),
{
    config.validate()?;
    let env = &config.env;
    let bids = BidProfile::truthful(env);
    let mut state = MechanismState::new(config.mechanism, env, &config.model)?;
    for t in 1..=config.horizon {
        let mut mech_rng = stream_rng(config.seed, r, t, Stream::Mechanism);
        let plan = state.plan(env, &bids, &mut mech_rng)?;
        let mut click_rng = stream_rng(config.seed, r, t, Stream::Clicks);
        let clicks = sample_cascade_clicks(&plan.allocation, env, &config.model, &mut click_rng);
        let expected_payments = plan.expected_payments(env, &config.model);
        let realized_payments = plan.realized_payments(&clicks);
        state.observe(&plan, &clicks)?;
        visit(RoundTrace {
            t,
            phase: plan.phase,
            allocation: plan.allocation,
            resampled: plan.resampled,
            clicks,
            expected_payments,
            realized_payments,
        });
    }
    Ok(())
}

/// Number of worker threads, capped by `CAL_THREADS` when set.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    std::env::var("CAL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map_or(available, |n| n.min(available))
}

/// Maps `f` over `items` on the worker pool, preserving order.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(|| items.into_par_iter().map(&f).collect()),
        Err(_) => items.into_iter().map(f).collect(),
    }
}

/// Runs every replication and returns their traces in replication order.
pub fn run(config: &RunConfig) -> Result<Vec<Vec<RoundTrace>>> {
    config.validate()?;
    par_map((0..config.replications).collect(), |r| {
        let mut traces = Vec::with_capacity(config.horizon as usize);
        run_replication_with(config, r, |t| traces.push(t)).map(|_| traces)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::MechanismKind;

    #[test]
    fn zero_quality_never_clicks() {
        let env = AuctionEnv::new(vec![0.0; 3], vec![1.0; 3], 2, 1.0).unwrap();
        let model = CascadeModel::position_dependent(vec![0.9]).unwrap();
        let alloc = Allocation::from_ranking(vec![0, 1, 2]).unwrap();
        let mut rng = stream_rng(1, 0, 0, Stream::Clicks);
        for _ in 0..1000 {
            assert!(!sample_cascade_clicks(&alloc, &env, &model, &mut rng).clicked.contains(&true));
        }
    }

    #[test]
    fn certain_clicks() {
        let env = AuctionEnv::new(vec![1.0; 4], vec![1.0; 4], 3, 1.0).unwrap();
        let model = CascadeModel::position_dependent(vec![1.0, 1.0]).unwrap();
        let alloc = Allocation::from_ranking(vec![3, 2, 1, 0]).unwrap();
        let c = sample_cascade_clicks(&alloc, &env, &model, &mut stream_rng(2, 0, 0, Stream::Clicks));
        assert_eq!(c, ClickRealization::all_clicked(3));
    }

    #[test]
    fn enumeration_sums_to_one() {
        let env = AuctionEnv::new(vec![0.3, 0.6, 0.9, 0.2], vec![1.0; 4], 3, 1.0).unwrap();
        let model = CascadeModel::general(vec![vec![0.5, 0.7, 0.9, 1.0], vec![0.2, 0.4, 0.6, 0.8], vec![1.0; 4]]).unwrap();
        let alloc = Allocation::from_ranking(vec![2, 0, 3, 1]).unwrap();
        let all = enumerate_click_realizations(&alloc, &env, &model);
        let total: f64 = all.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (c, _) in &all {
            assert!(ClickRealization::new(c.clicked.clone(), c.observed.clone()).is_ok());
        }
    }

    #[test]
    fn streams_differ_by_key() {
        let a: u64 = stream_rng(7, 0, 1, Stream::Clicks).gen();
        let b: u64 = stream_rng(7, 0, 1, Stream::Mechanism).gen();
        let c: u64 = stream_rng(7, 1, 1, Stream::Clicks).gen();
        let d: u64 = stream_rng(7, 0, 1, Stream::Clicks).gen();
        assert!(a != b && a != c && a == d);
    }

    #[test]
    fn rejects_short_horizon() {
        let env = AuctionEnv::new(vec![0.5; 4], vec![1.0; 4], 2, 1.0).unwrap();
        let model = CascadeModel::position_dependent(vec![0.9]).unwrap();
        let config = RunConfig {
            env,
            model,
            mechanism: MechanismParams::new(MechanismKind::Avcg1).with_tau(10),
            horizon: 5,
            seed: 0,
            replications: 1,
        };
        assert!(run(&config).is_err());
    }
}

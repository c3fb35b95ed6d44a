#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use truthful_cascade::allocation::{optimal_allocation, optimal_allocation_excluding};
use truthful_cascade::model::{
    cumulative_observation, social_welfare_excluding, AuctionEnv, Allocation, BidProfile, CascadeModel,
};

/// Position-dependent instance with `2 <= N <= n_max`, `1 <= K <= min(k_max, N)`.
pub fn posdep(n_max: usize, k_max: usize) -> impl Strategy<Value = (AuctionEnv, CascadeModel)> {
    (2..=n_max)
        .prop_flat_map(move |n| (Just(n), 1..=k_max.min(n)))
        .prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.05f64..1.0, k - 1),
                Just(k),
            )
        })
        .prop_map(|(q, v, l, k)| {
            (AuctionEnv::new(q, v, k, 1.0).unwrap(), CascadeModel::position_dependent(l).unwrap())
        })
}

/// Instance with ad-dependent continuations `gamma[m][i]`.
pub fn general(n_max: usize, k_max: usize) -> impl Strategy<Value = (AuctionEnv, CascadeModel)> {
    (2..=n_max)
        .prop_flat_map(move |n| (Just(n), 1..=k_max.min(n)))
        .prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(prop::collection::vec(0.2f64..1.0, n), k),
                Just(k),
            )
        })
        .prop_map(|(q, v, g, k)| (AuctionEnv::new(q, v, k, 1.0).unwrap(), CascadeModel::general(g).unwrap()))
}

pub fn random_posdep<R: Rng>(rng: &mut R, n_max: usize, k_max: usize) -> (AuctionEnv, CascadeModel) {
    let n = rng.gen_range(2..=n_max);
    let k = rng.gen_range(1..=k_max.min(n));
    let q = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let v = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let l = (0..k - 1).map(|_| rng.gen_range(0.05..1.0)).collect();
    (AuctionEnv::new(q, v, k, 1.0).unwrap(), CascadeModel::position_dependent(l).unwrap())
}

pub fn random_general<R: Rng>(rng: &mut R, n_max: usize, k_max: usize) -> (AuctionEnv, CascadeModel) {
    let n = rng.gen_range(2..=n_max);
    let k = rng.gen_range(1..=k_max.min(n));
    let q = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let v = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let g = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0.2..1.0)).collect()).collect();
    (AuctionEnv::new(q, v, k, 1.0).unwrap(), CascadeModel::general(g).unwrap())
}

/// Uniformly random permutation of `0..n`.
pub fn random_allocation<R: Rng>(rng: &mut R, n: usize) -> Allocation {
    let mut ranking: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ranking.swap(i, rng.gen_range(0..=i));
    }
    Allocation::from_ranking(ranking).unwrap()
}

/// True click-through rate of `ad` under `alloc`.
pub fn ctr(alloc: &Allocation, model: &CascadeModel, qualities: &[f64], ad: usize) -> f64 {
    let gamma = cumulative_observation(alloc, model).unwrap();
    gamma.get(alloc.slot_of(ad)).copied().unwrap_or(0.0) * qualities[ad]
}

/// `n` evenly spaced deviation bids on `[0, 2 v_max]`.
pub fn deviation_grid(v_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * v_max * k as f64 / (n - 1) as f64).collect()
}

/// `(q_i / q+_i)(SW(theta_-i) - SW_-i(theta))` with welfare measured under `q_plus`.
pub fn estimated_vcg_oracle(env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel, q_plus: &[f64]) -> Vec<f64> {
    let b = bids.as_slice();
    let theta = optimal_allocation(env, bids, q_plus, model).unwrap();
    (0..env.n_ads())
        .map(|i| {
            if theta.slot_of(i) >= env.n_slots() {
                return 0.0;
            }
            let without = optimal_allocation_excluding(i, env, bids, q_plus, model).unwrap();
            let ext = social_welfare_excluding(i, &without, model, q_plus, b).unwrap()
                - social_welfare_excluding(i, &theta, model, q_plus, b).unwrap();
            env.qualities()[i] / q_plus[i] * ext
        })
        .collect()
}

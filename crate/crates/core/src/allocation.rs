//! Welfare-maximizing allocation rules.
//!
//! One solver serves both the true-quality rule and the estimated-quality rule:
//! the caller passes whichever quality vector applies.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{observation_unchecked, AuctionEnv, Allocation, BidProfile, CascadeModel};

/// Strategy used to maximize `sum_i Gamma_{pi(i)} q_i b_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationSolver {
    /// Rank by `q_i * b_i`; optimal only for position-dependent models.
    SortByExpectedValue,
    /// Enumerate every ordered selection of `min(K, N)` ads.
    BruteForce,
}

impl AllocationSolver {
    pub fn for_model(model: &CascadeModel) -> Self {
        if model.is_position_dependent() {
            Self::SortByExpectedValue
        } else {
            Self::BruteForce
        }
    }

    /// Solves over all ads except `excluded`, which is parked in the last extended slot.
    ///
    /// Ties go to the lowest ad index. Inputs are assumed validated.
    pub fn solve(&self, model: &CascadeModel, qualities: &[f64], bids: &[f64], excluded: Option<usize>) -> Allocation {
        let keys: Vec<f64> = qualities.iter().zip(bids).map(|(q, b)| q * b).collect();
        let mut ranked: Vec<usize> = (0..keys.len()).filter(|&i| Some(i) != excluded).collect();
        ranked.sort_by(|&a, &b| by_key_desc(&keys, a, b));

        let ranking = match self {
            Self::SortByExpectedValue => ranked,
            Self::BruteForce => {
                let depth = model.n_slots().min(ranked.len());
                let mut candidates = ranked.clone();
                candidates.sort_unstable();
                let best = brute_force(model, &keys, &candidates, depth);
                let mut out = best.clone();
                out.extend(ranked.into_iter().filter(|a| !best.contains(a)));
                out
            }
        };
        let mut ranking = ranking;
        ranking.extend(excluded);
        Allocation::from_ranking_unchecked(ranking)
    }
}

fn by_key_desc(keys: &[f64], a: usize, b: usize) -> Ordering {
    keys[b].total_cmp(&keys[a]).then(a.cmp(&b))
}

fn brute_force(model: &CascadeModel, keys: &[f64], candidates: &[usize], depth: usize) -> Vec<usize> {
    struct Search<'a> {
        model: &'a CascadeModel,
        keys: &'a [f64],
        candidates: &'a [usize],
        depth: usize,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_sw: f64,
    }

    impl Search<'_> {
        fn walk(&mut self, observe: f64, sw: f64) {
            let m = self.current.len();
            if m == self.depth {
                if self.best.is_empty() || sw > self.best_sw {
                    self.best_sw = sw;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for c in 0..self.candidates.len() {
                if self.used[c] {
                    continue;
                }
                let ad = self.candidates[c];
                self.used[c] = true;
                self.current.push(ad);
                let next = if m + 1 < self.model.n_slots() { observe * self.model.gamma(m, ad) } else { 0.0 };
                self.walk(next, sw + observe * self.keys[ad]);
                self.current.pop();
                self.used[c] = false;
            }
        }
    }

    let mut search = Search {
        model,
        keys,
        candidates,
        depth,
        used: vec![false; candidates.len()],
        current: Vec::with_capacity(depth),
        best: Vec::new(),
        best_sw: f64::NEG_INFINITY,
    };
    search.walk(1.0, 0.0);
    search.best
}

pub(crate) fn check_inputs(env: &AuctionEnv, bids: &BidProfile, qualities: &[f64], model: &CascadeModel) -> Result<()> {
    bids.check_len(env.n_ads())?;
    if qualities.len() != env.n_ads() {
        return Err(Error::Dimension(format!("{} qualities for {} ads", qualities.len(), env.n_ads())));
    }
    model.check_dims(env.n_ads(), env.n_slots())
}

/// Allocation maximizing `sum_i Gamma_{pi(i)} qualities_i b_i`.
pub fn optimal_allocation(
    env: &AuctionEnv,
    bids: &BidProfile,
    qualities: &[f64],
    model: &CascadeModel,
) -> Result<Allocation> {
    check_inputs(env, bids, qualities, model)?;
    Ok(AllocationSolver::for_model(model).solve(model, qualities, bids.as_slice(), None))
}

/// Optimal allocation of the other ads when ad `i` is absent.
pub fn optimal_allocation_excluding(
    i: usize,
    env: &AuctionEnv,
    bids: &BidProfile,
    qualities: &[f64],
    model: &CascadeModel,
) -> Result<Allocation> {
    check_inputs(env, bids, qualities, model)?;
    env.check_ad(i)?;
    Ok(AllocationSolver::for_model(model).solve(model, qualities, bids.as_slice(), Some(i)))
}

/// A bid pair on which an allocation rule lowers an ad's click-through rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityWitness {
    pub ad: usize,
    pub bid_low: f64,
    pub bid_high: f64,
    pub ctr_low: f64,
    pub ctr_high: f64,
}

/// Searches `grid` for a bid increase that lowers an ad's true CTR.
///
/// `rule` maps a bid profile to an allocation; the other ads bid `base`.
/// CTRs are measured with `model_true` and the true qualities of `env`.
pub fn monotonicity_witness<F>(
    rule: F,
    env: &AuctionEnv,
    base: &BidProfile,
    model_true: &CascadeModel,
    grid: &[f64],
) -> Result<Option<MonotonicityWitness>>
where
    F: Fn(&BidProfile) -> Result<Allocation>,
{
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("bid grid must be sorted ascending".into()));
    }
    base.check_len(env.n_ads())?;
    model_true.check_dims(env.n_ads(), env.n_slots())?;
    for ad in 0..env.n_ads() {
        let mut ctrs = Vec::with_capacity(grid.len());
        for &b in grid {
            let alloc = rule(&base.with_bid(ad, b)?)?;
            let gamma = observation_unchecked(&alloc, model_true);
            ctrs.push(gamma[alloc.slot_of(ad)] * env.qualities()[ad]);
        }
        for lo in 0..grid.len() {
            for hi in lo + 1..grid.len() {
                if grid[hi] > grid[lo] && ctrs[hi] < ctrs[lo] - 1e-12 {
                    return Ok(Some(MonotonicityWitness {
                        ad,
                        bid_low: grid[lo],
                        bid_high: grid[hi],
                        ctr_low: ctrs[lo],
                        ctr_high: ctrs[hi],
                    }));
                }
            }
        }
    }
    Ok(None)
}

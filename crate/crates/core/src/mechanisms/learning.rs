//! Round-driven mechanism state machines.
//!
//! A round is `plan` (allocation and payment rule) followed by `observe`
//! (clicks). Learning mechanisms explore for `tau` rounds with payment-free
//! rotating allocations, then freeze upper-confidence qualities and exploit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::payments::{avcg2_contingent, ranked_payments, weighted_vcg};
use super::resampling::{resample_all, srp_click_amount, ResampledBids};
use super::{PaymentRule, QualityEstimate};
use crate::allocation::AllocationSolver;
use crate::error::{Error, Result};
use crate::model::{observation_unchecked, AuctionEnv, Allocation, BidProfile, CascadeModel, ClickRealization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    /// VCG with pay-per-click payments and every parameter known.
    OracleVcg,
    /// Unknown qualities, known prominences.
    Avcg1,
    /// Known qualities, execution-contingent payments.
    Avcg2,
    /// Known qualities, self-resampled bids and per-click rebates.
    Avcg2Prime,
    /// Unknown qualities and prominences, slot-0 estimation, resampled exploitation.
    Avcg3,
    /// Unknown qualities, known ad-dependent continuation probabilities.
    PadAvcg,
}

impl MechanismKind {
    pub fn explores(self) -> bool {
        matches!(self, Self::Avcg1 | Self::Avcg3 | Self::PadAvcg)
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Self::Avcg2Prime | Self::Avcg3)
    }
}

/// Mechanism choice and its tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismParams {
    pub kind: MechanismKind,
    /// Exploration length.
    #[serde(default)]
    pub tau: u64,
    /// Confidence parameter of the quality estimates.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Resampling probability.
    #[serde(default = "default_mu")]
    pub mu: f64,
}

fn default_delta() -> f64 {
    0.1
}

fn default_mu() -> f64 {
    0.01
}

impl MechanismParams {
    pub fn new(kind: MechanismKind) -> Self {
        Self { kind, tau: 0, delta: default_delta(), mu: default_mu() }
    }

    pub fn with_tau(mut self, tau: u64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Exploration,
    Exploitation,
}

/// Everything decided before the clicks of a round are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundPlan {
    /// One-based round index.
    pub t: u64,
    pub phase: Phase,
    pub allocation: Allocation,
    pub resampled: Option<ResampledBids>,
    pub payments: PaymentRule,
}

impl RoundPlan {
    pub fn expected_payments(&self, env: &AuctionEnv, model: &CascadeModel) -> Vec<f64> {
        self.payments.expected(&self.allocation, env.qualities(), model)
    }

    pub fn realized_payments(&self, clicks: &ClickRealization) -> Vec<f64> {
        self.payments.realize(&self.allocation, clicks)
    }
}

/// Per-run mutable state of one mechanism.
#[derive(Debug, Clone)]
pub struct MechanismState {
    params: MechanismParams,
    model: CascadeModel,
    n_ads: usize,
    n_slots: usize,
    gamma_min: f64,
    t: u64,
    sums: Vec<f64>,
    counts: Vec<u64>,
    estimate: Option<QualityEstimate>,
    cache: Option<(Vec<f64>, Allocation, PaymentRule)>,
}

fn require_position_dependent(model: &CascadeModel, kind: MechanismKind) -> Result<()> {
    if model.is_position_dependent() {
        Ok(())
    } else {
        Err(Error::Config(format!("{kind:?} needs a position-dependent model")))
    }
}

impl MechanismState {
    /// Validates the mechanism's preconditions against the auction.
    ///
    /// `model` is the cascade model the mechanism is allowed to know; kinds
    /// that do not know it only use its slot count and family.
    pub fn new(params: MechanismParams, env: &AuctionEnv, model: &CascadeModel) -> Result<Self> {
        model.check_dims(env.n_ads(), env.n_slots())?;
        let n = env.n_ads();
        let k = env.n_slots();
        let kind = params.kind;
        if kind.explores() && !(params.delta.is_finite() && params.delta > 0.0 && params.delta <= 1.0) {
            return Err(Error::Config(format!("delta = {} outside (0, 1]", params.delta)));
        }
        if kind.is_randomized() && !(params.mu.is_finite() && params.mu > 0.0 && params.mu <= 1.0) {
            return Err(Error::Config(format!("mu = {} outside (0, 1]", params.mu)));
        }
        let min_tau = match kind {
            MechanismKind::Avcg1 | MechanismKind::PadAvcg => n.div_ceil(k) as u64,
            MechanismKind::Avcg3 => n as u64,
            _ => 0,
        };
        if kind.explores() && params.tau < min_tau {
            return Err(Error::Config(format!(
                "tau = {} below {min_tau}: some ad would never be sampled",
                params.tau
            )));
        }
        let mut gamma_min = 1.0;
        match kind {
            MechanismKind::Avcg1 | MechanismKind::Avcg2 | MechanismKind::Avcg2Prime | MechanismKind::Avcg3 => {
                require_position_dependent(model, kind)?
            }
            MechanismKind::PadAvcg => {
                gamma_min = model.gamma_min(n);
                if gamma_min <= 0.0 {
                    return Err(Error::Config("some slot is unobservable (Gamma_min = 0)".into()));
                }
            }
            MechanismKind::OracleVcg => {}
        }
        if kind == MechanismKind::Avcg1 && model.lambda_min()? <= 0.0 {
            return Err(Error::Config("some slot is unobservable (Lambda_K = 0)".into()));
        }
        let tau = if kind.explores() { params.tau } else { 0 };
        Ok(Self {
            params: MechanismParams { tau, ..params },
            model: model.clone(),
            n_ads: n,
            n_slots: k,
            gamma_min,
            t: 0,
            sums: vec![0.0; n],
            counts: vec![0; n],
            estimate: None,
            cache: None,
        })
    }

    /// A learning mechanism that skips exploration and exploits `estimate`.
    pub fn with_estimate(
        params: MechanismParams,
        env: &AuctionEnv,
        model: &CascadeModel,
        estimate: QualityEstimate,
    ) -> Result<Self> {
        if !params.kind.explores() {
            return Err(Error::Config(format!("{:?} does not estimate qualities", params.kind)));
        }
        if estimate.q_plus.len() != env.n_ads() {
            return Err(Error::Dimension(format!("{} estimates for {} ads", estimate.q_plus.len(), env.n_ads())));
        }
        let min_tau = if params.kind == MechanismKind::Avcg3 {
            env.n_ads() as u64
        } else {
            env.n_ads().div_ceil(env.n_slots()) as u64
        };
        let tau = params.tau.max(min_tau);
        let mut state = Self::new(MechanismParams { tau, ..params }, env, model)?;
        state.t = tau;
        state.counts.clone_from(&estimate.samples);
        state.estimate = Some(estimate);
        Ok(state)
    }

    pub fn params(&self) -> &MechanismParams {
        &self.params
    }

    pub fn kind(&self) -> MechanismKind {
        self.params.kind
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn tau(&self) -> u64 {
        self.params.tau
    }

    /// Phase of the next round.
    pub fn phase(&self) -> Phase {
        if self.t < self.params.tau {
            Phase::Exploration
        } else {
            Phase::Exploitation
        }
    }

    pub fn estimate(&self) -> Option<&QualityEstimate> {
        self.estimate.as_ref()
    }

    /// Per-ad exploration sample counts so far.
    pub fn samples(&self) -> &[u64] {
        &self.counts
    }

    /// WVCG weights `q+_i / q_i` implied by the frozen estimate.
    pub fn weights(&self, env: &AuctionEnv) -> Option<Vec<f64>> {
        self.estimate
            .as_ref()
            .map(|e| e.q_plus.iter().zip(env.qualities()).map(|(p, q)| p / q).collect())
    }

    /// Chooses the allocation and payment rule of the next round.
    pub fn plan<R: Rng + ?Sized>(&mut self, env: &AuctionEnv, bids: &BidProfile, rng: &mut R) -> Result<RoundPlan> {
        bids.check_len(self.n_ads)?;
        let t = self.t + 1;
        if self.phase() == Phase::Exploration {
            let n = self.n_ads as u64;
            let ranking = (0..n).map(|m| ((t + m) % n) as usize).collect();
            return Ok(RoundPlan {
                t,
                phase: Phase::Exploration,
                allocation: Allocation::from_ranking_unchecked(ranking),
                resampled: None,
                payments: PaymentRule::Zero,
            });
        }
        let (allocation, resampled, payments) = match self.params.kind {
            MechanismKind::Avcg2Prime | MechanismKind::Avcg3 => {
                let (alloc, resampled, rule) = self.resampled_plan(env, bids, rng)?;
                (alloc, Some(resampled), rule)
            }
            _ => {
                let hit = matches!(&self.cache, Some((b, _, _)) if b.as_slice() == bids.as_slice());
                if !hit {
                    let (alloc, rule) = self.deterministic_plan(env, bids)?;
                    self.cache = Some((bids.as_slice().to_vec(), alloc, rule));
                }
                let (_, alloc, rule) = self.cache.as_ref().expect("cache filled above");
                (alloc.clone(), None, rule.clone())
            }
        };
        Ok(RoundPlan { t, phase: Phase::Exploitation, allocation, resampled, payments })
    }

    /// Records the clicks of the round produced by the last `plan`.
    pub fn observe(&mut self, plan: &RoundPlan, clicks: &ClickRealization) -> Result<()> {
        if plan.t != self.t + 1 {
            return Err(Error::Config(format!("plan for round {} observed at round {}", plan.t, self.t + 1)));
        }
        if clicks.n_slots() != self.n_slots {
            return Err(Error::Dimension(format!("{} click slots for K = {}", clicks.n_slots(), self.n_slots)));
        }
        if plan.phase == Phase::Exploration {
            self.record(&plan.allocation, clicks);
        }
        self.t += 1;
        if plan.phase == Phase::Exploration && self.t == self.params.tau {
            self.freeze()?;
        }
        Ok(())
    }

    fn record(&mut self, alloc: &Allocation, clicks: &ClickRealization) {
        let click = |m: usize| if clicks.clicked[m] { 1.0 } else { 0.0 };
        match self.params.kind {
            MechanismKind::Avcg3 => {
                let ad = alloc.ad_at(0);
                self.sums[ad] += click(0);
                self.counts[ad] += 1;
            }
            _ => {
                let gamma = observation_unchecked(alloc, &self.model);
                for m in 0..self.n_slots {
                    let ad = alloc.ad_at(m);
                    self.sums[ad] += click(m) / gamma[m];
                    self.counts[ad] += 1;
                }
            }
        }
    }

    fn freeze(&mut self) -> Result<()> {
        if let Some(i) = self.counts.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!("ad {i} was never sampled during exploration")));
        }
        let q_hat: Vec<f64> = self.sums.iter().zip(&self.counts).map(|(s, &c)| s / c as f64).collect();
        let eta = self.eta()?;
        self.estimate = Some(QualityEstimate::new(q_hat, eta, self.counts.clone(), self.params.delta));
        Ok(())
    }

    /// Confidence width of the estimates after `tau` exploration rounds.
    pub fn eta(&self) -> Result<f64> {
        let n = self.n_ads as f64;
        let k = self.n_slots as f64;
        let tau = self.params.tau as f64;
        let log = (2.0 * n / self.params.delta).ln();
        Ok(match self.params.kind {
            MechanismKind::Avcg1 => {
                let inv: f64 = self.model.prominence()?.iter().map(|l| 1.0 / (l * l)).sum();
                (inv * 2.0 * n / (k * k * tau) * log).sqrt()
            }
            MechanismKind::Avcg3 => (n / tau * log).sqrt(),
            MechanismKind::PadAvcg => (n / (2.0 * k * tau) * log).sqrt() / self.gamma_min,
            _ => 0.0,
        })
    }

    fn q_plus(&self) -> Result<&[f64]> {
        self.estimate
            .as_ref()
            .map(|e| e.q_plus.as_slice())
            .ok_or_else(|| Error::Config("exploitation requested before qualities were estimated".into()))
    }

    fn deterministic_plan(&self, env: &AuctionEnv, bids: &BidProfile) -> Result<(Allocation, PaymentRule)> {
        let b = bids.as_slice();
        let n = self.n_ads;
        let k = self.n_slots;
        let ones = vec![1.0; n];
        match self.params.kind {
            MechanismKind::Avcg2 => {
                let (alloc, coef) = avcg2_contingent(env, bids, &self.model)?;
                Ok((alloc, PaymentRule::Contingent(coef)))
            }
            MechanismKind::Avcg1 => {
                let lambda = self.model.prominence()?;
                let qp = self.q_plus()?;
                let keys: Vec<f64> = qp.iter().zip(b).map(|(q, b)| q * b).collect();
                let alloc = AllocationSolver::SortByExpectedValue.solve(&self.model, qp, b, None);
                let raw = ranked_payments(&lambda, &alloc, &keys, &ones);
                let amounts = per_click(&alloc, k, &raw, |i, s| lambda[s] * qp[i]);
                Ok((alloc, PaymentRule::PerClick(amounts)))
            }
            MechanismKind::PadAvcg => {
                let qp = self.q_plus()?;
                let (alloc, raw) = weighted_vcg(&self.model, qp, b, &ones);
                let gamma = observation_unchecked(&alloc, &self.model);
                let amounts = per_click(&alloc, k, &raw, |i, s| gamma[s] * qp[i]);
                Ok((alloc, PaymentRule::PerClick(amounts)))
            }
            MechanismKind::OracleVcg => {
                let q = env.qualities();
                let (alloc, raw) = weighted_vcg(&self.model, q, b, &ones);
                let gamma = observation_unchecked(&alloc, &self.model);
                for (i, &p) in raw.iter().enumerate() {
                    if p != 0.0 && gamma[alloc.slot_of(i)] * q[i] == 0.0 {
                        return Err(Error::ImpossibleEvent(format!(
                            "ad {i} owes {p} but can never be clicked"
                        )));
                    }
                }
                let amounts = per_click(&alloc, k, &raw, |i, s| gamma[s] * q[i]);
                Ok((alloc, PaymentRule::PerClick(amounts)))
            }
            MechanismKind::Avcg2Prime | MechanismKind::Avcg3 => unreachable!("randomized kinds are planned per round"),
        }
    }

    fn resampled_plan<R: Rng + ?Sized>(
        &self,
        env: &AuctionEnv,
        bids: &BidProfile,
        rng: &mut R,
    ) -> Result<(Allocation, ResampledBids, PaymentRule)> {
        let qualities = match self.params.kind {
            MechanismKind::Avcg3 => self.q_plus()?,
            _ => env.qualities(),
        };
        let mu = self.params.mu;
        let resampled = resample_all(bids, mu, rng)?;
        let alloc = AllocationSolver::SortByExpectedValue.solve(&self.model, qualities, &resampled.x, None);
        let amounts = (0..self.n_ads)
            .map(|i| {
                if alloc.slot_of(i) < self.n_slots {
                    srp_click_amount(bids.as_slice()[i], resampled.y[i], mu)
                } else {
                    0.0
                }
            })
            .collect();
        Ok((alloc, resampled, PaymentRule::PerClick(amounts)))
    }
}

/// Converts expected payments into per-click amounts, `raw_i / ctr(i, slot)`.
fn per_click(alloc: &Allocation, k: usize, raw: &[f64], ctr: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(i, &p)| {
            let s = alloc.slot_of(i);
            let c = if s < k { ctr(i, s) } else { 0.0 };
            if c > 0.0 {
                p / c
            } else {
                0.0
            }
        })
        .collect()
}

fn expect_kind(state: &MechanismState, kind: MechanismKind) -> Result<()> {
    if state.kind() == kind {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {kind:?} state, got {:?}", state.kind())))
    }
}

/// One A-VCG1 round plan.
pub fn avcg1_step<R: Rng + ?Sized>(
    state: &mut MechanismState,
    env: &AuctionEnv,
    bids: &BidProfile,
    rng: &mut R,
) -> Result<RoundPlan> {
    expect_kind(state, MechanismKind::Avcg1)?;
    state.plan(env, bids, rng)
}

/// One A-VCG3 round plan.
pub fn avcg3_step<R: Rng + ?Sized>(
    state: &mut MechanismState,
    env: &AuctionEnv,
    bids: &BidProfile,
    rng: &mut R,
) -> Result<RoundPlan> {
    expect_kind(state, MechanismKind::Avcg3)?;
    state.plan(env, bids, rng)
}

/// One PAD-A-VCG round plan.
pub fn pad_avcg_step<R: Rng + ?Sized>(
    state: &mut MechanismState,
    env: &AuctionEnv,
    bids: &BidProfile,
    rng: &mut R,
) -> Result<RoundPlan> {
    expect_kind(state, MechanismKind::PadAvcg)?;
    state.plan(env, bids, rng)
}

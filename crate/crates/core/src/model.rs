//! Ads, slots, allocations and the cascade observation model.
//!
//! Ads and slots are zero-based throughout. Slot `m < K` is a real slot;
//! slots `K..N` are extended slots that keep allocations total bijections and
//! are never observed.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Ground truth of an auction: qualities, values and the number of slots.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionEnv {
    n_slots: usize,
    qualities: Vec<f64>,
    true_values: Vec<f64>,
    v_max: f64,
}

impl AuctionEnv {
    pub fn new(qualities: Vec<f64>, true_values: Vec<f64>, n_slots: usize, v_max: f64) -> Result<Self> {
        let n = qualities.len();
        if n == 0 {
            return Err(Error::Config("at least one ad is required".into()));
        }
        if true_values.len() != n {
            return Err(Error::Dimension(format!(
                "{} qualities but {} values",
                n,
                true_values.len()
            )));
        }
        if n_slots == 0 || n_slots > n {
            return Err(Error::Config(format!("need 1 <= K <= N, got K = {n_slots}, N = {n}")));
        }
        if !(v_max.is_finite() && v_max >= 0.0) {
            return Err(Error::Config(format!("v_max = {v_max} must be finite and non-negative")));
        }
        for (i, &q) in qualities.iter().enumerate() {
            check_probability(&format!("q[{i}]"), q)?;
        }
        for (i, &v) in true_values.iter().enumerate() {
            if !(v.is_finite() && (0.0..=v_max).contains(&v)) {
                return Err(Error::Config(format!("v[{i}] = {v} outside [0, {v_max}]")));
            }
        }
        Ok(Self { n_slots, qualities, true_values, v_max })
    }

    pub fn n_ads(&self) -> usize {
        self.qualities.len()
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn qualities(&self) -> &[f64] {
        &self.qualities
    }

    pub fn true_values(&self) -> &[f64] {
        &self.true_values
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn q_min(&self) -> f64 {
        self.qualities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_ad(&self, i: usize) -> Result<()> {
        if i < self.n_ads() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n_ads: self.n_ads() })
        }
    }
}

/// Reported values, one per ad.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile {
    bids: Vec<f64>,
}

impl BidProfile {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        for (i, &b) in bids.iter().enumerate() {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::Config(format!("bid[{i}] = {b} must be finite and non-negative")));
            }
        }
        Ok(Self { bids })
    }

    pub fn truthful(env: &AuctionEnv) -> Self {
        Self { bids: env.true_values.clone() }
    }

    /// The same profile with ad `i` reporting `bid` instead.
    pub fn with_bid(&self, i: usize, bid: f64) -> Result<Self> {
        let mut bids = self.bids.clone();
        *bids
            .get_mut(i)
            .ok_or(Error::IndexOutOfRange { index: i, n_ads: self.bids.len() })? = bid;
        Self::new(bids)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.bids
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.bids.len() == n {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{} bids for {} ads", self.bids.len(), n)))
        }
    }
}

/// Parameters of the cascade chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CascadeKind {
    /// `gamma[m][i] = lambdas[m]`.
    PositionDependent { lambdas: Vec<f64> },
    /// `gamma[m][i] = lambdas[m] * continuations[i]`.
    Factorized { lambdas: Vec<f64>, continuations: Vec<f64> },
    /// Arbitrary `K x N` continuation matrix; row `K-1` is never used.
    General { gamma: Vec<Vec<f64>> },
}

/// Cascade model over `K` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    kind: CascadeKind,
    n_slots: usize,
}

impl CascadeModel {
    pub fn new(kind: CascadeKind) -> Result<Self> {
        let n_slots = match &kind {
            CascadeKind::PositionDependent { lambdas } => {
                for (m, &l) in lambdas.iter().enumerate() {
                    check_probability(&format!("lambda[{m}]"), l)?;
                }
                lambdas.len() + 1
            }
            CascadeKind::Factorized { lambdas, continuations } => {
                for (m, &l) in lambdas.iter().enumerate() {
                    check_probability(&format!("lambda[{m}]"), l)?;
                }
                for (i, &c) in continuations.iter().enumerate() {
                    check_probability(&format!("c[{i}]"), c)?;
                }
                lambdas.len() + 1
            }
            CascadeKind::General { gamma } => {
                if gamma.is_empty() {
                    return Err(Error::Config("gamma needs at least one row".into()));
                }
                let n = gamma[0].len();
                for (m, row) in gamma.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::Dimension(format!("gamma row {m} has {} entries, expected {n}", row.len())));
                    }
                    for (i, &g) in row.iter().enumerate() {
                        check_probability(&format!("gamma[{m}][{i}]"), g)?;
                    }
                }
                gamma.len()
            }
        };
        Ok(Self { kind, n_slots })
    }

    pub fn position_dependent(lambdas: Vec<f64>) -> Result<Self> {
        Self::new(CascadeKind::PositionDependent { lambdas })
    }

    pub fn factorized(lambdas: Vec<f64>, continuations: Vec<f64>) -> Result<Self> {
        Self::new(CascadeKind::Factorized { lambdas, continuations })
    }

    pub fn general(gamma: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(CascadeKind::General { gamma })
    }

    /// Position-dependent model whose cumulative prominence at slot `K` is `lambda_k`.
    pub fn geometric(n_slots: usize, lambda_k: f64) -> Result<Self> {
        if n_slots == 0 {
            return Err(Error::Config("K must be positive".into()));
        }
        check_probability("lambda_K", lambda_k)?;
        let lambda = if n_slots > 1 { lambda_k.powf(1.0 / (n_slots - 1) as f64) } else { 1.0 };
        Self::position_dependent(vec![lambda; n_slots - 1])
    }

    pub fn kind(&self) -> &CascadeKind {
        &self.kind
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn is_position_dependent(&self) -> bool {
        matches!(self.kind, CascadeKind::PositionDependent { .. })
    }

    /// Number of ads the model is tied to, if any.
    pub fn n_ads(&self) -> Option<usize> {
        match &self.kind {
            CascadeKind::PositionDependent { .. } => None,
            CascadeKind::Factorized { continuations, .. } => Some(continuations.len()),
            CascadeKind::General { gamma } => Some(gamma[0].len()),
        }
    }

    /// Fails unless the model fits an auction with `n_ads` ads and `n_slots` slots.
    pub fn check_dims(&self, n_ads: usize, n_slots: usize) -> Result<()> {
        if self.n_slots != n_slots {
            return Err(Error::Dimension(format!("model has {} slots, auction has {n_slots}", self.n_slots)));
        }
        match self.n_ads() {
            Some(n) if n != n_ads => Err(Error::Dimension(format!("model has {n} ads, auction has {n_ads}"))),
            _ => Ok(()),
        }
    }

    /// Probability of continuing past slot `m` when it shows ad `ad`.
    pub fn gamma(&self, m: usize, ad: usize) -> f64 {
        match &self.kind {
            CascadeKind::PositionDependent { lambdas } => lambdas.get(m).copied().unwrap_or(0.0),
            CascadeKind::Factorized { lambdas, continuations } => {
                lambdas.get(m).copied().unwrap_or(0.0) * continuations[ad]
            }
            CascadeKind::General { gamma } => gamma[m][ad],
        }
    }

    /// Cumulative prominences `Lambda_1..Lambda_K` of a position-dependent model.
    pub fn prominence(&self) -> Result<Vec<f64>> {
        match &self.kind {
            CascadeKind::PositionDependent { lambdas } => {
                let mut out = Vec::with_capacity(self.n_slots);
                let mut acc = 1.0;
                out.push(acc);
                for &l in lambdas {
                    acc *= l;
                    out.push(acc);
                }
                Ok(out)
            }
            _ => Err(Error::Unsupported("prominences exist only for position-dependent models".into())),
        }
    }

    /// `Lambda_K` for position-dependent models.
    pub fn lambda_min(&self) -> Result<f64> {
        Ok(*self.prominence()?.last().expect("K >= 1"))
    }

    /// Smallest observation probability of a real slot over all allocations.
    pub fn gamma_min(&self, n_ads: usize) -> f64 {
        if let Ok(lambda) = self.prominence() {
            return *lambda.last().expect("K >= 1");
        }
        let depth = self.n_slots.min(n_ads);
        let mut used = vec![false; n_ads];
        let mut best = 1.0_f64;
        fn walk(model: &CascadeModel, m: usize, depth: usize, acc: f64, used: &mut [bool], best: &mut f64) {
            *best = best.min(acc);
            if m + 1 >= depth {
                return;
            }
            for ad in 0..used.len() {
                if !used[ad] {
                    used[ad] = true;
                    walk(model, m + 1, depth, acc * model.gamma(m, ad), used, best);
                    used[ad] = false;
                }
            }
        }
        walk(self, 0, depth, 1.0, &mut used, &mut best);
        best
    }
}

/// Bijection between ads and extended slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    slot_of: Vec<usize>,
    ad_at: Vec<usize>,
}

impl Allocation {
    /// Builds an allocation from the ad shown in each extended slot.
    pub fn from_ranking(ad_at: Vec<usize>) -> Result<Self> {
        let n = ad_at.len();
        let mut slot_of = vec![usize::MAX; n];
        for (m, &ad) in ad_at.iter().enumerate() {
            if ad >= n || slot_of[ad] != usize::MAX {
                return Err(Error::Config(format!("ranking {ad_at:?} is not a permutation")));
            }
            slot_of[ad] = m;
        }
        Ok(Self { slot_of, ad_at })
    }

    pub(crate) fn from_ranking_unchecked(ad_at: Vec<usize>) -> Self {
        let mut slot_of = vec![0; ad_at.len()];
        for (m, &ad) in ad_at.iter().enumerate() {
            slot_of[ad] = m;
        }
        Self { slot_of, ad_at }
    }

    pub fn n_ads(&self) -> usize {
        self.ad_at.len()
    }

    pub fn slot_of(&self, ad: usize) -> usize {
        self.slot_of[ad]
    }

    pub fn ad_at(&self, slot: usize) -> usize {
        self.ad_at[slot]
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ad_at
    }

    pub fn is_displayed(&self, ad: usize, n_slots: usize) -> bool {
        self.slot_of[ad] < n_slots
    }
}

/// Outcome of one user session, indexed by real slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickRealization {
    pub clicked: Vec<bool>,
    pub observed: Vec<bool>,
}

impl ClickRealization {
    pub fn new(clicked: Vec<bool>, observed: Vec<bool>) -> Result<Self> {
        if clicked.len() != observed.len() || observed.is_empty() {
            return Err(Error::Dimension("clicked and observed must have the same positive length".into()));
        }
        if !observed[0] || observed.windows(2).any(|w| w[1] && !w[0]) {
            return Err(Error::Config("observed slots must form a prefix starting at slot 0".into()));
        }
        if clicked.iter().zip(&observed).any(|(&c, &o)| c && !o) {
            return Err(Error::Config("an unobserved slot cannot be clicked".into()));
        }
        Ok(Self { clicked, observed })
    }

    /// Every slot observed and every slot clicked.
    pub fn all_clicked(n_slots: usize) -> Self {
        Self { clicked: vec![true; n_slots], observed: vec![true; n_slots] }
    }

    /// Every slot observed, nothing clicked.
    pub fn none_clicked(n_slots: usize) -> Self {
        Self { clicked: vec![false; n_slots], observed: vec![true; n_slots] }
    }

    pub fn n_slots(&self) -> usize {
        self.clicked.len()
    }

    /// Whether `ad` was clicked under `alloc`.
    pub fn ad_clicked(&self, alloc: &Allocation, ad: usize) -> bool {
        self.clicked.get(alloc.slot_of(ad)).copied().unwrap_or(false)
    }
}

fn check_alloc(alloc: &Allocation, model: &CascadeModel) -> Result<()> {
    model.check_dims(alloc.n_ads(), model.n_slots())?;
    if model.n_slots() > alloc.n_ads() {
        return Err(Error::Dimension(format!("{} slots for {} ads", model.n_slots(), alloc.n_ads())));
    }
    Ok(())
}

pub(crate) fn observation_unchecked(alloc: &Allocation, model: &CascadeModel) -> Vec<f64> {
    let n = alloc.n_ads();
    let k = model.n_slots();
    let mut out = vec![0.0; n];
    let mut acc = 1.0;
    for m in 0..k {
        out[m] = acc;
        if m + 1 < k {
            acc *= model.gamma(m, alloc.ad_at(m));
        }
    }
    out
}

/// Observation probability of every extended slot under `alloc`.
pub fn cumulative_observation(alloc: &Allocation, model: &CascadeModel) -> Result<Vec<f64>> {
    check_alloc(alloc, model)?;
    Ok(observation_unchecked(alloc, model))
}

fn check_vectors(alloc: &Allocation, qualities: &[f64], values: &[f64]) -> Result<()> {
    let n = alloc.n_ads();
    if qualities.len() != n || values.len() != n {
        return Err(Error::Dimension(format!(
            "{} qualities and {} values for {n} ads",
            qualities.len(),
            values.len()
        )));
    }
    Ok(())
}

pub(crate) fn welfare_unchecked(alloc: &Allocation, model: &CascadeModel, qualities: &[f64], values: &[f64]) -> f64 {
    let mut acc = 1.0;
    let mut sw = 0.0;
    let k = model.n_slots();
    for m in 0..k {
        let ad = alloc.ad_at(m);
        sw += acc * qualities[ad] * values[ad];
        if m + 1 < k {
            acc *= model.gamma(m, ad);
        }
    }
    sw
}

/// `sum_i Gamma_{pi(i)} q_i value_i` with the caller's choice of quality vector.
pub fn social_welfare(alloc: &Allocation, model: &CascadeModel, qualities: &[f64], values: &[f64]) -> Result<f64> {
    check_alloc(alloc, model)?;
    check_vectors(alloc, qualities, values)?;
    Ok(welfare_unchecked(alloc, model, qualities, values))
}

/// Social welfare without ad `i`'s own term, on the same allocation.
pub fn social_welfare_excluding(
    i: usize,
    alloc: &Allocation,
    model: &CascadeModel,
    qualities: &[f64],
    values: &[f64],
) -> Result<f64> {
    check_alloc(alloc, model)?;
    check_vectors(alloc, qualities, values)?;
    if i >= alloc.n_ads() {
        return Err(Error::IndexOutOfRange { index: i, n_ads: alloc.n_ads() });
    }
    Ok(welfare_excluding_unchecked(i, alloc, model, qualities, values))
}

pub(crate) fn welfare_excluding_unchecked(
    i: usize,
    alloc: &Allocation,
    model: &CascadeModel,
    qualities: &[f64],
    values: &[f64],
) -> f64 {
    let mut acc = 1.0;
    let mut sw = 0.0;
    let k = model.n_slots();
    for m in 0..k {
        let ad = alloc.ad_at(m);
        if ad != i {
            sw += acc * qualities[ad] * values[ad];
        }
        if m + 1 < k {
            acc *= model.gamma(m, ad);
        }
    }
    sw
}

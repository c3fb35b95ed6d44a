//! Payment schemes and the learning mechanisms built from them.

mod learning;
mod payments;
mod resampling;

pub use learning::{
    avcg1_step, avcg3_step, pad_avcg_step, MechanismKind, MechanismParams, MechanismState, Phase, RoundPlan,
};
pub use payments::{
    avcg2_click_payments, avcg2_contingent, myerson_piecewise_payment, vcg_click_payment, vcg_expected_payments,
    vcg_position_payments, wvcg_expected_payments, ContingentPayments,
};
pub use resampling::{
    csrp, randomized_allocate, srp_click_amount, srp_click_payment, ResampledBids, MAX_RESAMPLE_DEPTH,
};

use crate::model::{observation_unchecked, Allocation, CascadeModel, ClickRealization};

/// Floor applied to upper-confidence qualities so that per-click divisions stay finite.
pub const QUALITY_FLOOR: f64 = 1e-6;

/// Quality estimates frozen at the end of exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityEstimate {
    pub q_hat: Vec<f64>,
    pub eta: f64,
    pub q_plus: Vec<f64>,
    pub samples: Vec<u64>,
    pub confidence: f64,
}

impl QualityEstimate {
    pub fn new(q_hat: Vec<f64>, eta: f64, samples: Vec<u64>, confidence: f64) -> Self {
        let q_plus = q_hat.iter().map(|q| (q + eta).clamp(QUALITY_FLOOR, 1.0)).collect();
        Self { q_hat, eta, q_plus, samples, confidence }
    }

    /// An estimate whose upper bounds are exactly `q_plus`.
    pub fn from_upper_bounds(q_plus: Vec<f64>) -> Self {
        let n = q_plus.len();
        Self::new(q_plus, 0.0, vec![1; n], 1.0)
    }
}

/// How a round's payments depend on the clicks.
#[derive(Debug, Clone, PartialEq)]
pub enum PaymentRule {
    /// Nobody pays.
    Zero,
    /// Ad `i` pays `amounts[i]` when its own ad is clicked.
    PerClick(Vec<f64>),
    /// Payments depend on the clicks of every slot.
    Contingent(ContingentPayments),
}

impl PaymentRule {
    pub fn realize(&self, alloc: &Allocation, clicks: &ClickRealization) -> Vec<f64> {
        match self {
            Self::Zero => vec![0.0; alloc.n_ads()],
            Self::PerClick(amounts) => amounts
                .iter()
                .enumerate()
                .map(|(i, &a)| if clicks.ad_clicked(alloc, i) { a } else { 0.0 })
                .collect(),
            Self::Contingent(c) => c.realize(clicks),
        }
    }

    /// Expectation over clicks under the true qualities and cascade model.
    pub fn expected(&self, alloc: &Allocation, qualities: &[f64], model: &CascadeModel) -> Vec<f64> {
        let gamma = observation_unchecked(alloc, model);
        match self {
            Self::Zero => vec![0.0; alloc.n_ads()],
            Self::PerClick(amounts) => amounts
                .iter()
                .enumerate()
                .map(|(i, &a)| if a == 0.0 { 0.0 } else { gamma[alloc.slot_of(i)] * qualities[i] * a })
                .collect(),
            Self::Contingent(c) => {
                let slot_ctr: Vec<f64> =
                    (0..model.n_slots()).map(|m| gamma[m] * qualities[alloc.ad_at(m)]).collect();
                c.expected(&slot_ctr)
            }
        }
    }
}

//! Built-in counterexample suite: small instances with known payments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocation::{monotonicity_witness, optimal_allocation};
use crate::error::Result;
use crate::mechanisms::{
    avcg1_step, avcg2_click_payments, vcg_expected_payments, MechanismKind, MechanismParams, MechanismState,
    QualityEstimate,
};
use crate::model::{AuctionEnv, BidProfile, CascadeModel, ClickRealization};

/// Result of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: expected {} got {} (tol {:e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.actual,
            self.tolerance
        )
    }
}

fn check(name: &'static str, expected: f64, actual: Result<f64>, tolerance: f64) -> CheckOutcome {
    let actual = actual.unwrap_or(f64::NAN);
    CheckOutcome { name, expected, actual, tolerance, passed: (expected - actual).abs() <= tolerance }
}

/// Single slot, `q = (0.1, 0.2, 0.3)`, unit bids, estimates `(0.1, 0.29, 0.3)`.
fn single_slot_estimated() -> Result<(f64, f64)> {
    let env = AuctionEnv::new(vec![0.1, 0.2, 0.3], vec![1.0; 3], 1, 1.0)?;
    let model = CascadeModel::position_dependent(vec![])?;
    let bids = BidProfile::truthful(&env);
    let p_star = vcg_expected_payments(&env, &bids, &model)?;
    let est = QualityEstimate::from_upper_bounds(vec![0.1, 0.29, 0.3]);
    let mut state = MechanismState::with_estimate(MechanismParams::new(MechanismKind::Avcg1), &env, &model, est)?;
    let plan = avcg1_step(&mut state, &env, &bids, &mut ChaCha8Rng::seed_from_u64(0))?;
    let p_tilde = plan.expected_payments(&env, &model);
    Ok((p_star.iter().sum(), p_tilde.iter().sum()))
}

fn contingent_second_ad(bid: f64) -> Result<f64> {
    let env = AuctionEnv::new(vec![0.5, 1.0, 1.0], vec![4.0, 1.0, 0.5], 2, 4.0)?;
    let model = CascadeModel::position_dependent(vec![0.9])?;
    let bids = BidProfile::truthful(&env).with_bid(1, bid)?;
    Ok(avcg2_click_payments(&env, &bids, &model, &ClickRealization::all_clicked(2))?[1])
}

pub const WBB_EPSILON: f64 = 0.01;

fn contingent_total(eps: f64) -> Result<f64> {
    let env = AuctionEnv::new(vec![1.0, 0.5, 1.0], vec![2.0, 1.0, eps], 2, 2.0)?;
    let model = CascadeModel::position_dependent(vec![0.9])?;
    let p = avcg2_click_payments(&env, &BidProfile::truthful(&env), &model, &ClickRealization::all_clicked(2))?;
    Ok(p.iter().sum())
}

/// CTRs of ad 2 before and after its bid rises from 1.4 to 1.6 under estimated continuations.
pub fn non_monotone_ctrs() -> Result<Option<(usize, f64, f64, f64, f64)>> {
    let env = AuctionEnv::new(vec![1.0; 3], vec![0.85, 1.0, 1.4], 2, 2.0)?;
    let estimated = CascadeModel::factorized(vec![1.0], vec![1.0, 0.9, 0.0])?;
    let truth = CascadeModel::factorized(vec![1.0], vec![0.89, 0.9, 0.0])?;
    let rule = |b: &BidProfile| optimal_allocation(&env, b, env.qualities(), &estimated);
    let w = monotonicity_witness(rule, &env, &BidProfile::truthful(&env), &truth, &[1.4, 1.6])?;
    Ok(w.map(|w| (w.ad, w.bid_low, w.bid_high, w.ctr_low, w.ctr_high)))
}

/// Runs every check whose name contains `filter`.
pub fn verify_suite(filter: Option<&str>) -> Vec<CheckOutcome> {
    let single = single_slot_estimated();
    let witness = non_monotone_ctrs();
    let field = |f: fn(&(usize, f64, f64, f64, f64)) -> f64| match &witness {
        Ok(Some(w)) => Ok(f(w)),
        Ok(None) => Ok(f64::NAN),
        Err(e) => Err(e.clone()),
    };
    let all = vec![
        check("vcg-single-slot", 0.2, single.clone().map(|s| s.0), 1e-12),
        check("avcg1-estimated-payment", 0.29, single.clone().map(|s| s.1), 1e-12),
        check("avcg1-round-regret", -0.09, single.map(|s| s.0 - s.1), 1e-12),
        check("avcg2-truthful-payment", 0.5, contingent_second_ad(1.0), 0.0),
        check("avcg2-misreport-payment", -1.0, contingent_second_ad(3.0), 0.0),
        check("avcg2-budget-deficit", 4.0 * WBB_EPSILON - 0.5, contingent_total(WBB_EPSILON), 1e-15),
        check("monotonicity-witness-ad", 2.0, field(|w| w.0 as f64), 0.0),
        check("monotonicity-ctr-low", 0.9, field(|w| w.3), 0.0),
        check("monotonicity-ctr-high", 0.89, field(|w| w.4), 0.0),
    ];
    all.into_iter().filter(|c| filter.is_none_or(|f| c.name.contains(f))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in verify_suite(None) {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn filter_selects_by_name() {
        let only = verify_suite(Some("avcg2"));
        assert_eq!(only.len(), 3);
        assert!(verify_suite(Some("nothing-matches")).is_empty());
    }
}

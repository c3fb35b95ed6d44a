//! Expected and click-contingent payment rules with known qualities.

use crate::allocation::{check_inputs, AllocationSolver};
use crate::error::{Error, Result};
use crate::model::{
    observation_unchecked, welfare_excluding_unchecked, AuctionEnv, Allocation, BidProfile, CascadeModel,
    ClickRealization,
};

/// Weighted VCG payments for arbitrary allocation qualities.
///
/// The allocation maximizes `sum Gamma alloc_q b`; ad `i` pays
/// `(SW(theta_-i) - SW_-i(theta)) / scale_i` where welfares use `alloc_q`.
pub(crate) fn weighted_vcg(
    model: &CascadeModel,
    alloc_q: &[f64],
    bids: &[f64],
    scale: &[f64],
) -> (Allocation, Vec<f64>) {
    let solver = AllocationSolver::for_model(model);
    let theta = solver.solve(model, alloc_q, bids, None);
    let k = model.n_slots();
    let mut pay = vec![0.0; bids.len()];
    for (i, p) in pay.iter_mut().enumerate() {
        if theta.slot_of(i) >= k {
            continue;
        }
        let without = solver.solve(model, alloc_q, bids, Some(i));
        let sw_without = welfare_excluding_unchecked(i, &without, model, alloc_q, bids);
        let sw_others = welfare_excluding_unchecked(i, &theta, model, alloc_q, bids);
        *p = (sw_without - sw_others) / scale[i];
    }
    (theta, pay)
}

/// Position-dependent payments `sum_{l > slot} (Lambda_{l-1} - Lambda_l) key_l`, divided by `scale_i`.
pub(crate) fn ranked_payments(lambda: &[f64], theta: &Allocation, keys: &[f64], scale: &[f64]) -> Vec<f64> {
    let k = lambda.len();
    let n = theta.n_ads();
    let mut pay = vec![0.0; n];
    for s in 0..k.min(n) {
        let i = theta.ad_at(s);
        let mut acc = 0.0;
        for l in s + 1..=k.min(n - 1) {
            let next = if l < k { lambda[l] } else { 0.0 };
            acc += (lambda[l - 1] - next) * keys[theta.ad_at(l)];
        }
        pay[i] = acc / scale[i];
    }
    pay
}

/// VCG expected payments `p*_i = SW(theta*_-i) - SW_-i(theta*)`.
pub fn vcg_expected_payments(env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) -> Result<Vec<f64>> {
    check_inputs(env, bids, env.qualities(), model)?;
    let ones = vec![1.0; env.n_ads()];
    let (theta, pay) = weighted_vcg(model, env.qualities(), bids.as_slice(), &ones);
    if let Ok(lambda) = model.prominence() {
        let keys: Vec<f64> = env.qualities().iter().zip(bids.as_slice()).map(|(q, b)| q * b).collect();
        let closed = ranked_payments(&lambda, &theta, &keys, &ones);
        let scale = keys.iter().fold(1.0_f64, |a, &k| a.max(k));
        debug_assert!(
            pay.iter().zip(&closed).all(|(a, b)| (a - b).abs() <= 1e-12 * scale),
            "welfare-difference and closed-form payments disagree: {pay:?} vs {closed:?}"
        );
    }
    Ok(pay)
}

/// Closed-form position-dependent VCG payments.
pub fn vcg_position_payments(env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) -> Result<Vec<f64>> {
    check_inputs(env, bids, env.qualities(), model)?;
    let lambda = model.prominence()?;
    let keys: Vec<f64> = env.qualities().iter().zip(bids.as_slice()).map(|(q, b)| q * b).collect();
    let theta = AllocationSolver::SortByExpectedValue.solve(model, env.qualities(), bids.as_slice(), None);
    Ok(ranked_payments(&lambda, &theta, &keys, &vec![1.0; env.n_ads()]))
}

/// Pay-per-click VCG: `p*_i / (Gamma q_i)` on a click, zero otherwise.
pub fn vcg_click_payment(
    i: usize,
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
    clicked: bool,
) -> Result<f64> {
    env.check_ad(i)?;
    let p = vcg_expected_payments(env, bids, model)?;
    if !clicked {
        return Ok(0.0);
    }
    let theta = AllocationSolver::for_model(model).solve(model, env.qualities(), bids.as_slice(), None);
    let ctr = observation_unchecked(&theta, model)[theta.slot_of(i)] * env.qualities()[i];
    if ctr == 0.0 {
        return Err(Error::ImpossibleEvent(format!("ad {i} has zero click probability but was clicked")));
    }
    Ok(p[i] / ctr)
}

/// Weighted VCG: allocate on `q_i w_i b_i`, charge `(1/w_i)(SW^w(theta_-i) - SW^w_-i(theta))`.
pub fn wvcg_expected_payments(
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
    weights: &[f64],
) -> Result<Vec<f64>> {
    check_inputs(env, bids, env.qualities(), model)?;
    if weights.len() != env.n_ads() {
        return Err(Error::Dimension(format!("{} weights for {} ads", weights.len(), env.n_ads())));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Config(format!("weight[{i}] = {w} must be positive")));
    }
    let wq: Vec<f64> = env.qualities().iter().zip(weights).map(|(q, w)| q * w).collect();
    Ok(weighted_vcg(model, &wq, bids.as_slice(), weights).1)
}

/// Myerson payment `z(b) b - int_0^b z(u) du` with `z(u) = Lambda_{slot(u)} q_i`.
///
/// The slot of ad `i` as a function of its own bid is read off the ranking by
/// `qualities`; the click probability uses the true quality of `env`.
pub fn myerson_piecewise_payment(
    i: usize,
    env: &AuctionEnv,
    bids: &BidProfile,
    qualities: &[f64],
    model: &CascadeModel,
) -> Result<f64> {
    check_inputs(env, bids, qualities, model)?;
    env.check_ad(i)?;
    let lambda = model
        .prominence()
        .map_err(|_| Error::Unsupported("piecewise payments need a position-dependent model".into()))?;
    let k = lambda.len();
    let q_i = env.qualities()[i];
    let rank_q = qualities[i];
    let b = bids.as_slice()[i];
    if rank_q == 0.0 || q_i == 0.0 {
        return Ok(0.0);
    }
    let theta = AllocationSolver::SortByExpectedValue.solve(model, qualities, bids.as_slice(), None);
    let z_at_bid = lambda.get(theta.slot_of(i)).copied().unwrap_or(0.0) * q_i;

    let mut crit: Vec<f64> = (0..env.n_ads())
        .filter(|&j| j != i)
        .map(|j| qualities[j] * bids.as_slice()[j] / rank_q)
        .collect();
    crit.sort_by(|a, b| b.total_cmp(a));
    // Rank r holds on (crit[r], crit[r-1]); rank len on (0, crit[len-1]).
    let mut integral = 0.0;
    for (r, &lam) in lambda.iter().enumerate().take(k.min(crit.len() + 1)) {
        let hi = if r == 0 { b } else { crit[r - 1].min(b) };
        let lo = if r < crit.len() { crit[r] } else { 0.0 };
        if hi > lo {
            integral += lam * q_i * (hi - lo);
        }
    }
    Ok(z_at_bid * b - integral)
}

/// Execution-contingent payments, linear in the click indicators of the real slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingentPayments {
    /// `coef[i][m]` is charged to ad `i` when slot `m` is clicked.
    pub coef: Vec<Vec<f64>>,
}

impl ContingentPayments {
    pub fn realize(&self, clicks: &ClickRealization) -> Vec<f64> {
        self.coef
            .iter()
            .map(|row| row.iter().zip(&clicks.clicked).filter(|(_, &c)| c).map(|(a, _)| a).sum())
            .collect()
    }

    /// Expectation given the click probability of every real slot.
    pub fn expected(&self, slot_ctr: &[f64]) -> Vec<f64> {
        self.coef.iter().map(|row| row.iter().zip(slot_ctr).map(|(a, p)| a * p).sum()).collect()
    }
}

/// Coefficients of the execution-contingent payments under the optimal allocation.
pub fn avcg2_contingent(env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) -> Result<(Allocation, ContingentPayments)> {
    check_inputs(env, bids, env.qualities(), model)?;
    if !model.is_position_dependent() {
        return Err(Error::Unsupported("contingent payments need a position-dependent model".into()));
    }
    let q = env.qualities();
    let b = bids.as_slice();
    let k = env.n_slots();
    let solver = AllocationSolver::SortByExpectedValue;
    let theta = solver.solve(model, q, b, None);
    for m in 0..k {
        let ad = theta.ad_at(m);
        if q[ad] == 0.0 {
            return Err(Error::Config(format!("displayed ad {ad} has zero quality")));
        }
    }
    let mut coef = vec![vec![0.0; k]; env.n_ads()];
    for (i, row) in coef.iter_mut().enumerate() {
        let s = theta.slot_of(i);
        if s >= k {
            continue;
        }
        let without = solver.solve(model, q, b, Some(i));
        for m in s..k {
            let j = without.ad_at(m);
            if j != i {
                row[m] += q[j] * b[j] / q[theta.ad_at(m)];
            }
            if m > s {
                row[m] -= b[theta.ad_at(m)];
            }
        }
    }
    Ok((theta, ContingentPayments { coef }))
}

/// Realized execution-contingent payments for one click realization.
pub fn avcg2_click_payments(
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
    clicks: &ClickRealization,
) -> Result<Vec<f64>> {
    if clicks.n_slots() != env.n_slots() {
        return Err(Error::Dimension(format!("{} click slots for K = {}", clicks.n_slots(), env.n_slots())));
    }
    Ok(avcg2_contingent(env, bids, model)?.1.realize(clicks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn appendix_env() -> (AuctionEnv, CascadeModel) {
        let env = AuctionEnv::new(vec![0.1, 0.2, 0.3], vec![1.0; 3], 1, 1.0).unwrap();
        (env, CascadeModel::position_dependent(vec![]).unwrap())
    }

    #[test]
    fn vcg_single_slot() {
        let (env, model) = appendix_env();
        let p = vcg_expected_payments(&env, &BidProfile::truthful(&env), &model).unwrap();
        assert_abs_diff_eq!(p[2], 0.2, epsilon = 1e-12);
        assert_eq!((p[0], p[1]), (0.0, 0.0));
        let c = vcg_click_payment(2, &env, &BidProfile::truthful(&env), &model, true).unwrap();
        assert_abs_diff_eq!(c, 0.2 / 0.3, epsilon = 1e-12);
        assert_eq!(vcg_click_payment(2, &env, &BidProfile::truthful(&env), &model, false).unwrap(), 0.0);
    }

    #[test]
    fn vcg_two_slots() {
        let env = AuctionEnv::new(vec![1.0; 3], vec![2.0, 1.0, 0.5], 2, 2.0).unwrap();
        let model = CascadeModel::position_dependent(vec![0.8]).unwrap();
        let bids = BidProfile::truthful(&env);
        let p = vcg_expected_payments(&env, &bids, &model).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.4, epsilon = 1e-12);
        assert_eq!(p[2], 0.0);
        let closed = vcg_position_payments(&env, &bids, &model).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(p[i], closed[i], epsilon = 1e-12);
            let m = myerson_piecewise_payment(i, &env, &bids, env.qualities(), &model).unwrap();
            assert_abs_diff_eq!(p[i], m, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_advertiser_pays_nothing() {
        let env = AuctionEnv::new(vec![0.4], vec![0.7], 1, 1.0).unwrap();
        let model = CascadeModel::position_dependent(vec![]).unwrap();
        let bids = BidProfile::truthful(&env);
        assert_eq!(vcg_expected_payments(&env, &bids, &model).unwrap(), vec![0.0]);
        assert_eq!(myerson_piecewise_payment(0, &env, &bids, env.qualities(), &model).unwrap(), 0.0);
    }

    #[test]
    fn weighted_vcg_appendix_instance() {
        let (env, model) = appendix_env();
        let w = [1.0, 1.45, 1.0];
        let p = wvcg_expected_payments(&env, &BidProfile::truthful(&env), &model, &w).unwrap();
        assert_abs_diff_eq!(p[2], 0.29, epsilon = 1e-12);
        assert!(wvcg_expected_payments(&env, &BidProfile::truthful(&env), &model, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn myerson_appendix_instance() {
        let (env, model) = appendix_env();
        let bids = BidProfile::truthful(&env);
        let p = myerson_piecewise_payment(2, &env, &bids, env.qualities(), &model).unwrap();
        assert_abs_diff_eq!(p, 0.2, epsilon = 1e-12);
        let low = bids.with_bid(2, 0.1).unwrap();
        assert_eq!(myerson_piecewise_payment(2, &env, &low, env.qualities(), &model).unwrap(), 0.0);
        let general = CascadeModel::general(vec![vec![1.0; 3]]).unwrap();
        assert!(myerson_piecewise_payment(2, &env, &bids, env.qualities(), &general).is_err());
    }

    #[test]
    fn contingent_counterexamples() {
        let env = AuctionEnv::new(vec![0.5, 1.0, 1.0], vec![4.0, 1.0, 0.5], 2, 4.0).unwrap();
        let model = CascadeModel::position_dependent(vec![0.9]).unwrap();
        let all = ClickRealization::all_clicked(2);
        let p = avcg2_click_payments(&env, &BidProfile::truthful(&env), &model, &all).unwrap();
        assert_eq!(p[1], 0.5);
        let lie = BidProfile::new(vec![4.0, 3.0, 0.5]).unwrap();
        let p = avcg2_click_payments(&env, &lie, &model, &all).unwrap();
        assert_eq!(p[1], -1.0);
        let none = ClickRealization::none_clicked(2);
        assert_eq!(avcg2_click_payments(&env, &lie, &model, &none).unwrap(), vec![0.0; 3]);

        let eps = 0.01;
        let env = AuctionEnv::new(vec![1.0, 0.5, 1.0], vec![2.0, 1.0, eps], 2, 2.0).unwrap();
        let p = avcg2_click_payments(&env, &BidProfile::truthful(&env), &model, &all).unwrap();
        assert_abs_diff_eq!(p[0], 2.0 * eps - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 2.0 * eps, epsilon = 1e-15);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 4.0 * eps - 0.5, epsilon = 1e-15);
    }
}

//! Canonical self-resampling of bids and the rebate payments built on it.

use rand::Rng;

use crate::allocation::{check_inputs, AllocationSolver};
use crate::error::{Error, Result};
use crate::model::{AuctionEnv, Allocation, BidProfile, CascadeModel};

/// Recursion depth after which a resampled bid collapses to zero.
pub const MAX_RESAMPLE_DEPTH: usize = 64;

/// Perturbed allocation inputs and rebate thresholds, one entry per ad.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledBids {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<bool>,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("mu = {mu} outside (0, 1]")))
    }
}

/// Draws `(x, y)` for one bid.
///
/// The number of uniforms consumed does not depend on `bid`, and `x`, `y`
/// scale linearly with it, so a shared stream gives common random numbers
/// across bids.
pub fn csrp<R: Rng + ?Sized>(bid: f64, mu: f64, rng: &mut R) -> Result<(f64, f64)> {
    check_mu(mu)?;
    if !(bid.is_finite() && bid >= 0.0) {
        return Err(Error::Config(format!("bid = {bid} must be finite and non-negative")));
    }
    if rng.gen::<f64>() >= mu {
        return Ok((bid, bid));
    }
    let y = bid * rng.gen::<f64>();
    let mut x = y;
    for _ in 0..MAX_RESAMPLE_DEPTH {
        if rng.gen::<f64>() >= mu {
            return Ok((x, y));
        }
        x *= rng.gen::<f64>();
    }
    Ok((0.0, y))
}

/// Resamples every bid in ad order, then allocates on the perturbed bids.
pub fn randomized_allocate<R: Rng + ?Sized>(
    env: &AuctionEnv,
    bids: &BidProfile,
    qualities: &[f64],
    model: &CascadeModel,
    mu: f64,
    rng: &mut R,
) -> Result<(Allocation, ResampledBids)> {
    check_inputs(env, bids, qualities, model)?;
    let resampled = resample_all(bids, mu, rng)?;
    let theta = AllocationSolver::for_model(model).solve(model, qualities, &resampled.x, None);
    Ok((theta, resampled))
}

pub(crate) fn resample_all<R: Rng + ?Sized>(bids: &BidProfile, mu: f64, rng: &mut R) -> Result<ResampledBids> {
    let n = bids.len();
    let mut out = ResampledBids { x: Vec::with_capacity(n), y: Vec::with_capacity(n), s: Vec::with_capacity(n) };
    for &b in bids.as_slice() {
        let (x, y) = csrp(b, mu, rng)?;
        out.x.push(x);
        out.y.push(y);
        out.s.push(x == b);
    }
    Ok(out)
}

/// Amount charged on a click: the bid, minus a rebate of `bid / mu` when `y < bid`.
pub fn srp_click_amount(bid: f64, y: f64, mu: f64) -> f64 {
    if y < bid {
        bid - bid / mu
    } else {
        bid
    }
}

/// Per-click payment of ad `i` under a resampled allocation.
pub fn srp_click_payment(i: usize, bids: &BidProfile, resampled: &ResampledBids, mu: f64, clicked: bool) -> f64 {
    if clicked {
        srp_click_amount(bids.as_slice()[i], resampled.y[i], mu)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_bid_stays_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(csrp(0.0, 0.5, &mut rng).unwrap(), (0.0, 0.0));
        }
    }

    #[test]
    fn forced_resampling_keeps_x_below_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let (x, y) = csrp(2.0, 1.0, &mut rng).unwrap();
            assert!(y < 2.0 && x <= y);
        }
    }

    #[test]
    fn invalid_mu_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(csrp(1.0, 0.0, &mut rng).is_err());
        assert!(csrp(1.0, 1.5, &mut rng).is_err());
    }

    #[test]
    fn rebate_branches() {
        let bids = BidProfile::new(vec![1.0]).unwrap();
        let kept = ResampledBids { x: vec![1.0], y: vec![1.0], s: vec![true] };
        let cut = ResampledBids { x: vec![0.2], y: vec![0.4], s: vec![false] };
        assert_eq!(srp_click_payment(0, &bids, &kept, 0.1, false), 0.0);
        assert_eq!(srp_click_payment(0, &bids, &kept, 0.1, true), 1.0);
        assert!((srp_click_payment(0, &bids, &cut, 0.1, true) + 9.0).abs() < 1e-12);
    }

    #[test]
    fn common_random_numbers_scale_with_bid() {
        for seed in 0..50 {
            let a = csrp(1.0, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = csrp(3.0, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!((b.0 - 3.0 * a.0).abs() < 1e-12 && (b.1 - 3.0 * a.1).abs() < 1e-12);
        }
    }
}

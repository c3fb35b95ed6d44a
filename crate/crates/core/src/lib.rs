//! Truthful learning mechanisms for multi-slot sponsored-search auctions
//! under the cascade click model.
//!
//! Advertisers are ranked into `K` slots; a user scans the slots top-down,
//! clicks ad `i` with probability `q_i` when observing it, and continues past
//! slot `m` with probability `γ(m, ad)`. Qualities `q` are unknown to the
//! auctioneer, so mechanisms explore, estimate and then exploit while keeping
//! truthful bidding a dominant strategy.
//!
//! - [`model`]: instances, cascade models, allocations and welfare.
//! - [`allocation`]: welfare-maximizing allocation rules.
//! - [`mechanisms`]: VCG payments, resampling and the learning mechanisms.
//! - [`simulation`]: click sampling and the repeated-auction driver.
//! - [`regret`]: regret measurement, bounds and parameter tuning.
//! - [`harness`]: configuration files, sweeps, CSV output and the CLI.

pub mod allocation;
pub mod error;
pub mod harness;
pub mod mechanisms;
pub mod model;
pub mod regret;
pub mod simulation;

pub use error::{Error, Result};

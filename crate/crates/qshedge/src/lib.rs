//! Pricing and arbitrage diagnostics for finite-state markets under
//! multiple-priors ("quasi-sure") uncertainty.
//!
//! A market state carries a family of candidate probability measures
//! instead of a single one. Statements then hold quasi-surely when they
//! hold outside a set every prior ignores. On finitely supported models
//! this crate computes, exactly:
//!
//! - quasi-sure supports and essential suprema ([`measures`]),
//! - one-period superhedging prices by a minimax program and, for claims
//!   written on the terminal price, by Fenchel conjugation ([`pricing`]),
//! - the AIP (absence of instantaneous profit) and NA (no-arbitrage)
//!   conditions with verifiable certificates ([`arbitrage`]),
//! - the same diagnostics node by node on scenario trees, plus a
//!   backward superhedging recursion ([`multiperiod`]).
//!
//! All operations are pure functions over immutable values and are safe to
//! call concurrently. Linear programs are solved by a dense two-phase
//! simplex with Bland's rule ([`geometry`]); prices that are unbounded
//! below are reported as `f64::NEG_INFINITY`, never as a large negative
//! number.

pub mod arbitrage;
pub mod cli;
mod error;
pub mod geometry;
pub mod measures;
pub mod model;
pub mod multiperiod;
pub mod oracle;
pub mod pricing;

pub use error::Error;
pub use geometry::{Point, DEDUP_TOLERANCE, DEFAULT_TOLERANCE};
pub use measures::{DiscreteMeasure, PriorFamily, RandomVariable, SupportSet};
pub use multiperiod::{ScenarioTree, TreeNode};
pub use pricing::{Claim, OnePeriodMarket, PriceResult};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

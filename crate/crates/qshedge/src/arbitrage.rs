//! One-period market classification with certificates.
//!
//! Two nested no-arbitrage notions are checked on the support of the
//! price increment dY = Y - y:
//!
//! - AIP (absence of instantaneous profit) holds iff 0 lies in the convex
//!   hull of supp dY, equivalently iff the zero claim prices to 0 rather
//!   than minus infinity. Failure produces a hedge earning a uniform
//!   epsilon on every non-polar atom.
//! - NA (quasi-sure no-arbitrage) holds iff 0 lies in the relative
//!   interior of that hull. Failure produces a direction h with
//!   h . dY >= 0 quasi-surely and strictly positive on some non-polar
//!   atom.
//!
//! NA implies AIP but not conversely; supp dY = {0, 20} separates them.

use crate::geometry::{hull_membership, supporting_direction, Point};
use crate::measures::relevant_atoms;
use crate::pricing::OnePeriodMarket;
use crate::{Error, Result};

/// AIP verdict. `Holds` carries a convex combination of the dY-support
/// points equal to 0; `Fails` carries a hedge theta and the exact profit
/// margin epsilon = min_j theta . dY(j) > 0.
#[derive(Debug, Clone)]
pub enum AipCheck {
    Holds { weights: Vec<f64> },
    Fails { theta: Point, epsilon: f64 },
}

impl AipCheck {
    pub fn holds(&self) -> bool {
        matches!(self, AipCheck::Holds { .. })
    }
}

/// NA verdict. `Holds` carries strictly positive weights over the
/// dY-support points combining to 0; `Fails` carries the violating
/// direction.
#[derive(Debug, Clone)]
pub enum NaCheck {
    Holds { weights: Vec<f64> },
    Fails { direction: Point },
}

impl NaCheck {
    pub fn holds(&self) -> bool {
        matches!(self, NaCheck::Holds { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketClass {
    /// Quasi-sure no-arbitrage (and hence AIP).
    Na,
    /// AIP holds but NA fails: 0 sits on the boundary of conv supp dY.
    AipOnly,
    /// Instantaneous profit: 0 outside conv supp dY.
    Ip,
}

impl std::fmt::Display for MarketClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            MarketClass::Na => "NA",
            MarketClass::AipOnly => "AIP_only",
            MarketClass::Ip => "IP",
        };
        f.write_str(name)
    }
}

/// Full classification report, certificates included.
#[derive(Debug, Clone)]
pub struct ArbitrageReport {
    pub aip: bool,
    pub na: bool,
    /// Convex weights over the dY-support points equal to 0; present iff
    /// AIP holds.
    pub aip_certificate: Option<Vec<f64>>,
    /// Hedge with uniform profit margin; present iff AIP fails.
    pub ip_certificate: Option<(Point, f64)>,
    /// Strictly positive weights; present iff NA holds.
    pub na_certificate: Option<Vec<f64>>,
    /// Violating direction; present iff NA fails.
    pub na_violation: Option<Point>,
}

/// AIP check: hull membership of 0 in supp dY. On failure the separating
/// direction is returned unscaled, so epsilon is the true per-unit profit.
pub fn check_aip(market: &OnePeriodMarket, tol: f64) -> AipCheck {
    let support = market.increment_support();
    let origin = Point::zero(market.dimension());
    let membership = hull_membership(support.points(), &origin, tol)
        .expect("increment support is non-empty with consistent dimensions");
    if membership.in_hull {
        return AipCheck::Holds {
            weights: membership
                .barycentric_weights
                .expect("membership carries weights inside the hull"),
        };
    }
    let theta = membership
        .separator
        .expect("separator exists outside the hull");
    let atoms = relevant_atoms(market.priors());
    let epsilon = atoms
        .iter()
        .map(|&j| theta.dot(&market.delta(j)))
        .fold(f64::INFINITY, f64::min);
    assert!(
        epsilon > 0.0,
        "internal invariant: separator must earn a positive margin, got {epsilon}"
    );
    AipCheck::Fails { theta, epsilon }
}

/// NA check: relative-interior membership of 0 in conv supp dY.
pub fn check_na(market: &OnePeriodMarket, tol: f64) -> NaCheck {
    let support = market.increment_support();
    let origin = Point::zero(market.dimension());
    let membership = hull_membership(support.points(), &origin, tol)
        .expect("increment support is non-empty with consistent dimensions");
    if membership.in_relative_interior {
        return NaCheck::Holds {
            weights: membership
                .barycentric_weights
                .expect("membership carries weights inside the hull"),
        };
    }
    let direction = supporting_direction(support.points(), tol)
        .expect("increment support is non-empty")
        .expect("0 outside the relative interior admits a supporting direction");
    // The violation must verify quasi-surely on the stored atoms.
    let atoms = relevant_atoms(market.priors());
    let gains: Vec<f64> = atoms.iter().map(|&j| direction.dot(&market.delta(j))).collect();
    assert!(
        gains.iter().all(|&g| g >= -1e-9) && gains.iter().any(|&g| g > 1e-9),
        "internal invariant: NA violation certificate failed verification: {gains:?}"
    );
    NaCheck::Fails { direction }
}

/// NA if 0 in the relative interior, else AIP-only if 0 in the hull, else
/// IP. Never reports NA without AIP.
pub fn classify(market: &OnePeriodMarket, tol: f64) -> MarketClass {
    if check_na(market, tol).holds() {
        MarketClass::Na
    } else if check_aip(market, tol).holds() {
        MarketClass::AipOnly
    } else {
        MarketClass::Ip
    }
}

/// One-dimensional AIP test: y must lie between the smallest and largest
/// support value of Y.
pub fn interval_rule_1d(market: &OnePeriodMarket) -> Result<bool> {
    if market.dimension() != 1 {
        return Err(Error::DimensionError {
            found: market.dimension(),
        });
    }
    let values = market.support().scalar_values()?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y = market.initial().coord(0);
    Ok(min <= y && y <= max)
}

/// Assembles the full certificate report.
pub fn analyze(market: &OnePeriodMarket, tol: f64) -> ArbitrageReport {
    let aip = check_aip(market, tol);
    let na = check_na(market, tol);
    let (aip_holds, aip_certificate, ip_certificate) = match aip {
        AipCheck::Holds { weights } => (true, Some(weights), None),
        AipCheck::Fails { theta, epsilon } => (false, None, Some((theta, epsilon))),
    };
    let (na_holds, na_certificate, na_violation) = match na {
        NaCheck::Holds { weights } => (true, Some(weights), None),
        NaCheck::Fails { direction } => (false, None, Some(direction)),
    };
    debug_assert!(!na_holds || aip_holds, "NA implies AIP");
    ArbitrageReport {
        aip: aip_holds,
        na: na_holds,
        aip_certificate,
        ip_certificate,
        na_certificate,
        na_violation,
    }
}

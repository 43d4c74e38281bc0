//! One-period superhedging.
//!
//! The infimum superhedging cost of a claim Z is
//!
//! ```text
//! pi(Z) = inf_theta  essup( Z - theta . dY )
//! ```
//!
//! where dY = Y - y is the price increment and the essential supremum runs
//! over the non-polar atoms. With finitely many atoms the inner essup is a
//! maximum over rows and the infimum is a linear program, so the price is
//! computed exactly and, when finite, always attained by some hedge.
//!
//! For claims written on the terminal price, Z = g(Y), the same price has
//! a closed convex-duality form: with f = -g + (indicator of the support),
//! `pi(g) = -f**(y)`, which is the relative concave envelope of g over the
//! support evaluated at y, and minus infinity when y falls outside the
//! convex hull of the support. Both routes are implemented and testable
//! against each other.

use crate::geometry::{
    self, affine_rank, concave_envelope_eval, hull_membership, solve_minimax, LpStatus,
    MinimaxRow, Point,
};
use crate::measures::{quasi_support, relevant_atoms, PriorFamily, RandomVariable, SupportSet};
use crate::{Error, Result};

/// One-period market: initial prices y, terminal prices Y per atom, and
/// the prior family that decides which atoms matter.
#[derive(Debug, Clone)]
pub struct OnePeriodMarket {
    y: Point,
    terminal: RandomVariable,
    priors: PriorFamily,
}

impl OnePeriodMarket {
    pub fn new(y: Point, terminal: RandomVariable, priors: PriorFamily) -> Result<Self> {
        if terminal.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: y.dim(),
                found: terminal.dim(),
            });
        }
        if terminal.len() != priors.atom_count() {
            return Err(Error::DimensionMismatch {
                expected: priors.atom_count(),
                found: terminal.len(),
            });
        }
        if !y.is_finite() || y.coords().iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidMarket(format!(
                "initial price {y} must be finite and nonnegative"
            )));
        }
        for (j, v) in terminal.values().iter().enumerate() {
            if v.coords().iter().any(|&c| c < 0.0) {
                return Err(Error::InvalidMarket(format!(
                    "terminal price {v} at atom {j} must be nonnegative"
                )));
            }
        }
        Ok(OnePeriodMarket { y, terminal, priors })
    }

    /// Convenience constructor for a single-asset market.
    pub fn scalar(y: f64, terminal: Vec<f64>, priors: PriorFamily) -> Result<Self> {
        OnePeriodMarket::new(
            Point::scalar(y),
            RandomVariable::scalar(terminal)?,
            priors,
        )
    }

    pub fn dimension(&self) -> usize {
        self.y.dim()
    }

    pub fn initial(&self) -> &Point {
        &self.y
    }

    pub fn terminal(&self) -> &RandomVariable {
        &self.terminal
    }

    pub fn priors(&self) -> &PriorFamily {
        &self.priors
    }

    pub fn atom_count(&self) -> usize {
        self.priors.atom_count()
    }

    /// Price increment dY at one atom.
    pub fn delta(&self, atom: usize) -> Point {
        self.terminal.value(atom).minus(&self.y)
    }

    /// Quasi-sure support of the terminal price Y.
    pub fn support(&self) -> SupportSet {
        quasi_support(&self.priors, &self.terminal)
            .expect("market invariant: support of Y is non-empty")
    }

    /// Quasi-sure support of the increment dY.
    pub fn increment_support(&self) -> SupportSet {
        let deltas: Vec<Point> = relevant_atoms(&self.priors)
            .into_iter()
            .map(|j| self.delta(j))
            .collect();
        SupportSet::from_points(deltas).expect("market invariant: support of dY is non-empty")
    }
}

/// A contingent claim: either a payoff table on the support of Y (the
/// derivative case Z = g(Y)) or one value per atom (general Z).
#[derive(Debug, Clone)]
pub enum Claim {
    OnSupport(Vec<(Point, f64)>),
    PerAtom(Vec<f64>),
}

impl Claim {
    /// Constant claim Z = c on every atom of the market.
    pub fn constant(market: &OnePeriodMarket, c: f64) -> Self {
        Claim::PerAtom(vec![c; market.atom_count()])
    }

    /// Claim value at one atom.
    fn value_at(&self, market: &OnePeriodMarket, atom: usize) -> Result<f64> {
        match self {
            Claim::PerAtom(values) => {
                if values.len() != market.atom_count() {
                    return Err(Error::ClaimMismatch(format!(
                        "{} claim values for {} atoms",
                        values.len(),
                        market.atom_count()
                    )));
                }
                let v = values[atom];
                if !v.is_finite() {
                    return Err(Error::ClaimMismatch(format!("value {v} at atom {atom}")));
                }
                Ok(v)
            }
            Claim::OnSupport(table) => {
                let z = market.terminal().value(atom);
                lookup(table, z).ok_or_else(|| {
                    Error::ClaimMismatch(format!("no payoff for terminal price {z}"))
                })
            }
        }
    }

    /// Payoff lookup for the derivative case; `None` for per-atom claims.
    pub fn as_function(&self) -> Option<impl Fn(&Point) -> Option<f64> + '_> {
        match self {
            Claim::OnSupport(table) => Some(move |z: &Point| lookup(table, z)),
            Claim::PerAtom(_) => None,
        }
    }
}

fn lookup(table: &[(Point, f64)], z: &Point) -> Option<f64> {
    table
        .iter()
        .find(|(pt, _)| pt.dim() == z.dim() && pt.linf_dist(z) <= geometry::DEDUP_TOLERANCE)
        .map(|(_, g)| *g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceStatus {
    Finite,
    /// The price is minus infinity: some hedge earns a strictly positive
    /// amount on every non-polar atom at zero cost.
    InstantaneousProfit,
}

/// Closedness of the set of superhedging prices, a property of the market
/// alone (see [`closedness_diagnostic`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closedness {
    /// 0 lies in the interior of conv supp dY; sigma(theta) > 0 for all
    /// theta != 0 and the price set is closed.
    StrictlyClosed,
    /// supp dY = {0}; the price set is closed and the price equals the
    /// essential supremum of the claim.
    DegenerateClosed,
    /// sigma >= 0 with a zero in some direction; no closedness verdict.
    BoundaryCase,
    /// sigma(theta) < 0 for some theta, i.e. 0 outside conv supp dY.
    NotClosed,
}

impl std::fmt::Display for Closedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Closedness::StrictlyClosed => "StrictlyClosed",
            Closedness::DegenerateClosed => "DegenerateClosed",
            Closedness::BoundaryCase => "BoundaryCase",
            Closedness::NotClosed => "NotClosed",
        };
        f.write_str(name)
    }
}

/// Superhedging price with certificate data.
#[derive(Debug, Clone)]
pub struct PriceResult {
    /// Infimum superhedging cost; `NEG_INFINITY` iff an IP exists.
    pub price: f64,
    pub status: PriceStatus,
    /// Optimal hedge; present exactly when the price is finite.
    pub theta_hat: Option<Point>,
    pub closedness: Closedness,
    /// `price + theta_hat . dY(j) - Z(j)` per relevant atom, ascending
    /// atom order; empty when the price is infinite.
    pub certificate_slack: Vec<f64>,
    /// True when the LP reports further optimal hedges beside `theta_hat`.
    pub multiple_hedges: bool,
}

/// Computes the superhedging price by the minimax program: one row per
/// relevant atom with offset Z(j) and slope -dY(j) = y - Y(j).
pub fn superhedge_price(market: &OnePeriodMarket, claim: &Claim, tol: f64) -> Result<PriceResult> {
    let atoms = relevant_atoms(market.priors());
    let mut rows = Vec::with_capacity(atoms.len());
    for &j in &atoms {
        let offset = claim.value_at(market, j)?;
        let slope = market.initial().minus(market.terminal().value(j));
        rows.push(MinimaxRow::new(offset, slope));
    }
    let lp = solve_minimax(&rows, market.dimension(), tol)?;
    let closedness = closedness_diagnostic(market, tol);
    match lp.status {
        LpStatus::UnboundedBelow => Ok(PriceResult {
            price: f64::NEG_INFINITY,
            status: PriceStatus::InstantaneousProfit,
            theta_hat: None,
            closedness,
            certificate_slack: Vec::new(),
            multiple_hedges: false,
        }),
        LpStatus::Optimal => {
            let theta = lp.minimizer.expect("finite optimum carries a minimizer");
            let slack: Vec<f64> = atoms
                .iter()
                .zip(&rows)
                .map(|(&j, row)| lp.value + theta.dot(&market.delta(j)) - row.offset)
                .collect();
            Ok(PriceResult {
                price: lp.value,
                status: PriceStatus::Finite,
                theta_hat: Some(theta),
                closedness,
                certificate_slack: slack,
                multiple_hedges: lp.multiple_optima,
            })
        }
    }
}

/// Fenchel conjugate route: with f = -g + (indicator of supp Y),
/// `f*(x) = max_{z in supp Y} (x . z + g(z))`.
pub fn fenchel_conjugate<F>(market: &OnePeriodMarket, payoff: F, x: &Point) -> Result<f64>
where
    F: Fn(&Point) -> Option<f64>,
{
    if x.dim() != market.dimension() {
        return Err(Error::DimensionMismatch {
            expected: market.dimension(),
            found: x.dim(),
        });
    }
    let support = market.support();
    let mut best = f64::NEG_INFINITY;
    for z in support.points() {
        let g = payoff(z).ok_or_else(|| Error::MissingValue(z.to_string()))?;
        best = best.max(x.dot(z) + g);
    }
    Ok(best)
}

/// Biconjugate route for the price of Z = g(Y): the concave envelope of g
/// over supp Y evaluated at y, minus infinity when y lies outside the
/// hull of the support.
pub fn price_via_biconjugate<F>(market: &OnePeriodMarket, payoff: F, tol: f64) -> Result<f64>
where
    F: Fn(&Point) -> Option<f64>,
{
    let support = market.support();
    let mut samples = Vec::with_capacity(support.len());
    for z in support.points() {
        let g = payoff(z).ok_or_else(|| Error::MissingValue(z.to_string()))?;
        samples.push((z.clone(), g));
    }
    concave_envelope_eval(&samples, market.initial(), tol)
}

/// Classifies the market by the sign pattern of the support function of
/// the increment support.
pub fn closedness_diagnostic(market: &OnePeriodMarket, tol: f64) -> Closedness {
    let support = market.increment_support();
    if support.len() == 1 && support.points()[0].linf_norm() <= geometry::DEDUP_TOLERANCE {
        return Closedness::DegenerateClosed;
    }
    let origin = Point::zero(market.dimension());
    let membership = hull_membership(support.points(), &origin, tol)
        .expect("increment support is non-empty with consistent dimensions");
    if !membership.in_hull {
        return Closedness::NotClosed;
    }
    if membership.in_relative_interior
        && affine_rank(support.points(), tol) == market.dimension()
    {
        return Closedness::StrictlyClosed;
    }
    Closedness::BoundaryCase
}

/// Description of the full price set: its lower bound and whether the
/// bound is itself a price.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSetDescription {
    pub lower_bound: f64,
    /// `Some(true)` when the bound is attained; `None` when the bound is
    /// minus infinity and attainment is moot. At finite support a finite
    /// bound is always attained.
    pub closed_at_bound: Option<bool>,
}

pub fn price_set_description(
    market: &OnePeriodMarket,
    claim: &Claim,
    tol: f64,
) -> Result<PriceSetDescription> {
    let result = superhedge_price(market, claim, tol)?;
    let closed = match result.status {
        PriceStatus::Finite => Some(true),
        PriceStatus::InstantaneousProfit => None,
    };
    Ok(PriceSetDescription {
        lower_bound: result.price,
        closed_at_bound: closed,
    })
}

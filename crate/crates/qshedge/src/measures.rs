//! Discrete prior families, polar atoms, quasi-sure supports and the
//! quasi-sure essential supremum.
//!
//! A prior family is a finite set of probability vectors over one shared
//! atom list. An atom is polar when every prior gives it zero mass;
//! quasi-sure statements ignore polar atoms. The quasi-sure support of a
//! random variable is then simply the set of its values at non-polar
//! atoms, and the essential supremum of a family of scalar variables is
//! the largest value any of them takes on a non-polar atom.

use crate::geometry::{Point, DEDUP_TOLERANCE};
use crate::{Error, Result};

/// Atom weights above this threshold count as charged; at or below they
/// are structural zeros. Model authors who want an atom polar should give
/// it weight exactly zero.
pub const POLARITY_THRESHOLD: f64 = 1e-12;

/// A probability vector over the shared atom list.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPrior("no atoms".into()));
        }
        for (j, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidPrior(format!("weight {w} at atom {j}")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPrior(format!("weights sum to {total}")));
        }
        Ok(DiscreteMeasure { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn charges(&self, atom: usize) -> bool {
        self.weights[atom] > POLARITY_THRESHOLD
    }
}

/// Non-empty set of priors over one atom list; the discrete stand-in for
/// the set of all possible priors at a fixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorFamily {
    atom_count: usize,
    priors: Vec<DiscreteMeasure>,
}

impl PriorFamily {
    pub fn new(priors: Vec<DiscreteMeasure>) -> Result<Self> {
        let Some(first) = priors.first() else {
            return Err(Error::InvalidPrior("empty prior family".into()));
        };
        let atom_count = first.atom_count();
        for p in &priors {
            if p.atom_count() != atom_count {
                return Err(Error::DimensionMismatch {
                    expected: atom_count,
                    found: p.atom_count(),
                });
            }
        }
        Ok(PriorFamily { atom_count, priors })
    }

    /// Family with a single prior; the classical uni-prior setting.
    pub fn single(prior: DiscreteMeasure) -> Self {
        PriorFamily {
            atom_count: prior.atom_count(),
            priors: vec![prior],
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn priors(&self) -> &[DiscreteMeasure] {
        &self.priors
    }
}

/// Values of a random variable, one point per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    values: Vec<Point>,
}

impl RandomVariable {
    pub fn new(values: Vec<Point>) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(Error::EmptyFamily);
        };
        let dim = first.dim();
        for v in &values {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidMarket(format!("non-finite value {v}")));
            }
        }
        Ok(RandomVariable { values })
    }

    /// Scalar variable from one value per atom.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        RandomVariable::new(values.into_iter().map(Point::scalar).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn value(&self, atom: usize) -> &Point {
        &self.values[atom]
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }
}

/// Deduplicated, lexicographically sorted set of points in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    points: Vec<Point>,
}

impl SupportSet {
    /// Deduplicates with L-infinity tolerance, keeping the first
    /// representative of each cluster, then sorts lexicographically so
    /// reports are reproducible.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptySupport);
        };
        let dim = first.dim();
        let mut reps: Vec<Point> = Vec::new();
        for pt in &points {
            if pt.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: pt.dim(),
                });
            }
            if !reps.iter().any(|r| r.linf_dist(pt) <= DEDUP_TOLERANCE) {
                reps.push(pt.clone());
            }
        }
        reps.sort_by(|a, b| a.lex_cmp(b));
        Ok(SupportSet { points: reps })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Index of the support point matching `pt` within the dedup tolerance.
    pub fn position(&self, pt: &Point) -> Option<usize> {
        self.points
            .iter()
            .position(|r| r.linf_dist(pt) <= DEDUP_TOLERANCE)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        self.position(pt).is_some()
    }

    /// Coordinates as plain numbers; only defined for d = 1.
    pub fn scalar_values(&self) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::DimensionError { found: self.dim() });
        }
        Ok(self.points.iter().map(|p| p.coord(0)).collect())
    }
}

/// Atoms charged by at least one prior, in ascending order. The complement
/// is exactly the set of polar atoms.
pub fn relevant_atoms(family: &PriorFamily) -> Vec<usize> {
    (0..family.atom_count())
        .filter(|&j| family.priors().iter().any(|p| p.charges(j)))
        .collect()
}

/// Quasi-sure support of `x`: its values at non-polar atoms, deduplicated.
///
/// For finite discrete laws the intersection of closed full-measure sets
/// is the set of charged values, so no topology is involved.
pub fn quasi_support(family: &PriorFamily, x: &RandomVariable) -> Result<SupportSet> {
    if x.len() != family.atom_count() {
        return Err(Error::DimensionMismatch {
            expected: family.atom_count(),
            found: x.len(),
        });
    }
    let charged: Vec<Point> = relevant_atoms(family)
        .into_iter()
        .map(|j| x.value(j).clone())
        .collect();
    SupportSet::from_points(charged)
}

/// Quasi-sure essential supremum of a finite family of scalar variables:
/// the least y with y >= X_i quasi-surely for every i, which here is the
/// maximum over charged atoms and variables.
pub fn essential_supremum(family: &PriorFamily, variables: &[RandomVariable]) -> Result<f64> {
    if variables.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for v in variables {
        if v.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: v.dim(),
            });
        }
        if v.len() != family.atom_count() {
            return Err(Error::DimensionMismatch {
                expected: family.atom_count(),
                found: v.len(),
            });
        }
    }
    let atoms = relevant_atoms(family);
    let mut best = f64::NEG_INFINITY;
    for v in variables {
        for &j in &atoms {
            best = best.max(v.value(j).coord(0));
        }
    }
    Ok(best)
}

/// Essential supremum of `h(X)`: the supremum of `h` on the quasi-sure
/// support of `x`. Equals `essential_supremum` of the composed variable.
pub fn essup_of_function<F>(family: &PriorFamily, x: &RandomVariable, h: F) -> Result<f64>
where
    F: Fn(&Point) -> Option<f64>,
{
    let support = quasi_support(family, x)?;
    let mut best = f64::NEG_INFINITY;
    for pt in support.points() {
        match h(pt) {
            Some(v) => best = best.max(v),
            None => return Err(Error::MissingValue(pt.to_string())),
        }
    }
    Ok(best)
}

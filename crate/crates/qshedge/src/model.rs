//! JSON model files: the single input format of the CLI and the FFI.
//!
//! A model file is a JSON object with a `"schema": 1 version field and a
//! `"kind"` discriminator, either `"one_period"` or `"tree"`:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kind": "one_period",
//!   "d": 1,
//!   "y": [100.0],
//!   "atoms": [
//!     {"y": [80.0], "label": "down"},
//!     {"y": [120.0], "label": "up"}
//!   ],
//!   "priors": [[0.5, 0.5]],
//!   "payoff": {"call": {"strike": 100.0}}
//! }
//! ```
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kind": "tree",
//!   "horizon": 1,
//!   "nodes": [
//!     {"id": 0, "depth": 0, "price": [100.0], "children": [1, 2],
//!      "child_priors": [[0.5, 0.5]]},
//!     {"id": 1, "depth": 1, "price": [80.0]},
//!     {"id": 2, "depth": 1, "price": [120.0]}
//!   ],
//!   "payoff": {"call": {"strike": 100.0}}
//! }
//! ```
//!
//! Numbers must be finite doubles; prior weights must lie in
//! [0, 1 + 1e-9] and sum to one per prior unless normalization is asked
//! for explicitly. Parsing then serializing then re-parsing reproduces
//! the in-memory model bit for bit.

use crate::geometry::Point;
use crate::measures::{DiscreteMeasure, PriorFamily, RandomVariable};
use crate::multiperiod::{ScenarioTree, TreeNode};
use crate::pricing::{Claim, OnePeriodMarket};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: u32,
    #[serde(flatten)]
    pub payload: ModelPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPayload {
    OnePeriod(OnePeriodModel),
    Tree(TreeModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnePeriodModel {
    pub d: usize,
    pub y: Vec<f64>,
    pub atoms: Vec<AtomSpec>,
    pub priors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<PayoffSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Terminal prices Y at this atom.
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Claim value Z at this atom, for claims that are not derivatives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub horizon: usize,
    pub nodes: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_payoff: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<PayoffSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: usize,
    pub depth: usize,
    pub price: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child_priors: Option<Vec<Vec<f64>>>,
}

/// Payoff g applied to terminal prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffSpec {
    Call { strike: f64 },
    Put { strike: f64 },
    Linear { coeffs: Vec<f64> },
    Table { entries: Vec<TableEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub point: Vec<f64>,
    pub value: f64,
}

impl PayoffSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => {
                if !strike.is_finite() || *strike < 0.0 {
                    return Err(Error::Parse(format!("strike {strike} must be >= 0")));
                }
                if dim != 1 {
                    return Err(Error::ClaimMismatch(format!(
                        "call/put payoffs need d = 1, market has d = {dim}"
                    )));
                }
            }
            PayoffSpec::Linear { coeffs } => {
                if coeffs.len() != dim {
                    return Err(Error::ClaimMismatch(format!(
                        "{} linear coefficients for d = {dim}",
                        coeffs.len()
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parse("non-finite linear coefficient".into()));
                }
            }
            PayoffSpec::Table { entries } => {
                for e in entries {
                    if e.point.len() != dim {
                        return Err(Error::ClaimMismatch(format!(
                            "table point of dimension {} for d = {dim}",
                            e.point.len()
                        )));
                    }
                    if e.point.iter().any(|c| !c.is_finite()) || !e.value.is_finite() {
                        return Err(Error::Parse("non-finite table entry".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluates g at a terminal price; `None` when a table misses it.
    pub fn evaluate(&self, z: &Point) -> Option<f64> {
        match self {
            PayoffSpec::Call { strike } => Some((z.coord(0) - strike).max(0.0)),
            PayoffSpec::Put { strike } => Some((strike - z.coord(0)).max(0.0)),
            PayoffSpec::Linear { coeffs } => Some(
                coeffs
                    .iter()
                    .zip(z.coords())
                    .map(|(c, x)| c * x)
                    .sum(),
            ),
            PayoffSpec::Table { entries } => entries
                .iter()
                .find(|e| {
                    e.point.len() == z.dim()
                        && e.point
                            .iter()
                            .zip(z.coords())
                            .all(|(a, b)| (a - b).abs() <= crate::DEDUP_TOLERANCE)
                })
                .map(|e| e.value),
        }
    }

    /// Parses the CLI shorthand `call:K`, `put:K`, `linear:c1,c2,...`.
    pub fn parse_flag(text: &str) -> Result<Self> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("payoff '{text}' is not kind:args")))?;
        let bad_num =
            |v: &str| Error::Parse(format!("payoff '{text}': '{v}' is not a number"));
        match kind {
            "call" => Ok(PayoffSpec::Call {
                strike: rest.parse().map_err(|_| bad_num(rest))?,
            }),
            "put" => Ok(PayoffSpec::Put {
                strike: rest.parse().map_err(|_| bad_num(rest))?,
            }),
            "linear" => {
                let coeffs = rest
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad_num(v)))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(PayoffSpec::Linear { coeffs })
            }
            other => Err(Error::Parse(format!("unknown payoff kind '{other}'"))),
        }
    }
}

/// Parses a model file, enforcing the schema version and finiteness.
pub fn parse_model(json: &str) -> Result<ModelFile> {
    let file: ModelFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if file.schema != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema {}, expected {SCHEMA_VERSION}",
            file.schema
        )));
    }
    Ok(file)
}

/// Serializes a model back to JSON; used by the round-trip checks.
pub fn serialize_model(model: &ModelFile) -> String {
    serde_json::to_string_pretty(model).expect("model files always serialize")
}

fn check_weights(weights: &[f64], normalize: bool) -> Result<Vec<f64>> {
    for w in weights {
        // Normalization lifts the upper bound but never the sign.
        let in_range = w.is_finite() && *w >= 0.0 && (normalize || *w <= 1.0 + 1e-9);
        if !in_range {
            return Err(Error::InvalidPrior(format!("weight {w} out of range")));
        }
    }
    if normalize {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPrior("weights sum to zero".into()));
        }
        Ok(weights.iter().map(|w| w / total).collect())
    } else {
        Ok(weights.to_vec())
    }
}

fn build_priors(lists: &[Vec<f64>], normalize: bool) -> Result<PriorFamily> {
    let priors = lists
        .iter()
        .map(|w| DiscreteMeasure::new(check_weights(w, normalize)?))
        .collect::<Result<Vec<_>>>()?;
    PriorFamily::new(priors)
}

fn finite_point(coords: &[f64], what: &str) -> Result<Point> {
    if coords.is_empty() {
        return Err(Error::Parse(format!("{what}: empty coordinate list")));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parse(format!("{what}: non-finite coordinate")));
    }
    Ok(Point::new(coords.to_vec()))
}

impl OnePeriodModel {
    pub fn to_market(&self, normalize: bool) -> Result<OnePeriodMarket> {
        if self.y.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.y.len(),
            });
        }
        let y = finite_point(&self.y, "initial price")?;
        let mut terminal = Vec::with_capacity(self.atoms.len());
        for (j, atom) in self.atoms.iter().enumerate() {
            if atom.y.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    found: atom.y.len(),
                });
            }
            terminal.push(finite_point(&atom.y, &format!("atom {j}"))?);
        }
        let priors = build_priors(&self.priors, normalize)?;
        OnePeriodMarket::new(y, RandomVariable::new(terminal)?, priors)
    }

    /// Claim from the atom table, when every atom carries one.
    pub fn per_atom_claim(&self) -> Option<Claim> {
        let values: Option<Vec<f64>> = self.atoms.iter().map(|a| a.claim).collect();
        values.map(Claim::PerAtom)
    }

    /// Resolves the claim to price: an explicit payoff wins, then the
    /// model's payoff, then per-atom claim values.
    pub fn resolve_claim(
        &self,
        market: &OnePeriodMarket,
        flag_payoff: Option<&PayoffSpec>,
    ) -> Result<(Claim, Option<PayoffSpec>)> {
        let spec = flag_payoff.or(self.payoff.as_ref());
        if let Some(spec) = spec {
            spec.validate(market.dimension())?;
            let mut table = Vec::new();
            for z in market.support().points() {
                let g = spec
                    .evaluate(z)
                    .ok_or_else(|| Error::MissingValue(z.to_string()))?;
                table.push((z.clone(), g));
            }
            return Ok((Claim::OnSupport(table), Some(spec.clone())));
        }
        match self.per_atom_claim() {
            Some(claim) => Ok((claim, None)),
            None => Err(Error::ClaimMismatch(
                "no payoff given and not every atom carries a claim value".into(),
            )),
        }
    }
}

impl TreeModel {
    pub fn to_tree(&self, normalize: bool) -> Result<ScenarioTree> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for spec in &self.nodes {
            let price = finite_point(&spec.price, &format!("node {}", spec.id))?;
            let child_priors = match &spec.child_priors {
                Some(lists) => Some(build_priors(lists, normalize)?),
                None => None,
            };
            nodes.push(TreeNode {
                id: spec.id,
                depth: spec.depth,
                price,
                children: spec.children.clone(),
                child_priors,
            });
        }
        ScenarioTree::new(nodes, self.horizon)
    }

    /// Terminal payoff per reachable leaf: the explicit map wins, then a
    /// payoff spec evaluated at leaf prices.
    pub fn resolve_terminal_payoff(
        &self,
        tree: &ScenarioTree,
        flag_payoff: Option<&PayoffSpec>,
    ) -> Result<BTreeMap<usize, f64>> {
        if flag_payoff.is_none() {
            if let Some(map) = &self.terminal_payoff {
                let mut out = BTreeMap::new();
                for (key, value) in map {
                    let id: usize = key
                        .parse()
                        .map_err(|_| Error::Parse(format!("leaf id '{key}'")))?;
                    if !value.is_finite() {
                        return Err(Error::Parse(format!("non-finite payoff at leaf {id}")));
                    }
                    out.insert(id, *value);
                }
                return Ok(out);
            }
        }
        let spec = flag_payoff.or(self.payoff.as_ref()).ok_or_else(|| {
            Error::ClaimMismatch("tree carries neither terminal payoffs nor a payoff".into())
        })?;
        spec.validate(tree.dimension())?;
        let mut out = BTreeMap::new();
        for node in tree.nodes().filter(|n| n.children.is_empty()) {
            let g = spec
                .evaluate(&node.price)
                .ok_or_else(|| Error::MissingValue(node.price.to_string()))?;
            out.insert(node.id, g);
        }
        Ok(out)
    }
}

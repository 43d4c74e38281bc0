//! Scenario trees: per-node prior families, local and global no-arbitrage
//! diagnostics, and backward superhedging.
//!
//! Each non-leaf node carries the prices of its children and a prior
//! family over the child atoms, chosen independently node by node (the
//! multi-period prior set is the rectangular product of these kernels).
//! A node is reachable when every edge on its root path is charged by
//! some parent prior; quasi-sure statements only bind on reachable nodes.
//!
//! The global AIP condition is equivalent to the one-step AIP condition
//! at every reachable non-leaf node, which is what [`global_aip`] checks;
//! [`brute_force_global_ip`] searches for an explicit multi-period profit
//! on a strategy grid and serves as the independent oracle for that
//! equivalence.

use crate::arbitrage::{classify, MarketClass};
use crate::geometry::Point;
use crate::measures::{relevant_atoms, PriorFamily, RandomVariable};
use crate::pricing::{superhedge_price, Claim, OnePeriodMarket, PriceStatus};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// One node of a scenario tree.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    /// Discounted asset prices S_t at this node.
    pub price: Point,
    /// Child node ids in atom order; empty at leaves.
    pub children: Vec<usize>,
    /// Prior family over the children; `None` at leaves.
    pub child_priors: Option<PriorFamily>,
}

/// Rooted tree with all leaves at the horizon depth.
#[derive(Debug, Clone)]
pub struct ScenarioTree {
    nodes: BTreeMap<usize, TreeNode>,
    horizon: usize,
    root: usize,
}

impl ScenarioTree {
    /// Validating constructor; see [`validate_tree`] for the rules.
    pub fn new(nodes: Vec<TreeNode>, horizon: usize) -> Result<Self> {
        let map: BTreeMap<usize, TreeNode> = nodes.into_iter().map(|n| (n.id, n)).collect();
        let root = validate(&map, horizon)?;
        Ok(ScenarioTree {
            nodes: map,
            horizon,
            root,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn node(&self, id: usize) -> Option<&TreeNode> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.keys().copied()
    }

    pub fn dimension(&self) -> usize {
        self.nodes[&self.root].price.dim()
    }
}

/// Re-runs every structural invariant on an already built tree.
pub fn validate_tree(tree: &ScenarioTree) -> Result<()> {
    validate(&tree.nodes, tree.horizon).map(|_| ())
}

fn validate(nodes: &BTreeMap<usize, TreeNode>, horizon: usize) -> Result<usize> {
    if nodes.is_empty() {
        return Err(Error::MalformedTree("no nodes".into()));
    }
    let dim = nodes.values().next().map(|n| n.price.dim()).unwrap_or(1);

    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for node in nodes.values() {
        if !node.price.is_finite() {
            return Err(Error::MalformedTree(format!(
                "node {}: non-finite price",
                node.id
            )));
        }
        if node.price.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: node.price.dim(),
            });
        }
        if node.price.coords().iter().any(|&c| c < 0.0) {
            return Err(Error::NegativePrice(node.id));
        }
        for &child in &node.children {
            let child_node = nodes
                .get(&child)
                .ok_or_else(|| Error::MalformedTree(format!("missing child node {child}")))?;
            if parent.insert(child, node.id).is_some() {
                return Err(Error::CycleDetected(child));
            }
            if child_node.depth != node.depth + 1 {
                return Err(Error::RaggedDepth {
                    node: child,
                    depth: child_node.depth,
                    horizon,
                });
            }
        }
        match (&node.child_priors, node.children.is_empty()) {
            (Some(priors), false) => {
                if priors.atom_count() != node.children.len() {
                    return Err(Error::PriorArityMismatch {
                        node: node.id,
                        weights: priors.atom_count(),
                        children: node.children.len(),
                    });
                }
            }
            (None, false) => {
                return Err(Error::PriorArityMismatch {
                    node: node.id,
                    weights: 0,
                    children: node.children.len(),
                });
            }
            (Some(_), true) => {
                return Err(Error::MalformedTree(format!(
                    "leaf {} carries child priors",
                    node.id
                )));
            }
            (None, true) => {}
        }
        // A leaf must sit exactly at the horizon.
        if node.children.is_empty() && node.depth != horizon {
            return Err(Error::RaggedDepth {
                node: node.id,
                depth: node.depth,
                horizon,
            });
        }
    }

    let roots: Vec<usize> = nodes
        .keys()
        .filter(|id| !parent.contains_key(id))
        .copied()
        .collect();
    let root = match roots.as_slice() {
        [] => return Err(Error::CycleDetected(*nodes.keys().next().unwrap())),
        [r] => *r,
        more => {
            return Err(Error::MalformedTree(format!(
                "multiple roots: {more:?}"
            )))
        }
    };
    if nodes[&root].depth != 0 {
        return Err(Error::RaggedDepth {
            node: root,
            depth: nodes[&root].depth,
            horizon,
        });
    }
    // Every node must hang off the root.
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            return Err(Error::CycleDetected(id));
        }
        stack.extend(&nodes[&id].children);
    }
    if seen.len() != nodes.len() {
        let orphan = nodes.keys().find(|id| !seen.contains(id)).unwrap();
        return Err(Error::MalformedTree(format!(
            "node {orphan} is not connected to the root"
        )));
    }
    Ok(root)
}

/// Nodes whose whole root path is charged: the root always, a child iff
/// its parent is reachable and its edge atom is charged by some parent
/// prior. Subtrees behind a polar edge are excluded wholesale.
pub fn reachable_nodes(tree: &ScenarioTree) -> BTreeSet<usize> {
    let mut reachable = BTreeSet::new();
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        reachable.insert(id);
        let node = &tree.nodes[&id];
        if let Some(priors) = &node.child_priors {
            for atom in relevant_atoms(priors) {
                stack.push(node.children[atom]);
            }
        }
    }
    reachable
}

/// One-step market at a non-leaf node: y is the node price, the atoms are
/// the children with their prices, and the priors are the node's kernel.
pub fn one_step_market(tree: &ScenarioTree, node_id: usize) -> Result<OnePeriodMarket> {
    let node = tree
        .node(node_id)
        .ok_or_else(|| Error::MalformedTree(format!("no node {node_id}")))?;
    if node.children.is_empty() {
        return Err(Error::LeafNode(node_id));
    }
    let prices: Vec<Point> = node
        .children
        .iter()
        .map(|&c| tree.nodes[&c].price.clone())
        .collect();
    let priors = node
        .child_priors
        .clone()
        .expect("validated non-leaf carries priors");
    OnePeriodMarket::new(node.price.clone(), RandomVariable::new(prices)?, priors)
}

/// Tree-wide diagnostic: the one-step class of every reachable non-leaf
/// node that is not plainly NA, in ascending node order.
#[derive(Debug, Clone)]
pub struct GlobalReport {
    pub global_aip: bool,
    pub global_na: bool,
    /// Reachable non-leaf nodes failing a one-step condition: `Ip` nodes
    /// break AIP (and NA), `AipOnly` nodes break NA alone.
    pub failing_nodes: Vec<(usize, MarketClass)>,
}

impl GlobalReport {
    /// Nodes where the one-step AIP condition fails.
    pub fn aip_failures(&self) -> Vec<usize> {
        self.failing_nodes
            .iter()
            .filter(|(_, class)| *class == MarketClass::Ip)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Nodes where the one-step NA condition fails.
    pub fn na_failures(&self) -> Vec<usize> {
        self.failing_nodes.iter().map(|(id, _)| *id).collect()
    }
}

/// Global AIP holds iff the one-step AIP condition holds at every
/// reachable non-leaf node; violations on polar subtrees are ignored.
pub fn global_aip(tree: &ScenarioTree, tol: f64) -> GlobalReport {
    let reachable = reachable_nodes(tree);
    let mut failing = Vec::new();
    for id in &reachable {
        let node = &tree.nodes[id];
        if node.children.is_empty() {
            continue;
        }
        let market = one_step_market(tree, *id).expect("validated non-leaf node");
        let class = classify(&market, tol);
        if class != MarketClass::Na {
            failing.push((*id, class));
        }
    }
    let global_aip = failing.iter().all(|(_, c)| *c != MarketClass::Ip);
    let global_na = failing.is_empty();
    GlobalReport {
        global_aip,
        global_na,
        failing_nodes: failing,
    }
}

/// Global NA: relative-interior membership of 0 at every reachable
/// non-leaf node. Returns the verdict and the failing node ids.
pub fn global_na(tree: &ScenarioTree, tol: f64) -> (bool, Vec<usize>) {
    let report = global_aip(tree, tol);
    (report.global_na, report.na_failures())
}

/// Value assigned to a node by the backward recursion.
#[derive(Debug, Clone)]
pub enum NodeValue {
    /// Superhedging cost of the remaining subtree, with the optimal hedge
    /// at non-leaf nodes.
    Priced { value: f64, theta: Option<Point> },
    /// Node lies behind a polar edge: the recursion puts no constraint on
    /// it and never reads it upstream.
    Unreachable,
}

impl NodeValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            NodeValue::Priced { value, .. } => Some(*value),
            NodeValue::Unreachable => None,
        }
    }
}

/// Backward superhedging recursion: reachable leaves take their payoff,
/// every reachable internal node takes the one-step superhedging price of
/// its children's values (rows for polar children are dropped), and the
/// root value is the composed superhedging cost.
///
/// The first node whose one-step program is unbounded below aborts the
/// recursion with `GlobalIpDetected`; by the local-global equivalence
/// this happens iff global AIP fails on the reachable tree.
pub fn backward_superhedge(
    tree: &ScenarioTree,
    terminal_payoff: &BTreeMap<usize, f64>,
    tol: f64,
) -> Result<BTreeMap<usize, NodeValue>> {
    let reachable = reachable_nodes(tree);
    let mut values: BTreeMap<usize, NodeValue> = BTreeMap::new();

    let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for node in tree.nodes() {
        by_depth.entry(node.depth).or_default().push(node.id);
    }

    for (&depth, ids) in by_depth.iter().rev() {
        for &id in ids {
            if !reachable.contains(&id) {
                values.insert(id, NodeValue::Unreachable);
                continue;
            }
            let node = &tree.nodes[&id];
            if depth == tree.horizon() {
                let payoff = terminal_payoff.get(&id).ok_or_else(|| {
                    Error::ClaimMismatch(format!("no terminal payoff for reachable leaf {id}"))
                })?;
                if !payoff.is_finite() {
                    return Err(Error::ClaimMismatch(format!(
                        "non-finite payoff at leaf {id}"
                    )));
                }
                values.insert(
                    id,
                    NodeValue::Priced {
                        value: *payoff,
                        theta: None,
                    },
                );
                continue;
            }
            let market = one_step_market(tree, id).expect("validated non-leaf node");
            let child_values: Vec<f64> = node
                .children
                .iter()
                .map(|c| match &values[c] {
                    NodeValue::Priced { value, .. } => *value,
                    // Polar children never constrain the hedge; their rows
                    // disappear because the claim value is irrelevant on a
                    // zero-weight atom. Any finite placeholder works.
                    NodeValue::Unreachable => 0.0,
                })
                .collect();
            let result = superhedge_price(&market, &Claim::PerAtom(child_values), tol)?;
            match result.status {
                PriceStatus::InstantaneousProfit => return Err(Error::GlobalIpDetected(id)),
                PriceStatus::Finite => {
                    values.insert(
                        id,
                        NodeValue::Priced {
                            value: result.price,
                            theta: result.theta_hat,
                        },
                    );
                }
            }
        }
    }
    Ok(values)
}

/// Exhaustive grid search for a multi-period instantaneous profit.
///
/// For every reachable node, every deterministic strategy sequence on the
/// grid `{-radius, ..., radius}^d` per remaining period is tested: a
/// profit exists when the worst terminal wealth over the reachable
/// subtree paths still exceeds some positive grid value epsilon. One
/// sided by construction: a hit certifies a genuine IP; a miss only rules
/// out grid strategies.
pub fn brute_force_global_ip(tree: &ScenarioTree, grid_radius: f64, grid_step: f64) -> Result<bool> {
    if tree.horizon() > 4 {
        return Err(Error::ScaleExceeded(format!(
            "horizon {} exceeds oracle depth 4",
            tree.horizon()
        )));
    }
    if tree.nodes().any(|n| n.children.len() > 4) {
        return Err(Error::ScaleExceeded("branching exceeds 4".into()));
    }
    if grid_step.is_nan() || grid_step <= 0.0 || grid_radius < grid_step {
        return Err(Error::ScaleExceeded(format!(
            "bad grid: radius {grid_radius}, step {grid_step}"
        )));
    }
    let dim = tree.dimension();
    let per_axis = (2.0 * grid_radius / grid_step).round() as usize + 1;
    let grid: Vec<f64> = (0..per_axis)
        .map(|i| -grid_radius + i as f64 * grid_step)
        .collect();
    let points_per_period = per_axis.pow(dim as u32);
    let epsilon = grid_step;

    let reachable = reachable_nodes(tree);
    for &start in &reachable {
        let node = &tree.nodes[&start];
        if node.children.is_empty() {
            continue;
        }
        let periods = tree.horizon() - node.depth;
        let combos = (points_per_period as u128).pow(periods as u32);
        if combos > 2_000_000 {
            return Err(Error::ScaleExceeded(format!(
                "{combos} strategy sequences at node {start}"
            )));
        }
        let mut sequence = vec![0usize; periods];
        loop {
            let thetas: Vec<Point> = sequence
                .iter()
                .map(|&code| decode_theta(code, &grid, dim))
                .collect();
            let worst = worst_wealth(tree, &reachable, start, &thetas, 0);
            if worst >= epsilon - 1e-12 {
                return Ok(true);
            }
            if !advance_mixed(&mut sequence, points_per_period) {
                break;
            }
        }
    }
    Ok(false)
}

fn decode_theta(mut code: usize, grid: &[f64], dim: usize) -> Point {
    let mut coords = Vec::with_capacity(dim);
    for _ in 0..dim {
        coords.push(grid[code % grid.len()]);
        code /= grid.len();
    }
    Point::new(coords)
}

fn advance_mixed(sequence: &mut [usize], base: usize) -> bool {
    for slot in sequence.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Minimum terminal wealth over reachable paths below `node` when the
/// strategy plays `thetas[k]` over period k of the remaining horizon.
fn worst_wealth(
    tree: &ScenarioTree,
    reachable: &BTreeSet<usize>,
    node_id: usize,
    thetas: &[Point],
    period: usize,
) -> f64 {
    let node = &tree.nodes[&node_id];
    if node.children.is_empty() {
        return 0.0;
    }
    let priors = node.child_priors.as_ref().expect("non-leaf carries priors");
    let mut worst = f64::INFINITY;
    for atom in relevant_atoms(priors) {
        let child = node.children[atom];
        if !reachable.contains(&child) {
            continue;
        }
        let gain = thetas[period].dot(&tree.nodes[&child].price.minus(&node.price));
        let below = worst_wealth(tree, reachable, child, thetas, period + 1);
        worst = worst.min(gain + below);
    }
    worst
}

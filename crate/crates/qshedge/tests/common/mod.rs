#![allow(clippy::needless_range_loop)]

//! Shared helpers for the integration suites: a deterministic RNG and
//! random model generators. Everything is seeded, so failures reproduce.

#![allow(dead_code)]

use qshedge::measures::{DiscreteMeasure, PriorFamily, RandomVariable};
use qshedge::multiperiod::{ScenarioTree, TreeNode};
use qshedge::pricing::{Claim, OnePeriodMarket};
use qshedge::Point;

/// SplitMix64; plenty for test-data generation.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    pub fn usize(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.f64() < p
    }
}

/// Random prior family over `atoms` atoms; with `plant_zeros`, individual
/// weights (never a whole prior) are zeroed before normalization.
pub fn random_prior_family(
    rng: &mut Rng,
    atoms: usize,
    prior_count: usize,
    plant_zeros: bool,
) -> PriorFamily {
    let mut priors = Vec::with_capacity(prior_count);
    for _ in 0..prior_count {
        let mut weights: Vec<f64> = (0..atoms).map(|_| rng.range(0.05, 1.0)).collect();
        if plant_zeros {
            for w in weights.iter_mut() {
                if rng.chance(0.25) {
                    *w = 0.0;
                }
            }
            if weights.iter().all(|&w| w == 0.0) {
                weights[rng.usize(atoms)] = 1.0;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        priors.push(DiscreteMeasure::new(weights).expect("normalized weights"));
    }
    PriorFamily::new(priors).expect("non-empty prior list")
}

/// Random market with terminal prices on a coarse grid. `inside` decides
/// whether y is sampled inside the convex hull of the terminal support
/// (as a convex combination of charged atoms) or strictly outside it
/// (beyond the coordinate-wise maximum along one axis).
pub fn random_market(
    rng: &mut Rng,
    dim: usize,
    atoms: usize,
    prior_count: usize,
    inside: bool,
) -> OnePeriodMarket {
    let priors = random_prior_family(rng, atoms, prior_count, true);
    let terminal: Vec<Point> = (0..atoms)
        .map(|_| Point::new((0..dim).map(|_| rng.int(1, 40) as f64 * 5.0).collect()))
        .collect();
    let charged: Vec<usize> = qshedge::measures::relevant_atoms(&priors);
    let y = if inside {
        let mut weights: Vec<f64> = charged.iter().map(|_| rng.range(0.05, 1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mut coords = vec![0.0; dim];
        for (&j, w) in charged.iter().zip(&weights) {
            for k in 0..dim {
                coords[k] += w * terminal[j].coord(k);
            }
        }
        // A coordinate constant across the charged support must carry
        // over exactly, not up to summation dust, or the sample sits a
        // few ulps outside the hull instead of inside it.
        for k in 0..dim {
            let lo = charged
                .iter()
                .map(|&j| terminal[j].coord(k))
                .fold(f64::INFINITY, f64::min);
            let hi = charged
                .iter()
                .map(|&j| terminal[j].coord(k))
                .fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                coords[k] = lo;
            }
        }
        Point::new(coords)
    } else {
        let axis = rng.usize(dim);
        let max_along = charged
            .iter()
            .map(|&j| terminal[j].coord(axis))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut coords: Vec<f64> = (0..dim)
            .map(|k| {
                let mean = charged.iter().map(|&j| terminal[j].coord(k)).sum::<f64>()
                    / charged.len() as f64;
                mean
            })
            .collect();
        coords[axis] = max_along + 1.0 + rng.range(0.0, 20.0);
        Point::new(coords)
    };
    OnePeriodMarket::new(
        y,
        RandomVariable::new(terminal).expect("finite terminal prices"),
        priors,
    )
    .expect("generated market is valid")
}

/// Random payoff table over the market's support, values on a coarse grid.
pub fn random_table(rng: &mut Rng, market: &OnePeriodMarket) -> Vec<(Point, f64)> {
    market
        .support()
        .points()
        .iter()
        .map(|z| (z.clone(), rng.int(-20, 20) as f64 * 0.5))
        .collect()
}

pub fn table_claim(table: &[(Point, f64)]) -> Claim {
    Claim::OnSupport(table.to_vec())
}

pub fn table_fn(table: &[(Point, f64)]) -> impl Fn(&Point) -> Option<f64> + '_ {
    move |z: &Point| {
        table
            .iter()
            .find(|(pt, _)| pt.linf_dist(z) <= 1e-12)
            .map(|(_, g)| *g)
    }
}

/// Random scalar tree. Prices live on an integer grid so planted
/// violations align with the brute-force strategy grid. `bracket` forces
/// every node's children to straddle its price (global AIP and NA hold);
/// otherwise children drift freely and violations arise naturally.
pub fn random_tree(rng: &mut Rng, depth: usize, max_branching: usize, bracket: bool) -> ScenarioTree {
    let mut nodes = Vec::new();
    let mut next_id = 0usize;
    let root_price = rng.int(50, 150) as f64;
    build_subtree(
        rng,
        &mut nodes,
        &mut next_id,
        0,
        depth,
        max_branching,
        root_price,
        bracket,
    );
    ScenarioTree::new(nodes, depth).expect("generated tree is valid")
}

#[allow(clippy::too_many_arguments)]
fn build_subtree(
    rng: &mut Rng,
    nodes: &mut Vec<TreeNode>,
    next_id: &mut usize,
    depth: usize,
    horizon: usize,
    max_branching: usize,
    price: f64,
    bracket: bool,
) -> usize {
    let id = *next_id;
    *next_id += 1;
    if depth == horizon {
        nodes.push(TreeNode {
            id,
            depth,
            price: Point::scalar(price),
            children: Vec::new(),
            child_priors: None,
        });
        return id;
    }
    let branching = 1 + rng.usize(max_branching);
    let child_prices: Vec<f64> = if bracket && branching >= 2 {
        // One child strictly below, one strictly above, the rest anywhere.
        let mut prices = vec![
            (price - rng.int(5, 30) as f64).max(1.0),
            price + rng.int(5, 30) as f64,
        ];
        for _ in 2..branching {
            prices.push((price + rng.int(-30, 30) as f64).max(1.0));
        }
        prices
    } else {
        (0..branching)
            .map(|_| (price + rng.int(-30, 30) as f64).max(1.0))
            .collect()
    };
    let child_ids: Vec<usize> = child_prices
        .iter()
        .map(|&p| {
            build_subtree(
                rng,
                nodes,
                next_id,
                depth + 1,
                horizon,
                max_branching,
                p,
                bracket,
            )
        })
        .collect();
    // Priors over the children; zeros allowed except that some child stays
    // charged under the union (the family invariant needs one positive
    // weight per prior anyway).
    let prior_count = 1 + rng.usize(2);
    let priors = random_prior_family(rng, branching, prior_count, branching > 1);
    nodes.push(TreeNode {
        id,
        depth,
        price: Point::scalar(price),
        children: child_ids,
        child_priors: Some(priors),
    });
    id
}

/// Index of one hull vertex of the support: the point maximizing a random
/// linear functional, accepted only when the maximum is strict.
pub fn strict_vertex(rng: &mut Rng, points: &[Point]) -> Option<usize> {
    let dim = points[0].dim();
    for _ in 0..20 {
        let direction: Vec<f64> = (0..dim).map(|_| rng.range(-1.0, 1.0)).collect();
        let scores: Vec<f64> = points
            .iter()
            .map(|p| p.coords().iter().zip(&direction).map(|(a, b)| a * b).sum())
            .collect();
        let (best, &best_score) = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let strict = scores
            .iter()
            .enumerate()
            .all(|(i, &s)| i == best || s < best_score - 1e-6);
        if strict {
            return Some(best);
        }
    }
    None
}

//! Seeded generators for suite inputs.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::spaces::{FiniteMetricSpace, GridMetric};
use crate::trees::{FinTree, Seq};

/// Random subset of a small grid with between `min_points` and `max_points`
/// points: a segment of `Z` or a square of `Z^2` (taxicab or Chebyshev).
pub fn random_grid_subset<R: Rng>(rng: &mut R, min_points: usize, max_points: usize, label: &str) -> FiniteMetricSpace {
    let two_d = rng.gen_bool(0.6);
    let (grid, metric): (Vec<Vec<i64>>, GridMetric) = if two_d {
        let h: i64 = if max_points > 25 { 4 } else { 3 };
        let metric = if rng.gen_bool(0.5) {
            GridMetric::Taxicab
        } else {
            GridMetric::Chebyshev
        };
        let pts = (-h..=h).flat_map(|x| (-h..=h).map(move |y| vec![x, y])).collect();
        (pts, metric)
    } else {
        let h: i64 = (max_points as i64).max(8);
        ((-h..=h).map(|x| vec![x]).collect(), GridMetric::Taxicab)
    };
    let hi = max_points.min(grid.len());
    let count = rng.gen_range(min_points.min(hi)..=hi);
    let pts = sample(rng, grid.len(), count)
        .into_iter()
        .map(|i| grid[i].clone())
        .collect();
    FiniteMetricSpace::from_coords(label, pts, metric).expect("distinct grid points")
}

/// Random tree with depth at most `max_depth` and at most `max_branch`
/// children per node; leaves become likelier with depth.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize, max_branch: usize) -> FinTree {
    if rng.gen_bool(0.03) {
        return FinTree::empty();
    }
    let mut nodes: BTreeSet<Seq> = BTreeSet::new();
    let mut stack: Vec<Seq> = vec![Vec::new()];
    while let Some(s) = stack.pop() {
        let depth = s.len();
        if depth < max_depth && !rng.gen_bool((0.2 + 0.18 * depth as f64).min(0.95)) {
            let k = rng.gen_range(1..=max_branch);
            for label in sample(rng, 2 * max_branch, k) {
                let mut c = s.clone();
                c.push(label as u64);
                stack.push(c);
            }
        }
        nodes.insert(s);
    }
    FinTree::new(nodes).expect("built prefix-closed")
}

/// Every tree with at most `max_nodes` nodes whose labels come from
/// `0..alphabet`, the empty tree included.
pub fn small_trees(max_nodes: usize, alphabet: u64) -> Vec<FinTree> {
    let mut seen: BTreeSet<BTreeSet<Seq>> = BTreeSet::new();
    let mut frontier = vec![BTreeSet::from([Vec::new()])];
    while let Some(t) = frontier.pop() {
        if !seen.insert(t.clone()) || t.len() == max_nodes {
            continue;
        }
        for s in &t {
            for a in 0..alphabet {
                let mut c = s.clone();
                c.push(a);
                if !t.contains(&c) {
                    let mut next = t.clone();
                    next.insert(c);
                    if !seen.contains(&next) {
                        frontier.push(next);
                    }
                }
            }
        }
    }
    let mut out = vec![FinTree::empty()];
    out.extend(seen.into_iter().map(|t| FinTree::new(t).expect("prefix-closed")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::trial_rng;

    #[test]
    fn small_tree_counts() {
        // shapes with labels from {0}: chains only
        assert_eq!(small_trees(3, 1).len(), 4);
        // root, 2 one-edge trees, 2+2+1 two-edge trees
        assert_eq!(small_trees(3, 2).len(), 1 + 1 + 2 + 5);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_grid_subset(&mut trial_rng(3, 5), 1, 12, "x");
        let b = random_grid_subset(&mut trial_rng(3, 5), 1, 12, "x");
        assert_eq!(a, b);
        assert!((1..=12).contains(&a.len()));
        let t = random_tree(&mut trial_rng(1, 2), 4, 4);
        assert_eq!(t, random_tree(&mut trial_rng(1, 2), 4, 4));
        assert!(t.depth() <= 4);
    }
}

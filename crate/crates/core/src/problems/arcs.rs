//! Arc decisions shared by the routing families.

use std::collections::BTreeMap;

use crate::bnp::{most_fractional, Branch, BranchingDecision, INT_EPS};
use crate::colgen::Column;

/// Arc matrix after applying the arc decisions to `base`. Forcing `(i, j)`
/// removes the other arcs out of `i` (unless `i` is the start depot) and the
/// other arcs into `j` (unless `j` is the end depot).
pub fn allowed_arcs(
    base: &[Vec<bool>],
    decisions: &[BranchingDecision],
    start: usize,
    end: usize,
) -> Vec<Vec<bool>> {
    let mut arcs = base.to_vec();
    let n = arcs.len();
    for d in decisions {
        match *d {
            BranchingDecision::ArcForbid { from, to } => arcs[from][to] = false,
            BranchingDecision::ArcForce { from, to } => {
                if from != start {
                    for k in (0..n).filter(|&k| k != to) {
                        arcs[from][k] = false;
                    }
                }
                if to != end {
                    for k in (0..n).filter(|&k| k != from) {
                        arcs[k][to] = false;
                    }
                }
            }
            _ => {}
        }
    }
    arcs
}

/// Arcs of the route `start, nodes..., end`.
pub fn route_arcs(nodes: &[usize], start: usize, end: usize) -> Vec<(usize, usize)> {
    let mut seq = Vec::with_capacity(nodes.len() + 2);
    seq.push(start);
    seq.extend_from_slice(nodes);
    seq.push(end);
    seq.windows(2).map(|w| (w[0], w[1])).collect()
}

pub(crate) fn is_elementary(nodes: &[usize]) -> bool {
    let mut seen = nodes.to_vec();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

/// Edge branching: the arc with the most fractional flow; with integral
/// flows, an arc leaving a node that a selected route revisits.
pub(crate) fn arc_branch(columns: &[Column], primal: &[f64], start: usize, end: usize) -> Option<Branch> {
    let mut flow: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (c, &x) in columns.iter().zip(primal) {
        if c.artificial || x <= INT_EPS {
            continue;
        }
        for a in route_arcs(&c.tag, start, end) {
            *flow.entry(a).or_default() += x;
        }
    }
    let arc = most_fractional(flow.into_iter()).map(|(a, _)| a).or_else(|| {
        columns
            .iter()
            .zip(primal)
            .filter(|(c, &x)| !c.artificial && x > INT_EPS && !is_elementary(&c.tag))
            .find_map(|(c, _)| revisit_arc(&c.tag, end))
    })?;
    let (from, to) = arc;
    Some(Branch::Children(
        vec![BranchingDecision::ArcForbid { from, to }],
        vec![BranchingDecision::ArcForce { from, to }],
    ))
}

/// An arc `(u, v)` where `u` is visited at least twice and left towards
/// different nodes; both branches on it exclude the route.
fn revisit_arc(nodes: &[usize], end: usize) -> Option<(usize, usize)> {
    let succ = |k: usize| nodes.get(k + 1).copied().unwrap_or(end);
    for (k, &u) in nodes.iter().enumerate() {
        let first = succ(k);
        if nodes[k + 1..]
            .iter()
            .enumerate()
            .any(|(r, &w)| w == u && succ(k + 1 + r) != first)
        {
            return Some((u, first));
        }
    }
    None
}

//! Branch-and-price: best-bound tree search where each node is solved by
//! column generation under its branching decisions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colgen::{
    run_column_generation, ColgenConfig, ColgenError, ColgenStatus, Column, Master, PricingAdapter,
    PricingRound,
};
use crate::search::{SearchOptions, SearchStats, Solver};
use crate::simplex::LinearProgram;

/// Tolerance for integrality and bound comparisons.
pub const INT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchingDecision {
    /// Items or vertices `a` and `b` must share a column.
    RyanFosterPair { a: usize, b: usize },
    /// Items or vertices `a` and `b` must not share a column.
    RyanFosterConflict { a: usize, b: usize },
    ArcForbid { from: usize, to: usize },
    /// Arc `(from, to)` is the only arc out of `from` and into `to`.
    ArcForce { from: usize, to: usize },
    /// Job must complete by `deadline`.
    JobDeadline { job: usize, deadline: i64 },
    /// Job must not start before `release`.
    JobRelease { job: usize, release: i64 },
    SuccessorForbid { first: usize, second: usize },
    /// `second` is the only immediate successor of `first` and `first` the
    /// only immediate predecessor of `second`.
    SuccessorForce { first: usize, second: usize },
}

/// How a node whose LP solution is not an acceptable incumbent continues.
#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    Children(Vec<BranchingDecision>, Vec<BranchingDecision>),
    /// The LP solution can be turned into an integral solution of equal
    /// objective made of these columns (with multiplicity one each).
    Integral(Vec<Column>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnpError {
    #[error(transparent)]
    Colgen(#[from] ColgenError),
    #[error("no branching candidate in a fractional solution")]
    NoBranchingCandidate,
}

/// A problem family solvable by branch-and-price.
pub trait BnpProblem {
    /// Master rows (no columns).
    fn master_rows(&self) -> LinearProgram;

    /// Initial columns, including one artificial per covering row.
    fn seed_columns(&self) -> Vec<Column>;

    /// Pricing adapter honoring `decisions`; `None` when they are
    /// contradictory (the node is infeasible).
    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>>;

    /// Whether an existing column may be used under `decisions`.
    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool;

    /// Whether a column may appear in an integral solution (routes must be
    /// elementary).
    fn acceptable(&self, _column: &Column) -> bool {
        true
    }

    /// Branching on a fractional LP solution (or on an integral one that
    /// uses unacceptable columns).
    fn branch(
        &self,
        columns: &[Column],
        primal: &[f64],
        decisions: &[BranchingDecision],
    ) -> Result<Branch, BnpError>;

    /// Whether every feasible objective value is an integer.
    fn integral_objective(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnpConfig {
    pub pricer: Solver,
    pub time_limit: Option<std::time::Duration>,
    pub max_columns_per_iter: usize,
    pub search: SearchOptions,
    /// Stop after the root node.
    pub root_only: bool,
}

impl Default for BnpConfig {
    fn default() -> Self {
        BnpConfig {
            pricer: Solver::Labeling,
            time_limit: None,
            max_columns_per_iter: 200,
            search: SearchOptions::default(),
            root_only: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BnpStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    /// Root LP solved (root-only mode).
    RootSolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub objective: f64,
    /// Selected columns with their integer multiplicities.
    pub columns: Vec<(Column, u32)>,
}

#[derive(Debug, Clone)]
pub struct BnpResult {
    pub status: BnpStatus,
    pub incumbent: Option<Incumbent>,
    /// Proven lower bound on the optimum.
    pub dual_bound: f64,
    pub root_lp: Option<f64>,
    pub nodes_explored: usize,
    pub colgen_iterations: usize,
    pub columns_generated: usize,
    pub pricer_stats: SearchStats,
    pub wall_time: f64,
}

impl BnpResult {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.objective)
    }
}

/// Node of the branch-and-price tree.
#[derive(Debug, Clone)]
pub struct BnpNode {
    pub decisions: Vec<BranchingDecision>,
    pub lp_bound: f64,
    pub depth: usize,
    seq: usize,
}

impl PartialEq for BnpNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BnpNode {}

impl PartialOrd for BnpNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// smallest bound first, then deeper, then older
impl Ord for BnpNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lp_bound
            .total_cmp(&self.lp_bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Events reported to an observer during the tree search.
pub enum BnpEvent<'a> {
    Pricing(&'a PricingRound<'a>),
    NodeSolved {
        id: usize,
        depth: usize,
        lp_bound: f64,
        decisions: &'a [BranchingDecision],
    },
}

pub fn solve_branch_and_price(
    problem: &dyn BnpProblem,
    config: &BnpConfig,
) -> Result<BnpResult, BnpError> {
    solve_branch_and_price_observed(problem, config, &mut |_| {})
}

fn prunes(bound: f64, incumbent: Option<f64>, integral: bool) -> bool {
    match incumbent {
        None => false,
        Some(best) => {
            let bound = if integral {
                (bound - INT_EPS).ceil()
            } else {
                bound
            };
            bound >= best - INT_EPS
        }
    }
}

pub fn solve_branch_and_price_observed(
    problem: &dyn BnpProblem,
    config: &BnpConfig,
    observer: &mut dyn FnMut(&BnpEvent),
) -> Result<BnpResult, BnpError> {
    let start = Instant::now();
    let deadline = config.time_limit.map(|d| start + d);
    let integral = problem.integral_objective();
    let mut master = Master::new(problem.master_rows());
    for c in problem.seed_columns() {
        master.add_column(c)?;
    }
    let mut incumbent: Option<Incumbent> = None;
    let mut open = BinaryHeap::new();
    open.push(BnpNode {
        decisions: Vec::new(),
        lp_bound: f64::NEG_INFINITY,
        depth: 0,
        seq: 0,
    });
    let mut seq = 1;
    let mut nodes_explored = 0;
    let mut colgen_iterations = 0;
    let mut pricer_stats = SearchStats::default();
    let mut root_lp = None;
    let mut timed_out: Option<f64> = None;
    let colgen_config = ColgenConfig {
        pricer: config.pricer,
        max_columns_per_iter: config.max_columns_per_iter,
        max_iterations: None,
        deadline,
        search: config.search.clone(),
    };
    let seeds = master.columns.len();

    while let Some(node) = open.pop() {
        if prunes(node.lp_bound, incumbent.as_ref().map(|i| i.objective), integral) {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = Some(node.lp_bound);
            open.push(node);
            break;
        }
        nodes_explored += 1;
        let Some(mut adapter) = problem.adapter(&node.decisions) else {
            log::debug!("node {} infeasible by decisions", node.seq);
            continue;
        };
        for (j, c) in master.columns.iter().enumerate() {
            let ub = if c.artificial || problem.compatible(c, &node.decisions) {
                f64::INFINITY
            } else {
                0.0
            };
            if master.lp.column_upper_bound(j) != ub {
                master.lp.set_column_upper_bound(j, ub).expect("valid column");
            }
        }
        let res = run_column_generation(
            &mut master,
            adapter.as_mut(),
            &colgen_config,
            &mut |round| observer(&BnpEvent::Pricing(round)),
        )?;
        colgen_iterations += res.iterations;
        pricer_stats.accumulate(&res.pricer_stats);
        if res.status != ColgenStatus::Converged {
            if res.status == ColgenStatus::Stalled {
                log::warn!("column generation stalled at node {}", node.seq);
            }
            timed_out = Some(node.lp_bound);
            open.push(node);
            break;
        }
        let bound = res.lp_value.max(node.lp_bound);
        if node.depth == 0 {
            root_lp = Some(res.lp_value);
        }
        log::debug!(
            "node {} depth {} bound {:.6} decisions {:?}",
            node.seq,
            node.depth,
            bound,
            node.decisions.last()
        );
        observer(&BnpEvent::NodeSolved {
            id: node.seq,
            depth: node.depth,
            lp_bound: bound,
            decisions: &node.decisions,
        });
        if config.root_only {
            return Ok(BnpResult {
                status: BnpStatus::RootSolved,
                incumbent: None,
                dual_bound: res.lp_value,
                root_lp,
                nodes_explored,
                colgen_iterations,
                columns_generated: master.columns.len() - seeds,
                pricer_stats,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        let artificial_used = master
            .columns
            .iter()
            .zip(&res.primal)
            .any(|(c, &x)| c.artificial && x > INT_EPS);
        if artificial_used {
            continue;
        }
        if prunes(bound, incumbent.as_ref().map(|i| i.objective), integral) {
            continue;
        }
        let is_integral = res
            .primal
            .iter()
            .all(|&x| (x - x.round()).abs() <= INT_EPS);
        let all_acceptable = master
            .columns
            .iter()
            .zip(&res.primal)
            .all(|(c, &x)| x <= INT_EPS || problem.acceptable(c));
        if is_integral && all_acceptable {
            let columns: Vec<(Column, u32)> = master
                .columns
                .iter()
                .zip(&res.primal)
                .filter(|(_, &x)| x.round() >= 1.0)
                .map(|(c, &x)| (c.clone(), x.round() as u32))
                .collect();
            let objective: f64 = columns.iter().map(|(c, k)| c.cost * *k as f64).sum();
            let objective = if integral { objective.round() } else { objective };
            if incumbent.as_ref().is_none_or(|i| objective < i.objective - INT_EPS) {
                log::debug!("new incumbent {objective}");
                incumbent = Some(Incumbent { objective, columns });
            }
            continue;
        }
        match problem.branch(&master.columns, &res.primal, &node.decisions)? {
            Branch::Integral(columns) => {
                let objective: f64 = columns.iter().map(|c| c.cost).sum();
                let objective = if integral { objective.round() } else { objective };
                if incumbent.as_ref().is_none_or(|i| objective < i.objective - INT_EPS) {
                    incumbent = Some(Incumbent {
                        objective,
                        columns: columns.into_iter().map(|c| (c, 1)).collect(),
                    });
                }
            }
            Branch::Children(left, right) => {
                for extra in [left, right] {
                    let mut decisions = node.decisions.clone();
                    decisions.extend(extra);
                    open.push(BnpNode {
                        decisions,
                        lp_bound: bound,
                        depth: node.depth + 1,
                        seq,
                    });
                    seq += 1;
                }
            }
        }
    }

    let best = incumbent.as_ref().map(|i| i.objective);
    let (status, dual_bound) = match timed_out {
        Some(_) => {
            let open_min = open
                .iter()
                .map(|n| n.lp_bound)
                .fold(f64::INFINITY, f64::min);
            (BnpStatus::TimeLimit, open_min.min(best.unwrap_or(f64::INFINITY)))
        }
        None => match best {
            Some(v) => (BnpStatus::Optimal, v),
            None => (BnpStatus::Infeasible, f64::INFINITY),
        },
    };
    Ok(BnpResult {
        status,
        incumbent,
        dual_bound,
        root_lp,
        nodes_explored,
        colgen_iterations,
        columns_generated: master.columns.len() - seeds,
        pricer_stats,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Most fractional value: the candidate whose value is closest to 0.5
/// (ties by the first candidate in iteration order).
pub fn most_fractional<K: Copy>(candidates: impl IntoIterator<Item = (K, f64)>) -> Option<(K, f64)> {
    let mut best: Option<(K, f64)> = None;
    for (k, v) in candidates {
        let frac = v - v.floor();
        if frac <= INT_EPS || frac >= 1.0 - INT_EPS {
            continue;
        }
        let score = (frac - 0.5).abs();
        if best.map_or(true, |(_, b)| score < (b - b.floor() - 0.5).abs() - 1e-12) {
            best = Some((k, v));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_fractional_prefers_half() {
        let c = [(0, 0.9), (1, 0.45), (2, 0.5), (3, 1.0)];
        assert_eq!(most_fractional(c).map(|x| x.0), Some(2));
        assert_eq!(most_fractional([(0, 1.0), (1, 0.0)]), None);
    }

    #[test]
    fn best_bound_order() {
        let a = BnpNode {
            decisions: vec![],
            lp_bound: 1.0,
            depth: 0,
            seq: 0,
        };
        let b = BnpNode {
            decisions: vec![],
            lp_bound: 2.0,
            depth: 3,
            seq: 1,
        };
        let mut heap = BinaryHeap::from(vec![b, a]);
        assert_eq!(heap.pop().unwrap().lp_bound, 1.0);
    }
}

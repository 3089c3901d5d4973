//! State-space solvers for [`Model`]s.
//!
//! All solvers minimize, accept a cost cutoff (only solutions strictly below
//! it are reported) and share the same result type.

mod best_first;
mod cabs;
mod exhaustive;
mod frontier;
mod labeling;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{Model, State, TransitionRef};

pub use best_first::solve_best_first;
pub use cabs::solve_cabs;
pub use exhaustive::{solve_exhaustive, ExhaustiveOracle};
pub use frontier::DominanceFrontier;
pub use labeling::solve_labeling;

/// Absolute tolerance for "strictly better than the incumbent".
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Expansions between two wall-clock checks.
const TIME_CHECK_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Initial incumbent cost; only solutions below it are reported.
    pub cost_cutoff: f64,
    /// Whether every improving solution is returned (labeling only).
    pub collect_all_improving: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            time_limit: None,
            node_limit: None,
            cost_cutoff: f64::INFINITY,
            collect_all_improving: true,
        }
    }
}

/// Switches mostly useful for testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub dominance: bool,
    pub dual_bounds: bool,
    /// Keep every expanded state in [`SearchResult::visited`].
    pub record_states: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            dominance: true,
            dual_bounds: true,
            record_states: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Optimal,
    Feasible,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub cost: f64,
    pub path: Vec<TransitionRef>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub pruned_by_bound: u64,
    pub pruned_by_dominance: u64,
    pub wall_time: f64,
}

impl SearchStats {
    pub fn accumulate(&mut self, other: &SearchStats) {
        self.expanded += other.expanded;
        self.generated += other.generated;
        self.pruned_by_bound += other.pruned_by_bound;
        self.pruned_by_dominance += other.pruned_by_dominance;
        self.wall_time += other.wall_time;
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub status: SearchStatus,
    /// Improving solutions in discovery order (strictly decreasing cost).
    pub solutions: Vec<Solution>,
    pub best_bound: f64,
    pub stats: SearchStats,
    /// States expanded during the search when recording was requested.
    pub visited: Vec<State>,
}

impl SearchResult {
    pub fn best(&self) -> Option<&Solution> {
        self.solutions.last()
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.best().map(|s| s.cost)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the reachable state graph contains a cycle")]
    CycleDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exhaustive,
    #[serde(rename = "caasdy")]
    BestFirst,
    Cabs,
    Labeling,
}

impl Solver {
    pub const ALL: [Solver; 4] = [
        Solver::Exhaustive,
        Solver::BestFirst,
        Solver::Cabs,
        Solver::Labeling,
    ];

    pub fn solve(
        self,
        model: &Model,
        limits: &SearchLimits,
        options: &SearchOptions,
    ) -> Result<SearchResult, SearchError> {
        match self {
            Solver::Exhaustive => solve_exhaustive(model, limits, options),
            Solver::BestFirst => solve_best_first(model, limits, options),
            Solver::Cabs => solve_cabs(model, limits, options),
            Solver::Labeling => solve_labeling(model, limits, options),
        }
    }

    /// Whether one call may yield several columns.
    pub fn returns_many(self) -> bool {
        self == Solver::Labeling
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Exhaustive => "exhaustive",
            Solver::BestFirst => "caasdy",
            Solver::Cabs => "cabs",
            Solver::Labeling => "labeling",
        })
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Solver::Exhaustive),
            "caasdy" | "best-first" => Ok(Solver::BestFirst),
            "cabs" => Ok(Solver::Cabs),
            "labeling" => Ok(Solver::Labeling),
            _ => Err(format!("unknown pricer `{s}`")),
        }
    }
}

/// Best cost so far and the improving solutions found.
struct Incumbent {
    cost: f64,
    solutions: Vec<Solution>,
    keep_all: bool,
}

impl Incumbent {
    fn new(cutoff: f64, keep_all: bool) -> Self {
        Incumbent {
            cost: cutoff,
            solutions: Vec::new(),
            keep_all,
        }
    }

    fn improves(&self, cost: f64) -> bool {
        cost < self.cost - IMPROVEMENT_EPS
    }

    /// Whether a lower bound `f` on completions cannot beat the incumbent.
    fn prunes(&self, f: f64) -> bool {
        f >= self.cost - IMPROVEMENT_EPS
    }

    fn offer(&mut self, cost: f64, path: impl FnOnce() -> Vec<TransitionRef>) -> bool {
        if !self.improves(cost) {
            return false;
        }
        self.cost = cost;
        if !self.keep_all {
            self.solutions.clear();
        }
        self.solutions.push(Solution { cost, path: path() });
        true
    }
}

/// Wall-clock and node-count limit tracking.
struct Budget {
    start: Instant,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    exhausted: bool,
}

impl Budget {
    fn new(limits: &SearchLimits) -> Self {
        let start = Instant::now();
        let mut budget = Budget {
            start,
            deadline: limits.time_limit.map(|d| start + d),
            node_limit: limits.node_limit,
            exhausted: false,
        };
        if limits.time_limit == Some(Duration::ZERO) {
            budget.exhausted = true;
        }
        budget
    }

    /// Records one expansion; returns `false` once a limit is hit.
    fn tick(&mut self, expanded: u64) -> bool {
        if self.exhausted {
            return false;
        }
        let timed_out = expanded % TIME_CHECK_INTERVAL == 0 && self.deadline.is_some_and(|d| Instant::now() >= d);
        if self.node_limit.is_some_and(|n| expanded >= n) || timed_out {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Status and bound of a search that ran to completion.
fn finish_complete(incumbent: &Incumbent, cutoff: f64) -> (SearchStatus, f64) {
    if incumbent.solutions.is_empty() && cutoff == f64::INFINITY {
        (SearchStatus::Infeasible, f64::INFINITY)
    } else {
        (SearchStatus::Optimal, incumbent.cost)
    }
}

fn finish_limited(incumbent: &Incumbent, bound: f64) -> (SearchStatus, f64) {
    let status = if incumbent.solutions.is_empty() {
        SearchStatus::LimitReached
    } else {
        SearchStatus::Feasible
    };
    (status, bound.min(incumbent.cost))
}

/// Search tree node shared by the best-first, beam and labeling solvers.
struct Node {
    state: State,
    g: f64,
    parent: Option<usize>,
    via: Option<TransitionRef>,
    alive: bool,
}

fn path_to(nodes: &[Node], mut id: usize) -> Vec<TransitionRef> {
    let mut path = Vec::new();
    while let (Some(p), Some(t)) = (nodes[id].parent, nodes[id].via) {
        path.push(t);
        id = p;
    }
    path.reverse();
    path
}

fn bound(model: &Model, options: &SearchOptions, state: &State) -> Result<f64, EvalError> {
    if options.dual_bounds {
        model.eval_dual_bound(state)
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// Replays a transition sequence from the target and returns the total cost
/// (weights plus base value), or `None` when the path is not a solution.
pub fn evaluate_path(model: &Model, path: &[TransitionRef]) -> Result<Option<f64>, EvalError> {
    let mut state = model.target().clone();
    let mut cost = 0.0;
    if !model.check_state_constraints(&state)? {
        return Ok(None);
    }
    for &t in path {
        if model.is_base(&state)?.is_some() || !model.is_applicable(t, &state)? {
            return Ok(None);
        }
        cost += model.weight(t, &state)?;
        state = model.apply(t, &state)?;
        if !model.check_state_constraints(&state)? {
            return Ok(None);
        }
    }
    Ok(model.is_base(&state)?.map(|v| cost + v))
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::expr::{ElemExpr, NumExpr, SetExpr};
    use crate::model::{Model, ModelBuilder, Resource, Transition};
    use crate::Set;

    /// A chain `0 -> 1 -> 2` with unit weights and a base case at 2.
    pub fn chain() -> Model {
        let mut b = ModelBuilder::new();
        let x = b.add_element_var("x", 2, Resource::None, 0).unwrap();
        b.add_transition(
            Transition::new("step")
                .pre(ElemExpr::from(x).ne(2))
                .elem(x, ElemExpr::from(x) + ElemExpr::Const(1))
                .weight(1.0),
        );
        b.add_base_case(vec![ElemExpr::from(x).eq(2)], NumExpr::Const(0.0));
        b.build().unwrap()
    }

    /// Pick a subset of 4 items with weights that may be negative; capacity
    /// constrained; at least one item must be picked.
    pub fn subset(weights: [f64; 4], sizes: [f64; 4], cap: f64) -> Model {
        let mut b = ModelBuilder::new();
        let u = b
            .add_set_var("U", 4, Resource::PreferGreater, Set::full(4))
            .unwrap();
        let k = b.add_element_var("k", 4, Resource::None, 0).unwrap();
        let used = b.add_numeric_var("used", Resource::PreferLess, 0.0);
        let picked = b.add_numeric_var("picked", Resource::None, 0.0);
        let w = b.add_numeric_table("w", vec![4], weights.to_vec()).unwrap();
        let sz = b.add_numeric_table("s", vec![4], sizes.to_vec()).unwrap();
        let j = ElemExpr::from(k);
        b.add_transition(
            Transition::new("pick")
                .pre(ElemExpr::from(k).ne(4))
                .pre(SetExpr::from(u).contains(j.clone()))
                .pre((NumExpr::from(used) + NumExpr::table(sz, [j.clone()])).le(cap))
                .set(u, SetExpr::from(u).remove(j.clone()))
                .num(used, NumExpr::from(used) + NumExpr::table(sz, [j.clone()]))
                .num(picked, NumExpr::from(picked) + 1.0)
                .elem(k, j.clone() + ElemExpr::Const(1))
                .weight(NumExpr::table(w, [j.clone()])),
        );
        b.add_transition(
            Transition::new("skip")
                .pre(ElemExpr::from(k).ne(4))
                .set(u, SetExpr::from(u).remove(j.clone()))
                .elem(k, j + ElemExpr::Const(1)),
        );
        b.add_base_case(
            vec![ElemExpr::from(k).eq(4), NumExpr::from(picked).ge(1.0)],
            NumExpr::Const(0.0),
        );
        b.add_dual_bound(NumExpr::sum_over(
            SetExpr::from(u),
            NumExpr::table(w, [ElemExpr::param(0)]).min(0.0),
        ));
        b.build().unwrap()
    }

    /// Brute-force optimum of [`subset`].
    pub fn subset_optimum(weights: [f64; 4], sizes: [f64; 4], cap: f64) -> Option<f64> {
        (1u32..16)
            .filter(|m| (0..4).filter(|i| m >> i & 1 == 1).map(|i| sizes[i]).sum::<f64>() <= cap)
            .map(|m| (0..4).filter(|i| m >> i & 1 == 1).map(|i| weights[i]).sum::<f64>())
            .min_by(f64::total_cmp)
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn all_solvers_agree_on_small_subset_models() {
        let cases = [
            ([3.0, -2.0, -5.0, 4.0], [1.0, 2.0, 3.0, 1.0], 4.0),
            ([3.0, 2.0, 5.0, 4.0], [1.0, 2.0, 3.0, 1.0], 4.0),
            ([-1.0, -1.0, -1.0, -1.0], [1.0, 1.0, 1.0, 1.0], 2.0),
            ([1.0, 1.0, 1.0, 1.0], [5.0, 5.0, 5.0, 5.0], 4.0),
        ];
        for (w, s, c) in cases {
            let model = subset(w, s, c);
            let expected = subset_optimum(w, s, c);
            for solver in Solver::ALL {
                for dominance in [true, false] {
                    for dual_bounds in [true, false] {
                        let options = SearchOptions {
                            dominance,
                            dual_bounds,
                            record_states: false,
                        };
                        let r = solver.solve(&model, &SearchLimits::default(), &options).unwrap();
                        assert_eq!(r.best_cost(), expected, "{solver} {w:?}");
                        match expected {
                            Some(v) => {
                                assert_eq!(r.status, SearchStatus::Optimal);
                                assert_eq!(r.best_bound, v);
                                let path = &r.best().unwrap().path;
                                assert_eq!(evaluate_path(&model, path).unwrap(), Some(v));
                            }
                            None => assert_eq!(r.status, SearchStatus::Infeasible),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cutoff_at_optimum_yields_no_solution() {
        let w = [3.0, -2.0, -5.0, 4.0];
        let model = subset(w, [1.0, 2.0, 3.0, 1.0], 4.0);
        for solver in Solver::ALL {
            let limits = SearchLimits {
                cost_cutoff: -5.0,
                ..SearchLimits::default()
            };
            let r = solver.solve(&model, &limits, &SearchOptions::default()).unwrap();
            assert!(r.solutions.is_empty(), "{solver}");
            assert_eq!(r.status, SearchStatus::Optimal);
            assert_eq!(r.best_bound, -5.0);
        }
    }

    #[test]
    fn zero_time_limit_stops_immediately() {
        let model = chain();
        for solver in Solver::ALL {
            let limits = SearchLimits {
                time_limit: Some(Duration::ZERO),
                ..SearchLimits::default()
            };
            let r = solver.solve(&model, &limits, &SearchOptions::default()).unwrap();
            assert!(matches!(
                r.status,
                SearchStatus::LimitReached | SearchStatus::Feasible
            ));
        }
    }

    #[test]
    fn solver_names_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.to_string().parse::<Solver>().unwrap(), s);
        }
    }
}

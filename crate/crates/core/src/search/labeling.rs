use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::Model;

use super::frontier::{Admission, DominanceFrontier};
use super::{
    bound, finish_complete, finish_limited, path_to, Budget, Incumbent, Node, SearchError,
    SearchLimits, SearchOptions, SearchResult, SearchStats,
};

struct Label {
    key: Vec<f64>,
    g: f64,
    h: f64,
    seq: u64,
    node: usize,
}

impl Label {
    fn order(&self, other: &Self) -> Ordering {
        for (a, b) in self.key.iter().zip(&other.key) {
            let o = a.total_cmp(b);
            if o != Ordering::Equal {
                return o;
            }
        }
        self.g
            .total_cmp(&other.g)
            .then(self.h.total_cmp(&other.h))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.order(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other.order(self)
    }
}

/// Generic labeling: expands states in lexicographic order of their resource
/// variables (ties by g, then by the dual bound) and returns every improving
/// solution found.
///
/// Base states are never expanded. States removed from the open list because
/// of a new incumbent stay in the dominance frontier; states evicted from the
/// frontier by a dominating successor are also skipped when popped.
pub fn solve_labeling(
    model: &Model,
    limits: &SearchLimits,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let mut budget = Budget::new(limits);
    let mut stats = SearchStats::default();
    let mut incumbent = Incumbent::new(limits.cost_cutoff, limits.collect_all_improving);
    let mut visited = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut frontier = DominanceFrontier::new(options.dominance);
    let mut seq = 0u64;
    let mut limited = false;

    let target = model.target();
    if model.check_state_constraints(target)? {
        let h = bound(model, options, target)?;
        if let Admission::Admitted { key, .. } = frontier.admit(model, &mut nodes, target, 0.0) {
            nodes.push(Node {
                state: target.clone(),
                g: 0.0,
                parent: None,
                via: None,
                alive: true,
            });
            frontier.insert(key, 0);
            open.push(Label {
                key: model.lex_key(target),
                g: 0.0,
                h,
                seq,
                node: 0,
            });
            seq += 1;
        }
    }

    while let Some(label) = open.pop() {
        let id = label.node;
        if !nodes[id].alive {
            continue;
        }
        // lazy form of pruning the open list after an incumbent update
        if incumbent.prunes(label.g + label.h) {
            stats.pruned_by_bound += 1;
            continue;
        }
        if !budget.tick(stats.expanded) {
            open.push(label);
            limited = true;
            break;
        }
        nodes[id].alive = false;
        let state = nodes[id].state.clone();
        let g = nodes[id].g;
        if options.record_states {
            visited.push(state.clone());
        }
        if let Some(v) = model.is_base(&state)? {
            incumbent.offer(g + v, || path_to(&nodes, id));
            continue;
        }
        stats.expanded += 1;
        for t in model.applicable_transitions(&state)? {
            stats.generated += 1;
            let next = model.apply(t, &state)?;
            if !model.check_state_constraints(&next)? {
                continue;
            }
            let g_next = g + model.weight(t, &state)?;
            let key = match frontier.admit(model, &mut nodes, &next, g_next) {
                Admission::Dominated => {
                    stats.pruned_by_dominance += 1;
                    continue;
                }
                Admission::Admitted { key, evicted } => {
                    stats.pruned_by_dominance += evicted as u64;
                    key
                }
            };
            let h = bound(model, options, &next)?;
            if incumbent.prunes(g_next + h) {
                stats.pruned_by_bound += 1;
                continue;
            }
            let nid = nodes.len();
            let lex = model.lex_key(&next);
            nodes.push(Node {
                state: next,
                g: g_next,
                parent: Some(id),
                via: Some(t),
                alive: true,
            });
            frontier.insert(key, nid);
            open.push(Label {
                key: lex,
                g: g_next,
                h,
                seq,
                node: nid,
            });
            seq += 1;
        }
    }

    let (status, best_bound) = if limited {
        let open_min = open
            .iter()
            .filter(|l| nodes[l.node].alive)
            .map(|l| l.g + l.h)
            .fold(f64::INFINITY, f64::min);
        finish_limited(&incumbent, open_min)
    } else {
        finish_complete(&incumbent, limits.cost_cutoff)
    };
    stats.wall_time = budget.elapsed();
    Ok(SearchResult {
        status,
        solutions: incumbent.solutions,
        best_bound,
        stats,
        visited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::NumExpr;
    use crate::model::{ModelBuilder, Resource};
    use crate::search::testing::subset;
    use crate::search::SearchStatus;

    #[test]
    fn violated_target_returns_nothing() {
        let mut b = ModelBuilder::new();
        let x = b.add_numeric_var("x", Resource::PreferLess, 1.0);
        b.add_state_constraint(NumExpr::from(x).le(0.0));
        b.add_base_case(vec![], NumExpr::Const(0.0));
        let m = b.build().unwrap();
        let r = solve_labeling(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert!(r.solutions.is_empty());
        assert_eq!(r.status, SearchStatus::Infeasible);
    }

    #[test]
    fn improving_solutions_strictly_decrease() {
        let m = subset([3.0, -2.0, -5.0, 4.0], [1.0, 2.0, 3.0, 1.0], 4.0);
        let r = solve_labeling(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert!(!r.solutions.is_empty());
        for w in r.solutions.windows(2) {
            assert!(w[1].cost < w[0].cost);
        }
        assert_eq!(r.best_bound, r.best_cost().unwrap());
    }
}

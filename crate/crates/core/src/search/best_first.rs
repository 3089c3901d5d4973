use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{Model, TransitionRef};

use super::frontier::{Admission, DominanceFrontier};
use super::{
    bound, finish_complete, finish_limited, path_to, Budget, Incumbent, Node, SearchError,
    SearchLimits, SearchOptions, SearchResult, SearchStats,
};

struct Entry {
    f: f64,
    g: f64,
    seq: u64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// BinaryHeap is a max-heap: reverse so the smallest (f, g, seq) pops first.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Best-first search on `f = g + eta` with dominance pruning.
///
/// Weights may be negative, so the search does not stop at the first base
/// state; it stops once the smallest `f` in the open list cannot beat the
/// incumbent (or the open list is empty). Base states are evaluated when
/// generated.
pub fn solve_best_first(
    model: &Model,
    limits: &SearchLimits,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let mut budget = Budget::new(limits);
    let mut stats = SearchStats::default();
    let mut incumbent = Incumbent::new(limits.cost_cutoff, false);
    let mut visited = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut frontier = DominanceFrontier::new(options.dominance);
    let mut seq = 0u64;

    let target = model.target();
    let mut limited = false;
    if model.check_state_constraints(target)? {
        if let Some(v) = model.is_base(target)? {
            incumbent.offer(v, Vec::new);
        } else {
            let h = bound(model, options, target)?;
            if !incumbent.prunes(h) {
                if let Admission::Admitted { key, .. } =
                    frontier.admit(model, &mut nodes, target, 0.0)
                {
                    nodes.push(Node {
                        state: target.clone(),
                        g: 0.0,
                        parent: None,
                        via: None,
                        alive: true,
                    });
                    frontier.insert(key, 0);
                    open.push(Entry {
                        f: h,
                        g: 0.0,
                        seq,
                        node: 0,
                    });
                    seq += 1;
                }
            }
        }
    }

    while let Some(top) = open.peek() {
        if incumbent.prunes(top.f) {
            break;
        }
        if budget.exhausted || !budget.tick(stats.expanded) {
            limited = true;
            break;
        }
        let Entry { node: id, .. } = open.pop().expect("peeked");
        if !nodes[id].alive {
            continue;
        }
        nodes[id].alive = false;
        stats.expanded += 1;
        let state = nodes[id].state.clone();
        let g = nodes[id].g;
        if options.record_states {
            visited.push(state.clone());
        }
        for t in model.applicable_transitions(&state)? {
            stats.generated += 1;
            let next = model.apply(t, &state)?;
            if !model.check_state_constraints(&next)? {
                continue;
            }
            let g_next = g + model.weight(t, &state)?;
            if let Some(v) = model.is_base(&next)? {
                let ext = |t: TransitionRef| {
                    let mut p = path_to(&nodes, id);
                    p.push(t);
                    p
                };
                incumbent.offer(g_next + v, || ext(t));
                if options.record_states {
                    visited.push(next);
                }
                continue;
            }
            let h = bound(model, options, &next)?;
            if incumbent.prunes(g_next + h) {
                stats.pruned_by_bound += 1;
                continue;
            }
            match frontier.admit(model, &mut nodes, &next, g_next) {
                Admission::Dominated => stats.pruned_by_dominance += 1,
                Admission::Admitted { key, evicted } => {
                    stats.pruned_by_dominance += evicted as u64;
                    let nid = nodes.len();
                    nodes.push(Node {
                        state: next,
                        g: g_next,
                        parent: Some(id),
                        via: Some(t),
                        alive: true,
                    });
                    frontier.insert(key, nid);
                    open.push(Entry {
                        f: g_next + h,
                        g: g_next,
                        seq,
                        node: nid,
                    });
                    seq += 1;
                }
            }
        }
    }

    let (status, best_bound) = if limited {
        let open_min = open
            .iter()
            .filter(|e| nodes[e.node].alive)
            .map(|e| e.f)
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

use crate::model::Model;

use super::frontier::{Admission, DominanceFrontier};
use super::{
    bound, finish_complete, finish_limited, path_to, Budget, Incumbent, Node, SearchError,
    SearchLimits, SearchOptions, SearchResult, SearchStats,
};

/// Complete anytime beam search: beam searches with widths 1, 2, 4, ...
/// until one run finishes without dropping a state for width, which proves
/// the incumbent optimal.
pub fn solve_cabs(
    model: &Model,
    limits: &SearchLimits,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let mut budget = Budget::new(limits);
    let mut stats = SearchStats::default();
    let mut incumbent = Incumbent::new(limits.cost_cutoff, false);
    let mut visited = Vec::new();

    let target = model.target();
    let mut complete = true;
    if model.check_state_constraints(target)? {
        if let Some(v) = model.is_base(target)? {
            incumbent.offer(v, Vec::new);
        } else {
            let mut width = 1usize;
            loop {
                match beam(model, options, width, &mut budget, &mut stats, &mut incumbent, &mut visited)? {
                    Run::Exact => break,
                    Run::Overflowed => width = width.saturating_mul(2),
                    Run::Limit => {
                        complete = false;
                        break;
                    }
                }
                log::trace!("beam width raised to {width}");
            }
        }
    }
    let (status, best_bound) = if complete {
        finish_complete(&incumbent, limits.cost_cutoff)
    } else {
        finish_limited(&incumbent, f64::NEG_INFINITY)
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

enum Run {
    Exact,
    Overflowed,
    Limit,
}

fn beam(
    model: &Model,
    options: &SearchOptions,
    width: usize,
    budget: &mut Budget,
    stats: &mut SearchStats,
    incumbent: &mut Incumbent,
    visited: &mut Vec<crate::model::State>,
) -> Result<Run, SearchError> {
    let target = model.target();
    let h0 = bound(model, options, target)?;
    if incumbent.prunes(h0) {
        return Ok(Run::Exact);
    }
    let mut nodes = vec![Node {
        state: target.clone(),
        g: 0.0,
        parent: None,
        via: None,
        alive: true,
    }];
    let mut layer = vec![0usize];
    let mut overflow = false;
    while !layer.is_empty() {
        let mut frontier = DominanceFrontier::new(options.dominance);
        let mut candidates: Vec<(f64, f64, usize)> = Vec::new();
        for &id in &layer {
            if !budget.tick(stats.expanded) {
                return Ok(Run::Limit);
            }
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
                    incumbent.offer(g_next + v, || {
                        let mut p = path_to(&nodes, id);
                        p.push(t);
                        p
                    });
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
                        candidates.push((g_next + h, g_next, nid));
                    }
                }
            }
        }
        // the incumbent may have improved after a candidate was generated
        candidates.retain(|&(f, _, id)| nodes[id].alive && !incumbent.prunes(f));
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        if candidates.len() > width {
            overflow = true;
            candidates.truncate(width);
        }
        layer = candidates.into_iter().map(|(_, _, id)| id).collect();
    }
    Ok(if overflow { Run::Overflowed } else { Run::Exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::testing::chain;
    use crate::search::SearchStatus;

    #[test]
    fn chain_is_exact_at_width_one() {
        let m = chain();
        let r = solve_cabs(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert_eq!(r.status, SearchStatus::Optimal);
        assert_eq!(r.best_cost(), Some(2.0));
        assert_eq!(r.stats.expanded, 2);
    }
}

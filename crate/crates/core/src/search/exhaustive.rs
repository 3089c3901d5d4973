use rustc_hash::FxHashMap;

use crate::model::{Model, State, TransitionRef};

use super::{
    finish_complete, finish_limited, Budget, Incumbent, SearchError, SearchLimits, SearchOptions,
    SearchResult, SearchStats,
};

enum Memo {
    InProgress,
    Done(f64, Option<TransitionRef>),
}

/// Memoized evaluation of the Bellman recursion:
/// `V(S) = inf` if a state constraint fails, `v(S)` at base states, and the
/// minimum over applicable transitions of `w(S) + V(S')` otherwise.
///
/// The memo table persists across calls, so one oracle can answer many
/// queries on the same model.
pub struct ExhaustiveOracle<'m> {
    model: &'m Model,
    memo: FxHashMap<State, Memo>,
    budget: Option<Budget>,
    stats: SearchStats,
}

#[derive(Debug)]
enum Stop {
    Error(SearchError),
    Limit,
}

impl From<SearchError> for Stop {
    fn from(e: SearchError) -> Self {
        Stop::Error(e)
    }
}

impl From<crate::expr::EvalError> for Stop {
    fn from(e: crate::expr::EvalError) -> Self {
        Stop::Error(e.into())
    }
}

impl<'m> ExhaustiveOracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        ExhaustiveOracle {
            model,
            memo: FxHashMap::default(),
            budget: None,
            stats: SearchStats::default(),
        }
    }

    /// Optimal cost-to-go of `state` (`inf` when no base state is reachable).
    pub fn value(&mut self, state: &State) -> Result<f64, SearchError> {
        match self.visit(state) {
            Ok(v) => Ok(v),
            Err(Stop::Error(e)) => Err(e),
            Err(Stop::Limit) => unreachable!("the oracle runs without limits"),
        }
    }

    /// Number of memoized states.
    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    fn visit(&mut self, state: &State) -> Result<f64, Stop> {
        match self.memo.get(state) {
            Some(Memo::Done(v, _)) => return Ok(*v),
            Some(Memo::InProgress) => return Err(SearchError::CycleDetected.into()),
            None => {}
        }
        if let Some(budget) = &mut self.budget {
            if !budget.tick(self.stats.expanded) {
                return Err(Stop::Limit);
            }
        }
        let model = self.model;
        if !model.check_state_constraints(state)? {
            self.memo.insert(state.clone(), Memo::Done(f64::INFINITY, None));
            return Ok(f64::INFINITY);
        }
        if let Some(v) = model.is_base(state)? {
            self.memo.insert(state.clone(), Memo::Done(v, None));
            return Ok(v);
        }
        self.memo.insert(state.clone(), Memo::InProgress);
        self.stats.expanded += 1;
        let mut best = f64::INFINITY;
        let mut best_t = None;
        for t in model.applicable_transitions(state)? {
            self.stats.generated += 1;
            let w = model.weight(t, state)?;
            let next = model.apply(t, state)?;
            let v = self.visit(&next)?;
            if w + v < best {
                best = w + v;
                best_t = Some(t);
            }
        }
        self.memo.insert(state.clone(), Memo::Done(best, best_t));
        Ok(best)
    }

    fn path_from(&self, state: &State) -> Result<Vec<TransitionRef>, SearchError> {
        let mut path = Vec::new();
        let mut cur = state.clone();
        while let Some(Memo::Done(_, Some(t))) = self.memo.get(&cur) {
            path.push(*t);
            cur = self.model.apply(*t, &cur)?;
        }
        Ok(path)
    }
}

/// Solves a model by memoized recursion over the full reachable state graph.
/// Dominance and dual bounds are ignored.
pub fn solve_exhaustive(
    model: &Model,
    limits: &SearchLimits,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let mut oracle = ExhaustiveOracle::new(model);
    let budget = Budget::new(limits);
    let start_exhausted = budget.exhausted;
    oracle.budget = Some(budget);
    let mut incumbent = Incumbent::new(limits.cost_cutoff, false);
    let target = model.target();
    let outcome = if start_exhausted {
        Err(Stop::Limit)
    } else {
        oracle.visit(target)
    };
    let (status, best_bound) = match outcome {
        Ok(v) => {
            if v < f64::INFINITY {
                let path = oracle.path_from(target)?;
                incumbent.offer(v, || path);
            }
            finish_complete(&incumbent, limits.cost_cutoff)
        }
        Err(Stop::Limit) => finish_limited(&incumbent, f64::NEG_INFINITY),
        Err(Stop::Error(e)) => return Err(e),
    };
    let mut stats = oracle.stats.clone();
    stats.wall_time = oracle.budget.as_ref().map_or(0.0, Budget::elapsed);
    let visited = if options.record_states {
        oracle
            .memo
            .iter()
            .filter(|(_, m)| matches!(m, Memo::Done(..)))
            .map(|(s, _)| s.clone())
            .collect()
    } else {
        Vec::new()
    };
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
    use crate::expr::{ElemExpr, NumExpr};
    use crate::model::{ModelBuilder, Resource, Transition};
    use crate::search::testing::chain;
    use crate::search::SearchStatus;

    #[test]
    fn base_target_costs_its_value() {
        let mut b = ModelBuilder::new();
        b.add_base_case(vec![], NumExpr::Const(7.0));
        let m = b.build().unwrap();
        let r = solve_exhaustive(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert_eq!(r.best_cost(), Some(7.0));
        assert!(r.best().unwrap().path.is_empty());
    }

    #[test]
    fn violated_target_is_infeasible() {
        let mut b = ModelBuilder::new();
        let x = b.add_numeric_var("x", Resource::None, 1.0);
        b.add_state_constraint(NumExpr::from(x).le(0.0));
        b.add_base_case(vec![], NumExpr::Const(0.0));
        let m = b.build().unwrap();
        let r = solve_exhaustive(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert_eq!(r.status, SearchStatus::Infeasible);
    }

    #[test]
    fn chain_value_and_oracle_queries() {
        let m = chain();
        let r = solve_exhaustive(&m, &SearchLimits::default(), &SearchOptions::default()).unwrap();
        assert_eq!(r.best_cost(), Some(2.0));
        assert_eq!(r.best().unwrap().path.len(), 2);
        let mut oracle = ExhaustiveOracle::new(&m);
        let mut s = m.target().clone();
        s.elements[0] = 1;
        assert_eq!(oracle.value(&s).unwrap(), 1.0);
    }

    #[test]
    fn cycles_are_detected() {
        let mut b = ModelBuilder::new();
        let x = b.add_element_var("x", 1, Resource::None, 0).unwrap();
        b.add_transition(
            Transition::new("flip")
                .elem(
                    x,
                    ElemExpr::If(
                        Box::new(ElemExpr::from(x).eq(0)),
                        Box::new(ElemExpr::Const(1)),
                        Box::new(ElemExpr::Const(0)),
                    ),
                )
                .weight(1.0),
        );
        let m = b.build().unwrap();
        let r = solve_exhaustive(&m, &SearchLimits::default(), &SearchOptions::default());
        assert_eq!(r.unwrap_err(), SearchError::CycleDetected);
    }
}

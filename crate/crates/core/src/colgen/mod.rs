//! Column generation: solve the restricted master, price with a DP, add the
//! improving columns, repeat until pricing proves that none is left.

use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Model, ModelError, TransitionRef};
use crate::search::{SearchError, SearchLimits, SearchOptions, SearchResult, SearchStats, SearchStatus, Solver};
use crate::simplex::{Basis, LinearProgram, LpError, LpSolution, LpStatus};

/// Columns whose reduced cost is not below `-RC_EPS` are not improving.
pub const RC_EPS: f64 = 1e-6;

/// Objective coefficient of the artificial column attached to each covering
/// row.
pub const ARTIFICIAL_COST: f64 = 1e6;

/// A master column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cost: f64,
    /// Sparse `(row, coefficient)` pairs; coefficients may exceed 1 for
    /// routes that revisit a customer.
    pub row_coeffs: Vec<(usize, f64)>,
    /// Transitions of the pricing solution that produced the column.
    pub provenance: Vec<TransitionRef>,
    /// Problem-specific content: items, vertices, job sequence, aircraft
    /// sequence or visited nodes.
    pub tag: Vec<usize>,
    pub artificial: bool,
}

impl Column {
    pub fn new(cost: f64, row_coeffs: Vec<(usize, f64)>, tag: Vec<usize>) -> Self {
        Column {
            cost,
            row_coeffs,
            provenance: Vec::new(),
            tag,
            artificial: false,
        }
    }

    pub fn artificial(row: usize, coeff: f64) -> Self {
        Column {
            cost: ARTIFICIAL_COST,
            row_coeffs: vec![(row, coeff)],
            provenance: Vec::new(),
            tag: vec![row],
            artificial: true,
        }
    }

    pub fn coeff(&self, row: usize) -> f64 {
        self.row_coeffs
            .iter()
            .find(|(r, _)| *r == row)
            .map_or(0.0, |c| c.1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColgenError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("pricing failed: {0}")]
    Pricer(String),
    #[error("row index {0} has no dual value")]
    DimensionMismatch(usize),
    #[error("the restricted master is {0:?}")]
    Master(LpStatus),
}

/// `c_p - sum_i a_ip * pi_i` over all rows.
pub fn reduced_cost(column: &Column, duals: &[f64]) -> Result<f64, ColgenError> {
    let mut rc = column.cost;
    for &(i, a) in &column.row_coeffs {
        rc -= a * duals.get(i).ok_or(ColgenError::DimensionMismatch(i))?;
    }
    Ok(rc)
}

/// Connects a pricing DP to the master.
pub trait PricingAdapter {
    /// Pricing model for the given duals.
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError>;

    /// Column described by a pricing solution of `model`.
    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError>;

    /// Constant that turns a DP value into the column's reduced cost.
    fn offset(&self, duals: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ColumnKey {
    cost: u64,
    coeffs: u64,
}

fn column_key(c: &Column) -> ColumnKey {
    use std::hash::{Hash, Hasher};
    let mut h = rustc_hash::FxHasher::default();
    for &(i, a) in &c.row_coeffs {
        i.hash(&mut h);
        a.to_bits().hash(&mut h);
    }
    c.tag.hash(&mut h);
    ColumnKey {
        cost: c.cost.to_bits(),
        coeffs: h.finish(),
    }
}

/// The restricted master LP together with its column pool.
#[derive(Debug, Clone)]
pub struct Master {
    pub lp: LinearProgram,
    pub columns: Vec<Column>,
    basis: Option<Basis>,
    index: FxHashMap<ColumnKey, usize>,
}

impl Master {
    /// Master over the rows of `lp`, which must not contain columns yet.
    pub fn new(lp: LinearProgram) -> Self {
        debug_assert_eq!(lp.num_cols(), 0);
        Master {
            lp,
            columns: Vec::new(),
            basis: None,
            index: FxHashMap::default(),
        }
    }

    /// Adds a column unless an identical one exists; returns its index.
    pub fn add_column(&mut self, column: Column) -> Result<Option<usize>, ColgenError> {
        let key = column_key(&column);
        if self.index.contains_key(&key) {
            return Ok(None);
        }
        let id = self.lp.add_column(column.cost, &column.row_coeffs)?;
        self.index.insert(key, id);
        self.columns.push(column);
        Ok(Some(id))
    }

    pub fn find(&self, column: &Column) -> Option<usize> {
        self.index.get(&column_key(column)).copied()
    }

    /// Solves the LP, warm starting from the previous basis; a numerical
    /// failure is retried from scratch.
    pub fn solve(&mut self) -> Result<LpSolution, ColgenError> {
        let out = match self.lp.solve(self.basis.as_ref()) {
            Ok(out) => out,
            Err(LpError::NumericalFailure(_)) if self.basis.is_some() => self.lp.solve(None)?,
            Err(e) => return Err(e.into()),
        };
        self.basis = Some(out.1);
        Ok(out.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColgenConfig {
    pub pricer: Solver,
    pub max_columns_per_iter: usize,
    pub max_iterations: Option<usize>,
    pub deadline: Option<Instant>,
    pub search: SearchOptions,
}

impl Default for ColgenConfig {
    fn default() -> Self {
        ColgenConfig {
            pricer: Solver::Labeling,
            max_columns_per_iter: 200,
            max_iterations: None,
            deadline: None,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColgenStatus {
    Converged,
    IterationLimit,
    TimeLimit,
    /// Pricing found improving columns but all of them were already present
    /// (numerical trouble); the LP value is not certified.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct ColgenResult {
    pub lp_value: f64,
    pub duals: Vec<f64>,
    pub primal: Vec<f64>,
    pub columns_added: usize,
    pub iterations: usize,
    pub status: ColgenStatus,
    /// Lower bound on the smallest reduced cost when the loop stopped.
    pub min_reduced_cost_at_exit: f64,
    pub pricer_stats: SearchStats,
}

/// One pricing round, passed to observers.
pub struct PricingRound<'a> {
    pub iteration: usize,
    pub model: &'a Model,
    pub duals: &'a [f64],
    pub offset: f64,
    pub result: &'a SearchResult,
    /// Columns extracted from the returned solutions, with the DP value of
    /// each.
    pub columns: &'a [(f64, Column)],
}

/// Runs column generation on `master` until pricing proves LP optimality or
/// a limit is hit.
pub fn run_column_generation(
    master: &mut Master,
    adapter: &mut dyn PricingAdapter,
    config: &ColgenConfig,
    observer: &mut dyn FnMut(&PricingRound),
) -> Result<ColgenResult, ColgenError> {
    let mut iterations = 0;
    let mut columns_added = 0;
    let mut pricer_stats = SearchStats::default();
    loop {
        let sol = master.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(ColgenError::Master(sol.status));
        }
        let finish = |status, min_rc, iterations, columns_added, stats: SearchStats| ColgenResult {
            lp_value: sol.objective,
            duals: sol.duals.clone(),
            primal: sol.primal.clone(),
            columns_added,
            iterations,
            status,
            min_reduced_cost_at_exit: min_rc,
            pricer_stats: stats,
        };
        if config.max_iterations.is_some_and(|k| iterations >= k) {
            return Ok(finish(
                ColgenStatus::IterationLimit,
                f64::NEG_INFINITY,
                iterations,
                columns_added,
                pricer_stats,
            ));
        }
        let remaining = match config.deadline {
            Some(d) => {
                let now = Instant::now();
                if now >= d {
                    return Ok(finish(
                        ColgenStatus::TimeLimit,
                        f64::NEG_INFINITY,
                        iterations,
                        columns_added,
                        pricer_stats,
                    ));
                }
                Some(d - now)
            }
            None => None,
        };
        iterations += 1;
        let duals = &sol.duals;
        let model = adapter.rebuild(duals)?;
        let offset = adapter.offset(duals);
        let cutoff = -offset - RC_EPS;
        let limits = SearchLimits {
            time_limit: remaining.map(|r| r.max(Duration::from_millis(1))),
            node_limit: None,
            cost_cutoff: cutoff,
            collect_all_improving: config.pricer.returns_many(),
        };
        let result = config.pricer.solve(&model, &limits, &config.search)?;
        pricer_stats.accumulate(&result.stats);
        let take = if config.pricer.returns_many() {
            config.max_columns_per_iter.max(1)
        } else {
            1
        };
        let start = result.solutions.len().saturating_sub(take);
        let mut priced = Vec::new();
        for s in &result.solutions[start..] {
            let mut col = adapter.extract(&model, &s.path)?;
            col.provenance = s.path.clone();
            priced.push((s.cost, col));
        }
        observer(&PricingRound {
            iteration: iterations,
            model: &model,
            duals,
            offset,
            result: &result,
            columns: &priced,
        });
        let mut added = 0;
        for (_, col) in priced {
            if master.add_column(col)?.is_some() {
                added += 1;
            }
        }
        columns_added += added;
        let min_rc = result
            .best_cost()
            .map_or(result.best_bound, |c| c.min(result.best_bound))
            + offset;
        log::debug!(
            "colgen iteration {iterations}: lp {:.6}, added {added}, min reduced cost {min_rc:.6}",
            sol.objective
        );
        if added == 0 {
            let status = match result.status {
                SearchStatus::Optimal | SearchStatus::Infeasible if result.solutions.is_empty() => {
                    ColgenStatus::Converged
                }
                SearchStatus::Optimal | SearchStatus::Infeasible => ColgenStatus::Stalled,
                SearchStatus::Feasible | SearchStatus::LimitReached => ColgenStatus::TimeLimit,
            };
            let min_rc = match result.status {
                SearchStatus::Infeasible => f64::INFINITY,
                _ => min_rc,
            };
            return Ok(finish(status, min_rc, iterations, columns_added, pricer_stats));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_cost_is_cost_minus_dual_activity() {
        let col = Column::new(3.0, vec![(0, 1.0), (2, 1.0)], vec![]);
        assert_eq!(reduced_cost(&col, &[1.0, 2.0, 0.5]).unwrap(), 1.5);
        assert_eq!(reduced_cost(&col, &[0.0; 3]).unwrap(), 3.0);
        assert!(reduced_cost(&col, &[0.0; 2]).is_err());
    }

    #[test]
    fn master_rejects_duplicates() {
        let mut lp = LinearProgram::new();
        lp.add_row(crate::simplex::Sense::Ge, 1.0);
        let mut m = Master::new(lp);
        let c = Column::new(1.0, vec![(0, 1.0)], vec![0]);
        assert_eq!(m.add_column(c.clone()).unwrap(), Some(0));
        assert_eq!(m.add_column(c.clone()).unwrap(), None);
        assert_eq!(m.find(&c), Some(0));
        let sol = m.solve().unwrap();
        assert_eq!(sol.objective, 1.0);
    }
}

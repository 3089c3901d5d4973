//! Bin packing: covering master over bin patterns, knapsack-like pricing
//! over item groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::groups::{ryan_foster_compatible, ryan_foster_pair};
use super::{numeric_lines, replay, require_integer, Family, Groups, InstanceError, ProblemKind, SolutionView};
use crate::bnp::{Branch, BnpError, BnpProblem, BranchingDecision};
use crate::colgen::{ColgenError, Column, PricingAdapter};
use crate::expr::{ElemExpr, KnapsackSpec, NumExpr, SetExpr};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition, TransitionRef};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

#[derive(Debug, Clone, PartialEq)]
pub struct BppInstance {
    pub capacity: f64,
    pub weights: Vec<f64>,
}

impl BppInstance {
    pub fn new(capacity: f64, weights: Vec<f64>) -> Result<Self, InstanceError> {
        if capacity < 0.0 {
            return Err(InstanceError::Semantic("negative capacity".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(0.0..=capacity).contains(&w) {
                return Err(InstanceError::Semantic(format!(
                    "item {i} has weight {w} outside [0, {capacity}]"
                )));
            }
        }
        Ok(BppInstance { capacity, weights })
    }

    /// BPPLIB text: item count, capacity, then one weight per line.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let lines = numeric_lines(text)?;
        let mut values = lines.iter().flat_map(|(ln, v)| v.iter().map(move |x| (*ln, *x)));
        let (ln, n) = values
            .next()
            .ok_or_else(|| InstanceError::parse(1, 1, "missing item count"))?;
        let n = require_integer(n, ln, "item count")?;
        let (_, capacity) = values
            .next()
            .ok_or_else(|| InstanceError::parse(ln + 1, 1, "missing capacity"))?;
        let weights: Vec<f64> = values.map(|(_, w)| w).collect();
        if weights.len() != n {
            return Err(InstanceError::parse(
                lines.last().map_or(1, |l| l.0),
                1,
                format!("expected {n} weights, found {}", weights.len()),
            ));
        }
        Self::new(capacity, weights)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{}\n", self.weights.len(), self.capacity);
        for w in &self.weights {
            s.push_str(&format!("{w}\n"));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Small random instance: capacity in [10, 20], weights in [1, capacity].
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let capacity = rng.gen_range(10..=20) as f64;
        let weights = (0..n).map(|_| rng.gen_range(1..=capacity as u32) as f64).collect();
        BppInstance { capacity, weights }
    }

    /// Falkenauer-style uniform instance: capacity 150, weights in [20, 100].
    pub fn falkenauer_uniform(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..n).map(|_| rng.gen_range(20..=100) as f64).collect();
        BppInstance {
            capacity: 150.0,
            weights,
        }
    }

    /// Pricing model over the item groups: decide group by group whether
    /// it joins the bin. Its value plus one is the reduced cost of the
    /// pattern.
    pub fn pricing_model(&self, groups: &Groups, duals: &[f64]) -> Result<Model, ModelError> {
        let k = groups.len();
        let weight = groups.aggregate(&self.weights);
        let profit = groups.aggregate(duals);
        let mut b = ModelBuilder::new();
        let reachable = Set::from_members(k, (0..k).filter(|&x| weight[x] <= self.capacity));
        let r = b.add_set_var("R", k, Resource::PreferGreater, reachable)?;
        let g = b.add_element_var("g", k, Resource::None, 0)?;
        let q = b.add_numeric_var("q", Resource::PreferGreater, self.capacity);
        let w = b.add_numeric_table("w", vec![k.max(1)], pad(&weight, k))?;
        let pi = b.add_numeric_table("pi", vec![k.max(1)], pad(&profit, k))?;
        let conflicts: Vec<Set> = groups
            .conflicts
            .iter()
            .map(|h| Set::from_members(k, h.iter().copied()))
            .collect();
        let h = b.add_set_table("H", vec![k.max(1)], pad_sets(conflicts, k))?;

        let cur = ElemExpr::from(g);
        let left = NumExpr::from(q) - NumExpr::table(w, [cur.clone()]);
        b.add_transition(
            Transition::new("include")
                .pre(cur.clone().ne(k))
                .pre(SetExpr::from(r).contains(cur.clone()))
                .elem(g, cur.clone() + ElemExpr::Const(1))
                .num(q, left.clone())
                .set(
                    r,
                    SetExpr::from(r)
                        .difference(SetExpr::Table(h, Box::new([cur.clone()])))
                        .remove(cur.clone())
                        .filter(NumExpr::table(w, [ElemExpr::param(0)]).le(left)),
                )
                .weight(-NumExpr::table(pi, [cur.clone()])),
        );
        b.add_transition(
            Transition::new("exclude")
                .pre(cur.clone().ne(k))
                .elem(g, cur.clone() + ElemExpr::Const(1))
                .set(r, SetExpr::from(r).remove(cur.clone())),
        );
        b.add_base_case(vec![cur.eq(k)], NumExpr::Const(0.0));
        b.add_dual_bound(-NumExpr::knapsack(KnapsackSpec {
            items: SetExpr::from(r),
            capacity: NumExpr::from(q),
            profits: profit.iter().map(|&p| NumExpr::Const(p)).collect(),
            weights: weight.iter().map(|&x| NumExpr::Const(x)).collect(),
        }));
        b.build()
    }
}

// tables need at least one entry
pub(crate) fn pad(values: &[f64], k: usize) -> Vec<f64> {
    if k == 0 {
        vec![0.0]
    } else {
        values.to_vec()
    }
}

pub(crate) fn pad_sets(values: Vec<Set>, k: usize) -> Vec<Set> {
    if k == 0 {
        vec![Set::empty(0)]
    } else {
        values
    }
}

/// Pricing adapter shared by the two Ryan-Foster families.
pub(crate) struct GroupPricing<F> {
    pub groups: Groups,
    pub build: F,
}

impl<F> PricingAdapter for GroupPricing<F>
where
    F: Fn(&Groups, &[f64]) -> Result<Model, ModelError>,
{
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError> {
        Ok((self.build)(&self.groups, duals)?)
    }

    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError> {
        let states = replay(model, path)?;
        let mut items = Vec::new();
        for (s, t) in states.iter().zip(path) {
            if model.transition(*t).name == "include" {
                items.extend_from_slice(&self.groups.members[s.elements[0]]);
            }
        }
        items.sort_unstable();
        Ok(pattern(items))
    }

    fn offset(&self, _duals: &[f64]) -> f64 {
        1.0
    }
}

/// A unit-cost pattern over `items` (ascending).
pub(crate) fn pattern(items: Vec<usize>) -> Column {
    Column::new(1.0, items.iter().map(|&i| (i, 1.0)).collect(), items)
}

impl BnpProblem for BppInstance {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.len() {
            lp.add_row(Sense::Ge, 1.0);
        }
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let mut cols: Vec<Column> = (0..self.len()).map(|i| pattern(vec![i])).collect();
        cols.extend((0..self.len()).map(|i| Column::artificial(i, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        let groups = Groups::new(self.len(), &[], decisions)?;
        Some(Box::new(GroupPricing {
            groups,
            build: move |g: &Groups, d: &[f64]| self.pricing_model(g, d),
        }))
    }

    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool {
        ryan_foster_compatible(&column.tag, decisions)
    }

    fn branch(
        &self,
        columns: &[Column],
        primal: &[f64],
        _decisions: &[BranchingDecision],
    ) -> Result<Branch, BnpError> {
        let (a, b) = ryan_foster_pair(self.len(), columns, primal).ok_or(BnpError::NoBranchingCandidate)?;
        Ok(Branch::Children(
            vec![BranchingDecision::RyanFosterPair { a, b }],
            vec![BranchingDecision::RyanFosterConflict { a, b }],
        ))
    }
}

impl Family for BppInstance {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Bpp
    }

    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        SolutionView::Bins {
            bins: columns
                .iter()
                .flat_map(|(c, k)| std::iter::repeat(c.tag.clone()).take(*k as usize))
                .collect(),
        }
    }
}

//! Graph coloring: partitioning master over independent sets, pricing over
//! vertex groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bpp::{pad, pad_sets, pattern, GroupPricing};
use super::groups::{ryan_foster_compatible, ryan_foster_pair};
use super::{require_integer, Family, Groups, InstanceError, ProblemKind, SolutionView};
use crate::bnp::{Branch, BnpError, BnpProblem, BranchingDecision};
use crate::colgen::{Column, PricingAdapter};
use crate::expr::{ElemExpr, NumExpr, SetExpr};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

#[derive(Debug, Clone, PartialEq)]
pub struct GcpInstance {
    pub vertices: usize,
    /// Edges `(u, v)` with `u < v`, sorted and without duplicates.
    pub edges: Vec<(usize, usize)>,
}

impl GcpInstance {
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, InstanceError> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(InstanceError::Semantic(format!("self-loop at vertex {u}")));
            }
            if u >= vertices || v >= vertices {
                return Err(InstanceError::Semantic(format!("edge ({u}, {v}) leaves the vertex set")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(GcpInstance { vertices, edges: list })
    }

    /// DIMACS `.col` text: `p edge V E` and `e u v` lines (1-based);
    /// comment lines start with `c`.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut vertices = None;
        let mut edges = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let mut tokens = line.split_whitespace();
            let number = |tok: Option<&str>, col: usize| -> Result<usize, InstanceError> {
                let tok = tok.ok_or_else(|| InstanceError::parse(ln, col, "missing field"))?;
                let v: f64 = tok
                    .parse()
                    .map_err(|_| InstanceError::parse(ln, col, format!("expected an integer, found `{tok}`")))?;
                require_integer(v, ln, "field")
            };
            match tokens.next() {
                None | Some("c") => {}
                Some("p") => {
                    tokens.next();
                    vertices = Some(number(tokens.next(), 3)?);
                }
                Some("e") => {
                    let u = number(tokens.next(), 2)?;
                    let v = number(tokens.next(), 3)?;
                    if u == 0 || v == 0 {
                        return Err(InstanceError::parse(ln, 2, "vertices are numbered from 1"));
                    }
                    edges.push((u - 1, v - 1));
                }
                Some(tok) => return Err(InstanceError::parse(ln, 1, format!("unknown line type `{tok}`"))),
            }
        }
        let vertices = vertices.ok_or_else(|| InstanceError::parse(1, 1, "missing `p edge` line"))?;
        Self::new(vertices, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("p edge {} {}\n", self.vertices, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("e {} {}\n", u + 1, v + 1));
        }
        s
    }

    /// Random graph with edge probability `density`.
    pub fn random(vertices: usize, density: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.gen_bool(density) {
                    edges.push((u, v));
                }
            }
        }
        GcpInstance { vertices, edges }
    }

    /// Pricing model over the vertex groups: pick an independent set of
    /// groups. Its value plus one is the reduced cost of the color class.
    pub fn pricing_model(&self, groups: &Groups, duals: &[f64]) -> Result<Model, ModelError> {
        let k = groups.len();
        let profit = groups.aggregate(duals);
        let mut b = ModelBuilder::new();
        let r = b.add_set_var("R", k, Resource::PreferGreater, Set::full(k))?;
        let g = b.add_element_var("g", k, Resource::None, 0)?;
        let pi = b.add_numeric_table("pi", vec![k.max(1)], pad(&profit, k))?;
        let conflicts: Vec<Set> = groups
            .conflicts
            .iter()
            .map(|h| Set::from_members(k, h.iter().copied()))
            .collect();
        let h = b.add_set_table("H", vec![k.max(1)], pad_sets(conflicts, k))?;

        let cur = ElemExpr::from(g);
        b.add_transition(
            Transition::new("include")
                .pre(cur.clone().ne(k))
                .pre(SetExpr::from(r).contains(cur.clone()))
                .elem(g, cur.clone() + ElemExpr::Const(1))
                .set(
                    r,
                    SetExpr::from(r)
                        .difference(SetExpr::Table(h, Box::new([cur.clone()])))
                        .remove(cur.clone()),
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
        b.add_dual_bound(NumExpr::sum_over(
            SetExpr::from(r),
            (-NumExpr::table(pi, [ElemExpr::param(0)])).min(0.0),
        ));
        b.build()
    }
}

impl BnpProblem for GcpInstance {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.vertices {
            lp.add_row(Sense::Eq, 1.0);
        }
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let mut cols: Vec<Column> = (0..self.vertices).map(|v| pattern(vec![v])).collect();
        cols.extend((0..self.vertices).map(|v| Column::artificial(v, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        let groups = Groups::new(self.vertices, &self.edges, decisions)?;
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
        let (a, b) = ryan_foster_pair(self.vertices, columns, primal).ok_or(BnpError::NoBranchingCandidate)?;
        Ok(Branch::Children(
            vec![BranchingDecision::RyanFosterPair { a, b }],
            vec![BranchingDecision::RyanFosterConflict { a, b }],
        ))
    }
}

impl Family for GcpInstance {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Gcp
    }

    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        SolutionView::ColorClasses {
            classes: columns
                .iter()
                .flat_map(|(c, k)| std::iter::repeat(c.tag.clone()).take(*k as usize))
                .collect(),
        }
    }
}

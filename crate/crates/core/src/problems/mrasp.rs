//! Multi-runway aircraft scheduling: each column is the operation sequence
//! of one runway, timed as early as possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    all_integral, numeric_lines, replay, require_integer, route_arcs, Family, InstanceError, ProblemKind,
    SolutionView, TimedTask,
};
use crate::bnp::{most_fractional, Branch, BnpError, BnpProblem, BranchingDecision, INT_EPS};
use crate::colgen::{ColgenError, Column, PricingAdapter};
use crate::expr::{Cond, ElemExpr, NumExpr, SetExpr};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition, TransitionRef};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

pub const TAKEOFF: usize = 0;
pub const LANDING: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Aircraft {
    pub class: usize,
    /// [`TAKEOFF`] or [`LANDING`].
    pub operation: usize,
    pub release: f64,
    pub due: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MraspInstance {
    pub runways: usize,
    pub classes: usize,
    /// Square table over class-operation pairs `g * 2 + o`: the minimum time
    /// from an operation of the row pair to a later one of the column pair.
    pub separation: Vec<Vec<f64>>,
    pub aircraft: Vec<Aircraft>,
}

impl MraspInstance {
    pub fn new(
        runways: usize,
        classes: usize,
        separation: Vec<Vec<f64>>,
        aircraft: Vec<Aircraft>,
    ) -> Result<Self, InstanceError> {
        let k = 2 * classes;
        if separation.len() != k || separation.iter().any(|r| r.len() != k) {
            return Err(InstanceError::Semantic(format!("separation table must be {k} x {k}")));
        }
        if separation.iter().flatten().any(|&d| d < 0.0) {
            return Err(InstanceError::Semantic("negative separation".into()));
        }
        for (a, x) in aircraft.iter().enumerate() {
            if x.class >= classes || x.operation > 1 {
                return Err(InstanceError::Semantic(format!("aircraft {a} has an unknown class or operation")));
            }
            if x.release < 0.0 || x.due < x.release || x.cost < 0.0 {
                return Err(InstanceError::Semantic(format!(
                    "aircraft {a} needs 0 <= u <= v and c >= 0"
                )));
            }
        }
        Ok(MraspInstance {
            runways,
            classes,
            separation,
            aircraft,
        })
    }

    /// Native text: `R G`, then `2G` rows of `2G` separations, then one
    /// aircraft per line as `class op u v c` (op 0 takeoff, 1 landing).
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let lines = numeric_lines(text)?;
        let (ln, head) = lines.first().ok_or_else(|| InstanceError::parse(1, 1, "empty input"))?;
        if head.len() != 2 {
            return Err(InstanceError::parse(*ln, 1, "expected `R G`"));
        }
        let runways = require_integer(head[0], *ln, "runway count")?;
        let classes = require_integer(head[1], *ln, "class count")?;
        let k = 2 * classes;
        if lines.len() < 1 + k {
            return Err(InstanceError::parse(*ln, 1, "separation table is incomplete"));
        }
        let mut separation = Vec::with_capacity(k);
        for (ln, row) in &lines[1..=k] {
            if row.len() != k {
                return Err(InstanceError::parse(*ln, 1, format!("expected {k} separations")));
            }
            separation.push(row.clone());
        }
        let mut aircraft = Vec::new();
        for (ln, v) in &lines[1 + k..] {
            if v.len() != 5 {
                return Err(InstanceError::parse(*ln, 1, "expected `class op u v c`"));
            }
            aircraft.push(Aircraft {
                class: require_integer(v[0], *ln, "class")?,
                operation: require_integer(v[1], *ln, "operation")?,
                release: v[2],
                due: v[3],
                cost: v[4],
            });
        }
        Self::new(runways, classes, separation, aircraft)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.runways, self.classes);
        for row in &self.separation {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        for a in &self.aircraft {
            s.push_str(&format!("{} {} {} {} {}\n", a.class, a.operation, a.release, a.due, a.cost));
        }
        s
    }

    /// Random instance with three classes (heavy, large, small) and an
    /// FAA-like separation table with small random increments.
    pub fn generate(aircraft: usize, runways: usize, seed: u64) -> Self {
        // leader rows, follower columns: heavy, large, small
        const LAND_LAND: [[f64; 3]; 3] = [[96.0, 157.0, 196.0], [60.0, 69.0, 131.0], [60.0, 69.0, 82.0]];
        const TAKE_TAKE: [[f64; 3]; 3] = [[96.0, 120.0, 120.0], [60.0, 60.0, 60.0], [60.0, 60.0, 60.0]];
        const LAND_TAKE: f64 = 75.0;
        const TAKE_LAND: f64 = 60.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut separation = vec![vec![0.0; 6]; 6];
        for g1 in 0..3 {
            for g2 in 0..3 {
                let base = [
                    [TAKE_TAKE[g1][g2], TAKE_LAND],
                    [LAND_TAKE, LAND_LAND[g1][g2]],
                ];
                for o1 in 0..2 {
                    for o2 in 0..2 {
                        separation[g1 * 2 + o1][g2 * 2 + o2] = base[o1][o2] + rng.gen_range(0..=10) as f64;
                    }
                }
            }
        }
        let spread = (100 * aircraft / runways.max(1)).max(1) as u32;
        let list = (0..aircraft)
            .map(|_| {
                let release = rng.gen_range(0..=spread) as f64;
                Aircraft {
                    class: rng.gen_range(0..3),
                    operation: rng.gen_range(0..2),
                    release,
                    due: release + rng.gen_range(300..=900) as f64,
                    cost: rng.gen_range(1..=5) as f64,
                }
            })
            .collect();
        MraspInstance {
            runways,
            classes: 3,
            separation,
            aircraft: list,
        }
    }

    pub fn len(&self) -> usize {
        self.aircraft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aircraft.is_empty()
    }

    fn pairs(&self) -> usize {
        2 * self.classes
    }

    /// Class-operation pair of an aircraft.
    pub fn pair(&self, a: usize) -> usize {
        let x = &self.aircraft[a];
        x.class * 2 + x.operation
    }

    /// Pairs `q` reached faster through some intermediate operation than
    /// directly: `d[k1][k2] + d[k2][q] < d[k1][q]`.
    pub fn triangle_violations(&self) -> Vec<usize> {
        let k = self.pairs();
        let d = &self.separation;
        (0..k)
            .filter(|&q| (0..k).any(|a| (0..k).any(|b| d[a][b] + d[b][q] < d[a][q])))
            .collect()
    }

    /// Earliest operation times of a runway sequence, checking the
    /// separation to every earlier operation.
    pub fn plan_times(&self, sequence: &[usize]) -> Vec<f64> {
        let mut times: Vec<f64> = Vec::with_capacity(sequence.len());
        for (k, &a) in sequence.iter().enumerate() {
            let t = sequence[..k]
                .iter()
                .zip(&times)
                .map(|(&b, &tb)| tb + self.separation[self.pair(b)][self.pair(a)])
                .fold(self.aircraft[a].release, f64::max);
            times.push(t);
        }
        times
    }

    /// Whether every operation of the sequence meets its due time.
    pub fn plan_feasible(&self, sequence: &[usize]) -> bool {
        self.plan_times(sequence)
            .iter()
            .zip(sequence)
            .all(|(t, &a)| *t <= self.aircraft[a].due)
    }

    pub fn plan(&self, sequence: &[usize]) -> Column {
        let n = self.len();
        let cost = self
            .plan_times(sequence)
            .iter()
            .zip(sequence)
            .map(|(t, &a)| t * self.aircraft[a].cost)
            .sum();
        let mut coeffs: Vec<(usize, f64)> = sequence.iter().map(|&a| (a, 1.0)).collect();
        coeffs.sort_unstable_by_key(|c| c.0);
        coeffs.push((n, 1.0));
        Column::new(cost, coeffs, sequence.to_vec())
    }

    /// Allowed immediate successions under the decisions; index `A` is the
    /// start as a row and the end as a column.
    pub fn successors(&self, decisions: &[BranchingDecision]) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut s = vec![vec![true; n + 1]; n + 1];
        for a in 0..n {
            s[a][a] = false;
        }
        for d in decisions {
            match *d {
                BranchingDecision::SuccessorForbid { first, second } => s[first][second] = false,
                BranchingDecision::SuccessorForce { first, second } => {
                    if first != n {
                        for x in (0..=n).filter(|&x| x != second) {
                            s[first][x] = false;
                        }
                    }
                    if second != n {
                        for x in (0..=n).filter(|&x| x != first) {
                            s[x][second] = false;
                        }
                    }
                }
                _ => {}
            }
        }
        s
    }

    /// Pricing model: sequence aircraft one by one at their earliest times,
    /// or stop. Its value minus the fleet dual is the reduced cost of the
    /// plan.
    pub fn pricing_model(&self, succ: &[Vec<bool>], duals: &[f64]) -> Result<Model, ModelError> {
        let n = self.len();
        let k = self.pairs();
        let violating = self.triangle_violations();
        let mut b = ModelBuilder::new();
        let m = b.add_set_var("M", n, Resource::PreferGreater, Set::from_members(n, (0..n).filter(|&a| succ[n][a])))?;
        let i = b.add_element_var("i", n, Resource::None, n)?;
        let f = b.add_element_var("f", 1, Resource::None, 0)?;
        let t = b.add_numeric_var("t", Resource::PreferLess, 0.0);
        let e: Vec<_> = violating
            .iter()
            .map(|q| b.add_numeric_var(&format!("e{q}"), Resource::PreferLess, 0.0))
            .collect();

        // the dummy start has pair k, separated by zero from everything
        let mut sep = vec![0.0; (k + 1) * (k + 1)];
        for (r, row) in self.separation.iter().enumerate() {
            sep[r * (k + 1)..r * (k + 1) + k].copy_from_slice(row);
        }
        let sep = b.add_numeric_table("sep", vec![k + 1, k + 1], sep)?;
        let pair: Vec<usize> = (0..n).map(|a| self.pair(a)).chain([k]).collect();
        let pair = b.add_element_table("pair", vec![n + 1], pair)?;
        let column = |f: &dyn Fn(&Aircraft) -> f64| -> Vec<f64> {
            let mut v: Vec<f64> = self.aircraft.iter().map(f).collect();
            v.push(0.0);
            v
        };
        let u = b.add_numeric_table("u", vec![n + 1], column(&|a| a.release))?;
        let v = b.add_numeric_table("v", vec![n + 1], column(&|a| a.due))?;
        let c = b.add_numeric_table("c", vec![n + 1], column(&|a| a.cost))?;
        let mut pi = duals[..n].to_vec();
        pi.push(0.0);
        let pi = b.add_numeric_table("pi", vec![n + 1], pi)?;
        let s = b.add_bool_table("S", vec![n + 1, n + 1], succ.iter().flatten().copied().collect())?;

        let cur = ElemExpr::from(i);
        let j = ElemExpr::param(0);
        let pair_of = |x: ElemExpr| ElemExpr::Table(pair, Box::new([x]));
        for q in 0..k {
            let members = Set::from_members(n, (0..n).filter(|&a| self.pair(a) == q));
            if members.is_empty() {
                continue;
            }
            let mut start = (NumExpr::from(t) + NumExpr::table(sep, [pair_of(cur.clone()), ElemExpr::Const(q)]))
                .max(NumExpr::table(u, [j.clone()]));
            if let Some(pos) = violating.iter().position(|&x| x == q) {
                start = start.max(e[pos]);
            }
            let x = ElemExpr::param(1);
            let reachable = SetExpr::from(m).remove(j.clone()).filter(
                (start.clone() + NumExpr::table(sep, [ElemExpr::Const(q), pair_of(x.clone())]))
                    .le(NumExpr::table(v, [x])),
            );
            let mut tr = Transition::new("schedule")
                .over_set(SetExpr::from(m).intersection(SetExpr::Const(members)))
                .pre(ElemExpr::from(f).eq(0))
                .pre(Cond::table(s, [cur.clone(), j.clone()]))
                .pre(start.clone().le(NumExpr::table(v, [j.clone()])))
                .set(m, reachable)
                .elem(i, j.clone())
                .num(t, start.clone())
                .weight(NumExpr::table(c, [j.clone()]) * start.clone() - NumExpr::table(pi, [j.clone()]));
            for (pos, &r) in violating.iter().enumerate() {
                tr = tr.num(
                    e[pos],
                    NumExpr::from(e[pos]).max(start.clone() + NumExpr::table(sep, [ElemExpr::Const(q), ElemExpr::Const(r)])),
                );
            }
            b.add_transition(tr);
        }
        b.add_transition(
            Transition::new("stop")
                .pre(ElemExpr::from(f).eq(0))
                .pre(Cond::table(s, [cur, ElemExpr::Const(n)]))
                .elem(f, ElemExpr::Const(1)),
        );
        b.add_base_case(vec![ElemExpr::from(f).eq(1)], NumExpr::Const(0.0));
        b.add_dual_bound(NumExpr::sum_over(
            SetExpr::from(m),
            (NumExpr::table(u, [ElemExpr::param(0)]) * NumExpr::table(c, [ElemExpr::param(0)])
                - NumExpr::table(pi, [ElemExpr::param(0)]))
            .min(0.0),
        ));
        b.build()
    }
}

struct MraspPricing<'a> {
    inst: &'a MraspInstance,
    succ: Vec<Vec<bool>>,
}

impl PricingAdapter for MraspPricing<'_> {
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError> {
        Ok(self.inst.pricing_model(&self.succ, duals)?)
    }

    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError> {
        replay(model, path)?;
        let sequence: Vec<usize> = path
            .iter()
            .filter(|t| model.transition(**t).name == "schedule")
            .filter_map(|t| t.param)
            .collect();
        Ok(self.inst.plan(&sequence))
    }

    fn offset(&self, duals: &[f64]) -> f64 {
        -duals[self.inst.len()]
    }
}

impl BnpProblem for MraspInstance {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.len() {
            lp.add_row(Sense::Ge, 1.0);
        }
        lp.add_row(Sense::Le, self.runways as f64);
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let mut cols: Vec<Column> = (0..self.len()).map(|a| self.plan(&[a])).collect();
        cols.extend((0..self.len()).map(|a| Column::artificial(a, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        Some(Box::new(MraspPricing {
            inst: self,
            succ: self.successors(decisions),
        }))
    }

    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool {
        let n = self.len();
        let s = self.successors(decisions);
        route_arcs(&column.tag, n, n).iter().all(|&(a, b)| s[a][b])
    }

    /// Branches on the immediate succession with the most fractional flow.
    fn branch(
        &self,
        columns: &[Column],
        primal: &[f64],
        _decisions: &[BranchingDecision],
    ) -> Result<Branch, BnpError> {
        let n = self.len();
        let mut flow = std::collections::BTreeMap::new();
        for (c, &x) in columns.iter().zip(primal) {
            if c.artificial || x <= INT_EPS || c.tag.is_empty() {
                continue;
            }
            for arc in route_arcs(&c.tag, n, n) {
                *flow.entry(arc).or_insert(0.0) += x;
            }
        }
        let ((first, second), _) = most_fractional(flow).ok_or(BnpError::NoBranchingCandidate)?;
        Ok(Branch::Children(
            vec![BranchingDecision::SuccessorForbid { first, second }],
            vec![BranchingDecision::SuccessorForce { first, second }],
        ))
    }

    fn integral_objective(&self) -> bool {
        all_integral(
            self.separation
                .iter()
                .flatten()
                .copied()
                .chain(self.aircraft.iter().flat_map(|a| [a.release, a.cost])),
        )
    }
}

impl Family for MraspInstance {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Mrasp
    }

    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        let runways = columns
            .iter()
            .flat_map(|(c, k)| std::iter::repeat(c).take(*k as usize))
            .map(|c| {
                c.tag
                    .iter()
                    .zip(self.plan_times(&c.tag))
                    .map(|(&id, start)| TimedTask { id, start })
                    .collect()
            })
            .collect();
        SolutionView::RunwayPlans { runways }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{SearchLimits, SearchOptions, Solver};

    const TEXT: &str = "\
1 1
2 5
5 1
0 0 0 100 1
0 1 0 100 2
0 0 3 100 1
";

    #[test]
    fn parses_native_text() {
        let inst = MraspInstance::parse(TEXT).unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst.pair(1), 1);
        assert_eq!(inst.separation[0][1], 5.0);
        assert_eq!(MraspInstance::parse(&inst.to_text()).unwrap(), inst);
        assert!(matches!(
            MraspInstance::parse("1 1\n2 5\n"),
            Err(InstanceError::Parse { .. })
        ));
    }

    #[test]
    fn times_check_every_earlier_operation() {
        // takeoff -> landing -> takeoff: 0 + 5 = 5, then max(5 + 5, 0 + 2) = 10
        let inst = MraspInstance::parse(TEXT).unwrap();
        assert_eq!(inst.plan_times(&[0, 1, 2]), vec![0.0, 5.0, 10.0]);
        let mut cheap = inst.clone();
        cheap.separation = vec![vec![9.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(cheap.triangle_violations(), vec![0]);
        // the landing in between does not shorten the takeoff gap
        assert_eq!(cheap.plan_times(&[0, 1, 2]), vec![0.0, 1.0, 9.0]);
    }

    #[test]
    fn master_has_cover_rows_then_fleet_row() {
        let inst = MraspInstance::parse(TEXT).unwrap();
        let lp = inst.master_rows();
        assert_eq!(lp.num_rows(), 4);
        assert_eq!(lp.row_sense(0), Sense::Ge);
        assert_eq!(lp.row_sense(3), Sense::Le);
        assert_eq!(lp.row_rhs(3), 1.0);
    }

    #[test]
    fn pricing_matches_plan_enumeration() {
        let mut inst = MraspInstance::parse(TEXT).unwrap();
        inst.separation = vec![vec![9.0, 1.0], vec![1.0, 1.0]];
        let duals = [20.0, 7.0, 15.0, -1.0];
        let m = inst.pricing_model(&inst.successors(&[]), &duals).unwrap();
        let r = Solver::Exhaustive
            .solve(&m, &SearchLimits::default(), &SearchOptions::default())
            .unwrap();
        let mut best = 0.0f64;
        for seq in [vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]] {
            for len in 1..=3 {
                let p = inst.plan(&seq[..len]);
                let rc = p.cost - seq[..len].iter().map(|&a| duals[a]).sum::<f64>();
                best = best.min(rc);
            }
        }
        assert_eq!(r.best_cost(), Some(best));
    }

    #[test]
    fn forced_succession_restricts_both_sides() {
        let inst = MraspInstance::parse(TEXT).unwrap();
        let s = inst.successors(&[BranchingDecision::SuccessorForce { first: 0, second: 1 }]);
        assert!(s[0][1] && !s[0][2] && !s[0][3]);
        assert!(!s[2][1] && !s[3][1]);
        let s = inst.successors(&[BranchingDecision::SuccessorForce { first: 3, second: 2 }]);
        assert!(!s[0][2] && !s[1][2] && s[3][0]);
    }
}

//! Identical parallel machines, total weighted completion time: each column
//! is the schedule of one machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{all_integral, numeric_lines, replay, require_integer, Family, InstanceError, ProblemKind, SolutionView, TimedTask};
use crate::bnp::{Branch, BnpError, BnpProblem, BranchingDecision, INT_EPS};
use crate::colgen::{ColgenError, Column, PricingAdapter};
use crate::expr::{ElemExpr, KnapsackSpec, NumExpr, SetExpr};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition, TransitionRef};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

/// The three processing-time/weight distributions of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PmsConfig {
    /// `p` in [1, 10], `w` in [10, 100].
    ShortHeavy,
    /// `p` and `w` in [1, 100].
    Wide,
    /// `p` and `w` in [10, 20].
    Narrow,
}

impl PmsConfig {
    /// Configs numbered 1 to 3.
    pub fn from_number(k: u32) -> Option<Self> {
        match k {
            1 => Some(PmsConfig::ShortHeavy),
            2 => Some(PmsConfig::Wide),
            3 => Some(PmsConfig::Narrow),
            _ => None,
        }
    }

    fn ranges(self) -> ((u32, u32), (u32, u32)) {
        match self {
            PmsConfig::ShortHeavy => ((1, 10), (10, 100)),
            PmsConfig::Wide => ((1, 100), (1, 100)),
            PmsConfig::Narrow => ((10, 20), (10, 20)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmsInstance {
    pub machines: usize,
    /// Jobs in Smith order: non-increasing `w / p`, ties by input index.
    pub processing: Vec<f64>,
    pub weights: Vec<f64>,
    /// Earliest start of each job.
    pub release: Vec<f64>,
    /// Latest completion of each job.
    pub deadline: Vec<f64>,
    pub horizon: f64,
    /// Input index of each job.
    pub original: Vec<usize>,
}

impl PmsInstance {
    /// Jobs as `(p, w)` in input order; optional windows as
    /// `(earliest start, latest completion)`, defaulting to `(0, H)`.
    pub fn new(
        machines: usize,
        jobs: &[(f64, f64)],
        windows: Option<&[(f64, f64)]>,
    ) -> Result<Self, InstanceError> {
        if machines == 0 {
            return Err(InstanceError::Semantic("no machines".into()));
        }
        for (j, &(p, w)) in jobs.iter().enumerate() {
            if p <= 0.0 || w < 0.0 {
                return Err(InstanceError::Semantic(format!(
                    "job {j} needs p > 0 and w >= 0"
                )));
            }
        }
        let m = machines as f64;
        let total: f64 = jobs.iter().map(|j| j.0).sum();
        let longest = jobs.iter().map(|j| j.0).fold(0.0, f64::max);
        let horizon = total / m + (m - 1.0) * longest / m;
        let mut order: Vec<usize> = (0..jobs.len()).collect();
        // w_a / p_a > w_b / p_b  <=>  w_a * p_b > w_b * p_a
        order.sort_by(|&a, &b| {
            (jobs[b].1 * jobs[a].0)
                .total_cmp(&(jobs[a].1 * jobs[b].0))
                .then(a.cmp(&b))
        });
        let window = |j: usize| windows.map_or((0.0, horizon), |w| (w[j].0, w[j].1.min(horizon)));
        let inst = PmsInstance {
            machines,
            processing: order.iter().map(|&j| jobs[j].0).collect(),
            weights: order.iter().map(|&j| jobs[j].1).collect(),
            release: order.iter().map(|&j| window(j).0).collect(),
            deadline: order.iter().map(|&j| window(j).1).collect(),
            horizon,
            original: order,
        };
        for k in 0..inst.len() {
            if inst.release[k] + inst.processing[k] > inst.deadline[k] {
                return Err(InstanceError::Semantic(format!(
                    "job {} cannot meet its window",
                    inst.original[k]
                )));
            }
        }
        Ok(inst)
    }

    /// Native text: `n m`, then one job per line as `p w` or `p w r d`
    /// (earliest start, latest completion).
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let lines = numeric_lines(text)?;
        let (ln, head) = lines.first().ok_or_else(|| InstanceError::parse(1, 1, "empty input"))?;
        if head.len() != 2 {
            return Err(InstanceError::parse(*ln, 1, "expected `n m`"));
        }
        let n = require_integer(head[0], *ln, "job count")?;
        let m = require_integer(head[1], *ln, "machine count")?;
        let rows = &lines[1..];
        if rows.len() != n {
            return Err(InstanceError::parse(
                rows.last().map_or(*ln, |r| r.0),
                1,
                format!("expected {n} jobs, found {}", rows.len()),
            ));
        }
        let mut jobs = Vec::with_capacity(n);
        let mut windows = Vec::with_capacity(n);
        let mut explicit = false;
        for (ln, v) in rows {
            match v.len() {
                2 => windows.push((0.0, f64::INFINITY)),
                4 => {
                    explicit = true;
                    windows.push((v[2], v[3]));
                }
                _ => return Err(InstanceError::parse(*ln, 1, "expected `p w` or `p w r d`")),
            }
            jobs.push((v[0], v[1]));
        }
        Self::new(m, &jobs, explicit.then_some(&windows[..]))
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![String::new(); self.len()];
        for k in 0..self.len() {
            rows[self.original[k]] = format!(
                "{} {} {} {}",
                self.processing[k], self.weights[k], self.release[k], self.deadline[k]
            );
        }
        format!("{} {}\n{}\n", self.len(), self.machines, rows.join("\n"))
    }

    /// Random instance from one of the three distributions.
    pub fn generate(n: usize, machines: usize, config: PmsConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ((p0, p1), (w0, w1)) = config.ranges();
        let jobs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(p0..=p1) as f64, rng.gen_range(w0..=w1) as f64))
            .collect();
        Self::new(machines, &jobs, None).expect("generated jobs are valid")
    }

    pub fn len(&self) -> usize {
        self.processing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processing.is_empty()
    }

    /// Windows after the branching decisions; `None` if a window empties.
    pub fn windows(&self, decisions: &[BranchingDecision]) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut r = self.release.clone();
        let mut d = self.deadline.clone();
        for dec in decisions {
            match *dec {
                BranchingDecision::JobDeadline { job, deadline } => d[job] = d[job].min(deadline as f64),
                BranchingDecision::JobRelease { job, release } => r[job] = r[job].max(release as f64),
                _ => {}
            }
        }
        (0..self.len())
            .all(|k| r[k] + self.processing[k] <= d[k])
            .then_some((r, d))
    }

    /// Pricing model: jobs are considered in Smith order and either start
    /// now or are skipped. Its value minus the convexity dual is the reduced
    /// cost of the schedule.
    pub fn pricing_model(&self, release: &[f64], deadline: &[f64], duals: &[f64]) -> Result<Model, ModelError> {
        let n = self.len();
        let mut b = ModelBuilder::new();
        let j = b.add_element_var("j", n, Resource::None, 0)?;
        let t = b.add_numeric_var("t", Resource::None, 0.0);
        let dim = vec![n.max(1)];
        let padded = |v: &[f64]| if n == 0 { vec![0.0] } else { v.to_vec() };
        let p = b.add_numeric_table("p", dim.clone(), padded(&self.processing))?;
        let w = b.add_numeric_table("w", dim.clone(), padded(&self.weights))?;
        let r = b.add_numeric_table("r", dim.clone(), padded(release))?;
        let d = b.add_numeric_table("d", dim.clone(), padded(deadline))?;
        let pi = b.add_numeric_table("pi", dim, padded(&duals[..n]))?;
        let suffix: Vec<Set> = (0..=n).map(|k| Set::from_members(n, k..n)).collect();
        let after = b.add_set_table("suffix", vec![n + 1], suffix)?;

        let cur = ElemExpr::from(j);
        let done = NumExpr::from(t) + NumExpr::table(p, [cur.clone()]);
        b.add_transition(
            Transition::new("include")
                .pre(cur.clone().ne(n))
                .pre(NumExpr::table(r, [cur.clone()]).le(t))
                .pre(done.clone().le(NumExpr::table(d, [cur.clone()])))
                .elem(j, cur.clone() + ElemExpr::Const(1))
                .num(t, done.clone())
                .weight(NumExpr::table(w, [cur.clone()]) * done - NumExpr::table(pi, [cur.clone()])),
        );
        b.add_transition(
            Transition::new("skip")
                .pre(cur.clone().ne(n))
                .elem(j, cur.clone() + ElemExpr::Const(1)),
        );
        b.add_base_case(vec![cur.clone().eq(n)], NumExpr::Const(0.0));
        b.add_dual_bound(-NumExpr::knapsack(KnapsackSpec {
            items: SetExpr::Table(after, Box::new([cur])),
            capacity: NumExpr::Const(self.horizon) - t,
            profits: (0..n)
                .map(|k| NumExpr::Const(duals[k] - self.weights[k] * (release[k] + self.processing[k])))
                .collect(),
            weights: self.processing.iter().map(|&x| NumExpr::Const(x)).collect(),
        }));
        b.build()
    }

    /// Column for jobs started at the given times (ascending starts).
    pub fn schedule(&self, jobs: &[(usize, f64)]) -> Column {
        let n = self.len();
        let cost = jobs
            .iter()
            .map(|&(k, s)| self.weights[k] * (s + self.processing[k]))
            .sum();
        let mut coeffs: Vec<(usize, f64)> = jobs.iter().map(|&(k, _)| (k, 1.0)).collect();
        coeffs.sort_unstable_by_key(|c| c.0);
        coeffs.push((n, 1.0));
        let tag = jobs.iter().flat_map(|&(k, s)| [k, s as usize]).collect();
        Column::new(cost, coeffs, tag)
    }
}

/// `(job, start)` pairs of a schedule column.
pub fn scheduled_jobs(column: &Column) -> impl Iterator<Item = (usize, f64)> + '_ {
    column.tag.chunks(2).map(|c| (c[0], c[1] as f64))
}

struct PmsPricing<'a> {
    inst: &'a PmsInstance,
    release: Vec<f64>,
    deadline: Vec<f64>,
}

impl PricingAdapter for PmsPricing<'_> {
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError> {
        Ok(self.inst.pricing_model(&self.release, &self.deadline, duals)?)
    }

    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError> {
        let states = replay(model, path)?;
        let jobs: Vec<(usize, f64)> = states
            .iter()
            .zip(path)
            .filter(|(_, t)| model.transition(**t).name == "include")
            .map(|(s, _)| (s.elements[0], s.numerics[0]))
            .collect();
        Ok(self.inst.schedule(&jobs))
    }

    fn offset(&self, duals: &[f64]) -> f64 {
        -duals[self.inst.len()]
    }
}

impl BnpProblem for PmsInstance {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.len() {
            lp.add_row(Sense::Eq, 1.0);
        }
        lp.add_row(Sense::Eq, self.machines as f64);
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let mut cols = vec![self.schedule(&[])];
        cols.extend(
            (0..self.len())
                .filter(|&k| self.release[k] <= 0.0 && self.processing[k] <= self.deadline[k])
                .map(|k| self.schedule(&[(k, 0.0)])),
        );
        cols.extend((0..self.len()).map(|k| Column::artificial(k, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        let (release, deadline) = self.windows(decisions)?;
        Some(Box::new(PmsPricing {
            inst: self,
            release,
            deadline,
        }))
    }

    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool {
        scheduled_jobs(column).all(|(k, s)| {
            decisions.iter().all(|d| match *d {
                BranchingDecision::JobDeadline { job, deadline } => {
                    job != k || s + self.processing[k] <= deadline as f64
                }
                BranchingDecision::JobRelease { job, release } => job != k || s >= release as f64,
                _ => true,
            })
        })
    }

    /// Splits the completion time of the first job that completes at
    /// different times in the LP solution; if every job has a single
    /// completion time, the intervals are colored with the machines.
    fn branch(
        &self,
        columns: &[Column],
        primal: &[f64],
        _decisions: &[BranchingDecision],
    ) -> Result<Branch, BnpError> {
        let n = self.len();
        let mut profile: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
        for (c, &x) in columns.iter().zip(primal) {
            if c.artificial || x <= INT_EPS {
                continue;
            }
            for (k, s) in scheduled_jobs(c) {
                profile[k].push((s + self.processing[k], x));
            }
        }
        for (k, prof) in profile.iter().enumerate() {
            let lo = prof.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            let hi = prof.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                let total: f64 = prof.iter().map(|e| e.1).sum();
                let mean = prof.iter().map(|e| e.0 * e.1).sum::<f64>() / total;
                let threshold = mean.floor().clamp(lo, hi - 1.0) as i64;
                let release = threshold - self.processing[k] as i64 + 1;
                return Ok(Branch::Children(
                    vec![BranchingDecision::JobDeadline { job: k, deadline: threshold }],
                    vec![BranchingDecision::JobRelease { job: k, release }],
                ));
            }
        }
        let mut intervals: Vec<(f64, usize)> = profile
            .iter()
            .enumerate()
            .filter_map(|(k, prof)| prof.first().map(|e| (e.0 - self.processing[k], k)))
            .collect();
        if intervals.len() != n {
            return Err(BnpError::NoBranchingCandidate);
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut machines: Vec<(f64, Vec<(usize, f64)>)> = vec![(0.0, Vec::new()); self.machines];
        for (start, k) in intervals {
            let slot = machines
                .iter_mut()
                .find(|m| m.0 <= start + INT_EPS)
                .ok_or(BnpError::NoBranchingCandidate)?;
            slot.0 = start + self.processing[k];
            slot.1.push((k, start));
        }
        Ok(Branch::Integral(
            machines.iter().map(|m| self.schedule(&m.1)).collect(),
        ))
    }

    fn integral_objective(&self) -> bool {
        all_integral(self.processing.iter().chain(&self.weights).copied())
    }
}

impl Family for PmsInstance {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Pms
    }

    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        let machines = columns
            .iter()
            .flat_map(|(c, k)| std::iter::repeat(c).take(*k as usize))
            .map(|c| {
                scheduled_jobs(c)
                    .map(|(k, s)| TimedTask {
                        id: self.original[k],
                        start: s,
                    })
                    .collect()
            })
            .collect();
        SolutionView::Schedules { machines }
    }
}

//! Pickup and delivery with time windows: every route pays a fixed vehicle
//! cost plus its distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arcs::{arc_branch, is_elementary};
use super::routing::{cheapest_arcs, scaled_distance, shortest_paths, SiteRow};
use super::{
    all_integral, allowed_arcs, numeric_lines, replay, require_integer, route_arcs, Family, InstanceError,
    ProblemKind, Route, SolutionView,
};
use crate::bnp::{Branch, BnpError, BnpProblem, BranchingDecision};
use crate::colgen::{ColgenError, Column, PricingAdapter};
use crate::expr::{BoolTableId, Cond, ElemExpr, ElemVar, KnapsackSpec, NumExpr, NumTableId, NumVar, SetExpr, SetVar};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition, TransitionRef};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

/// Fixed cost of every route, so that fewer vehicles always win.
pub const VEHICLE_COST: f64 = 10_000.0;

/// One task line of a Li & Lim file, in file units. Pickups have a positive
/// demand and name their delivery; deliveries name their pickup.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRow {
    pub site: SiteRow,
    pub pickup: usize,
    pub delivery: usize,
}

/// Locations `0..=2n+1`: `0` is the start depot, `j` the pickup of task `j`,
/// `n + j` its delivery and `2n + 1` the end depot. Times and distances are
/// in tenths of the file units; windows are tightened and arcs reduced on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PdptwInstance {
    pub rows: Vec<TaskRow>,
    pub vehicles: usize,
    pub capacity: f64,
    pub speed: f64,
    /// File row of each location.
    pub row_of: Vec<usize>,
    /// Load change at each location.
    pub load: Vec<f64>,
    pub ready: Vec<f64>,
    pub due: Vec<f64>,
    pub service: Vec<f64>,
    pub dist: Vec<Vec<f64>>,
    pub arcs: Vec<Vec<bool>>,
    pub shortest: Vec<Vec<f64>>,
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
}

impl PdptwInstance {
    pub fn new(vehicles: usize, capacity: f64, speed: f64, rows: Vec<TaskRow>) -> Result<Self, InstanceError> {
        if rows.is_empty() {
            return Err(InstanceError::Semantic("missing depot".into()));
        }
        let mut pickups = Vec::new();
        for (r, row) in rows.iter().enumerate().skip(1) {
            let s = &row.site;
            if s.service < 0.0 || s.due < s.ready {
                return Err(InstanceError::Semantic(format!("task {r} has an empty window")));
            }
            if s.demand > 0.0 || (s.demand == 0.0 && row.delivery != 0) {
                let d = row.delivery;
                if d == 0 || d >= rows.len() || rows[d].pickup != r {
                    return Err(InstanceError::Semantic(format!("pickup {r} has no matching delivery")));
                }
                if rows[d].site.demand != -s.demand {
                    return Err(InstanceError::Semantic(format!("task {r} delivers a different load")));
                }
                if s.demand > capacity {
                    return Err(InstanceError::Infeasible(format!("task {r} exceeds the capacity")));
                }
                pickups.push((r, d));
            } else {
                let p = row.pickup;
                if p == 0 || p >= rows.len() || rows[p].delivery != r {
                    return Err(InstanceError::Semantic(format!("delivery {r} has no matching pickup")));
                }
            }
        }
        let n = pickups.len();
        if rows.len() != 2 * n + 1 {
            return Err(InstanceError::Semantic("every task needs one pickup and one delivery".into()));
        }
        let mut row_of = vec![0; 2 * n + 2];
        for (k, &(p, d)) in pickups.iter().enumerate() {
            row_of[k + 1] = p;
            row_of[n + k + 1] = d;
        }
        let site = |loc: usize| &rows[row_of[loc]].site;
        let locations = 2 * n + 2;
        let depot = |loc: usize| loc == 0 || loc == 2 * n + 1;
        let load: Vec<f64> = (0..locations).map(|k| if depot(k) { 0.0 } else { site(k).demand }).collect();
        let service: Vec<f64> = (0..locations)
            .map(|k| if depot(k) { 0.0 } else { 10.0 * site(k).service })
            .collect();
        let dist: Vec<Vec<f64>> = (0..locations)
            .map(|i| (0..locations).map(|j| scaled_distance(site(i), site(j)) / speed.max(1e-9)).collect())
            .collect();
        let mut inst = PdptwInstance {
            vehicles,
            capacity,
            speed,
            ready: (0..locations).map(|k| 10.0 * site(k).ready).collect(),
            due: (0..locations).map(|k| 10.0 * site(k).due).collect(),
            row_of,
            load,
            service,
            dist,
            arcs: Vec::new(),
            shortest: Vec::new(),
            d_in: Vec::new(),
            d_out: Vec::new(),
            rows,
        };
        inst.preprocess()?;
        Ok(inst)
    }

    /// Li & Lim text: `K Q S`, then one line of nine numbers per task
    /// (`id x y demand ready due service pickup delivery`), depot first.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let lines = numeric_lines(text)?;
        let (ln, head) = lines.first().ok_or_else(|| InstanceError::parse(1, 1, "empty input"))?;
        if head.len() != 3 {
            return Err(InstanceError::parse(*ln, 1, "expected `vehicles capacity speed`"));
        }
        let vehicles = require_integer(head[0], *ln, "vehicle count")?;
        let mut rows = Vec::new();
        for (ln, v) in &lines[1..] {
            if v.len() != 9 {
                return Err(InstanceError::parse(*ln, 1, "expected nine numbers per task"));
            }
            rows.push(TaskRow {
                site: SiteRow {
                    x: v[1],
                    y: v[2],
                    demand: v[3],
                    ready: v[4],
                    due: v[5],
                    service: v[6],
                },
                pickup: require_integer(v[7], *ln, "pickup index")?,
                delivery: require_integer(v[8], *ln, "delivery index")?,
            });
        }
        Self::new(vehicles, head[1], head[2], rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.vehicles, self.capacity, self.speed);
        for (k, r) in self.rows.iter().enumerate() {
            let x = &r.site;
            s.push_str(&format!(
                "{k} {} {} {} {} {} {} {} {}\n",
                x.x, x.y, x.demand, x.ready, x.due, x.service, r.pickup, r.delivery
            ));
        }
        s
    }

    /// Random instance on a 20 x 20 grid where each task fits a route of
    /// its own.
    pub fn random(tasks: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let horizon = 200.0;
        let service = 2.0;
        let depot = SiteRow {
            x: 10.0,
            y: 10.0,
            demand: 0.0,
            ready: 0.0,
            due: horizon,
            service: 0.0,
        };
        let travel = |a: &SiteRow, b: &SiteRow| scaled_distance(a, b) / 10.0;
        let mut rows = vec![TaskRow {
            site: depot.clone(),
            pickup: 0,
            delivery: 0,
        }];
        for _ in 0..tasks {
            let mut point = || SiteRow {
                x: rng.gen_range(0..=20) as f64,
                y: rng.gen_range(0..=20) as f64,
                demand: 0.0,
                ready: 0.0,
                due: 0.0,
                service,
            };
            let (mut p, mut d) = (point(), point());
            let load = rng.gen_range(1..=5) as f64;
            p.demand = load;
            d.demand = -load;
            // latest pickup start that still allows the delivery and return
            let tail = service + travel(&p, &d) + service + travel(&d, &depot);
            let latest = (horizon - tail).floor().max(travel(&depot, &p).ceil());
            p.ready = rng.gen_range(0..=latest as u32) as f64;
            p.due = (p.ready + rng.gen_range(10..=60) as f64).min(latest).max(travel(&depot, &p).ceil()).max(p.ready);
            let reach = p.ready.max(travel(&depot, &p)) + service + travel(&p, &d);
            let last = (horizon - service - travel(&d, &depot)).floor();
            d.ready = (reach - rng.gen_range(0..=20) as f64).max(0.0).floor();
            d.due = (reach.ceil() + rng.gen_range(10..=80) as f64).min(last).max(reach.ceil());
            let id = rows.len();
            rows.push(TaskRow {
                site: p,
                pickup: 0,
                delivery: id + 1,
            });
            rows.push(TaskRow {
                site: d,
                pickup: id,
                delivery: 0,
            });
        }
        Self::new(tasks.max(1), 10.0, 1.0, rows).expect("generated tasks are feasible")
    }

    pub fn tasks(&self) -> usize {
        (self.load.len() - 2) / 2
    }

    fn end(&self) -> usize {
        self.load.len() - 1
    }

    /// Whether the locations can be visited in order, each as early as
    /// possible, starting at the first window opening.
    fn path_fits(&self, path: &[usize]) -> bool {
        let mut t = self.ready[path[0]];
        for w in path.windows(2) {
            t = (t + self.service[w[0]] + self.dist[w[0]][w[1]]).max(self.ready[w[1]]);
            if t > self.due[w[1]] {
                return false;
            }
        }
        true
    }

    /// Window tightening and arc elimination for paired tasks.
    fn preprocess(&mut self) -> Result<(), InstanceError> {
        let n = self.tasks();
        let end = self.end();
        let locs = end + 1;
        let task = |k: usize| if k > n { k - n } else { k };
        let is_pickup = |k: usize| (1..=n).contains(&k);
        let is_delivery = |k: usize| (n + 1..=2 * n).contains(&k);
        let mut arcs = vec![vec![false; locs]; locs];
        for i in 0..end {
            for j in 1..locs {
                let direct = i == 0 && (j == end || is_delivery(j));
                let pickup_to_end = is_pickup(i) && j == end;
                let back = is_delivery(i) && j == task(i);
                arcs[i][j] = i != j && !direct && !pickup_to_end && !back;
            }
        }
        // loads on board while traversing the arc
        for i in 1..=2 * n {
            for j in 1..=2 * n {
                if !arcs[i][j] {
                    continue;
                }
                let (li, lj) = (self.load[task(i)], self.load[task(j)]);
                let on_board = match (is_pickup(i), is_pickup(j)) {
                    (true, true) => li + lj,
                    (true, false) => li + if task(j) == i { 0.0 } else { lj },
                    (false, false) => li + lj,
                    (false, true) => lj,
                };
                if on_board > self.capacity {
                    arcs[i][j] = false;
                }
            }
        }
        for _ in 0..100 {
            let mut changed = false;
            for i in 1..=n {
                let d = n + i;
                let lo = self.ready[i] + self.service[i] + self.dist[i][d];
                if lo > self.ready[d] {
                    self.ready[d] = lo;
                    changed = true;
                }
                let hi = self.due[d] - self.service[i] - self.dist[i][d];
                if hi < self.due[i] {
                    self.due[i] = hi;
                    changed = true;
                }
            }
            for k in 1..=2 * n {
                let earliest = (0..locs)
                    .filter(|&j| arcs[j][k])
                    .map(|j| self.ready[j] + self.service[j] + self.dist[j][k])
                    .fold(f64::INFINITY, f64::min);
                if earliest > self.ready[k] && earliest.is_finite() {
                    self.ready[k] = earliest;
                    changed = true;
                }
                let latest = (0..locs)
                    .filter(|&j| arcs[k][j])
                    .map(|j| self.due[j] - self.dist[k][j] - self.service[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                if latest < self.due[k] && latest.is_finite() {
                    self.due[k] = latest;
                    changed = true;
                }
            }
            for k in 0..locs {
                if self.ready[k] > self.due[k] {
                    return Err(InstanceError::Infeasible(format!(
                        "the window of location {k} (file task {}) empties",
                        self.row_of[k]
                    )));
                }
            }
            for i in 0..locs {
                for j in 0..locs {
                    if arcs[i][j] && self.ready[i] + self.service[i] + self.dist[i][j] > self.due[j] {
                        arcs[i][j] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // pairs of tasks that cannot share the arc in any order
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let (ni, nj) = (n + i, n + j);
                if arcs[i][j] && !self.path_fits(&[i, j, ni, nj]) && !self.path_fits(&[i, j, nj, ni]) {
                    arcs[i][j] = false;
                }
                if arcs[i][nj] && !self.path_fits(&[j, i, nj, ni]) {
                    arcs[i][nj] = false;
                }
                if arcs[ni][j] && !self.path_fits(&[i, ni, j, nj]) {
                    arcs[ni][j] = false;
                }
                if arcs[ni][nj] && !self.path_fits(&[i, j, ni, nj]) && !self.path_fits(&[j, i, ni, nj]) {
                    arcs[ni][nj] = false;
                }
            }
        }
        for j in 1..=n {
            if !(0..locs).any(|k| arcs[k][j]) || !(0..locs).any(|k| arcs[k][n + j]) {
                return Err(InstanceError::Infeasible(format!("task {j} cannot be served")));
            }
        }
        self.shortest = shortest_paths(&self.dist, &arcs, &self.service);
        let (d_in, d_out) = cheapest_arcs(&self.dist, &arcs);
        self.arcs = arcs;
        self.d_in = d_in;
        self.d_out = d_out;
        Ok(())
    }

    /// Service start times along `0, locations..., 2n+1`, or `None` if a
    /// window, the capacity or the pairing is violated.
    pub fn schedule(&self, locations: &[usize]) -> Option<Vec<f64>> {
        let n = self.tasks();
        let mut open = vec![false; n + 1];
        let (mut t, mut q) = (0.0, 0.0);
        let mut out = vec![0.0];
        for (i, j) in route_arcs(locations, 0, self.end()) {
            t = (t + self.service[i] + self.dist[i][j]).max(self.ready[j]);
            q += self.load[j];
            if t > self.due[j] || q > self.capacity {
                return None;
            }
            match j {
                _ if (1..=n).contains(&j) => {
                    if open[j] {
                        return None;
                    }
                    open[j] = true;
                }
                _ if (n + 1..=2 * n).contains(&j) => {
                    if !open[j - n] {
                        return None;
                    }
                    open[j - n] = false;
                }
                _ => {}
            }
            out.push(t);
        }
        open.iter().all(|o| !o).then_some(out)
    }

    pub fn distance(&self, locations: &[usize]) -> f64 {
        route_arcs(locations, 0, self.end()).iter().map(|&(i, j)| self.dist[i][j]).sum()
    }

    /// Elementary pricing: tasks available for pickup (`R`), tasks on
    /// board (`O`). Its value plus the vehicle cost is the reduced cost.
    pub fn elementary_model(&self, arcs: &[Vec<bool>], duals: &[f64]) -> Result<Model, ModelError> {
        let n = self.tasks();
        let locs = 2 * n + 2;
        let mut b = ModelBuilder::new();
        let r = b.add_set_var("R", locs, Resource::PreferGreater, Set::from_members(locs, 1..=n))?;
        let (o, i, q, t, tabs) = self.common(&mut b, arcs, duals)?;
        let cur = ElemExpr::from(i);
        let j = ElemExpr::param(0);
        let x = ElemExpr::param(1);
        let keep_reachable = |set: SetExpr, at: ElemExpr| {
            let arrival = tabs.arrival(&cur, &at, t);
            set.filter(
                (arrival + NumExpr::table(tabs.service, [at.clone()]) + NumExpr::table(tabs.shortest, [at, x.clone()]))
                    .le(NumExpr::table(tabs.due, [x.clone()])),
            )
        };
        let delivery = j.clone() + ElemExpr::Const(n);
        b.add_transition(
            tabs.pickup(&cur, &j, o, q, t, self.capacity)
                .over_set(SetExpr::from(r))
                .set(r, keep_reachable(SetExpr::from(r).remove(j.clone()), j.clone())),
        );
        b.add_transition(
            tabs.deliver(&cur, &j, o, q, t, n)
                .set(r, keep_reachable(SetExpr::from(r), delivery)),
        );
        b.add_transition(tabs.finish(&cur, o, t, self.end()));
        self.finish_model(&mut b, &tabs, SetExpr::from(r), None, &cur, o, t, duals);
        b.build()
    }

    /// Pricing that may complete a task more than once.
    pub fn relaxed_model(&self, arcs: &[Vec<bool>], duals: &[f64]) -> Result<Model, ModelError> {
        let n = self.tasks();
        let locs = 2 * n + 2;
        let mut b = ModelBuilder::new();
        let (o, i, q, t, tabs) = self.common(&mut b, arcs, duals)?;
        let cur = ElemExpr::from(i);
        let j = ElemExpr::param(0);
        b.add_transition(
            tabs.pickup(&cur, &j, o, q, t, self.capacity)
                .over_values(1..=n)
                .pre(SetExpr::from(o).contains(j.clone()).not()),
        );
        b.add_transition(tabs.deliver(&cur, &j, o, q, t, n));
        b.add_transition(tabs.finish(&cur, o, t, self.end()));
        let x = ElemExpr::param(0);
        let reachable = SetExpr::Const(Set::from_members(locs, 1..=n)).filter(
            (NumExpr::from(t)
                + NumExpr::table(tabs.service, [cur.clone()])
                + NumExpr::table(tabs.shortest, [cur.clone(), x.clone()]))
            .le(NumExpr::table(tabs.due, [x])),
        );
        let copies: Vec<f64> = (0..locs)
            .map(|k| {
                if !(1..=n).contains(&k) {
                    return 0.0;
                }
                let enter = (0..locs)
                    .filter(|&p| self.arcs[p][k])
                    .map(|p| self.service[p] + self.dist[p][k])
                    .fold(f64::INFINITY, f64::min);
                let tail = self.service[n + k] + self.d_out[n + k];
                let cycle = enter + self.service[k] + self.shortest[k][n + k] + tail;
                ((self.due[n + k] + tail) / cycle.max(1e-9)).floor().max(0.0)
            })
            .collect();
        self.finish_model(&mut b, &tabs, reachable, Some(&copies), &cur, o, t, duals);
        b.build()
    }

    #[allow(clippy::type_complexity)]
    fn common(
        &self,
        b: &mut ModelBuilder,
        arcs: &[Vec<bool>],
        duals: &[f64],
    ) -> Result<(SetVar, ElemVar, NumVar, NumVar, Tables), ModelError> {
        let n = self.tasks();
        let locs = 2 * n + 2;
        let o = b.add_set_var("O", locs, Resource::None, Set::empty(locs))?;
        let i = b.add_element_var("i", locs - 1, Resource::None, 0)?;
        let q = b.add_numeric_var("q", Resource::PreferLess, 0.0);
        let t = b.add_numeric_var("t", Resource::PreferLess, 0.0);
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<f64>>();
        let mut pi = vec![0.0; locs];
        pi[1..=n].copy_from_slice(&duals[..n]);
        let tabs = Tables {
            i,
            dist: b.add_numeric_table("d", vec![locs, locs], flat(&self.dist))?,
            shortest: b.add_numeric_table("dstar", vec![locs, locs], flat(&self.shortest))?,
            load: b.add_numeric_table("l", vec![locs], self.load.clone())?,
            ready: b.add_numeric_table("a", vec![locs], self.ready.clone())?,
            due: b.add_numeric_table("b", vec![locs], self.due.clone())?,
            service: b.add_numeric_table("s", vec![locs], self.service.clone())?,
            d_in: b.add_numeric_table("din", vec![locs], self.d_in.clone())?,
            d_out: b.add_numeric_table("dout", vec![locs], self.d_out.clone())?,
            pi: b.add_numeric_table("pi", vec![locs], pi)?,
            arcs: b.add_bool_table("A", vec![locs, locs], arcs.iter().flatten().copied().collect())?,
        };
        Ok((o, i, q, t, tabs))
    }

    /// Base case, the deadline state constraint and the dual bounds.
    #[allow(clippy::too_many_arguments)]
    fn finish_model(
        &self,
        b: &mut ModelBuilder,
        tabs: &Tables,
        items: SetExpr,
        copies: Option<&[f64]>,
        cur: &ElemExpr,
        o: SetVar,
        t: NumVar,
        duals: &[f64],
    ) {
        let n = self.tasks();
        let end = self.end();
        let x = ElemExpr::param(0);
        let x_del = x.clone() + ElemExpr::Const(n);
        b.add_base_case(vec![cur.clone().eq(end)], NumExpr::Const(0.0));
        b.add_state_constraint(
            SetExpr::from(o)
                .filter(
                    (NumExpr::from(t)
                        + NumExpr::table(tabs.service, [cur.clone()])
                        + NumExpr::table(tabs.shortest, [cur.clone(), x_del.clone()]))
                    .le(NumExpr::table(tabs.due, [x_del.clone()]))
                    .not(),
                )
                .is_empty(),
        );
        b.add_dual_bound(NumExpr::if_then_else(cur.clone().eq(end), 0.0, f64::NEG_INFINITY));

        let copies = |k: usize| copies.map_or(1.0, |c| c[k]);
        let item = |k: usize, f: &dyn Fn(usize) -> f64| -> NumExpr {
            if (1..=n).contains(&k) {
                NumExpr::Const(copies(k) * f(k))
            } else {
                NumExpr::Const(0.0)
            }
        };
        let locs = 2 * n + 2;
        let v_in: Vec<NumExpr> = (0..locs)
            .map(|k| item(k, &|k| duals[k - 1] - self.d_in[k] - self.d_in[n + k]))
            .collect();
        let w_in: Vec<NumExpr> = (0..locs)
            .map(|k| item(k, &|k| self.d_in[k] + self.service[k] + self.d_in[n + k] + self.service[n + k]))
            .collect();
        let v_out: Vec<NumExpr> = (0..locs)
            .map(|k| item(k, &|k| duals[k - 1] - self.d_out[k] - self.d_out[n + k]))
            .collect();
        let w_out: Vec<NumExpr> = (0..locs)
            .map(|k| item(k, &|k| self.service[k] + self.d_out[k] + self.service[n + k] + self.d_out[n + k]))
            .collect();
        // time still needed to close the open tasks
        let close_in = NumExpr::sum_over(
            SetExpr::from(o),
            NumExpr::table(tabs.d_in, [x_del.clone()]) + NumExpr::table(tabs.service, [x_del.clone()]),
        ) + self.d_in[end];
        let close_out = NumExpr::sum_over(
            SetExpr::from(o),
            NumExpr::table(tabs.service, [x_del.clone()]) + NumExpr::table(tabs.d_out, [x_del]),
        ) + NumExpr::table(tabs.service, [cur.clone()])
            + NumExpr::table(tabs.d_out, [cur.clone()]);
        for (spent, profits, weights) in [(close_in, v_in, w_in), (close_out, v_out, w_out)] {
            b.add_dual_bound(-NumExpr::knapsack(KnapsackSpec {
                items: items.clone(),
                capacity: NumExpr::Const(self.due[end]) - t - spent,
                profits,
                weights,
            }));
        }
    }
}

struct Tables {
    i: ElemVar,
    dist: NumTableId,
    shortest: NumTableId,
    load: NumTableId,
    ready: NumTableId,
    due: NumTableId,
    service: NumTableId,
    d_in: NumTableId,
    d_out: NumTableId,
    pi: NumTableId,
    arcs: BoolTableId,
}

impl Tables {
    fn travel(&self, from: &ElemExpr, to: &ElemExpr, t: NumVar) -> NumExpr {
        NumExpr::from(t)
            + NumExpr::table(self.service, [from.clone()])
            + NumExpr::table(self.dist, [from.clone(), to.clone()])
    }

    fn arrival(&self, from: &ElemExpr, to: &ElemExpr, t: NumVar) -> NumExpr {
        self.travel(from, to, t).max(NumExpr::table(self.ready, [to.clone()]))
    }

    fn step(&self, name: &str, from: &ElemExpr, to: &ElemExpr, t: NumVar) -> Transition {
        Transition::new(name)
            .pre(Cond::table(self.arcs, [from.clone(), to.clone()]))
            .pre(self.travel(from, to, t).le(NumExpr::table(self.due, [to.clone()])))
            .num(t, self.arrival(from, to, t))
    }

    fn pickup(&self, cur: &ElemExpr, j: &ElemExpr, o: SetVar, q: NumVar, t: NumVar, capacity: f64) -> Transition {
        let loaded = NumExpr::from(q) + NumExpr::table(self.load, [j.clone()]);
        self.step("pickup", cur, j, t)
            .pre(loaded.clone().le(capacity))
            .set(o, SetExpr::from(o).insert(j.clone()))
            .elem(self.i, j.clone())
            .num(q, loaded)
            .weight(NumExpr::table(self.dist, [cur.clone(), j.clone()]) - NumExpr::table(self.pi, [j.clone()]))
    }

    fn deliver(&self, cur: &ElemExpr, j: &ElemExpr, o: SetVar, q: NumVar, t: NumVar, n: usize) -> Transition {
        let at = j.clone() + ElemExpr::Const(n);
        self.step("deliver", cur, &at, t)
            .over_set(SetExpr::from(o))
            .set(o, SetExpr::from(o).remove(j.clone()))
            .elem(self.i, at.clone())
            .num(q, NumExpr::from(q) + NumExpr::table(self.load, [at.clone()]))
            .weight(NumExpr::table(self.dist, [cur.clone(), at]))
    }

    fn finish(&self, cur: &ElemExpr, o: SetVar, t: NumVar, end: usize) -> Transition {
        let to = ElemExpr::Const(end);
        self.step("return", cur, &to, t)
            .pre(SetExpr::from(o).is_empty())
            .elem(self.i, to.clone())
            .weight(NumExpr::table(self.dist, [cur.clone(), to]))
    }
}

/// Pickup and delivery solved by branch-and-price with elementary or
/// relaxed pricing.
#[derive(Debug, Clone)]
pub struct PdptwProblem {
    pub instance: PdptwInstance,
    pub elementary: bool,
}

impl PdptwProblem {
    pub fn new(instance: PdptwInstance, elementary: bool) -> Self {
        PdptwProblem { instance, elementary }
    }

    pub fn route(&self, locations: &[usize]) -> Column {
        let n = self.instance.tasks();
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        let mut pickups: Vec<usize> = locations.iter().copied().filter(|&k| (1..=n).contains(&k)).collect();
        pickups.sort_unstable();
        for j in pickups {
            match coeffs.last_mut() {
                Some(c) if c.0 == j - 1 => c.1 += 1.0,
                _ => coeffs.push((j - 1, 1.0)),
            }
        }
        Column::new(VEHICLE_COST + self.instance.distance(locations), coeffs, locations.to_vec())
    }

    pub fn pricing_model(&self, arcs: &[Vec<bool>], duals: &[f64]) -> Result<Model, ModelError> {
        if self.elementary {
            self.instance.elementary_model(arcs, duals)
        } else {
            self.instance.relaxed_model(arcs, duals)
        }
    }
}

struct PdptwPricing<'a> {
    problem: &'a PdptwProblem,
    arcs: Vec<Vec<bool>>,
}

impl PricingAdapter for PdptwPricing<'_> {
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError> {
        Ok(self.problem.pricing_model(&self.arcs, duals)?)
    }

    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError> {
        let n = self.problem.instance.tasks();
        replay(model, path)?;
        let locations: Vec<usize> = path
            .iter()
            .filter_map(|t| match (model.transition(*t).name.as_str(), t.param) {
                ("pickup", Some(j)) => Some(j),
                ("deliver", Some(j)) => Some(n + j),
                _ => None,
            })
            .collect();
        Ok(self.problem.route(&locations))
    }

    fn offset(&self, _duals: &[f64]) -> f64 {
        VEHICLE_COST
    }
}

impl BnpProblem for PdptwProblem {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.instance.tasks() {
            lp.add_row(Sense::Ge, 1.0);
        }
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let n = self.instance.tasks();
        let mut cols: Vec<Column> = (1..=n)
            .filter(|&j| self.instance.schedule(&[j, n + j]).is_some())
            .map(|j| self.route(&[j, n + j]))
            .collect();
        cols.extend((0..n).map(|r| Column::artificial(r, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        Some(Box::new(PdptwPricing {
            problem: self,
            arcs: allowed_arcs(&self.instance.arcs, decisions, 0, self.instance.end()),
        }))
    }

    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool {
        let end = self.instance.end();
        let arcs = allowed_arcs(&self.instance.arcs, decisions, 0, end);
        route_arcs(&column.tag, 0, end).iter().all(|&(i, j)| arcs[i][j])
    }

    fn acceptable(&self, column: &Column) -> bool {
        is_elementary(&column.tag)
    }

    fn branch(
        &self,
        columns: &[Column],
        primal: &[f64],
        _decisions: &[BranchingDecision],
    ) -> Result<Branch, BnpError> {
        arc_branch(columns, primal, 0, self.instance.end()).ok_or(BnpError::NoBranchingCandidate)
    }

    fn integral_objective(&self) -> bool {
        all_integral(self.instance.dist.iter().flatten().copied())
    }
}

impl Family for PdptwProblem {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Pdptw
    }

    /// Routes as file task ids.
    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        let routes = columns
            .iter()
            .flat_map(|(c, k)| std::iter::repeat(c).take(*k as usize))
            .map(|c| Route {
                nodes: c.tag.iter().map(|&l| self.instance.row_of[l]).collect(),
                cost: c.cost,
            })
            .collect();
        SolutionView::Routes { routes }
    }
}

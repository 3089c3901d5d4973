//! Vehicle routing with time windows, with travel distance or cumulative
//! load-distance costs. Each column is one route.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arcs::{arc_branch, is_elementary};
use super::{
    all_integral, allowed_arcs, replay, route_arcs, Family, InstanceError, ProblemKind, Route, SolutionView,
    UNREACHABLE,
};
use crate::bnp::{Branch, BnpError, BnpProblem, BranchingDecision};
use crate::colgen::{ColgenError, Column, PricingAdapter};
use crate::expr::{BoolTableId, Cond, ElemExpr, KnapsackSpec, NumExpr, NumTableId, NumVar, SetExpr};
use crate::model::{Model, ModelBuilder, ModelError, Resource, Transition, TransitionRef};
use crate::simplex::{LinearProgram, Sense};
use crate::Set;

/// One row of a Solomon-style file, in file units.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteRow {
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub ready: f64,
    pub due: f64,
    pub service: f64,
}

/// Euclidean distance truncated to one decimal, scaled by 10.
pub fn scaled_distance(a: &SiteRow, b: &SiteRow) -> f64 {
    (10.0 * (a.x - b.x).hypot(a.y - b.y) + 1e-9).floor()
}

/// Node-weighted shortest paths over `arcs`: the distance from `i` to `j`
/// including the service times of intermediate nodes. The diagonal holds
/// the shortest cycle. Missing paths are [`UNREACHABLE`].
pub(crate) fn shortest_paths(dist: &[Vec<f64>], arcs: &[Vec<bool>], service: &[f64]) -> Vec<Vec<f64>> {
    let n = dist.len();
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for i in 0..n {
        for j in 0..n {
            if arcs[i][j] {
                d[i][j] = dist[i][j];
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] >= UNREACHABLE {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + service[k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            *x = x.min(UNREACHABLE);
        }
    }
    d
}

/// Cheapest arc into and out of every node ([`UNREACHABLE`] if none).
pub(crate) fn cheapest_arcs(dist: &[Vec<f64>], arcs: &[Vec<bool>]) -> (Vec<f64>, Vec<f64>) {
    let n = dist.len();
    let mut d_in = vec![UNREACHABLE; n];
    let mut d_out = vec![UNREACHABLE; n];
    for i in 0..n {
        for j in 0..n {
            if arcs[i][j] {
                d_in[j] = d_in[j].min(dist[i][j]);
                d_out[i] = d_out[i].min(dist[i][j]);
            }
        }
    }
    (d_in, d_out)
}

/// Routing data on nodes `0..=n+1`: `0` is the start depot, `1..=n` the
/// customers and `n + 1` a copy of the depot where routes end. Times and
/// distances are in tenths of the file units.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingInstance {
    /// Depot first, then the customers, in file units.
    pub sites: Vec<SiteRow>,
    pub vehicles: usize,
    pub capacity: f64,
    pub load: Vec<f64>,
    pub ready: Vec<f64>,
    pub due: Vec<f64>,
    pub service: Vec<f64>,
    pub dist: Vec<Vec<f64>>,
    /// Arcs left after removing the time- and capacity-infeasible ones.
    pub arcs: Vec<Vec<bool>>,
    pub shortest: Vec<Vec<f64>>,
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
}

impl RoutingInstance {
    pub fn new(vehicles: usize, capacity: f64, sites: Vec<SiteRow>) -> Result<Self, InstanceError> {
        if sites.is_empty() {
            return Err(InstanceError::Semantic("missing depot".into()));
        }
        let n = sites.len() - 1;
        for (j, s) in sites.iter().enumerate() {
            if s.demand < 0.0 || s.service < 0.0 || s.due < s.ready {
                return Err(InstanceError::Semantic(format!("site {j} has invalid data")));
            }
            if s.demand > capacity {
                return Err(InstanceError::Infeasible(format!("demand of customer {j} exceeds the capacity")));
            }
        }
        let node = |k: usize| &sites[if k == n + 1 { 0 } else { k }];
        let nodes = n + 2;
        let load: Vec<f64> = (0..nodes).map(|k| if k == 0 || k == n + 1 { 0.0 } else { node(k).demand }).collect();
        let ready: Vec<f64> = (0..nodes).map(|k| 10.0 * node(k).ready).collect();
        let due: Vec<f64> = (0..nodes).map(|k| 10.0 * node(k).due).collect();
        let service: Vec<f64> = (0..nodes)
            .map(|k| if k == 0 || k == n + 1 { 0.0 } else { 10.0 * node(k).service })
            .collect();
        let dist: Vec<Vec<f64>> = (0..nodes)
            .map(|i| (0..nodes).map(|j| scaled_distance(node(i), node(j))).collect())
            .collect();
        let arcs: Vec<Vec<bool>> = (0..nodes)
            .map(|i| {
                (0..nodes)
                    .map(|j| {
                        i != j
                            && i < n + 1
                            && j > 0
                            && !(i == 0 && j == n + 1)
                            && ready[i] + service[i] + dist[i][j] <= due[j]
                            && load[i] + load[j] <= capacity
                    })
                    .collect()
            })
            .collect();
        let shortest = shortest_paths(&dist, &arcs, &service);
        let (d_in, d_out) = cheapest_arcs(&dist, &arcs);
        Ok(RoutingInstance {
            sites,
            vehicles,
            capacity,
            load,
            ready,
            due,
            service,
            dist,
            arcs,
            shortest,
            d_in,
            d_out,
        })
    }

    /// Solomon text: a `vehicles capacity` line, then one line of seven
    /// numbers per site (`id x y demand ready due service`), depot first.
    /// Lines starting with a non-number are headers. Keeps the first
    /// `max_customers` customers when given.
    pub fn parse_solomon(text: &str, max_customers: Option<usize>) -> Result<Self, InstanceError> {
        let mut fleet = None;
        let mut sites = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() || tokens[0].parse::<f64>().is_err() {
                continue;
            }
            let mut values = Vec::with_capacity(tokens.len());
            for tok in &tokens {
                let col = line.find(tok).unwrap_or(0) + 1;
                values.push(
                    tok.parse::<f64>()
                        .map_err(|_| InstanceError::parse(ln + 1, col, format!("expected a number, found `{tok}`")))?,
                );
            }
            match values.len() {
                2 if fleet.is_none() => fleet = Some((values[0], values[1])),
                7 => sites.push(SiteRow {
                    x: values[1],
                    y: values[2],
                    demand: values[3],
                    ready: values[4],
                    due: values[5],
                    service: values[6],
                }),
                k => return Err(InstanceError::parse(ln + 1, 1, format!("unexpected line with {k} numbers"))),
            }
        }
        let (vehicles, capacity) = fleet.ok_or_else(|| InstanceError::parse(1, 1, "missing vehicle line"))?;
        if sites.is_empty() {
            return Err(InstanceError::parse(1, 1, "missing depot line"));
        }
        if let Some(k) = max_customers {
            sites.truncate(k + 1);
        }
        Self::new(vehicles as usize, capacity, sites)
    }

    pub fn to_solomon_text(&self) -> String {
        let mut s = format!("VEHICLE\nNUMBER CAPACITY\n{} {}\n\nCUSTOMER\n", self.vehicles, self.capacity);
        s.push_str("CUST_NO XCOORD YCOORD DEMAND READY_TIME DUE_DATE SERVICE_TIME\n");
        for (k, r) in self.sites.iter().enumerate() {
            s.push_str(&format!(
                "{k} {} {} {} {} {} {}\n",
                r.x, r.y, r.demand, r.ready, r.due, r.service
            ));
        }
        s
    }

    /// Random instance on a 20 x 20 grid where every customer can be served
    /// by a route of its own.
    pub fn random(customers: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let horizon = 150.0;
        let service = 5.0;
        let depot = SiteRow {
            x: 10.0,
            y: 10.0,
            demand: 0.0,
            ready: 0.0,
            due: horizon,
            service: 0.0,
        };
        let mut sites = vec![depot.clone()];
        for _ in 0..customers {
            let mut site = SiteRow {
                x: rng.gen_range(0..=20) as f64,
                y: rng.gen_range(0..=20) as f64,
                demand: rng.gen_range(1..=8) as f64,
                ready: 0.0,
                due: 0.0,
                service,
            };
            let travel = scaled_distance(&depot, &site) / 10.0;
            let latest = (horizon - service - travel).floor();
            site.ready = rng.gen_range(0..=latest as u32) as f64;
            let width = rng.gen_range(10..=60) as f64;
            site.due = (site.ready + width).min(latest).max(travel.ceil()).max(site.ready);
            sites.push(site);
        }
        Self::new(4, 20.0, sites).expect("generated data are valid")
    }

    pub fn customers(&self) -> usize {
        self.sites.len() - 1
    }

    fn end(&self) -> usize {
        self.customers() + 1
    }

    /// Arrival times at the nodes of `0, nodes..., n+1` (service starts),
    /// or `None` if a window or the capacity is violated.
    pub fn schedule(&self, nodes: &[usize]) -> Option<Vec<f64>> {
        let mut t = 0.0;
        let mut q = 0.0;
        let mut out = vec![0.0];
        for (i, j) in route_arcs(nodes, 0, self.end()) {
            t = (t + self.service[i] + self.dist[i][j]).max(self.ready[j]);
            q += self.load[j];
            if t > self.due[j] || q > self.capacity {
                return None;
            }
            out.push(t);
        }
        Some(out)
    }

    pub fn distance(&self, nodes: &[usize]) -> f64 {
        route_arcs(nodes, 0, self.end()).iter().map(|&(i, j)| self.dist[i][j]).sum()
    }

    /// Sum over the arcs of the load collected so far times the distance.
    pub fn cumulative_cost(&self, nodes: &[usize]) -> f64 {
        let mut q = 0.0;
        let mut cost = 0.0;
        for (i, j) in route_arcs(nodes, 0, self.end()) {
            cost += q * self.dist[i][j];
            q += self.load[j];
        }
        cost
    }

    fn duals_by_node(&self, duals: &[f64]) -> Vec<f64> {
        let n = self.customers();
        let mut pi = vec![0.0; n + 2];
        pi[1..=n].copy_from_slice(&duals[..n]);
        pi
    }

    /// Elementary pricing: visit reachable customers once each. Its value
    /// (plus the offset) is the reduced cost of the route.
    pub fn elementary_model(&self, arcs: &[Vec<bool>], duals: &[f64], cumulative: bool) -> Result<Model, ModelError> {
        let n = self.customers();
        let nodes = n + 2;
        let mut b = ModelBuilder::new();
        let r = b.add_set_var("R", nodes, Resource::PreferGreater, Set::from_members(nodes, 1..=n))?;
        let i = b.add_element_var("i", n + 1, Resource::None, 0)?;
        let q = b.add_numeric_var("q", Resource::PreferLess, 0.0);
        let t = b.add_numeric_var("t", Resource::PreferLess, 0.0);
        let tabs = Tables::declare(&mut b, self, arcs, duals)?;

        let cur = ElemExpr::from(i);
        let j = ElemExpr::param(0);
        let x = ElemExpr::param(1);
        let arrival = tabs.arrival(&cur, &j, t);
        let loaded = NumExpr::from(q) + NumExpr::table(tabs.load, [j.clone()]);
        let reachable = SetExpr::from(r).remove(j.clone()).filter(Cond::all([
            (arrival.clone() + NumExpr::table(tabs.service, [j.clone()]) + NumExpr::table(tabs.shortest, [j.clone(), x.clone()]))
                .le(NumExpr::table(tabs.due, [x.clone()])),
            (loaded.clone() + NumExpr::table(tabs.load, [x.clone()])).le(self.capacity),
        ]));
        b.add_transition(
            tabs.visit(&cur, &j, q, t, cumulative)
                .over_set(SetExpr::from(r))
                .pre(loaded.le(self.capacity))
                .set(r, reachable)
                .elem(i, j.clone())
                .num(q, NumExpr::from(q) + NumExpr::table(tabs.load, [j.clone()]))
                .num(t, arrival),
        );
        let end = ElemExpr::Const(n + 1);
        b.add_transition(
            tabs.visit(&cur, &end, q, t, cumulative)
                .elem(i, end.clone())
                .num(t, tabs.arrival(&cur, &end, t)),
        );
        b.add_base_case(vec![cur.clone().eq(n + 1)], NumExpr::Const(0.0));
        b.add_dual_bound(NumExpr::if_then_else(cur.clone().eq(n + 1), 0.0, f64::NEG_INFINITY));
        let ones = vec![NumExpr::Const(1.0); nodes];
        for bound in self.knapsack_bounds(&tabs, SetExpr::from(r), &ones, &cur, q, t, duals, cumulative) {
            b.add_dual_bound(bound);
        }
        b.build()
    }

    /// Pricing without elementarity: only immediate returns to the
    /// predecessor are excluded.
    pub fn relaxed_model(&self, arcs: &[Vec<bool>], duals: &[f64], cumulative: bool) -> Result<Model, ModelError> {
        let n = self.customers();
        let nodes = n + 2;
        let mut b = ModelBuilder::new();
        let p = b.add_element_var("p", n + 1, Resource::None, 0)?;
        let i = b.add_element_var("i", n + 1, Resource::None, 0)?;
        let q = b.add_numeric_var("q", Resource::PreferLess, 0.0);
        let t = b.add_numeric_var("t", Resource::PreferLess, 0.0);
        let tabs = Tables::declare(&mut b, self, arcs, duals)?;

        let cur = ElemExpr::from(i);
        let j = ElemExpr::param(0);
        let loaded = NumExpr::from(q) + NumExpr::table(tabs.load, [j.clone()]);
        b.add_transition(
            tabs.visit(&cur, &j, q, t, cumulative)
                .over_values(1..=n)
                .pre(j.clone().ne(p))
                .pre(loaded.clone().le(self.capacity))
                .elem(p, cur.clone())
                .elem(i, j.clone())
                .num(q, loaded)
                .num(t, tabs.arrival(&cur, &j, t)),
        );
        let end = ElemExpr::Const(n + 1);
        b.add_transition(
            tabs.visit(&cur, &end, q, t, cumulative)
                .pre(cur.clone().ne(0))
                .elem(p, cur.clone())
                .elem(i, end.clone())
                .num(t, tabs.arrival(&cur, &end, t)),
        );
        b.add_base_case(vec![cur.clone().eq(n + 1)], NumExpr::Const(0.0));
        b.add_dual_bound(NumExpr::if_then_else(cur.clone().eq(n + 1), 0.0, f64::NEG_INFINITY));

        // customers still reachable in time and capacity, possibly again
        let x = ElemExpr::param(0);
        let reachable = SetExpr::Const(Set::from_members(nodes, 1..=n)).filter(Cond::all([
            (NumExpr::from(t)
                + NumExpr::table(tabs.service, [cur.clone()])
                + NumExpr::table(tabs.shortest, [cur.clone(), x.clone()]))
            .le(NumExpr::table(tabs.due, [x.clone()])),
            (NumExpr::from(q) + NumExpr::table(tabs.load, [x])).le(self.capacity),
        ]));
        let visits: Vec<NumExpr> = (0..nodes)
            .map(|jj| {
                if jj == 0 || jj == n + 1 {
                    return NumExpr::Const(0.0);
                }
                let preds = Set::from_members(nodes, (0..nodes).filter(|&k| self.arcs[k][jj]));
                let k = ElemExpr::param(0);
                let enter = NumExpr::min_over(
                    reachable
                        .clone()
                        .insert(cur.clone())
                        .intersection(SetExpr::Const(preds)),
                    NumExpr::table(tabs.service, [k.clone()]) + NumExpr::table(tabs.dist, [k, ElemExpr::Const(jj)]),
                );
                let leave = self.service[jj] + self.d_out[jj];
                let cycle = (enter + leave).max(1e-9);
                ((NumExpr::Const(self.due[jj] + leave) - t) / cycle).floor().max(0.0)
            })
            .collect();
        for bound in self.knapsack_bounds(&tabs, reachable, &visits, &cur, q, t, duals, cumulative) {
            b.add_dual_bound(bound);
        }
        b.build()
    }

    /// Knapsack bounds over `items` in capacity and in time, with the
    /// cheapest arc into and out of each customer. Item data are scaled by
    /// `copies`.
    #[allow(clippy::too_many_arguments)]
    fn knapsack_bounds(
        &self,
        tabs: &Tables,
        items: SetExpr,
        copies: &[NumExpr],
        cur: &ElemExpr,
        q: NumVar,
        t: NumVar,
        duals: &[f64],
        cumulative: bool,
    ) -> Vec<NumExpr> {
        let n = self.customers();
        let pi = self.duals_by_node(duals);
        let profit = |j: usize, arc: f64| -> NumExpr {
            if j == 0 || j == n + 1 {
                return NumExpr::Const(0.0);
            }
            let value = if cumulative {
                NumExpr::Const(pi[j]) - NumExpr::from(q) * arc
            } else {
                NumExpr::Const(pi[j] - arc)
            };
            copies[j].clone() * value
        };
        let scaled = |w: &dyn Fn(usize) -> f64| -> Vec<NumExpr> {
            (0..n + 2).map(|j| copies[j].clone() * w(j)).collect()
        };
        let v_in: Vec<NumExpr> = (0..n + 2).map(|j| profit(j, self.d_in[j])).collect();
        let v_out: Vec<NumExpr> = (0..n + 2).map(|j| profit(j, self.d_out[j])).collect();
        let loads = scaled(&|j| self.load[j]);
        let w_in = scaled(&|j| self.d_in[j] + self.service[j]);
        let w_out = scaled(&|j| self.service[j] + self.d_out[j]);
        let room = NumExpr::Const(self.capacity) - q;
        let end = n + 1;
        let time_in = NumExpr::Const(self.due[end] - self.d_in[end]) - t;
        let service = NumExpr::table(tabs.service, [cur.clone()]);
        let leave = NumExpr::table(tabs.d_out, [cur.clone()]);
        let time_out = NumExpr::Const(self.due[end]) - t - service - leave;
        [
            (room.clone(), v_in.clone(), loads.clone()),
            (time_in, v_in, w_in),
            (room, v_out.clone(), loads),
            (time_out, v_out, w_out),
        ]
        .into_iter()
        .map(|(capacity, profits, weights)| {
            -NumExpr::knapsack(KnapsackSpec {
                items: items.clone(),
                capacity,
                profits,
                weights,
            })
        })
        .collect()
    }
}

/// Tables shared by the routing models.
struct Tables {
    dist: NumTableId,
    shortest: NumTableId,
    load: NumTableId,
    ready: NumTableId,
    due: NumTableId,
    service: NumTableId,
    pi: NumTableId,
    d_out: NumTableId,
    arcs: BoolTableId,
}

impl Tables {
    fn declare(b: &mut ModelBuilder, inst: &RoutingInstance, arcs: &[Vec<bool>], duals: &[f64]) -> Result<Self, ModelError> {
        let nodes = inst.customers() + 2;
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<f64>>();
        Ok(Tables {
            dist: b.add_numeric_table("d", vec![nodes, nodes], flat(&inst.dist))?,
            shortest: b.add_numeric_table("dstar", vec![nodes, nodes], flat(&inst.shortest))?,
            load: b.add_numeric_table("l", vec![nodes], inst.load.clone())?,
            ready: b.add_numeric_table("a", vec![nodes], inst.ready.clone())?,
            due: b.add_numeric_table("b", vec![nodes], inst.due.clone())?,
            service: b.add_numeric_table("s", vec![nodes], inst.service.clone())?,
            pi: b.add_numeric_table("pi", vec![nodes], inst.duals_by_node(duals))?,
            d_out: b.add_numeric_table("dout", vec![nodes], inst.d_out.clone())?,
            arcs: b.add_bool_table("A", vec![nodes, nodes], arcs.iter().flatten().copied().collect())?,
        })
    }

    fn travel(&self, from: &ElemExpr, to: &ElemExpr, t: NumVar) -> NumExpr {
        NumExpr::from(t)
            + NumExpr::table(self.service, [from.clone()])
            + NumExpr::table(self.dist, [from.clone(), to.clone()])
    }

    fn arrival(&self, from: &ElemExpr, to: &ElemExpr, t: NumVar) -> NumExpr {
        self.travel(from, to, t).max(NumExpr::table(self.ready, [to.clone()]))
    }

    /// Move from `from` to `to` with the arc, window and cost; the caller
    /// adds the state updates.
    fn visit(
        &self,
        from: &ElemExpr,
        to: &ElemExpr,
        q: NumVar,
        t: NumVar,
        cumulative: bool,
    ) -> Transition {
        let d = NumExpr::table(self.dist, [from.clone(), to.clone()]);
        let cost = if cumulative { NumExpr::from(q) * d } else { d };
        Transition::new(if matches!(to, ElemExpr::Const(_)) { "return" } else { "visit" })
            .pre(Cond::table(self.arcs, [from.clone(), to.clone()]))
            .pre(self.travel(from, to, t).le(NumExpr::table(self.due, [to.clone()])))
            .weight(cost - NumExpr::table(self.pi, [to.clone()]))
    }
}

/// A routing family solved by branch-and-price: distance or cumulative
/// costs, with elementary or 2-cycle-free pricing.
#[derive(Debug, Clone)]
pub struct RoutingProblem {
    pub instance: RoutingInstance,
    pub cumulative: bool,
    pub elementary: bool,
}

impl RoutingProblem {
    pub fn new(instance: RoutingInstance, cumulative: bool, elementary: bool) -> Self {
        RoutingProblem {
            instance,
            cumulative,
            elementary,
        }
    }

    pub fn route_cost(&self, nodes: &[usize]) -> f64 {
        if self.cumulative {
            self.instance.cumulative_cost(nodes)
        } else {
            self.instance.distance(nodes)
        }
    }

    pub fn route(&self, nodes: &[usize]) -> Column {
        let n = self.instance.customers();
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        for j in sorted {
            match coeffs.last_mut() {
                Some(c) if c.0 == j - 1 => c.1 += 1.0,
                _ => coeffs.push((j - 1, 1.0)),
            }
        }
        if self.cumulative {
            coeffs.push((n, 1.0));
        }
        Column::new(self.route_cost(nodes), coeffs, nodes.to_vec())
    }

    pub fn pricing_model(&self, arcs: &[Vec<bool>], duals: &[f64]) -> Result<Model, ModelError> {
        if self.elementary {
            self.instance.elementary_model(arcs, duals, self.cumulative)
        } else {
            self.instance.relaxed_model(arcs, duals, self.cumulative)
        }
    }
}

struct RoutingPricing<'a> {
    problem: &'a RoutingProblem,
    arcs: Vec<Vec<bool>>,
}

impl PricingAdapter for RoutingPricing<'_> {
    fn rebuild(&mut self, duals: &[f64]) -> Result<Model, ColgenError> {
        Ok(self.problem.pricing_model(&self.arcs, duals)?)
    }

    fn extract(&self, model: &Model, path: &[TransitionRef]) -> Result<Column, ColgenError> {
        replay(model, path)?;
        let nodes: Vec<usize> = path.iter().filter_map(|t| t.param).collect();
        Ok(self.problem.route(&nodes))
    }

    fn offset(&self, duals: &[f64]) -> f64 {
        if self.problem.cumulative {
            -duals[self.problem.instance.customers()]
        } else {
            0.0
        }
    }
}

impl BnpProblem for RoutingProblem {
    fn master_rows(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for _ in 0..self.instance.customers() {
            lp.add_row(Sense::Ge, 1.0);
        }
        if self.cumulative {
            lp.add_row(Sense::Le, self.instance.vehicles as f64);
        }
        lp
    }

    fn seed_columns(&self) -> Vec<Column> {
        let n = self.instance.customers();
        let mut cols: Vec<Column> = (1..=n)
            .filter(|&j| self.instance.schedule(&[j]).is_some())
            .map(|j| self.route(&[j]))
            .collect();
        cols.extend((0..n).map(|r| Column::artificial(r, 1.0)));
        cols
    }

    fn adapter(&self, decisions: &[BranchingDecision]) -> Option<Box<dyn PricingAdapter + '_>> {
        let n = self.instance.customers();
        Some(Box::new(RoutingPricing {
            problem: self,
            arcs: allowed_arcs(&self.instance.arcs, decisions, 0, n + 1),
        }))
    }

    fn compatible(&self, column: &Column, decisions: &[BranchingDecision]) -> bool {
        let n = self.instance.customers();
        let arcs = allowed_arcs(&self.instance.arcs, decisions, 0, n + 1);
        route_arcs(&column.tag, 0, n + 1).iter().all(|&(i, j)| arcs[i][j])
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
        let n = self.instance.customers();
        arc_branch(columns, primal, 0, n + 1).ok_or(BnpError::NoBranchingCandidate)
    }

    fn integral_objective(&self) -> bool {
        let dist = self.instance.dist.iter().flatten().copied();
        if self.cumulative {
            all_integral(dist.chain(self.instance.load.iter().copied()))
        } else {
            all_integral(dist)
        }
    }
}

impl Family for RoutingProblem {
    fn kind(&self) -> ProblemKind {
        if self.cumulative {
            ProblemKind::CumVrptw
        } else {
            ProblemKind::Vrptw
        }
    }

    fn render(&self, columns: &[(Column, u32)]) -> SolutionView {
        let routes = columns
            .iter()
            .flat_map(|(c, k)| std::iter::repeat(c).take(*k as usize))
            .map(|c| Route {
                nodes: c.tag.clone(),
                cost: c.cost,
            })
            .collect();
        SolutionView::Routes { routes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{SearchLimits, SearchOptions, Solver};

    const TINY: &str = "\
TINY

VEHICLE
NUMBER     CAPACITY
  2         10

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME
    0      0          0          0          0        100          0
    1      3          4          4          0        100          1
    2      6          8          5          0        100          1
";

    #[test]
    fn parses_and_scales() {
        let inst = RoutingInstance::parse_solomon(TINY, None).unwrap();
        assert_eq!(inst.customers(), 2);
        assert_eq!(inst.vehicles, 2);
        assert_eq!(inst.dist[0][1], 50.0);
        assert_eq!(inst.dist[1][2], 50.0);
        assert_eq!(inst.dist[2][3], 100.0);
        assert_eq!(inst.service[1], 10.0);
        assert_eq!(inst.due[3], 1000.0);
        assert!(!inst.arcs[0][3] && !inst.arcs[3][1] && !inst.arcs[1][0]);
        // through customer 1 with its service time
        assert_eq!(inst.shortest[0][2], 100.0);
        let again = RoutingInstance::parse_solomon(&inst.to_solomon_text(), None).unwrap();
        assert_eq!(again, inst);
        assert_eq!(RoutingInstance::parse_solomon(TINY, Some(1)).unwrap().customers(), 1);
    }

    #[test]
    fn reports_bad_numbers() {
        let bad = TINY.replace("    2      6", "    2      x");
        assert!(matches!(
            RoutingInstance::parse_solomon(&bad, None),
            Err(InstanceError::Parse { line: 11, column: 12, .. })
        ));
    }

    #[test]
    fn truncation_is_not_rounding() {
        let a = SiteRow { x: 0.0, y: 0.0, demand: 0.0, ready: 0.0, due: 0.0, service: 0.0 };
        let b = SiteRow { x: 1.0, y: 1.0, ..a.clone() };
        assert_eq!(scaled_distance(&a, &b), 14.0);
    }

    #[test]
    fn zero_duals_price_the_shortest_route() {
        let inst = RoutingInstance::parse_solomon(TINY, None).unwrap();
        let p = RoutingProblem::new(inst.clone(), false, true);
        let m = p.pricing_model(&inst.arcs, &[0.0, 0.0]).unwrap();
        let r = Solver::Exhaustive
            .solve(&m, &SearchLimits::default(), &SearchOptions::default())
            .unwrap();
        // single-customer route 0 -> 1 -> 3
        assert_eq!(r.best_cost(), Some(100.0));
    }

    #[test]
    fn cumulative_cost_weights_arcs_by_collected_load() {
        let inst = RoutingInstance::parse_solomon(TINY, None).unwrap();
        // 0 * 50 + 4 * 50 + 9 * 100
        assert_eq!(inst.cumulative_cost(&[1, 2]), 1100.0);
        let p = RoutingProblem::new(inst, true, true);
        assert_eq!(p.master_rows().row_rhs(2), 2.0);
        assert_eq!(p.route(&[1, 2]).row_coeffs, vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
    }

    #[test]
    fn relaxed_pricing_never_exceeds_elementary() {
        for seed in 0..10 {
            let inst = RoutingInstance::random(5, seed);
            let duals: Vec<f64> = (0..5).map(|k| 60.0 + 40.0 * k as f64).collect();
            for cumulative in [false, true] {
                let mut d = duals.clone();
                d.push(0.0);
                let solve = |elementary| {
                    let p = RoutingProblem::new(inst.clone(), cumulative, elementary);
                    let m = p.pricing_model(&inst.arcs, &d).unwrap();
                    Solver::Exhaustive
                        .solve(&m, &SearchLimits::default(), &SearchOptions::default())
                        .unwrap()
                        .best_cost()
                        .unwrap()
                };
                assert!(solve(false) <= solve(true) + 1e-9);
            }
        }
    }
}

//! Oracles shared by the integration tests: a generator of random acyclic
//! models, a memoized value function, brute-force pattern enumeration for
//! every problem family and an LP optimality certificate.
#![allow(dead_code)]

use std::collections::HashMap;

use cgdp::expr::{CmpOp, ElemExpr, NumExpr, SetExpr};
use cgdp::model::{Model, ModelBuilder, Resource, State, StateKey, Transition};
use cgdp::problems::pdptw::VEHICLE_COST;
use cgdp::problems::{
    BppInstance, GcpInstance, MraspInstance, PdptwInstance, PdptwProblem, PmsInstance, RoutingInstance, RoutingProblem,
};
use cgdp::simplex::{LinearProgram, LpStatus, Sense};
use cgdp::{Family, ProblemKind, Set};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// random models

/// A random finite-horizon model: `horizon` steps, each picking an item or
/// skipping. Resource preferences are chosen so that dominance is sound:
/// smaller loads, smaller index floors and larger available sets (or smaller
/// visited sets) never hurt. Transition weights are integers in [-10, 10].
pub fn random_model(seed: u64) -> Model {
    let mut rng = rng(seed);
    let horizon = rng.gen_range(2..=5usize);
    let items = rng.gen_range(2..=5usize);
    let pick_resource = |rng: &mut ChaCha8Rng, r: Resource| if rng.gen_bool(0.7) { r } else { Resource::None };

    let mut b = ModelBuilder::new();
    let k = b.add_element_var("k", horizon, Resource::None, 0).unwrap();
    let last = b.add_element_var("last", items, Resource::None, items).unwrap();
    let floor = if rng.gen_bool(0.5) {
        let r = pick_resource(&mut rng, Resource::PreferLess);
        Some(b.add_element_var("floor", items, r, 0).unwrap())
    } else {
        None
    };
    // 0: no set, 1: available items, 2: visited items
    let set_mode = rng.gen_range(0..3);
    let set = match set_mode {
        1 => {
            let r = pick_resource(&mut rng, Resource::PreferGreater);
            Some(b.add_set_var("avail", items, r, Set::full(items)).unwrap())
        }
        2 => {
            let r = pick_resource(&mut rng, Resource::PreferLess);
            Some(b.add_set_var("seen", items, r, Set::empty(items)).unwrap())
        }
        _ => None,
    };
    let q_resource = pick_resource(&mut rng, Resource::PreferLess);
    let q = b.add_numeric_var("q", q_resource, 0.0);
    let count = b.add_numeric_var("count", Resource::None, 0.0);

    let costs: Vec<f64> = (0..(items + 1) * items).map(|_| rng.gen_range(-10..=10) as f64).collect();
    let sizes: Vec<f64> = (0..items).map(|_| rng.gen_range(0..=4) as f64).collect();
    let cap = rng.gen_range(2..=10) as f64;
    let c = b.add_numeric_table("c", vec![items + 1, items], costs.clone()).unwrap();
    let sz = b.add_numeric_table("sz", vec![items], sizes).unwrap();

    let j = ElemExpr::param(0);
    let mut pick = Transition::new("pick")
        .over_values(0..items)
        .pre(ElemExpr::from(k).ne(horizon))
        .pre((NumExpr::from(q) + NumExpr::table(sz, [j.clone()])).le(cap))
        .elem(k, ElemExpr::from(k) + ElemExpr::Const(1))
        .elem(last, j.clone())
        .num(q, NumExpr::from(q) + NumExpr::table(sz, [j.clone()]))
        .num(count, NumExpr::from(count) + 1.0)
        .weight(NumExpr::table(c, [ElemExpr::from(last), j.clone()]));
    if let Some(f) = floor {
        pick = pick.pre(ElemExpr::from(f).cmp(CmpOp::Le, j.clone())).elem(f, j.clone());
    }
    match (set_mode, set) {
        (1, Some(s)) => pick = pick.pre(SetExpr::from(s).contains(j.clone())).set(s, SetExpr::from(s).remove(j.clone())),
        (2, Some(s)) => {
            pick = pick
                .pre(SetExpr::from(s).contains(j.clone()).not())
                .set(s, SetExpr::from(s).insert(j.clone()))
        }
        _ => {}
    }
    b.add_transition(pick);

    let skip_weight = rng.gen_bool(0.7).then(|| rng.gen_range(-10..=10) as f64);
    if let Some(ws) = skip_weight {
        b.add_transition(
            Transition::new("skip")
                .pre(ElemExpr::from(k).ne(horizon))
                .elem(k, ElemExpr::from(k) + ElemExpr::Const(1))
                .weight(ws),
        );
    }

    let min_count = rng.gen_range(0..=2) as f64;
    let b0 = rng.gen_range(-5..=5) as f64;
    let load_in_value = q_resource == Resource::None || rng.gen_bool(0.5);
    let value = if load_in_value && rng.gen_bool(0.5) {
        NumExpr::from(q) + b0
    } else {
        NumExpr::Const(b0)
    };
    b.add_base_case(
        vec![ElemExpr::from(k).eq(horizon), NumExpr::from(count).ge(min_count)],
        value,
    );
    if rng.gen_bool(0.3) {
        b.add_state_constraint(NumExpr::from(q).le(rng.gen_range(1..=8) as f64));
    }

    if rng.gen_bool(0.6) {
        // every remaining step costs at least the cheapest weight; the base
        // value is at least b0 because q >= 0
        let wmin = costs
            .iter()
            .copied()
            .chain(skip_weight)
            .fold(f64::INFINITY, f64::min);
        let remaining = NumExpr::Const(horizon as f64) - ElemExpr::from(k).num();
        b.add_dual_bound(remaining.clone() * wmin + b0);
        if let (1, Some(s)) = (set_mode, set) {
            // each available item is picked at most once
            let column_min: Vec<f64> = (0..items)
                .map(|j| (0..=items).map(|i| costs[i * items + j]).fold(f64::INFINITY, f64::min))
                .collect();
            let cm = b.add_numeric_table("cmin", vec![items], column_min).unwrap();
            let skips = remaining * skip_weight.unwrap_or(0.0).min(0.0);
            b.add_dual_bound(
                NumExpr::sum_over(SetExpr::from(s), NumExpr::table(cm, [ElemExpr::param(0)]).min(0.0)) + skips + b0,
            );
        }
    }
    b.build().unwrap()
}

/// Memoized cost-to-go `V(S)`, computed by plain recursion over the
/// transitions; `+inf` when no base state is reachable.
pub struct ValueOracle<'m> {
    model: &'m Model,
    memo: HashMap<StateKey, f64>,
}

impl<'m> ValueOracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        ValueOracle {
            model,
            memo: HashMap::new(),
        }
    }

    pub fn value(&mut self, state: &State) -> f64 {
        let key = self.model.full_key(state);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let m = self.model;
        let v = if !m.check_state_constraints(state).unwrap() {
            f64::INFINITY
        } else if let Some(base) = m.is_base(state).unwrap() {
            base
        } else {
            let mut best = f64::INFINITY;
            for t in m.applicable_transitions(state).unwrap() {
                let w = m.weight(t, state).unwrap();
                let next = m.apply(t, state).unwrap();
                best = best.min(w + self.value(&next));
            }
            best
        };
        self.memo.insert(key, v);
        v
    }

    /// Every state reachable from the target (including infeasible ones).
    pub fn reachable(&self) -> Vec<State> {
        let m = self.model;
        let mut seen = HashMap::new();
        let mut stack = vec![m.target().clone()];
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if seen.insert(m.full_key(&s), ()).is_some() {
                continue;
            }
            if m.check_state_constraints(&s).unwrap() && m.is_base(&s).unwrap().is_none() {
                for t in m.applicable_transitions(&s).unwrap() {
                    stack.push(m.apply(t, &s).unwrap());
                }
            }
            out.push(s);
        }
        out
    }
}

/// Counts `η(S) > V(S) + tol` violations over `states`.
pub fn bound_violations(model: &Model, states: &[State], oracle: &mut ValueOracle) -> Vec<(f64, f64)> {
    states
        .iter()
        .filter_map(|s| {
            let eta = model.eval_dual_bound(s).unwrap();
            let v = oracle.value(s);
            (eta > v + 1e-6 * (1.0 + v.abs().min(1e12))).then_some((eta, v))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// patterns

/// A feasible column of some family: its cost, the covering rows it hits
/// (as a bit mask) and any further row coefficients (convexity rows).
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub mask: u32,
    pub cost: f64,
    pub extra: Vec<(usize, f64)>,
}

impl Pattern {
    pub fn coeffs(&self) -> Vec<(usize, f64)> {
        let mut c: Vec<(usize, f64)> = (0..32).filter(|r| self.mask >> r & 1 == 1).map(|r| (r, 1.0)).collect();
        c.extend(self.extra.iter().copied());
        c
    }

    pub fn reduced_cost(&self, duals: &[f64]) -> f64 {
        self.cost - self.coeffs().iter().map(|&(r, a)| a * duals[r]).sum::<f64>()
    }
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation(items: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    fn rec(k: usize, a: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k <= 1 {
            f(a);
            return;
        }
        for i in 0..k - 1 {
            rec(k - 1, a, f);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        rec(k - 1, a, f);
    }
    let k = items.len();
    rec(k, items, f);
}

pub fn bpp_patterns(inst: &BppInstance) -> Vec<Pattern> {
    let n = inst.len();
    (1u32..1 << n)
        .filter(|&m| members(m, n).iter().map(|&i| inst.weights[i]).sum::<f64>() <= inst.capacity)
        .map(|mask| Pattern {
            mask,
            cost: 1.0,
            extra: vec![],
        })
        .collect()
}

pub fn gcp_patterns(inst: &GcpInstance) -> Vec<Pattern> {
    let n = inst.vertices;
    (1u32..1 << n)
        .filter(|&m| inst.edges.iter().all(|&(u, v)| !(m >> u & 1 == 1 && m >> v & 1 == 1)))
        .map(|mask| Pattern {
            mask,
            cost: 1.0,
            extra: vec![],
        })
        .collect()
}

/// One-machine schedules: every subset (the empty one included) in
/// weighted-shortest-processing-time order, kept when every job fits its
/// window without idle time.
pub fn pms_patterns(inst: &PmsInstance) -> Vec<Pattern> {
    let n = inst.len();
    let mut out = Vec::new();
    for mask in 0u32..1 << n {
        let mut jobs = members(mask, n);
        jobs.sort_by(|&a, &b| {
            (inst.weights[b] * inst.processing[a])
                .total_cmp(&(inst.weights[a] * inst.processing[b]))
                .then(a.cmp(&b))
        });
        let mut t = 0.0;
        let mut cost = 0.0;
        let mut ok = true;
        for &j in &jobs {
            t = f64::max(t, inst.release[j]) + inst.processing[j];
            ok &= t <= inst.deadline[j];
            cost += inst.weights[j] * t;
        }
        if ok {
            out.push(Pattern {
                mask,
                cost,
                extra: vec![(n, 1.0)],
            });
        }
    }
    out
}

/// Minimum total weighted completion time over all job-to-machine
/// assignments, each machine in weighted-shortest-processing-time order.
pub fn pms_optimum(p: &[f64], w: &[f64], machines: usize) -> f64 {
    let n = p.len();
    let mut best = f64::INFINITY;
    let total = machines.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut per: Vec<Vec<usize>> = vec![Vec::new(); machines];
        for j in 0..n {
            per[c % machines].push(j);
            c /= machines;
        }
        let mut cost = 0.0;
        for jobs in &mut per {
            jobs.sort_by(|&a, &b| (w[b] * p[a]).total_cmp(&(w[a] * p[b])));
            let mut t = 0.0;
            for &j in jobs.iter() {
                t += p[j];
                cost += w[j] * t;
            }
        }
        best = best.min(cost);
    }
    best
}

/// Earliest times of a runway sequence with separation to every earlier
/// operation, or `None` past a due time.
pub fn runway_times(inst: &MraspInstance, seq: &[usize]) -> Option<Vec<f64>> {
    let pair = |a: usize| inst.aircraft[a].class * 2 + inst.aircraft[a].operation;
    let mut times: Vec<f64> = Vec::new();
    for (k, &a) in seq.iter().enumerate() {
        let mut t = inst.aircraft[a].release;
        for (i, &b) in seq[..k].iter().enumerate() {
            t = t.max(times[i] + inst.separation[pair(b)][pair(a)]);
        }
        if t > inst.aircraft[a].due {
            return None;
        }
        times.push(t);
    }
    Some(times)
}

/// Cheapest runway plan per nonempty aircraft subset.
pub fn mrasp_patterns(inst: &MraspInstance) -> Vec<Pattern> {
    let n = inst.len();
    let mut out = Vec::new();
    for mask in 1u32..1 << n {
        let mut best = f64::INFINITY;
        let mut seq = members(mask, n);
        for_each_permutation(&mut seq, &mut |s| {
            if let Some(times) = runway_times(inst, s) {
                let cost: f64 = s.iter().zip(&times).map(|(&a, t)| inst.aircraft[a].cost * t).sum();
                best = best.min(cost);
            }
        });
        if best.is_finite() {
            out.push(Pattern {
                mask,
                cost: best,
                extra: vec![(n, 1.0)],
            });
        }
    }
    out
}

/// Cost of a customer sequence if the route is feasible: distance, or for
/// the cumulative variant the load on board times the distance of each arc.
pub fn route_cost(inst: &RoutingInstance, customers: &[usize], cumulative: bool) -> Option<f64> {
    let end = inst.customers() + 1;
    let (mut t, mut q, mut cost) = (0.0, 0.0, 0.0);
    let mut prev = 0;
    for &j in customers.iter().chain(std::iter::once(&end)) {
        let d = inst.dist[prev][j];
        cost += if cumulative { q * d } else { d };
        t = f64::max(t + inst.service[prev] + d, inst.ready[j]);
        q += inst.load[j];
        if t > inst.due[j] || q > inst.capacity {
            return None;
        }
        prev = j;
    }
    Some(cost)
}

/// Cheapest elementary route per nonempty customer subset. Rows are
/// customers `j - 1`; the cumulative variant adds the fleet row `n`.
pub fn routing_patterns(problem: &RoutingProblem) -> Vec<Pattern> {
    let inst = &problem.instance;
    let n = inst.customers();
    let mut out = Vec::new();
    for mask in 1u32..1 << n {
        let mut best = f64::INFINITY;
        let mut seq: Vec<usize> = members(mask, n).into_iter().map(|i| i + 1).collect();
        for_each_permutation(&mut seq, &mut |s| {
            if let Some(c) = route_cost(inst, s, problem.cumulative) {
                best = best.min(c);
            }
        });
        if best.is_finite() {
            out.push(Pattern {
                mask,
                cost: best,
                extra: if problem.cumulative { vec![(n, 1.0)] } else { vec![] },
            });
        }
    }
    out
}

/// Raw data of a pickup-and-delivery location, straight from the file rows
/// (times scaled by ten, no window tightening).
struct RawLocation {
    x: f64,
    y: f64,
    load: f64,
    ready: f64,
    due: f64,
    service: f64,
}

fn pdptw_raw(inst: &PdptwInstance) -> Vec<RawLocation> {
    let n = inst.tasks();
    (0..2 * n + 2)
        .map(|loc| {
            let depot = loc == 0 || loc == 2 * n + 1;
            let s = &inst.rows[if depot { 0 } else { inst.row_of[loc] }].site;
            RawLocation {
                x: s.x,
                y: s.y,
                load: if depot { 0.0 } else { s.demand },
                ready: 10.0 * s.ready,
                due: 10.0 * s.due,
                service: if depot { 0.0 } else { 10.0 * s.service },
            }
        })
        .collect()
}

fn raw_distance(a: &RawLocation, b: &RawLocation, speed: f64) -> f64 {
    (10.0 * (a.x - b.x).hypot(a.y - b.y) + 1e-9).floor() / speed
}

/// Cheapest route per nonempty task subset over every location order with
/// each pickup before its delivery.
pub fn pdptw_patterns(inst: &PdptwInstance) -> Vec<Pattern> {
    let n = inst.tasks();
    let raw = pdptw_raw(inst);
    let end = 2 * n + 1;
    let feasible_cost = |seq: &[usize]| -> Option<f64> {
        let (mut t, mut q, mut dist) = (0.0, 0.0, 0.0);
        let mut prev = 0;
        for &j in seq.iter().chain(std::iter::once(&end)) {
            let d = raw_distance(&raw[prev], &raw[j], inst.speed);
            dist += d;
            t = f64::max(t + raw[prev].service + d, raw[j].ready);
            q += raw[j].load;
            if t > raw[j].due || q > inst.capacity {
                return None;
            }
            prev = j;
        }
        Some(dist)
    };
    let mut out = Vec::new();
    for mask in 1u32..1 << n {
        let tasks: Vec<usize> = members(mask, n).into_iter().map(|i| i + 1).collect();
        let mut locs: Vec<usize> = tasks.iter().flat_map(|&j| [j, n + j]).collect();
        let mut best = f64::INFINITY;
        for_each_permutation(&mut locs, &mut |s| {
            let ordered = tasks.iter().all(|&j| {
                let p = s.iter().position(|&x| x == j).unwrap();
                let d = s.iter().position(|&x| x == n + j).unwrap();
                p < d
            });
            if ordered {
                if let Some(c) = feasible_cost(s) {
                    best = best.min(c);
                }
            }
        });
        if best.is_finite() {
            out.push(Pattern {
                mask,
                cost: VEHICLE_COST + best,
                extra: vec![],
            });
        }
    }
    out
}

/// Cheapest cover of rows `0..n` by at most `limit` patterns (a row may be
/// covered more than once); `partition` requires disjoint patterns.
pub fn cover_optimum(n: usize, patterns: &[Pattern], limit: usize, partition: bool) -> Option<f64> {
    let full = (1u32 << n) - 1;
    // f[mask] = cheapest way to cover `mask` with exactly c patterns
    let mut f = vec![f64::INFINITY; 1 << n];
    f[0] = 0.0;
    let mut best = f[full as usize];
    for _ in 0..limit.min(n) {
        let mut g = vec![f64::INFINITY; 1 << n];
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            for p in patterns {
                if p.mask & low == 0 || (partition && p.mask & !mask != 0) {
                    continue;
                }
                let rest = mask & !p.mask;
                let v = f[rest as usize] + p.cost;
                if v < g[mask as usize] {
                    g[mask as usize] = v;
                }
            }
        }
        // fewer patterns stay allowed
        for m in 0..=full as usize {
            f[m] = f[m].min(g[m]);
        }
        best = f[full as usize];
    }
    best.is_finite().then_some(best)
}

// ---------------------------------------------------------------------------
// linear programs

/// Solves `min c x` over the given rows and patterns with the crate's
/// simplex and checks the answer with an independent optimality
/// certificate: primal feasibility, dual sign conditions, nonnegative
/// reduced costs and equal objectives. Returns the certified optimum.
pub fn certified_lp(rows: &[(Sense, f64)], columns: &[(f64, Vec<(usize, f64)>)]) -> Result<f64, String> {
    let fixed = vec![false; columns.len()];
    let mut lp = LinearProgram::new();
    for &(s, b) in rows {
        lp.add_row(s, b);
    }
    for (c, a) in columns {
        lp.add_column(*c, a).map_err(|e| e.to_string())?;
    }
    let (sol, _) = lp.solve(None).map_err(|e| e.to_string())?;
    if sol.status != LpStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    certify(rows, columns, &fixed, &sol.primal, &sol.duals, sol.objective)?;
    Ok(sol.objective)
}

/// `fixed` marks columns with upper bound zero; their reduced costs are
/// unrestricted.
pub fn certify(
    rows: &[(Sense, f64)],
    columns: &[(f64, Vec<(usize, f64)>)],
    fixed: &[bool],
    primal: &[f64],
    duals: &[f64],
    objective: f64,
) -> Result<(), String> {
    let tol = 1e-7;
    let mut activity = vec![0.0; rows.len()];
    let mut cx = 0.0;
    for (((c, a), &x), &fix) in columns.iter().zip(primal).zip(fixed) {
        if x < -tol || (fix && x > tol) {
            return Err(format!("primal {x} out of bounds"));
        }
        cx += c * x;
        for &(r, v) in a {
            activity[r] += v * x;
        }
        let rc = c - a.iter().map(|&(r, v)| v * duals[r]).sum::<f64>();
        if rc < -tol && !fix {
            return Err(format!("reduced cost {rc}"));
        }
    }
    let mut by = 0.0;
    for (i, &(s, b)) in rows.iter().enumerate() {
        let slack_tol = tol * (1.0 + b.abs());
        let ok = match s {
            Sense::Ge => activity[i] >= b - slack_tol && duals[i] >= -1e-9,
            Sense::Le => activity[i] <= b + slack_tol && duals[i] <= 1e-9,
            Sense::Eq => (activity[i] - b).abs() <= slack_tol,
        };
        if !ok {
            return Err(format!("row {i} ({s:?} {b}): activity {} dual {}", activity[i], duals[i]));
        }
        by += duals[i] * b;
    }
    if (cx - by).abs() > tol * (1.0 + objective.abs()) || (cx - objective).abs() > tol * (1.0 + objective.abs()) {
        return Err(format!("duality gap: primal {cx}, dual {by}, reported {objective}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// small instances

/// A generated small instance with its brute-force optimum.
pub struct Case {
    pub label: String,
    pub problem: Box<dyn Family>,
    pub optimum: Option<f64>,
}

/// `count` small random instances of `kind`, deterministic in `seed`.
pub fn small_cases(kind: ProblemKind, count: usize, seed: u64) -> Vec<Case> {
    small_cases_with(kind, count, seed, true)
}

/// As [`small_cases`], with routing pricers optionally non-elementary. The
/// optimum is always the elementary one.
pub fn small_cases_with(kind: ProblemKind, count: usize, seed: u64, elementary: bool) -> Vec<Case> {
    let mut rng = rng(seed ^ 0x9e37_79b9);
    (0..count)
        .map(|i| {
            let s = seed * 1000 + i as u64;
            match kind {
                ProblemKind::Bpp => {
                    let inst = BppInstance::random(rng.gen_range(4..=10), s);
                    let opt = cover_optimum(inst.len(), &bpp_patterns(&inst), inst.len(), false);
                    case(format!("bpp n={} seed={s}", inst.len()), Box::new(inst), opt)
                }
                ProblemKind::Gcp => {
                    let v = rng.gen_range(4..=8);
                    let inst = GcpInstance::random(v, rng.gen_range(0.2..0.8), s);
                    let opt = cover_optimum(v, &gcp_patterns(&inst), v, false);
                    case(format!("gcp |V|={v} seed={s}"), Box::new(inst), opt)
                }
                ProblemKind::Pms => {
                    let n = rng.gen_range(3..=7);
                    let m = rng.gen_range(1..=3);
                    let config = cgdp::problems::PmsConfig::from_number(rng.gen_range(1..=3)).unwrap();
                    let inst = PmsInstance::generate(n, m, config, s);
                    let opt = pms_optimum(&inst.processing, &inst.weights, m);
                    case(format!("pms n={n} m={m} seed={s}"), Box::new(inst), Some(opt))
                }
                ProblemKind::Mrasp => {
                    let a = rng.gen_range(3..=6);
                    let r = rng.gen_range(1..=2);
                    let inst = MraspInstance::generate(a, r, s);
                    let opt = cover_optimum(a, &mrasp_patterns(&inst), r, false);
                    case(format!("mrasp |A|={a} R={r} seed={s}"), Box::new(inst), opt)
                }
                ProblemKind::Vrptw | ProblemKind::CumVrptw => {
                    let n = rng.gen_range(3..=6);
                    let cumulative = kind == ProblemKind::CumVrptw;
                    let problem = RoutingProblem::new(RoutingInstance::random(n, s), cumulative, true);
                    let limit = if cumulative { problem.instance.vehicles } else { n };
                    let opt = cover_optimum(n, &routing_patterns(&problem), limit, false);
                    let problem = RoutingProblem::new(problem.instance, cumulative, elementary);
                    case(format!("{kind} n={n} seed={s}"), Box::new(problem), opt)
                }
                ProblemKind::Pdptw => {
                    let n = rng.gen_range(2..=4);
                    let inst = PdptwInstance::random(n, s);
                    let opt = cover_optimum(n, &pdptw_patterns(&inst), n, false);
                    case(format!("pdptw n={n} seed={s}"), Box::new(PdptwProblem::new(inst, elementary)), opt)
                }
            }
        })
        .collect()
}

fn case(label: String, problem: Box<dyn Family>, optimum: Option<f64>) -> Case {
    Case { label, problem, optimum }
}

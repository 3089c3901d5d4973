//! Declarative dynamic programs: state schema, transitions, base cases,
//! state constraints, dominance and dual bounds.

mod state;
mod tables;

use std::cmp::Ordering;

use thiserror::Error;

use crate::expr::{
    BoolTableId, CheckError, Cond, ElemExpr, ElemTableId, ElemVar, Env, EvalError, NumExpr,
    NumTableId, NumVar, Set, SetExpr, SetTableId, SetVar, Signature, MAX_UNIVERSE,
};

pub use state::{State, StateKey};
pub use tables::{Table, Tables};

use state::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Element,
    Numeric,
    Set,
}

/// Preference direction of a resource variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resource {
    None,
    PreferLess,
    PreferGreater,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDef {
    pub name: String,
    pub kind: VarKind,
    /// Universe size for element and set variables; `0` for numerics.
    pub universe: usize,
    pub resource: Resource,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("invalid declaration: {0}")]
    Declaration(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("transition `{0}` is not applicable")]
    NotApplicable(String),
}

/// Values the element parameter of a transition ranges over.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamDomain {
    None,
    Values(Vec<usize>),
    /// Members of a set evaluated on the current state, ascending.
    Set(SetExpr),
}

/// A transition; when parameterized, the parameter is bound at level 0 in
/// every expression of the transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub name: String,
    pub param: ParamDomain,
    pub preconditions: Vec<Cond>,
    pub element_effects: Vec<(ElemVar, ElemExpr)>,
    pub numeric_effects: Vec<(NumVar, NumExpr)>,
    pub set_effects: Vec<(SetVar, SetExpr)>,
    pub weight: NumExpr,
}

impl Transition {
    pub fn new(name: impl Into<String>) -> Self {
        Transition {
            name: name.into(),
            param: ParamDomain::None,
            preconditions: Vec::new(),
            element_effects: Vec::new(),
            numeric_effects: Vec::new(),
            set_effects: Vec::new(),
            weight: NumExpr::Const(0.0),
        }
    }

    pub fn over_values(mut self, values: impl IntoIterator<Item = usize>) -> Self {
        self.param = ParamDomain::Values(values.into_iter().collect());
        self
    }

    pub fn over_set(mut self, set: SetExpr) -> Self {
        self.param = ParamDomain::Set(set);
        self
    }

    pub fn pre(mut self, cond: Cond) -> Self {
        self.preconditions.push(cond);
        self
    }

    pub fn elem(mut self, var: ElemVar, e: impl Into<ElemExpr>) -> Self {
        self.element_effects.push((var, e.into()));
        self
    }

    pub fn num(mut self, var: NumVar, e: impl Into<NumExpr>) -> Self {
        self.numeric_effects.push((var, e.into()));
        self
    }

    pub fn set(mut self, var: SetVar, e: SetExpr) -> Self {
        self.set_effects.push((var, e));
        self
    }

    pub fn weight(mut self, e: impl Into<NumExpr>) -> Self {
        self.weight = e.into();
        self
    }

    fn depth(&self) -> usize {
        usize::from(self.param != ParamDomain::None)
    }
}

/// A transition instance: the transition index plus its bound parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionRef {
    pub id: usize,
    pub param: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseCase {
    pub conditions: Vec<Cond>,
    pub value: NumExpr,
}

/// A declarative DP (minimization, additive weights).
#[derive(Debug, Clone)]
pub struct Model {
    vars: Vec<VarDef>,
    elem_slots: Vec<usize>,
    num_slots: Vec<usize>,
    set_slots: Vec<usize>,
    set_universes: Vec<usize>,
    target: State,
    transitions: Vec<Transition>,
    base_cases: Vec<BaseCase>,
    state_constraints: Vec<Cond>,
    dual_bounds: Vec<NumExpr>,
    tables: Tables,
}

impl Model {
    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn target(&self) -> &State {
        &self.target
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionRef) -> &Transition {
        &self.transitions[t.id]
    }

    pub fn has_dual_bounds(&self) -> bool {
        !self.dual_bounds.is_empty()
    }

    /// Replaces the target state (used to evaluate the model from an
    /// intermediate state).
    pub fn with_target(&self, target: State) -> Model {
        let mut m = self.clone();
        m.target = target;
        m
    }

    pub fn signature(&self) -> Signature<'_> {
        Signature {
            num_vars: self.num_slots.len(),
            elem_vars: self.elem_slots.len(),
            set_universes: &self.set_universes,
            tables: &self.tables,
        }
    }

    fn env<'a>(&'a self, state: &'a State, param: Option<usize>) -> Env<'a> {
        let env = Env::new(state, &self.tables);
        match param {
            Some(p) => env.bind(p),
            None => env,
        }
    }

    fn holds(&self, t: &Transition, env: &Env) -> Result<bool, EvalError> {
        for c in &t.preconditions {
            if !c.eval(env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Applicable transition instances in definition order, then ascending
    /// parameter order.
    pub fn applicable_transitions(&self, state: &State) -> Result<Vec<TransitionRef>, EvalError> {
        let mut out = Vec::new();
        for (id, t) in self.transitions.iter().enumerate() {
            let mut push = |param: Option<usize>| -> Result<(), EvalError> {
                if self.holds(t, &self.env(state, param))? {
                    out.push(TransitionRef { id, param });
                }
                Ok(())
            };
            match &t.param {
                ParamDomain::None => push(None)?,
                ParamDomain::Values(vs) => {
                    for &v in vs {
                        push(Some(v))?;
                    }
                }
                ParamDomain::Set(s) => {
                    let members = s.eval(&Env::new(state, &self.tables))?;
                    for v in members.iter() {
                        push(Some(v))?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_applicable(&self, t: TransitionRef, state: &State) -> Result<bool, EvalError> {
        let tr = &self.transitions[t.id];
        let in_domain = match (&tr.param, t.param) {
            (ParamDomain::None, None) => true,
            (ParamDomain::Values(vs), Some(p)) => vs.contains(&p),
            (ParamDomain::Set(s), Some(p)) => s.eval(&Env::new(state, &self.tables))?.contains(p),
            _ => false,
        };
        Ok(in_domain && self.holds(tr, &self.env(state, t.param))?)
    }

    /// Successor state with every effect evaluated on the original state.
    pub fn apply(&self, t: TransitionRef, state: &State) -> Result<State, EvalError> {
        let tr = &self.transitions[t.id];
        let env = self.env(state, t.param);
        let mut next = state.clone();
        for (v, e) in &tr.element_effects {
            next.elements[v.0] = e.eval(&env)?;
        }
        for (v, e) in &tr.numeric_effects {
            next.numerics[v.0] = normalize(e.eval(&env)?);
        }
        for (v, e) in &tr.set_effects {
            let mut s = e.eval(&env)?;
            let universe = self.set_universes[v.0];
            if s.universe() != universe {
                s = s.with_universe(universe);
            }
            next.sets[v.0] = s;
        }
        Ok(next)
    }

    /// Like [`Model::apply`] but verifies applicability first.
    pub fn apply_checked(&self, t: TransitionRef, state: &State) -> Result<State, ModelError> {
        if !self.is_applicable(t, state)? {
            return Err(ModelError::NotApplicable(self.transitions[t.id].name.clone()));
        }
        Ok(self.apply(t, state)?)
    }

    pub fn weight(&self, t: TransitionRef, state: &State) -> Result<f64, EvalError> {
        self.transitions[t.id].weight.eval(&self.env(state, t.param))
    }

    /// Value of the first satisfied base case, if any.
    pub fn is_base(&self, state: &State) -> Result<Option<f64>, EvalError> {
        let env = Env::new(state, &self.tables);
        'cases: for b in &self.base_cases {
            for c in &b.conditions {
                if !c.eval(&env)? {
                    continue 'cases;
                }
            }
            return Ok(Some(b.value.eval(&env)?));
        }
        Ok(None)
    }

    pub fn check_state_constraints(&self, state: &State) -> Result<bool, EvalError> {
        let env = Env::new(state, &self.tables);
        for c in &self.state_constraints {
            if !c.eval(&env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Maximum of the dual bound expressions; `-inf` when none are declared.
    pub fn eval_dual_bound(&self, state: &State) -> Result<f64, EvalError> {
        let env = Env::new(state, &self.tables);
        let mut best = f64::NEG_INFINITY;
        for e in &self.dual_bounds {
            best = best.max(e.eval(&env)?);
        }
        Ok(best)
    }

    /// The non-resource projection of a state.
    pub fn key(&self, state: &State) -> StateKey {
        let resource = |slot: usize| self.vars[slot].resource != Resource::None;
        let elements = state
            .elements
            .iter()
            .zip(&self.elem_slots)
            .filter(|(_, &s)| !resource(s))
            .map(|(v, _)| *v)
            .collect();
        let numerics = state
            .numerics
            .iter()
            .zip(&self.num_slots)
            .filter(|(_, &s)| !resource(s))
            .map(|(v, _)| v.to_bits())
            .collect();
        let sets = state
            .sets
            .iter()
            .zip(&self.set_slots)
            .filter(|(_, &s)| !resource(s))
            .map(|(v, _)| v.clone())
            .collect();
        StateKey::new(elements, numerics, sets)
    }

    /// Whether `s1` is preferred to `s2`: equal on non-resource variables and
    /// weakly better on every resource variable.
    pub fn dominates(&self, s1: &State, s2: &State) -> bool {
        for (i, &slot) in self.elem_slots.iter().enumerate() {
            let (a, b) = (s1.elements[i], s2.elements[i]);
            let ok = match self.vars[slot].resource {
                Resource::None => a == b,
                Resource::PreferLess => a <= b,
                Resource::PreferGreater => a >= b,
            };
            if !ok {
                return false;
            }
        }
        for (i, &slot) in self.num_slots.iter().enumerate() {
            let (a, b) = (s1.numerics[i], s2.numerics[i]);
            let ok = match self.vars[slot].resource {
                Resource::None => a == b,
                Resource::PreferLess => a <= b,
                Resource::PreferGreater => a >= b,
            };
            if !ok {
                return false;
            }
        }
        for (i, &slot) in self.set_slots.iter().enumerate() {
            let (a, b) = (&s1.sets[i], &s2.sets[i]);
            let ok = match self.vars[slot].resource {
                Resource::None => a == b,
                Resource::PreferLess => a.is_subset(b),
                Resource::PreferGreater => b.is_subset(a),
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Orders states by their resource variables: element resources first,
    /// then numeric, then set resources, each in declaration order.
    /// `Less` means `s1` is preferred. Sets compare by population count in
    /// the preference direction, which agrees with the subset order whenever
    /// the two sets are nested.
    pub fn lex_compare(&self, s1: &State, s2: &State) -> Ordering {
        fn directed(o: Ordering, r: Resource) -> Ordering {
            match r {
                Resource::PreferGreater => o.reverse(),
                _ => o,
            }
        }
        for (i, &slot) in self.elem_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                let o = directed(s1.elements[i].cmp(&s2.elements[i]), r);
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
        for (i, &slot) in self.num_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                let o = directed(s1.numerics[i].total_cmp(&s2.numerics[i]), r);
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
        for (i, &slot) in self.set_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                let o = directed(s1.sets[i].len().cmp(&s2.sets[i].len()), r);
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
        Ordering::Equal
    }

    /// Sort key realizing [`Model::lex_compare`]: smaller keys are preferred.
    pub fn lex_key(&self, state: &State) -> Vec<f64> {
        fn directed(x: f64, r: Resource) -> f64 {
            match r {
                Resource::PreferGreater => 0.0 - x,
                _ => x + 0.0,
            }
        }
        let mut key = Vec::new();
        for (i, &slot) in self.elem_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                key.push(directed(state.elements[i] as f64, r));
            }
        }
        for (i, &slot) in self.num_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                key.push(directed(state.numerics[i], r));
            }
        }
        for (i, &slot) in self.set_slots.iter().enumerate() {
            let r = self.vars[slot].resource;
            if r != Resource::None {
                key.push(directed(state.sets[i].len() as f64, r));
            }
        }
        key
    }

    /// Key covering every variable; used for exact duplicate detection.
    pub fn full_key(&self, state: &State) -> StateKey {
        StateKey::new(
            state.elements.clone(),
            state.numerics.iter().map(|x| x.to_bits()).collect(),
            state.sets.clone(),
        )
    }

    /// Whether any variable is a resource variable.
    pub fn has_resources(&self) -> bool {
        self.vars.iter().any(|v| v.resource != Resource::None)
    }
}

/// Incremental construction of a [`Model`]; [`ModelBuilder::build`] checks
/// every expression against the schema.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    vars: Vec<VarDef>,
    elem_slots: Vec<usize>,
    num_slots: Vec<usize>,
    set_slots: Vec<usize>,
    set_universes: Vec<usize>,
    target: State,
    transitions: Vec<Transition>,
    base_cases: Vec<BaseCase>,
    state_constraints: Vec<Cond>,
    dual_bounds: Vec<NumExpr>,
    tables: Tables,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_name(&self, name: &str) -> Result<(), ModelError> {
        if self.vars.iter().any(|v| v.name == name) {
            return Err(ModelError::Declaration(format!("duplicate variable `{name}`")));
        }
        Ok(())
    }

    /// Element variable with values in `0..=universe`.
    pub fn add_element_var(
        &mut self,
        name: &str,
        universe: usize,
        resource: Resource,
        init: usize,
    ) -> Result<ElemVar, ModelError> {
        self.check_name(name)?;
        if init > universe {
            return Err(ModelError::Declaration(format!(
                "initial value {init} of `{name}` exceeds universe {universe}"
            )));
        }
        self.elem_slots.push(self.vars.len());
        self.vars.push(VarDef {
            name: name.into(),
            kind: VarKind::Element,
            universe,
            resource,
        });
        self.target.elements.push(init);
        Ok(ElemVar(self.elem_slots.len() - 1))
    }

    pub fn add_numeric_var(&mut self, name: &str, resource: Resource, init: f64) -> NumVar {
        self.num_slots.push(self.vars.len());
        self.vars.push(VarDef {
            name: name.into(),
            kind: VarKind::Numeric,
            universe: 0,
            resource,
        });
        self.target.numerics.push(normalize(init));
        NumVar(self.num_slots.len() - 1)
    }

    pub fn add_set_var(
        &mut self,
        name: &str,
        universe: usize,
        resource: Resource,
        init: Set,
    ) -> Result<SetVar, ModelError> {
        self.check_name(name)?;
        if universe > MAX_UNIVERSE {
            return Err(ModelError::Declaration(format!(
                "set `{name}` has universe {universe}, the limit is {MAX_UNIVERSE}"
            )));
        }
        if init.iter().any(|x| x >= universe) {
            return Err(ModelError::Declaration(format!(
                "initial value of `{name}` leaves its universe"
            )));
        }
        self.set_slots.push(self.vars.len());
        self.set_universes.push(universe);
        self.vars.push(VarDef {
            name: name.into(),
            kind: VarKind::Set,
            universe,
            resource,
        });
        self.target.sets.push(init.with_universe(universe));
        Ok(SetVar(self.set_slots.len() - 1))
    }

    pub fn add_numeric_table(
        &mut self,
        name: &str,
        dims: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<NumTableId, ModelError> {
        self.tables
            .numeric
            .push(Table::new(name, dims, data).map_err(ModelError::Declaration)?);
        Ok(NumTableId(self.tables.numeric.len() - 1))
    }

    pub fn add_element_table(
        &mut self,
        name: &str,
        dims: Vec<usize>,
        data: Vec<usize>,
    ) -> Result<ElemTableId, ModelError> {
        self.tables
            .element
            .push(Table::new(name, dims, data).map_err(ModelError::Declaration)?);
        Ok(ElemTableId(self.tables.element.len() - 1))
    }

    pub fn add_set_table(
        &mut self,
        name: &str,
        dims: Vec<usize>,
        data: Vec<Set>,
    ) -> Result<SetTableId, ModelError> {
        self.tables
            .set
            .push(Table::new(name, dims, data).map_err(ModelError::Declaration)?);
        Ok(SetTableId(self.tables.set.len() - 1))
    }

    pub fn add_bool_table(
        &mut self,
        name: &str,
        dims: Vec<usize>,
        data: Vec<bool>,
    ) -> Result<BoolTableId, ModelError> {
        self.tables
            .boolean
            .push(Table::new(name, dims, data).map_err(ModelError::Declaration)?);
        Ok(BoolTableId(self.tables.boolean.len() - 1))
    }

    pub fn add_transition(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn add_base_case(&mut self, conditions: Vec<Cond>, value: NumExpr) {
        self.base_cases.push(BaseCase { conditions, value });
    }

    pub fn add_state_constraint(&mut self, c: Cond) {
        self.state_constraints.push(c);
    }

    pub fn add_dual_bound(&mut self, e: NumExpr) {
        self.dual_bounds.push(e);
    }

    pub fn build(self) -> Result<Model, ModelError> {
        let sig = Signature {
            num_vars: self.num_slots.len(),
            elem_vars: self.elem_slots.len(),
            set_universes: &self.set_universes,
            tables: &self.tables,
        };
        for t in &self.transitions {
            let d = t.depth();
            if let ParamDomain::Set(s) = &t.param {
                s.check(&sig, 0)?;
            }
            for c in &t.preconditions {
                c.check(&sig, d)?;
            }
            for (v, e) in &t.element_effects {
                ElemExpr::Var(*v).check(&sig, 0)?;
                e.check(&sig, d)?;
            }
            for (v, e) in &t.numeric_effects {
                NumExpr::Var(*v).check(&sig, 0)?;
                e.check(&sig, d)?;
            }
            for (v, e) in &t.set_effects {
                SetExpr::Var(*v).check(&sig, 0)?;
                e.check(&sig, d)?;
            }
            t.weight.check(&sig, d)?;
        }
        for b in &self.base_cases {
            for c in &b.conditions {
                c.check(&sig, 0)?;
            }
            b.value.check(&sig, 0)?;
        }
        for c in &self.state_constraints {
            c.check(&sig, 0)?;
        }
        for e in &self.dual_bounds {
            e.check(&sig, 0)?;
        }
        Ok(Model {
            vars: self.vars,
            elem_slots: self.elem_slots,
            num_slots: self.num_slots,
            set_slots: self.set_slots,
            set_universes: self.set_universes,
            target: self.target,
            transitions: self.transitions,
            base_cases: self.base_cases,
            state_constraints: self.state_constraints,
            dual_bounds: self.dual_bounds,
            tables: self.tables,
        })
    }
}

//! Expression trees evaluated against a [`State`].
//!
//! Four expression kinds exist, one Rust type each: [`NumExpr`] (rationals as
//! `f64`), [`ElemExpr`] (element indices), [`SetExpr`] (bitsets) and [`Cond`]
//! (Booleans). Using one type per kind makes most kind errors unrepresentable;
//! the rest (wrong variable slot, wrong table arity, unbound parameter) are
//! caught by [`NumExpr::check`] and friends when a model is built.
//!
//! Bound element parameters are referenced by level: level 0 is the parameter
//! of the enclosing transition (if any), and every `Filter`, `Sum`, `MinOver`
//! or `MaxOver` node binds the next level for its body.

mod knapsack;
mod set;

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

pub use knapsack::dantzig_bound;
pub use set::{Set, MAX_UNIVERSE};

use crate::model::{State, Tables};

/// Maximum nesting of bound parameters.
pub const MAX_PARAMS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index:?} out of range for table `{table}`")]
    IndexOutOfRange { table: String, index: Vec<usize> },
    #[error("element arithmetic underflow")]
    ElementUnderflow,
    #[error("parameter level {0} is not bound")]
    UnboundParameter(usize),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("knapsack lists have {len} entries but item {item} was requested")]
    LengthMismatch { len: usize, item: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    fn apply<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Table handles. The wrapped index points into the matching list of
/// [`Tables`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NumTableId(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElemTableId(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SetTableId(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoolTableId(pub usize);

/// Variable handles. The wrapped index is the slot within the state vector of
/// that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NumVar(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElemVar(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SetVar(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum ElemExpr {
    Const(usize),
    Var(ElemVar),
    Param(usize),
    Table(ElemTableId, Box<[ElemExpr]>),
    Add(Box<ElemExpr>, Box<ElemExpr>),
    Sub(Box<ElemExpr>, Box<ElemExpr>),
    If(Box<Cond>, Box<ElemExpr>, Box<ElemExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Const(f64),
    Var(NumVar),
    FromElem(Box<ElemExpr>),
    Table(NumTableId, Box<[ElemExpr]>),
    Bin(NumOp, Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
    Floor(Box<NumExpr>),
    If(Box<Cond>, Box<NumExpr>, Box<NumExpr>),
    Cardinality(Box<SetExpr>),
    /// Sum of `body` over the members of a set; binds one parameter level.
    Sum(Box<SetExpr>, Box<NumExpr>),
    /// Minimum of `body` over a set (`+inf` when empty); binds one level.
    MinOver(Box<SetExpr>, Box<NumExpr>),
    /// Maximum of `body` over a set (`-inf` when empty); binds one level.
    MaxOver(Box<SetExpr>, Box<NumExpr>),
    Knapsack(Box<KnapsackSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Const(Set),
    Var(SetVar),
    Table(SetTableId, Box<[ElemExpr]>),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersection(Box<SetExpr>, Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
    Insert(Box<SetExpr>, Box<ElemExpr>),
    Remove(Box<SetExpr>, Box<ElemExpr>),
    Complement(Box<SetExpr>),
    /// `{x in source : predicate(x)}`; the predicate sees `x` at the next
    /// parameter level.
    Filter(Box<FilterSpec>),
    If(Box<Cond>, Box<SetExpr>, Box<SetExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Const(bool),
    Not(Box<Cond>),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    NumCmp(CmpOp, Box<NumExpr>, Box<NumExpr>),
    ElemCmp(CmpOp, Box<ElemExpr>, Box<ElemExpr>),
    Contains(Box<SetExpr>, Box<ElemExpr>),
    Subset(Box<SetExpr>, Box<SetExpr>),
    IsEmpty(Box<SetExpr>),
    Table(BoolTableId, Box<[ElemExpr]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub source: SetExpr,
    pub predicate: Cond,
}

/// Fractional knapsack over the members of `items`; `profits[x]` and
/// `weights[x]` give the data of member `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSpec {
    pub items: SetExpr,
    pub capacity: NumExpr,
    pub profits: Vec<NumExpr>,
    pub weights: Vec<NumExpr>,
}

/// A value of any kind, as returned by [`Expression::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Numeric(f64),
    Element(usize),
    Set(Set),
    Bool(bool),
}

/// An expression of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Numeric(NumExpr),
    Element(ElemExpr),
    Set(SetExpr),
    Condition(Cond),
}

impl Expression {
    pub fn evaluate(&self, state: &State, tables: &Tables) -> Result<Value, EvalError> {
        let env = Env::new(state, tables);
        Ok(match self {
            Expression::Numeric(e) => Value::Numeric(e.eval(&env)?),
            Expression::Element(e) => Value::Element(e.eval(&env)?),
            Expression::Set(e) => Value::Set(e.eval(&env)?),
            Expression::Condition(e) => Value::Bool(e.eval(&env)?),
        })
    }
}

/// Evaluation environment: the state, the constant tables and the bound
/// parameter stack.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub state: &'a State,
    pub tables: &'a Tables,
    params: [usize; MAX_PARAMS],
    depth: usize,
}

impl<'a> Env<'a> {
    pub fn new(state: &'a State, tables: &'a Tables) -> Self {
        Env {
            state,
            tables,
            params: [0; MAX_PARAMS],
            depth: 0,
        }
    }

    /// Returns a copy with `value` bound at the next parameter level.
    pub fn bind(&self, value: usize) -> Self {
        let mut env = *self;
        debug_assert!(env.depth < MAX_PARAMS);
        env.params[env.depth] = value;
        env.depth += 1;
        env
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn param(&self, level: usize) -> Result<usize, EvalError> {
        if level < self.depth {
            Ok(self.params[level])
        } else {
            Err(EvalError::UnboundParameter(level))
        }
    }
}

fn eval_indices(indices: &[ElemExpr], env: &Env) -> Result<[usize; 3], EvalError> {
    let mut out = [0; 3];
    for (slot, e) in out.iter_mut().zip(indices) {
        *slot = e.eval(env)?;
    }
    Ok(out)
}

impl ElemExpr {
    pub fn eval(&self, env: &Env) -> Result<usize, EvalError> {
        match self {
            ElemExpr::Const(v) => Ok(*v),
            ElemExpr::Var(v) => env.state.element(*v),
            ElemExpr::Param(level) => env.param(*level),
            ElemExpr::Table(id, idx) => {
                let index = eval_indices(idx, env)?;
                env.tables.element(*id, &index[..idx.len()])
            }
            ElemExpr::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            ElemExpr::Sub(a, b) => a
                .eval(env)?
                .checked_sub(b.eval(env)?)
                .ok_or(EvalError::ElementUnderflow),
            ElemExpr::If(c, a, b) => {
                if c.eval(env)? {
                    a.eval(env)
                } else {
                    b.eval(env)
                }
            }
        }
    }
}

impl NumExpr {
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            NumExpr::Const(v) => Ok(*v),
            NumExpr::Var(v) => env.state.numeric(*v),
            NumExpr::FromElem(e) => Ok(e.eval(env)? as f64),
            NumExpr::Table(id, idx) => {
                let index = eval_indices(idx, env)?;
                env.tables.numeric(*id, &index[..idx.len()])
            }
            NumExpr::Bin(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                Ok(match op {
                    NumOp::Add => x + y,
                    NumOp::Sub => x - y,
                    NumOp::Mul => x * y,
                    NumOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x / y
                    }
                    NumOp::Min => x.min(y),
                    NumOp::Max => x.max(y),
                })
            }
            NumExpr::Neg(a) => Ok(-a.eval(env)?),
            NumExpr::Floor(a) => Ok(a.eval(env)?.floor()),
            NumExpr::If(c, a, b) => {
                if c.eval(env)? {
                    a.eval(env)
                } else {
                    b.eval(env)
                }
            }
            NumExpr::Cardinality(s) => Ok(s.eval(env)?.len() as f64),
            NumExpr::Sum(s, body) => fold_over(s, body, env, 0.0, |a, b| a + b),
            NumExpr::MinOver(s, body) => fold_over(s, body, env, f64::INFINITY, f64::min),
            NumExpr::MaxOver(s, body) => fold_over(s, body, env, f64::NEG_INFINITY, f64::max),
            NumExpr::Knapsack(spec) => spec.eval(env),
        }
    }
}

fn fold_over(
    set: &SetExpr,
    body: &NumExpr,
    env: &Env,
    init: f64,
    op: impl Fn(f64, f64) -> f64,
) -> Result<f64, EvalError> {
    let set = set.eval(env)?;
    let mut acc = init;
    for x in set.iter() {
        acc = op(acc, body.eval(&env.bind(x))?);
    }
    Ok(acc)
}

impl SetExpr {
    pub fn eval(&self, env: &Env) -> Result<Set, EvalError> {
        match self {
            SetExpr::Const(s) => Ok(s.clone()),
            SetExpr::Var(v) => env.state.set(*v).cloned(),
            SetExpr::Table(id, idx) => {
                let index = eval_indices(idx, env)?;
                env.tables.set(*id, &index[..idx.len()]).cloned()
            }
            SetExpr::Union(a, b) => Ok(a.eval(env)?.union(&b.eval(env)?)),
            SetExpr::Intersection(a, b) => Ok(a.eval(env)?.intersection(&b.eval(env)?)),
            SetExpr::Difference(a, b) => Ok(a.eval(env)?.difference(&b.eval(env)?)),
            SetExpr::Insert(s, e) => {
                let mut set = s.eval(env)?;
                set.insert(e.eval(env)?);
                Ok(set)
            }
            SetExpr::Remove(s, e) => {
                let mut set = s.eval(env)?;
                set.remove(e.eval(env)?);
                Ok(set)
            }
            SetExpr::Complement(s) => Ok(s.eval(env)?.complement()),
            SetExpr::Filter(spec) => spec.eval(env),
            SetExpr::If(c, a, b) => {
                if c.eval(env)? {
                    a.eval(env)
                } else {
                    b.eval(env)
                }
            }
        }
    }
}

impl Cond {
    pub fn eval(&self, env: &Env) -> Result<bool, EvalError> {
        match self {
            Cond::Const(b) => Ok(*b),
            Cond::Not(c) => Ok(!c.eval(env)?),
            Cond::And(cs) => {
                for c in cs {
                    if !c.eval(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Cond::Or(cs) => {
                for c in cs {
                    if c.eval(env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Cond::NumCmp(op, a, b) => Ok(op.apply(a.eval(env)?, b.eval(env)?)),
            Cond::ElemCmp(op, a, b) => Ok(op.apply(a.eval(env)?, b.eval(env)?)),
            Cond::Contains(s, e) => {
                let x = e.eval(env)?;
                // common case: membership in a variable, no clone needed
                if let SetExpr::Var(v) = s.as_ref() {
                    return Ok(env.state.set(*v)?.contains(x));
                }
                Ok(s.eval(env)?.contains(x))
            }
            Cond::Subset(a, b) => Ok(a.eval(env)?.is_subset(&b.eval(env)?)),
            Cond::IsEmpty(s) => Ok(s.eval(env)?.is_empty()),
            Cond::Table(id, idx) => {
                let index = eval_indices(idx, env)?;
                env.tables.boolean(*id, &index[..idx.len()])
            }
        }
    }
}

impl FilterSpec {
    pub fn eval(&self, env: &Env) -> Result<Set, EvalError> {
        let mut set = self.source.eval(env)?;
        let members: Vec<usize> = set.iter().collect();
        for x in members {
            if !self.predicate.eval(&env.bind(x))? {
                set.remove(x);
            }
        }
        Ok(set)
    }
}

impl KnapsackSpec {
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let items = self.items.eval(env)?;
        let capacity = self.capacity.eval(env)?;
        let mut data = Vec::with_capacity(items.len());
        for x in items.iter() {
            let len = self.profits.len().min(self.weights.len());
            if x >= len {
                return Err(EvalError::LengthMismatch { len, item: x });
            }
            let profit = self.profits[x].eval(env)?;
            if profit <= 0.0 {
                continue;
            }
            data.push((profit, self.weights[x].eval(env)?));
        }
        Ok(dantzig_bound(&data, capacity))
    }
}

/// Static information an expression is checked against.
pub struct Signature<'a> {
    pub num_vars: usize,
    pub elem_vars: usize,
    pub set_universes: &'a [usize],
    pub tables: &'a Tables,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("unresolved symbol: {0}")]
    UnknownSymbol(String),
    #[error("knapsack lists have {len} entries but the item universe has {universe}")]
    LengthMismatch { len: usize, universe: usize },
}

fn check_indices(
    sig: &Signature,
    depth: usize,
    name: &str,
    arity: Option<usize>,
    idx: &[ElemExpr],
) -> Result<(), CheckError> {
    let arity = arity.ok_or_else(|| CheckError::UnknownSymbol(format!("table {name}")))?;
    if arity != idx.len() {
        return Err(CheckError::KindMismatch(format!(
            "table {name} has arity {arity}, indexed with {}",
            idx.len()
        )));
    }
    idx.iter().try_for_each(|e| e.check(sig, depth))
}

impl ElemExpr {
    pub fn check(&self, sig: &Signature, depth: usize) -> Result<(), CheckError> {
        match self {
            ElemExpr::Const(_) => Ok(()),
            ElemExpr::Var(v) if v.0 < sig.elem_vars => Ok(()),
            ElemExpr::Var(v) => Err(CheckError::KindMismatch(format!("no element variable {}", v.0))),
            ElemExpr::Param(l) if *l < depth => Ok(()),
            ElemExpr::Param(l) => Err(CheckError::UnknownSymbol(format!("parameter level {l}"))),
            ElemExpr::Table(id, idx) => check_indices(
                sig,
                depth,
                &format!("element#{}", id.0),
                sig.tables.element_arity(*id),
                idx,
            ),
            ElemExpr::Add(a, b) | ElemExpr::Sub(a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            ElemExpr::If(c, a, b) => {
                c.check(sig, depth)?;
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
        }
    }
}

impl NumExpr {
    pub fn check(&self, sig: &Signature, depth: usize) -> Result<(), CheckError> {
        match self {
            NumExpr::Const(_) => Ok(()),
            NumExpr::Var(v) if v.0 < sig.num_vars => Ok(()),
            NumExpr::Var(v) => Err(CheckError::KindMismatch(format!("no numeric variable {}", v.0))),
            NumExpr::FromElem(e) => e.check(sig, depth),
            NumExpr::Table(id, idx) => check_indices(
                sig,
                depth,
                &format!("numeric#{}", id.0),
                sig.tables.numeric_arity(*id),
                idx,
            ),
            NumExpr::Bin(_, a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            NumExpr::Neg(a) | NumExpr::Floor(a) => a.check(sig, depth),
            NumExpr::If(c, a, b) => {
                c.check(sig, depth)?;
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            NumExpr::Cardinality(s) => s.check(sig, depth),
            NumExpr::Sum(s, body) | NumExpr::MinOver(s, body) | NumExpr::MaxOver(s, body) => {
                s.check(sig, depth)?;
                check_depth(depth + 1)?;
                body.check(sig, depth + 1)
            }
            NumExpr::Knapsack(spec) => {
                spec.items.check(sig, depth)?;
                spec.capacity.check(sig, depth)?;
                let universe = spec.items.universe(sig);
                let len = spec.profits.len().min(spec.weights.len());
                if len < universe {
                    return Err(CheckError::LengthMismatch { len, universe });
                }
                spec.profits
                    .iter()
                    .chain(&spec.weights)
                    .try_for_each(|e| e.check(sig, depth))
            }
        }
    }
}

fn check_depth(depth: usize) -> Result<(), CheckError> {
    if depth > MAX_PARAMS {
        Err(CheckError::KindMismatch(format!(
            "parameter nesting deeper than {MAX_PARAMS}"
        )))
    } else {
        Ok(())
    }
}

impl SetExpr {
    pub fn check(&self, sig: &Signature, depth: usize) -> Result<(), CheckError> {
        match self {
            SetExpr::Const(_) => Ok(()),
            SetExpr::Var(v) if v.0 < sig.set_universes.len() => Ok(()),
            SetExpr::Var(v) => Err(CheckError::KindMismatch(format!("no set variable {}", v.0))),
            SetExpr::Table(id, idx) => check_indices(
                sig,
                depth,
                &format!("set#{}", id.0),
                sig.tables.set_arity(*id),
                idx,
            ),
            SetExpr::Union(a, b) | SetExpr::Intersection(a, b) | SetExpr::Difference(a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            SetExpr::Insert(s, e) | SetExpr::Remove(s, e) => {
                s.check(sig, depth)?;
                e.check(sig, depth)
            }
            SetExpr::Complement(s) => s.check(sig, depth),
            SetExpr::Filter(spec) => {
                spec.source.check(sig, depth)?;
                check_depth(depth + 1)?;
                spec.predicate.check(sig, depth + 1)
            }
            SetExpr::If(c, a, b) => {
                c.check(sig, depth)?;
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
        }
    }

    /// Upper bound on the universe size of the values this expression yields.
    pub fn universe(&self, sig: &Signature) -> usize {
        match self {
            SetExpr::Const(s) => s.universe(),
            SetExpr::Var(v) => sig.set_universes.get(v.0).copied().unwrap_or(0),
            SetExpr::Table(id, _) => sig.tables.set_universe(*id),
            SetExpr::Union(a, b) | SetExpr::Intersection(a, b) => a.universe(sig).max(b.universe(sig)),
            SetExpr::Difference(a, _) | SetExpr::Complement(a) => a.universe(sig),
            SetExpr::Insert(s, _) | SetExpr::Remove(s, _) => s.universe(sig),
            SetExpr::Filter(spec) => spec.source.universe(sig),
            SetExpr::If(_, a, b) => a.universe(sig).max(b.universe(sig)),
        }
    }
}

impl Cond {
    pub fn check(&self, sig: &Signature, depth: usize) -> Result<(), CheckError> {
        match self {
            Cond::Const(_) => Ok(()),
            Cond::Not(c) => c.check(sig, depth),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().try_for_each(|c| c.check(sig, depth)),
            Cond::NumCmp(_, a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            Cond::ElemCmp(_, a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            Cond::Contains(s, e) => {
                s.check(sig, depth)?;
                e.check(sig, depth)
            }
            Cond::Subset(a, b) => {
                a.check(sig, depth)?;
                b.check(sig, depth)
            }
            Cond::IsEmpty(s) => s.check(sig, depth),
            Cond::Table(id, idx) => check_indices(
                sig,
                depth,
                &format!("bool#{}", id.0),
                sig.tables.boolean_arity(*id),
                idx,
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Construction helpers

impl ElemExpr {
    pub fn param(level: usize) -> Self {
        ElemExpr::Param(level)
    }

    pub fn cmp(self, op: CmpOp, rhs: impl Into<ElemExpr>) -> Cond {
        Cond::ElemCmp(op, Box::new(self), Box::new(rhs.into()))
    }

    pub fn eq(self, rhs: impl Into<ElemExpr>) -> Cond {
        self.cmp(CmpOp::Eq, rhs)
    }

    pub fn ne(self, rhs: impl Into<ElemExpr>) -> Cond {
        self.cmp(CmpOp::Ne, rhs)
    }

    pub fn num(self) -> NumExpr {
        NumExpr::FromElem(Box::new(self))
    }

    pub fn singleton(self, universe: usize) -> SetExpr {
        SetExpr::Insert(Box::new(SetExpr::Const(Set::empty(universe))), Box::new(self))
    }
}

impl From<usize> for ElemExpr {
    fn from(v: usize) -> Self {
        ElemExpr::Const(v)
    }
}

impl From<ElemVar> for ElemExpr {
    fn from(v: ElemVar) -> Self {
        ElemExpr::Var(v)
    }
}

impl Add for ElemExpr {
    type Output = ElemExpr;
    fn add(self, rhs: ElemExpr) -> ElemExpr {
        ElemExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for ElemExpr {
    type Output = ElemExpr;
    fn sub(self, rhs: ElemExpr) -> ElemExpr {
        ElemExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl NumExpr {
    pub fn table<I: Into<ElemExpr>>(id: NumTableId, idx: impl IntoIterator<Item = I>) -> Self {
        NumExpr::Table(id, idx.into_iter().map(Into::into).collect())
    }

    pub fn cmp(self, op: CmpOp, rhs: impl Into<NumExpr>) -> Cond {
        Cond::NumCmp(op, Box::new(self), Box::new(rhs.into()))
    }

    pub fn le(self, rhs: impl Into<NumExpr>) -> Cond {
        self.cmp(CmpOp::Le, rhs)
    }

    pub fn lt(self, rhs: impl Into<NumExpr>) -> Cond {
        self.cmp(CmpOp::Lt, rhs)
    }

    pub fn ge(self, rhs: impl Into<NumExpr>) -> Cond {
        self.cmp(CmpOp::Ge, rhs)
    }

    pub fn eq(self, rhs: impl Into<NumExpr>) -> Cond {
        self.cmp(CmpOp::Eq, rhs)
    }

    pub fn min(self, rhs: impl Into<NumExpr>) -> NumExpr {
        NumExpr::Bin(NumOp::Min, Box::new(self), Box::new(rhs.into()))
    }

    pub fn max(self, rhs: impl Into<NumExpr>) -> NumExpr {
        NumExpr::Bin(NumOp::Max, Box::new(self), Box::new(rhs.into()))
    }

    pub fn floor(self) -> NumExpr {
        NumExpr::Floor(Box::new(self))
    }

    pub fn if_then_else(cond: Cond, then: impl Into<NumExpr>, otherwise: impl Into<NumExpr>) -> Self {
        NumExpr::If(Box::new(cond), Box::new(then.into()), Box::new(otherwise.into()))
    }

    pub fn sum_over(set: SetExpr, body: NumExpr) -> Self {
        NumExpr::Sum(Box::new(set), Box::new(body))
    }

    pub fn min_over(set: SetExpr, body: NumExpr) -> Self {
        NumExpr::MinOver(Box::new(set), Box::new(body))
    }

    pub fn knapsack(spec: KnapsackSpec) -> Self {
        NumExpr::Knapsack(Box::new(spec))
    }
}

impl From<f64> for NumExpr {
    fn from(v: f64) -> Self {
        NumExpr::Const(v)
    }
}

impl From<NumVar> for NumExpr {
    fn from(v: NumVar) -> Self {
        NumExpr::Var(v)
    }
}

macro_rules! num_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl<R: Into<NumExpr>> $tr<R> for NumExpr {
            type Output = NumExpr;
            fn $method(self, rhs: R) -> NumExpr {
                NumExpr::Bin($op, Box::new(self), Box::new(rhs.into()))
            }
        }
    };
}

num_binop!(Add, add, NumOp::Add);
num_binop!(Sub, sub, NumOp::Sub);
num_binop!(Mul, mul, NumOp::Mul);
num_binop!(Div, div, NumOp::Div);

impl Neg for NumExpr {
    type Output = NumExpr;
    fn neg(self) -> NumExpr {
        NumExpr::Neg(Box::new(self))
    }
}

impl SetExpr {
    pub fn contains(self, e: impl Into<ElemExpr>) -> Cond {
        Cond::Contains(Box::new(self), Box::new(e.into()))
    }

    pub fn remove(self, e: impl Into<ElemExpr>) -> SetExpr {
        SetExpr::Remove(Box::new(self), Box::new(e.into()))
    }

    pub fn insert(self, e: impl Into<ElemExpr>) -> SetExpr {
        SetExpr::Insert(Box::new(self), Box::new(e.into()))
    }

    pub fn union(self, other: SetExpr) -> SetExpr {
        SetExpr::Union(Box::new(self), Box::new(other))
    }

    pub fn difference(self, other: SetExpr) -> SetExpr {
        SetExpr::Difference(Box::new(self), Box::new(other))
    }

    pub fn intersection(self, other: SetExpr) -> SetExpr {
        SetExpr::Intersection(Box::new(self), Box::new(other))
    }

    pub fn filter(self, predicate: Cond) -> SetExpr {
        SetExpr::Filter(Box::new(FilterSpec {
            source: self,
            predicate,
        }))
    }

    pub fn is_empty(self) -> Cond {
        Cond::IsEmpty(Box::new(self))
    }

    pub fn len(self) -> NumExpr {
        NumExpr::Cardinality(Box::new(self))
    }

    pub fn if_then_else(cond: Cond, then: SetExpr, otherwise: SetExpr) -> SetExpr {
        SetExpr::If(Box::new(cond), Box::new(then), Box::new(otherwise))
    }
}

impl From<SetVar> for SetExpr {
    fn from(v: SetVar) -> Self {
        SetExpr::Var(v)
    }
}

impl Cond {
    pub fn all(conds: impl IntoIterator<Item = Cond>) -> Cond {
        Cond::And(conds.into_iter().collect())
    }

    pub fn any(conds: impl IntoIterator<Item = Cond>) -> Cond {
        Cond::Or(conds.into_iter().collect())
    }

    pub fn not(self) -> Cond {
        Cond::Not(Box::new(self))
    }

    pub fn table<I: Into<ElemExpr>>(id: BoolTableId, idx: impl IntoIterator<Item = I>) -> Self {
        Cond::Table(id, idx.into_iter().map(Into::into).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelBuilder, Resource};

    fn fixture() -> (crate::model::Model, NumVar, SetVar, NumTableId) {
        let mut b = ModelBuilder::new();
        let q = b.add_numeric_var("q", Resource::None, 4.0);
        let r = b
            .add_set_var("R", 8, Resource::None, Set::from_members(8, [1, 2, 5]))
            .unwrap();
        let l = b.add_numeric_table("l", vec![4], vec![0.0, 1.0, 3.0, 2.0]).unwrap();
        b.add_base_case(vec![], NumExpr::Const(0.0));
        (b.build().unwrap(), q, r, l)
    }

    #[test]
    fn filter_keeps_matching_members() {
        let (model, _, _, _) = fixture();
        let state = model.target().clone();
        let env = Env::new(&state, model.tables());
        let source = SetExpr::Const(Set::from_members(4, [1, 2, 3]));
        let e = source.filter(ElemExpr::param(0).cmp(CmpOp::Ge, 2));
        assert_eq!(e.eval(&env).unwrap(), Set::from_members(4, [2, 3]));
    }

    #[test]
    fn arithmetic_with_tables_and_params() {
        let (model, q, _, l) = fixture();
        let state = model.target().clone();
        let env = Env::new(&state, model.tables()).bind(2);
        let e = NumExpr::from(q) + NumExpr::table(l, [ElemExpr::param(0)]);
        assert_eq!(e.eval(&env).unwrap(), 7.0);
    }

    #[test]
    fn set_difference_with_element() {
        let (model, _, r, _) = fixture();
        let state = model.target().clone();
        let env = Env::new(&state, model.tables());
        let e = SetExpr::from(r).remove(5);
        assert_eq!(e.eval(&env).unwrap(), Set::from_members(8, [1, 2]));
    }

    #[test]
    fn evaluation_errors() {
        let (model, q, _, l) = fixture();
        let state = model.target().clone();
        let env = Env::new(&state, model.tables());
        let div = NumExpr::from(q) / 0.0;
        assert_eq!(div.eval(&env), Err(EvalError::DivisionByZero));
        let oob = NumExpr::table(l, [9usize]);
        assert!(matches!(oob.eval(&env), Err(EvalError::IndexOutOfRange { .. })));
        let unbound = ElemExpr::param(0).num();
        assert_eq!(unbound.eval(&env), Err(EvalError::UnboundParameter(0)));
    }

    #[test]
    fn evaluate_is_deterministic() {
        let (model, q, r, l) = fixture();
        let e = Expression::Numeric(NumExpr::sum_over(
            SetExpr::from(r),
            NumExpr::from(q) * NumExpr::table(l, [ElemExpr::param(0)].map(|x| x.min_elem())),
        ));
        let a = e.evaluate(model.target(), model.tables());
        let b = e.evaluate(model.target(), model.tables());
        assert_eq!(a, b);
    }

    trait MinElem {
        fn min_elem(self) -> ElemExpr;
    }

    impl MinElem for ElemExpr {
        fn min_elem(self) -> ElemExpr {
            ElemExpr::If(
                Box::new(self.clone().cmp(CmpOp::Lt, 4)),
                Box::new(self),
                Box::new(ElemExpr::Const(0)),
            )
        }
    }

    #[test]
    fn knapsack_expression_matches_hand_value() {
        let (model, _, _, _) = fixture();
        let spec = KnapsackSpec {
            items: SetExpr::Const(Set::from_members(2, [0, 1])),
            capacity: NumExpr::Const(5.0),
            profits: vec![6.0.into(), 4.0.into()],
            weights: vec![3.0.into(), 4.0.into()],
        };
        let env = Env::new(model.target(), model.tables());
        assert_eq!(NumExpr::knapsack(spec).eval(&env).unwrap(), 8.0);
    }

    #[test]
    fn knapsack_length_mismatch_is_rejected_at_check() {
        let (model, _, r, _) = fixture();
        let spec = KnapsackSpec {
            items: SetExpr::from(r),
            capacity: NumExpr::Const(5.0),
            profits: vec![1.0.into()],
            weights: vec![1.0.into()],
        };
        let sig = model.signature();
        assert!(matches!(
            NumExpr::knapsack(spec).check(&sig, 0),
            Err(CheckError::LengthMismatch { .. })
        ));
    }
}

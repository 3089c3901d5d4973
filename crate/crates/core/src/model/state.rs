use std::hash::{Hash, Hasher};

use crate::expr::{ElemVar, EvalError, NumVar, Set, SetVar};

/// One full assignment to the state variables of a model, grouped by kind in
/// declaration order.
#[derive(Debug, Clone, Default)]
pub struct State {
    pub elements: Vec<usize>,
    pub numerics: Vec<f64>,
    pub sets: Vec<Set>,
}

impl State {
    pub fn element(&self, v: ElemVar) -> Result<usize, EvalError> {
        self.elements
            .get(v.0)
            .copied()
            .ok_or_else(|| EvalError::KindMismatch(format!("no element variable {}", v.0)))
    }

    pub fn numeric(&self, v: NumVar) -> Result<f64, EvalError> {
        self.numerics
            .get(v.0)
            .copied()
            .ok_or_else(|| EvalError::KindMismatch(format!("no numeric variable {}", v.0)))
    }

    pub fn set(&self, v: SetVar) -> Result<&Set, EvalError> {
        self.sets
            .get(v.0)
            .ok_or_else(|| EvalError::KindMismatch(format!("no set variable {}", v.0)))
    }
}

// Numerics compare by bit pattern; -0.0 is normalized to 0.0 whenever a state
// is produced, so bitwise and numeric equality coincide (NaN never appears in
// valid models).
impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
            && self.sets == other.sets
            && self.numerics.len() == other.numerics.len()
            && self
                .numerics
                .iter()
                .zip(&other.numerics)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.elements.hash(h);
        for x in &self.numerics {
            x.to_bits().hash(h);
        }
        self.sets.hash(h);
    }
}

/// The non-resource part of a state: states with equal keys are comparable by
/// dominance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    elements: Vec<usize>,
    numerics: Vec<u64>,
    sets: Vec<Set>,
}

impl StateKey {
    pub(crate) fn new(elements: Vec<usize>, numerics: Vec<u64>, sets: Vec<Set>) -> Self {
        StateKey {
            elements,
            numerics,
            sets,
        }
    }
}

pub(crate) fn normalize(x: f64) -> f64 {
    x + 0.0
}

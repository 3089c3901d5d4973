use rustc_hash::FxHashMap;

use crate::model::{Model, State, StateKey};

use super::Node;

/// Generated states grouped by their non-resource values. Within a group no
/// stored state is dominated by another stored state with a better or equal
/// g-value.
///
/// With dominance disabled the grouping key covers every variable, so only
/// exact duplicates are detected.
pub struct DominanceFrontier {
    groups: FxHashMap<StateKey, Vec<usize>>,
    dominance: bool,
}

// Keys are equal within a group, so without dominance the states are
// identical.
fn preferred(dominance: bool, model: &Model, a: &State, b: &State) -> bool {
    !dominance || model.dominates(a, b)
}

/// Outcome of offering a state to the frontier.
pub(super) enum Admission {
    /// A stored state is preferred and no more expensive.
    Dominated,
    /// The state may be inserted under `key`; `evicted` counts stored nodes it
    /// dominates at no greater cost (already removed and marked dead).
    Admitted { key: StateKey, evicted: usize },
}

impl DominanceFrontier {
    pub fn new(dominance: bool) -> Self {
        DominanceFrontier {
            groups: FxHashMap::default(),
            dominance,
        }
    }

    fn key(&self, model: &Model, state: &State) -> StateKey {
        if self.dominance {
            model.key(state)
        } else {
            model.full_key(state)
        }
    }


    /// Checks `state` reached with cost `g` against the stored states and
    /// evicts the stored states it dominates.
    pub(super) fn admit(
        &mut self,
        model: &Model,
        nodes: &mut [Node],
        state: &State,
        g: f64,
    ) -> Admission {
        let key = self.key(model, state);
        let mut evicted = 0;
        if let Some(group) = self.groups.get_mut(&key) {
            for &id in group.iter() {
                let n = &nodes[id];
                if n.g <= g && preferred(self.dominance, model, &n.state, state) {
                    return Admission::Dominated;
                }
            }
            let dominance = self.dominance;
            group.retain(|&id| {
                let n = &mut nodes[id];
                let dominated = g <= n.g && preferred(dominance, model, state, &n.state);
                if dominated {
                    n.alive = false;
                    evicted += 1;
                }
                !dominated
            });
        }
        Admission::Admitted { key, evicted }
    }

    pub(super) fn insert(&mut self, key: StateKey, id: usize) {
        self.groups.entry(key).or_default().push(id);
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.values().all(Vec::is_empty)
    }

    /// Checks the frontier invariant.
    #[cfg(test)]
    pub(super) fn invariant_holds(&self, model: &Model, nodes: &[Node]) -> bool {
        self.groups.values().all(|group| {
            group.iter().all(|&a| {
                group.iter().all(|&b| {
                    a == b
                        || !(nodes[a].g <= nodes[b].g
                            && preferred(self.dominance, model, &nodes[a].state, &nodes[b].state))
                })
            })
        })
    }
}

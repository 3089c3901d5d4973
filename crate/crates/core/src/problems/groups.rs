use crate::bnp::{most_fractional, BranchingDecision, INT_EPS};
use crate::colgen::Column;

/// Partition of items (or vertices) into groups of elements that must share
/// a column, with the conflicts between groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Groups {
    /// Members of each group, ascending; groups ordered by smallest member.
    pub members: Vec<Vec<usize>>,
    pub group_of: Vec<usize>,
    /// Groups in conflict with each group, ascending; never the group itself.
    pub conflicts: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Groups {
    /// Groups for `n` elements under the pair and conflict decisions, on top
    /// of the fixed `conflicts`. `None` when a conflict joins two elements of
    /// the same group.
    pub fn new(n: usize, conflicts: &[(usize, usize)], decisions: &[BranchingDecision]) -> Option<Groups> {
        let mut parent: Vec<usize> = (0..n).collect();
        for d in decisions {
            if let BranchingDecision::RyanFosterPair { a, b } = *d {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut group_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = find(&mut parent, x);
            if group_of[r] == usize::MAX {
                group_of[r] = members.len();
                members.push(Vec::new());
            }
            group_of[x] = group_of[r];
            members[group_of[x]].push(x);
        }
        let mut sets = vec![Vec::new(); members.len()];
        let extra = decisions.iter().filter_map(|d| match *d {
            BranchingDecision::RyanFosterConflict { a, b } => Some((a, b)),
            _ => None,
        });
        for (a, b) in conflicts.iter().copied().chain(extra) {
            let (ga, gb) = (group_of[a], group_of[b]);
            if ga == gb {
                return None;
            }
            sets[ga].push(gb);
            sets[gb].push(ga);
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        Some(Groups {
            members,
            group_of,
            conflicts: sets,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sums a per-element value over each group.
    pub fn aggregate(&self, values: &[f64]) -> Vec<f64> {
        self.members
            .iter()
            .map(|m| m.iter().map(|&x| values[x]).sum())
            .collect()
    }
}

/// Whether a column containing exactly the elements of `tag` (ascending)
/// honors the Ryan-Foster decisions.
pub(crate) fn ryan_foster_compatible(tag: &[usize], decisions: &[BranchingDecision]) -> bool {
    let has = |x: usize| tag.binary_search(&x).is_ok();
    decisions.iter().all(|d| match *d {
        BranchingDecision::RyanFosterPair { a, b } => has(a) == has(b),
        BranchingDecision::RyanFosterConflict { a, b } => !(has(a) && has(b)),
        _ => true,
    })
}

/// The element pair whose co-occurrence in the LP solution is most
/// fractional.
pub(crate) fn ryan_foster_pair(n: usize, columns: &[Column], primal: &[f64]) -> Option<(usize, usize)> {
    let mut together = vec![0.0; n * n];
    for (c, &x) in columns.iter().zip(primal) {
        if c.artificial || x <= INT_EPS {
            continue;
        }
        for (i, &a) in c.tag.iter().enumerate() {
            for &b in &c.tag[i + 1..] {
                together[a.min(b) * n + a.max(b)] += x;
            }
        }
    }
    let candidates = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    most_fractional(candidates.map(|(a, b)| ((a, b), together[a * n + b]))).map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BranchingDecision::*;

    #[test]
    fn pairs_merge_and_conflicts_lift() {
        let g = Groups::new(4, &[(2, 3)], &[RyanFosterPair { a: 1, b: 2 }]).unwrap();
        assert_eq!(g.members, vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(g.conflicts, vec![vec![], vec![2], vec![1]]);
        assert_eq!(g.aggregate(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 5.0, 4.0]);
    }

    #[test]
    fn pair_then_conflict_is_infeasible() {
        let d = [RyanFosterPair { a: 0, b: 1 }, RyanFosterConflict { a: 1, b: 0 }];
        assert!(Groups::new(3, &[], &d).is_none());
    }

    #[test]
    fn compatibility() {
        let d = [RyanFosterPair { a: 0, b: 1 }, RyanFosterConflict { a: 1, b: 2 }];
        assert!(ryan_foster_compatible(&[0, 1], &d));
        assert!(ryan_foster_compatible(&[2], &d));
        assert!(!ryan_foster_compatible(&[0], &d));
        assert!(!ryan_foster_compatible(&[0, 1, 2], &d));
    }

    #[test]
    fn co_occurrence_picks_the_half_pair() {
        let cols = [
            Column::new(1.0, vec![], vec![1, 2]),
            Column::new(1.0, vec![], vec![1]),
            Column::new(1.0, vec![], vec![0]),
        ];
        assert_eq!(ryan_foster_pair(3, &cols, &[0.5, 0.5, 1.0]), Some((1, 2)));
        assert_eq!(ryan_foster_pair(3, &cols, &[1.0, 0.0, 1.0]), None);
    }
}

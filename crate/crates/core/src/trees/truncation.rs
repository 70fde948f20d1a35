use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::TreeSpec;
use crate::error::{Error, Result};
use crate::words::Word;

/// Explicit finite window onto a tree: every node of length `<= depth`
/// reachable through the first `budget` successors of each node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub depth: usize,
    pub budget: usize,
    pub nodes: BTreeSet<Word>,
    pub split: BTreeSet<Word>,
    pub omega: BTreeSet<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub index: usize,
    pub nodes: BTreeSet<Word>,
}

pub fn truncate(t: &TreeSpec, depth: usize, budget: usize) -> Truncation {
    let budget = budget.max(1);
    let mut nodes = BTreeSet::new();
    let mut split = BTreeSet::new();
    let mut omega = BTreeSet::new();
    if !t.contains(&Word::empty()) {
        return Truncation {
            depth,
            budget,
            nodes,
            split,
            omega,
        };
    }
    let mut frontier = vec![Word::empty()];
    while let Some(node) = frontier.pop() {
        let succ = t.successors(&node, budget);
        if succ.values.len() >= 2 {
            split.insert(node.clone());
            if succ.infinite {
                omega.insert(node.clone());
            }
        }
        if node.len() < depth {
            for v in succ.values {
                frontier.push(node.child(v));
            }
        }
        nodes.insert(node);
    }
    Truncation {
        depth,
        budget,
        nodes,
        split,
        omega,
    }
}

impl Truncation {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, node: &Word) -> Vec<Word> {
        let lo = node.child(i64::MIN);
        self.nodes
            .range(lo..)
            .take_while(|w| node.is_prefix_of(w))
            .filter(|w| w.len() == node.len() + 1)
            .cloned()
            .collect()
    }

    /// Follows the unique path above `node` to the first split-marked node.
    fn next_split(&self, node: &Word, level: usize) -> Result<Word> {
        let mut cur = node.clone();
        loop {
            if self.split.contains(&cur) {
                return Ok(cur);
            }
            let kids = self.children(&cur);
            if cur.len() >= self.depth || kids.is_empty() {
                return Err(Error::PartialLevel {
                    level,
                    depth: self.depth,
                    branch: cur,
                });
            }
            cur = kids.into_iter().next().expect("nonempty");
        }
    }

    /// `level(T, n)`: `level(T, 0) = {stem}`, then the next splitting node
    /// above each child of each node of the previous level.
    pub fn level(&self, n: usize) -> Result<Level> {
        let mut cur: BTreeSet<Word> = [self.next_split(&Word::empty(), 0)?].into_iter().collect();
        for i in 1..=n {
            let mut next = BTreeSet::new();
            for s in &cur {
                let kids = self.children(s);
                if kids.is_empty() {
                    return Err(Error::PartialLevel {
                        level: i,
                        depth: self.depth,
                        branch: s.clone(),
                    });
                }
                for c in kids {
                    next.insert(self.next_split(&c, i)?);
                }
            }
            cur = next;
        }
        Ok(Level {
            index: n,
            nodes: cur,
        })
    }

    /// Nodes of maximal length `depth`.
    pub fn body_at_depth(&self) -> BTreeSet<Word> {
        self.nodes
            .iter()
            .filter(|w| w.len() == self.depth)
            .cloned()
            .collect()
    }

    pub fn is_subset_of(&self, other: &Truncation) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    fn below(marks: &BTreeSet<Word>) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        for m in marks {
            for l in 0..=m.len() {
                out.insert(m.restrict(l));
            }
        }
        out
    }

    /// Every node shorter than `depth - slack` has a split-marked extension.
    pub fn is_perfect(&self, slack: usize) -> bool {
        let b = Self::below(&self.split);
        self.nodes
            .iter()
            .filter(|w| w.len() + slack <= self.depth)
            .all(|w| b.contains(w))
    }

    /// Every node shorter than `depth - slack` has an ω-marked extension.
    pub fn is_miller(&self, slack: usize) -> bool {
        let b = Self::below(&self.omega);
        self.nodes
            .iter()
            .filter(|w| w.len() + slack <= self.depth)
            .all(|w| b.contains(w))
    }

    /// Nodes are prefixes of `stem` or ω-marked extensions of it.
    pub fn is_laver(&self, stem: &Word) -> bool {
        self.nodes.iter().all(|w| {
            if stem.is_prefix_of(w) {
                self.omega.contains(w)
            } else {
                w.is_prefix_of(stem)
            }
        })
    }

    /// Each length is fully split or fully non-split.
    pub fn is_uniform(&self) -> bool {
        (0..=self.depth).all(|l| {
            let mut at = self
                .nodes
                .iter()
                .filter(|w| w.len() == l)
                .map(|w| self.split.contains(w));
            match at.next() {
                None => true,
                Some(first) => at.all(|s| s == first),
            }
        })
    }
}

/// `P ⪯_n Q` within a common window.
pub fn leq_n(p: &Truncation, q: &Truncation, n: usize) -> Result<bool> {
    if p.depth != q.depth || p.budget != q.budget {
        return Err(Error::IncomparableWindows(format!(
            "depth/budget ({}, {}) vs ({}, {})",
            p.depth, p.budget, q.depth, q.budget
        )));
    }
    Ok(p.is_subset_of(q) && p.level(n)?.nodes == q.level(n)?.nodes)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::seq::{Center, FreeSet};
    use crate::trees::{
        make_full, make_laver, make_perfect_from_map, make_silver, make_subtree, make_uniform,
        SilverSpec, SuccRule,
    };

    #[test]
    fn full_counts() {
        let tr = truncate(&make_full(), 2, 3);
        assert_eq!(tr.len(), 13);
        assert_eq!(
            truncate(&make_full(), 0, 3).nodes,
            [Word::empty()].into_iter().collect()
        );
        let body: Vec<Word> = truncate(&make_full(), 1, 3)
            .body_at_depth()
            .into_iter()
            .collect();
        assert_eq!(body.len(), 3);
        assert!(body.contains(&Word::from([-1])));
    }

    #[test]
    fn silver_shape() {
        let t = make_silver(SilverSpec::new(FreeSet::evens(), Center::zero()).unwrap());
        let tr = truncate(&t, 2, 3);
        assert_eq!(tr.children(&Word::empty()).len(), 3);
        for c in tr.children(&Word::empty()) {
            assert_eq!(tr.children(&c).len(), 1);
        }
    }

    #[test]
    fn laver_and_uniform_bodies() {
        let l = make_laver(Word::from([2]), SuccRule::All);
        assert_eq!(
            truncate(&l, 1, 3).body_at_depth(),
            [Word::from([2])].into_iter().collect()
        );
        assert!(truncate(&l, 3, 3).is_laver(&Word::from([2])));
        let u = make_uniform(FreeSet::all(), Some(2), Center::zero()).unwrap();
        let tr = truncate(&u, 3, 4);
        assert_eq!(tr.body_at_depth().len(), 8);
        assert!(tr.is_uniform() && tr.is_perfect(0));
    }

    #[test]
    fn levels() {
        let full = truncate(&make_full(), 3, 2);
        assert_eq!(
            full.level(0).unwrap().nodes,
            [Word::empty()].into_iter().collect()
        );
        let interleave = Arc::new(|rho: &Word| {
            let mut out = Word::empty();
            for &b in rho.entries() {
                out.push(b);
                out.push(0);
            }
            out
        });
        let t = make_perfect_from_map(interleave, "interleave", 5).unwrap();
        let tr = truncate(&t, 6, 2);
        let l1: Vec<Word> = tr.level(1).unwrap().nodes.into_iter().collect();
        assert_eq!(l1, vec![Word::from([0, 0]), Word::from([1, 0])]);
        assert!(matches!(
            tr.level(4),
            Err(Error::PartialLevel { level: 4, .. })
        ));
    }

    #[test]
    fn leq_n_cases() {
        let full = make_full();
        let q = truncate(&full, 3, 2);
        for k in 0..3 {
            assert!(leq_n(&q, &q, k).unwrap());
        }
        // keep only (1,0) above (1): level 1 becomes {(0), (1,0)}
        let sub = make_subtree(&full, &[], &[Word::from([0]), Word::from([1, 0])], "pruned");
        let p = truncate(&sub, 3, 2);
        assert!(leq_n(&p, &q, 0).unwrap());
        assert!(!leq_n(&p, &q, 1).unwrap());
        assert!(leq_n(&p, &truncate(&full, 3, 3), 0).is_err());
    }

    #[test]
    fn budget_monotone() {
        let t = make_silver(
            SilverSpec::new(FreeSet::evens(), Center::periodic(vec![], vec![1, -2])).unwrap(),
        );
        for b in 1..4 {
            assert!(truncate(&t, 4, b).is_subset_of(&truncate(&t, 4, b + 1)));
        }
    }
}

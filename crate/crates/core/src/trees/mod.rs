//! Lazy trees over ℤ^{<ω}.
//!
//! A tree is described intensionally by a membership test and a budgeted
//! successor stream. Finite windows onto a tree are [`Truncation`]s.

mod kinds;
mod truncation;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{word_add, Word};

pub use kinds::{
    make_full, make_laver, make_perfect_from_map, make_silver, make_subtree, make_uniform,
    FullTree, LaverTree, PerfectFromMap, SilverSpec, SilverTree, SubtreeOf, SuccRule, UniformTree,
};
pub use truncation::{leq_n, truncate, Level, Truncation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    Full,
    PerfectFromMap,
    UniformlyPerfect,
    Miller,
    Laver,
    OmegaSilver,
    AlphaImage,
    SubtreeOf,
}

/// The first `budget` successors of a node, and whether the stream is infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Successors {
    pub values: Vec<i64>,
    pub infinite: bool,
}

impl Successors {
    pub fn finite(values: Vec<i64>, budget: usize) -> Self {
        let mut values = values;
        values.truncate(budget);
        Successors {
            values,
            infinite: false,
        }
    }

    pub fn none() -> Self {
        Successors {
            values: vec![],
            infinite: false,
        }
    }
}

/// Behaviour shared by every tree kind.
///
/// `successors(node, b)` must be a prefix of `successors(node, b')` whenever
/// `b <= b'`, and an infinite stream must yield exactly `b` values.
pub trait LazyTree: Send + Sync + fmt::Debug {
    fn kind(&self) -> TreeKind;

    fn contains(&self, node: &Word) -> bool;

    /// Successors of a member node; empty for non-members.
    fn successors(&self, node: &Word, budget: usize) -> Successors;

    /// Position of `value` in the successor stream of `node`.
    fn position(&self, node: &Word, value: i64) -> Option<usize> {
        let mut budget = 16;
        loop {
            let s = self.successors(node, budget);
            if let Some(p) = s.values.iter().position(|&v| v == value) {
                return Some(p);
            }
            if !s.infinite || budget >= 1 << 16 {
                return None;
            }
            budget *= 4;
        }
    }

    fn descriptor(&self) -> serde_json::Value;
}

/// A shareable handle to a lazy tree.
#[derive(Clone)]
pub struct TreeSpec(Arc<dyn LazyTree>);

impl fmt::Debug for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TreeSpec {
    pub fn new<T: LazyTree + 'static>(tree: T) -> Self {
        TreeSpec(Arc::new(tree))
    }

    pub fn kind(&self) -> TreeKind {
        self.0.kind()
    }

    pub fn contains(&self, node: &Word) -> bool {
        self.0.contains(node)
    }

    pub fn successors(&self, node: &Word, budget: usize) -> Successors {
        self.0.successors(node, budget)
    }

    pub fn position(&self, node: &Word, value: i64) -> Option<usize> {
        self.0.position(node, value)
    }

    pub fn descriptor(&self) -> serde_json::Value {
        self.0.descriptor()
    }

    pub fn is_split(&self, node: &Word) -> bool {
        self.successors(node, 2).values.len() >= 2
    }

    pub fn is_omega_split(&self, node: &Word) -> bool {
        let s = self.successors(node, 2);
        s.infinite && s.values.len() >= 2
    }

    /// The zigzag-least successor (first in stream order).
    pub fn leftmost_child(&self, node: &Word) -> Option<Word> {
        self.successors(node, 1)
            .values
            .first()
            .map(|&c| node.child(c))
    }

    /// Extends `node` along first successors until its length reaches `len`.
    pub fn leftmost_extension(&self, node: &Word, len: usize) -> Result<Word> {
        let mut cur = node.clone();
        while cur.len() < len {
            cur = self
                .leftmost_child(&cur)
                .ok_or_else(|| Error::Construction(format!("dead end at {}", cur)))?;
        }
        Ok(cur)
    }

    /// The shortest splitting node extending `node`, following first successors.
    pub fn shortest_split_extension(&self, node: &Word, max_len: usize) -> Result<Word> {
        self.shortest_extension_where(node, max_len, |t, w| t.is_split(w))
            .ok_or_else(|| Error::NotPerfect(node.clone()))
    }

    /// The shortest ω-splitting node extending `node`, following first successors.
    pub fn shortest_omega_extension(&self, node: &Word, max_len: usize) -> Result<Word> {
        self.shortest_extension_where(node, max_len, |t, w| t.is_omega_split(w))
            .ok_or_else(|| Error::NotMiller(node.clone()))
    }

    fn shortest_extension_where(
        &self,
        node: &Word,
        max_len: usize,
        pred: impl Fn(&TreeSpec, &Word) -> bool,
    ) -> Option<Word> {
        let mut cur = node.clone();
        loop {
            if pred(self, &cur) {
                return Some(cur);
            }
            if cur.len() >= max_len {
                return None;
            }
            cur = self.leftmost_child(&cur)?;
        }
    }

    /// Longest node below which the tree does not split, searched to `depth`.
    pub fn stem(&self, depth: usize) -> Result<Word> {
        let mut cur = Word::empty();
        loop {
            if self.is_split(&cur) {
                return Ok(cur);
            }
            if cur.len() >= depth {
                return Err(Error::StemExceedsDepth { depth });
            }
            cur = self
                .leftmost_child(&cur)
                .ok_or(Error::StemExceedsDepth { depth })?;
        }
    }

    /// The shortest ω-splitting node on the leftmost path from the root.
    pub fn omega_stem(&self, depth: usize) -> Result<Word> {
        self.shortest_omega_extension(&Word::empty(), depth)
    }

    /// `level(T, n)` explored with the given successor budget.
    pub fn level(&self, n: usize, depth: usize, budget: usize) -> Result<Level> {
        truncate(self, depth, budget).level(n)
    }
}

/// Exact sumset `{a + b}`; all words must share one length.
pub fn sumset(a: &BTreeSet<Word>, b: &BTreeSet<Word>) -> Result<BTreeSet<Word>> {
    let len = a.iter().chain(b.iter()).map(Word::len).next();
    if let Some(len) = len {
        if let Some(bad) = a.iter().chain(b.iter()).find(|w| w.len() != len) {
            return Err(Error::LengthMismatch {
                left: len,
                right: bad.len(),
            });
        }
    }
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(word_add(x, y)?);
        }
    }
    Ok(out)
}

/// `A + A + ... + A` (`n` copies); `n = 0` gives the zero word of length `len`.
pub fn n_fold_sumset(a: &BTreeSet<Word>, n: usize, len: usize) -> Result<BTreeSet<Word>> {
    let mut acc: BTreeSet<Word> = [Word::zeros(len)].into_iter().collect();
    for _ in 0..n {
        acc = sumset(&acc, a)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ws: &[&[i64]]) -> BTreeSet<Word> {
        ws.iter().map(|w| Word::from(*w)).collect()
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(
            sumset(&set(&[&[0], &[1]]), &set(&[&[2]])).unwrap(),
            set(&[&[2], &[3]])
        );
        let a = set(&[&[1, 2], &[-1, 0]]);
        assert_eq!(sumset(&a, &set(&[&[0, 0]])).unwrap(), a);
        assert!(sumset(&set(&[&[1]]), &set(&[&[1, 2]])).is_err());
        assert!(sumset(&BTreeSet::new(), &a).unwrap().is_empty());
    }

    #[test]
    fn n_fold_counts() {
        let a = set(&[&[0], &[1]]);
        assert_eq!(n_fold_sumset(&a, 0, 1).unwrap(), set(&[&[0]]));
        assert_eq!(
            n_fold_sumset(&a, 3, 1).unwrap(),
            set(&[&[0], &[1], &[2], &[3]])
        );
    }

    #[test]
    fn stems() {
        assert_eq!(make_full().stem(5).unwrap(), Word::empty());
        let laver = make_laver(Word::from([3, 1]), SuccRule::All);
        assert_eq!(laver.stem(5).unwrap(), Word::from([3, 1]));
        assert!(laver.stem(1).is_err());
        let silver = make_silver(
            SilverSpec::new(crate::seq::FreeSet::evens(), crate::seq::Center::zero()).unwrap(),
        );
        assert_eq!(silver.stem(5).unwrap(), Word::empty());
    }
}

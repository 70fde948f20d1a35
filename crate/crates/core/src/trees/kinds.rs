use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LazyTree, Successors, TreeKind, TreeSpec};
use crate::error::{Error, Result};
use crate::seq::{Center, FreeSet};
use crate::words::{zigzag_cmp, zigzag_rank, zigzag_value, Word};

fn zigzag_stream(budget: usize) -> Vec<i64> {
    (0..budget as u128)
        .map(|r| zigzag_value(r).expect("small rank"))
        .collect()
}

/// The full tree ℤ^{<ω}.
#[derive(Debug, Clone, Copy)]
pub struct FullTree;

impl LazyTree for FullTree {
    fn kind(&self) -> TreeKind {
        TreeKind::Full
    }

    fn contains(&self, _node: &Word) -> bool {
        true
    }

    fn successors(&self, _node: &Word, budget: usize) -> Successors {
        Successors {
            values: zigzag_stream(budget),
            infinite: true,
        }
    }

    fn position(&self, _node: &Word, value: i64) -> Option<usize> {
        usize::try_from(zigzag_rank(value)).ok()
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({"kind": "full"})
    }
}

pub fn make_full() -> TreeSpec {
    TreeSpec::new(FullTree)
}

/// Free coordinates and center of an ω-Silver tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilverSpec {
    pub free_set: FreeSet,
    pub center: Center,
}

impl SilverSpec {
    pub fn new(free_set: FreeSet, center: Center) -> Result<Self> {
        free_set.validate()?;
        center.validate()?;
        Ok(SilverSpec { free_set, center })
    }

    pub fn is_member(&self, node: &Word) -> bool {
        node.entries()
            .iter()
            .enumerate()
            .all(|(n, &v)| self.free_set.contains(n as u64) || v == self.center.value(n as u64))
    }
}

/// `{σ : σ(n) = x_T(n) for n ∉ A}`.
#[derive(Debug, Clone)]
pub struct SilverTree {
    pub spec: SilverSpec,
}

impl LazyTree for SilverTree {
    fn kind(&self) -> TreeKind {
        TreeKind::OmegaSilver
    }

    fn contains(&self, node: &Word) -> bool {
        self.spec.is_member(node)
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        let n = node.len() as u64;
        if self.spec.free_set.contains(n) {
            Successors {
                values: zigzag_stream(budget),
                infinite: true,
            }
        } else {
            Successors::finite(vec![self.spec.center.value(n)], budget)
        }
    }

    fn position(&self, node: &Word, value: i64) -> Option<usize> {
        if !self.contains(&node.child(value)) {
            return None;
        }
        if self.spec.free_set.contains(node.len() as u64) {
            usize::try_from(zigzag_rank(value)).ok()
        } else {
            Some(0)
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({"kind": "omega-silver", "spec": self.spec})
    }
}

pub fn make_silver(spec: SilverSpec) -> TreeSpec {
    TreeSpec::new(SilverTree { spec })
}

/// Allowed successors above the stem of a Laver tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum SuccRule {
    All,
    Nonnegative,
    Except { values: Vec<i64> },
}

impl SuccRule {
    pub fn allows(&self, v: i64) -> bool {
        match self {
            SuccRule::All => true,
            SuccRule::Nonnegative => v >= 0,
            SuccRule::Except { values } => !values.contains(&v),
        }
    }

    fn stream(&self, budget: usize) -> Vec<i64> {
        (0u128..)
            .map(|r| zigzag_value(r).expect("small rank"))
            .filter(|&v| self.allows(v))
            .take(budget)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LaverTree {
    pub stem: Word,
    pub rule: SuccRule,
}

impl LazyTree for LaverTree {
    fn kind(&self) -> TreeKind {
        TreeKind::Laver
    }

    fn contains(&self, node: &Word) -> bool {
        if node.len() <= self.stem.len() {
            node.is_prefix_of(&self.stem)
        } else {
            self.stem.is_prefix_of(node)
                && node.entries()[self.stem.len()..]
                    .iter()
                    .all(|&v| self.rule.allows(v))
        }
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        if node.len() < self.stem.len() {
            Successors::finite(vec![self.stem.entries()[node.len()]], budget)
        } else {
            Successors {
                values: self.rule.stream(budget),
                infinite: true,
            }
        }
    }

    fn position(&self, node: &Word, value: i64) -> Option<usize> {
        if !self.contains(&node.child(value)) {
            return None;
        }
        if node.len() < self.stem.len() {
            return Some(0);
        }
        let r = zigzag_rank(value);
        Some(
            (0..r)
                .filter(|&q| self.rule.allows(zigzag_value(q).expect("small rank")))
                .count(),
        )
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({"kind": "laver", "stem": self.stem, "succ": self.rule})
    }
}

pub fn make_laver(stem: Word, rule: SuccRule) -> TreeSpec {
    TreeSpec::new(LaverTree { stem, rule })
}

pub type BinaryMap = Arc<dyn Fn(&Word) -> Word + Send + Sync>;

/// Downward closure of `{m(ρ) : ρ ∈ 2^{<ω}}` for a monotone map with
/// incompatible children.
#[derive(Clone)]
pub struct PerfectFromMap {
    map: BinaryMap,
    label: String,
}

impl std::fmt::Debug for PerfectFromMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PerfectFromMap({})", self.label)
    }
}

impl PerfectFromMap {
    /// The deepest `m(ρ)` that is a prefix of `node`, if any.
    fn deepest_below(&self, node: &Word) -> Option<Word> {
        let mut rho = Word::empty();
        let mut cur = (self.map)(&rho);
        if !cur.is_prefix_of(node) {
            return None;
        }
        loop {
            let mut descended = false;
            for i in 0..2 {
                let c = (self.map)(&rho.child(i));
                if c.is_prefix_of(node) {
                    rho = rho.child(i);
                    cur = c;
                    descended = true;
                    break;
                }
            }
            if !descended {
                return Some(rho);
            }
            debug_assert!(cur.len() <= node.len());
        }
    }
}

impl LazyTree for PerfectFromMap {
    fn kind(&self) -> TreeKind {
        TreeKind::PerfectFromMap
    }

    fn contains(&self, node: &Word) -> bool {
        match self.deepest_below(node) {
            None => node.is_prefix_of(&(self.map)(&Word::empty())),
            Some(rho) => {
                (self.map)(&rho) == *node
                    || (0..2).any(|i| node.is_prefix_of(&(self.map)(&rho.child(i))))
            }
        }
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        let mut vals: Vec<i64> = match self.deepest_below(node) {
            None => vec![(self.map)(&Word::empty()).entries()[node.len()]],
            Some(rho) => (0..2)
                .map(|i| (self.map)(&rho.child(i)))
                .filter(|c| node.is_prefix_of(c) && c.len() > node.len())
                .map(|c| c.entries()[node.len()])
                .collect(),
        };
        vals.sort_by(|a, b| zigzag_cmp(*a, *b));
        vals.dedup();
        Successors::finite(vals, budget)
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({"kind": "perfect-from-map", "map": self.label})
    }
}

/// Builds a perfect tree from a map on binary words, validating monotonicity
/// and incompatibility of children for all `ρ` shorter than `validate_depth`.
pub fn make_perfect_from_map(
    map: BinaryMap,
    label: &str,
    validate_depth: usize,
) -> Result<TreeSpec> {
    let mut layer = vec![Word::empty()];
    for _ in 0..validate_depth {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for rho in &layer {
            let m = map(rho);
            let c0 = map(&rho.child(0));
            let c1 = map(&rho.child(1));
            if !m.is_prefix_of(&c0) || !m.is_prefix_of(&c1) {
                return Err(Error::InvalidMap(format!(
                    "m({}) = {} is not below its children",
                    rho, m
                )));
            }
            if c0.compatible(&c1) {
                return Err(Error::InvalidMap(format!(
                    "children of {} are compatible: {} and {}",
                    rho, c0, c1
                )));
            }
            next.push(rho.child(0));
            next.push(rho.child(1));
        }
        layer = next;
    }
    Ok(TreeSpec::new(PerfectFromMap {
        map,
        label: label.to_string(),
    }))
}

/// Splits at every node of the levels in `levels`, into `branching`
/// successors (`None` = ω); elsewhere follows `fill`.
#[derive(Debug, Clone)]
pub struct UniformTree {
    pub levels: FreeSet,
    pub branching: Option<u64>,
    pub fill: Center,
}

impl UniformTree {
    fn allowed(&self, n: u64, v: i64) -> bool {
        let f = self.fill.value(n);
        if self.levels.contains(n) {
            match (v.checked_sub(f), self.branching) {
                (Some(d), Some(b)) => zigzag_rank(d) < b as u128,
                (Some(_), None) => true,
                (None, _) => false,
            }
        } else {
            v == f
        }
    }
}

impl LazyTree for UniformTree {
    fn kind(&self) -> TreeKind {
        TreeKind::UniformlyPerfect
    }

    fn contains(&self, node: &Word) -> bool {
        node.entries()
            .iter()
            .enumerate()
            .all(|(n, &v)| self.allowed(n as u64, v))
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        let n = node.len() as u64;
        let f = self.fill.value(n);
        if !self.levels.contains(n) {
            return Successors::finite(vec![f], budget);
        }
        let take = match self.branching {
            Some(b) => budget.min(b as usize),
            None => budget,
        };
        let values = zigzag_stream(take).into_iter().map(|d| f + d).collect();
        Successors {
            values,
            infinite: self.branching.is_none(),
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({"kind": "uniformly-perfect", "levels": self.levels, "branching": self.branching, "fill": self.fill})
    }
}

pub fn make_uniform(levels: FreeSet, branching: Option<u64>, fill: Center) -> Result<TreeSpec> {
    levels.validate()?;
    fill.validate()?;
    if matches!(branching, Some(b) if b < 2) {
        return Err(Error::Invalid(
            "uniform branching must be at least 2".into(),
        ));
    }
    Ok(TreeSpec::new(UniformTree {
        levels,
        branching,
        fill,
    }))
}

/// A subtree of `parent`: the downward closure of finitely many tips, plus
/// the whole cone of `parent` above each frontier node.
#[derive(Debug, Clone)]
pub struct SubtreeOf {
    parent: TreeSpec,
    skeleton: BTreeSet<Word>,
    children: HashMap<Word, Vec<i64>>,
    frontier: Vec<Word>,
    label: String,
}

impl SubtreeOf {
    pub fn parent(&self) -> &TreeSpec {
        &self.parent
    }

    pub fn frontier(&self) -> &[Word] {
        &self.frontier
    }

    fn in_cone(&self, node: &Word) -> bool {
        self.frontier.iter().any(|f| f.is_prefix_of(node))
    }
}

impl LazyTree for SubtreeOf {
    fn kind(&self) -> TreeKind {
        TreeKind::SubtreeOf
    }

    fn contains(&self, node: &Word) -> bool {
        self.parent.contains(node) && (self.skeleton.contains(node) || self.in_cone(node))
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        if self.in_cone(node) {
            return self.parent.successors(node, budget);
        }
        Successors::finite(self.children.get(node).cloned().unwrap_or_default(), budget)
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({
            "kind": "subtree-of",
            "label": self.label,
            "parent": self.parent.descriptor(),
            "frontier": self.frontier,
        })
    }
}

/// Builds the subtree generated by `tips` (downward closure) with the full
/// cones of `parent` kept above `frontier`.
pub fn make_subtree(parent: &TreeSpec, tips: &[Word], frontier: &[Word], label: &str) -> TreeSpec {
    let mut skeleton = BTreeSet::new();
    for t in tips.iter().chain(frontier.iter()) {
        for l in 0..=t.len() {
            skeleton.insert(t.restrict(l));
        }
    }
    let mut children: HashMap<Word, Vec<i64>> = HashMap::new();
    for w in &skeleton {
        if let Some(last) = w.last() {
            children
                .entry(w.restrict(w.len() - 1))
                .or_default()
                .push(last);
        }
    }
    for v in children.values_mut() {
        v.sort_by(|a, b| zigzag_cmp(*a, *b));
        v.dedup();
    }
    TreeSpec::new(SubtreeOf {
        parent: parent.clone(),
        skeleton,
        children,
        frontier: frontier.to_vec(),
        label: label.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silver_membership() {
        let t = make_silver(SilverSpec::new(FreeSet::evens(), Center::zero()).unwrap());
        assert!(t.contains(&Word::from([7, 0, -3])));
        assert!(!t.contains(&Word::from([7, 1])));
        assert!(t.is_omega_split(&Word::empty()));
        assert_eq!(t.successors(&Word::from([4]), 5).values, vec![0]);
    }

    #[test]
    fn laver_membership() {
        let t = make_laver(Word::from([5]), SuccRule::All);
        assert!(t.contains(&Word::from([5, 9, -4, 0])));
        assert!(!t.contains(&Word::from([4])));
        assert!(t.contains(&Word::empty()));
        let nn = make_laver(Word::empty(), SuccRule::Nonnegative);
        assert_eq!(nn.successors(&Word::empty(), 4).values, vec![0, 1, 2, 3]);
        assert_eq!(nn.position(&Word::empty(), 3), Some(3));
        assert_eq!(nn.position(&Word::empty(), -3), None);
    }

    fn doubling_map() -> BinaryMap {
        // m(ρ) interleaves ρ with zero padding: (ρ0, 0, ρ1, 0, ...)
        Arc::new(|rho: &Word| {
            let mut out = Word::empty();
            for &b in rho.entries() {
                out.push(b);
                out.push(0);
            }
            out
        })
    }

    #[test]
    fn perfect_from_map_membership_and_successors() {
        let t = make_perfect_from_map(doubling_map(), "interleave", 6).unwrap();
        assert!(t.contains(&Word::from([1, 0, 0])));
        assert!(!t.contains(&Word::from([1, 1])));
        assert_eq!(t.successors(&Word::empty(), 3).values, vec![0, 1]);
        assert_eq!(t.successors(&Word::from([1]), 3).values, vec![0]);
        assert!(!t.successors(&Word::empty(), 3).infinite);
    }

    #[test]
    fn perfect_from_map_rejects_bad_maps() {
        let same: BinaryMap = Arc::new(|_rho: &Word| Word::empty());
        assert!(matches!(
            make_perfect_from_map(same, "const", 2),
            Err(Error::InvalidMap(_))
        ));
        let nonmono: BinaryMap = Arc::new(|rho: &Word| {
            if rho.is_empty() {
                Word::from([9])
            } else {
                rho.clone()
            }
        });
        assert!(make_perfect_from_map(nonmono, "bad", 2).is_err());
    }

    #[test]
    fn uniform_tree_counts() {
        let t = make_uniform(FreeSet::all(), Some(2), Center::zero()).unwrap();
        assert_eq!(t.successors(&Word::empty(), 5).values, vec![0, 1]);
        assert!(t.contains(&Word::from([1, 0, 1])));
        assert!(!t.contains(&Word::from([-1])));
    }

    #[test]
    fn subtree_keeps_cones() {
        let full = make_full();
        let sub = make_subtree(
            &full,
            &[Word::from([0, 0]), Word::from([1])],
            &[Word::from([1])],
            "t",
        );
        assert!(sub.contains(&Word::from([0, 0])));
        assert!(!sub.contains(&Word::from([0, 1])));
        assert!(sub.contains(&Word::from([1, 7, 7])));
        assert_eq!(sub.successors(&Word::empty(), 5).values, vec![0, 1]);
        assert!(sub.successors(&Word::from([1]), 3).infinite);
    }
}

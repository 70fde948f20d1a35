use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::ideals::{Rational, Slalom, TailRule};
use crate::ledger::Ledger;
use crate::trees::{LazyTree, Successors, TreeKind, TreeSpec};
use crate::words::Word;

/// The Miller subtree generated by `τ_σ` for strictly increasing `σ`.
///
/// `τ_∅` is the shortest ω-splitting node on the leftmost path. For
/// `k > max σ` the node `τ_{σ⌢k}` is the shortest ω-splitting extension of
/// `τ_σ⌢c`, padded to length `2k` first, where `c` is the successor of `τ_σ`
/// at position `k - max σ - 1`. Every successor of `τ_σ` therefore starts
/// exactly one `τ_{σ⌢k}`.
#[derive(Debug, Clone)]
pub struct MillerSubtree {
    parent: TreeSpec,
    root: Word,
    limit: usize,
}

enum Loc {
    At,
    Inside(Word),
}

impl MillerSubtree {
    pub fn new(parent: &TreeSpec, limit: usize) -> Result<Self> {
        let root = parent.shortest_omega_extension(&Word::empty(), limit)?;
        Ok(MillerSubtree {
            parent: parent.clone(),
            root,
            limit,
        })
    }

    pub fn parent(&self) -> &TreeSpec {
        &self.parent
    }

    fn step(&self, tau: &Word, max: i64, k: i64) -> Result<Word> {
        let pos = (k - max - 1) as usize;
        let succ = self.parent.successors(tau, pos + 1);
        let v = *succ
            .values
            .get(pos)
            .ok_or_else(|| Error::NotMiller(tau.clone()))?;
        let child = tau.child(v);
        let ext = self
            .parent
            .leftmost_extension(&child, child.len().max(2 * k as usize))?;
        self.parent.shortest_omega_extension(&ext, self.limit)
    }

    /// `τ_σ`; `σ` must be strictly increasing.
    pub fn tau(&self, sigma: &[u64]) -> Result<Word> {
        let mut tau = self.root.clone();
        let mut max = -1i64;
        for &k in sigma {
            let k = k as i64;
            if k <= max {
                return Err(Error::Invalid(
                    "index sequence must increase strictly".into(),
                ));
            }
            tau = self.step(&tau, max, k)?;
            max = k;
        }
        Ok(tau)
    }

    /// Recovers the index sequence whose path carries `node`.
    pub fn decode(&self, node: &Word) -> Option<Vec<u64>> {
        let mut tau = self.root.clone();
        let mut max = -1i64;
        let mut sigma = Vec::new();
        loop {
            if node.is_prefix_of(&tau) || !tau.is_prefix_of(node) {
                return node.compatible(&tau).then_some(sigma);
            }
            let v = node.get(tau.len())?;
            let p = self.parent.position(&tau, v)? as i64;
            let k = p + max + 1;
            tau = self.step(&tau, max, k).ok()?;
            max = k;
            sigma.push(k as u64);
        }
    }

    fn locate(&self, node: &Word) -> Option<Loc> {
        let mut tau = self.root.clone();
        let mut max = -1i64;
        loop {
            if *node == tau {
                return Some(Loc::At);
            }
            if node.is_prefix_of(&tau) {
                return Some(Loc::Inside(tau));
            }
            if !tau.is_prefix_of(node) {
                return None;
            }
            let v = node.get(tau.len())?;
            let p = self.parent.position(&tau, v)? as i64;
            let k = p + max + 1;
            tau = self.step(&tau, max, k).ok()?;
            max = k;
        }
    }
}

impl LazyTree for MillerSubtree {
    fn kind(&self) -> TreeKind {
        TreeKind::Miller
    }

    fn contains(&self, node: &Word) -> bool {
        self.locate(node).is_some()
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        match self.locate(node) {
            None => Successors::none(),
            Some(Loc::At) => self.parent.successors(node, budget),
            Some(Loc::Inside(tau)) => Successors::finite(vec![tau.entries()[node.len()]], budget),
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({ "kind": "miller", "rule": "null-subtree", "parent": self.parent.descriptor(), "root": self.root })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MillerNull {
    pub k_max: usize,
    pub taus: Vec<(Vec<u64>, Word)>,
    pub slalom: Slalom,
    pub ledger: Ledger,
    #[serde(skip_serializing)]
    pub subtree: TreeSpec,
}

/// Strictly increasing sequences over `0..=k_max`, shortest first.
pub fn increasing_sequences(k_max: usize) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = (0u64..1 << (k_max + 1))
        .map(|mask| (0..=k_max as u64).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Slalom with `S_{2k} = {τ_σ↾2k : max σ = k}` for `k <= depth/2`.
pub fn miller_null_subtree(t: &TreeSpec, depth: usize) -> Result<MillerNull> {
    miller_null_with(t, depth / 2, 4 * depth + 16)
}

pub fn miller_null_with(t: &TreeSpec, k_max: usize, limit: usize) -> Result<MillerNull> {
    let sub = MillerSubtree::new(t, limit).map_err(|_| Error::DepthExhausted {
        depth: limit,
        completed: 0,
    })?;
    let mut taus = Vec::new();
    for sigma in increasing_sequences(k_max) {
        let tau = sub.tau(&sigma).map_err(|_| Error::DepthExhausted {
            depth: limit,
            completed: sigma.len(),
        })?;
        taus.push((sigma, tau));
    }
    let mut levels = vec![BTreeSet::new(); 2 * k_max + 1];
    for (sigma, tau) in &taus {
        if let Some(&k) = sigma.last() {
            levels[2 * k as usize].insert(tau.restrict(2 * k as usize));
        }
    }
    // Σ_{2k > n} 2^k/2^{2k} <= 2^{-⌊n/2⌋} <= 2 · (1/2)^⌊(n+1)/2⌋
    let slalom = Slalom {
        levels,
        mass_bound: Rational::from_int(2),
        tail: TailRule::Geometric {
            coef: Rational::from_int(2),
            ratio: Rational::ratio(1, 2),
            step: 2,
        },
    };
    let mut ledger = Ledger::new();
    ledger.record_all(
        "level-bound",
        (0..=k_max).map(|k| {
            (
                slalom.level(2 * k).len() <= 1 << k,
                format!("|S_{}| = {}", 2 * k, slalom.level(2 * k).len()),
            )
        }),
    );
    ledger.record_all(
        "length",
        taus.iter().map(|(sigma, tau)| {
            let need = sigma.last().map_or(0, |&k| 2 * k as usize);
            (
                tau.len() >= need && t.is_omega_split(tau),
                format!("sigma {:?}", sigma),
            )
        }),
    );
    ledger.record_all(
        "hits",
        taus.iter().flat_map(|(sigma, tau)| {
            let slalom = &slalom;
            sigma.iter().map(move |&k| {
                (
                    slalom
                        .level(2 * k as usize)
                        .contains(&tau.restrict(2 * k as usize)),
                    format!("sigma {:?} at {}", sigma, k),
                )
            })
        }),
    );
    ledger.record(
        "mass",
        crate::ideals::slalom_mass(&slalom, 2 * k_max) <= slalom.mass_bound,
        "",
    );
    Ok(MillerNull {
        k_max,
        taus,
        slalom,
        ledger,
        subtree: TreeSpec::new(sub),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{make_full, make_laver, truncate, SuccRule};

    #[test]
    fn sequences() {
        let s = increasing_sequences(2);
        assert_eq!(s.len(), 8);
        assert_eq!(s[0], Vec::<u64>::new());
        assert_eq!(s[7], vec![0, 1, 2]);
    }

    #[test]
    fn full_tree_null_subtree() {
        let r = miller_null_subtree(&make_full(), 10).unwrap();
        assert!(r.ledger.all_pass(), "{:?}", r.ledger);
        for k in 0..=5 {
            assert!(r.slalom.level(2 * k).len() <= 1 << k);
            assert!(r.slalom.level(2 * k + 1).is_empty());
        }
        let tr = truncate(&r.subtree, 8, 2);
        assert!(tr.is_subset_of(&truncate(&make_full(), 8, 2)));
        // with two successors per node the next ω-split is at most 3 above
        assert!(tr.is_miller(4));
    }

    #[test]
    fn decode_round_trip() {
        let r = miller_null_with(&make_full(), 3, 40).unwrap();
        let sub = MillerSubtree::new(&make_full(), 40).unwrap();
        for (sigma, tau) in &r.taus {
            assert_eq!(sub.decode(tau).as_ref(), Some(sigma));
        }
        let (_, tau) = r.taus.iter().find(|(s, _)| *s == vec![0, 2, 3]).unwrap();
        for k in [0usize, 2, 3] {
            assert!(r.slalom.level(2 * k).contains(&tau.restrict(2 * k)));
        }
    }

    #[test]
    fn laver_input() {
        let r =
            miller_null_subtree(&make_laver(Word::from([1]), SuccRule::Nonnegative), 8).unwrap();
        assert!(r.ledger.all_pass(), "{:?}", r.ledger);
    }
}

use std::collections::HashMap;

use serde_json::json;

use super::WordCode;
use crate::error::{Error, Result};
use crate::trees::{LazyTree, Successors, TreeKind, TreeSpec};
use crate::words::{zigzag_rank, zigzag_value, Word};

/// Successors searched when the code has no inverse.
const SEARCH: u128 = 4096;

/// `rng(α̂)` with `α̂(∅) = ∅` and `α̂(σ⌢i) = α̂(σ)⌢α(σ⌢i)`.
#[derive(Debug, Clone)]
pub struct AlphaTree {
    alpha: WordCode,
}

impl AlphaTree {
    fn step(&self, sigma: &Word, v: i64) -> Option<i64> {
        match self.alpha.inverse(v) {
            Some(w) => (w.len() == sigma.len() + 1 && sigma.is_prefix_of(&w))
                .then(|| w.last().expect("nonempty")),
            None => (0..SEARCH)
                .map(|r| zigzag_value(r).expect("small rank"))
                .find(|&i| self.alpha.eval(&sigma.child(i)) == v),
        }
    }

    /// `α̂^{-1}(τ)` when `τ` is in the range.
    pub fn preimage(&self, tau: &Word) -> Option<Word> {
        let mut sigma = Word::empty();
        for &v in tau.entries() {
            let i = self.step(&sigma, v)?;
            sigma.push(i);
        }
        Some(sigma)
    }
}

impl LazyTree for AlphaTree {
    fn kind(&self) -> TreeKind {
        TreeKind::AlphaImage
    }

    fn contains(&self, node: &Word) -> bool {
        self.preimage(node).is_some()
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        let Some(sigma) = self.preimage(node) else {
            return Successors::none();
        };
        let values = (0..budget as u128)
            .map(|r| {
                self.alpha
                    .eval(&sigma.child(zigzag_value(r).expect("small rank")))
            })
            .collect();
        Successors {
            values,
            infinite: true,
        }
    }

    fn position(&self, node: &Word, value: i64) -> Option<usize> {
        let sigma = self.preimage(node)?;
        let i = self.step(&sigma, value)?;
        Some(zigzag_rank(i) as usize)
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({ "kind": "alpha-image", "alpha": self.alpha })
    }
}

/// Builds `rng(α̂)` after checking that `α` is injective on words of length
/// `<= depth` with entries among the first `budget` zigzag values.
pub fn make_alpha_tree(alpha: WordCode, depth: usize, budget: usize) -> Result<TreeSpec> {
    let mut seen: HashMap<i64, Word> = HashMap::new();
    let mut layer = vec![Word::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for r in 0..budget as u128 {
                let c = w.child(zigzag_value(r).expect("small rank"));
                let v = alpha.eval(&c);
                if let Some(prev) = seen.insert(v, c.clone()) {
                    return Err(Error::NotInjective(format!(
                        "α({}) = α({}) = {}",
                        prev, c, v
                    )));
                }
                next.push(c);
            }
        }
        layer = next;
    }
    Ok(TreeSpec::new(AlphaTree { alpha }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::truncate;

    #[test]
    fn range_tree() {
        let t = make_alpha_tree(WordCode::ZigzagIndex, 2, 4).unwrap();
        assert!(t.contains(&Word::empty()));
        let tr = truncate(&t, 2, 3);
        assert_eq!(tr.len(), 1 + 3 + 9);
        assert_eq!(tr.omega.len(), 1 + 3 + 9);
        let kids = t.successors(&Word::empty(), 5).values;
        let mut dedup = kids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 5);
        let a = WordCode::ZigzagIndex;
        let node = Word::from([a.eval(&Word::from([1])), a.eval(&Word::from([1, -1]))]);
        assert!(t.contains(&node));
        assert_eq!(t.position(&node, a.eval(&Word::from([1, -1, 2]))), Some(3));
    }

    #[test]
    fn folded_rejected() {
        assert!(matches!(
            make_alpha_tree(WordCode::Folded { modulus: 5 }, 2, 3),
            Err(Error::NotInjective(_))
        ));
    }
}

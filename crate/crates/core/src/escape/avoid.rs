use serde_json::json;

use super::{EscapeTrace, StepRecord, WordCode};
use crate::error::{Error, Result};
use crate::ledger::Ledger;
use crate::seq::{Center, Cuts};
use crate::trees::{LazyTree, Successors, TreeKind, TreeSpec};
use crate::words::{zigzag_value, Word};

/// `{σ : (∀n < |σ|)(σ(n) ≠ f(σ↾n))}`.
#[derive(Debug, Clone)]
pub struct AvoidTree {
    code: WordCode,
}

impl LazyTree for AvoidTree {
    fn kind(&self) -> TreeKind {
        TreeKind::Miller
    }

    fn contains(&self, node: &Word) -> bool {
        (0..node.len()).all(|n| node.entries()[n] != self.code.eval(&node.restrict(n)))
    }

    fn successors(&self, node: &Word, budget: usize) -> Successors {
        if !self.contains(node) {
            return Successors::none();
        }
        let banned = self.code.eval(node);
        let values = (0u128..)
            .map(|r| zigzag_value(r).expect("small rank"))
            .filter(|&v| v != banned)
            .take(budget)
            .collect();
        Successors {
            values,
            infinite: true,
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({ "kind": "avoid", "code": self.code })
    }
}

pub fn avoid_tree(code: WordCode) -> TreeSpec {
    TreeSpec::new(AvoidTree { code })
}

/// A branch of the avoid tree agreeing with `y` on `I_1, I_3, …, I_{2m-1}`.
///
/// Before the interval `I_{2i+1} = [a, b)` the branch is extended to length
/// `a` by a node outside the finite set of nodes `σ` for which copying
/// `y↾[a, b)` after `σ` would hit a forbidden value.
pub fn m_not_mminus_branch(
    code: &WordCode,
    y: &Center,
    cuts: &Cuts,
    m: usize,
) -> Result<EscapeTrace> {
    if m == 0 {
        return Err(Error::Invalid("at least one agreement is required".into()));
    }
    cuts.validate()?;
    let tree = avoid_tree(code.clone());
    let mut x = Word::empty();
    let mut log = Vec::new();
    for i in 0..m {
        let (a, b) = cuts.interval(2 * i as u64 + 1);
        let (a, b) = (a as usize, b as usize);
        let target = y.segment(a as u64, b as u64);
        let bad = |sigma: &Word| {
            (a..b).any(|j| {
                let w = sigma.concat(&target.restrict(j - a));
                code.eval(&w) == target.entries()[j - a]
            })
        };
        let mut forbidden = Vec::new();
        if code.inverse(0).is_some() {
            for j in a..b {
                let w = code.inverse(target.entries()[j - a]).expect("invertible");
                if w.len() == j && w.slice(a.min(j), j) == target.restrict(j - a) {
                    let sigma = w.restrict(a);
                    if x.is_prefix_of(&sigma)
                        && tree.contains(&sigma)
                        && !forbidden.contains(&sigma)
                    {
                        forbidden.push(sigma);
                    }
                }
            }
        }
        let stem = tree.leftmost_extension(&x, a - 1)?;
        let succ = tree.successors(&stem, b - a + 1);
        let chosen = succ
            .values
            .iter()
            .map(|&v| stem.child(v))
            .find(|s| !bad(s))
            .ok_or_else(|| {
                Error::Construction(format!("every candidate below {} is forbidden", a))
            })?;
        if code.inverse(0).is_none() {
            forbidden = succ
                .values
                .iter()
                .map(|&v| stem.child(v))
                .filter(|s| bad(s))
                .collect();
        }
        x = chosen.concat(&target);
        log.push(StepRecord {
            step: i,
            forbidden: vec![],
            forbidden_words: forbidden,
            chosen,
            pattern: target,
            anchor: None,
        });
    }
    let mut ledger = Ledger::new();
    ledger.record("branch-in-tree", tree.contains(&x), "");
    ledger.record_all(
        "forbidden-bound",
        log.iter().map(|r| {
            (
                r.forbidden_words.len() <= r.pattern.len() + 1,
                format!("step {}", r.step),
            )
        }),
    );
    let agreements = (0..m)
        .filter(|i| {
            let (a, b) = cuts.interval(2 * *i as u64 + 1);
            x.slice(a as usize, b as usize) == y.segment(a, b)
        })
        .count();
    ledger.record(
        "agreements",
        agreements >= m,
        format!("{} of {}", agreements, m),
    );
    let t = y.prefix(x.len());
    Ok(EscapeTrace {
        construction: "m-not-mminus".into(),
        x_prefix: x,
        t_prefix: t,
        s_prefix: None,
        step_log: log,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::truncate;

    #[test]
    fn one_forbidden_child() {
        let code = WordCode::ZigzagIndex;
        let t = avoid_tree(code.clone());
        assert!(t.contains(&Word::empty()));
        for node in truncate(&t, 3, 3).nodes {
            let f = code.eval(&node);
            assert!(!t.contains(&node.child(f)));
            assert!(!t.successors(&node, 6).values.contains(&f));
        }
    }

    #[test]
    fn branch_agrees_on_odd_intervals() {
        let y = Center::periodic(vec![], vec![0, 1, 2]);
        let cuts = Cuts::Widths {
            prefix: vec![],
            cycle: vec![2, 3],
        };
        let tr = m_not_mminus_branch(&WordCode::ZigzagIndex, &y, &cuts, 4).unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
        assert_eq!(tr.x_prefix.len() as u64, cuts.cut(8));
    }

    #[test]
    fn folded_code_still_finds_branch() {
        let y = Center::constant(0);
        let tr = m_not_mminus_branch(&WordCode::Folded { modulus: 3 }, &y, &Cuts::uniform(2), 3)
            .unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
    }
}

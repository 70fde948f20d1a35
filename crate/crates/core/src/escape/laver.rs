use super::{EscapeTrace, StepRecord};
use crate::error::{Error, Result};
use crate::ledger::Ledger;
use crate::trees::TreeSpec;
use crate::words::{word_add, word_sub, Word};

/// `y ∈ [T]` and `x = z - y` with `x(n) ≠ 0` past the stem: above the stem
/// `y(n)` is the first successor different from `z(n)`.
pub fn laver_sum_decompose(t: &TreeSpec, z: &Word, depth: usize) -> Result<EscapeTrace> {
    let stem = t.stem(depth)?;
    let len = z.len().min(depth);
    let mut y = stem.restrict(stem.len().min(len));
    let mut log = Vec::new();
    while y.len() < len {
        let n = y.len();
        let succ = t.successors(&y, 2);
        if succ.values.len() < 2 {
            return Err(Error::LaverHypothesis { node: y });
        }
        let zn = z.entries()[n];
        let v = succ
            .values
            .into_iter()
            .find(|&v| v != zn)
            .expect("two distinct successors");
        log.push(StepRecord {
            step: n,
            forbidden: vec![zn],
            forbidden_words: vec![],
            chosen: Word::from([v]),
            pattern: Word::from([zn]),
            anchor: None,
        });
        y.push(v);
    }
    let z = z.restrict(len);
    let x = word_sub(&z, &y)?;
    let mut ledger = Ledger::new();
    ledger.record("sum-exact", word_add(&x, &y)? == z, "");
    ledger.record("branch-in-tree", t.contains(&y), "");
    ledger.record_all(
        "nonzero-past-stem",
        (stem.len()..len).map(|n| (x.entries()[n] != 0, format!("position {}", n))),
    );
    Ok(EscapeTrace {
        construction: "laver-sum".into(),
        x_prefix: x,
        t_prefix: y,
        s_prefix: None,
        step_log: log,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{make_laver, make_uniform, SuccRule};

    #[test]
    fn zero_target() {
        let t = make_laver(Word::from([5]), SuccRule::All);
        let tr = laver_sum_decompose(&t, &Word::zeros(5), 5).unwrap();
        assert_eq!(tr.t_prefix, Word::from([5, 1, 1, 1, 1]));
        assert_eq!(tr.x_prefix, Word::from([-5, -1, -1, -1, -1]));
        assert!(tr.ledger.all_pass());
    }

    #[test]
    fn rejects_non_splitting_node() {
        let t = make_uniform(
            crate::seq::FreeSet::evens(),
            Some(2),
            crate::seq::Center::zero(),
        )
        .unwrap();
        assert!(matches!(
            laver_sum_decompose(&t, &Word::zeros(4), 4),
            Err(Error::LaverHypothesis { .. })
        ));
    }
}

use num_bigint::BigUint;

use super::{EscapeTrace, StepRecord};
use crate::error::{Error, Result};
use crate::ideals::{MeagerWitness, WitnessRule};
use crate::ledger::Ledger;
use crate::trees::SilverSpec;
use crate::words::{enum_index, word_add, zigzag_value, Word};

pub const GAP_LIMIT: u64 = 1 << 16;

pub fn silver_nwd_escape(a: &SilverSpec, h: &MeagerWitness, steps: usize) -> Result<EscapeTrace> {
    silver_nwd_escape_with(a, h, steps, GAP_LIMIT)
}

/// `x` in the nowhere dense set `{x : (∀k >= 1)(σ_k⌢0^k ⊄ x)}` and `t` in the
/// ω-Silver tree of `a` with `x + t` containing `σ⌢h(σ)` for infinitely many
/// `σ`.
///
/// Works with center zero and the witness translated by the center. At each
/// free coordinate `p` the branch takes a nonzero `l` whose prefix index
/// exceeds the next pattern length and the tree takes `1 - l`, so the sum
/// reads `1` there; the pattern follows, then `1`s up to the next free
/// coordinate.
pub fn silver_nwd_escape_with(
    a: &SilverSpec,
    h: &MeagerWitness,
    steps: usize,
    gap_limit: u64,
) -> Result<EscapeTrace> {
    let hh = MeagerWitness::from_rule(WitnessRule::Translated {
        base: Box::new(h.clone()),
        center: a.center.clone(),
    });
    let next_free = |from: u64| -> Result<usize> {
        let m = a.free_set.next_at_or_after(from);
        if m - from > gap_limit {
            return Err(Error::FreeSetGap {
                from,
                limit: gap_limit,
            });
        }
        Ok(m as usize)
    };
    let first = next_free(0)?;
    let mut rho = Word::repeat(1, first);
    let mut tau = Word::zeros(first);
    let mut log = Vec::new();
    let mut snapshots = Vec::new();
    for n in 0..=steps {
        let mut base = word_add(&rho, &tau)?;
        base.push(1);
        let hv = hh
            .eval(&base)
            .ok_or_else(|| Error::WindowTooSmall(format!("h({}) is too long", base)))?;
        let need = BigUint::from(hv.len());
        let l = (1u128..)
            .take(1 << 20)
            .filter_map(zigzag_value)
            .find(|&l| enum_index(&rho.child(l)) > need)
            .ok_or_else(|| Error::Construction(format!("no admissible value above {}", rho)))?;
        rho.push(l);
        tau.push(1 - l);
        snapshots.push((rho.clone(), tau.clone()));
        let end = rho.len() + hv.len();
        let target = next_free(end as u64)?;
        rho.extend(&hv);
        rho.extend(&Word::repeat(1, target - end));
        tau.extend(&Word::zeros(rho.len() - tau.len()));
        log.push(StepRecord {
            step: n,
            forbidden: vec![0],
            forbidden_words: vec![],
            chosen: Word::from([l]),
            pattern: hv,
            anchor: Some(base),
        });
    }
    let x = rho;
    let t = word_add(&tau, &a.center.prefix(tau.len()))?;
    let sum = word_add(&x, &t)?;
    let mut ledger = Ledger::new();
    ledger.record_all(
        "i",
        snapshots.windows(2).map(|w| {
            (
                w[0].0.is_prefix_of(&w[1].0) && w[0].0.len() < w[1].0.len(),
                String::new(),
            )
        }),
    );
    let zero_runs = (0..x.len()).filter_map(|j| {
        let k = enum_index(&x.restrict(j));
        let k = usize::try_from(k)
            .ok()
            .filter(|&k| k >= 1 && j + k <= x.len())?;
        Some((
            x.entries()[j..j + k].iter().any(|&v| v != 0),
            format!("prefix {} followed by {} zeros", x.restrict(j), k),
        ))
    });
    ledger.record_all("ii", zero_runs);
    ledger.record_all(
        "iii",
        (0..tau.len()).map(|k| {
            (
                a.free_set.contains(k as u64) || tau.entries()[k] == 0,
                format!("coordinate {}", k),
            )
        }),
    );
    ledger.record_all(
        "iv",
        log.iter().map(|r| {
            let anchor = r.anchor.as_ref().unwrap();
            let pat = anchor.concat(&r.pattern);
            let ok = word_add(
                &x.restrict(pat.len().min(x.len())),
                &tau.restrict(pat.len().min(tau.len())),
            )
            .is_ok_and(|s| s == pat);
            (ok, format!("step {}", r.step))
        }),
    );
    ledger.record_all(
        "pattern",
        log.iter().map(|r| {
            let anchor = r.anchor.as_ref().unwrap();
            let c = a.center.prefix(anchor.len());
            let ok = anchor
                .add(&c)
                .ok()
                .and_then(|s| h.pattern(&s))
                .is_some_and(|p| p.is_prefix_of(&sum));
            (ok, format!("step {}", r.step))
        }),
    );
    Ok(EscapeTrace {
        construction: "silver-nwd".into(),
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
    use crate::seq::{Center, FreeSet};

    #[test]
    fn evens_zero_center() {
        let a = SilverSpec::new(FreeSet::evens(), Center::zero()).unwrap();
        let tr = silver_nwd_escape(&a, &MeagerWitness::constant(Word::from([0, 0])), 6).unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
        assert!(crate::trees::make_silver(a.clone()).contains(&tr.t_prefix));
    }

    #[test]
    fn translated_center() {
        let a = SilverSpec::new(
            FreeSet::Progression { start: 1, step: 3 },
            Center::periodic(vec![], vec![2, -1]),
        )
        .unwrap();
        let h = MeagerWitness::from_rule(WitnessRule::ByLength {
            cycle: vec![Word::from([0]), Word::from([3, 0, 0])],
        });
        let tr = silver_nwd_escape(&a, &h, 6).unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
        assert!(crate::trees::make_silver(a.clone()).contains(&tr.t_prefix));
        let short = silver_nwd_escape(&a, &h, 3).unwrap();
        assert!(short.x_prefix.is_prefix_of(&tr.x_prefix));
    }

    #[test]
    fn gap_rejected() {
        let a = SilverSpec::new(
            FreeSet::Progression {
                start: 0,
                step: 100,
            },
            Center::zero(),
        )
        .unwrap();
        let err =
            silver_nwd_escape_with(&a, &MeagerWitness::constant(Word::empty()), 2, 10).unwrap_err();
        assert!(matches!(err, Error::FreeSetGap { .. }));
    }
}

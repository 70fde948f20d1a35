use std::collections::BTreeSet;

use super::{EscapeTrace, StepRecord};
use crate::error::{Error, Result};
use crate::ideals::{MeagerWitness, Slalom};
use crate::ledger::Ledger;
use crate::trees::TreeSpec;
use crate::words::{word_add, word_sub, Word};

pub const DEFAULT_BUDGET: usize = 64;
const SEARCH_LIMIT: usize = 512;
const VISIT_CAP: usize = 200_000;

fn least_other(v: i64) -> i64 {
    if v == 0 {
        1
    } else {
        0
    }
}

/// Shortest ω-splitting extension strictly longer than `node`.
fn omega_beyond(t: &TreeSpec, node: &Word, min_len: usize) -> Result<Word> {
    let mut cur = node.clone();
    loop {
        let w = t.shortest_omega_extension(&cur, SEARCH_LIMIT.max(min_len + SEARCH_LIMIT))?;
        if w.len() > min_len {
            return Ok(w);
        }
        cur = t.leftmost_extension(&w, min_len + 1)?;
    }
}

/// Extends `start` inside `t` to the length of `pattern`, differing from the
/// pattern at every new coordinate. Returns the node and the values rejected
/// directly above `start`.
fn extend_avoiding(
    t: &TreeSpec,
    start: &Word,
    pattern: &Word,
    budget: usize,
) -> Result<(Word, Vec<i64>)> {
    fn dfs(
        t: &TreeSpec,
        node: &Word,
        pattern: &Word,
        budget: usize,
        visits: &mut usize,
    ) -> Option<Word> {
        if node.len() >= pattern.len() {
            return Some(node.clone());
        }
        *visits += 1;
        if *visits > VISIT_CAP {
            return None;
        }
        let banned = pattern.entries()[node.len()];
        for v in t.successors(node, budget).values {
            if v == banned {
                continue;
            }
            if let Some(w) = dfs(t, &node.child(v), pattern, budget, visits) {
                return Some(w);
            }
        }
        None
    }
    if start.len() >= pattern.len() {
        return Ok((start.clone(), vec![]));
    }
    let mut rejected = Vec::new();
    let mut visits = 0;
    let banned = pattern.entries()[start.len()];
    for v in t.successors(start, budget).values {
        if v == banned {
            rejected.push(v);
            continue;
        }
        if let Some(w) = dfs(t, &start.child(v), pattern, budget, &mut visits) {
            return Ok((w, rejected));
        }
        rejected.push(v);
    }
    Err(Error::Budget {
        node: start.clone(),
        budget,
        required: pattern.len() - start.len() + 1,
    })
}

fn eval(h: &MeagerWitness, sigma: &Word) -> Result<Word> {
    h.eval(sigma)
        .ok_or_else(|| Error::WindowTooSmall(format!("h({}) is too long", sigma)))
}

pub fn miller_meager_escape(tp: &TreeSpec, h: &MeagerWitness, steps: usize) -> Result<EscapeTrace> {
    miller_meager_escape_with(tp, h, steps, DEFAULT_BUDGET)
}

/// Points `ξ` with nonzero entries and `τ ∈ [T′]` such that `ξ + τ` contains
/// `σ_n⌢h(σ_n)` for `n <= steps`.
///
/// `σ_0` has the length of the stem and differs from it everywhere. Later
/// `σ_{n+1}` extends the previous pattern to `|τ′_n|`, differing from `τ′_n`
/// on the new coordinates, and `τ_{n+1} ⊇ τ′_n` is chosen to differ from
/// the new pattern past `τ′_n`.
pub fn miller_meager_escape_with(
    tp: &TreeSpec,
    h: &MeagerWitness,
    steps: usize,
    budget: usize,
) -> Result<EscapeTrace> {
    let stem = tp.stem(SEARCH_LIMIT)?;
    let mut sigma = Word::new(stem.entries().iter().map(|&v| least_other(v)).collect());
    let mut pattern = sigma.concat(&eval(h, &sigma)?);
    let (mut tau, rejected) = extend_avoiding(tp, &Word::empty(), &pattern, budget)?;
    let mut xi = word_sub(&pattern, &tau)?;
    let mut log = vec![StepRecord {
        step: 0,
        forbidden: rejected,
        forbidden_words: vec![],
        chosen: tau.clone(),
        pattern: pattern.clone(),
        anchor: Some(sigma.clone()),
    }];
    let mut primes = Vec::new();
    for n in 1..=steps {
        let prime = omega_beyond(tp, &tau, sigma.len())?;
        let mut next = pattern.clone();
        for k in pattern.len()..prime.len() {
            next.push(least_other(prime.entries()[k]));
        }
        sigma = next;
        pattern = sigma.concat(&eval(h, &sigma)?);
        let (t2, rejected) = extend_avoiding(tp, &prime, &pattern, budget)?;
        primes.push(prime);
        tau = t2;
        xi = word_sub(&pattern, &tau)?;
        log.push(StepRecord {
            step: n,
            forbidden: rejected,
            forbidden_words: vec![],
            chosen: tau.clone(),
            pattern: pattern.clone(),
            anchor: Some(sigma.clone()),
        });
    }
    let mut ledger = Ledger::new();
    ledger.record_all(
        "i",
        log.windows(2).map(|w| {
            let (a, b) = (w[0].anchor.as_ref().unwrap(), w[1].anchor.as_ref().unwrap());
            (b.len() > a.len(), format!("step {}", w[1].step))
        }),
    );
    ledger.record_all(
        "ii",
        log.windows(2).zip(primes.iter()).map(|(w, p)| {
            let ok =
                w[0].chosen.is_prefix_of(p) && p.is_prefix_of(&w[1].chosen) && tp.is_omega_split(p);
            (ok, format!("step {}", w[1].step))
        }),
    );
    ledger.record_all(
        "iii",
        log.iter().map(|r| {
            let ok = r.chosen.is_prefix_of(&tau)
                && xi.entries()[..r.chosen.len()].iter().all(|&v| v != 0)
                && tp.contains(&r.chosen);
            (ok, format!("step {}", r.step))
        }),
    );
    ledger.record_all(
        "iv",
        log.iter().map(|r| {
            let anchor = r.anchor.as_ref().unwrap();
            let ok = h.eval(anchor).is_some_and(|hv| {
                let pat = anchor.concat(&hv);
                word_add(&xi.restrict(pat.len()), &tau.restrict(pat.len())).is_ok_and(|s| s == pat)
            });
            (ok, format!("step {}", r.step))
        }),
    );
    Ok(EscapeTrace {
        construction: "miller-meager".into(),
        x_prefix: xi,
        t_prefix: tau,
        s_prefix: None,
        step_log: log,
        ledger,
    })
}

pub fn miller_pair_escape(
    t1: &TreeSpec,
    t2: &TreeSpec,
    s: &Slalom,
    steps: usize,
) -> Result<EscapeTrace> {
    miller_pair_escape_with(t1, t2, s, steps, DEFAULT_BUDGET)
}

/// `s ∈ [T_1]`, `t ∈ [T_2]` with `(s + t)↾k ∉ S_k` for `k` past the shorter
/// ω-stem. Odd steps move `T_2` to a longer ω-splitting node and pick the
/// successor of `T_1`'s ω-splitting node outside the values that could land
/// in `S_k`; even steps swap the roles.
pub fn miller_pair_escape_with(
    t1: &TreeSpec,
    t2: &TreeSpec,
    s: &Slalom,
    steps: usize,
    budget: usize,
) -> Result<EscapeTrace> {
    let a = t1.omega_stem(SEARCH_LIMIT)?;
    let b = t2.omega_stem(SEARCH_LIMIT)?;
    if a.len() > b.len() {
        let mut tr = miller_pair_escape_with(t2, t1, s, steps, budget)?;
        let first = tr.s_prefix.take().expect("pair trace");
        tr.s_prefix = Some(tr.t_prefix.clone());
        tr.t_prefix = first;
        return Ok(tr);
    }
    let mut sig = a.clone();
    let mut tau = b.restrict(a.len());
    let start = sig.len();
    let mut log = Vec::new();
    for step in 1..=steps {
        let p = sig.len();
        // free side keeps its ω-splitting node; the lead side moves on
        let (free_tree, lead_tree, free, lead) = if step % 2 == 1 {
            (t1, t2, &sig, &tau)
        } else {
            (t2, t1, &tau, &sig)
        };
        let lead_new = omega_beyond(lead_tree, lead, p)?;
        let top = lead_new.len();
        let lv = lead_new.entries()[p];
        let forbidden: BTreeSet<i64> = (p + 1..=top)
            .flat_map(|k| s.level(k).iter().map(move |eta| eta.entries()[p] - lv))
            .collect();
        let stream = free_tree.successors(free, forbidden.len() + 1);
        let pos = stream.values.iter().position(|v| !forbidden.contains(v));
        let Some(pos) = pos else {
            return Err(Error::Construction(format!(
                "no admissible successor at {}",
                free
            )));
        };
        if pos >= budget {
            return Err(Error::Budget {
                node: free.clone(),
                budget,
                required: pos + 1,
            });
        }
        let v = stream.values[pos];
        let free_new = free_tree.leftmost_extension(&free.child(v), top)?;
        let (new_sig, new_tau) = if step % 2 == 1 {
            (free_new, lead_new)
        } else {
            (lead_new, free_new)
        };
        let pattern = word_add(&new_sig, &new_tau)?.slice(p, top);
        log.push(StepRecord {
            step,
            forbidden: forbidden.into_iter().collect(),
            forbidden_words: vec![],
            chosen: Word::from([v]),
            pattern,
            anchor: None,
        });
        sig = new_sig;
        tau = new_tau;
    }
    let sum = word_add(&sig, &tau)?;
    let mut ledger = Ledger::new();
    ledger.record("members", t1.contains(&sig) && t2.contains(&tau), "");
    ledger.record("ii", sig.len() == tau.len(), "");
    ledger.record("i", log.iter().all(|r| !r.pattern.is_empty()), "");
    let miss = |k: usize| {
        (
            !s.level(k).contains(&sum.restrict(k)),
            format!("level {}", k),
        )
    };
    ledger.record_all("iii-past-stem", (start + 1..=sum.len()).map(miss));
    // levels up to the shorter ω-stem are fixed by the trees, not chosen
    ledger.record_all("iii", (1..=sum.len()).map(miss));
    Ok(EscapeTrace {
        construction: "miller-pair".into(),
        x_prefix: sum,
        t_prefix: tau,
        s_prefix: Some(sig),
        step_log: log,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escape::{make_alpha_tree, WordCode};
    use crate::trees::{make_full, make_laver, SuccRule};

    #[test]
    fn meager_escape_constant() {
        let t = make_alpha_tree(WordCode::ZigzagIndex, 2, 4).unwrap();
        let h = MeagerWitness::constant(Word::from([0, 0]));
        let tr = miller_meager_escape(&t, &h, 1).unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
        assert_eq!(tr.x_prefix.len(), tr.t_prefix.len());
        let tr4 = miller_meager_escape(&t, &h, 4).unwrap();
        assert!(tr4.ledger.all_pass());
        assert!(tr.x_prefix.is_prefix_of(&tr4.x_prefix));
    }

    #[test]
    fn pair_empty_slalom_takes_leftmost() {
        let t = make_full();
        let tr = miller_pair_escape(&t, &t, &Slalom::empty(10), 4).unwrap();
        assert!(tr.ledger.all_pass());
        assert!(tr.step_log.iter().all(|r| r.chosen == Word::from([0])));
    }

    #[test]
    fn pair_avoids_single_pattern() {
        let mut levels = vec![BTreeSet::new(); 4];
        levels[3].insert(Word::from([0, 0, 0]));
        let s = Slalom::from_levels(levels);
        let l = make_laver(Word::empty(), SuccRule::All);
        let tr = miller_pair_escape(&make_full(), &l, &s, 5).unwrap();
        assert!(tr.ledger.all_pass(), "{:?}", tr.ledger);
        assert_eq!(tr.step_log[2].forbidden, vec![0]);
        assert_eq!(tr.step_log[2].chosen, Word::from([1]));
    }

    #[test]
    fn pair_budget_deficit() {
        let mut levels = vec![BTreeSet::new(); 2];
        levels[1] = [Word::from([0]), Word::from([1]), Word::from([-1])]
            .into_iter()
            .collect();
        let s = Slalom::from_levels(levels);
        let err = miller_pair_escape_with(&make_full(), &make_full(), &s, 1, 2).unwrap_err();
        assert!(matches!(err, Error::Budget { required: 4, .. }));
    }
}

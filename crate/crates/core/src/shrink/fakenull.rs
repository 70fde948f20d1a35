use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideals::{Rational, Slalom};
use crate::ledger::Ledger;
use crate::trees::{make_subtree, n_fold_sumset, sumset, truncate, TreeSpec};
use crate::words::Word;

pub const DEFAULT_BUDGET: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FakeNullShrinkPlan {
    pub horizon: usize,
    pub budget: u64,
    pub k_seq: Vec<u32>,
    pub m_seq: Vec<usize>,
    /// `A / 2^⌊n/2⌋` per level.
    pub allowance: Vec<Rational>,
    /// Running totals of `2^{k_n³}|S_n|/2^n`.
    pub weighted: Vec<Rational>,
    /// `Σ_n A/2^⌊n/2⌋ = 4A`, bounding every running total.
    pub declared_bound: Rational,
}

impl FakeNullShrinkPlan {
    pub fn k(&self, n: usize) -> u32 {
        self.k_seq[n.min(self.k_seq.len() - 1)]
    }
}

fn weight(k: u32, size: usize, n: usize) -> Rational {
    let num = BigUint::from(size) << (k as usize).pow(3);
    Rational::dyadic(num, n)
}

/// `k_n` is the largest value `<= n` that keeps the plan non-decreasing and
/// every later level within its allowance `A/2^⌊n/2⌋`.
pub fn choose_kn(s: &Slalom, horizon: usize) -> Result<FakeNullShrinkPlan> {
    choose_kn_with(s, horizon, DEFAULT_BUDGET)
}

pub fn choose_kn_with(s: &Slalom, horizon: usize, budget: u64) -> Result<FakeNullShrinkPlan> {
    let allowance: Vec<Rational> = (0..=horizon)
        .map(|n| Rational::dyadic(BigUint::from(budget), n / 2))
        .collect();
    let mut kmax = Vec::with_capacity(horizon + 1);
    for (n, allow) in allowance.iter().enumerate() {
        let size = s.level(n).len();
        if size == 0 {
            kmax.push(n as u32);
            continue;
        }
        let best = (0..=n as u32).rev().find(|&k| weight(k, size, n) <= *allow);
        match best {
            Some(k) => kmax.push(k),
            None => return Err(Error::BudgetUnsatisfiable { level: n }),
        }
    }
    let mut k_seq = vec![0u32; horizon + 1];
    let mut suffix = u32::MAX;
    for n in (0..=horizon).rev() {
        suffix = suffix.min(kmax[n]);
        k_seq[n] = suffix.min(n as u32);
    }
    let mut m_seq = vec![0usize];
    while let Some(next) = {
        let cur = *m_seq.last().unwrap();
        (cur + 1..=horizon).find(|&m| k_seq[m] > k_seq[cur])
    } {
        m_seq.push(next);
    }
    let mut weighted = Vec::with_capacity(horizon + 1);
    let mut acc = Rational::zero();
    for (n, &k) in k_seq.iter().enumerate() {
        acc += weight(k, s.level(n).len(), n);
        weighted.push(acc.clone());
    }
    let declared_bound = Rational::from_int(4 * budget as i64);
    Ok(FakeNullShrinkPlan {
        horizon,
        budget,
        k_seq,
        m_seq,
        allowance,
        weighted,
        declared_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCheck {
    pub n: usize,
    pub s_size: usize,
    pub k: u32,
    pub subtree_nodes: usize,
    pub size: usize,
    pub bound: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FakeNullShrink {
    pub plan: FakeNullShrinkPlan,
    /// `(σ, τ_σ)` for binary `σ`.
    pub taus: Vec<(Word, Word)>,
    pub slalom: Slalom,
    pub levels: Vec<LevelCheck>,
    pub ledger: Ledger,
    #[serde(skip_serializing)]
    pub subtree: TreeSpec,
}

/// Builds `τ_σ` with `|τ_σ| >= m_{|σ|+1}` so that `|T′ ∩ ℤ^n| <= 2^{k_n}`,
/// then `S′_n = S_n + ⋃_{1<=j<=k_n} j-fold(T′ ∩ ℤ^n)` for `n <= depth`.
pub fn fakenull_shrink_perfect(t: &TreeSpec, s: &Slalom, depth: usize) -> Result<FakeNullShrink> {
    s.validate()?;
    let plan = choose_kn(s, depth)?;
    let required = |j: usize| plan.m_seq.get(j + 1).copied().unwrap_or(depth).min(depth);
    let limit = depth.max(1) * 8 + 64;
    let start = t.leftmost_extension(&Word::empty(), required(0))?;
    let mut level = vec![(Word::empty(), t.shortest_split_extension(&start, limit)?)];
    let mut taus = level.clone();
    let mut j = 0;
    while !level.iter().all(|(_, tau)| tau.len() >= depth) {
        let req = required(j + 1);
        let mut next = Vec::new();
        for (sigma, tau) in &level {
            let succ = t.successors(tau, 2);
            if succ.values.len() < 2 {
                return Err(Error::NotPerfect(tau.clone()));
            }
            for (i, &v) in succ.values.iter().enumerate() {
                let child = tau.child(v);
                let ext = t.leftmost_extension(&child, req.max(child.len()))?;
                let split =
                    t.shortest_split_extension(&ext, limit)
                        .map_err(|_| Error::DepthExhausted {
                            depth: limit,
                            completed: j,
                        })?;
                next.push((sigma.child(i as i64), split));
            }
        }
        taus.extend(next.iter().cloned());
        level = next;
        j += 1;
    }
    // past the last split level the branches only follow leftmost paths
    let frontier: Vec<Word> = level
        .iter()
        .map(|(_, tau)| t.leftmost_extension(tau, depth.max(tau.len())))
        .collect::<Result<_>>()?;
    let tips: Vec<Word> = taus
        .iter()
        .map(|(_, tau)| tau.clone())
        .chain(frontier.iter().cloned())
        .collect();
    let subtree = make_subtree(t, &tips, &frontier, "fakenull-shrink");
    let tr = truncate(&subtree, depth, 2);
    let mut out = Vec::with_capacity(depth + 1);
    let mut checks = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let sn = s.level(n);
        let k = plan.k(n);
        let nodes: BTreeSet<Word> = tr.nodes.iter().filter(|w| w.len() == n).cloned().collect();
        let mut level_set = BTreeSet::new();
        if !sn.is_empty() {
            for jf in 1..=k as usize {
                level_set.extend(sumset(sn, &n_fold_sumset(&nodes, jf, n)?)?);
            }
        }
        let bound = BigUint::from(sn.len()) << (k as usize).pow(3);
        let holds = BigUint::from(level_set.len()) <= bound;
        checks.push(LevelCheck {
            n,
            s_size: sn.len(),
            k,
            subtree_nodes: nodes.len(),
            size: level_set.len(),
            bound: bound.to_string(),
            holds,
        });
        if !holds {
            return Err(Error::Construction(format!(
                "|S'_{}| = {} exceeds |S_{}|·2^(k³) = {}",
                n,
                level_set.len(),
                n,
                bound
            )));
        }
        out.push(level_set);
    }
    let slalom = Slalom::from_levels(out);
    let mut ledger = Ledger::new();
    ledger.record_all(
        "node-count",
        checks.iter().map(|c| {
            (
                c.subtree_nodes <= 1usize << c.k.min(60),
                format!("level {}", c.n),
            )
        }),
    );
    ledger.record_all(
        "level-bound",
        checks.iter().map(|c| (c.holds, format!("level {}", c.n))),
    );
    ledger.record_all(
        "tau-length",
        taus.iter().map(|(sigma, tau)| {
            (
                tau.len() >= required(sigma.len()),
                format!("sigma {}", sigma),
            )
        }),
    );
    ledger.record_all(
        "budget",
        plan.weighted
            .iter()
            .enumerate()
            .map(|(n, w)| (*w <= plan.declared_bound, format!("running total at {}", n))),
    );
    Ok(FakeNullShrink {
        plan,
        taus,
        slalom,
        levels: checks,
        ledger,
        subtree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::make_full;

    #[test]
    fn empty_slalom_plan() {
        let p = choose_kn(&Slalom::empty(6), 6).unwrap();
        assert_eq!(p.k_seq, (0..=6).collect::<Vec<u32>>());
        assert_eq!(p.m_seq, (0..=6).collect::<Vec<usize>>());
    }

    #[test]
    fn heavy_level_rejected() {
        let mut s = Slalom::empty(3);
        s.levels[0].insert(Word::empty());
        assert!(choose_kn_with(&s, 3, 1).is_ok());
        let mut levels = vec![BTreeSet::new(); 2];
        levels[1] = [Word::from([0]), Word::from([1])].into_iter().collect();
        assert!(matches!(
            choose_kn_with(&Slalom::from_levels(levels), 1, 0),
            Err(Error::BudgetUnsatisfiable { level: 1 })
        ));
    }

    #[test]
    fn empty_slalom_shrink() {
        let r = fakenull_shrink_perfect(&make_full(), &Slalom::empty(6), 6).unwrap();
        assert!(r.slalom.levels.iter().all(BTreeSet::is_empty));
        assert!(r.ledger.all_pass());
        assert!(truncate(&r.subtree, 6, 2).is_perfect(1));
    }

    #[test]
    fn nonempty_levels_bounded() {
        let mut levels = vec![BTreeSet::new(); 7];
        levels[3] = [Word::from([0, 0, 0]), Word::from([1, -1, 0])]
            .into_iter()
            .collect();
        levels[5] = [Word::from([0, 1, 0, 1, 0])].into_iter().collect();
        let s = Slalom::from_levels(levels);
        let r = fakenull_shrink_perfect(&make_full(), &s, 6).unwrap();
        assert!(r.ledger.all_pass(), "{:?}", r.ledger);
        assert!(r.levels.iter().all(|c| c.holds));
        assert!(!r.slalom.levels[3].is_empty() || r.plan.k(3) == 0);
    }
}

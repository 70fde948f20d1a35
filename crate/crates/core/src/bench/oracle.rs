//! Brute-force checks on raw integer vectors. Nothing here calls into the
//! shrink or escape modules.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde_json::{json, Value};

use super::{CheckResult, IdealCert, ScenarioReport, Window, CEILING};
use crate::error::{Error, Result};
use crate::ideals::{IntervalCert, MeagerWitness, Mode, Slalom};
use crate::shrink::SacksShrinkResult;
use crate::words::{enum_index, Word};

pub type Raw = Vec<i64>;

pub fn raw(w: &Word) -> Raw {
    w.entries().to_vec()
}

pub fn add(a: &[i64], b: &[i64]) -> Option<Raw> {
    if a.len() != b.len() {
        return None;
    }
    a.iter().zip(b).map(|(x, y)| x.checked_add(*y)).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Option<Raw> {
    if a.len() != b.len() {
        return None;
    }
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

/// `{a + b}` over all pairs.
pub fn pair_sums(a: &BTreeSet<Raw>, b: &BTreeSet<Raw>) -> BTreeSet<Raw> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            if let Some(s) = add(x, y) {
                out.insert(s);
            }
        }
    }
    out
}

/// `{t_1 + … + t_j}` with each `t_i` from `a`; `{0^len}` for `j = 0`.
pub fn fold_sums(a: &BTreeSet<Raw>, j: usize, len: usize) -> BTreeSet<Raw> {
    let mut acc: BTreeSet<Raw> = [vec![0; len]].into_iter().collect();
    for _ in 0..j {
        acc = pair_sums(&acc, a);
    }
    acc
}

/// First `σ_m⌢f(σ_m) ⊆ z` with `lo <= m <= hi`, as `(|σ_m|, m)`.
pub fn meager_hit(
    f: &MeagerWitness,
    z: &[i64],
    lo: u64,
    hi: Option<u64>,
) -> Option<(usize, BigUint)> {
    let lo = BigUint::from(lo.max(f.from_index));
    for j in 0..=z.len() {
        let sigma = Word::new(z[..j].to_vec());
        let m = enum_index(&sigma);
        if m < lo || hi.is_some_and(|h| m > BigUint::from(h)) {
            continue;
        }
        let Some(p) = f.eval(&sigma) else { continue };
        if j + p.len() <= z.len() && z[j..j + p.len()] == *p.entries() {
            return Some((j, m));
        }
    }
    None
}

/// First checked complete interval on which `z` copies the center.
pub fn interval_escape(c: &IntervalCert, z: &[i64]) -> Option<u64> {
    let first = match c.mode {
        Mode::Forall => 0,
        Mode::Cofinite => c.threshold,
    };
    let mut n = 0u64;
    loop {
        let (a, b) = (c.cuts.cut(n), c.cuts.cut(n + 1));
        if b as usize > z.len() {
            return None;
        }
        if n >= first && (a..b).all(|k| z[k as usize] == c.center.value(k)) {
            return Some(n);
        }
        n += 1;
    }
}

/// Least `n` in `[from, |z|]` with `z↾n ∈ S_n`.
pub fn slalom_hit(s: &Slalom, z: &[i64], from: usize) -> Option<usize> {
    (from..=z.len()).find(|&n| {
        s.levels
            .get(n)
            .is_some_and(|l| l.contains(&Word::new(z[..n].to_vec())))
    })
}

fn in_cert(cert: &IdealCert, z: &[i64], w: &Window) -> Option<Value> {
    match cert {
        IdealCert::Meager { witness, upto } => meager_hit(witness, z, w.n, *upto)
            .map(|(j, m)| json!({ "pattern_at": j, "index": m.to_string() })),
        IdealCert::Interval { cert } => {
            interval_escape(cert, z).map(|n| json!({ "copies_center_on": n }))
        }
        IdealCert::Slalom { slalom } => slalom_hit(slalom, z, w.n as usize)
            .is_none()
            .then(|| json!({ "misses_levels_from": w.n })),
    }
}

/// Every `f + t_1 + … + t_n` with `f ∈ f_set` and `t_i ∈ bodies[i]` is in the
/// certificate's set at the window's horizon.
pub fn sum_in_cert(
    f_set: &BTreeSet<Word>,
    bodies: &[BTreeSet<Word>],
    cert: &IdealCert,
    w: &Window,
) -> Result<CheckResult> {
    let scope = format!(
        "exhaustive: {} words of F, {} bodies, window {}",
        f_set.len(),
        bodies.len(),
        w
    );
    let Some(len) = f_set.iter().next().map(Word::len) else {
        return Ok(CheckResult::new("sum-in-cert", scope + " (F empty)", None));
    };
    if f_set
        .iter()
        .chain(bodies.iter().flatten())
        .any(|x| x.len() != len)
    {
        return Err(Error::Invalid(
            "sum oracle needs words of one length".into(),
        ));
    }
    // each distinct sum keeps its first decomposition
    let mut sums: BTreeMap<Raw, Vec<Raw>> = [(vec![0; len], vec![])].into_iter().collect();
    for body in bodies {
        let mut next = BTreeMap::new();
        for (s, parts) in &sums {
            for t in body {
                if let Some(v) = add(s, t.entries()) {
                    next.entry(v).or_insert_with(|| {
                        let mut p = parts.clone();
                        p.push(raw(t));
                        p
                    });
                }
            }
        }
        sums = next;
    }
    let count = f_set.len() as u128 * sums.len() as u128;
    if count > CEILING {
        return Err(Error::Ceiling {
            count,
            ceiling: CEILING,
        });
    }
    for f in f_set {
        for (s, parts) in &sums {
            let Some(z) = add(f.entries(), s) else {
                continue;
            };
            if let Some(why) = in_cert(cert, &z, w) {
                let cx = json!({ "f": raw(f), "bodies": parts, "sum": z, "reason": why });
                return Ok(CheckResult::new("sum-in-cert", scope, Some(cx)));
            }
        }
    }
    Ok(CheckResult::new(
        "sum-in-cert",
        format!("{}, {} sums", scope, count),
        None,
    ))
}

pub fn oracle_sum_in_cert(
    f_set: &BTreeSet<Word>,
    bodies: &[BTreeSet<Word>],
    cert: &IdealCert,
    w: &Window,
) -> Result<ScenarioReport> {
    let params = json!({ "cert": cert, "f_size": f_set.len(), "bodies": bodies.len() });
    let mut report = ScenarioReport::new("oracle-sum-in-cert", w, 0, params);
    report.push(sum_in_cert(f_set, bodies, cert, w)?);
    Ok(report)
}

/// Avoidance for a Sacks shrink: for every grid entry `σ^n_k` (k >= 0) and
/// every window word `x` free of `σ_m⌢f(σ_m)` for `m >= n`,
/// `σ^n_k ⊄ x + τ′_{ρ^n_k}`. Entries longer than the window reduce to the
/// single candidate prefix `σ^n_k - τ′`.
pub fn sacks_avoidance(
    res: &SacksShrinkResult,
    f: &MeagerWitness,
    w: &Window,
) -> Result<CheckResult> {
    let primes: BTreeMap<Raw, Raw> = res
        .tau_map
        .iter()
        .map(|e| (raw(&e.rho), raw(&e.tau_prime)))
        .collect();
    let mut cases = Vec::new();
    for e in res.sigma_grid.iter().filter(|e| e.k >= 0) {
        let rho: Raw = (0..e.n)
            .map(|i| ((e.k as u64) >> (e.n - 1 - i)) as i64 & 1)
            .collect();
        let tp = primes
            .get(&rho)
            .ok_or_else(|| Error::Invalid(format!("no τ′ for ρ = {:?}", rho)))?;
        let sigma = raw(&e.sigma);
        if tp.len() < sigma.len() {
            let cx = json!({ "n": e.n, "k": e.k, "reason": "τ′ shorter than σ" });
            return Ok(CheckResult::new("avoidance", "grid", Some(cx)));
        }
        let y = sub(&sigma, &tp[..sigma.len()]).ok_or_else(|| Error::Invalid("overflow".into()))?;
        cases.push((e.n, e.k, y));
    }
    let b = w.b as i64;
    let mut reduced = 0;
    for (n, k, y) in cases.iter().filter(|c| c.2.len() > w.d) {
        reduced += 1;
        if y.iter().all(|v| v.abs() <= b) && meager_hit(f, y, *n as u64, None).is_none() {
            let cx = json!({ "n": n, "k": k, "x_prefix": y });
            return Ok(CheckResult::new("avoidance", "reduced", Some(cx)));
        }
    }
    let short: Vec<_> = cases.iter().filter(|c| c.2.len() <= w.d).collect();
    let mut visited = 0u64;
    for x in super::enumerate_window(w)? {
        visited += 1;
        let x = x.entries();
        for (n, k, y) in &short {
            if x[..y.len()] == y[..] && meager_hit(f, x, *n as u64, None).is_none() {
                let cx = json!({ "n": n, "k": k, "x": x });
                return Ok(CheckResult::new("avoidance", "exhaustive", Some(cx)));
            }
        }
    }
    let scope = format!(
        "{} grid entries: {} exhaustive over {} words of window {}, {} reduced",
        cases.len(),
        short.len(),
        visited,
        w,
        reduced
    );
    Ok(CheckResult::new("avoidance", scope, None))
}

/// `S_n + ⋃_{1<=j<=k_n} j-fold(nodes_n)`, empty where `S_n` is.
pub fn derived_levels(s: &Slalom, k: &[u32], nodes: &[BTreeSet<Raw>]) -> Vec<BTreeSet<Raw>> {
    nodes
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let sn: BTreeSet<Raw> = s
                .levels
                .get(n)
                .map(|l| l.iter().map(raw).collect())
                .unwrap_or_default();
            let kn = k.get(n).or(k.last()).copied().unwrap_or(0) as usize;
            let mut out = BTreeSet::new();
            let mut acc: BTreeSet<Raw> = [vec![0; n]].into_iter().collect();
            for _ in 1..=kn {
                acc = pair_sums(&acc, a);
                out.extend(pair_sums(&sn, &acc));
            }
            out
        })
        .collect()
}

/// Compares a claimed derived slalom with an independent recomputation.
pub fn derived_levels_check(
    s: &Slalom,
    k: &[u32],
    nodes: &[BTreeSet<Raw>],
    claimed: &Slalom,
) -> CheckResult {
    let expect = derived_levels(s, k, nodes);
    for (n, e) in expect.iter().enumerate() {
        let got: BTreeSet<Raw> = claimed
            .levels
            .get(n)
            .map(|l| l.iter().map(raw).collect())
            .unwrap_or_default();
        if &got != e {
            let missing: Vec<&Raw> = e.difference(&got).take(3).collect();
            let extra: Vec<&Raw> = got.difference(e).take(3).collect();
            let cx = json!({ "level": n, "missing": missing, "unexpected": extra });
            return CheckResult::new(
                "derived-levels",
                format!("levels 0..={}", expect.len() - 1),
                Some(cx),
            );
        }
    }
    CheckResult::new(
        "derived-levels",
        format!("levels 0..={}", expect.len().saturating_sub(1)),
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{Center, Cuts};

    fn set(ws: &[&[i64]]) -> BTreeSet<Word> {
        ws.iter().map(|w| Word::from(*w)).collect()
    }

    #[test]
    fn empty_f_is_vacuous() {
        let cert = IdealCert::Slalom {
            slalom: Slalom::empty(3),
        };
        let r = oracle_sum_in_cert(&BTreeSet::new(), &[], &cert, &Window::new(2, 3, 3, 0)).unwrap();
        assert!(r.all_pass());
    }

    #[test]
    fn interval_counterexample() {
        let cert = IdealCert::Interval {
            cert: IntervalCert::forall(Center::zero(), Cuts::uniform(2)),
        };
        let w = Window::new(2, 4, 3, 0);
        let ok = sum_in_cert(&set(&[&[1, 1, 1, 1]]), &[set(&[&[0, 0, 0, 0]])], &cert, &w).unwrap();
        assert!(ok.pass);
        let bad = sum_in_cert(
            &set(&[&[1, 1, 1, 1]]),
            &[set(&[&[0, 0, -1, -1]])],
            &cert,
            &w,
        )
        .unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.counterexample.unwrap()["sum"], json!([1, 1, 0, 0]));
    }

    #[test]
    fn meager_window() {
        let f = MeagerWitness::constant(Word::from([0]));
        assert_eq!(meager_hit(&f, &[0, 5], 0, None).map(|h| h.0), Some(0));
        assert_eq!(meager_hit(&f, &[3, 5], 0, None), None);
        assert_eq!(meager_hit(&f, &[0, 5], 1, None), None);
    }

    #[test]
    fn folds() {
        let a: BTreeSet<Raw> = [vec![0], vec![1]].into_iter().collect();
        assert_eq!(fold_sums(&a, 2, 1).len(), 3);
        assert_eq!(fold_sums(&a, 0, 1), [vec![0]].into_iter().collect());
    }
}

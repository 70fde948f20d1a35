use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideals::MeagerWitness;
use crate::ledger::Ledger;
use crate::trees::{leq_n, make_subtree, truncate, TreeSpec};
use crate::words::{binary_lex, enum_word_u64, word_add, word_sub, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauEntry {
    pub rho: Word,
    pub tau_prime: Word,
    pub tau: Word,
    /// Zeros appended to `σ - τ′` before applying the witness; 0 in the
    /// unpadded case.
    pub pad: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaEntry {
    pub n: usize,
    pub k: i64,
    pub sigma: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HEntry {
    pub index: u64,
    pub sigma: Word,
    pub h: Word,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SacksOptions {
    /// Extend every `τ_ρ` of a stage to one common splitting length, so a
    /// uniformly perfect input yields a uniformly perfect subtree.
    pub aligned: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SacksShrinkResult {
    pub first_stage: usize,
    pub n_max: usize,
    pub depth: usize,
    /// Number of stages finished; stages are committed whole.
    pub completed: usize,
    pub complete: bool,
    pub tau_map: Vec<TauEntry>,
    pub sigma_grid: Vec<SigmaEntry>,
    pub h_table: Vec<HEntry>,
    /// The input witness with `h` written over its table.
    pub witness: MeagerWitness,
    pub ledger: Ledger,
    #[serde(skip_serializing)]
    pub subtree: TreeSpec,
}

impl SacksShrinkResult {
    pub fn require_complete(self) -> Result<Self> {
        if self.complete {
            Ok(self)
        } else {
            Err(Error::DepthExhausted {
                depth: self.depth,
                completed: self.completed,
            })
        }
    }

    pub fn tau(&self, rho: &Word) -> Option<&TauEntry> {
        self.tau_map.iter().find(|e| &e.rho == rho)
    }

    pub fn sigma(&self, n: usize, k: i64) -> Option<&Word> {
        self.sigma_grid
            .iter()
            .find(|e| e.n == n && e.k == k)
            .map(|e| &e.sigma)
    }

    pub fn h(&self, index: u64) -> Option<&Word> {
        self.h_table.iter().find(|e| e.index == index).map(|e| &e.h)
    }

    /// `τ_ρ` for `ρ ∈ 2^n`, in lexicographic order of `ρ`.
    pub fn level_taus(&self, n: usize) -> Vec<(Word, Word)> {
        let mut v: Vec<(Word, Word)> = self
            .tau_map
            .iter()
            .filter(|e| e.rho.len() == n)
            .map(|e| (e.rho.clone(), e.tau.clone()))
            .collect();
        v.sort();
        v
    }
}

struct Solved {
    tau_prime: Word,
    sigma: Word,
    pad: usize,
}

struct Engine<'a> {
    t: &'a TreeSpec,
    f: &'a MeagerWitness,
    depth: usize,
    aligned: bool,
}

impl Engine<'_> {
    /// Finds `τ′ ⊇ base` of length `|u⌢f(u)|` where `u = (prev - τ′↾|prev|)⌢0^pad`,
    /// with the least pad making `|τ′| >= min_len`.
    fn solve(&self, base: &Word, min_len: usize, prev: &Word) -> Result<Option<Solved>> {
        let ext_len = prev.len().max(min_len);
        if ext_len > self.depth {
            return Ok(None);
        }
        let ext = self.t.leftmost_extension(base, ext_len)?;
        let head = word_sub(prev, &ext.restrict(prev.len()))?;
        let mut pad = 0;
        loop {
            let u = head.concat(&Word::zeros(pad));
            let Some(fu) = self.f.eval(&u) else {
                return Ok(None);
            };
            let len = u.len() + fu.len();
            if len > self.depth {
                return Ok(None);
            }
            if len >= min_len {
                let tau_prime = self.t.leftmost_extension(base, len)?;
                let sigma = word_add(&u.concat(&fu), &tau_prime)?;
                return Ok(Some(Solved {
                    tau_prime,
                    sigma,
                    pad,
                }));
            }
            pad += 1;
        }
    }

    fn split_ext(&self, node: &Word) -> Result<Option<Word>> {
        let mut cur = node.clone();
        loop {
            if self.t.is_split(&cur) {
                return Ok(Some(cur));
            }
            if cur.len() >= self.depth {
                return Ok(None);
            }
            cur = self
                .t
                .leftmost_child(&cur)
                .ok_or_else(|| Error::NotPerfect(cur.clone()))?;
        }
    }

    /// The `τ` closing a stage: shortest splitting extensions, or in aligned
    /// mode the leftmost extensions to the least common splitting length.
    fn close(&self, primes: &[Word]) -> Result<Option<Vec<Word>>> {
        if !self.aligned {
            let mut out = Vec::with_capacity(primes.len());
            for p in primes {
                match self.split_ext(p)? {
                    Some(t) => out.push(t),
                    None => return Ok(None),
                }
            }
            return Ok(Some(out));
        }
        let mut len = primes.iter().map(Word::len).max().unwrap_or(0);
        while len <= self.depth {
            let ext: Vec<Word> = primes
                .iter()
                .map(|p| self.t.leftmost_extension(p, len))
                .collect::<Result<_>>()?;
            if ext.iter().all(|e| self.t.is_split(e)) {
                return Ok(Some(ext));
            }
            len += 1;
        }
        Ok(None)
    }
}

struct Stage {
    taus: Vec<TauEntry>,
    grid: Vec<SigmaEntry>,
    h: HEntry,
}

fn run_stage(eng: &Engine, s: usize, parents: &[(Word, Word)]) -> Result<Option<Stage>> {
    let sigma_s = enum_word_u64(s as u64);
    let mut prev = sigma_s.concat(&Word::zeros(s));
    let mut grid = vec![SigmaEntry {
        n: s,
        k: -1,
        sigma: prev.clone(),
    }];
    let mut fresh: Vec<(Word, Word, usize)> = Vec::new();
    if s == 0 {
        let Some(sol) = eng.solve(&Word::empty(), 0, &prev)? else {
            return Ok(None);
        };
        grid.push(SigmaEntry {
            n: 0,
            k: 0,
            sigma: sol.sigma.clone(),
        });
        prev = sol.sigma;
        fresh.push((Word::empty(), sol.tau_prime, sol.pad));
    } else {
        for (j, (rho, tau)) in parents.iter().enumerate() {
            let succ = eng.t.successors(tau, 2);
            if succ.values.len() < 2 {
                return Err(Error::NotPerfect(tau.clone()));
            }
            for i in 0..2 {
                let base = tau.child(succ.values[i]);
                let Some(sol) = eng.solve(&base, tau.len() + 1, &prev)? else {
                    return Ok(None);
                };
                grid.push(SigmaEntry {
                    n: s,
                    k: (2 * j + i) as i64,
                    sigma: sol.sigma.clone(),
                });
                prev = sol.sigma;
                fresh.push((rho.child(i as i64), sol.tau_prime, sol.pad));
            }
        }
    }
    let primes: Vec<Word> = fresh.iter().map(|(_, p, _)| p.clone()).collect();
    let Some(closed) = eng.close(&primes)? else {
        return Ok(None);
    };
    let taus = fresh
        .into_iter()
        .zip(closed)
        .map(|((rho, tau_prime, pad), tau)| TauEntry {
            rho,
            tau_prime,
            tau,
            pad,
        })
        .collect();
    let h = HEntry {
        index: s as u64,
        h: prev.slice(sigma_s.len(), prev.len()),
        sigma: sigma_s,
    };
    Ok(Some(Stage { taus, grid, h }))
}

fn assemble(
    t: &TreeSpec,
    w: &MeagerWitness,
    first_stage: usize,
    n_max: usize,
    depth: usize,
    stages: Vec<Stage>,
    label: &str,
) -> SacksShrinkResult {
    let completed = stages.len();
    let complete = first_stage + completed > n_max;
    let mut tau_map = Vec::new();
    let mut sigma_grid = Vec::new();
    let mut h_table = Vec::new();
    for st in stages {
        tau_map.extend(st.taus);
        sigma_grid.extend(st.grid);
        h_table.push(st.h);
    }
    let tips: Vec<Word> = tau_map
        .iter()
        .flat_map(|e| [e.tau_prime.clone(), e.tau.clone()])
        .collect();
    let top = tau_map.iter().map(|e| e.rho.len()).max();
    let frontier: Vec<Word> = match top {
        Some(l) => tau_map
            .iter()
            .filter(|e| e.rho.len() == l)
            .map(|e| e.tau.clone())
            .collect(),
        None => vec![Word::empty()],
    };
    let subtree = make_subtree(t, &tips, &frontier, label);
    let witness = w
        .clone()
        .with_table(
            h_table
                .iter()
                .map(|e| (e.sigma.clone(), e.h.clone()))
                .collect(),
        )
        .with_from_index(first_stage as u64);
    let mut res = SacksShrinkResult {
        first_stage,
        n_max,
        depth,
        completed,
        complete,
        tau_map,
        sigma_grid,
        h_table,
        witness,
        ledger: Ledger::new(),
        subtree,
    };
    res.ledger = self_check(t, w, &res);
    res
}

/// Runs stages `0..=n_max` from the root of `t`.
pub fn sacks_shrink_meager(
    t: &TreeSpec,
    w: &MeagerWitness,
    n_max: usize,
    depth: usize,
) -> Result<SacksShrinkResult> {
    sacks_shrink_with(t, w, n_max, depth, SacksOptions::default())
}

pub fn sacks_shrink_with(
    t: &TreeSpec,
    w: &MeagerWitness,
    n_max: usize,
    depth: usize,
    opts: SacksOptions,
) -> Result<SacksShrinkResult> {
    w.validate()?;
    if !t.contains(&Word::empty()) {
        return Err(Error::Invalid("tree has no root".into()));
    }
    let eng = Engine {
        t,
        f: w,
        depth,
        aligned: opts.aligned,
    };
    let mut stages: Vec<Stage> = Vec::new();
    let mut parents: Vec<(Word, Word)> = Vec::new();
    for s in 0..=n_max {
        match run_stage(&eng, s, &parents)? {
            Some(st) => {
                parents = st
                    .taus
                    .iter()
                    .map(|e| (e.rho.clone(), e.tau.clone()))
                    .collect();
                stages.push(st);
            }
            None => break,
        }
    }
    Ok(assemble(t, w, 0, n_max, depth, stages, "sacks-shrink"))
}

/// Runs stages `first_stage..=n_max` with `level` supplying `τ_ρ` for
/// `ρ ∈ 2^{first_stage-1}`; nodes below `level` are left untouched.
pub fn sacks_shrink_rooted(
    t: &TreeSpec,
    w: &MeagerWitness,
    level: &[(Word, Word)],
    first_stage: usize,
    n_max: usize,
    depth: usize,
    opts: SacksOptions,
) -> Result<SacksShrinkResult> {
    w.validate()?;
    if first_stage == 0 {
        return Err(Error::Invalid(
            "rooted shrink starts at stage 1 or later".into(),
        ));
    }
    let need = 1usize << (first_stage - 1);
    if level.len() != need || level.iter().any(|(rho, _)| rho.len() != first_stage - 1) {
        return Err(Error::Construction(format!(
            "stage {} needs {} level nodes indexed by 2^{}",
            first_stage,
            need,
            first_stage - 1
        )));
    }
    let mut parents = level.to_vec();
    parents.sort();
    let eng = Engine {
        t,
        f: w,
        depth,
        aligned: opts.aligned,
    };
    let mut stages = Vec::new();
    for s in first_stage..=n_max.max(first_stage) {
        match run_stage(&eng, s, &parents)? {
            Some(st) => {
                parents = st
                    .taus
                    .iter()
                    .map(|e| (e.rho.clone(), e.tau.clone()))
                    .collect();
                stages.push(st);
            }
            None => break,
        }
    }
    let mut res = assemble(
        t,
        w,
        first_stage,
        n_max.max(first_stage),
        depth,
        stages,
        "sacks-rooted",
    );
    // keep the supplied level in the map so the subtree contains it
    if res.completed == 0 {
        let frontier: Vec<Word> = level.iter().map(|(_, t)| t.clone()).collect();
        res.subtree = make_subtree(t, &frontier, &frontier, "sacks-rooted");
    }
    Ok(res)
}

/// Conditions (i)–(iii) re-evaluated on the stored words.
fn self_check(t: &TreeSpec, f: &MeagerWitness, r: &SacksShrinkResult) -> Ledger {
    let mut ledger = Ledger::new();
    let taus = |rho: &Word| r.tau(rho);
    ledger.record_all(
        "i",
        r.tau_map.iter().filter(|e| !e.rho.is_empty()).map(|e| {
            let parent = e.rho.restrict(e.rho.len() - 1);
            let sib = parent.child(1 - e.rho.last().unwrap_or(0));
            let ok = match (taus(&parent), taus(&sib)) {
                (Some(p), Some(s)) => {
                    t.is_split(&p.tau)
                        && p.tau.is_prefix_of(&e.tau_prime)
                        && p.tau.len() < e.tau_prime.len()
                        && e.tau_prime.is_prefix_of(&e.tau)
                        && !e.tau_prime.compatible(&s.tau_prime)
                }
                // parents supplied from outside
                (None, Some(s)) => {
                    e.tau_prime.is_prefix_of(&e.tau) && !e.tau_prime.compatible(&s.tau_prime)
                }
                _ => false,
            };
            (ok, format!("rho {}", e.rho))
        }),
    );
    ledger.record_all(
        "ii",
        r.sigma_grid.iter().map(|e| {
            let ok = if e.k < 0 {
                e.sigma == enum_word_u64(e.n as u64).concat(&Word::zeros(e.n))
            } else {
                r.sigma(e.n, e.k - 1)
                    .is_some_and(|p| p.is_prefix_of(&e.sigma))
            };
            (ok, format!("sigma^{}_{}", e.n, e.k))
        }),
    );
    ledger.record_all(
        "iii",
        r.sigma_grid.iter().filter(|e| e.k >= 0).map(|e| {
            let detail = format!("(n, k) = ({}, {})", e.n, e.k);
            let ok = (|| {
                let rho = if e.n == 0 {
                    Word::empty()
                } else {
                    binary_lex(e.n as u32, e.k as u64).ok()?
                };
                let entry = taus(&rho)?;
                let prev = r.sigma(e.n, e.k - 1)?;
                let u = word_sub(prev, &entry.tau_prime.restrict(prev.len()))
                    .ok()?
                    .concat(&Word::zeros(entry.pad));
                let fu = f.eval(&u)?;
                let pat = u.concat(&fu);
                Some(
                    entry.tau_prime.len() == pat.len()
                        && word_add(&pat, &entry.tau_prime).ok()? == e.sigma,
                )
            })()
            .unwrap_or(false);
            (ok, detail)
        }),
    );
    ledger.record_all(
        "h",
        r.h_table.iter().map(|e| {
            let last = r.sigma(e.index as usize, (1i64 << e.index) - 1);
            let ok = last.is_some_and(|l| *l == e.sigma.concat(&e.h));
            (ok, format!("h at {}", e.index))
        }),
    );
    let pads = r.tau_map.iter().filter(|e| e.pad > 0).count();
    ledger.record("padding", true, format!("{} padded solutions", pads));
    ledger
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionResult {
    pub stages: usize,
    pub completed: usize,
    pub steps: Vec<SacksShrinkResult>,
    pub ledger: Ledger,
    /// `T_0 = T, T_1, …`; `T_{n+1}` is the output of step `n`.
    #[serde(skip_serializing)]
    pub trees: Vec<TreeSpec>,
}

impl FusionResult {
    pub fn tree(&self) -> &TreeSpec {
        self.trees.last().expect("T_0 is always present")
    }
}

/// Builds `T_{n+1} ⪯_n T_n` for `n < stages`. Step `n` shrinks `T_n`
/// against the witness produced by step `n - 1` (the input witness for
/// `n = 0`), keeping `level(T_n, n)` and running stages `n+1..=stages`.
pub fn sacks_fusion(
    t: &TreeSpec,
    w: &MeagerWitness,
    stages: usize,
    depth: usize,
) -> Result<FusionResult> {
    let mut trees = vec![t.clone()];
    let mut steps: Vec<SacksShrinkResult> = Vec::new();
    let mut ledger = Ledger::new();
    for n in 0..stages {
        let level: Vec<(Word, Word)> = match steps.last() {
            None => vec![(Word::empty(), t.stem(depth)?)],
            Some(prev) => prev.level_taus(n),
        };
        let witness = steps
            .last()
            .map(|s| s.witness.clone())
            .unwrap_or_else(|| w.clone());
        let cur = trees.last().expect("nonempty").clone();
        let res = sacks_shrink_rooted(
            &cur,
            &witness,
            &level,
            n + 1,
            stages,
            depth,
            SacksOptions::default(),
        )?;
        if !res.complete {
            break;
        }
        let check_depth = level.iter().map(|(_, tau)| tau.len()).max().unwrap_or(0);
        let p = truncate(&res.subtree, check_depth, 2);
        let q = truncate(&cur, check_depth, 2);
        let ok = leq_n(&p, &q, n).unwrap_or(false);
        ledger.record(format!("leq_{}", n), ok, format!("depth {}", check_depth));
        trees.push(res.subtree.clone());
        steps.push(res);
    }
    Ok(FusionResult {
        stages,
        completed: steps.len(),
        steps,
        ledger,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::WitnessRule;
    use crate::seq::{Center, FreeSet};
    use crate::trees::{make_full, make_uniform};

    fn seven() -> MeagerWitness {
        MeagerWitness::constant(Word::from([7]))
    }

    #[test]
    fn stage_zero() {
        let r = sacks_shrink_meager(&make_full(), &seven(), 0, 20).unwrap();
        let e = r.tau(&Word::empty()).unwrap();
        assert_eq!(e.tau_prime.len(), 1);
        assert_eq!(
            r.sigma(0, 0).unwrap(),
            &word_add(&Word::from([7]), &e.tau_prime).unwrap()
        );
        assert_eq!(r.h(0).unwrap(), &Word::from([7]));
    }

    #[test]
    fn constant_witness_conditions() {
        let r = sacks_shrink_meager(&make_full(), &seven(), 2, 40).unwrap();
        assert!(r.complete && r.completed == 3);
        assert!(r.ledger.all_pass(), "{:?}", r.ledger);
        assert_eq!(r.tau_map.len(), 1 + 2 + 4);
        assert!(truncate(&r.subtree, 8, 3).is_subset_of(&truncate(&make_full(), 8, 3)));
    }

    #[test]
    fn varying_witnesses() {
        let ws = [
            MeagerWitness::from_rule(WitnessRule::ByLength {
                cycle: vec![Word::from([1]), Word::from([-2, 0]), Word::empty()],
            }),
            MeagerWitness::constant(Word::from([0, 1, 0])),
            MeagerWitness::constant(Word::from([-1, -1])),
        ];
        for w in &ws {
            let r = sacks_shrink_meager(&make_full(), w, 3, 200).unwrap();
            assert!(r.complete, "{:?}", w);
            assert!(r.ledger.all_pass(), "{:?}", r.ledger);
        }
    }

    #[test]
    fn depth_exhaustion_is_partial() {
        let r = sacks_shrink_meager(&make_full(), &seven(), 4, 6).unwrap();
        assert!(!r.complete);
        assert!(r.completed < 5);
        assert!(matches!(
            r.require_complete(),
            Err(Error::DepthExhausted { depth: 6, .. })
        ));
    }

    #[test]
    fn uniform_input_stays_uniform() {
        let u = make_uniform(FreeSet::evens(), Some(2), Center::zero()).unwrap();
        let r = sacks_shrink_with(&u, &seven(), 2, 60, SacksOptions { aligned: true }).unwrap();
        assert!(r.complete && r.ledger.all_pass());
        let d = r.tau_map.iter().map(|e| e.tau.len()).max().unwrap();
        let tr = truncate(&r.subtree, d + 2, 3);
        assert!(tr.is_uniform());
        assert!(tr.is_subset_of(&truncate(&u, d + 2, 3)));
    }

    #[test]
    fn fusion_chain() {
        let f = sacks_fusion(&make_full(), &seven(), 3, 200).unwrap();
        assert_eq!(f.completed, 3);
        assert!(f.ledger.all_pass(), "{:?}", f.ledger);
        for (n, step) in f.steps.iter().enumerate().skip(1) {
            for e in &f.steps[n - 1].h_table {
                assert_eq!(
                    step.witness.eval(&e.sigma).as_ref(),
                    (e.index > n as u64)
                        .then_some(&e.h)
                        .or(step.witness.table.get(&e.sigma))
                );
            }
        }
    }
}

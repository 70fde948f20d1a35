use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::oracle::{self, add, raw, Raw};
use super::{enumerate_window, CheckResult, IdealCert, ScenarioReport, Window};
use crate::error::{Error, Result};
use crate::escape::{
    laver_sum_decompose, m_not_mminus_branch, make_alpha_tree, miller_meager_escape,
    miller_pair_escape, silver_nwd_escape, WordCode,
};
use crate::ideals::{
    cover_to_slalom, meager_from_nwd_sequence, slalom_to_cover, CoverFamily, IntervalCert,
    MeagerWitness, Rational, Slalom, WitnessRule,
};
use crate::seq::{Center, Cuts, FreeSet};
use crate::shrink::{
    fakenull_shrink_perfect, miller_null_subtree, mminus_shrink_perfect, mminus_shrink_silver,
    sacks_fusion, sacks_shrink_meager,
};
use crate::trees::{
    leq_n, make_full, make_laver, make_silver, truncate, SilverSpec, SuccRule, TreeSpec,
};
use crate::words::{enum_index, enum_word, zigzag_rank, zigzag_value, Word};

/// Scenario knobs; unset fields take per-scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fold: Option<usize>,
    /// Number of random instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

type Runner = fn(&Window, &Params, &mut ScenarioReport) -> Result<()>;

const REGISTRY: &[(&str, Runner)] = &[
    ("silver-sum-translate", silver_sum_translate),
    ("laver-full-sum", laver_full_sum),
    ("m-not-mminus", m_not_mminus),
    ("meager-from-nwd", meager_from_nwd),
    ("mminus-perfect", mminus_perfect),
    ("mminus-silver", mminus_silver),
    ("sacks-meager", sacks_meager),
    ("sacks-fusion", sacks_fusion_chain),
    ("miller-meager-escape", miller_meager),
    ("silver-nwd-escape", silver_nwd),
    ("cover-slalom", cover_slalom),
    ("fakenull-shrink", fakenull_shrink),
    ("miller-null", miller_null),
    ("miller-pair-escape", miller_pair),
    ("silver-pair-escape", silver_pair),
];

pub fn scenarios() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

pub fn run_scenario(name: &str, w: &Window, p: &Params) -> Result<ScenarioReport> {
    let run = REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, r)| *r)
        .ok_or_else(|| Error::UnknownScenario(name.into()))?;
    w.validate()?;
    let mut report = ScenarioReport::new(
        name,
        w,
        p.seed,
        serde_json::to_value(p).expect("params serialize"),
    );
    let start = Instant::now();
    run(w, p, &mut report)?;
    report.runtime = start.elapsed();
    Ok(report)
}

/// Keeps the first counterexample of a family of instances.
struct Agg {
    name: String,
    scope: String,
    failure: Option<Value>,
}

impl Agg {
    fn new(name: &str, scope: impl Into<String>) -> Self {
        Agg {
            name: name.into(),
            scope: scope.into(),
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, cx: impl FnOnce() -> Value) {
        if !ok && self.failure.is_none() {
            self.failure = Some(cx());
        }
    }

    fn done(self, r: &mut ScenarioReport) {
        r.push(CheckResult::new(self.name, self.scope, self.failure));
    }
}

fn rng(p: &Params, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(p.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_word(r: &mut ChaCha8Rng, len: usize, b: i64) -> Word {
    Word::new((0..len).map(|_| r.gen_range(-b..=b)).collect())
}

fn random_center(r: &mut ChaCha8Rng) -> Center {
    let prefix = {
        let len = r.gen_range(0..3);
        random_word(r, len, 3)
    }
    .into_vec();
    let cycle = {
        let len = r.gen_range(1..4);
        random_word(r, len, 3)
    }
    .into_vec();
    Center::periodic(prefix, cycle)
}

/// Free sets with at most half of the coordinates free.
fn random_free(r: &mut ChaCha8Rng) -> FreeSet {
    if r.gen_bool(0.5) {
        FreeSet::Progression {
            start: r.gen_range(0..3),
            step: r.gen_range(2..5),
        }
    } else {
        let period = r.gen_range(4..7);
        let mut residues: Vec<u64> = vec![r.gen_range(0..period)];
        let other = r.gen_range(0..period);
        if r.gen_bool(0.5) && other != residues[0] {
            residues.push(other);
        }
        residues.sort();
        FreeSet::Periodic {
            prefix: vec![],
            from: 0,
            period,
            residues,
        }
    }
}

fn random_slalom(
    r: &mut ChaCha8Rng,
    horizon: usize,
    from: usize,
    density: f64,
    per_level: usize,
    b: i64,
) -> Slalom {
    let levels = (0..=horizon)
        .map(|n| {
            if n < from || !r.gen_bool(density) {
                return BTreeSet::new();
            }
            (0..r.gen_range(1..=per_level))
                .map(|_| random_word(r, n, b))
                .collect()
        })
        .collect();
    Slalom::from_levels(levels)
}

fn body(t: &TreeSpec, d: usize, budget: usize) -> BTreeSet<Word> {
    truncate(t, d, budget).body_at_depth()
}

fn raw_set(s: &BTreeSet<Word>) -> BTreeSet<Raw> {
    s.iter().map(raw).collect()
}

fn code_value(sigma: &[i64]) -> Option<i64> {
    enum_index(&Word::new(sigma.to_vec()))
        .to_u128()
        .and_then(zigzag_value)
}

fn sum_check(
    r: &mut ScenarioReport,
    name: String,
    f_set: &BTreeSet<Word>,
    bodies: &[BTreeSet<Word>],
    cert: &IdealCert,
    w: &Window,
) -> Result<()> {
    let mut c = oracle::sum_in_cert(f_set, bodies, cert, w)?;
    c.name = name;
    r.push(c);
    Ok(())
}

fn silver_sum_translate(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let count = p.count.unwrap_or(20);
    let mut g = rng(p, 1);
    let alphabet: BTreeSet<i64> = (0..w.budget as u128).filter_map(zigzag_value).collect();
    let doubled: BTreeSet<i64> = alphabet
        .iter()
        .flat_map(|a| alphabet.iter().map(move |b| a + b))
        .collect();
    let mut identity = Agg::new(
        "sum-identity",
        format!("{} specs, depth {}, budget {}", count, w.d, w.budget),
    );
    let mut member = Agg::new(
        "sums-in-translate",
        "every pairwise sum minus x_T is a node",
    );
    for i in 0..count {
        let spec = SilverSpec::new(random_free(&mut g), random_center(&mut g))?;
        let t = make_silver(spec.clone());
        let b = raw_set(&body(&t, w.d, w.budget));
        let left = oracle::pair_sums(&b, &b);
        let center: Raw = (0..w.d as u64).map(|k| spec.center.value(k)).collect();
        // [T] + x_T with free coordinates read in the doubled alphabet
        let mut right: BTreeSet<Raw> = [vec![]].into_iter().collect();
        for (k, &c) in center.iter().enumerate() {
            let choices: Vec<i64> = if spec.free_set.contains(k as u64) {
                doubled.iter().copied().collect()
            } else {
                vec![2 * c]
            };
            right = right
                .into_iter()
                .flat_map(|v| {
                    choices.iter().map(move |&x| {
                        let mut v = v.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        identity.check(left == right, || {
            json!({
                "spec": i,
                "only_in_sumset": left.difference(&right).next(),
                "only_in_translate": right.difference(&left).next(),
            })
        });
        for z in &left {
            let tnode = oracle::sub(z, &center).map(Word::new);
            member.check(
                tnode.is_some_and(|n| t.contains(&n)),
                || json!({ "spec": i, "sum": z }),
            );
        }
    }
    identity.done(r);
    member.done(r);
    Ok(())
}

fn laver_full_sum(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let count = p.count.unwrap_or(100);
    let mut g = rng(p, 2);
    let scope = format!("{} random targets, depth {}", count, w.d);
    let mut exact = Agg::new("exact-sum", scope.clone());
    let mut nonzero = Agg::new("nonzero-past-stem", scope.clone());
    let mut member = Agg::new("branch-in-tree", scope.clone());
    let mut ledger = Agg::new("ledger", scope);
    for i in 0..count {
        let stem = {
            let len = g.gen_range(0..3);
            random_word(&mut g, len, 3)
        };
        let z = random_word(&mut g, w.d, 5);
        let t = make_laver(stem.clone(), SuccRule::All);
        let tr = laver_sum_decompose(&t, &z, w.d)?;
        let (x, y) = (raw(&tr.x_prefix), raw(&tr.t_prefix));
        let inst = || json!({ "instance": i, "stem": stem, "z": z, "x": x, "y": y });
        exact.check(
            add(&x, &y).as_deref() == Some(z.entries()) && x.len() == w.d,
            inst,
        );
        nonzero.check(x.iter().skip(stem.len()).all(|&v| v != 0), inst);
        member.check(t.contains(&tr.t_prefix), inst);
        ledger.check(
            tr.ledger.all_pass(),
            || json!({ "instance": i, "failures": tr.ledger.failures().collect::<Vec<_>>() }),
        );
    }
    for a in [exact, nonzero, member, ledger] {
        a.done(r);
    }
    Ok(())
}

fn m_not_mminus(_w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let count = p.count.unwrap_or(10);
    let m = p.steps.unwrap_or(5);
    let mut g = rng(p, 3);
    let scope = format!("{} (y, partition) pairs, m = {}", count, m);
    let mut member = Agg::new("branch-in-avoid-tree", scope.clone());
    let mut agree = Agg::new("agreements", scope.clone());
    let mut bound = Agg::new("forbidden-bound", scope.clone());
    let mut ledger = Agg::new("ledger", scope);
    for i in 0..count {
        let y = random_center(&mut g);
        let widths: Vec<u64> = (0..g.gen_range(1..3)).map(|_| g.gen_range(1..4)).collect();
        let cuts = Cuts::Widths {
            prefix: vec![],
            cycle: widths,
        };
        let tr = m_not_mminus_branch(&WordCode::ZigzagIndex, &y, &cuts, m)?;
        let x = raw(&tr.x_prefix);
        let bad = (0..x.len()).find(|&k| code_value(&x[..k]) == Some(x[k]));
        member.check(
            bad.is_none(),
            || json!({ "instance": i, "x": x, "position": bad }),
        );
        let hits = (0..m)
            .filter(|&j| {
                let (a, b) = cuts.interval(2 * j as u64 + 1);
                (a..b).all(|k| (k as usize) < x.len() && x[k as usize] == y.value(k))
            })
            .count();
        agree.check(hits >= m, || json!({ "instance": i, "agreements": hits }));
        for (j, step) in tr.step_log.iter().enumerate() {
            let (a, b) = cuts.interval(2 * j as u64 + 1);
            let (a, b) = (a as usize, b as usize);
            let target: Raw = (a..b).map(|k| y.value(k as u64)).collect();
            // nodes σ of length a after which copying the target hits f
            let forbidden: BTreeSet<Raw> = (a..b)
                .filter_map(|k| {
                    let v = raw(&enum_word(&zigzag_rank(target[k - a]).into()));
                    (v.len() == k && v[a..] == target[..k - a]).then(|| v[..a].to_vec())
                })
                .collect();
            let ok = forbidden.len() <= b - a + 1
                && step.forbidden_words.len() <= b - a + 1
                && !forbidden.contains(&raw(&step.chosen));
            bound.check(ok, || json!({ "instance": i, "step": j, "forbidden": forbidden, "chosen": step.chosen }));
        }
        ledger.check(tr.ledger.all_pass(), || json!({ "instance": i }));
    }
    for a in [member, agree, bound, ledger] {
        a.done(r);
    }
    Ok(())
}

fn meager_from_nwd(w: &Window, _p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let horizon = 2000;
    let fs = vec![
        MeagerWitness::constant(Word::from([2])),
        MeagerWitness::constant(Word::from([-2, 1])),
        MeagerWitness::from_rule(WitnessRule::ByLength {
            cycle: vec![Word::from([1]), Word::from([0, -1])],
        }),
    ];
    let combined = meager_from_nwd_sequence(&fs, horizon)?;
    let cert = IdealCert::Meager {
        witness: combined.witness.clone(),
        upto: Some(horizon),
    };
    let words: Vec<Word> = enumerate_window(w)?.collect();
    for (k, f) in fs.iter().enumerate() {
        let nwd: BTreeSet<Word> = words
            .iter()
            .filter(|x| oracle::meager_hit(f, x.entries(), 0, None).is_none())
            .cloned()
            .collect();
        let wk = Window { n: k as u64, ..*w };
        sum_check(r, format!("union-member[{}]", k), &nwd, &[], &cert, &wk)?;
    }
    Ok(())
}

fn mminus_instance(w: &Window, g: &mut ChaCha8Rng) -> Result<IntervalCert> {
    let center = Center::periodic(
        vec![],
        {
            let len = g.gen_range(1..4);
            random_word(g, len, 2)
        }
        .into_vec(),
    );
    Ok(IntervalCert::cofinite(
        center,
        Cuts::uniform(g.gen_range(1..3)),
        g.gen_range(0..2).min(w.d as u64),
    ))
}

fn interval_window_check(
    r: &mut ScenarioReport,
    label: &str,
    c: &IntervalCert,
    out: &IntervalCert,
    t: &TreeSpec,
    n: usize,
    w: &Window,
) -> Result<()> {
    let f_set: BTreeSet<Word> = enumerate_window(w)?
        .filter(|x| oracle::interval_escape(c, x.entries()).is_none())
        .collect();
    let b = body(t, w.d, w.budget);
    let bodies = vec![b; n];
    sum_check(
        r,
        format!("{}:sum-in-cert", label),
        &f_set,
        &bodies,
        &IdealCert::Interval { cert: out.clone() },
        w,
    )
}

fn mminus_perfect(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let n = p.n_fold.unwrap_or(2);
    let mut g = rng(p, 5);
    let full = make_full();
    for i in 0..p.count.unwrap_or(3) {
        let c = mminus_instance(w, &mut g)?;
        let res = mminus_shrink_perfect(&full, &c, n, w.d.max(32))?;
        let label = format!("mminus-perfect[{}]", i);
        r.push_ledger(&label, &res.ledger);
        let sub = truncate(&res.subtree, w.d, w.budget);
        r.push(CheckResult::new(
            format!("{}:subtree", label),
            "truncation inclusion",
            (!sub.is_subset_of(&truncate(&full, w.d, w.budget))).then(|| json!({ "instance": i })),
        ));
        interval_window_check(r, &label, &c, &res.cert, &res.subtree, n, w)?;
    }
    Ok(())
}

fn mminus_silver(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let n = p.n_fold.unwrap_or(2);
    let mut g = rng(p, 6);
    for i in 0..p.count.unwrap_or(3) {
        let spec = SilverSpec::new(FreeSet::evens(), random_center(&mut g))?;
        let c = mminus_instance(w, &mut g)?;
        let res = mminus_shrink_silver(&spec, &c, n, w.d.max(32))?;
        let label = format!("mminus-silver[{}]", i);
        let inside = (0..w.d as u64 * 4)
            .all(|k| !res.spec.free_set.contains(k) || spec.free_set.contains(k))
            && res.spec.center == spec.center;
        r.push(CheckResult::new(
            format!("{}:subtree", label),
            "free set inclusion and center",
            (!inside).then(|| json!({ "instance": i })),
        ));
        interval_window_check(
            r,
            &label,
            &c,
            &res.cert,
            &make_silver(res.spec.clone()),
            n,
            w,
        )?;
    }
    Ok(())
}

fn sacks_witnesses() -> Vec<MeagerWitness> {
    vec![
        MeagerWitness::constant(Word::from([7])),
        MeagerWitness::constant(Word::from([2, -1])),
        MeagerWitness::from_rule(WitnessRule::ByLength {
            cycle: vec![Word::from([5]), Word::from([-2, 6])],
        }),
    ]
}

pub(crate) const SACKS_DEPTH: usize = 1 << 13;

fn sacks_meager(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let n_max = p.steps.unwrap_or(4);
    let full = make_full();
    for (i, f) in sacks_witnesses().iter().enumerate() {
        let res = sacks_shrink_meager(&full, f, n_max, SACKS_DEPTH)?.require_complete()?;
        let label = format!("sacks[{}]", i);
        r.push_ledger(&label, &res.ledger);
        let mut c = oracle::sacks_avoidance(&res, f, w)?;
        c.name = format!("{}:iv", label);
        r.push(c);
        let f_set: BTreeSet<Word> = enumerate_window(w)?
            .filter(|x| oracle::meager_hit(f, x.entries(), w.n, None).is_none())
            .collect();
        let bodies = vec![body(&res.subtree, w.d, 2)];
        let cert = IdealCert::Meager {
            witness: res.witness.clone(),
            upto: Some(n_max as u64),
        };
        sum_check(
            r,
            format!("{}:sum-in-cert", label),
            &f_set,
            &bodies,
            &cert,
            w,
        )?;
    }
    Ok(())
}

fn sacks_fusion_chain(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let stages = p.steps.unwrap_or(3);
    let full = make_full();
    let f = MeagerWitness::constant(Word::from([7]));
    let res = sacks_fusion(&full, &f, stages, SACKS_DEPTH)?;
    r.push_ledger("fusion", &res.ledger);
    r.push(CheckResult::new(
        "completed",
        format!("{} stages", stages),
        (res.completed != stages).then(|| json!({ "completed": res.completed })),
    ));
    let mut chain = Agg::new("leq-chain", "T_{n+1} ⪯_n T_n on budget-2 truncations");
    let mut handoff = Agg::new(
        "witness-handoff",
        "step n+1 starts from the witness of step n",
    );
    for n in 0..res.completed {
        let depth = match n {
            0 => full.stem(SACKS_DEPTH)?.len(),
            _ => res.steps[n - 1]
                .level_taus(n)
                .iter()
                .map(|(_, t)| t.len())
                .max()
                .unwrap_or(0),
        };
        let ok = leq_n(
            &truncate(&res.trees[n + 1], depth, 2),
            &truncate(&res.trees[n], depth, 2),
            n,
        )
        .unwrap_or(false);
        chain.check(ok, || json!({ "n": n, "depth": depth }));
        if n > 0 {
            let (prev, cur) = (&res.steps[n - 1].witness, &res.steps[n].witness);
            let own: BTreeSet<&Word> = res.steps[n].h_table.iter().map(|e| &e.sigma).collect();
            let kept = prev
                .table
                .iter()
                .all(|(k, v)| own.contains(k) || cur.table.get(k) == Some(v));
            handoff.check(kept && prev.rule == cur.rule, || json!({ "n": n }));
        }
    }
    chain.done(r);
    handoff.done(r);
    let last = truncate(res.tree(), w.d, 2);
    r.push(CheckResult::new(
        "body-inclusion",
        format!("depth {}", w.d),
        (!last.is_subset_of(&truncate(&full, w.d, 2))).then(|| json!({})),
    ));
    Ok(())
}

fn meager_escape_witnesses() -> Vec<MeagerWitness> {
    vec![
        MeagerWitness::constant(Word::from([0, 0])),
        MeagerWitness::from_rule(WitnessRule::ByLength {
            cycle: vec![Word::from([1]), Word::from([0, 0, -1])],
        }),
    ]
}

fn miller_meager(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let steps = p.steps.unwrap_or(6);
    let b = w.budget.max(2);
    let tp = make_alpha_tree(WordCode::ZigzagIndex, 2, b)?;
    let tr2 = truncate(&tp, 2, b);
    let expected = 1 + b + b * b;
    let all_omega = tr2
        .nodes
        .iter()
        .filter(|n| n.len() < 2)
        .all(|n| tr2.omega.contains(n));
    r.push(CheckResult::new(
        "alpha-tree",
        format!("depth 2, budget {}", b),
        (tr2.len() != expected || !all_omega)
            .then(|| json!({ "nodes": tr2.len(), "expected": expected })),
    ));
    for (i, h) in meager_escape_witnesses().iter().enumerate() {
        let tr = miller_meager_escape(&tp, h, steps)?;
        let label = format!("miller-meager[{}]", i);
        r.push_ledger(&label, &tr.ledger);
        let (xi, tau) = (raw(&tr.x_prefix), raw(&tr.t_prefix));
        let sum = add(&xi, &tau).unwrap_or_default();
        let mut oc = Agg::new(&format!("{}:oracle", label), format!("{} steps", steps));
        oc.check(xi.iter().all(|&v| v != 0), || json!({ "zero_in": xi }));
        oc.check(tp.contains(&tr.t_prefix), || json!({ "tau": tau }));
        for s in &tr.step_log {
            let anchor = s.anchor.clone().unwrap_or_default();
            let pat = h.pattern(&anchor).map(|p| raw(&p));
            oc.check(
                pat.as_ref().is_some_and(|p| sum.starts_with(p)),
                || json!({ "step": s.step }),
            );
        }
        oc.done(r);
        let again = miller_meager_escape(&tp, h, steps)?;
        let same = serde_json::to_string(&again).ok() == serde_json::to_string(&tr).ok();
        r.push(CheckResult::new(
            format!("{}:determinism", label),
            "two runs",
            (!same).then(|| json!({})),
        ));
    }
    Ok(())
}

fn silver_nwd(_w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let steps = p.steps.unwrap_or(6);
    let mut g = rng(p, 10);
    let mut specs = vec![SilverSpec::new(FreeSet::evens(), Center::zero())?];
    for _ in 1..p.count.unwrap_or(3) {
        specs.push(SilverSpec::new(random_free(&mut g), random_center(&mut g))?);
    }
    for (i, spec) in specs.iter().enumerate() {
        for (j, h) in meager_escape_witnesses().iter().enumerate() {
            let tr = silver_nwd_escape(spec, h, steps)?;
            let label = format!("silver-nwd[{},{}]", i, j);
            r.push_ledger(&label, &tr.ledger);
            let (x, t) = (raw(&tr.x_prefix), raw(&tr.t_prefix));
            let sum = add(&x, &t).unwrap_or_default();
            let mut oc = Agg::new(
                &format!("{}:oracle", label),
                format!("{} steps, |x| = {}", steps, x.len()),
            );
            for jx in 0..x.len() {
                let k = enum_index(&Word::new(x[..jx].to_vec()))
                    .to_usize()
                    .unwrap_or(usize::MAX);
                if k >= 1 && k <= x.len() - jx {
                    oc.check(
                        x[jx..jx + k].iter().any(|&v| v != 0),
                        || json!({ "prefix_len": jx, "k": k }),
                    );
                }
            }
            for (k, &v) in t.iter().enumerate() {
                oc.check(
                    spec.free_set.contains(k as u64) || v == spec.center.value(k as u64),
                    || json!({ "coord": k }),
                );
            }
            for s in &tr.step_log {
                let anchor = raw(s.anchor.as_ref().expect("anchored"));
                let c: Raw = (0..anchor.len() as u64)
                    .map(|k| spec.center.value(k))
                    .collect();
                let pat = add(&anchor, &c)
                    .and_then(|a| h.pattern(&Word::new(a)))
                    .map(|p| raw(&p));
                oc.check(
                    pat.as_ref().is_some_and(|p| sum.starts_with(p)),
                    || json!({ "step": s.step }),
                );
            }
            oc.done(r);
            let again = silver_nwd_escape(spec, h, steps)?;
            let same = serde_json::to_string(&again).ok() == serde_json::to_string(&tr).ok();
            r.push(CheckResult::new(
                format!("{}:determinism", label),
                "two runs",
                (!same).then(|| json!({})),
            ));
        }
    }
    Ok(())
}

fn cover_slalom(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let horizon = p.steps.unwrap_or(8);
    let mut g = rng(p, 11);
    let families: Vec<CoverFamily> = (0..6)
        .map(|j| {
            // three generators of length >= j + 2 keep the mass below 1/2^j
            let gens = (0..g.gen_range(1..=3))
                .map(|_| {
                    let len = g.gen_range(j + 2..=horizon.max(j + 2));
                    random_word(&mut g, len, 2)
                })
                .collect();
            CoverFamily::new(gens)
        })
        .collect();
    let conv = cover_to_slalom(&families, horizon)?;
    let mut bound = Agg::new("level-bound", format!("n <= {}", horizon));
    for n in 0..=horizon {
        let limit = (1u128 << (n + 1)) - 1;
        let size = conv.slalom.level(n).len() as u128;
        let stated = conv.bounds.get(n).map(|b| b.bound.clone());
        bound.check(
            size < limit && stated == Some(limit.to_string()),
            || json!({ "n": n, "size": size, "bound": limit, "stated": stated }),
        );
    }
    bound.done(r);
    let words: Vec<Word> = enumerate_window(w)?.collect();
    let mut agree = Agg::new(
        "cover-to-slalom-agreement",
        format!("exhaustive over window {}", w),
    );
    for x in &words {
        let e = x.entries();
        let covered = families
            .iter()
            .flat_map(|f| &f.generators)
            .any(|gen| gen.len() <= e.len() && gen.entries() == &e[..gen.len()]);
        let hit = oracle::slalom_hit(&conv.slalom, e, 0).is_some();
        agree.check(
            covered == hit,
            || json!({ "x": e, "cover": covered, "slalom": hit }),
        );
    }
    agree.done(r);
    let s = random_slalom(&mut g, horizon, 1, 0.6, 2, 2);
    let mut back = Agg::new(
        "slalom-to-cover-agreement",
        format!("tails n < {}, window {}", w.d, w),
    );
    for n0 in 0..w.d {
        let fam = slalom_to_cover(&s, n0, w.d)?;
        let tail: Rational = (n0 + 1..=w.d.min(horizon))
            .map(|k| Rational::dyadic(s.level(k).len(), k))
            .sum();
        back.check(
            fam.mass == tail,
            || json!({ "n": n0, "mass": fam.mass.to_string(), "tail": tail.to_string() }),
        );
        for x in &words {
            let e = x.entries();
            let covered = fam
                .generators
                .iter()
                .any(|gen| gen.entries() == &e[..gen.len()]);
            let hit = oracle::slalom_hit(&s, e, n0 + 1).is_some();
            back.check(covered == hit, || json!({ "n": n0, "x": e }));
        }
    }
    back.done(r);
    Ok(())
}

/// Input slaloms for the fake-null shrink.
pub fn fakenull_inputs(p: &Params, horizon: usize) -> Vec<Slalom> {
    let mut g = rng(p, 12);
    (0..p.count.unwrap_or(5))
        .map(|_| random_slalom(&mut g, horizon, 2, 0.5, 2, 1))
        .collect()
}

fn fakenull_shrink(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let horizon = p.steps.unwrap_or(8);
    let n_fold = p.n_fold.unwrap_or(2);
    let full = make_full();
    let words: Vec<Word> = enumerate_window(w)?.collect();
    for (i, s) in fakenull_inputs(p, horizon).iter().enumerate() {
        let res = fakenull_shrink_perfect(&full, s, horizon)?;
        let label = format!("fakenull[{}]", i);
        r.push_ledger(&label, &res.ledger);
        let tr = truncate(&res.subtree, horizon, 2);
        let nodes: Vec<BTreeSet<Raw>> = (0..=horizon)
            .map(|n| tr.nodes.iter().filter(|x| x.len() == n).map(raw).collect())
            .collect();
        let mut c = oracle::derived_levels_check(s, &res.plan.k_seq, &nodes, &res.slalom);
        c.name = format!("{}:derived-levels", label);
        r.push(c);
        let mut bound = Agg::new(
            &format!("{}:level-bound", label),
            format!("n <= {}", horizon),
        );
        for n in 0..=horizon {
            let k = res.plan.k(n) as usize;
            let lim = num_bigint::BigUint::from(s.level(n).len()) << k.pow(3);
            bound.check(
                num_bigint::BigUint::from(res.slalom.level(n).len()) <= lim,
                || json!({ "n": n }),
            );
        }
        bound.done(r);
        let k = &res.plan.k_seq;
        let mut m = vec![0usize];
        while let Some(next) = (m[m.len() - 1] + 1..k.len()).find(|&j| k[j] > k[m[m.len() - 1]]) {
            m.push(next);
        }
        r.push(CheckResult::new(
            format!("{}:m-recurrence", label),
            format!("k = {:?}", k),
            (m != res.plan.m_seq).then(|| json!({ "expected": m, "plan": res.plan.m_seq })),
        ));
        let mut total = Rational::zero();
        let mut weighted = Agg::new(&format!("{}:weighted-total", label), "running totals");
        for (n, claimed) in res.plan.weighted.iter().enumerate() {
            let kn = res.plan.k(n) as usize;
            total += Rational::dyadic(num_bigint::BigUint::from(s.level(n).len()) << kn.pow(3), n);
            weighted.check(
                &total == claimed,
                || json!({ "n": n, "expected": total.to_string() }),
            );
        }
        weighted.done(r);
        let b = body(&res.subtree, w.d, 2);
        for j in 1..=n_fold {
            let hits = |x: &Word| {
                (w.n as usize..=w.d.min(horizon))
                    .any(|m| res.plan.k(m) as usize >= j && s.level(m).contains(&x.restrict(m)))
            };
            let f_set: BTreeSet<Word> = words.iter().filter(|x| hits(x)).cloned().collect();
            let bodies = vec![b.clone(); j];
            let cert = IdealCert::Slalom {
                slalom: res.slalom.clone(),
            };
            sum_check(
                r,
                format!("{}:sum-in-cert[{}]", label, j),
                &f_set,
                &bodies,
                &cert,
                w,
            )?;
        }
    }
    Ok(())
}

fn miller_null(w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let k_max = p.steps.unwrap_or(5);
    let res = miller_null_subtree(&make_full(), 2 * k_max)?;
    r.push_ledger("miller-null", &res.ledger);
    let mut bound = Agg::new("level-bound", format!("k <= {}", k_max));
    for n in 0..=2 * k_max {
        let size = res.slalom.level(n).len();
        let ok = if n % 2 == 1 {
            size == 0
        } else {
            size <= 1 << (n / 2)
        };
        bound.check(ok, || json!({ "n": n, "size": size }));
    }
    bound.done(r);
    let mass: Rational = res
        .slalom
        .levels
        .iter()
        .enumerate()
        .map(|(n, l)| Rational::dyadic(l.len(), n))
        .sum();
    r.push(CheckResult::new(
        "mass",
        "Σ |S_n|/2^n <= 2",
        (mass > Rational::from_int(2)).then(|| json!({ "mass": mass.to_string() })),
    ));
    let depth = 2 * k_max;
    let tr = truncate(&res.subtree, depth, w.budget.max(2));
    let mut hits = Agg::new(
        "branch-hits",
        format!("{} branches at depth {}", tr.body_at_depth().len(), depth),
    );
    for t in tr.body_at_depth() {
        let longest = res
            .taus
            .iter()
            .filter(|(_, tau)| tau.len() <= depth && tau.is_prefix_of(&t))
            .max_by_key(|(s, _)| s.len());
        let Some((sigma, _)) = longest else {
            hits.check(false, || json!({ "branch": t, "reason": "no τ below" }));
            continue;
        };
        for &k in sigma {
            let k = k as usize;
            if 2 * k <= depth {
                hits.check(
                    res.slalom.level(2 * k).contains(&t.restrict(2 * k)),
                    || json!({ "branch": t, "k": k }),
                );
            }
        }
    }
    hits.done(r);
    Ok(())
}

fn pair_scan(
    r: &mut ScenarioReport,
    label: &str,
    t1: &TreeSpec,
    t2: &TreeSpec,
    s: &Slalom,
    steps: usize,
) -> Result<()> {
    let tr = miller_pair_escape(t1, t2, s, steps)?;
    r.push_ledger(label, &tr.ledger);
    let sp = tr.s_prefix.clone().unwrap_or_default();
    let z = add(sp.entries(), tr.t_prefix.entries()).unwrap_or_default();
    let mut scan = Agg::new(
        &format!("{}:full-scan", label),
        format!("0 < k <= {}", z.len()),
    );
    scan.check(
        z == raw(&tr.x_prefix) && !z.is_empty(),
        || json!({ "reason": "sum mismatch" }),
    );
    scan.check(
        t1.contains(&sp) && t2.contains(&tr.t_prefix),
        || json!({ "reason": "branch outside tree" }),
    );
    if let Some(k) = oracle::slalom_hit(s, &z, 1) {
        scan.check(false, || json!({ "level": k, "sum": z }));
    }
    scan.done(r);
    Ok(())
}

fn miller_pair(_w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let steps = p.steps.unwrap_or(6);
    let null = miller_null_subtree(&make_full(), 10)?;
    let alpha = make_alpha_tree(WordCode::ZigzagIndex, 2, 3)?;
    pair_scan(r, "pair[null]", &null.subtree, &alpha, &null.slalom, steps)?;
    let mut g = rng(p, 14);
    for i in 0..p.count.unwrap_or(5) {
        let s = random_slalom(&mut g, 24, 1, 0.5, 3, 2);
        pair_scan(r, &format!("pair[{}]", i), &null.subtree, &alpha, &s, steps)?;
    }
    Ok(())
}

fn silver_pair(_w: &Window, p: &Params, r: &mut ScenarioReport) -> Result<()> {
    let steps = p.steps.unwrap_or(6);
    let null = miller_null_subtree(&make_full(), 10)?;
    let mut g = rng(p, 15);
    for i in 0..p.count.unwrap_or(3) {
        let spec = SilverSpec::new(random_free(&mut g), random_center(&mut g))?;
        let silver = make_silver(spec);
        pair_scan(
            r,
            &format!("silver-pair[{}]", i),
            &silver,
            &null.subtree,
            &null.slalom,
            steps,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario() {
        let err = run_scenario("nope", &Window::new(1, 2, 2, 0), &Params::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownScenario(_)));
    }

    #[test]
    fn registry_is_complete() {
        assert_eq!(scenarios().len(), 15);
    }

    #[test]
    fn small_runs_pass() {
        let w = Window::new(1, 4, 2, 0);
        for name in [
            "laver-full-sum",
            "m-not-mminus",
            "miller-null",
            "silver-sum-translate",
        ] {
            let p = Params {
                count: Some(3),
                steps: Some(3),
                ..Params::default()
            };
            let rep = run_scenario(name, &w, &p).unwrap();
            assert!(
                rep.all_pass(),
                "{}: {:?}",
                name,
                rep.failures().collect::<Vec<_>>()
            );
        }
    }
}

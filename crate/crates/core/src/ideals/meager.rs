use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{Center, Cuts};
use crate::words::{enum_index, enum_word_u64, word_sub, Word};

/// Closed-form part of a witness `f : ℤ^{<ω} → ℤ^{<ω}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum WitnessRule {
    /// `f(σ) = value`.
    Constant { value: Word },
    /// `f(σ) = cycle[|σ| mod len]`.
    ByLength { cycle: Vec<Word> },
    /// `f(σ_n) = 0^n` under the canonical enumeration.
    IndexZeros,
    /// `f(σ) = center↾[|σ|, end of the first interval starting at or after |σ|)`.
    IntervalPattern { center: Center, cuts: Cuts },
    /// `f(σ) = g(σ + c↾|σ|) - c↾[|σ|, |σ| + |g(..)|)`.
    Translated {
        base: Box<MeagerWitness>,
        center: Center,
    },
}

/// A witness for the meager set `{x : (∀^∞ σ)(σ⌢f(σ) ⊄ x)}`.
///
/// Table entries override the rule. Indices below `from_index` are never
/// reported as hits, whatever the caller's threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeagerWitness {
    pub rule: WitnessRule,
    #[serde(with = "table_entries", default)]
    pub table: BTreeMap<Word, Word>,
    #[serde(default)]
    pub from_index: u64,
}

mod table_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::words::Word;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        sigma: Word,
        value: Word,
    }

    pub fn serialize<S: Serializer>(t: &BTreeMap<Word, Word>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = t
            .iter()
            .map(|(k, v)| Entry {
                sigma: k.clone(),
                value: v.clone(),
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Word, Word>, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(v.into_iter().map(|e| (e.sigma, e.value)).collect())
    }
}

/// Patterns longer than this are treated as never fitting inside a window.
const MAX_PATTERN: u64 = 1 << 24;

impl MeagerWitness {
    pub fn from_rule(rule: WitnessRule) -> Self {
        MeagerWitness {
            rule,
            table: BTreeMap::new(),
            from_index: 0,
        }
    }

    pub fn constant(value: Word) -> Self {
        Self::from_rule(WitnessRule::Constant { value })
    }

    pub fn index_zeros() -> Self {
        Self::from_rule(WitnessRule::IndexZeros)
    }

    pub fn with_table(mut self, table: BTreeMap<Word, Word>) -> Self {
        self.table.extend(table);
        self
    }

    pub fn with_from_index(mut self, n: u64) -> Self {
        self.from_index = n;
        self
    }

    /// `f(σ)`, or `None` when the value is too long to matter in any window.
    pub fn eval(&self, sigma: &Word) -> Option<Word> {
        if let Some(v) = self.table.get(sigma) {
            return Some(v.clone());
        }
        match &self.rule {
            WitnessRule::Constant { value } => Some(value.clone()),
            WitnessRule::ByLength { cycle } => Some(cycle[sigma.len() % cycle.len()].clone()),
            WitnessRule::IndexZeros => {
                let n = enum_index(sigma).to_u64().filter(|&n| n <= MAX_PATTERN)?;
                Some(Word::zeros(n as usize))
            }
            WitnessRule::IntervalPattern { center, cuts } => {
                let l = sigma.len() as u64;
                let mut j = cuts.interval_of(l);
                if cuts.cut(j) < l {
                    j += 1;
                }
                Some(center.segment(l, cuts.cut(j + 1)))
            }
            WitnessRule::Translated { base, center } => {
                let c = center.prefix(sigma.len());
                let shifted = sigma.add(&c).ok()?;
                let g = base.eval(&shifted)?;
                let seg = center.segment(sigma.len() as u64, (sigma.len() + g.len()) as u64);
                word_sub(&g, &seg).ok()
            }
        }
    }

    /// `σ⌢f(σ)`.
    pub fn pattern(&self, sigma: &Word) -> Option<Word> {
        self.eval(sigma).map(|v| sigma.concat(&v))
    }

    pub fn validate(&self) -> Result<()> {
        match &self.rule {
            WitnessRule::ByLength { cycle } if cycle.is_empty() => Err(Error::Invalid(
                "by-length witness needs a nonempty cycle".into(),
            )),
            WitnessRule::IntervalPattern { center, cuts } => {
                center.validate()?;
                cuts.validate()
            }
            WitnessRule::Translated { base, center } => {
                base.validate()?;
                center.validate()
            }
            _ => Ok(()),
        }
    }
}

/// Finite-horizon verdict of [`meager_member`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum MeagerVerdict {
    /// No qualifying `σ_n⌢f(σ_n) ⊆ x` with `n` in the checked range.
    Avoids {
        threshold: String,
        checked: usize,
        unchecked: usize,
        prefix_len: usize,
    },
    Hits {
        index: String,
        sigma: Word,
    },
}

impl MeagerVerdict {
    pub fn is_hit(&self) -> bool {
        matches!(self, MeagerVerdict::Hits { .. })
    }
}

/// Looks for the least `n >= max(N, from_index)` with `σ_n⌢f(σ_n) ⊆ x`.
///
/// Only prefixes of `x` can qualify, and they are scanned in increasing
/// length, which is increasing enumeration index.
pub fn meager_member(w: &MeagerWitness, x: &Word, threshold: &BigUint) -> Result<MeagerVerdict> {
    let lower = threshold.max(&BigUint::from(w.from_index)).clone();
    let mut checked = 0;
    let mut unchecked = 0;
    for l in 0..=x.len() {
        let sigma = x.restrict(l);
        let idx = enum_index(&sigma);
        if idx < lower {
            continue;
        }
        match w.pattern(&sigma) {
            Some(p) if p.len() <= x.len() => {
                checked += 1;
                if p.is_prefix_of(x) {
                    return Ok(MeagerVerdict::Hits {
                        index: idx.to_string(),
                        sigma,
                    });
                }
            }
            _ => unchecked += 1,
        }
    }
    if checked == 0 {
        return Err(Error::InsufficientPrefix(format!(
            "no σ_n with n >= {} has σ_n⌢f(σ_n) inside a prefix of length {}",
            lower,
            x.len()
        )));
    }
    Ok(MeagerVerdict::Avoids {
        threshold: lower.to_string(),
        checked,
        unchecked,
        prefix_len: x.len(),
    })
}

/// Report of [`meager_from_nwd_sequence`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combined {
    pub witness: MeagerWitness,
    /// `(n, σ)` pairs where `f_{n-1}(σ) ⊄ f_n(σ)` forced monotonization.
    pub monotonized: Vec<(usize, Word)>,
}

/// `f(σ_n) = f_n(σ_n)` for `n <= horizon`; later indices use the last `f_n`.
///
/// When `f_{n-1}(σ) ⊄ f_n(σ)` the sequence is replaced by the running
/// extension `g_n(σ) = g_{n-1}(σ)⌢f_n(σ⌢g_{n-1}(σ))`, which keeps every
/// `g_n` a witness for `F_0 ∪ … ∪ F_n`.
pub fn meager_from_nwd_sequence(fs: &[MeagerWitness], horizon: u64) -> Result<Combined> {
    let last = fs
        .last()
        .ok_or_else(|| Error::Invalid("empty witness sequence".into()))?;
    let mut table = BTreeMap::new();
    let mut monotonized = Vec::new();
    for n in 0..=horizon {
        let sigma = enum_word_u64(n);
        let upto = (n as usize).min(fs.len() - 1);
        let eval = |k: usize, s: &Word| {
            fs[k]
                .eval(s)
                .ok_or_else(|| Error::Invalid(format!("f_{} undefined at {}", k, s)))
        };
        let mut g = eval(0, &sigma)?;
        for k in 1..=upto {
            let fk = eval(k, &sigma)?;
            if g.is_prefix_of(&fk) {
                g = fk;
            } else {
                monotonized.push((k, sigma.clone()));
                let ext = eval(k, &sigma.concat(&g))?;
                g = g.concat(&ext);
            }
        }
        table.insert(sigma, g);
    }
    monotonized.sort();
    monotonized.dedup();
    let witness = MeagerWitness {
        rule: last.rule.clone(),
        table,
        from_index: 0,
    };
    Ok(Combined {
        witness,
        monotonized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> BigUint {
        BigUint::from(0u32)
    }

    #[test]
    fn constant_seven_avoids_zero_prefix() {
        let w = MeagerWitness::constant(Word::from([7]));
        let v = meager_member(&w, &Word::zeros(6), &zero()).unwrap();
        assert!(!v.is_hit());
    }

    #[test]
    fn empty_sigma_hits_at_zero() {
        let w = MeagerWitness::constant(Word::from([0]));
        let v = meager_member(&w, &Word::from([0, 5]), &zero()).unwrap();
        assert_eq!(
            v,
            MeagerVerdict::Hits {
                index: "0".into(),
                sigma: Word::empty()
            }
        );
    }

    #[test]
    fn insufficient_prefix() {
        let w = MeagerWitness::constant(Word::from([1, 2, 3]));
        assert!(matches!(
            meager_member(&w, &Word::from([1]), &zero()),
            Err(Error::InsufficientPrefix(_))
        ));
    }

    #[test]
    fn from_index_raises_threshold() {
        let w = MeagerWitness::constant(Word::from([0])).with_from_index(1);
        let v = meager_member(&w, &Word::from([0, 0]), &zero()).unwrap();
        assert_eq!(
            v,
            MeagerVerdict::Hits {
                index: "1".into(),
                sigma: Word::from([0])
            }
        );
    }

    #[test]
    fn sequence_example() {
        let fs = [
            MeagerWitness::constant(Word::from([0])),
            MeagerWitness::constant(Word::from([0, 0])),
        ];
        let c = meager_from_nwd_sequence(&fs, 1).unwrap();
        assert_eq!(c.witness.eval(&Word::empty()), Some(Word::from([0])));
        assert_eq!(c.witness.eval(&Word::from([0])), Some(Word::from([0, 0])));
        assert!(c.monotonized.is_empty());
        let single = meager_from_nwd_sequence(&fs[..1], 5).unwrap();
        for n in 0..6 {
            assert_eq!(
                single.witness.eval(&enum_word_u64(n)),
                Some(Word::from([0]))
            );
        }
    }

    #[test]
    fn sequence_monotonization_flagged() {
        let fs = [
            MeagerWitness::constant(Word::from([1])),
            MeagerWitness::constant(Word::from([2])),
        ];
        let c = meager_from_nwd_sequence(&fs, 3).unwrap();
        assert_eq!(c.monotonized.len(), 3);
        assert_eq!(c.witness.eval(&Word::from([0])), Some(Word::from([1, 2])));
    }

    #[test]
    fn interval_pattern_values() {
        let w = MeagerWitness::from_rule(WitnessRule::IntervalPattern {
            center: Center::periodic(vec![], vec![1, 2, 3]),
            cuts: Cuts::uniform(2),
        });
        // |σ| = 1: next interval starts at 2, so f = center↾[1,4)
        assert_eq!(w.eval(&Word::from([9])), Some(Word::from([2, 3, 1])));
        assert_eq!(w.eval(&Word::from([9, 9])), Some(Word::from([3, 1])));
    }

    #[test]
    fn translated_rule() {
        let base = MeagerWitness::constant(Word::from([5, 5]));
        let c = Center::constant(2);
        let w = MeagerWitness::from_rule(WitnessRule::Translated {
            base: Box::new(base),
            center: c,
        });
        assert_eq!(w.eval(&Word::from([0])), Some(Word::from([3, 3])));
    }

    #[test]
    fn json_round_trip() {
        let mut t = BTreeMap::new();
        t.insert(Word::from([1]), Word::from([2, 3]));
        let w = MeagerWitness::index_zeros().with_table(t);
        let s = serde_json::to_string(&w).unwrap();
        let back: MeagerWitness = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::mass::Rational;
use crate::error::{Error, Result};
use crate::words::Word;

/// Declared bound on the tail `Σ_{k>n} |S_k|/2^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TailRule {
    /// Levels beyond the horizon are empty; the tail is `mass_bound - Σ_{k<=n}`.
    Finite,
    /// `tail(n) <= coef · ratio^⌊(n+1)/step⌋`.
    Geometric {
        coef: Rational,
        ratio: Rational,
        #[serde(default = "one")]
        step: u32,
    },
}

fn one() -> u32 {
    1
}

/// `(S_n : n <= horizon)` with `S_n ⊆ ℤ^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slalom {
    pub levels: Vec<BTreeSet<Word>>,
    pub mass_bound: Rational,
    pub tail: TailRule,
}

impl Slalom {
    pub fn empty(horizon: usize) -> Self {
        Slalom {
            levels: vec![BTreeSet::new(); horizon + 1],
            mass_bound: Rational::zero(),
            tail: TailRule::Finite,
        }
    }

    /// A slalom with bound equal to its exact finite mass.
    pub fn from_levels(levels: Vec<BTreeSet<Word>>) -> Self {
        let mut s = Slalom {
            levels,
            mass_bound: Rational::zero(),
            tail: TailRule::Finite,
        };
        s.mass_bound = slalom_mass(&s, s.horizon());
        s
    }

    pub fn horizon(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn level(&self, n: usize) -> &BTreeSet<Word> {
        static EMPTY: BTreeSet<Word> = BTreeSet::new();
        self.levels.get(n).unwrap_or(&EMPTY)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, lvl) in self.levels.iter().enumerate() {
            if let Some(w) = lvl.iter().find(|w| w.len() != n) {
                return Err(Error::Invalid(format!(
                    "slalom level {} holds {} of length {}",
                    n,
                    w,
                    w.len()
                )));
            }
        }
        for d in 0..self.levels.len() {
            let m = slalom_mass(self, d);
            if m > self.mass_bound {
                return Err(Error::Invalid(format!(
                    "partial mass {} at {} exceeds declared bound {}",
                    m, d, self.mass_bound
                )));
            }
        }
        Ok(())
    }

    /// Declared upper bound for `Σ_{k>n} |S_k|/2^k`.
    pub fn tail_bound(&self, n: usize) -> Rational {
        match &self.tail {
            TailRule::Finite => self.mass_bound.clone() - slalom_mass(self, n),
            TailRule::Geometric { coef, ratio, step } => {
                coef.clone() * ratio.pow((n as u32 + 1) / (*step).max(1))
            }
        }
    }
}

/// `Σ_{n<=d} |S_n|/2^n`.
pub fn slalom_mass(s: &Slalom, d: usize) -> Rational {
    (0..=d.min(s.horizon()))
        .filter(|&n| n < s.levels.len())
        .map(|n| Rational::dyadic(s.levels[n].len(), n))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlalomVerdict {
    pub hits: Vec<usize>,
    pub from: usize,
    pub upto: usize,
}

impl SlalomVerdict {
    pub fn is_clean(&self) -> bool {
        self.hits.is_empty()
    }
}

/// All `n ∈ [N, |x|]` with `x↾n ∈ S_n`.
pub fn slalom_member(s: &Slalom, x: &Word, from: usize) -> SlalomVerdict {
    let hits = (from..=x.len())
        .filter(|&n| s.level(n).contains(&x.restrict(n)))
        .collect();
    SlalomVerdict {
        hits,
        from,
        upto: x.len(),
    }
}

/// Generators `σ_k` with their exact mass `Σ 1/2^{|σ_k|}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub generators: Vec<Word>,
    pub mass: Rational,
}

impl CoverFamily {
    pub fn new(generators: Vec<Word>) -> Self {
        let mass = generators.iter().map(|g| Rational::inv_pow2(g.len())).sum();
        CoverFamily { generators, mass }
    }

    /// Some generator is a prefix of `x`.
    pub fn covers(&self, x: &Word) -> bool {
        self.generators.iter().any(|g| g.is_prefix_of(x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBound {
    pub n: usize,
    pub size: usize,
    /// `Σ_{k<=n} 2^{n-k} = 2^{n+1} - 1`.
    pub bound: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverConversion {
    pub slalom: Slalom,
    pub bounds: Vec<LevelBound>,
}

/// Collects the generators of length `n` of all families into `S_n`, for
/// `n <= d`. Family `j` must have mass `< 1/2^j`.
pub fn cover_to_slalom(families: &[CoverFamily], d: usize) -> Result<CoverConversion> {
    for (j, fam) in families.iter().enumerate() {
        if fam.mass >= Rational::inv_pow2(j) {
            return Err(Error::ScheduleViolation {
                family: j,
                mass: fam.mass.to_string(),
            });
        }
    }
    let mut levels = vec![BTreeSet::new(); d + 1];
    for fam in families {
        for g in &fam.generators {
            if g.len() <= d {
                levels[g.len()].insert(g.clone());
            }
        }
    }
    let bounds: Vec<LevelBound> = levels
        .iter()
        .enumerate()
        .map(|(n, lvl)| {
            let bound = (num_bigint::BigUint::from(1u32) << (n + 1)) - 1u32;
            LevelBound {
                n,
                size: lvl.len(),
                holds: num_bigint::BigUint::from(lvl.len()) < bound,
                bound: bound.to_string(),
            }
        })
        .collect();
    if let Some(b) = bounds.iter().find(|b| !b.holds) {
        return Err(Error::Construction(format!(
            "|S_{}| = {} breaks the bound {}",
            b.n, b.size, b.bound
        )));
    }
    // Σ_j mass_j < Σ_j 1/2^j = 2
    let slalom = Slalom {
        levels,
        mass_bound: Rational::from_int(2),
        tail: TailRule::Finite,
    };
    Ok(CoverConversion { slalom, bounds })
}

/// The family `⋃_{n<k<=d} S_k`, whose mass is the exact tail sum.
pub fn slalom_to_cover(s: &Slalom, n: usize, d: usize) -> Result<CoverFamily> {
    let top = d.min(s.horizon());
    let generators: Vec<Word> = (n + 1..=top)
        .flat_map(|k| s.level(k).iter().cloned())
        .collect();
    let fam = CoverFamily::new(generators);
    let bound = s.tail_bound(n);
    if fam.mass > bound {
        return Err(Error::TailBound {
            n,
            mass: fam.mass.to_string(),
            bound: bound.to_string(),
        });
    }
    Ok(fam)
}

/// The families `slalom_to_cover(s, n_j, d)` with `n_j` least such that the
/// declared tail bound is `< 1/2^j`; `None` for `j` with no such `n_j <= d`.
pub fn cover_schedule(
    s: &Slalom,
    families: usize,
    d: usize,
) -> Result<Vec<Option<(usize, CoverFamily)>>> {
    let mut out = Vec::with_capacity(families);
    for j in 0..families {
        let target = Rational::inv_pow2(j);
        match (0..=d).find(|&n| s.tail_bound(n) < target) {
            Some(n) => out.push(Some((n, slalom_to_cover(s, n, d)?))),
            None => out.push(None),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(ws: &[&[i64]]) -> BTreeSet<Word> {
        ws.iter().map(|w| Word::from(*w)).collect()
    }

    #[test]
    fn masses() {
        assert_eq!(slalom_mass(&Slalom::empty(5), 5), Rational::zero());
        let mut s = Slalom::empty(4);
        s.levels[3] = lvl(&[&[0, 0, 0]]);
        assert_eq!(slalom_mass(&s, 4), Rational::ratio(1, 8));
    }

    #[test]
    fn membership() {
        assert!(slalom_member(&Slalom::empty(3), &Word::zeros(3), 0).is_clean());
        let mut s = Slalom::empty(3);
        s.levels[2] = lvl(&[&[1, 2]]);
        assert_eq!(slalom_member(&s, &Word::from([1, 2, 3]), 0).hits, vec![2]);
    }

    #[test]
    fn cover_conversion_examples() {
        let conv = cover_to_slalom(&[CoverFamily::new(vec![Word::from([0])])], 4).unwrap();
        assert_eq!(conv.slalom.levels[1], lvl(&[&[0]]));
        assert!(conv
            .slalom
            .levels
            .iter()
            .enumerate()
            .all(|(n, l)| n == 1 || l.is_empty()));
        assert_eq!(conv.bounds[3].bound, "15");
        let heavy = CoverFamily::new(vec![Word::from([0]), Word::from([1])]);
        assert!(matches!(
            cover_to_slalom(&[CoverFamily::new(vec![Word::from([5])]), heavy], 3),
            Err(Error::ScheduleViolation { family: 1, .. })
        ));
    }

    #[test]
    fn to_cover_examples() {
        let e = slalom_to_cover(&Slalom::empty(3), 1, 3).unwrap();
        assert!(e.generators.is_empty() && e.mass == Rational::zero());
        let mut levels = vec![BTreeSet::new(); 4];
        levels[2] = lvl(&[&[0, 0]]);
        let s = Slalom::from_levels(levels);
        let f = slalom_to_cover(&s, 1, 3).unwrap();
        assert_eq!(f.generators, vec![Word::from([0, 0])]);
        assert_eq!(f.mass, Rational::ratio(1, 4));
    }

    #[test]
    fn validate_rejects_bad_lengths() {
        let mut s = Slalom::empty(3);
        s.levels[2] = lvl(&[&[1]]);
        assert!(s.validate().is_err());
    }
}

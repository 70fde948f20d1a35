//! Serializable descriptors of infinite objects: integer sequences (centers),
//! interval partitions of ω and infinite subsets of ω.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::Word;

/// An infinite integer sequence `n ↦ x(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Center {
    /// `prefix` followed by `cycle` repeated forever.
    Periodic { prefix: Vec<i64>, cycle: Vec<i64> },
    /// Σ coef · term.
    Sum { terms: Vec<(i64, Center)> },
    /// `base` overwritten by `values` starting at position `start`.
    Patched {
        base: Box<Center>,
        start: u64,
        values: Vec<i64>,
    },
    /// `base + coef · addend` on the designated intervals of `thinning`, `base` elsewhere.
    Thinned {
        base: Box<Center>,
        addend: Box<Center>,
        coef: i64,
        thinning: Thinning,
    },
}

impl Center {
    pub fn constant(c: i64) -> Self {
        Center::Periodic {
            prefix: vec![],
            cycle: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    pub fn periodic(prefix: Vec<i64>, cycle: Vec<i64>) -> Self {
        Center::Periodic { prefix, cycle }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Center::Periodic { cycle, .. } if cycle.is_empty() => Err(Error::Invalid(
                "periodic center needs a nonempty cycle".into(),
            )),
            Center::Periodic { .. } => Ok(()),
            Center::Sum { terms } => terms.iter().try_for_each(|(_, c)| c.validate()),
            Center::Patched { base, .. } => base.validate(),
            Center::Thinned {
                base,
                addend,
                thinning,
                ..
            } => {
                base.validate()?;
                addend.validate()?;
                thinning.validate()
            }
        }
    }

    pub fn value(&self, n: u64) -> i64 {
        match self {
            Center::Periodic { prefix, cycle } => {
                if (n as usize) < prefix.len() {
                    prefix[n as usize]
                } else {
                    let k = (n - prefix.len() as u64) % cycle.len() as u64;
                    cycle[k as usize]
                }
            }
            Center::Sum { terms } => terms.iter().fold(0i64, |acc, (c, t)| {
                c.checked_mul(t.value(n))
                    .and_then(|v| acc.checked_add(v))
                    .expect("center value overflows i64")
            }),
            Center::Patched {
                base,
                start,
                values,
            } => {
                if n >= *start && n - start < values.len() as u64 {
                    values[(n - start) as usize]
                } else {
                    base.value(n)
                }
            }
            Center::Thinned {
                base,
                addend,
                coef,
                thinning,
            } => {
                let b = base.value(n);
                if thinning.position_designated(n) {
                    coef.checked_mul(addend.value(n))
                        .and_then(|v| b.checked_add(v))
                        .expect("center value overflows i64")
                } else {
                    b
                }
            }
        }
    }

    /// `x ↾ [from, to)`.
    pub fn segment(&self, from: u64, to: u64) -> Word {
        Word::new((from..to).map(|n| self.value(n)).collect())
    }

    pub fn prefix(&self, n: usize) -> Word {
        self.segment(0, n as u64)
    }
}

/// A partition of ω into consecutive nonempty intervals `I_n = [cut(n), cut(n+1))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Cuts {
    /// Interval widths: `prefix`, then `cycle` repeated.
    Widths { prefix: Vec<u64>, cycle: Vec<u64> },
    /// Cut points `0, 1, r, r², ...`.
    Geometric { ratio: u64 },
    /// Explicit cut points (first is 0, last is a cut of `base`), then the intervals of `base`.
    Spliced { points: Vec<u64>, base: Box<Cuts> },
    /// Blocks ending with each designated interval of a thinning.
    Blocks { thinning: Box<Thinning> },
}

impl Cuts {
    pub fn uniform(width: u64) -> Self {
        Cuts::Widths {
            prefix: vec![],
            cycle: vec![width],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Cuts::Widths { prefix, cycle } => {
                if cycle.is_empty() {
                    return Err(Error::Invalid("width cycle must be nonempty".into()));
                }
                if prefix.iter().chain(cycle.iter()).any(|&w| w == 0) {
                    return Err(Error::Invalid("intervals must be nonempty".into()));
                }
                Ok(())
            }
            Cuts::Geometric { ratio } if *ratio < 2 => {
                Err(Error::Invalid("geometric ratio must be at least 2".into()))
            }
            Cuts::Geometric { .. } => Ok(()),
            Cuts::Spliced { points, base } => {
                base.validate()?;
                if points.first() != Some(&0) {
                    return Err(Error::Invalid("spliced cuts must start at 0".into()));
                }
                if points.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid("cut points must increase strictly".into()));
                }
                let last = *points.last().unwrap();
                let j = base.interval_of(last);
                if base.cut(j) != last {
                    return Err(Error::Invalid(
                        "last spliced point must be a base cut".into(),
                    ));
                }
                Ok(())
            }
            Cuts::Blocks { thinning } => thinning.validate(),
        }
    }

    /// `cut(n)`, the left end of `I_n`; `cut(0) = 0`.
    pub fn cut(&self, n: u64) -> u64 {
        match self {
            Cuts::Widths { prefix, cycle } => {
                let p = prefix.len() as u64;
                if n <= p {
                    prefix[..n as usize].iter().sum()
                } else {
                    let head: u64 = prefix.iter().sum();
                    let m = n - p;
                    let full = m / cycle.len() as u64;
                    let rest = (m % cycle.len() as u64) as usize;
                    head + full * cycle.iter().sum::<u64>() + cycle[..rest].iter().sum::<u64>()
                }
            }
            Cuts::Geometric { ratio } => {
                if n == 0 {
                    0
                } else {
                    ratio
                        .checked_pow((n - 1) as u32)
                        .expect("cut overflows u64")
                }
            }
            Cuts::Spliced { points, base } => {
                let k = points.len() as u64;
                if n < k {
                    points[n as usize]
                } else {
                    let j0 = base.interval_of(*points.last().unwrap());
                    base.cut(j0 + (n - (k - 1)))
                }
            }
            Cuts::Blocks { thinning } => {
                if n == 0 {
                    0
                } else {
                    let m = thinning.designated(n - 1);
                    thinning.cuts.cut(m + 1)
                }
            }
        }
    }

    pub fn interval(&self, n: u64) -> (u64, u64) {
        (self.cut(n), self.cut(n + 1))
    }

    /// Index of the interval containing `pos`.
    pub fn interval_of(&self, pos: u64) -> u64 {
        let mut n = 0;
        while self.cut(n + 1) <= pos {
            n += 1;
        }
        n
    }

    /// Number of intervals lying entirely below `len`.
    pub fn complete_below(&self, len: u64) -> u64 {
        let mut n = 0;
        while self.cut(n + 1) <= len {
            n += 1;
        }
        n
    }
}

/// An infinite subset of ω with a total, strictly increasing enumerator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum FreeSet {
    /// `{start, start + step, start + 2·step, ...}`.
    Progression { start: u64, step: u64 },
    /// Explicit members below `from`, then `n >= from` with `(n - from) mod period ∈ residues`.
    Periodic {
        prefix: Vec<u64>,
        from: u64,
        period: u64,
        residues: Vec<u64>,
    },
    /// The base set with every designated interval removed.
    Thinned { thinning: Box<Thinning> },
}

impl FreeSet {
    pub fn all() -> Self {
        FreeSet::Progression { start: 0, step: 1 }
    }

    pub fn evens() -> Self {
        FreeSet::Progression { start: 0, step: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FreeSet::Progression { step, .. } if *step == 0 => {
                Err(Error::Invalid("progression step must be positive".into()))
            }
            FreeSet::Progression { .. } => Ok(()),
            FreeSet::Periodic {
                prefix,
                from,
                period,
                residues,
            } => {
                if *period == 0 || residues.is_empty() || residues.iter().any(|r| r >= period) {
                    return Err(Error::Invalid(
                        "periodic free set needs residues below a positive period".into(),
                    ));
                }
                if prefix.iter().any(|p| p >= from) || prefix.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid(
                        "free set prefix must increase and stay below `from`".into(),
                    ));
                }
                Ok(())
            }
            FreeSet::Thinned { thinning } => thinning.validate(),
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            FreeSet::Progression { start, step } => {
                n >= *start && (n - start).is_multiple_of(*step)
            }
            FreeSet::Periodic {
                prefix,
                from,
                period,
                residues,
            } => {
                if n < *from {
                    prefix.contains(&n)
                } else {
                    residues.contains(&((n - from) % period))
                }
            }
            FreeSet::Thinned { thinning } => {
                thinning.free.contains(n) && !thinning.position_designated(n)
            }
        }
    }

    /// Least member `>= n`.
    pub fn next_at_or_after(&self, n: u64) -> u64 {
        match self {
            FreeSet::Progression { start, step } => {
                if n <= *start {
                    *start
                } else {
                    start + (n - start).div_ceil(*step) * step
                }
            }
            FreeSet::Periodic {
                prefix,
                from,
                period,
                residues,
            } => {
                if let Some(&p) = prefix.iter().find(|&&p| p >= n) {
                    return p;
                }
                let base = n.max(*from);
                (base..base + period)
                    .find(|&m| residues.contains(&((m - from) % period)))
                    .expect("residue in every period")
            }
            FreeSet::Thinned { thinning } => {
                let mut m = n;
                loop {
                    let a = thinning.free.next_at_or_after(m);
                    let j = thinning.cuts.interval_of(a);
                    if thinning.is_designated(j) {
                        m = thinning.cuts.cut(j + 1);
                    } else {
                        return a;
                    }
                }
            }
        }
    }

    pub fn min(&self) -> u64 {
        self.next_at_or_after(0)
    }

    /// Members below `d`.
    pub fn members_below(&self, d: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut m = self.next_at_or_after(0);
        while m < d {
            out.push(m);
            m = self.next_at_or_after(m + 1);
        }
        out
    }
}

/// Removes from a free set every other interval that follows a kept
/// interval meeting the set.
///
/// Intervals are scanned in order. A kept interval is followed by more kept
/// intervals until one of them meets the free set; the next interval is then
/// designated (removed) and scanning resumes in the keeping state. The
/// thinned set therefore stays infinite and misses infinitely many whole
/// intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thinning {
    pub free: Box<FreeSet>,
    pub cuts: Box<Cuts>,
}

impl Thinning {
    pub fn new(free: FreeSet, cuts: Cuts) -> Self {
        Thinning {
            free: Box::new(free),
            cuts: Box::new(cuts),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.free.validate()?;
        self.cuts.validate()
    }

    fn meets(&self, m: u64) -> bool {
        let (a, b) = self.cuts.interval(m);
        self.free.next_at_or_after(a) < b
    }

    /// Index of the k-th designated interval.
    pub fn designated(&self, k: u64) -> u64 {
        let mut found = 0;
        let mut keeping = true;
        let mut m = 0;
        loop {
            if keeping {
                if self.meets(m) {
                    keeping = false;
                }
            } else {
                if found == k {
                    return m;
                }
                found += 1;
                keeping = true;
            }
            m += 1;
        }
    }

    pub fn is_designated(&self, m: u64) -> bool {
        let mut keeping = true;
        for j in 0..=m {
            if keeping {
                if self.meets(j) {
                    keeping = false;
                }
            } else {
                if j == m {
                    return true;
                }
                keeping = true;
            }
        }
        false
    }

    pub fn position_designated(&self, n: u64) -> bool {
        self.is_designated(self.cuts.interval_of(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_and_geometric_cuts() {
        let c = Cuts::Widths {
            prefix: vec![2],
            cycle: vec![1, 3],
        };
        let pts: Vec<u64> = (0..6).map(|n| c.cut(n)).collect();
        assert_eq!(pts, vec![0, 2, 3, 6, 7, 10]);
        assert_eq!(c.interval_of(5), 2);
        let g = Cuts::Geometric { ratio: 2 };
        let pts: Vec<u64> = (0..6).map(|n| g.cut(n)).collect();
        assert_eq!(pts, vec![0, 1, 2, 4, 8, 16]);
    }

    #[test]
    fn spliced_cuts_continue_with_base() {
        let base = Cuts::uniform(1);
        let s = Cuts::Spliced {
            points: vec![0, 4, 6],
            base: Box::new(base),
        };
        s.validate().unwrap();
        let pts: Vec<u64> = (0..6).map(|n| s.cut(n)).collect();
        assert_eq!(pts, vec![0, 4, 6, 7, 8, 9]);
    }

    #[test]
    fn thinning_skips_every_other_interval_for_full_set() {
        let t = Thinning::new(FreeSet::all(), Cuts::Geometric { ratio: 2 });
        let d: Vec<u64> = (0..4).map(|k| t.designated(k)).collect();
        assert_eq!(d, vec![1, 3, 5, 7]);
        let thinned = FreeSet::Thinned {
            thinning: Box::new(t.clone()),
        };
        // I0=[0,1) kept, I1=[1,2) removed, I2=[2,4) kept, I3=[4,8) removed
        assert_eq!(thinned.members_below(10), vec![0, 2, 3, 8, 9]);
        let blocks = Cuts::Blocks {
            thinning: Box::new(t),
        };
        let pts: Vec<u64> = (0..4).map(|n| blocks.cut(n)).collect();
        assert_eq!(pts, vec![0, 2, 8, 32]);
    }

    #[test]
    fn thinning_waits_for_meeting_interval() {
        // A = {5, 6, 7, ...}, unit intervals: keep until 5 is met, then drop 6.
        let t = Thinning::new(FreeSet::Progression { start: 5, step: 1 }, Cuts::uniform(1));
        assert_eq!(t.designated(0), 6);
        assert_eq!(t.designated(1), 8);
        assert!(t.is_designated(6) && !t.is_designated(5) && !t.is_designated(7));
    }

    #[test]
    fn periodic_free_set() {
        let a = FreeSet::Periodic {
            prefix: vec![1],
            from: 4,
            period: 3,
            residues: vec![0, 2],
        };
        a.validate().unwrap();
        assert_eq!(a.members_below(12), vec![1, 4, 6, 7, 9, 10]);
        assert_eq!(a.next_at_or_after(2), 4);
    }

    #[test]
    fn center_rules() {
        let c = Center::periodic(vec![5], vec![1, 2]);
        assert_eq!(c.prefix(5), Word::from([5, 1, 2, 1, 2]));
        let s = Center::Sum {
            terms: vec![(2, c.clone()), (-1, Center::constant(1))],
        };
        assert_eq!(s.prefix(3), Word::from([9, 1, 3]));
        let p = Center::Patched {
            base: Box::new(Center::zero()),
            start: 1,
            values: vec![7, 8],
        };
        assert_eq!(p.prefix(4), Word::from([0, 7, 8, 0]));
    }
}

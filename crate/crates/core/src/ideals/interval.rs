use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{Center, Cuts};
use crate::words::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `(∀n)(x↾I_n ≠ c↾I_n)`: nwd₋.
    Forall,
    /// `(∀^∞ n)(x↾I_n ≠ c↾I_n)`: M₋, from `threshold` on.
    Cofinite,
}

/// An interval-partition certificate for nwd₋ or M₋.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCert {
    pub center: Center,
    pub cuts: Cuts,
    pub mode: Mode,
    #[serde(default)]
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum IntervalVerdict {
    InCertSet { from: u64, upto: u64 },
    Escapes { interval: u64 },
}

impl IntervalVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, IntervalVerdict::InCertSet { .. })
    }
}

impl IntervalCert {
    pub fn cofinite(center: Center, cuts: Cuts, threshold: u64) -> Self {
        IntervalCert {
            center,
            cuts,
            mode: Mode::Cofinite,
            threshold,
        }
    }

    pub fn forall(center: Center, cuts: Cuts) -> Self {
        IntervalCert {
            center,
            cuts,
            mode: Mode::Forall,
            threshold: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.center.validate()?;
        self.cuts.validate()
    }

    fn first_checked(&self) -> u64 {
        match self.mode {
            Mode::Forall => 0,
            Mode::Cofinite => self.threshold,
        }
    }

    /// The same certificate with its center shifted by `v`.
    pub fn translated(&self, v: Center) -> IntervalCert {
        IntervalCert {
            center: Center::Sum {
                terms: vec![(1, self.center.clone()), (1, v)],
            },
            ..self.clone()
        }
    }
}

/// Checks the intervals `I_0 .. I_upto` (from the threshold in cofinite mode).
pub fn interval_member(c: &IntervalCert, x: &Word, upto: u64) -> Result<IntervalVerdict> {
    let needed = c.cuts.cut(upto + 1);
    if (x.len() as u64) < needed {
        return Err(Error::ShortWord {
            len: x.len(),
            interval: upto as usize,
            needed,
        });
    }
    let from = c.first_checked();
    for n in from..=upto {
        let (a, b) = c.cuts.interval(n);
        if x.slice(a as usize, b as usize) == c.center.segment(a, b) {
            return Ok(IntervalVerdict::Escapes { interval: n });
        }
    }
    Ok(IntervalVerdict::InCertSet { from, upto })
}

/// [`interval_member`] over every interval lying entirely inside `x`;
/// `None` when `x` covers no checkable interval.
pub fn interval_member_complete(c: &IntervalCert, x: &Word) -> Option<IntervalVerdict> {
    let complete = c.cuts.complete_below(x.len() as u64);
    if complete == 0 || complete <= c.first_checked() {
        return None;
    }
    interval_member(c, x, complete - 1).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Cuts {
        Cuts::uniform(2)
    }

    #[test]
    fn examples() {
        let c = IntervalCert::forall(Center::zero(), unit2());
        assert!(interval_member(&c, &Word::from([1, 2, 3, 4, 5, 6]), 2)
            .unwrap()
            .is_in());
        let x = Word::from([1, 1, 1, 1, 0, 0]);
        assert_eq!(
            interval_member(&c, &x, 2).unwrap(),
            IntervalVerdict::Escapes { interval: 2 }
        );
        let cof = IntervalCert::cofinite(Center::zero(), unit2(), 3);
        let x = Word::from([1, 1, 1, 1, 0, 0, 1, 1]);
        assert!(interval_member(&cof, &x, 3).unwrap().is_in());
    }

    #[test]
    fn short_word_rejected() {
        let c = IntervalCert::forall(Center::zero(), unit2());
        assert!(matches!(
            interval_member(&c, &Word::from([1, 2, 3]), 1),
            Err(Error::ShortWord { .. })
        ));
    }

    #[test]
    fn translation_invariance() {
        let c = IntervalCert::forall(Center::periodic(vec![], vec![1, -1]), Cuts::uniform(3));
        let v = Center::periodic(vec![2], vec![0, 5]);
        let shifted = c.translated(v.clone());
        for x in [
            Word::from([1, -1, 1, 0, 0, 0]),
            Word::from([0, 0, 0, -1, 1, -1]),
            Word::zeros(6),
        ] {
            let y = x.add(&v.prefix(6)).unwrap();
            assert_eq!(
                interval_member(&c, &x, 1).unwrap(),
                interval_member(&shifted, &y, 1).unwrap()
            );
        }
    }
}

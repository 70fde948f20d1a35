//! Finite integer sequences, the zigzag order on ℤ and the canonical
//! enumeration of ℤ^{<ω}.
//!
//! The enumeration groups words into finite *shells*: a word belongs to shell
//! `max(len, max rank of an entry)`, where ranks come from the zigzag order
//! `0, 1, -1, 2, -2, ...`. Inside a shell words are ordered by length, then
//! lexicographically by rank. Every proper prefix of a word lies in the same
//! or an earlier shell and is shorter, so prefixes always get smaller indices.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sequence of integers.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<i64>);

impl Word {
    pub fn new(entries: Vec<i64>) -> Self {
        Word(entries)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        Word(vec![0; n])
    }

    pub fn repeat(value: i64, n: usize) -> Self {
        Word(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn get(&self, i: usize) -> Option<i64> {
        self.0.get(i).copied()
    }

    pub fn last(&self) -> Option<i64> {
        self.0.last().copied()
    }

    /// `self ↾ n`; saturates at the full word.
    pub fn restrict(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        let to = to.min(self.len());
        let from = from.min(to);
        Word(self.0[from..to].to_vec())
    }

    pub fn child(&self, i: i64) -> Word {
        let mut v = self.0.clone();
        v.push(i);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, i: i64) {
        self.0.push(i);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }

    pub fn compatible(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Longest common prefix length.
    pub fn meet_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Coordinate-wise sum; both words must have equal length.
    pub fn add(&self, other: &Word) -> Result<Word> {
        word_add(self, other)
    }

    /// Coordinate-wise difference on the common length.
    pub fn sub(&self, other: &Word) -> Result<Word> {
        word_sub(self, other)
    }

    pub fn scale(&self, c: i64) -> Result<Word> {
        self.0
            .iter()
            .map(|&a| a.checked_mul(c).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn ranks(&self) -> impl Iterator<Item = u128> + '_ {
        self.0.iter().map(|&v| zigzag_rank(v))
    }
}

impl From<Vec<i64>> for Word {
    fn from(v: Vec<i64>) -> Self {
        Word(v)
    }
}

impl From<&[i64]> for Word {
    fn from(v: &[i64]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[i64; N]> for Word {
    fn from(v: [i64; N]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, ")")
    }
}

pub fn word_add(u: &Word, v: &Word) -> Result<Word> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    u.0.iter()
        .zip(v.0.iter())
        .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow))
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

/// `u - v` on the common length (the longer argument is restricted).
pub fn word_sub(u: &Word, v: &Word) -> Result<Word> {
    u.0.iter()
        .zip(v.0.iter())
        .map(|(a, b)| a.checked_sub(*b).ok_or(Error::Overflow))
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

/// `u + v` on the common length.
pub fn word_add_restricted(u: &Word, v: &Word) -> Result<Word> {
    let n = u.len().min(v.len());
    word_add(&u.restrict(n), &v.restrict(n))
}

/// Rank of an integer in the order `0, 1, -1, 2, -2, ...`.
pub fn zigzag_rank(v: i64) -> u128 {
    if v > 0 {
        2 * v as u128 - 1
    } else {
        2 * v.unsigned_abs() as u128
    }
}

/// Inverse of [`zigzag_rank`]; `None` when the value does not fit in `i64`.
pub fn zigzag_value(rank: u128) -> Option<i64> {
    if rank % 2 == 1 {
        i64::try_from(rank.div_ceil(2)).ok()
    } else {
        let m = rank / 2;
        if m == 1u128 << 63 {
            Some(i64::MIN)
        } else {
            i64::try_from(m).ok().map(|x| -x)
        }
    }
}

/// Zigzag comparison of integers.
pub fn zigzag_cmp(a: i64, b: i64) -> Ordering {
    zigzag_rank(a).cmp(&zigzag_rank(b))
}

/// The first `n` integers in zigzag order.
pub fn zigzag_prefix(n: usize) -> impl Iterator<Item = i64> {
    (0..n as u128).map(|r| zigzag_value(r).expect("small rank"))
}

/// Shell of a word in the canonical enumeration.
pub fn shell(w: &Word) -> u128 {
    w.ranks().max().unwrap_or(0).max(w.len() as u128)
}

/// Order of the canonical enumeration, without computing indices.
pub fn enum_cmp(a: &Word, b: &Word) -> Ordering {
    shell(a)
        .cmp(&shell(b))
        .then(a.len().cmp(&b.len()))
        .then_with(|| a.ranks().cmp(b.ranks()))
}

fn pow(base: u128, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// Number of words in shells `< m`: Σ_{l<m} m^l.
fn shells_below(m: u128) -> BigUint {
    (0..m as usize).map(|l| pow(m, l)).sum()
}

/// Words of length `l` in shell `m`.
fn group_size(m: u128, l: usize) -> BigUint {
    if (l as u128) < m {
        pow(m + 1, l) - pow(m, l)
    } else {
        pow(m + 1, l)
    }
}

/// Completions of `rest` positions with digits `<= m`, requiring a digit `m`
/// somewhere unless `satisfied`.
fn completions(m: u128, rest: usize, satisfied: bool) -> BigUint {
    if satisfied {
        pow(m + 1, rest)
    } else {
        pow(m + 1, rest) - pow(m, rest)
    }
}

/// Index of `w` in the canonical enumeration of ℤ^{<ω}.
pub fn enum_index(w: &Word) -> BigUint {
    let m = shell(w);
    let l = w.len();
    let mut idx = shells_below(m);
    for ll in 0..l {
        idx += group_size(m, ll);
    }
    // inside a shell of length < m the word must use the top rank m somewhere
    let mut satisfied = l as u128 >= m;
    for (i, r) in w.ranks().enumerate() {
        let rest = l - i - 1;
        for d in 0..r {
            idx += completions(m, rest, satisfied || d == m);
        }
        satisfied |= r == m;
    }
    idx
}

/// Word at position `n` of the canonical enumeration.
pub fn enum_word(n: &BigUint) -> Word {
    let mut m: u128 = 0;
    while shells_below(m + 1) <= *n {
        m += 1;
    }
    let mut r = n - shells_below(m);
    let mut l = 0usize;
    loop {
        let g = group_size(m, l);
        if r < g {
            break;
        }
        r -= g;
        l += 1;
    }
    let mut satisfied = l as u128 >= m;
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let rest = l - i - 1;
        let mut d = 0u128;
        loop {
            let c = completions(m, rest, satisfied || d == m);
            if r < c {
                break;
            }
            r -= c;
            d += 1;
        }
        satisfied |= d == m;
        out.push(zigzag_value(d).expect("shell rank fits"));
    }
    Word(out)
}

pub fn enum_word_u64(n: u64) -> Word {
    enum_word(&BigUint::from(n))
}

/// `enum_index(w) >= n`, compared without building large indices when avoidable.
pub fn index_at_least(w: &Word, n: &BigUint) -> bool {
    if n.is_zero() {
        return true;
    }
    enum_cmp(w, &enum_word(n)) != Ordering::Less
}

/// `ρ^n_k`: the k-th binary word of length n in lexicographic order.
pub fn binary_lex(n: u32, k: u64) -> Result<Word> {
    if n < 64 && k >= (1u64 << n) {
        return Err(Error::BinaryIndex { n, k });
    }
    Ok(Word(
        (0..n)
            .map(|i| {
                let shift = n - 1 - i;
                if shift >= 64 {
                    0
                } else {
                    ((k >> shift) & 1) as i64
                }
            })
            .collect(),
    ))
}

/// Rank of a binary word among binary words of its length.
pub fn binary_rank(w: &Word) -> u64 {
    w.entries()
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | (b as u64 & 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w<const N: usize>(v: [i64; N]) -> Word {
        Word::from(v)
    }

    #[test]
    fn add_and_sub_examples() {
        assert_eq!(word_add(&w([1, 2]), &w([3, -1])).unwrap(), w([4, 1]));
        assert_eq!(word_add(&w([5]), &w([-5])).unwrap(), w([0]));
        assert_eq!(
            word_add(&w([3, 9, -2]), &Word::zeros(3)).unwrap(),
            w([3, 9, -2])
        );
        assert_eq!(word_sub(&w([4, 1]), &w([3, -1])).unwrap(), w([1, 2]));
        assert_eq!(word_sub(&w([0, 0]), &w([0, 0])).unwrap(), w([0, 0]));
        assert_eq!(word_sub(&w([7, 2, 9]), &w([7, 2])).unwrap(), w([0, 0]));
    }

    #[test]
    fn add_rejects_mismatch() {
        let err = word_add(&w([1, 2]), &w([1])).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { left: 2, right: 1 });
    }

    #[test]
    fn add_reports_overflow() {
        assert_eq!(
            word_add(&w([i64::MAX]), &w([1])).unwrap_err(),
            Error::Overflow
        );
    }

    #[test]
    fn zigzag_ranks() {
        assert_eq!(zigzag_rank(0), 0);
        assert_eq!(zigzag_rank(1), 1);
        assert_eq!(zigzag_rank(-1), 2);
        assert_eq!(zigzag_rank(2), 3);
        for v in -50..50 {
            assert_eq!(zigzag_value(zigzag_rank(v)), Some(v));
        }
        assert_eq!(zigzag_value(zigzag_rank(i64::MIN)), Some(i64::MIN));
        assert_eq!(zigzag_value(zigzag_rank(i64::MAX)), Some(i64::MAX));
    }

    #[test]
    fn first_words() {
        assert_eq!(enum_word_u64(0), Word::empty());
        assert_eq!(enum_word_u64(1), w([0]));
        assert_eq!(enum_word_u64(2), w([1]));
        assert_eq!(enum_word_u64(3), w([-1]));
        assert_eq!(enum_word_u64(4), w([0, 0]));
    }

    #[test]
    fn binary_lex_examples() {
        assert_eq!(binary_lex(1, 0).unwrap(), w([0]));
        assert_eq!(binary_lex(1, 1).unwrap(), w([1]));
        assert_eq!(binary_lex(2, 2).unwrap(), w([1, 0]));
        assert_eq!(binary_lex(0, 0).unwrap(), Word::empty());
        assert!(binary_lex(2, 4).is_err());
        for n in 0..6u32 {
            for k in 0..(1u64 << n) {
                let r = binary_lex(n, k).unwrap();
                assert_eq!(binary_rank(&r), k);
                if n > 0 {
                    let parent = binary_lex(n - 1, k / 2).unwrap();
                    assert_eq!(r, parent.child((k % 2) as i64));
                }
            }
        }
    }

    #[test]
    fn prefix_relations() {
        let a = w([1, 2, 3]);
        assert!(a.restrict(2).is_prefix_of(&a));
        assert!(!w([1, 3]).is_prefix_of(&a));
        assert_eq!(a.meet_len(&w([1, 2, 5])), 2);
        assert!(Word::empty().is_prefix_of(&a));
    }
}

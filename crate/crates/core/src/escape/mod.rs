//! Branch constructions of the negative results: explicit points whose sum
//! escapes a given ideal certificate.

mod alpha;
mod avoid;
mod laver;
mod miller;
mod silver;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ledger::Ledger;
use crate::words::{enum_index, enum_word, zigzag_rank, zigzag_value, Word};

pub use alpha::{make_alpha_tree, AlphaTree};
pub use avoid::{avoid_tree, m_not_mminus_branch, AvoidTree};
pub use laver::laver_sum_decompose;
pub use miller::{
    miller_meager_escape, miller_meager_escape_with, miller_pair_escape, miller_pair_escape_with,
};
pub use silver::{silver_nwd_escape, silver_nwd_escape_with};

/// A map `ℤ^{<ω} → ℤ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum WordCode {
    /// `σ ↦ zigzag(enum_index(σ))`, a bijection.
    ZigzagIndex,
    /// `σ ↦ zigzag(enum_index(σ) mod modulus)`; not injective.
    Folded { modulus: u64 },
}

impl WordCode {
    pub fn eval(&self, w: &Word) -> i64 {
        let idx = enum_index(w);
        let idx = match self {
            WordCode::ZigzagIndex => idx,
            WordCode::Folded { modulus } => idx % BigUint::from((*modulus).max(1)),
        };
        // indices past i64 range never occur at window scale
        idx.to_u128().and_then(zigzag_value).unwrap_or(i64::MIN)
    }

    pub fn inverse(&self, v: i64) -> Option<Word> {
        match self {
            WordCode::ZigzagIndex => Some(enum_word(&BigUint::from(zigzag_rank(v)))),
            WordCode::Folded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Successor values excluded at this step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<i64>,
    /// Excluded nodes, for constructions that choose whole words.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden_words: Vec<Word>,
    pub chosen: Word,
    pub pattern: Word,
    /// The word the pattern is anchored at, when it differs from `chosen`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeTrace {
    pub construction: String,
    pub x_prefix: Word,
    pub t_prefix: Word,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_prefix: Option<Word>,
    pub step_log: Vec<StepRecord>,
    pub ledger: Ledger,
}

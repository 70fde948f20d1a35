//! Subtree constructions: a tree and an ideal certificate in, a smaller tree
//! of the same kind and a certificate for the sum out.

mod fakenull;
mod miller;
mod mminus;
mod sacks;

pub use fakenull::{
    choose_kn, choose_kn_with, fakenull_shrink_perfect, FakeNullShrink, FakeNullShrinkPlan,
    LevelCheck, DEFAULT_BUDGET,
};
pub use miller::{
    increasing_sequences, miller_null_subtree, miller_null_with, MillerNull, MillerSubtree,
};
pub use mminus::{
    mminus_shrink_perfect, mminus_shrink_perfect_with, mminus_shrink_silver, multisets, Block,
    MminusShrink, MminusSilver, RigidInterval,
};
pub use sacks::{
    sacks_fusion, sacks_shrink_meager, sacks_shrink_rooted, sacks_shrink_with, FusionResult,
    HEntry, SacksOptions, SacksShrinkResult, SigmaEntry, TauEntry,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::escape::{avoid_tree, make_alpha_tree, WordCode};
use crate::seq::{Center, FreeSet};
use crate::trees::{
    make_full, make_laver, make_silver, make_uniform, SilverSpec, SuccRule, TreeSpec,
};
use crate::words::Word;

/// Tree kinds that can be read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tree", rename_all = "kebab-case")]
pub enum TreeInput {
    Full,
    Silver {
        spec: SilverSpec,
    },
    Laver {
        stem: Word,
        rule: SuccRule,
    },
    Uniform {
        levels: FreeSet,
        branching: Option<u64>,
        fill: Center,
    },
    /// Range of `α̂` for a word code, checked injective at depth 2.
    Alpha {
        code: WordCode,
        budget: usize,
    },
    Avoid {
        code: WordCode,
    },
}

impl TreeInput {
    pub fn build(&self) -> Result<TreeSpec> {
        Ok(match self {
            TreeInput::Full => make_full(),
            TreeInput::Silver { spec } => make_silver(spec.clone()),
            TreeInput::Laver { stem, rule } => make_laver(stem.clone(), rule.clone()),
            TreeInput::Uniform {
                levels,
                branching,
                fill,
            } => make_uniform(levels.clone(), *branching, fill.clone())?,
            TreeInput::Alpha { code, budget } => make_alpha_tree(code.clone(), 2, *budget)?,
            TreeInput::Avoid { code } => avoid_tree(code.clone()),
        })
    }

    pub fn silver_spec(&self) -> Option<&SilverSpec> {
        match self {
            TreeInput::Silver { spec } => Some(spec),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let t: TreeInput =
            serde_json::from_str(r#"{"tree":"laver","stem":[5],"rule":{"rule":"all"}}"#).unwrap();
        let tree = t.build().unwrap();
        assert!(tree.contains(&Word::from([5, 3])));
        assert!(!tree.contains(&Word::from([4])));
        let full: TreeInput = serde_json::from_str(r#"{"tree":"full"}"#).unwrap();
        assert_eq!(full, TreeInput::Full);
    }
}

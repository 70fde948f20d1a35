//! Certificates for nwd₋, M₋, M and fake null sets, with finite-horizon
//! membership verdicts and the cover/slalom conversions.

mod interval;
mod mass;
mod meager;
mod slalom;

use serde::{Deserialize, Serialize};

pub use interval::{
    interval_member, interval_member_complete, IntervalCert, IntervalVerdict, Mode,
};
pub use mass::Rational;
pub use meager::{
    meager_from_nwd_sequence, meager_member, Combined, MeagerVerdict, MeagerWitness, WitnessRule,
};
pub use slalom::{
    cover_schedule, cover_to_slalom, slalom_mass, slalom_member, slalom_to_cover, CoverConversion,
    CoverFamily, LevelBound, Slalom, SlalomVerdict, TailRule,
};

/// Any certificate, tagged by kind for JSON files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    MeagerWitness(MeagerWitness),
    Interval(IntervalCert),
    Slalom(Slalom),
    Cover { families: Vec<CoverFamily> },
}

use thiserror::Error;

use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: left has length {left}, right has length {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("integer overflow in word arithmetic")]
    Overflow,

    #[error("binary index {k} out of range for words of length {n}")]
    BinaryIndex { n: u32, k: u64 },

    #[error("stem exceeds depth {depth}")]
    StemExceedsDepth { depth: usize },

    #[error("level {level} incomplete within depth {depth}: branch {branch} has no further split")]
    PartialLevel {
        level: usize,
        depth: usize,
        branch: Word,
    },

    #[error("incomparable windows: {0}")]
    IncomparableWindows(String),

    #[error("invalid tree map: {0}")]
    InvalidMap(String),

    #[error("insufficient prefix: {0}")]
    InsufficientPrefix(String),

    #[error("word of length {len} does not cover interval {interval} (needs length {needed})")]
    ShortWord {
        len: usize,
        interval: usize,
        needed: u64,
    },

    #[error("cover family {family} has mass {mass}, schedule requires < 1/2^{family}")]
    ScheduleViolation { family: usize, mass: String },

    #[error("tail mass {mass} above n={n} exceeds declared bound {bound}")]
    TailBound {
        n: usize,
        mass: String,
        bound: String,
    },

    #[error("budget schedule unsatisfiable at level {level}")]
    BudgetUnsatisfiable { level: usize },

    #[error("depth {depth} exhausted after {completed} completed stages")]
    DepthExhausted { depth: usize, completed: usize },

    #[error("not a perfect tree within window: node {0} has no splitting extension")]
    NotPerfect(Word),

    #[error("not a Miller tree within window: node {0} has no omega-splitting extension")]
    NotMiller(Word),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("node {node} above the stem has fewer than 2 successors")]
    LaverHypothesis { node: Word },

    #[error("successor budget {budget} insufficient at {node}: need {required}")]
    Budget {
        node: Word,
        budget: usize,
        required: usize,
    },

    #[error("map is not injective on the window: {0}")]
    NotInjective(String),

    #[error("free set has no element in [{from}, {limit})")]
    FreeSetGap { from: u64, limit: u64 },

    #[error("mode mismatch: {0}")]
    Mode(String),

    #[error("window cost {count} exceeds ceiling {ceiling}")]
    Ceiling { count: u128, ceiling: u128 },

    #[error("unknown scenario {0}")]
    UnknownScenario(String),

    #[error("construction invariant violated: {0}")]
    Construction(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

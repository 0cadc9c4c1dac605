use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Mathematical preconditions (mixed bases, non-partitions, sets that are
/// too shallow to split) are reported as typed variants so callers can
/// distinguish a malformed input from a check that honestly came out false.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base {0} is not supported (expected 2..=36)")]
    InvalidBase(u32),

    #[error("digit {digit} is out of range for base {base}")]
    InvalidDigit { digit: u8, base: u32 },

    #[error("mixed bases: expected {expected}, found {found}")]
    MixedBase { expected: u32, found: u32 },

    #[error("depth {found} is too small: the operation needs depth {required}")]
    DepthTooSmall { required: usize, found: usize },

    #[error("refinement would produce {count} cylinders, over the limit {limit}")]
    RefinementTooLarge { count: u128, limit: u128 },

    #[error("power arithmetic overflowed a 64-bit integer")]
    PowerOverflow,

    #[error("the empty set has no splitting cylinders")]
    EmptySet,

    #[error("fewer than two cylinders at depth {depth}; nothing to swap")]
    NotSplittable { depth: usize },

    #[error("table domain is not a partition of the space: {0}")]
    NotPartition(String),

    #[error("table images overlap; the map is not a bijection: {0}")]
    NotBijective(String),

    #[error("the set is not invariant under the element: {0}")]
    NotInvariant(String),

    #[error("element is not an involution")]
    NotInvolution,

    #[error("involution already lies in the product subgroup for this set")]
    InGeneratedSubgroup,

    #[error("denominator {denominator} shares a factor with base {base}")]
    NonCoprimeDenominator { denominator: String, base: u32 },

    #[error("oracle images failed to stabilize at depth {depth}: {detail}")]
    OracleInconsistent { depth: usize, detail: String },

    #[error("oracle is not induced by any spatial map: {detail}")]
    NotSpatiallyConsistent { detail: String },

    #[error("could not resolve the computation within the depth budget: {detail}")]
    ResolutionExhausted { detail: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal consistency check failed: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

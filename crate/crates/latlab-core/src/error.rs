use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Variants are grouped by flavor: `Config`-like values describe inputs that
/// can never be valid (wrong primality, mismatched objects), `Cap`-like
/// values describe inputs that exceed a configured resource bound, and the
/// remaining variants describe domain preconditions of individual
/// operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {q} exceeds the supported maximum {max}")]
    FieldOrderCap { q: u64, max: u64 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("operands belong to different fields (orders {0} and {1})")]
    FieldMismatch(u32, u32),
    #[error("element index {idx} out of range for field of order {q}")]
    IndexRange { idx: u64, q: u32 },
    #[error("coefficient vector has wrong length or residues out of range")]
    BadCoefficients,
    #[error("zero has no multiplicative inverse")]
    ZeroInversion,
    #[error("affine element must have a nonzero multiplier")]
    ZeroMultiplier,
    #[error("prime power sequence must be nonempty")]
    EmptySequence,
    #[error("sequence value q_{n} = {q} must exceed 4")]
    QTooSmall { n: usize, q: u64 },
    #[error("sequence value q_{n} = {q} falls below the tail-rule floor {floor}")]
    BelowTailFloor { n: usize, q: u64, floor: String },
    #[error("geometric tail rule requires c > 0 and r > 1")]
    BadGeometricRule,
    #[error("level {k} out of range for horizon {h}")]
    LevelRange { k: i64, h: i64 },
    #[error("head order {order} exceeds the cap {cap}")]
    HeadCap { order: u128, cap: u128 },
    #[error("enumeration of {order} head elements exceeds the budget {budget}")]
    EnumerationBudget { order: u128, budget: u128 },
    #[error("mask length {mask} does not match sequence length {seq}")]
    MaskLength { mask: usize, seq: usize },
    #[error("an all-in tail mode requires an infinite tail rule")]
    TailModeNeedsRule,
    #[error("specs are over different prime power sequences")]
    SequenceMismatch,
    #[error("operation requires a non-uniform spec")]
    UniformSpec,
    #[error("requested {want} witnesses but only {have} twisted coordinates exist")]
    WitnessCount { want: usize, have: usize },
    #[error("subgroup family is empty")]
    EmptyFamily,
    #[error("point count {points} exceeds the cap {cap}")]
    PointCap { points: u128, cap: u128 },
    #[error("probe level pair requires -1 <= m < k <= horizon, got m={m}, k={k}")]
    BadLevelPair { m: i64, k: i64 },
    #[error("target set must be nonempty and disjoint from the core")]
    DegenerateTarget,
    #[error("head element has wrong number of coordinates")]
    CoordinateCount,
    #[error("subgroups are not nested or the smaller one is not normal")]
    NotNormalPair,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

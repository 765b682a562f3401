use thiserror::Error;

/// Errors surfaced by ring construction, arithmetic, series operations and
/// the decomposition engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("unramified defining polynomial is not irreducible modulo p")]
    NotIrreducible,

    #[error("ramified defining polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),

    #[error("precision {given} too small, need at least {needed} pi-adic digits")]
    PrecisionTooSmall { given: u32, needed: u32 },

    #[error("ring parameters out of supported range: {0}")]
    UnsupportedRing(String),

    #[error("elements belong to different rings")]
    RingMismatch,

    #[error("not a unit: valuation is positive or unknown at current precision")]
    NotAUnit,

    #[error("requested {requested} digits but only {known} are trusted")]
    PrecisionExceeded { requested: u32, known: u32 },

    #[error("all coefficients have positive valuation, Weierstrass degree undetectable at current precision")]
    AllCoefficientsSmall,

    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("level {level} needs {residues} residues, above the configured cap {cap}")]
    LevelTooLarge { level: u32, residues: u128, cap: u64 },

    #[error("internal consistency failure: {0}")]
    ClassificationMismatch(String),

    #[error("prediction requires level >= e+1, got level {0}")]
    PreconditionLevel(u32),

    #[error("degenerate affine map: {0}")]
    DegenerateMap(String),

    #[error("root of unity suspected: {0}")]
    RootOfUnitySuspected(String),

    #[error("component is not a finite union of balls, use the envelope census")]
    ComponentNotBallUnion,

    #[error("level cap {cap} too small, need at least {needed}")]
    LevelCapTooSmall { cap: u32, needed: u32 },

    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;

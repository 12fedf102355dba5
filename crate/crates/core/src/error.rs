use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no inverse of zero")]
    NoInverse,
    #[error("modulus {0} is not an odd prime below 2^63")]
    BadModulus(u64),
    #[error("field elements come from different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("repeated interpolation node {0}")]
    RepeatedNode(u64),
    #[error("interpolation needs at least one point")]
    NoPoints,
    #[error("field of size {modulus} is too small for {needed} distinct evaluation points")]
    FieldTooSmall { modulus: u64, needed: usize },
    #[error("invalid coding parameters: {0}")]
    InvalidScheme(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not decodable: {got} results received, {needed} required")]
    NotDecodable { got: usize, needed: usize },
    #[error("shard index {0} is out of range or repeated")]
    BadShardIndex(usize),
    #[error("function degree {got} exceeds the scheme's degree {scheme}")]
    DegreeTooHigh { got: usize, scheme: usize },
    #[error("invalid worker parameters: {0}")]
    InvalidWorker(String),
    #[error("invalid load profile: {0}")]
    InvalidProfile(String),
    #[error("deadline infeasible: n*l_g = {capacity} < K* = {k_star}")]
    DeadlineInfeasible { capacity: usize, k_star: usize },
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("unclassifiable observation: load {load} finished in {time}s")]
    UnclassifiableObservation { load: usize, time: f64 },
    #[error("throughput of an empty run is undefined")]
    EmptyRun,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("round {round}: success flag {success} disagrees with decoding outcome")]
    DecodeMismatch { round: u64, success: bool },
}

pub type Result<T> = std::result::Result<T, Error>;

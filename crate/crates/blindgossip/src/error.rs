use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors from the modular/rational arithmetic layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithError {
    #[error("input {0} is negative or not finite; offset signed statistics before quantizing")]
    Domain(f64),
    #[error("quantized value {value} does not fit in {bits} bits")]
    Overflow { value: String, bits: u32 },
    #[error("invalid modulus parameters: {0}")]
    Params(String),
    #[error("amplification factor {0} is not a power of two")]
    Amplification(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlindingError {
    #[error("value is outside the blinding range: {0}")]
    Range(String),
    #[error("unblinding produced a negative value; the factor does not match")]
    MismatchedFactor,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("{0} trailing bytes after message")]
    Trailing(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreError {
    #[error("group element is not a member of the prime-order subgroup ({0})")]
    Membership(&'static str),
    #[error("envelope pad is out of range for the modulus")]
    PadRange,
    #[error("scalar payload {0} is not below the modulus")]
    PayloadRange(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcError {
    #[error("decision width {width} must be positive and below log2(n) = {modulus_bits}")]
    Width { width: u32, modulus_bits: u32 },
    #[error("label length {0} bits is outside 1..=128")]
    LabelBits(u32),
    #[error("expected {expected} input bits for {party}, got {got}")]
    InputCount { party: &'static str, expected: usize, got: usize },
    #[error("output label on wire {0} matches neither encoding")]
    Decode(usize),
    #[error("oblivious transfer pool exhausted: need {needed}, {available} left")]
    OtExhausted { needed: usize, available: usize },
    #[error("oblivious transfer record {0} was already consumed")]
    OtReused(usize),
    #[error("protocol message out of order: {0}")]
    Protocol(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("agent {agent} has no re-encryption key {from}->{to}")]
    MissingReKey { agent: usize, from: usize, to: usize },
    #[error("agent {0} is already engaged in an update")]
    Busy(usize),
    #[error("agent {agent} received a message out of order: {what}")]
    OutOfOrder { agent: usize, what: &'static str },
    #[error("agent {agent} received denominator exponent {got}, inconsistent with {expected}")]
    DenominatorMismatch { agent: usize, expected: u32, got: u32 },
    #[error("decision width overflow: ell + log2 d(T) + t + 1 = {needed} bits exceeds log2 n = {available}")]
    WidthOverflow { needed: u32, available: u32 },
    #[error("threshold {thr} does not fit in {ell} bits")]
    Threshold { thr: u64, ell: u32 },
    #[error("agent {garbler} holds no decision mask for agent {evaluator}")]
    NoDecisionMask { garbler: usize, evaluator: usize },
    #[error("reduction requires ell1 < floor(log2 n) - ell - t - 1 = {bound}, got ell1 = {ell1}")]
    ReductionBound { ell1: u32, bound: i64 },
    #[error("reduction shift k = {shift} must be below ell1 = {ell1}")]
    ReductionShift { shift: u32, ell1: u32 },
    #[error(transparent)]
    Pre(#[from] PreError),
    #[error(transparent)]
    Gc(#[from] GcError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("topology: {0}")]
    Topology(String),
    #[error("pair probabilities must be non-negative and sum to 1 (sum = {0})")]
    ProbabilitySum(f64),
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("lambda2 = {0} is not in [0, 1); the graph is disconnected")]
    Disconnected(f64),
    #[error("simulation: {0}")]
    Config(String),
    #[error("protocol failure at step {step}: {source}")]
    Step { step: u64, source: ProtocolError },
    #[error("decision failure for agent {agent}: {source}")]
    Decision { agent: usize, source: ProtocolError },
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Blinding(#[from] BlindingError),
    #[error(transparent)]
    Pre(#[from] PreError),
    #[error(transparent)]
    Gc(#[from] GcError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

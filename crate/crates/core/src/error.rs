use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter {name} = {value} is outside {expected}")]
    Domain { name: &'static str, value: f64, expected: &'static str },
    #[error("equalization infeasible at this p: p' = {p_prime} > 1")]
    EqualizationInfeasible { p_prime: f64 },
    #[error("probabilities do not lie on the simplex: weighted sum {sum}")]
    NotOnSimplex { sum: f64 },
    #[error("expected {expected} parameters, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("site ({x}, {y}, {cell}) is outside the torus")]
    SiteOutOfRange { x: i64, y: i64, cell: u8 },
    #[error("torus dimensions {width}x{height} are invalid: {reason}")]
    BadDimensions { width: usize, height: usize, reason: &'static str },
    #[error("block size {n} is outside 1..={max}")]
    BlockSize { n: usize, max: usize },
    #[error("{what} exceeds the limit of {limit}")]
    ResourceLimit { what: &'static str, limit: usize },
    #[error("objective is not finite at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("no root of the blocking equation in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("{0}")]
    Invalid(String),
}

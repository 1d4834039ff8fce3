use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modulus {p}^{s} does not fit in 64 bits")]
    ModulusTooLarge { p: u64, s: u32 },

    #[error("entry count {actual} does not match a {n}x{m} matrix")]
    DimensionMismatch { n: usize, m: usize, actual: usize },

    #[error("enumeration needs {required} steps but the budget is {budget}")]
    BudgetExceeded { required: BigUint, budget: BigUint },

    #[error("matrix is {n}x{m}, expected a square matrix")]
    NotSquare { n: usize, m: usize },

    #[error("column index {i} is out of range for {m} columns")]
    IndexOutOfRange { i: i64, m: u32 },

    #[error("closed form does not cover the shape {n}x{m}")]
    ShapeUnsupported { n: u32, m: u32 },

    #[error("closed form does not cover j = {j} with s = {s}")]
    RangeUnsupported { j: i64, s: u32 },

    #[error("assembled count is not an integer: {0}")]
    IntegralityViolation(String),

    #[error("prime {0} appears more than once")]
    DuplicatePrime(u64),

    #[error("malformed input: {0}")]
    Malformed(String),
}

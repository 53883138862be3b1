use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge within {budget} iterations")]
    NonConvergence { what: String, budget: usize },

    #[error("norm h_{n} lost positivity; roughly {required_bits} bits of precision are needed")]
    LostPositivity { n: usize, required_bits: u32 },

    #[error("degenerate point at n = {n}, a = {a}: {factor} vanishes")]
    DegeneratePoint { n: usize, a: f64, factor: String },

    #[error("denominator D vanishes at n = {n}, a = {a}")]
    ZeroDenominator { n: usize, a: f64 },

    #[error("sample z = {z} lies within {distance:.3e} of a pole (minimum {min_distance})")]
    PoleProximity {
        z: String,
        distance: f64,
        min_distance: f64,
    },

    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("invalid finite-difference stencil: {0}")]
    InvalidStencil(String),
}

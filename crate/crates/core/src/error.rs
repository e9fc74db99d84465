//! Error types shared by every module.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An input was outside the operation's domain (non-finite value, empty
    /// vector, probability outside its range, mismatched lengths, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter validation failed; carries every violated invariant.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// A root bracket did not contain a sign change.
    #[error("no sign change in bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An implicit equation provably has no root for the given inputs.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// An iterative solver ran out of iterations; carries the best iterate.
    #[error(
        "no convergence after {iterations} iterations: best x = {best}, |f(x)| = {residual:e}"
    )]
    Convergence {
        best: f64,
        residual: f64,
        iterations: usize,
    },
}

//! Exact SL(n) skein calculus over free groups.
//!
//! Graphs with n-valent sources and sinks, labeled by free-group words, are
//! resolved into polynomials in trace variables and checked against direct
//! tensor contraction at sampled SL(n) representations.

pub mod charvar;
pub mod checks;
pub mod error;
pub mod graph;
pub mod identities;
pub mod io;
pub mod matrix;
pub mod perm;
pub mod poly;
pub mod scalar;
pub mod tensor;
pub mod word;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use poly::{MatrixExpression, TraceMonomial, TracePolynomial};
pub use scalar::{Field, Scalar};
pub use word::{necklace_of, Necklace, Word};

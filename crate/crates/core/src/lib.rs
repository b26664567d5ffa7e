//! Free noncommutative function calculus on matrix tuples.
//!
//! Polynomials in noncommuting letters are evaluated on tuples of square
//! matrices of any size. On top of that sit the right difference-differential
//! operator, Taylor-Taylor expansions, an exact implicit/inverse function
//! solver for nilpotent inputs, a numeric chord-iteration solver with
//! contraction certification, flows of nc ODEs, and trace-objective
//! constrained critical points.

pub mod error;
pub mod harness;
pub mod json;
pub mod linmap;
pub mod matrix;
pub mod ncalg;
pub mod ncdiff;
pub mod ncode;
pub mod ncopt;
pub mod nilp;
pub mod opspace;
pub mod scalar;

pub use error::{Error, Result};
pub use linmap::LinearBlockMap;
pub use matrix::Matrix;
pub use ncalg::{CenterPoint, Direction, MatrixPoint, NcPoly, NcPolyMap, NcWord};
pub use scalar::{FloatScalar, Rational, Scalar};

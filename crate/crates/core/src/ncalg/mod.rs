//! Free-algebra polynomials, matrix tuples, and the structural operations
//! (direct sum, ampliation, similarity, shifting) used everywhere else.

mod point;
mod poly;
mod word;

pub use point::{CenterPoint, Direction, MatrixPoint};
pub use poly::{NcPoly, NcPolyMap};
pub use word::NcWord;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Evaluates `p` at `X`.
pub fn eval_poly<T: Scalar>(p: &NcPoly<T>, x: &MatrixPoint<T>) -> Result<Matrix<T>> {
    p.eval(x)
}

pub fn direct_sum<T: Scalar>(p: &MatrixPoint<T>, q: &MatrixPoint<T>) -> Result<MatrixPoint<T>> {
    p.direct_sum(q)
}

pub fn ampliate<T: Scalar>(y: &MatrixPoint<T>, m: usize) -> MatrixPoint<T> {
    y.ampliate(m)
}

pub fn similarity<T: Scalar>(x: &MatrixPoint<T>, s: &Matrix<T>) -> Result<MatrixPoint<T>> {
    x.similarity(s)
}

/// Re-expands `p` around a scalar center: returns `q` with `q(U) = p(c·I + U)`.
pub fn shift_poly<T: Scalar>(p: &NcPoly<T>, c: &CenterPoint<T>) -> Result<NcPoly<T>> {
    if !c.is_scalar() {
        return Err(Error::NonScalarCenter(c.s()));
    }
    if c.d() != p.num_letters() {
        return Err(Error::LetterCountMismatch { expected: p.num_letters(), found: c.d() });
    }
    let d = p.num_letters();
    let subs: Vec<_> = c
        .scalar_values()?
        .into_iter()
        .enumerate()
        .map(|(i, ci)| NcPoly::letter(d, i).add(&NcPoly::constant(d, ci)))
        .collect();
    p.compose(&subs)
}

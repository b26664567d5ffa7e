#![allow(dead_code)]

use ncfun::{Direction, Matrix, MatrixPoint, NcPoly, NcPolyMap, NcWord, Rational, Scalar};
use proptest::prelude::*;

pub fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

pub fn word(l: &[usize]) -> NcWord {
    NcWord::new(l.to_vec())
}

pub fn jordan(n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |i, j| if j == i + 1 { q(1) } else { q(0) })
}

pub fn pt(mats: Vec<Matrix<Rational>>) -> MatrixPoint<Rational> {
    MatrixPoint::new(mats).unwrap()
}

/// `y − x − x·y` on letters (x, y); solved by the geometric series in `x`.
pub fn geometric() -> NcPolyMap<Rational> {
    let p = NcPoly::from_terms(2, [(word(&[1]), q(1)), (word(&[0]), q(-1)), (word(&[0, 1]), q(-1))]).unwrap();
    NcPolyMap::new(vec![p], (1, 1)).unwrap()
}

/// `y + y²` on one letter.
pub fn quadratic_g() -> NcPolyMap<Rational> {
    let p = NcPoly::from_terms(1, [(word(&[0]), q(1)), (word(&[0, 0]), q(1))]).unwrap();
    NcPolyMap::new(vec![p], (0, 1)).unwrap()
}

pub fn rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, d)| Rational::from_ratio(p, d))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(rat(), rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

pub fn point(d: usize, n: usize) -> impl Strategy<Value = MatrixPoint<Rational>> {
    prop::collection::vec(matrix(n, n), d).prop_map(|m| MatrixPoint::new(m).unwrap())
}

pub fn direction(d: usize, rows: usize, cols: usize) -> impl Strategy<Value = Direction<Rational>> {
    prop::collection::vec(matrix(rows, cols), d).prop_map(|m| Direction::new(m).unwrap())
}

pub fn poly(d: usize, deg: usize) -> impl Strategy<Value = NcPoly<Rational>> {
    let term = (prop::collection::vec(0..d, 0..=deg), rat());
    prop::collection::vec(term, 1..6)
        .prop_map(move |ts| NcPoly::from_terms(d, ts.into_iter().map(|(w, c)| (NcWord::new(w), c))).unwrap())
}

/// Unit lower times unit upper triangular, so the inverse stays exact and small.
pub fn invertible(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (matrix(n, n), matrix(n, n)).prop_map(move |(a, b)| {
        let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => a[(i, j)].clone(),
            std::cmp::Ordering::Equal => q(1),
            _ => q(0),
        });
        let u = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => b[(i, j)].clone(),
            std::cmp::Ordering::Equal => q(1),
            _ => q(0),
        });
        l.matmul(&u)
    })
}

/// Unit lower times unit upper triangular with small integer entries.
pub fn small_invertible(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (prop::collection::vec(-2i64..=2, n * n), prop::collection::vec(-2i64..=2, n * n)).prop_map(move |(a, b)| {
        let l = Matrix::from_fn(n, n, |i, j| if i > j { q(a[i * n + j]) } else { q((i == j) as i64) });
        let u = Matrix::from_fn(n, n, |i, j| if i < j { q(b[i * n + j]) } else { q((i == j) as i64) });
        l.matmul(&u)
    })
}

/// A similarity conjugate of a strictly upper triangular matrix.
pub fn nilpotent(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (matrix(n, n), small_invertible(n)).prop_map(move |(a, s)| {
        let strict = Matrix::from_fn(n, n, |i, j| if j > i { a[(i, j)].clone() } else { q(0) });
        s.inverse().unwrap().matmul(&strict).matmul(&s)
    })
}

/// Polynomial together with points sharing its letter count.
pub fn poly_and_points(
    d_max: usize,
    deg: usize,
    n_max: usize,
) -> impl Strategy<Value = (NcPoly<Rational>, MatrixPoint<Rational>, MatrixPoint<Rational>, Direction<Rational>)> {
    (1..=d_max, 1..=n_max, 1..=n_max)
        .prop_flat_map(move |(d, n, m)| (poly(d, deg), point(d, n), point(d, m), direction(d, n, m)))
}

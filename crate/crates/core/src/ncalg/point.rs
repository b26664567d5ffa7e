use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// A d-tuple of square `n × n` matrices, `d ≥ 1`, `n ≥ 1`.
#[derive(Clone, PartialEq)]
pub struct MatrixPoint<T> {
    n: usize,
    mats: Vec<Matrix<T>>,
}

impl<T: Scalar> MatrixPoint<T> {
    pub fn new(mats: Vec<Matrix<T>>) -> Result<Self> {
        let first =
            mats.first().ok_or_else(|| Error::InvalidArgument("a point needs at least one component".into()))?;
        let n = first.rows();
        if n == 0 {
            return Err(Error::shape("matrix size must be at least 1"));
        }
        for m in &mats {
            if m.rows() != n || m.cols() != n {
                return Err(Error::shape(format!("expected {n}x{n} components, found {}x{}", m.rows(), m.cols())));
            }
        }
        Ok(Self { n, mats })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        Self { n, mats: vec![Matrix::zeros(n, n); d] }
    }

    /// The scalar point `(c_1 I_n, …, c_d I_n)`.
    pub fn scalar(values: &[T], n: usize) -> Self {
        Self { n, mats: values.iter().map(|c| Matrix::scalar(n, c.clone())).collect() }
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[Matrix<T>] {
        &self.mats
    }

    pub fn into_mats(self) -> Vec<Matrix<T>> {
        self.mats
    }

    pub fn component(&self, i: usize) -> &Matrix<T> {
        &self.mats[i]
    }

    pub fn map(&self, f: impl FnMut(&Matrix<T>) -> Matrix<T>) -> Self {
        let mats: Vec<_> = self.mats.iter().map(f).collect();
        Self { n: mats[0].rows(), mats }
    }

    /// Componentwise block-diagonal stacking `P ⊕ Q`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::ComponentCountMismatch { left: self.d(), right: other.d() });
        }
        Ok(Self {
            n: self.n + other.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a.direct_sum(b)).collect(),
        })
    }

    /// `Y^{(m)} = I_m ⊗ Y`.
    pub fn ampliate(&self, m: usize) -> Self {
        assert!(m >= 1, "ampliation level must be positive");
        if m == 1 {
            return self.clone();
        }
        Self { n: self.n * m, mats: self.mats.iter().map(|a| a.ampliate(m)).collect() }
    }

    /// Componentwise `S X_i S⁻¹`.
    pub fn similarity(&self, s: &Matrix<T>) -> Result<Self> {
        if s.rows() != self.n || s.cols() != self.n {
            return Err(Error::shape("similarity must match the point size"));
        }
        let s_inv = s.inverse().ok_or(Error::SingularSimilarity)?;
        if !T::EXACT {
            // crude conditioning guard in the float kernel
            let cond = s.max_abs() * s_inv.max_abs() * self.n as f64;
            if !cond.is_finite() || cond > 1e12 {
                return Err(Error::SingularSimilarity);
            }
        }
        Ok(self.map(|a| s.matmul(a).matmul(&s_inv)))
    }

    /// Appends the components of `other` (same size) after those of `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(format!("cannot join points of sizes {} and {}", self.n, other.n)));
        }
        let mut mats = self.mats.clone();
        mats.extend(other.mats.iter().cloned());
        Ok(Self { n: self.n, mats })
    }

    /// Splits into the first `a` components and the rest.
    pub fn split(&self, a: usize) -> (Option<Self>, Option<Self>) {
        let (l, r) = self.mats.split_at(a);
        let mk = |v: &[Matrix<T>]| (!v.is_empty()).then(|| Self { n: self.n, mats: v.to_vec() });
        (mk(l), mk(r))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { n: self.n, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { n: self.n, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.scale(c))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.d() != other.d() {
            return Err(Error::ComponentCountMismatch { left: self.d(), right: other.d() });
        }
        if self.n != other.n {
            return Err(Error::SizeMismatch(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(Matrix::is_zero)
    }

    /// Largest entry modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.mats.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mats.iter().zip(&other.mats).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// The `(i, j)` block of size `s × s` of every component.
    pub fn block(&self, i: usize, j: usize, s: usize) -> Self {
        self.map(|a| a.block(i * s, j * s, s, s))
    }

    pub fn to_direction(&self) -> Direction<T> {
        Direction { rows: self.n, cols: self.n, mats: self.mats.clone() }
    }
}

/// A d-tuple of (possibly rectangular) `rows × cols` matrices.
#[derive(Clone, PartialEq)]
pub struct Direction<T> {
    rows: usize,
    cols: usize,
    mats: Vec<Matrix<T>>,
}

impl<T: Scalar> Direction<T> {
    pub fn new(mats: Vec<Matrix<T>>) -> Result<Self> {
        let first =
            mats.first().ok_or_else(|| Error::InvalidArgument("a direction needs at least one component".into()))?;
        let (rows, cols) = first.shape();
        if mats.iter().any(|m| m.shape() != (rows, cols)) {
            return Err(Error::shape("direction components differ in shape"));
        }
        Ok(Self { rows, cols, mats })
    }

    pub fn zeros(d: usize, rows: usize, cols: usize) -> Self {
        Self { rows, cols, mats: vec![Matrix::zeros(rows, cols); d] }
    }

    /// The direction with `E_{αβ}` in component `i` and zero elsewhere.
    pub fn unit(d: usize, rows: usize, cols: usize, i: usize, alpha: usize, beta: usize) -> Self {
        let mut z = Self::zeros(d, rows, cols);
        z.mats[i] = Matrix::unit(rows, cols, alpha, beta);
        z
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mats(&self) -> &[Matrix<T>] {
        &self.mats
    }

    pub fn into_mats(self) -> Vec<Matrix<T>> {
        self.mats
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { rows: self.rows, cols: self.cols, mats: self.mats.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.d()), (other.rows, other.cols, other.d()));
        Self { rows: self.rows, cols: self.cols, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect() }
    }

    /// Concatenates the components of two same-shape directions.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::shape("direction shapes differ"));
        }
        let mut mats = self.mats.clone();
        mats.extend(other.mats.iter().cloned());
        Ok(Self { rows: self.rows, cols: self.cols, mats })
    }

    /// Square directions can be read as points.
    pub fn to_point(&self) -> Result<MatrixPoint<T>> {
        MatrixPoint::new(self.mats.clone())
    }
}

/// Center of an expansion: a point of size `s` (scalar when `s = 1`).
#[derive(Clone, PartialEq)]
pub struct CenterPoint<T> {
    point: MatrixPoint<T>,
}

impl<T: Scalar> CenterPoint<T> {
    pub fn new(point: MatrixPoint<T>) -> Self {
        Self { point }
    }

    /// Scalar center `(c_1, …, c_d)` of block size 1.
    pub fn scalar(values: &[T]) -> Self {
        Self { point: MatrixPoint::scalar(values, 1) }
    }

    pub fn s(&self) -> usize {
        self.point.n()
    }

    pub fn d(&self) -> usize {
        self.point.d()
    }

    pub fn is_scalar(&self) -> bool {
        self.point.n() == 1
    }

    pub fn point(&self) -> &MatrixPoint<T> {
        &self.point
    }

    /// The scalar values when `s = 1`.
    pub fn scalar_values(&self) -> Result<Vec<T>> {
        if !self.is_scalar() {
            return Err(Error::NonScalarCenter(self.s()));
        }
        Ok(self.point.mats().iter().map(|m| m[(0, 0)].clone()).collect())
    }

    /// `center^{(m)}` for a point of size `n`; `n` must be a multiple of `s`.
    pub fn ampliate_to(&self, n: usize) -> Result<MatrixPoint<T>> {
        if n % self.s() != 0 || n == 0 {
            return Err(Error::SizeMismatch(format!("size {n} is not a multiple of the center size {}", self.s())));
        }
        Ok(self.point.ampliate(n / self.s()))
    }

    /// `X − center^{(m)}`.
    pub fn shift(&self, x: &MatrixPoint<T>) -> Result<MatrixPoint<T>> {
        if x.d() != self.d() {
            return Err(Error::LetterCountMismatch { expected: self.d(), found: x.d() });
        }
        x.sub(&self.ampliate_to(x.n())?)
    }

    /// Joint center `(X⁰, Y⁰)` from two centers of the same size.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Ok(Self { point: self.point.concat(&other.point)? })
    }
}

impl<T: Scalar> fmt::Debug for MatrixPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.mats).finish()
    }
}

impl<T: Scalar> fmt::Debug for Direction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.mats).finish()
    }
}

impl<T: Scalar> fmt::Debug for CenterPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "center{:?}", self.point)
    }
}

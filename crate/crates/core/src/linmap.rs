//! Linear maps between tuples of square blocks.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Linear map `L : (𝔽^{s×s})^b → (𝔽^{s×s})^c`, stored as a `(c·s²) × (b·s²)`
/// matrix acting on stacked row-major vectorizations.
///
/// Entry `(α, β)` of component `j` sits at index `j·s² + α·s + β`.
#[derive(Clone, PartialEq)]
pub struct LinearBlockMap<T> {
    s: usize,
    b: usize,
    c: usize,
    matrix: Matrix<T>,
}

impl<T: Scalar> LinearBlockMap<T> {
    pub fn new(s: usize, b: usize, c: usize, matrix: Matrix<T>) -> Result<Self> {
        if matrix.shape() != (c * s * s, b * s * s) {
            return Err(Error::shape(format!(
                "block map matrix is {:?}, expected {}x{}",
                matrix.shape(),
                c * s * s,
                b * s * s
            )));
        }
        Ok(Self { s, b, c, matrix })
    }

    /// Tabulates a linear closure by probing matrix units.
    pub fn from_fn(
        s: usize,
        b: usize,
        c: usize,
        mut f: impl FnMut(&[Matrix<T>]) -> Result<Vec<Matrix<T>>>,
    ) -> Result<Self> {
        let ss = s * s;
        let mut matrix = Matrix::zeros(c * ss, b * ss);
        let mut input = vec![Matrix::zeros(s, s); b];
        for j in 0..b {
            for a in 0..s {
                for bt in 0..s {
                    input[j][(a, bt)] = T::one();
                    let out = f(&input)?;
                    input[j][(a, bt)] = T::zero();
                    if out.len() != c {
                        return Err(Error::ComponentCountMismatch { left: c, right: out.len() });
                    }
                    let col = j * ss + a * s + bt;
                    for (k, o) in out.iter().enumerate() {
                        for (idx, v) in o.data().iter().enumerate() {
                            matrix[(k * ss + idx, col)] = v.clone();
                        }
                    }
                }
            }
        }
        Ok(Self { s, b, c, matrix })
    }

    pub fn identity(s: usize, b: usize) -> Self {
        Self { s, b, c: b, matrix: Matrix::identity(b * s * s) }
    }

    pub fn zero(s: usize, b: usize, c: usize) -> Self {
        Self { s, b, c, matrix: Matrix::zeros(c * s * s, b * s * s) }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn inputs(&self) -> usize {
        self.b
    }

    pub fn outputs(&self) -> usize {
        self.c
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn is_square(&self) -> bool {
        self.b == self.c
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    fn vectorize(&self, z: &[Matrix<T>]) -> Result<Matrix<T>> {
        if z.len() != self.b {
            return Err(Error::ComponentCountMismatch { left: self.b, right: z.len() });
        }
        let mut v = Vec::with_capacity(self.b * self.s * self.s);
        for m in z {
            if m.shape() != (self.s, self.s) {
                return Err(Error::shape(format!("expected {0}x{0} blocks", self.s)));
            }
            v.extend_from_slice(m.data());
        }
        Ok(Matrix::from_vec(v.len(), 1, v))
    }

    fn unvectorize(&self, v: &Matrix<T>) -> Vec<Matrix<T>> {
        let ss = self.s * self.s;
        (0..self.c).map(|k| Matrix::from_vec(self.s, self.s, v.data()[k * ss..(k + 1) * ss].to_vec())).collect()
    }

    /// `L(Z)` for `b` blocks of size `s`.
    pub fn apply(&self, z: &[Matrix<T>]) -> Result<Vec<Matrix<T>>> {
        let v = self.vectorize(z)?;
        Ok(self.unvectorize(&self.matrix.matmul(&v)))
    }

    /// `L^{(m)}(Z) = (id_m ⊗ L)(Z)`: `L` acts on each `s × s` block of the
    /// `m × m` block grid of the `sm × sm` inputs.
    pub fn apply_ampliated(&self, z: &[Matrix<T>]) -> Result<Vec<Matrix<T>>> {
        if z.len() != self.b {
            return Err(Error::ComponentCountMismatch { left: self.b, right: z.len() });
        }
        let n = z.first().map_or(self.s, Matrix::rows);
        if n % self.s != 0 || z.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::SizeMismatch(format!("inputs must be square of a size divisible by {}", self.s)));
        }
        let s = self.s;
        let m = n / s;
        let mut out = vec![Matrix::zeros(n, n); self.c];
        for p in 0..m {
            for q in 0..m {
                let blocks: Vec<_> = z.iter().map(|a| a.block(p * s, q * s, s, s)).collect();
                if blocks.iter().all(Matrix::is_zero) {
                    continue;
                }
                for (k, r) in self.apply(&blocks)?.into_iter().enumerate() {
                    out[k].set_block(p * s, q * s, &r);
                }
            }
        }
        Ok(out)
    }

    /// The ampliation `id_m ⊗ L` as a map on blocks of size `s·m`.
    pub fn ampliate(&self, m: usize) -> Self {
        if m == 1 {
            return self.clone();
        }
        Self::from_fn(self.s * m, self.b, self.c, |z| self.apply_ampliated(z))
            .expect("shapes are consistent by construction")
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { inputs: self.b, outputs: self.c });
        }
        let inv = self.matrix.inverse().ok_or(Error::SingularDifferential)?;
        Ok(Self { s: self.s, b: self.c, c: self.b, matrix: inv })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.s != other.s || self.b != other.c {
            return Err(Error::shape("block maps do not compose"));
        }
        Ok(Self { s: self.s, b: other.b, c: self.c, matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.with_matrix(self.matrix.scale(c))
    }

    pub fn pow(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { inputs: self.b, outputs: self.c });
        }
        Ok(self.with_matrix(self.matrix.pow(k)))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.s, self.b, self.c) != (other.s, other.b, other.c) {
            return Err(Error::shape("block maps differ in shape"));
        }
        Ok(())
    }

    fn with_matrix(&self, matrix: Matrix<T>) -> Self {
        Self { s: self.s, b: self.b, c: self.c, matrix }
    }
}

impl<T: Scalar> fmt::Debug for LinearBlockMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearBlockMap(s={}, {}->{}) {:?}", self.s, self.b, self.c, self.matrix)
    }
}

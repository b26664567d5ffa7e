//! The right difference-differential operator `Δ_R`, its higher orders, and
//! Taylor-Taylor expansions.
//!
//! Each quantity is available through block evaluation (evaluate on an upper
//! triangular or bidiagonal block point and read off a corner block) and,
//! where practical, through a symbolic expansion over words, so the two can
//! be checked against each other.

use crate::error::{Error, Result};
use crate::linmap::LinearBlockMap;
use crate::matrix::Matrix;
use crate::ncalg::{shift_poly, CenterPoint, Direction, MatrixPoint, NcPoly, NcPolyMap};
use crate::scalar::Scalar;

fn check_letters<T: Scalar>(p: &NcPoly<T>, d: usize) -> Result<()> {
    if p.num_letters() != d {
        return Err(Error::LetterCountMismatch { expected: p.num_letters(), found: d });
    }
    Ok(())
}

fn check_pair<T: Scalar>(x: &MatrixPoint<T>, y: &MatrixPoint<T>, z: &Direction<T>) -> Result<()> {
    if x.d() != y.d() || x.d() != z.d() {
        return Err(Error::shape(format!("component counts differ: {}, {}, {}", x.d(), y.d(), z.d())));
    }
    if z.rows() != x.n() || z.cols() != y.n() {
        return Err(Error::shape(format!("direction is {}x{}, expected {}x{}", z.rows(), z.cols(), x.n(), y.n())));
    }
    Ok(())
}

/// The block upper triangular point `[[X, Z], [0, Y]]`.
pub fn upper_triangular_point<T: Scalar>(
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    z: &Direction<T>,
) -> Result<MatrixPoint<T>> {
    check_pair(x, y, z)?;
    bidiagonal_point(&[x.clone(), y.clone()], std::slice::from_ref(z))
}

/// The block upper bidiagonal point with `points` on the diagonal and
/// `dirs` on the superdiagonal.
pub fn bidiagonal_point<T: Scalar>(points: &[MatrixPoint<T>], dirs: &[Direction<T>]) -> Result<MatrixPoint<T>> {
    if points.len() != dirs.len() + 1 {
        return Err(Error::shape(format!("{} points need {} directions", points.len(), points.len() - 1)));
    }
    let d = points[0].d();
    let mut offsets = vec![0];
    for p in points {
        if p.d() != d {
            return Err(Error::shape("points differ in component count"));
        }
        offsets.push(offsets.last().unwrap() + p.n());
    }
    for (k, z) in dirs.iter().enumerate() {
        if z.d() != d || z.rows() != points[k].n() || z.cols() != points[k + 1].n() {
            return Err(Error::shape(format!("direction {} does not chain the neighbouring points", k + 1)));
        }
    }
    let total = offsets[points.len()];
    let mats = (0..d)
        .map(|i| {
            let mut m = Matrix::zeros(total, total);
            for (k, p) in points.iter().enumerate() {
                m.set_block(offsets[k], offsets[k], p.component(i));
            }
            for (k, z) in dirs.iter().enumerate() {
                m.set_block(offsets[k], offsets[k + 1], &z.mats()[i]);
            }
            m
        })
        .collect();
    MatrixPoint::new(mats)
}

/// `Δ_R p(X, Y)(Z)` as the `(1, 2)` block of `p([[X, Z], [0, Y]])`.
pub fn delta_r_block<T: Scalar>(
    p: &NcPoly<T>,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    z: &Direction<T>,
) -> Result<Matrix<T>> {
    check_letters(p, x.d())?;
    let big = upper_triangular_point(x, y, z)?;
    Ok(p.eval(&big)?.block(0, x.n(), x.n(), y.n()))
}

/// `Δ_R p(X, Y)(Z)` by expanding every word `x_{w1}···x_{wk}` into
/// `Σ_j X_{w1}···X_{w(j-1)} Z_{wj} Y_{w(j+1)}···Y_{wk}`.
pub fn delta_r_sym<T: Scalar>(
    p: &NcPoly<T>,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    z: &Direction<T>,
) -> Result<Matrix<T>> {
    check_letters(p, x.d())?;
    check_pair(x, y, z)?;
    let (n, m) = (x.n(), y.n());
    let mut out = Matrix::zeros(n, m);
    for (w, c) in p.terms() {
        let letters = w.letters();
        let k = letters.len();
        // suffix[j] = Y_{w(j)}···Y_{w(k-1)}
        let mut suffix = vec![Matrix::identity(m); k + 1];
        for j in (0..k).rev() {
            suffix[j] = y.component(letters[j]).matmul(&suffix[j + 1]);
        }
        let mut prefix = Matrix::identity(n);
        for j in 0..k {
            let term = prefix.matmul(&z.mats()[letters[j]]).matmul(&suffix[j + 1]);
            out.axpy(c, &term);
            prefix = prefix.matmul(x.component(letters[j]));
        }
    }
    Ok(out)
}

/// `Δ_R^ℓ p(X⁰, …, X^ℓ)(Z¹, …, Z^ℓ)`: the `(1, ℓ+1)` block of `p` evaluated
/// on the block bidiagonal point.
pub fn delta_r_higher<T: Scalar>(p: &NcPoly<T>, points: &[MatrixPoint<T>], dirs: &[Direction<T>]) -> Result<Matrix<T>> {
    let big = bidiagonal_point(points, dirs)?;
    check_letters(p, big.d())?;
    let n0 = points[0].n();
    let nl = points[points.len() - 1].n();
    Ok(p.eval(&big)?.block(0, big.n() - nl, n0, nl))
}

/// Symbolic counterpart of [`delta_r_higher`]: every word contributes the sum
/// over increasing positions `j1 < … < jℓ` of
/// `X⁰-prefix · Z¹_{w(j1)} · X¹-segment · … · Z^ℓ_{w(jℓ)} · X^ℓ-suffix`.
pub fn delta_r_higher_sym<T: Scalar>(
    p: &NcPoly<T>,
    points: &[MatrixPoint<T>],
    dirs: &[Direction<T>],
) -> Result<Matrix<T>> {
    // shape validation shared with the block path
    let big = bidiagonal_point(points, dirs)?;
    check_letters(p, big.d())?;
    let n0 = points[0].n();
    let nl = points[points.len() - 1].n();
    let mut out = Matrix::zeros(n0, nl);
    for (w, c) in p.terms() {
        let acc = Matrix::identity(n0);
        let term = higher_word(w.letters(), 0, 0, acc, points, dirs);
        out.axpy(c, &term);
    }
    Ok(out)
}

/// Sum over placements of the remaining directions `dirs[level..]` into
/// `letters[pos..]`, with `acc` the product so far (ending in level `level`).
fn higher_word<T: Scalar>(
    letters: &[usize],
    pos: usize,
    level: usize,
    acc: Matrix<T>,
    points: &[MatrixPoint<T>],
    dirs: &[Direction<T>],
) -> Matrix<T> {
    let rest = letters.len() - pos;
    let needed = dirs.len() - level;
    let cols = points[dirs.len()].n();
    if needed > rest {
        return Matrix::zeros(acc.rows(), cols);
    }
    if needed == 0 {
        let mut acc = acc;
        for &l in &letters[pos..] {
            acc = acc.matmul(points[level].component(l));
        }
        return acc;
    }
    let l = letters[pos];
    // place the next direction here
    let mut total = higher_word(letters, pos + 1, level + 1, acc.matmul(&dirs[level].mats()[l]), points, dirs);
    // or keep the current diagonal point
    let stay = higher_word(letters, pos + 1, level, acc.matmul(points[level].component(l)), points, dirs);
    total.add_assign_ref(&stay);
    total
}

/// Taylor-Taylor expansion of a polynomial about a scalar center.
#[derive(Clone, PartialEq, Debug)]
pub struct TtSeries<T: Scalar> {
    pub center: CenterPoint<T>,
    /// `parts[ℓ]` is homogeneous of degree `ℓ` in the shifted letters.
    pub parts: Vec<NcPoly<T>>,
}

/// Homogeneous components of `p` re-expanded about the scalar center `c`.
///
/// Part `ℓ` evaluated at `U = X − c·I` equals `Δ_R^ℓ p(c, …, c)(U, …, U)`.
pub fn tt_coefficients<T: Scalar>(p: &NcPoly<T>, c: &CenterPoint<T>) -> Result<TtSeries<T>> {
    let q = shift_poly(p, c)?;
    let top = q.degree().unwrap_or(0);
    Ok(TtSeries { center: c.clone(), parts: (0..=top).map(|l| q.homogeneous_part(l)).collect() })
}

/// Partial sum `Σ_{ℓ ≤ up_to} part_ℓ(X − c·I)`.
pub fn tt_evaluate<T: Scalar>(tt: &TtSeries<T>, x: &MatrixPoint<T>, up_to: usize) -> Result<Matrix<T>> {
    let u = tt.center.shift(x)?;
    let mut out = Matrix::zeros(x.n(), x.n());
    for part in tt.parts.iter().take(up_to + 1) {
        out.add_assign_ref(&part.eval(&u)?);
    }
    Ok(out)
}

/// Remainder term of the order-`N` expansion about a center of any block size:
/// `Δ_R^{N+1} p(Y, …, Y, X)(X − Y, …, X − Y)` with `Y` ampliated to the size of `X`.
pub fn tt_remainder<T: Scalar>(
    p: &NcPoly<T>,
    c: &CenterPoint<T>,
    x: &MatrixPoint<T>,
    order: usize,
) -> Result<Matrix<T>> {
    let y = c.ampliate_to(x.n())?;
    let u = x.sub(&y)?.to_direction();
    let mut points = vec![y; order + 1];
    points.push(x.clone());
    let dirs = vec![u; order + 1];
    delta_r_higher(p, &points, &dirs)
}

/// `S·p(Y) − p(X)·S − Δ_R p(X, Y)(S·Y − X·S)` for `X` of size `n`, `Y` of
/// size `m`, `S` of shape `n × m`; identically zero.
pub fn first_order_identity_residual<T: Scalar>(
    p: &NcPoly<T>,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    s: &Matrix<T>,
) -> Result<Matrix<T>> {
    check_letters(p, x.d())?;
    if s.shape() != (x.n(), y.n()) || x.d() != y.d() {
        return Err(Error::shape(format!("S must be {}x{}", x.n(), y.n())));
    }
    let z: Vec<_> = x.mats().iter().zip(y.mats()).map(|(xi, yi)| &s.matmul(yi) - &xi.matmul(s)).collect();
    let z = Direction::new(z)?;
    let lhs = &s.matmul(&p.eval(y)?) - &p.eval(x)?.matmul(s);
    Ok(&lhs - &delta_r_block(p, x, y, &z)?)
}

/// The linear map `Z ↦ Δ_R F(P¹, P²)(Z)` restricted to directions supported on
/// the letters `range` (zero on the other letters), for joint points of
/// equal size `s`.
pub fn difference_map<T: Scalar>(
    f: &NcPolyMap<T>,
    p1: &MatrixPoint<T>,
    p2: &MatrixPoint<T>,
    range: std::ops::Range<usize>,
) -> Result<LinearBlockMap<T>> {
    let d = f.num_letters();
    if p1.d() != d || p2.d() != d {
        return Err(Error::LetterCountMismatch { expected: d, found: p1.d() });
    }
    if p1.n() != p2.n() {
        return Err(Error::SizeMismatch(format!("{} vs {}", p1.n(), p2.n())));
    }
    let s = p1.n();
    LinearBlockMap::from_fn(s, range.len(), f.num_outputs(), |zs| {
        let mut mats = vec![Matrix::zeros(s, s); d];
        for (k, z) in range.clone().zip(zs) {
            mats[k] = z.clone();
        }
        let big = upper_triangular_point(p1, p2, &Direction::new(mats)?)?;
        f.components().iter().map(|c| Ok(c.eval(&big)?.block(0, s, s, s))).collect()
    })
}

/// `δ p(X)(Z) = Δ_R p(X, X)(Z)`.
pub fn derivative<T: Scalar>(p: &NcPoly<T>, x: &MatrixPoint<T>, z: &Direction<T>) -> Result<Matrix<T>> {
    delta_r_block(p, x, x, z)
}

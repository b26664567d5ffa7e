//! Exact implicit and inverse function solvers on nilpotent matrix tuples.
//!
//! A point `X` of size `s·m` is nilpotent of rank `κ` about a center `X⁰` of
//! size `s` when every `⊙_s`-product of `κ` shifted components
//! `X_i − X⁰_i^{(m)}` vanishes. On such points the chord iteration
//! `Y ← Y − L^{-1(m)} F(X, Y)` reaches an exact zero of `F` in fewer than `κ`
//! steps, so everything here runs in exact rational arithmetic.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linmap::LinearBlockMap;
use crate::matrix::Matrix;
use crate::ncalg::{CenterPoint, Direction, MatrixPoint, NcPolyMap};
use crate::ncdiff::{difference_map, upper_triangular_point};
use crate::scalar::Rational;

/// Largest lifted size `s^κ · m` the `s > 1` certification will build.
pub const LIFT_CAP: usize = 512;

/// Certified nilpotency of `point` about `center`.
#[derive(Clone, PartialEq, Debug)]
pub struct NilpCertificate {
    pub center: CenterPoint<Rational>,
    pub point: MatrixPoint<Rational>,
    /// Minimal rank: products of `kappa` shifted components vanish, some
    /// product of `kappa − 1` does not.
    pub kappa: usize,
    pub s: usize,
    pub m: usize,
}

/// Incrementally maintained basis of a subspace of `𝔽^N`.
struct SpanBasis {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl SpanBasis {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    /// Adds `v` if it is independent of the current basis; returns the
    /// reduced vector in that case.
    fn insert(&mut self, mut v: Vec<Rational>) -> Option<Vec<Rational>> {
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (a, b) in v.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        let p = v.iter().position(|x| !x.is_zero())?;
        let inv = v[p].recip();
        for a in v.iter_mut() {
            *a *= &inv;
        }
        self.rows.push((p, v.clone()));
        Some(v)
    }
}

/// `R ⊙_s A` for an `m × m` grid: `R` has blocks of size `r`, `A` blocks of
/// size `s`, and block `(i, j)` of the result is `Σ_k R_ik ⊗ A_kj`.
fn odot(r: &Matrix<Rational>, rs: usize, a: &Matrix<Rational>, s: usize, m: usize) -> Matrix<Rational> {
    if s == 1 && rs == 1 {
        return r.matmul(a);
    }
    let bs = rs * s;
    let mut out = Matrix::zeros(m * bs, m * bs);
    for i in 0..m {
        for k in 0..m {
            let rik = r.block(i * rs, k * rs, rs, rs);
            if rik.is_zero() {
                continue;
            }
            for j in 0..m {
                let akj = a.block(k * s, j * s, s, s);
                if akj.is_zero() {
                    continue;
                }
                let mut acc = out.block(i * bs, j * bs, bs, bs);
                acc.add_assign_ref(&rik.kron(&akj));
                out.set_block(i * bs, j * bs, &acc);
            }
        }
    }
    out
}

/// Certifies that `p` is nilpotent about `c` and returns the minimal rank
/// `κ ≤ kappa_max`.
///
/// Works on spans rather than individual words: the span of all length-`ℓ`
/// products is mapped to the span of length-`ℓ+1` products, and `κ` is the
/// first length at which that span is zero.
pub fn certify_nilpotent(
    p: &MatrixPoint<Rational>,
    c: &CenterPoint<Rational>,
    kappa_max: usize,
) -> Result<NilpCertificate> {
    let s = c.s();
    if p.n() % s != 0 {
        return Err(Error::SizeMismatch(format!("size {} is not a multiple of the center size {s}", p.n())));
    }
    let m = p.n() / s;
    let shifted = c.shift(p)?;
    let gens = shifted.mats();

    // level ℓ = 0: the unit of the tensor algebra, an m×m identity
    let mut level: Vec<Matrix<Rational>> = vec![Matrix::identity(m)];
    let mut block = 1usize;
    let mut kappa = 0usize;
    while !level.is_empty() {
        kappa += 1;
        if kappa > kappa_max || (s == 1 && kappa > p.n() + 1) {
            return Err(Error::NotNilpotent { kappa_max });
        }
        let next_block = block * s;
        if s > 1 && next_block * m > LIFT_CAP {
            return Err(Error::LiftCapExceeded { size: next_block * m, cap: LIFT_CAP });
        }
        let mut basis = SpanBasis::new();
        let mut next = Vec::new();
        for r in &level {
            for a in gens {
                let prod = odot(r, block, a, s, m);
                let n = prod.rows();
                if let Some(v) = basis.insert(prod.into_data()) {
                    next.push(Matrix::from_vec(n, n, v));
                }
            }
        }
        level = next;
        block = next_block;
    }
    Ok(NilpCertificate { center: c.clone(), point: p.clone(), kappa, s, m })
}

/// `Z ↦ Δ_R F((X⁰,Y⁰), (X⁰,Y⁰))(0, Z)` at the center, required to be invertible.
pub fn delta_ry_center(f: &NcPolyMap<Rational>, center: &CenterPoint<Rational>) -> Result<LinearBlockMap<Rational>> {
    let (a, b) = (f.x_letters(), f.y_letters());
    if f.num_outputs() != b {
        return Err(Error::NotSquare { inputs: b, outputs: f.num_outputs() });
    }
    let l = difference_map(f, center.point(), center.point(), a..a + b)?;
    if l.matrix().rank() < l.matrix().rows() {
        return Err(Error::SingularDifferential);
    }
    Ok(l)
}

/// Result of an exact nilpotent solve.
#[derive(Clone, PartialEq, Debug)]
pub struct NilpSolution {
    pub y: MatrixPoint<Rational>,
    /// Number of chord updates performed.
    pub iterations: usize,
    /// Certified rank of `X` about `X⁰`.
    pub kappa: usize,
    /// Iteration budget actually granted.
    pub budget: usize,
    /// Largest joint rank of `(X, Y^[k])` observed over the iterates, when
    /// every iterate could be certified.
    pub joint_kappa_max: Option<usize>,
    /// `Y^[0], Y^[1], …`, ending with the solution.
    pub iterates: Vec<MatrixPoint<Rational>>,
}

fn split_center(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
) -> Result<(CenterPoint<Rational>, CenterPoint<Rational>)> {
    let (a, b) = (f.x_letters(), f.y_letters());
    if center.d() != a + b {
        return Err(Error::LetterCountMismatch { expected: a + b, found: center.d() });
    }
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("the map needs both X and Y letters".into()));
    }
    match center.point().split(a) {
        (Some(x0), Some(y0)) => Ok((CenterPoint::new(x0), CenterPoint::new(y0))),
        _ => unreachable!("a, b > 0"),
    }
}

fn joint_bound(n: usize, s: usize) -> usize {
    if s == 1 {
        n
    } else {
        64
    }
}

fn joint_kappa(x: &MatrixPoint<Rational>, y: &MatrixPoint<Rational>, center: &CenterPoint<Rational>) -> Option<usize> {
    let joint = x.concat(y).ok()?;
    certify_nilpotent(&joint, center, joint_bound(x.n(), center.s())).ok().map(|c| c.kappa)
}

/// Solves `F(X, Y) = 0` for `Y` near `Y⁰` on a certified nilpotent `X`.
///
/// Starts at `Y⁰^{(m)}` and applies `Y ← Y − L^{-1(m)} F(X, Y)` with `L` the
/// Y-differential at the center; stops at the first exact zero.
pub fn implicit_solve_nilp(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
    x: &MatrixPoint<Rational>,
    cert: &NilpCertificate,
) -> Result<NilpSolution> {
    implicit_solve_nilp_from(f, center, x, cert, None)
}

/// As [`implicit_solve_nilp`] with an optional starting point, which must be
/// jointly nilpotent with `X` about the center.
pub fn implicit_solve_nilp_from(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
    x: &MatrixPoint<Rational>,
    cert: &NilpCertificate,
    seed: Option<&MatrixPoint<Rational>>,
) -> Result<NilpSolution> {
    let (x0, y0) = split_center(f, center)?;
    if &cert.point != x || cert.center != x0 {
        return Err(Error::InvalidArgument("certificate does not belong to this point and center".into()));
    }
    let at_center = f.eval(center.point())?;
    if at_center.iter().any(|r| !r.is_zero()) {
        return Err(Error::CenterResidualNonzero);
    }
    let l_inv = delta_ry_center(f, center)?.inverse()?;

    let mut budget = cert.kappa;
    let mut y = match seed {
        Some(s) => {
            if s.d() != y0.d() || s.n() != x.n() {
                return Err(Error::shape("seed must match the Y letters and the size of X"));
            }
            let joint = certify_nilpotent(&x.concat(s)?, center, joint_bound(x.n(), center.s()))?;
            budget = budget.max(joint.kappa);
            s.clone()
        }
        None => y0.ampliate_to(x.n())?,
    };

    let mut iterates = vec![y.clone()];
    let mut joint_max = Some(0usize);
    for k in 0..=budget {
        joint_max = match (joint_max, joint_kappa(x, &y, center)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let r = f.eval(&x.concat(&y)?)?;
        if r.iter().all(Matrix::is_zero) {
            return Ok(NilpSolution {
                y,
                iterations: k,
                kappa: cert.kappa,
                budget,
                joint_kappa_max: joint_max,
                iterates,
            });
        }
        if k == budget {
            break;
        }
        let step = l_inv.apply_ampliated(&r)?;
        y = MatrixPoint::new(y.mats().iter().zip(&step).map(|(a, b)| a - b).collect())?;
        iterates.push(y.clone());
    }
    Err(Error::IterationBudgetExceeded { budget })
}

/// Solves `g(Y) = X` near `Y⁰` for a square map `g` of Y letters only.
///
/// `X` is certified nilpotent about `g(Y⁰)` with rank at most `kappa_max`.
pub fn inverse_solve_nilp(
    g: &NcPolyMap<Rational>,
    y0: &CenterPoint<Rational>,
    x: &MatrixPoint<Rational>,
    kappa_max: usize,
) -> Result<NilpSolution> {
    let f = NcPolyMap::inverse_problem(g)?;
    let x0 = CenterPoint::new(MatrixPoint::new(g.eval(y0.point())?)?);
    let cert = certify_nilpotent(x, &x0, kappa_max)?;
    implicit_solve_nilp(&f, &x0.concat(y0)?, x, &cert)
}

/// The chord operator `N` with `Δ_R^Y F(P¹, P²) = L^{(m)} ∘ (id + N)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ChordOperator {
    pub n: LinearBlockMap<Rational>,
    /// Least `γ` with `N^γ = 0`.
    pub gamma: usize,
    /// `(id + N)^{-1} = Σ_{j<γ} (−N)^j`.
    pub inverse: LinearBlockMap<Rational>,
}

/// Builds `N` for joint points `P¹, P²` nilpotent about the center, checks
/// `N^γ = 0` within the bound `κ₁ + κ₂ − 1`, and returns the Neumann inverse.
pub fn chord_operator_nilpotency(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
    p1: &MatrixPoint<Rational>,
    p2: &MatrixPoint<Rational>,
) -> Result<ChordOperator> {
    let (a, b) = (f.x_letters(), f.y_letters());
    if p1.n() != p2.n() {
        return Err(Error::SizeMismatch(format!("{} vs {}", p1.n(), p2.n())));
    }
    let bound_for =
        |p: &MatrixPoint<Rational>| certify_nilpotent(p, center, joint_bound(p.n(), center.s())).map(|c| c.kappa);
    let bound = bound_for(p1)? + bound_for(p2)? - 1;

    let m = p1.n() / center.s();
    let l_inv = delta_ry_center(f, center)?.inverse()?.ampliate(m);
    let d = difference_map(f, p1, p2, a..a + b)?;
    let id = LinearBlockMap::identity(p1.n(), b);
    let n = l_inv.compose(&d)?.sub(&id)?;

    let mut power = id.clone();
    let mut gamma = 0;
    while !power.is_zero() {
        gamma += 1;
        if gamma > bound {
            return Err(Error::NotNilpotentOperator { bound });
        }
        power = power.compose(&n)?;
    }
    let minus_n = n.scale(&-Rational::one());
    let mut inverse = LinearBlockMap::zero(p1.n(), b, b);
    let mut term = id;
    for _ in 0..gamma {
        inverse = inverse.add(&term)?;
        term = term.compose(&minus_n)?;
    }
    Ok(ChordOperator { n, gamma, inverse })
}

/// `Δ_R f(X, X)(Z) = −(Δ_R^Y F)^{-1} Δ_R^X F (Z)` at `((X, Y), (X, Y))`.
///
/// With `Δ_R^Y F = L^{(m)} ∘ (id + N)` the inverse is applied as the finite
/// Neumann sum `Σ_j (−N)^j`, one direction at a time, without assembling `N`.
pub fn implicit_derivative_nilp(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
    x: &MatrixPoint<Rational>,
    y: &MatrixPoint<Rational>,
    z: &Direction<Rational>,
) -> Result<Direction<Rational>> {
    let a = f.x_letters();
    if z.d() != a || z.rows() != x.n() || z.cols() != x.n() {
        return Err(Error::shape("direction must match X"));
    }
    let p = x.concat(y)?;
    let kappa = certify_nilpotent(&p, center, joint_bound(p.n(), center.s()))?.kappa;
    let bound = 2 * kappa - 1;
    let l_inv = delta_ry_center(f, center)?.inverse()?;
    let n = x.n();
    let apply = |dir: Vec<Matrix<Rational>>| -> Result<Vec<Matrix<Rational>>> {
        let big = upper_triangular_point(&p, &p, &Direction::new(dir)?)?;
        f.components().iter().map(|c| Ok(c.eval(&big)?.block(0, n, n, n))).collect()
    };
    let zero_x = vec![Matrix::zeros(n, n); a];
    let zero_y = vec![Matrix::zeros(n, n); f.y_letters()];

    let dx = apply([z.mats(), &zero_y].concat())?;
    let mut term: Vec<Matrix<Rational>> = l_inv.apply_ampliated(&dx)?.iter().map(|m| -m).collect();
    let mut w = zero_y.clone();
    for _ in 0..=bound {
        if term.iter().all(Matrix::is_zero) {
            return Direction::new(w);
        }
        for (acc, t) in w.iter_mut().zip(&term) {
            acc.add_assign_ref(t);
        }
        // −N(t) = t − L^{-1(m)} Δ_R^Y F(t)
        let dy = apply([zero_x.as_slice(), &term].concat())?;
        let back = l_inv.apply_ampliated(&dy)?;
        term = term.iter().zip(&back).map(|(t, b)| t - b).collect();
    }
    Err(Error::NotNilpotentOperator { bound })
}

/// `Δ_R f(X, X)(Z)` read off the `(1, 2)` block of `f([[X, Z], [0, X]])`,
/// solving at the doubled point.
pub fn derivative_via_block(
    f: &NcPolyMap<Rational>,
    center: &CenterPoint<Rational>,
    x: &MatrixPoint<Rational>,
    z: &Direction<Rational>,
    kappa_max: usize,
) -> Result<Direction<Rational>> {
    let (x0, _) = split_center(f, center)?;
    let big = upper_triangular_point(x, x, z)?;
    let cert = certify_nilpotent(&big, &x0, kappa_max)?;
    let sol = implicit_solve_nilp(f, center, &big, &cert)?;
    let n = x.n();
    Direction::new(sol.y.mats().iter().map(|m| m.block(0, n, n, n)).collect())
}

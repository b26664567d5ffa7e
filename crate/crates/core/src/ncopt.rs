//! Critical points of trace objectives `g = τ ∘ G` under nc constraints
//! `F(X, Y) = 0`, over real matrices of a fixed size `s`.
//!
//! The Lagrange system at size `s` has `(a + 2b)s²` equations:
//! stationarity in every entry of `X` and `Y`, and `F(X, Y) = 0` entrywise.
//! Gradients come from the difference map of `G` and `F` at `(P, P)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linmap::LinearBlockMap;
use crate::matrix::Matrix;
use crate::ncalg::{MatrixPoint, NcPolyMap};
use crate::ncdiff::difference_map;

/// Normalized trace `τ(W) = (1/n) Σ_k c_k tr(W_k)` built from a linear
/// functional `(c_k)` on `ℝ^e`. Invariant under ampliation.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceFunctional {
    coeffs: Vec<f64>,
}

impl TraceFunctional {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn apply(&self, w: &[Matrix<f64>]) -> Result<f64> {
        if w.len() != self.coeffs.len() {
            return Err(Error::ComponentCountMismatch { left: self.coeffs.len(), right: w.len() });
        }
        let mut acc = 0.0;
        for (c, m) in self.coeffs.iter().zip(w) {
            if !m.is_square() {
                return Err(Error::shape("trace needs square values"));
            }
            acc += c * m.trace() / m.rows() as f64;
        }
        Ok(acc)
    }
}

/// Candidate critical point with multipliers `Λ_k ∈ ℝ^{s×s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KktPoint {
    pub s: usize,
    pub x: MatrixPoint<f64>,
    pub y: MatrixPoint<f64>,
    pub lambda: Vec<Matrix<f64>>,
}

impl KktPoint {
    pub fn new(x: MatrixPoint<f64>, y: MatrixPoint<f64>, lambda: Vec<Matrix<f64>>) -> Result<Self> {
        let s = x.n();
        if y.n() != s || lambda.iter().any(|l| l.shape() != (s, s)) {
            return Err(Error::shape(format!("all blocks must be {s}x{s}")));
        }
        if lambda.len() != y.d() {
            return Err(Error::ComponentCountMismatch { left: y.d(), right: lambda.len() });
        }
        Ok(Self { s, x, y, lambda })
    }

    fn joint(&self) -> MatrixPoint<f64> {
        self.x.concat(&self.y).expect("sizes checked on construction")
    }

    fn to_vec(&self) -> Vec<f64> {
        self.x.mats().iter().chain(self.y.mats()).chain(&self.lambda).flat_map(|m| m.data().iter().copied()).collect()
    }

    fn from_vec(&self, v: &[f64]) -> Self {
        let ss = self.s * self.s;
        let mut chunks = v.chunks(ss).map(|c| Matrix::from_vec(self.s, self.s, c.to_vec()));
        let x = (0..self.x.d()).map(|_| chunks.next().unwrap()).collect();
        let y = (0..self.y.d()).map(|_| chunks.next().unwrap()).collect();
        let lambda = chunks.collect();
        Self { s: self.s, x: MatrixPoint::new(x).unwrap(), y: MatrixPoint::new(y).unwrap(), lambda }
    }
}

/// Norms of the three equation groups.
#[derive(Clone, Debug, PartialEq)]
pub struct KktResidual {
    /// Stationarity in the entries of `X`.
    pub stationarity_x: f64,
    /// Stationarity in the entries of `Y`.
    pub stationarity_y: f64,
    /// `F(X, Y)` entrywise.
    pub constraint: f64,
}

impl KktResidual {
    pub fn total(&self) -> f64 {
        (self.stationarity_x.powi(2) + self.stationarity_y.powi(2) + self.constraint.powi(2)).sqrt()
    }
}

fn check_problem(g: &NcPolyMap<f64>, tau: &TraceFunctional, f: &NcPolyMap<f64>) -> Result<()> {
    if g.num_outputs() != tau.coeffs().len() {
        return Err(Error::ComponentCountMismatch { left: tau.coeffs().len(), right: g.num_outputs() });
    }
    if (g.x_letters(), g.y_letters()) != (f.x_letters(), f.y_letters()) {
        return Err(Error::shape("objective and constraint use different letter splits"));
    }
    if f.num_outputs() != f.y_letters() {
        return Err(Error::NotSquare { inputs: f.y_letters(), outputs: f.num_outputs() });
    }
    Ok(())
}

fn check_point(f: &NcPolyMap<f64>, p: &KktPoint) -> Result<()> {
    if p.x.d() != f.x_letters() {
        return Err(Error::LetterCountMismatch { expected: f.x_letters(), found: p.x.d() });
    }
    if p.y.d() != f.y_letters() {
        return Err(Error::LetterCountMismatch { expected: f.y_letters(), found: p.y.d() });
    }
    Ok(())
}

/// `τ(G(X, Y))`.
pub fn trace_objective(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    x: &MatrixPoint<f64>,
    y: &MatrixPoint<f64>,
) -> Result<f64> {
    tau.apply(&g.eval_xy(Some(x), y)?)
}

/// Gradient of `τ(G(X, Y))` in the entries of `X` then `Y`, entry `(α, β)`
/// of letter `j` at index `j·s² + α·s + β`.
pub fn objective_gradient(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    x: &MatrixPoint<f64>,
    y: &MatrixPoint<f64>,
) -> Result<Vec<f64>> {
    if g.num_outputs() != tau.coeffs().len() {
        return Err(Error::ComponentCountMismatch { left: tau.coeffs().len(), right: g.num_outputs() });
    }
    gradient(g, tau, &x.concat(y)?, 0..g.num_letters())
}

/// Gradient of `τ ∘ G` over the entries of the letters in `range`, indexed as
/// the columns of the difference map.
fn gradient(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    p: &MatrixPoint<f64>,
    range: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let dg = difference_map(g, p, p, range)?;
    Ok(trace_rows(&dg, tau.coeffs()))
}

/// Row vector `v ↦ Σ_k c_k tr(L(v)_k)/s` of a block map.
fn trace_rows(l: &LinearBlockMap<f64>, coeffs: &[f64]) -> Vec<f64> {
    let s = l.s();
    let ss = s * s;
    let m = l.matrix();
    (0..m.cols())
        .map(|col| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * (0..s).map(|a| m[(k * ss + a * s + a, col)]).sum::<f64>() / s as f64)
                .sum()
        })
        .collect()
}

fn residual_vector(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    f: &NcPolyMap<f64>,
    p: &KktPoint,
) -> Result<(Vec<f64>, usize)> {
    let s = p.s;
    let ss = s * s;
    let (a, b) = (f.x_letters(), f.y_letters());
    let joint = p.joint();
    let grad = gradient(g, tau, &joint, 0..a + b)?;
    let df = difference_map(f, &joint, &joint, 0..a + b)?;
    let dfm = df.matrix();
    let mut out = grad;
    for (col, r) in out.iter_mut().enumerate() {
        for (k, lk) in p.lambda.iter().enumerate() {
            for al in 0..s {
                for be in 0..s {
                    *r += lk[(be, al)] * dfm[(k * ss + al * s + be, col)];
                }
            }
        }
    }
    for fk in f.eval(&joint)? {
        out.extend_from_slice(fk.data());
    }
    Ok((out, a * ss))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Norms of the stationarity and constraint groups at `p`.
pub fn kkt_residual(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    f: &NcPolyMap<f64>,
    p: &KktPoint,
) -> Result<KktResidual> {
    check_problem(g, tau, f)?;
    check_point(f, p)?;
    let (r, split) = residual_vector(g, tau, f, p)?;
    let n_y = f.y_letters() * p.s * p.s;
    Ok(KktResidual {
        stationarity_x: norm2(&r[..split]),
        stationarity_y: norm2(&r[split..split + n_y]),
        constraint: norm2(&r[split + n_y..]),
    })
}

#[derive(Clone, Debug)]
pub struct KktOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Step of the central finite-difference Jacobian.
    pub fd_step: f64,
}

impl Default for KktOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, fd_step: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct KktSolution {
    pub point: KktPoint,
    pub residual: KktResidual,
    /// Euclidean norm of the full residual after each Newton step.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Damped Newton on the Lagrange system with a central finite-difference
/// Jacobian. Finds critical points; no claim of maximality.
pub fn solve_kkt(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    f: &NcPolyMap<f64>,
    start: &KktPoint,
    opts: &KktOptions,
) -> Result<KktSolution> {
    check_problem(g, tau, f)?;
    check_point(f, start)?;
    let eval = |u: &[f64]| residual_vector(g, tau, f, &start.from_vec(u)).map(|r| r.0);
    let mut u = start.to_vec();
    let mut r = eval(&u)?;
    let mut history = vec![norm2(&r)];
    for it in 0..=opts.max_iter {
        let rn = norm2(&r);
        if rn <= opts.tol {
            let point = start.from_vec(&u);
            let residual = kkt_residual(g, tau, f, &point)?;
            return Ok(KktSolution { point, residual, history, iterations: it });
        }
        if it == opts.max_iter {
            break;
        }
        let n = u.len();
        let h = opts.fd_step;
        let cols = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut up = u.clone();
                let mut um = u.clone();
                up[j] += h;
                um[j] -= h;
                let (rp, rm) = (eval(&up)?, eval(&um)?);
                Ok(rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let jac = Matrix::from_fn(n, n, |i, j| cols[j][i]);
        let rhs = Matrix::from_vec(n, 1, r.iter().map(|v| -v).collect());
        let step = jac.solve(&rhs).ok_or(Error::SingularKktJacobian)?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.data()).map(|(a, d)| a + t * d).collect();
            let rt = eval(&trial)?;
            if norm2(&rt) < rn || t < 1e-4 {
                u = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
        history.push(norm2(&r));
    }
    Err(Error::MaxIterationsExceeded { iterations: opts.max_iter, residual: norm2(&r) })
}

/// Multipliers solving the `Y` stationarity equations exactly. At `s = 1`
/// this is `λ_k = −Σ_j ∂g/∂y_j ((δ^Y F)^{-1})_{jk}`.
pub fn recover_multipliers(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    f: &NcPolyMap<f64>,
    x: &MatrixPoint<f64>,
    y: &MatrixPoint<f64>,
) -> Result<Vec<Matrix<f64>>> {
    check_problem(g, tau, f)?;
    let (a, b) = (f.x_letters(), f.y_letters());
    let s = x.n();
    let ss = s * s;
    let joint = x.concat(y)?;
    let gy = gradient(g, tau, &joint, a..a + b)?;
    let dfy = difference_map(f, &joint, &joint, a..a + b)?;
    let m = dfy.matrix();
    // unknown Λ_k[β, α] multiplies ∂F_k[α, β]; index unknowns by the F entry
    // so that Σ_u Λ(u) m[u, col] = −gy[col], i.e. mᵀ λ = −gy
    let lam = m
        .transpose()
        .solve(&Matrix::from_vec(b * ss, 1, gy.iter().map(|v| -v).collect()))
        .ok_or(Error::SingularDifferential)?;
    Ok((0..b).map(|k| Matrix::from_fn(s, s, |be, al| lam.data()[k * ss + al * s + be])).collect())
}

/// Residual norm of the size-`sm` necessary condition
/// `δ^X g = δ^Y g ∘ ((δ^Y F)^{-1} δ^X F)^{(m)}` at `(X^{(m)}, Y^{(m)})`.
pub fn ampliation_consistency(
    g: &NcPolyMap<f64>,
    tau: &TraceFunctional,
    f: &NcPolyMap<f64>,
    p: &KktPoint,
    m: usize,
) -> Result<f64> {
    check_problem(g, tau, f)?;
    check_point(f, p)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let (a, b) = (f.x_letters(), f.y_letters());
    let joint = p.joint();
    let dfy = difference_map(f, &joint, &joint, a..a + b)?;
    let dfx = difference_map(f, &joint, &joint, 0..a)?;
    let k = dfy.inverse()?.compose(&dfx)?.ampliate(m);
    let big = joint.ampliate(m);
    let gx = gradient(g, tau, &big, 0..a)?;
    let gy = gradient(g, tau, &big, a..a + b)?;
    let km = k.matrix();
    let r: Vec<f64> =
        (0..gx.len()).map(|col| gx[col] - (0..gy.len()).map(|row| gy[row] * km[(row, col)]).sum::<f64>()).collect();
    Ok(norm2(&r))
}

use super::contraction::{center_differential, ContractionReport};
use super::norm::{ns_norm, tuple_norm};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ncalg::{CenterPoint, Direction, MatrixPoint, NcPolyMap};
use crate::ncdiff::{delta_r_block, difference_map, upper_triangular_point};
use crate::scalar::FloatScalar;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Stop once `‖F(X, Y)‖ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// When set, iterates must stay within this distance of `Y⁰^{(m)}`.
    pub beta: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, beta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
}

/// Iteration trace of a chord solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `‖F(X, Y^k)‖` for every iterate, starting at `Y⁰^{(m)}`.
    pub residuals: Vec<f64>,
    /// `‖Y^{k+1} − Y^k‖`.
    pub step_norms: Vec<f64>,
    /// Largest ratio of consecutive step norms above roundoff level.
    pub contraction_estimate: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub radii: Option<ContractionReport>,
    /// Largest deviation of `δg(f(X)) ∘ δf(X)` from the identity on the
    /// sampled directions (inverse problems only).
    pub derivative_check: Option<f64>,
}

/// Steps smaller than this are treated as roundoff when estimating ratios.
const STEP_FLOOR: f64 = 1e-14;

fn ratio_estimate(steps: &[f64]) -> f64 {
    steps.windows(2).filter(|w| w[0] > STEP_FLOOR && w[1] > STEP_FLOOR).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

/// Solves `F(X, Y) = 0` by the chord iteration `Y ← Y − L^{-1(m)} F(X, Y)`
/// from `Y⁰^{(m)}`, with `L = δ^Y F` frozen at the center.
pub fn implicit_solve_num<T: FloatScalar>(
    f: &NcPolyMap<T>,
    center: &CenterPoint<T>,
    x: &MatrixPoint<T>,
    opts: &SolveOptions,
) -> Result<(MatrixPoint<T>, SolveReport)> {
    let a = f.x_letters();
    if x.d() != a {
        return Err(Error::LetterCountMismatch { expected: a, found: x.d() });
    }
    let (_, l_inv) = center_differential(f, center)?;
    let y0 = match center.point().split(a) {
        (_, Some(y0)) => CenterPoint::new(y0),
        _ => return Err(Error::InvalidArgument("the map needs Y letters".into())),
    };
    let y_start = y0.ampliate_to(x.n())?;
    let mut y = y_start.clone();
    let mut residuals = Vec::new();
    let mut step_norms = Vec::new();
    for k in 0..=opts.max_iter {
        let r = f.eval(&x.concat(&y)?)?;
        let rn = tuple_norm(&r);
        residuals.push(rn);
        if !rn.is_finite() {
            return Err(Error::DomainEscape { distance: f64::INFINITY, beta: opts.beta.unwrap_or(f64::INFINITY) });
        }
        if rn <= opts.tol {
            let report = SolveReport {
                contraction_estimate: ratio_estimate(&step_norms),
                residuals,
                step_norms,
                iterations: k,
                termination: Termination::Converged,
                radii: None,
                derivative_check: None,
            };
            return Ok((y, report));
        }
        if k == opts.max_iter {
            return Err(Error::MaxIterationsExceeded { iterations: k, residual: rn });
        }
        let step = l_inv.apply_ampliated(&r)?;
        step_norms.push(tuple_norm(&step));
        y = MatrixPoint::new(y.mats().iter().zip(&step).map(|(a, b)| a - b).collect())?;
        if let Some(beta) = opts.beta {
            let distance = ns_norm(&y.sub(&y_start)?);
            if distance > beta {
                return Err(Error::DomainEscape { distance, beta });
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// `δf(X)(Z) = −(δ^Y F(X, Y))^{-1} δ^X F(X, Y)(Z)` at a solution `Y = f(X)`.
pub fn implicit_derivative_num<T: FloatScalar>(
    f: &NcPolyMap<T>,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    z: &Direction<T>,
) -> Result<Direction<T>> {
    let (a, b) = (f.x_letters(), f.y_letters());
    let p = x.concat(y)?;
    let dy = difference_map(f, &p, &p, a..a + b)?;
    let dx = difference_map(f, &p, &p, 0..a)?;
    let w = dy.inverse()?.apply(&dx.apply(z.mats())?)?;
    Direction::new(w.iter().map(|m| -m).collect())
}

/// Solves `g(Y) = X` near `Y⁰` through `F(X, Y) = g(Y) − X`, then checks
/// `δg(f(X)) ∘ δf(X) ≈ id` on the matrix-unit directions. `δf(X)(W)` is read
/// off the `(1, 2)` block of `f([[X, εW], [0, X]])`.
pub fn inverse_solve_num<T: FloatScalar>(
    g: &NcPolyMap<T>,
    y0: &CenterPoint<T>,
    x: &MatrixPoint<T>,
    opts: &SolveOptions,
) -> Result<(MatrixPoint<T>, SolveReport)> {
    let f = NcPolyMap::inverse_problem(g)?;
    let x0 = CenterPoint::new(MatrixPoint::new(g.eval(y0.point())?)?);
    let center = x0.concat(y0)?;
    let (y, mut report) = implicit_solve_num(&f, &center, x, opts)?;
    report.derivative_check = derivative_check(g, &f, &center, x, &y, opts);
    Ok((y, report))
}

fn derivative_check<T: FloatScalar>(
    g: &NcPolyMap<T>,
    f: &NcPolyMap<T>,
    center: &CenterPoint<T>,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    opts: &SolveOptions,
) -> Option<f64> {
    const EPS: f64 = 0.05;
    let n = x.n();
    let inner = SolveOptions { tol: (opts.tol * EPS / 10.0).max(1e-15), max_iter: opts.max_iter, beta: None };
    let mut worst = 0.0f64;
    for i in 0..x.d() {
        for (alpha, beta) in [(0, 0), (0, n - 1), (n - 1, 0)] {
            let w = Direction::unit(x.d(), n, n, i, alpha, beta);
            let big = upper_triangular_point(x, x, &w.scale(&T::from_f64(EPS))).ok()?;
            let (fy, _) = implicit_solve_num(f, center, &big, &inner).ok()?;
            let df: Vec<Matrix<T>> =
                fy.mats().iter().map(|m| m.block(0, n, n, n).scale(&T::from_f64(1.0 / EPS))).collect();
            let df = Direction::new(df).ok()?;
            for (k, gk) in g.components().iter().enumerate() {
                let back = delta_r_block(gk, y, y, &df).ok()?;
                worst = worst.max(back.max_abs_diff(&w.mats()[k]));
            }
        }
    }
    Some(worst)
}

//! Initial value problems `Ẏ = g(t, Y)`, `Y(t₀) = X`, with a right-hand side
//! that is an nc polynomial in `Y` for every fixed `t`.
//!
//! The flow is integrated by classical RK4 on a uniform grid over
//! `[t₀ − δ, t₀ + δ]`; sensitivities come from the variational equation
//! `Ż = δ^Y g(t, Y(t))(Z) + Ġ(t)`, `Z(t₀) = G(t₀)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ncalg::{MatrixPoint, NcPolyMap};
use crate::ncdiff::{delta_r_block, difference_map};
use crate::opspace::{cb_norm_estimate, ns_norm, spectral_norm};

/// Norm beyond which a trajectory counts as blown up.
pub const BLOWUP_NORM: f64 = 1e8;

/// `g(t, Y) = Σ_k t^k G_k(Y)` with each `G_k` a square map of Y letters.
#[derive(Clone, Debug)]
pub struct TimePoly {
    terms: Vec<NcPolyMap<f64>>,
}

impl TimePoly {
    pub fn new(terms: Vec<NcPolyMap<f64>>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidArgument("right-hand side has no terms".into()))?;
        let b = first.y_letters();
        for g in &terms {
            if g.x_letters() != 0 || g.y_letters() != b {
                return Err(Error::InvalidArgument("every term must use the same Y letters only".into()));
            }
            if g.num_outputs() != b {
                return Err(Error::NotSquare { inputs: b, outputs: g.num_outputs() });
            }
        }
        Ok(Self { terms })
    }

    /// Time-independent right-hand side.
    pub fn autonomous(g: NcPolyMap<f64>) -> Result<Self> {
        Self::new(vec![g])
    }

    pub fn letters(&self) -> usize {
        self.terms[0].y_letters()
    }

    pub fn terms(&self) -> &[NcPolyMap<f64>] {
        &self.terms
    }

    pub fn eval(&self, t: f64, y: &MatrixPoint<f64>) -> Result<MatrixPoint<f64>> {
        let mut acc = MatrixPoint::zeros(self.letters(), y.n());
        let mut tk = 1.0;
        for g in &self.terms {
            if tk != 0.0 {
                acc = acc.add(&MatrixPoint::new(g.eval(y)?)?.scale(&tk))?;
            }
            tk *= t;
        }
        Ok(acc)
    }

    /// `δ^Y g(t, Y)(Z)`.
    pub fn derivative(&self, t: f64, y: &MatrixPoint<f64>, z: &MatrixPoint<f64>) -> Result<MatrixPoint<f64>> {
        let dir = z.to_direction();
        let mut out = vec![Matrix::zeros(y.n(), y.n()); self.letters()];
        let mut tk = 1.0;
        for g in &self.terms {
            if tk != 0.0 {
                for (k, p) in g.components().iter().enumerate() {
                    out[k].axpy(&tk, &delta_r_block(p, y, y, &dir)?);
                }
            }
            tk *= t;
        }
        MatrixPoint::new(out)
    }
}

/// Grid samples of a solution on `[t₀ − δ, t₀ + δ]`, ascending in time.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t0: f64,
    pub delta: f64,
    pub times: Vec<f64>,
    pub values: Vec<MatrixPoint<f64>>,
    pub derivatives: Vec<MatrixPoint<f64>>,
}

impl Trajectory {
    /// Builds a trajectory from externally computed samples.
    pub fn from_samples(
        t0: f64,
        delta: f64,
        times: Vec<f64>,
        values: Vec<MatrixPoint<f64>>,
        derivatives: Vec<MatrixPoint<f64>>,
    ) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() || times.len() != derivatives.len() {
            return Err(Error::shape("trajectory needs matching times, values and derivatives"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must increase".into()));
        }
        Ok(Self { t0, delta, times, values, derivatives })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the node at `t₀`.
    pub fn t0_index(&self) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - self.t0).abs().total_cmp(&(b.1 - self.t0).abs()))
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Cubic Hermite interpolation between grid nodes.
    pub fn value_at(&self, t: f64) -> Result<MatrixPoint<f64>> {
        let (lo, hi) = (self.start(), self.end());
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::InvalidArgument(format!("t = {t} lies outside [{lo}, {hi}]")));
        }
        let t = t.clamp(lo, hi);
        let k = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => return Ok(self.values[k].clone()),
            Err(k) => k.clamp(1, self.times.len() - 1) - 1,
        };
        Ok(hermite(
            self.times[k],
            self.times[k + 1],
            &self.values[k],
            &self.values[k + 1],
            &self.derivatives[k],
            &self.derivatives[k + 1],
            t,
        ))
    }

    pub fn endpoint(&self) -> &MatrixPoint<f64> {
        self.values.last().unwrap()
    }

    /// `max{‖Y‖_∞, ‖Ẏ‖_∞}` over the grid nodes only.
    pub fn c1_norm_sampled(&self) -> f64 {
        let y = self.values.iter().map(ns_norm).fold(0.0, f64::max);
        let dy = self.derivatives.iter().map(ns_norm).fold(0.0, f64::max);
        y.max(dy)
    }
}

fn hermite(
    t0: f64,
    t1: f64,
    y0: &MatrixPoint<f64>,
    y1: &MatrixPoint<f64>,
    d0: &MatrixPoint<f64>,
    d1: &MatrixPoint<f64>,
    t: f64,
) -> MatrixPoint<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    let mats = (0..y0.d())
        .map(|i| {
            let mut m = y0.component(i).scale(&h00);
            m.axpy(&(h10 * h), d0.component(i));
            m.axpy(&h01, y1.component(i));
            m.axpy(&(h11 * h), d1.component(i));
            m
        })
        .collect();
    MatrixPoint::new(mats).expect("same shapes")
}

fn axpy_point(y: &MatrixPoint<f64>, c: f64, k: &MatrixPoint<f64>) -> MatrixPoint<f64> {
    let mats = y.mats().iter().zip(k.mats()).map(|(a, b)| {
        let mut m = a.clone();
        m.axpy(&c, b);
        m
    });
    MatrixPoint::new(mats.collect()).expect("same shapes")
}

fn rk4_step(
    f: &impl Fn(f64, &MatrixPoint<f64>) -> Result<MatrixPoint<f64>>,
    t: f64,
    y: &MatrixPoint<f64>,
    h: f64,
) -> Result<MatrixPoint<f64>> {
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &axpy_point(y, h / 2.0, &k1))?;
    let k3 = f(t + h / 2.0, &axpy_point(y, h / 2.0, &k2))?;
    let k4 = f(t + h, &axpy_point(y, h, &k3))?;
    let mut out = axpy_point(y, h / 6.0, &k1);
    out = axpy_point(&out, h / 3.0, &k2);
    out = axpy_point(&out, h / 3.0, &k3);
    Ok(axpy_point(&out, h / 6.0, &k4))
}

fn check_finite(t: f64, y: &MatrixPoint<f64>) -> Result<()> {
    let norm = ns_norm(y);
    if !norm.is_finite() || norm > BLOWUP_NORM {
        return Err(Error::BlowupDetected { t, norm });
    }
    Ok(())
}

/// Integrates `Ẏ = g(t, Y)`, `Y(t₀) = X` with RK4 using `steps` uniform steps
/// in each direction from `t₀` (so `h = δ / steps`).
pub fn integrate_ivp(g: &TimePoly, t0: f64, x: &MatrixPoint<f64>, delta: f64, steps: usize) -> Result<Trajectory> {
    if steps < 16 {
        return Err(Error::InvalidArgument(format!("at least 16 steps are required, got {steps}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if x.d() != g.letters() {
        return Err(Error::LetterCountMismatch { expected: g.letters(), found: x.d() });
    }
    let h = delta / steps as f64;
    let rhs = |t: f64, y: &MatrixPoint<f64>| g.eval(t, y);
    let run = |sign: f64| -> Result<Vec<MatrixPoint<f64>>> {
        let mut out = Vec::with_capacity(steps);
        let mut y = x.clone();
        for k in 0..steps {
            let t = t0 + sign * h * k as f64;
            y = rk4_step(&rhs, t, &y, sign * h)?;
            check_finite(t + sign * h, &y)?;
            out.push(y.clone());
        }
        Ok(out)
    };
    let backward = run(-1.0)?;
    let forward = run(1.0)?;
    let mut times = Vec::with_capacity(2 * steps + 1);
    let mut values = Vec::with_capacity(2 * steps + 1);
    for (k, y) in backward.into_iter().enumerate().rev() {
        times.push(t0 - h * (k + 1) as f64);
        values.push(y);
    }
    times.push(t0);
    values.push(x.clone());
    for (k, y) in forward.into_iter().enumerate() {
        times.push(t0 + h * (k + 1) as f64);
        values.push(y);
    }
    let derivatives = times.iter().zip(&values).map(|(&t, y)| g.eval(t, y)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { t0, delta, times, values, derivatives })
}

/// `max_k ‖Y(t_k) − X − ∫_{t₀}^{t_k} g(τ, Y(τ)) dτ‖` over the grid, with the
/// integral by Simpson's rule per interval. The right-hand side is recomputed
/// from the node values and midpoints come from Hermite interpolation, so a
/// corrupted node shows up in the residual.
pub fn ivp_residual(g: &TimePoly, t0: f64, x: &MatrixPoint<f64>, traj: &Trajectory) -> Result<f64> {
    let n = traj.times.len();
    let slopes = traj.times.iter().zip(&traj.values).map(|(&t, y)| g.eval(t, y)).collect::<Result<Vec<_>>>()?;
    // integral of g over each interval [t_k, t_{k+1}]
    let pieces = (0..n - 1)
        .map(|k| {
            let (ta, tb) = (traj.times[k], traj.times[k + 1]);
            let mid =
                hermite(ta, tb, &traj.values[k], &traj.values[k + 1], &slopes[k], &slopes[k + 1], 0.5 * (ta + tb));
            let gm = g.eval(0.5 * (ta + tb), &mid)?;
            let w = (tb - ta) / 6.0;
            let acc = axpy_point(&slopes[k].scale(&w), 4.0 * w, &gm);
            Ok(axpy_point(&acc, w, &slopes[k + 1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let i0 = traj
        .times
        .iter()
        .position(|&t| (t - t0).abs() <= 1e-12 * t0.abs().max(1.0))
        .ok_or_else(|| Error::InvalidArgument("t0 is not a grid node".into()))?;
    let mut worst = ns_norm(&traj.values[i0].sub(x)?);
    let mut integral = MatrixPoint::zeros(x.d(), x.n());
    for k in i0 + 1..n {
        integral = integral.add(&pieces[k - 1])?;
        let r = traj.values[k].sub(x)?.sub(&integral)?;
        worst = worst.max(ns_norm(&r));
    }
    let mut integral = MatrixPoint::zeros(x.d(), x.n());
    for k in (0..i0).rev() {
        integral = integral.sub(&pieces[k])?;
        let r = traj.values[k].sub(x)?.sub(&integral)?;
        worst = worst.max(ns_norm(&r));
    }
    Ok(worst)
}

/// Polynomial forcing `G(t) = Σ_k t^k G_k` for the variational equation.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub coeffs: Vec<MatrixPoint<f64>>,
}

impl Forcing {
    pub fn constant(h: MatrixPoint<f64>) -> Self {
        Self { coeffs: vec![h] }
    }

    pub fn value(&self, t: f64) -> MatrixPoint<f64> {
        let mut acc = self.coeffs[0].scale(&0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            acc = axpy_point(&acc, t.powi(k as i32), c);
        }
        acc
    }

    pub fn rate(&self, t: f64) -> MatrixPoint<f64> {
        let mut acc = self.coeffs[0].scale(&0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            acc = axpy_point(&acc, k as f64 * t.powi(k as i32 - 1), c);
        }
        acc
    }
}

/// Integrates `Ż = δ^Y g(t, Y(t))(Z) + Ġ(t)`, `Z(t₀) = G(t₀)`, forward from
/// `t₀` on the trajectory's grid and returns `Z` at every forward node.
pub fn sensitivity_path(g: &TimePoly, traj: &Trajectory, forcing: &Forcing) -> Result<Vec<MatrixPoint<f64>>> {
    let start = forcing.value(traj.t0);
    let y0 = &traj.values[traj.t0_index()];
    if start.d() != y0.d() || start.n() != y0.n() {
        return Err(Error::shape("sensitivity seed must match the trajectory"));
    }
    let rhs = |t: f64, z: &MatrixPoint<f64>| -> Result<MatrixPoint<f64>> {
        let y = traj.value_at(t)?;
        g.derivative(t, &y, z)?.add(&forcing.rate(t))
    };
    let i0 = traj.t0_index();
    let mut z = start;
    let mut out = vec![z.clone()];
    for k in i0..traj.times.len() - 1 {
        let (ta, tb) = (traj.times[k], traj.times[k + 1]);
        z = rk4_step(&rhs, ta, &z, tb - ta)?;
        out.push(z.clone());
    }
    Ok(out)
}

/// `Z(t₀ + δ)` for the constant forcing `G ≡ H`: the derivative of the flow's
/// endpoint in the direction `H` of the initial value.
pub fn flow_sensitivity(g: &TimePoly, traj: &Trajectory, h: &MatrixPoint<f64>) -> Result<MatrixPoint<f64>> {
    Ok(sensitivity_path(g, traj, &Forcing::constant(h.clone()))?.pop().unwrap())
}

/// Monitoring of the contraction condition `κ·δ < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaReport {
    /// Sampled `max_t ‖δ^Y g(t, Y(t))‖_cb` over a subset of nodes.
    pub kappa: f64,
    pub kappa_delta: f64,
    /// `(1 − κδ + κ)/(1 − κδ)` when `κδ < 1`.
    pub cb_bound: Option<f64>,
    pub warning: bool,
    /// `C¹` norm of the trajectory, sampled on the grid.
    pub c1_norm_sampled: f64,
    pub nodes_sampled: usize,
}

pub fn kappa_report(g: &TimePoly, traj: &Trajectory, nodes: usize, seed: u64) -> Result<KappaReport> {
    let total = traj.times.len();
    let nodes = nodes.clamp(1, total);
    let picks: Vec<usize> =
        (0..nodes).map(|i| if nodes == 1 { total / 2 } else { i * (total - 1) / (nodes - 1) }).collect();
    let b = g.letters();
    let kappas = picks
        .par_iter()
        .map(|&k| {
            let t = traj.times[k];
            let y = &traj.values[k];
            let mut tk = 1.0;
            let mut map = None;
            for term in g.terms() {
                let d = difference_map(term, y, y, 0..b)?.scale(&tk);
                map = Some(match map {
                    None => d,
                    Some(m) => d.add(&m)?,
                });
                tk *= t;
            }
            Ok(cb_norm_estimate(&map.unwrap(), 2, 2, seed).value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let kappa = kappas.into_iter().fold(0.0, f64::max);
    let kd = kappa * traj.delta;
    Ok(KappaReport {
        kappa,
        kappa_delta: kd,
        cb_bound: (kd < 1.0).then(|| (1.0 - kd + kappa) / (1.0 - kd)),
        warning: kd >= 1.0,
        c1_norm_sampled: traj.c1_norm_sampled(),
        nodes_sampled: nodes,
    })
}

/// Outcome of the nc-function checks on the flow map.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowCheckReport {
    pub samples: usize,
    /// Largest `‖flow(X ⊕ X′) − flow(X) ⊕ flow(X′)‖` at the window ends.
    pub direct_sum_error: f64,
    /// Largest `‖flow(SXS⁻¹) − S flow(X) S⁻¹‖ / cond(S)`.
    pub similarity_error: f64,
    pub passed: bool,
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix<f64> {
    Matrix::from_fn(n, n, |_, _| scale * rng.random_range(-1.0..1.0))
}

/// Checks that the flow respects direct sums (≤ 1e−9) and similarities
/// (≤ 1e−6·cond S) on random small initial values.
pub fn flow_nc_check(
    g: &TimePoly,
    t0: f64,
    delta: f64,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<FlowCheckReport> {
    let b = g.letters();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<_> = (0..samples)
        .map(|_| {
            let n1 = rng.random_range(1..=2);
            let n2 = rng.random_range(1..=2);
            let x1: Vec<_> = (0..b).map(|_| random_matrix(&mut rng, n1, 0.3)).collect();
            let x2: Vec<_> = (0..b).map(|_| random_matrix(&mut rng, n2, 0.3)).collect();
            let s = &Matrix::identity(n1) + &random_matrix(&mut rng, n1, 0.3 / n1 as f64);
            (x1, x2, s)
        })
        .collect();
    let errors = cases
        .into_par_iter()
        .map(|(x1, x2, s)| -> Result<(f64, f64)> {
            let p1 = MatrixPoint::new(x1)?;
            let p2 = MatrixPoint::new(x2)?;
            let flow = |p: &MatrixPoint<f64>| -> Result<(MatrixPoint<f64>, MatrixPoint<f64>)> {
                let tr = integrate_ivp(g, t0, p, delta, steps)?;
                Ok((tr.values[0].clone(), tr.endpoint().clone()))
            };
            let (a1, e1) = flow(&p1)?;
            let (a2, e2) = flow(&p2)?;
            let (a12, e12) = flow(&p1.direct_sum(&p2)?)?;
            let ds = a12.max_abs_diff(&a1.direct_sum(&a2)?).max(e12.max_abs_diff(&e1.direct_sum(&e2)?));
            let s_inv = s.inverse().ok_or(Error::SingularSimilarity)?;
            let cond = spectral_norm(&s) * spectral_norm(&s_inv);
            let (as_, es) = flow(&p1.similarity(&s)?)?;
            let sim = as_.max_abs_diff(&a1.similarity(&s)?).max(es.max_abs_diff(&e1.similarity(&s)?)) / cond;
            Ok((ds, sim))
        })
        .collect::<Result<Vec<_>>>()?;
    let direct_sum_error = errors.iter().map(|e| e.0).fold(0.0, f64::max);
    let similarity_error = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(FlowCheckReport {
        samples,
        direct_sum_error,
        similarity_error,
        passed: direct_sum_error <= 1e-9 && similarity_error <= 1e-6,
    })
}

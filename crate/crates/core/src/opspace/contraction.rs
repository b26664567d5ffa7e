use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::norm::{cb_norm_estimate, operator_norm_estimate, tuple_norm};
use crate::error::{Error, Result};
use crate::linmap::LinearBlockMap;
use crate::matrix::Matrix;
use crate::ncalg::{CenterPoint, MatrixPoint, NcPolyMap};
use crate::ncdiff::difference_map;
use crate::scalar::FloatScalar;

pub const DEFAULT_SEED: u64 = 0x9E37_79B9;

/// Multiplier applied to sampled cb-norms before they enter any radius.
pub const CB_SAFETY: f64 = 1.25;

/// Smallest radius tried before giving up.
pub const RADIUS_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Largest ampliation level sampled.
    pub m_probe: usize,
    /// Sample points per radius test.
    pub samples: usize,
    /// Random starts per norm estimate.
    pub trials: usize,
    /// Ampliation levels used for the cb-norm of the inverse differential.
    pub m_cb: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { m_probe: 2, samples: 24, trials: 3, m_cb: 3, seed: DEFAULT_SEED }
    }
}

/// Radii certified by sampling around the center.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    /// Radius of the joint ball on which the chord map contracts.
    pub gamma: f64,
    /// Radius of the X-ball whose points admit a solution in the β-ball.
    pub alpha: f64,
    /// Radius of the Y-ball mapped into itself.
    pub beta: f64,
    /// Largest sampled norm of the chord map's derivative inside the γ-ball.
    pub observed_coeff: f64,
    /// Inflated cb-norm estimate `M` of the inverse differential.
    pub m_bound: f64,
    /// Levels `m ≤ m_probe` were sampled; nothing is claimed beyond them.
    pub m_probe: usize,
}

/// Y-differential `δ^Y F` at the center together with its inverse.
pub(crate) fn center_differential<T: FloatScalar>(
    f: &NcPolyMap<T>,
    center: &CenterPoint<T>,
) -> Result<(LinearBlockMap<T>, LinearBlockMap<T>)> {
    let (a, b) = (f.x_letters(), f.y_letters());
    if center.d() != a + b {
        return Err(Error::LetterCountMismatch { expected: a + b, found: center.d() });
    }
    if f.num_outputs() != b {
        return Err(Error::NotSquare { inputs: b, outputs: f.num_outputs() });
    }
    let l = difference_map(f, center.point(), center.point(), a..a + b)?;
    let inv = l.inverse()?;
    // reject numerically singular differentials
    let scale = l.matrix().max_abs().max(1.0);
    if !inv.matrix().max_abs().is_finite() || inv.matrix().max_abs() * scale > 1e12 {
        return Err(Error::SingularDifferential);
    }
    Ok((l, inv))
}

fn random_tuple<T: FloatScalar>(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Vec<Matrix<T>> {
    let mats: Vec<Matrix<T>> = (0..d)
        .map(|_| {
            Matrix::from_fn(n, n, |_, _| {
                let re = rng.random_range(-1.0..1.0);
                let im = if T::COMPLEX { rng.random_range(-1.0..1.0) } else { 0.0 };
                T::from_c64(num_complex::Complex64::new(re, im))
            })
        })
        .collect();
    let norm = tuple_norm(&mats);
    if norm == 0.0 {
        return mats;
    }
    mats.iter().map(|a| a.scale(&T::from_f64(1.0 / norm))).collect()
}

/// A random point of the ball of radius `r` about `center^{(m)}`: half the
/// samples lie on the sphere, the rest at a uniformly drawn fraction of `r`.
pub(crate) fn sample_ball<T: FloatScalar>(
    center: &MatrixPoint<T>,
    m: usize,
    r: f64,
    rng: &mut ChaCha8Rng,
    on_sphere: bool,
) -> MatrixPoint<T> {
    let base = center.ampliate(m);
    let rho = if on_sphere { r } else { r * rng.random_range(0.0..1.0) };
    let w = random_tuple::<T>(rng, base.d(), base.n());
    let mats = base.mats().iter().zip(&w).map(|(c, z)| c + &z.scale(&T::from_f64(rho))).collect();
    MatrixPoint::new(mats).expect("same shapes")
}

struct Probe<T> {
    sample: usize,
    point: MatrixPoint<T>,
    m: usize,
}

fn probes<T: FloatScalar>(center: &MatrixPoint<T>, r: f64, opts: &SearchOptions, salt: u64) -> Vec<Probe<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ salt ^ r.to_bits());
    (0..opts.samples.max(1))
        .map(|k| {
            let m = 1 + k % opts.m_probe.max(1);
            Probe { sample: k, point: sample_ball(center, m, r, &mut rng, k % 2 == 0), m }
        })
        .collect()
}

/// `(‖L^{(m)} − δ^Y F(X, Y)‖, ‖L^{-1(m)}(L^{(m)} − δ^Y F(X, Y))‖)` maximized over the probes.
fn derivative_gap<T: FloatScalar>(
    f: &NcPolyMap<T>,
    l: &LinearBlockMap<T>,
    l_inv: &LinearBlockMap<T>,
    probes: &[Probe<T>],
    opts: &SearchOptions,
) -> Result<(f64, f64)> {
    let (a, b) = (f.x_letters(), f.y_letters());
    let gaps: Vec<Result<(f64, f64)>> = probes
        .par_iter()
        .map(|p| {
            let d = difference_map(f, &p.point, &p.point, a..a + b)?;
            let e = l.ampliate(p.m).sub(&d)?;
            let seed = opts.seed.wrapping_add(p.sample as u64);
            let gap = operator_norm_estimate(&e, opts.trials, seed);
            let coeff = operator_norm_estimate(&l_inv.ampliate(p.m).compose(&e)?, opts.trials, seed);
            Ok((gap, coeff))
        })
        .collect();
    let mut worst = (0.0f64, 0.0f64);
    for g in gaps {
        let (gap, coeff) = g?;
        worst = (worst.0.max(gap), worst.1.max(coeff));
    }
    Ok(worst)
}

/// Finds radii `(γ, α, β)` for the chord map `Y ↦ Y − L^{-1(m)} F(X, Y)`:
///
/// * `γ`: halved from 1 (then refined by bisection) until the sampled gap
///   `‖L^{(m)} − δ^Y F(X, Y)‖` stays below `1/(2M)` on the joint γ-ball;
/// * `β = γ/2`;
/// * `α`: halved from `β` until the sampled `‖F(X, Y⁰^{(m)})‖` stays below `β/(2M)`.
///
/// `M` is the cb-norm estimate of `L^{-1}` times [`CB_SAFETY`].
pub fn contraction_search<T: FloatScalar>(
    f: &NcPolyMap<T>,
    center: &CenterPoint<T>,
    opts: &SearchOptions,
) -> Result<ContractionReport> {
    let (l, l_inv) = center_differential(f, center)?;
    let m_bound = CB_SAFETY * cb_norm_estimate(&l_inv, opts.m_cb, opts.trials, opts.seed).value;
    let limit = 1.0 / (2.0 * m_bound);
    let c = center.point();

    let passes = |r: f64| -> Result<(bool, f64)> {
        let pts = probes(c, r, opts, 0x6761_6d6d);
        let (gap, coeff) = derivative_gap(f, &l, &l_inv, &pts, opts)?;
        Ok((gap <= limit, coeff))
    };

    let mut gamma = 1.0;
    let mut coeff;
    loop {
        let (ok, k) = passes(gamma)?;
        coeff = k;
        if ok {
            break;
        }
        gamma /= 2.0;
        if gamma < RADIUS_FLOOR {
            return Err(Error::NoContractionFound { floor: RADIUS_FLOOR });
        }
    }
    if gamma < 1.0 {
        let (mut lo, mut hi) = (gamma, 2.0 * gamma);
        for _ in 0..10 {
            let mid = 0.5 * (lo + hi);
            let (ok, k) = passes(mid)?;
            if ok {
                lo = mid;
                coeff = k;
            } else {
                hi = mid;
            }
        }
        gamma = lo;
    }

    let beta = 0.5 * gamma;
    let (a, b) = (f.x_letters(), f.y_letters());
    let (x0, y0) = match c.split(a) {
        (Some(x0), Some(y0)) => (x0, y0),
        _ => return Err(Error::InvalidArgument("the map needs both X and Y letters".into())),
    };
    let mut alpha = beta;
    loop {
        let pts = probes(&x0, alpha, opts, 0x616c_7068);
        let worst = pts
            .par_iter()
            .map(|p| {
                let y = y0.ampliate(p.m);
                f.eval(&p.point.concat(&y)?).map(|r| tuple_norm(&r))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if worst < beta / (2.0 * m_bound) {
            break;
        }
        alpha /= 2.0;
        if alpha < RADIUS_FLOOR {
            return Err(Error::NoContractionFound { floor: RADIUS_FLOOR });
        }
    }
    debug_assert_eq!(b, y0.d());
    Ok(ContractionReport { gamma, alpha, beta, observed_coeff: coeff, m_bound, m_probe: opts.m_probe })
}

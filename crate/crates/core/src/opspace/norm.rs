use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linmap::LinearBlockMap;
use crate::matrix::Matrix;
use crate::ncalg::MatrixPoint;
use crate::scalar::FloatScalar;

fn to_dmatrix<T: FloatScalar>(a: &Matrix<T>) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)].to_c64())
}

fn from_dmatrix<T: FloatScalar>(a: &DMatrix<Complex64>) -> Matrix<T> {
    Matrix::from_fn(a.nrows(), a.ncols(), |i, j| T::from_c64(a[(i, j)]))
}

/// Largest singular value.
pub fn spectral_norm<T: FloatScalar>(a: &Matrix<T>) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    if !T::COMPLEX {
        let m = DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)].re());
        return m.singular_values().max();
    }
    to_dmatrix(a).singular_values().max()
}

/// Norm of a tuple: the largest spectral norm among the components.
pub fn ns_norm<T: FloatScalar>(p: &MatrixPoint<T>) -> f64 {
    tuple_norm(p.mats())
}

pub(crate) fn tuple_norm<T: FloatScalar>(mats: &[Matrix<T>]) -> f64 {
    mats.iter().map(spectral_norm).fold(0.0, f64::max)
}

/// Top singular triple `(σ, u, v)`.
fn top_singular(a: &DMatrix<Complex64>) -> (f64, DVector<Complex64>, DVector<Complex64>) {
    let svd = a.clone().svd(true, true);
    let (k, sigma) =
        svd.singular_values.iter().enumerate().fold((0, -1.0), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let u = svd.u.as_ref().expect("u requested").column(k).into_owned();
    let v = svd.v_t.as_ref().expect("v_t requested").row(k).adjoint();
    (sigma.max(0.0), u, v)
}

/// Unitary polar factor `U Vᴴ`, which maximizes `Re tr(Gᴴ Z)` over
/// contractions `Z`.
fn polar(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = g.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Lower estimate of the operator norm of a block map, with its norm-attaining input.
#[derive(Clone, Debug)]
pub struct CbWitness<T: FloatScalar> {
    pub m: usize,
    pub input: Vec<Matrix<T>>,
    pub norm: f64,
}

/// Sampled estimate of the completely bounded norm `sup_m ‖L^{(m)}‖`.
///
/// `value` is a lower bound, never a certificate.
#[derive(Clone, Debug)]
pub struct CbEstimate<T: FloatScalar> {
    pub value: f64,
    pub m_used: usize,
    /// Best value found at each level `m = 1..=m_used`.
    pub levels: Vec<f64>,
    pub witnesses: Vec<CbWitness<T>>,
}

/// Maximizes `‖L^{(m)}(Z)‖` over `‖Z‖ ≤ 1` by alternating between the top
/// singular pair of the output and the polar factor of the adjoint image.
/// Each round cannot decrease the attained value.
fn ascend(
    mat: &DMatrix<Complex64>,
    adj: &DMatrix<Complex64>,
    s: usize,
    b: usize,
    c: usize,
    start: Vec<DMatrix<Complex64>>,
    real: bool,
) -> (f64, Vec<DMatrix<Complex64>>) {
    let n = start[0].nrows();
    let m = n / s;
    let apply = |map: &DMatrix<Complex64>, z: &[DMatrix<Complex64>], outs: usize| -> Vec<DMatrix<Complex64>> {
        let ins = z.len();
        let mut out = vec![DMatrix::zeros(n, n); outs];
        let mut v = DMatrix::zeros(ins * s * s, 1);
        for p in 0..m {
            for q in 0..m {
                for (j, zj) in z.iter().enumerate() {
                    for a in 0..s {
                        for bb in 0..s {
                            v[(j * s * s + a * s + bb, 0)] = zj[(p * s + a, q * s + bb)];
                        }
                    }
                }
                let w = map * &v;
                for (k, ok) in out.iter_mut().enumerate() {
                    for a in 0..s {
                        for bb in 0..s {
                            ok[(p * s + a, q * s + bb)] = w[(k * s * s + a * s + bb, 0)];
                        }
                    }
                }
            }
        }
        out
    };
    let mut z = start;
    let mut best = (0.0f64, z.clone());
    for _ in 0..300 {
        let w = apply(mat, &z, c);
        let (k, sigma, u, v) = w
            .iter()
            .enumerate()
            .map(|(k, wk)| {
                let (s, u, v) = top_singular(wk);
                (k, s, u, v)
            })
            .fold(None::<(usize, f64, DVector<Complex64>, DVector<Complex64>)>, |acc, t| match acc {
                Some(a) if a.1 >= t.1 => Some(a),
                _ => Some(t),
            })
            .expect("at least one output");
        let improved = sigma > best.0 * (1.0 + 1e-13) + 1e-300;
        if sigma > best.0 {
            best = (sigma, z.clone());
        }
        if !improved || sigma == 0.0 {
            break;
        }
        let mut e = vec![DMatrix::zeros(n, n); c];
        e[k] = &u * v.adjoint();
        let g = apply(adj, &e, b);
        z = g
            .iter()
            .map(|gj| {
                let p = polar(gj);
                if real {
                    p.map(|x| Complex64::new(x.re, 0.0))
                } else {
                    p
                }
            })
            .collect();
    }
    best
}

fn random_contraction(rng: &mut ChaCha8Rng, n: usize, real: bool) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        Complex64::new(re, im)
    });
    let p = polar(&g);
    if real {
        p.map(|x| Complex64::new(x.re, 0.0))
    } else {
        p
    }
}

/// Estimates `‖L^{(m)}‖` for `m = 1..=m_max` with `trials` random starts per
/// level plus the best input of the previous level padded by zeros.
pub fn cb_norm_estimate<T: FloatScalar>(
    l: &LinearBlockMap<T>,
    m_max: usize,
    trials: usize,
    seed: u64,
) -> CbEstimate<T> {
    let (s, b, c) = (l.s(), l.inputs(), l.outputs());
    let mat = to_dmatrix(l.matrix());
    let adj = mat.adjoint();
    let real = !T::COMPLEX;
    let mut levels = Vec::new();
    let mut witnesses: Vec<CbWitness<T>> = Vec::new();
    let mut carried: Option<Vec<DMatrix<Complex64>>> = None;
    for m in 1..=m_max.max(1) {
        let n = s * m;
        let mut starts: Vec<Vec<DMatrix<Complex64>>> = (0..trials.max(1))
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((m as u64) << 32) ^ t as u64);
                (0..b).map(|_| random_contraction(&mut rng, n, real)).collect()
            })
            .collect();
        if let Some(prev) = &carried {
            starts.push(
                prev.iter()
                    .map(|z| {
                        let mut big = DMatrix::zeros(n, n);
                        big.view_mut((0, 0), (n - s, n - s)).copy_from(z);
                        big
                    })
                    .collect(),
            );
        }
        let results: Vec<_> = starts.into_par_iter().map(|st| ascend(&mat, &adj, s, b, c, st, real)).collect();
        let (value, input) =
            results
                .into_iter()
                .fold((0.0, None), |acc, (v, z)| if v > acc.0 || acc.1.is_none() { (v, Some(z)) } else { acc });
        let input = input.expect("at least one start");
        let value = levels.last().map_or(value, |&p: &f64| value.max(p));
        levels.push(value);
        witnesses.push(CbWitness { m, input: input.iter().map(from_dmatrix).collect(), norm: value });
        carried = Some(input);
    }
    let value = levels.iter().copied().fold(0.0, f64::max);
    CbEstimate { value, m_used: levels.len(), levels, witnesses }
}

/// Sampled lower estimate of the plain operator norm `‖L‖`.
pub fn operator_norm_estimate<T: FloatScalar>(l: &LinearBlockMap<T>, trials: usize, seed: u64) -> f64 {
    if l.is_zero() {
        return 0.0;
    }
    cb_norm_estimate(l, 1, trials, seed).value
}

//! Randomized property checks: the nc-function axioms (direct sums,
//! similarities, intertwinings) for arbitrary matrix maps, and a registry of
//! regression suites over every module, replayable from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{matrix_to_json, point_to_json, JsonScalar};
use crate::matrix::Matrix;
use crate::ncalg::{CenterPoint, Direction, MatrixPoint, NcPoly, NcPolyMap, NcWord};
use crate::scalar::{Rational, Scalar};
use crate::{ncdiff, ncode, ncopt, nilp, opspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKernel {
    Exact,
    Float,
}

/// Parameters of a randomized run. Equal specs replay identical cases.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseSpec {
    pub seed: u64,
    pub d_max: usize,
    pub deg_max: usize,
    pub n_max: usize,
    pub kernel: CaseKernel,
    pub count: usize,
}

impl Default for CaseSpec {
    fn default() -> Self {
        Self { seed: 20_240_601, d_max: 3, deg_max: 4, n_max: 3, kernel: CaseKernel::Exact, count: 20 }
    }
}

fn case_rng(seed: u64, stream: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(case as u128 * 4096);
    rng
}

/// Scalars the generators can draw.
pub trait Sample: JsonScalar {
    /// Rationals `p/q` with `p ∈ [−9, 9]`, `q ∈ [1, 9]`; floats uniform in `[−1, 1]`.
    fn sample(rng: &mut ChaCha8Rng) -> Self;

    /// Equality for the exact kernel, `≤ 1e−10` relative to the entry scale
    /// for floats.
    fn agree(a: &Matrix<Self>, b: &Matrix<Self>) -> bool;
}

impl Sample for Rational {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Rational::from_ratio(rng.random_range(-9..=9), rng.random_range(1..=9))
    }

    fn agree(a: &Matrix<Self>, b: &Matrix<Self>) -> bool {
        a == b
    }
}

impl Sample for f64 {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        rng.random_range(-1.0..=1.0)
    }

    fn agree(a: &Matrix<Self>, b: &Matrix<Self>) -> bool {
        a.shape() == b.shape() && a.max_abs_diff(b) <= 1e-10 * a.max_abs().max(b.max_abs()).max(1.0)
    }
}

pub fn random_matrix<T: Sample>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| T::sample(rng))
}

pub fn random_point<T: Sample>(rng: &mut ChaCha8Rng, d: usize, n: usize) -> MatrixPoint<T> {
    MatrixPoint::new((0..d).map(|_| random_matrix(rng, n, n)).collect()).expect("d ≥ 1, n ≥ 1")
}

/// Polynomial with 1 to 4 terms of degree at most `deg_max`.
pub fn random_poly<T: Sample>(rng: &mut ChaCha8Rng, d: usize, deg_max: usize) -> NcPoly<T> {
    let terms: Vec<_> = (0..rng.random_range(1..=4))
        .map(|_| {
            let len = rng.random_range(0..=deg_max);
            (NcWord::new((0..len).map(|_| rng.random_range(0..d)).collect()), T::sample(rng))
        })
        .collect();
    NcPoly::from_terms(d, terms).expect("letters in range")
}

/// Invertible matrix `L·U` with unit-diagonal triangular factors.
pub fn random_invertible<T: Sample>(rng: &mut ChaCha8Rng, n: usize) -> Matrix<T> {
    let scale = T::from_ratio(1, 2 * n as i64);
    let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => T::one(),
        std::cmp::Ordering::Greater => T::sample(rng).mul_ref(&scale),
        std::cmp::Ordering::Less => T::zero(),
    });
    let u = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => T::one(),
        std::cmp::Ordering::Less => T::sample(rng).mul_ref(&scale),
        std::cmp::Ordering::Greater => T::zero(),
    });
    l.matmul(&u)
}

/// A map from `d`-tuples of `n × n` matrices to `n × n` matrices.
pub trait MatrixMap<T: Scalar>: Sync {
    fn letters(&self) -> usize;
    fn apply(&self, x: &MatrixPoint<T>) -> Result<Matrix<T>>;
}

impl<T: Scalar> MatrixMap<T> for NcPoly<T> {
    fn letters(&self) -> usize {
        self.num_letters()
    }

    fn apply(&self, x: &MatrixPoint<T>) -> Result<Matrix<T>> {
        self.eval(x)
    }
}

/// `X ↦ X₀ ∘ X₀` (entrywise square of the first component): respects direct
/// sums but is not an nc function.
#[derive(Clone, Copy, Debug)]
pub struct EntrywiseSquare {
    pub letters: usize,
}

impl<T: Scalar> MatrixMap<T> for EntrywiseSquare {
    fn letters(&self) -> usize {
        self.letters
    }

    fn apply(&self, x: &MatrixPoint<T>) -> Result<Matrix<T>> {
        Ok(x.component(0).map(|v| v.mul_ref(v)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

/// Outcome of [`check_nc_axioms`]; failures carry JSON witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub cases: usize,
    pub direct_sum: Tally,
    pub similarity: Tally,
    /// Both the summand inclusion `[I; 0]` and the diagonal `[I; I]`.
    pub intertwining: Tally,
    pub witnesses: Vec<Value>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.direct_sum.failed + self.similarity.failed + self.intertwining.failed == 0
    }
}

fn discrepancy<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.max_abs_diff(b)
}

/// Checks `f(X ⊕ X′) = f(X) ⊕ f(X′)`, `f(SXS⁻¹) = S f(X) S⁻¹` and
/// `f(X) T = T f(Y)` whenever `X T = T Y`, on `spec.count` random cases.
pub fn check_nc_axioms<T: Sample>(f: &dyn MatrixMap<T>, spec: &CaseSpec) -> Result<AxiomReport> {
    let d = f.letters();
    let outcomes = (0..spec.count)
        .into_par_iter()
        .map(|case| -> Result<Vec<(&'static str, Option<Value>)>> {
            let mut rng = case_rng(spec.seed, 1, case);
            let n1 = rng.random_range(1..=spec.n_max.max(1));
            let n2 = rng.random_range(1..=spec.n_max.max(1));
            let x = random_point::<T>(&mut rng, d, n1);
            let x2 = random_point::<T>(&mut rng, d, n2);
            let mut out = Vec::new();

            let lhs = f.apply(&x.direct_sum(&x2)?)?;
            let rhs = f.apply(&x)?.direct_sum(&f.apply(&x2)?);
            out.push((
                "direct_sum",
                (!T::agree(&lhs, &rhs)).then(|| {
                    json!({"check": "direct_sum", "case": case, "x": point_to_json(&x), "x2": point_to_json(&x2),
                       "discrepancy": discrepancy(&lhs, &rhs)})
                }),
            ));

            let s = random_invertible::<T>(&mut rng, n1);
            let lhs = f.apply(&x.similarity(&s)?)?;
            let rhs = f.apply(&x)?.similarity_by(&s)?;
            out.push((
                "similarity",
                (!T::agree(&lhs, &rhs)).then(|| {
                    json!({"check": "similarity", "case": case, "x": point_to_json(&x), "s": matrix_to_json(&s),
                       "discrepancy": discrepancy(&lhs, &rhs)})
                }),
            ));

            // X = [[Y, B], [0, C]] and T = [I; 0]
            let y = x.clone();
            let upper = MatrixPoint::new(
                (0..d)
                    .map(|i| {
                        let mut m = Matrix::zeros(n1 + n2, n1 + n2);
                        m.set_block(0, 0, y.component(i));
                        m.set_block(0, n1, &random_matrix::<T>(&mut rng, n1, n2));
                        m.set_block(n1, n1, x2.component(i));
                        m
                    })
                    .collect(),
            )?;
            let mut t = Matrix::zeros(n1 + n2, n1);
            t.set_block(0, 0, &Matrix::identity(n1));
            out.push(intertwining_case(f, "intertwining_inclusion", case, &upper, &y, &t)?);

            // X = [[A, Y − A], [B, Y − B]] and T = [I; I]
            let diag = MatrixPoint::new(
                (0..d)
                    .map(|i| {
                        let a = random_matrix::<T>(&mut rng, n1, n1);
                        let b = random_matrix::<T>(&mut rng, n1, n1);
                        let mut m = Matrix::zeros(2 * n1, 2 * n1);
                        m.set_block(0, n1, &(y.component(i) - &a));
                        m.set_block(n1, n1, &(y.component(i) - &b));
                        m.set_block(0, 0, &a);
                        m.set_block(n1, 0, &b);
                        m
                    })
                    .collect(),
            )?;
            let mut t = Matrix::zeros(2 * n1, n1);
            t.set_block(0, 0, &Matrix::identity(n1));
            t.set_block(n1, 0, &Matrix::identity(n1));
            out.push(intertwining_case(f, "intertwining_diagonal", case, &diag, &y, &t)?);
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = AxiomReport {
        cases: spec.count,
        direct_sum: Tally::default(),
        similarity: Tally::default(),
        intertwining: Tally::default(),
        witnesses: Vec::new(),
    };
    for (name, witness) in outcomes.into_iter().flatten() {
        let tally = match name {
            "direct_sum" => &mut report.direct_sum,
            "similarity" => &mut report.similarity,
            _ => &mut report.intertwining,
        };
        tally.record(witness.is_none());
        report.witnesses.extend(witness);
    }
    Ok(report)
}

fn intertwining_case<T: Sample>(
    f: &dyn MatrixMap<T>,
    name: &'static str,
    case: usize,
    x: &MatrixPoint<T>,
    y: &MatrixPoint<T>,
    t: &Matrix<T>,
) -> Result<(&'static str, Option<Value>)> {
    debug_assert!(x.mats().iter().zip(y.mats()).all(|(a, b)| T::agree(&a.matmul(t), &t.matmul(b))));
    let lhs = f.apply(x)?.matmul(t);
    let rhs = t.matmul(&f.apply(y)?);
    let witness = (!T::agree(&lhs, &rhs)).then(|| {
        json!({"check": name, "case": case, "x": point_to_json(x), "y": point_to_json(y), "t": matrix_to_json(t),
               "discrepancy": discrepancy(&lhs, &rhs)})
    });
    Ok((name, witness))
}

trait SimilarityBy<T> {
    fn similarity_by(&self, s: &Matrix<T>) -> Result<Matrix<T>>;
}

impl<T: Scalar> SimilarityBy<T> for Matrix<T> {
    fn similarity_by(&self, s: &Matrix<T>) -> Result<Matrix<T>> {
        let inv = s.inverse().ok_or(Error::SingularSimilarity)?;
        Ok(s.matmul(self).matmul(&inv))
    }
}

/// Result line of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSummary {
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    pub witnesses: Vec<Value>,
}

impl SuiteSummary {
    pub fn to_json(&self) -> Value {
        json!({"suite": self.suite, "passed": self.passed, "failed": self.failed, "witnesses": self.witnesses})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRun {
    pub summaries: Vec<SuiteSummary>,
}

impl SuiteRun {
    pub fn all_passed(&self) -> bool {
        self.summaries.iter().all(|s| s.failed == 0)
    }

    /// `0` when every suite passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.summaries.iter().map(SuiteSummary::to_json).collect())
    }
}

type CaseOutcome = std::result::Result<(), Value>;
type SuiteFn = fn(&CaseSpec, usize) -> CaseOutcome;

/// Registered suites in run order.
pub const SUITES: [&str; 6] = ["ncalg-axioms", "ncdiff", "nilp", "opspace", "ncode", "ncopt"];

fn suite_fn(name: &str) -> Option<SuiteFn> {
    Some(match name {
        "ncalg-axioms" => case_axioms,
        "ncdiff" => case_ncdiff,
        "nilp" => case_nilp,
        "opspace" => case_opspace,
        "ncode" => case_ncode,
        "ncopt" => case_ncopt,
        _ => return None,
    })
}

fn failure(case: usize, what: impl Into<String>) -> Value {
    json!({"case": case, "failure": what.into()})
}

fn lift<T>(case: usize, r: Result<T>) -> std::result::Result<T, Value> {
    r.map_err(|e| failure(case, e.to_string()))
}

/// Runs the named suites (all of them when `names` is empty) in parallel.
pub fn run_suite(names: &[String], spec: &CaseSpec) -> Result<SuiteRun> {
    let names: Vec<String> =
        if names.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let fns =
        names.iter().map(|n| suite_fn(n).ok_or_else(|| Error::UnknownSuite(n.clone()))).collect::<Result<Vec<_>>>()?;
    let summaries = names
        .par_iter()
        .zip(fns)
        .map(|(name, run)| {
            let extra = usize::from(name == "ncalg-axioms");
            let outcomes: Vec<CaseOutcome> = (0..spec.count + extra).into_par_iter().map(|k| run(spec, k)).collect();
            let witnesses: Vec<Value> = outcomes.iter().filter_map(|o| o.clone().err()).collect();
            SuiteSummary {
                suite: name.clone(),
                passed: outcomes.len() - witnesses.len(),
                failed: witnesses.len(),
                witnesses,
            }
        })
        .collect();
    Ok(SuiteRun { summaries })
}

/// Case `count` of the axiom suite checks that the entrywise-square map is
/// rejected; the others check random polynomials.
fn case_axioms(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let sub =
        CaseSpec { seed: spec.seed ^ (case as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), count: 1, ..spec.clone() };
    if case == spec.count {
        let report =
            lift(case, check_nc_axioms::<Rational>(&EntrywiseSquare { letters: 1 }, &CaseSpec { count: 4, ..sub }))?;
        return if report.intertwining.failed > 0 {
            Ok(())
        } else {
            Err(failure(case, "entrywise square passed the intertwining check"))
        };
    }
    let mut rng = case_rng(spec.seed, 2, case);
    let d = rng.random_range(1..=spec.d_max.max(1));
    let report = match spec.kernel {
        CaseKernel::Exact => lift(case, check_nc_axioms(&random_poly::<Rational>(&mut rng, d, spec.deg_max), &sub))?,
        CaseKernel::Float => lift(case, check_nc_axioms(&random_poly::<f64>(&mut rng, d, spec.deg_max), &sub))?,
    };
    if report.passed() {
        Ok(())
    } else {
        Err(json!({"case": case, "witnesses": report.witnesses}))
    }
}

fn case_ncdiff(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let mut rng = case_rng(spec.seed, 3, case);
    let d = rng.random_range(1..=spec.d_max.max(1));
    let p = random_poly::<Rational>(&mut rng, d, spec.deg_max);
    let n = rng.random_range(1..=spec.n_max.max(1));
    let m = rng.random_range(1..=spec.n_max.max(1));
    let x = random_point::<Rational>(&mut rng, d, n);
    let y = random_point::<Rational>(&mut rng, d, m);
    let z = Direction::new((0..d).map(|_| random_matrix(&mut rng, n, m)).collect()).expect("d ≥ 1");
    let block = lift(case, ncdiff::delta_r_block(&p, &x, &y, &z))?;
    let sym = lift(case, ncdiff::delta_r_sym(&p, &x, &y, &z))?;
    if block != sym {
        return Err(failure(case, "block and symbolic difference disagree"));
    }
    let s = random_matrix::<Rational>(&mut rng, n, m);
    if !lift(case, ncdiff::first_order_identity_residual(&p, &x, &y, &s))?.is_zero() {
        return Err(failure(case, "first-order identity residual is nonzero"));
    }
    let c = CenterPoint::scalar(&(0..d).map(|_| Rational::sample(&mut rng)).collect::<Vec<_>>());
    let tt = lift(case, ncdiff::tt_coefficients(&p, &c))?;
    if lift(case, ncdiff::tt_evaluate(&tt, &x, tt.parts.len()))? != lift(case, p.eval(&x))? {
        return Err(failure(case, "full Taylor-Taylor sum differs from the polynomial"));
    }
    Ok(())
}

/// Strictly upper triangular rational matrix of size `n`.
fn random_nilpotent(rng: &mut ChaCha8Rng, n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |i, j| if j > i { Rational::sample(rng) } else { Rational::from_i64(0) })
}

fn case_nilp(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let mut rng = case_rng(spec.seed, 4, case);
    let n = rng.random_range(1..=spec.n_max.clamp(1, 5));
    let x = MatrixPoint::new(vec![random_nilpotent(&mut rng, n)]).expect("one component");
    let one = Rational::from_i64(1);
    let g = NcPolyMap::new(
        vec![NcPoly::from_terms(1, [(NcWord::new(vec![0]), one.clone()), (NcWord::new(vec![0, 0]), one)])
            .expect("valid")],
        (0, 1),
    )
    .expect("valid split");
    let center = CenterPoint::scalar(&[Rational::from_i64(0)]);
    let sol = lift(case, nilp::inverse_solve_nilp(&g, &center, &x, n + 1))?;
    if lift(case, g.eval(&sol.y))?[0] != *x.component(0) {
        return Err(failure(case, "g(f(X)) differs from X"));
    }
    Ok(())
}

fn case_opspace(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let mut rng = case_rng(spec.seed, 5, case);
    let n = rng.random_range(1..=spec.n_max.clamp(1, 4));
    let x = MatrixPoint::new(vec![Matrix::from_fn(n, n, |_, _| 0.05 * f64::sample(&mut rng) / n as f64)])
        .expect("one component");
    let p = NcPoly::from_terms(
        2,
        [(NcWord::new(vec![1]), 1.0), (NcWord::new(vec![1, 1]), -0.5), (NcWord::new(vec![0]), -1.0)],
    )
    .expect("valid");
    let f = NcPolyMap::new(vec![p], (1, 1)).expect("valid split");
    let center = CenterPoint::scalar(&[0.0, 0.0]);
    let (_, report) = lift(case, opspace::implicit_solve_num(&f, &center, &x, &opspace::SolveOptions::default()))?;
    if report.contraction_estimate > 0.5 + 1e-6 {
        return Err(failure(case, format!("contraction ratio {} exceeds 1/2", report.contraction_estimate)));
    }
    Ok(())
}

fn case_ncode(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let mut rng = case_rng(spec.seed, 6, case);
    let n = rng.random_range(1..=spec.n_max.clamp(1, 3));
    let x = Matrix::from_fn(n, n, |_, _| f64::sample(&mut rng) / (2.0 * n as f64));
    let p = NcPoly::from_terms(1, [(NcWord::new(vec![0, 0]), 1.0)]).expect("valid");
    let g = lift(case, ncode::TimePoly::autonomous(NcPolyMap::new(vec![p], (0, 1)).expect("valid split")))?;
    let exact = x.matmul(&(&Matrix::identity(n) - &x.scale(&0.5)).inverse().expect("‖X/2‖ < 1"));
    let x = MatrixPoint::new(vec![x]).expect("one component");
    let err = |steps| -> std::result::Result<f64, Value> {
        let tr = lift(case, ncode::integrate_ivp(&g, 0.0, &x, 0.5, steps))?;
        Ok(tr.endpoint().component(0).max_abs_diff(&exact))
    };
    let (coarse, fine) = (err(16)?, err(32)?);
    if fine > 1e-13 && coarse < 8.0 * fine {
        return Err(failure(case, format!("step halving reduced the error only from {coarse:e} to {fine:e}")));
    }
    let tr = lift(case, ncode::integrate_ivp(&g, 0.0, &x, 0.5, 32))?;
    let res = lift(case, ncode::ivp_residual(&g, 0.0, &x, &tr))?;
    if res > 1e-6 {
        return Err(failure(case, format!("integral residual {res:e}")));
    }
    Ok(())
}

fn case_ncopt(spec: &CaseSpec, case: usize) -> CaseOutcome {
    let mut rng = case_rng(spec.seed, 7, case);
    let s = rng.random_range(1..=2);
    let word = |l: Vec<usize>| NcWord::new(l);
    let g =
        NcPolyMap::new(vec![NcPoly::from_terms(2, [(word(vec![0, 1]), 1.0)]).expect("valid")], (1, 1)).expect("valid");
    let f = NcPolyMap::new(
        vec![NcPoly::from_terms(2, [(word(vec![0]), 1.0), (word(vec![1]), 1.0), (word(vec![]), -1.0)]).expect("valid")],
        (1, 1),
    )
    .expect("valid");
    let tau = ncopt::TraceFunctional::new(vec![1.0]);
    let x = &Matrix::scalar(s, 0.5) + &Matrix::from_fn(s, s, |_, _| 0.1 * f64::sample(&mut rng));
    let y = &Matrix::identity(s) - &x;
    let start = lift(
        case,
        ncopt::KktPoint::new(
            MatrixPoint::new(vec![x]).expect("one component"),
            MatrixPoint::new(vec![y]).expect("one component"),
            vec![Matrix::zeros(s, s)],
        ),
    )?;
    let opts = ncopt::KktOptions::default();
    let sol = lift(case, ncopt::solve_kkt(&g, &tau, &f, &start, &opts))?;
    let consistency = lift(case, ncopt::ampliation_consistency(&g, &tau, &f, &sol.point, 2))?;
    if consistency > 10.0 * opts.tol {
        return Err(failure(case, format!("size-2s necessary condition residual {consistency:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_in_range() {
        let mut rng = case_rng(1, 0, 0);
        for _ in 0..200 {
            let r = Rational::sample(&mut rng);
            assert!(r.numer().magnitude() <= &9u32.into() && r.denom() <= &9.into());
        }
    }

    #[test]
    fn invertible_generator() {
        let mut rng = case_rng(3, 0, 0);
        for n in 1..5 {
            assert!(random_invertible::<Rational>(&mut rng, n).inverse().is_some());
        }
    }
}

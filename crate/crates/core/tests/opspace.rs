use ncfun::opspace::*;
use ncfun::{CenterPoint, Direction, Error, LinearBlockMap, Matrix, MatrixPoint, NcPoly, NcPolyMap, NcWord};

fn word(l: &[usize]) -> NcWord {
    NcWord::new(l.to_vec())
}

/// `y − y²/2 − x` on letters (x, y).
fn half_quadratic() -> NcPolyMap<f64> {
    let p = NcPoly::from_terms(2, [(word(&[1]), 1.0), (word(&[1, 1]), -0.5), (word(&[0]), -1.0)]).unwrap();
    NcPolyMap::new(vec![p], (1, 1)).unwrap()
}

/// `y + y²` on one letter.
fn quadratic_g() -> NcPolyMap<f64> {
    let p = NcPoly::from_terms(1, [(word(&[0]), 1.0), (word(&[0, 0]), 1.0)]).unwrap();
    NcPolyMap::new(vec![p], (0, 1)).unwrap()
}

fn point(rows: Vec<Vec<f64>>) -> MatrixPoint<f64> {
    MatrixPoint::new(vec![Matrix::from_rows(rows)]).unwrap()
}

fn origin2() -> CenterPoint<f64> {
    CenterPoint::scalar(&[0.0, 0.0])
}

/// Scalar branch `1 − √(1 − 2x)` and its derivative.
fn branch(x: f64) -> (f64, f64) {
    (1.0 - (1.0 - 2.0 * x).sqrt(), 1.0 / (1.0 - 2.0 * x).sqrt())
}

#[test]
fn norm_respects_direct_sums_and_scaling() {
    let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![-0.5, 3.0]]);
    let b = Matrix::from_rows(vec![vec![0.2, 0.0, 1.0], vec![4.0, 0.1, 0.0], vec![0.0, 0.0, -2.0]]);
    let p = MatrixPoint::new(vec![a.clone(), a.scale(&2.0)]).unwrap();
    let single = ns_norm(&MatrixPoint::new(vec![a.clone()]).unwrap());
    assert!((ns_norm(&p) - 2.0 * single).abs() < 1e-12);
    let pa = MatrixPoint::new(vec![a]).unwrap();
    let pb = MatrixPoint::new(vec![b]).unwrap();
    let sum = pa.direct_sum(&pb).unwrap();
    assert!((ns_norm(&sum) - ns_norm(&pa).max(ns_norm(&pb))).abs() < 1e-12);
}

#[test]
fn cb_estimate_of_identity_is_one_at_every_level() {
    let est = cb_norm_estimate(&LinearBlockMap::<f64>::identity(2, 1), 3, 3, DEFAULT_SEED);
    assert_eq!(est.m_used, 3);
    for v in &est.levels {
        assert!((v - 1.0).abs() < 1e-9);
    }
    assert!(est.levels.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn linear_map_has_zero_contraction() {
    let p = NcPoly::from_terms(2, [(word(&[1]), 1.0), (word(&[0]), -1.0)]).unwrap();
    let f = NcPolyMap::new(vec![p], (1, 1)).unwrap();
    let rep = contraction_search(&f, &origin2(), &SearchOptions::default()).unwrap();
    assert_eq!(rep.observed_coeff, 0.0);
    assert_eq!(rep.gamma, 1.0);
}

#[test]
fn quadratic_contraction_radius() {
    let rep = contraction_search(&half_quadratic(), &origin2(), &SearchOptions::default()).unwrap();
    // ‖id − δ^Y F(X, Y)‖ = ‖Y‖, so γ is close to 1/(2M) with M = 1.25
    assert!((rep.m_bound - CB_SAFETY).abs() < 1e-9, "{rep:?}");
    assert!(rep.gamma > 0.3 && rep.gamma <= 0.41, "{rep:?}");
    assert!(rep.observed_coeff <= 0.5 + 1e-9, "{rep:?}");
    assert!(rep.alpha > 0.0 && rep.alpha < rep.gamma && rep.beta < rep.gamma);
}

#[test]
fn singular_center_is_rejected() {
    let p = NcPoly::from_terms(2, [(word(&[1, 1]), 1.0), (word(&[0]), -1.0)]).unwrap();
    let f = NcPolyMap::new(vec![p], (1, 1)).unwrap();
    assert!(matches!(contraction_search(&f, &origin2(), &SearchOptions::default()), Err(Error::SingularDifferential)));
}

#[test]
fn scalar_and_diagonal_solves() {
    let opts = SolveOptions::default();
    let (y, rep) = implicit_solve_num(&half_quadratic(), &origin2(), &point(vec![vec![0.18]]), &opts).unwrap();
    assert!((y.component(0)[(0, 0)] - 0.2).abs() < 1e-10);
    assert!(rep.contraction_estimate <= 0.5 + 1e-6);
    assert!(rep.residuals.last().unwrap() <= &1e-12);

    let x = point(vec![vec![0.18, 0.0], vec![0.0, 0.18]]);
    let (y, _) = implicit_solve_num(&half_quadratic(), &origin2(), &x, &opts).unwrap();
    let expected = Matrix::from_rows(vec![vec![0.2, 0.0], vec![0.0, 0.2]]);
    assert!(y.component(0).max_abs_diff(&expected) < 1e-10);
}

#[test]
fn jordan_block_matrix_function() {
    let x = point(vec![vec![0.1, 0.05], vec![0.0, 0.1]]);
    let (y, rep) = implicit_solve_num(&half_quadratic(), &origin2(), &x, &SolveOptions::default()).unwrap();
    let (v, dv) = branch(0.1);
    let expected = Matrix::from_rows(vec![vec![v, 0.05 * dv], vec![0.0, v]]);
    assert!(y.component(0).max_abs_diff(&expected) < 1e-8);
    assert!((v - 0.105572809).abs() < 1e-9 && (0.05 * dv - 0.0559017).abs() < 1e-7);
    for w in rep.step_norms.windows(2) {
        if w[0] > 1e-14 {
            assert!(w[1] <= (rep.contraction_estimate + 1e-6) * w[0]);
        }
    }
}

#[test]
fn solution_respects_direct_sums_and_similarity() {
    let tol = 1e-13;
    let opts = SolveOptions { tol, ..Default::default() };
    let f = half_quadratic();
    let a = point(vec![vec![0.05, 0.02], vec![-0.01, 0.03]]);
    let b = point(vec![vec![-0.04]]);
    let (fa, _) = implicit_solve_num(&f, &origin2(), &a, &opts).unwrap();
    let (fb, _) = implicit_solve_num(&f, &origin2(), &b, &opts).unwrap();
    let (fab, _) = implicit_solve_num(&f, &origin2(), &a.direct_sum(&b).unwrap(), &opts).unwrap();
    assert!(fab.max_abs_diff(&fa.direct_sum(&fb).unwrap()) <= 10.0 * tol);

    let s = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]);
    let sx = a.similarity(&s).unwrap();
    let (fsx, _) = implicit_solve_num(&f, &origin2(), &sx, &opts).unwrap();
    assert!(fsx.max_abs_diff(&fa.similarity(&s).unwrap()) <= 100.0 * tol);
}

#[test]
fn implicit_derivative_matches_finite_differences() {
    let f = half_quadratic();
    let x = point(vec![vec![0.05, 0.02], vec![-0.01, 0.03]]);
    let opts = SolveOptions { tol: 1e-15, ..Default::default() };
    let (y, _) = implicit_solve_num(&f, &origin2(), &x, &opts).unwrap();
    let z = Direction::new(vec![Matrix::from_rows(vec![vec![0.3, -1.0], vec![0.5, 0.2]])]).unwrap();
    let formula = implicit_derivative_num(&f, &x, &y, &z).unwrap();
    let h = 1e-5;
    let shift = |sign: f64| {
        let xp = MatrixPoint::new(vec![x.component(0) + &z.mats()[0].scale(&(sign * h))]).unwrap();
        implicit_solve_num(&f, &origin2(), &xp, &opts).unwrap().0
    };
    let fd = (shift(1.0).component(0) - shift(-1.0).component(0)).scale(&(0.5 / h));
    let rel = fd.max_abs_diff(&formula.mats()[0]) / formula.mats()[0].max_abs();
    assert!(rel < 1e-6, "relative difference {rel}");
}

#[test]
fn inverse_examples() {
    let opts = SolveOptions::default();
    let id = NcPolyMap::new(vec![NcPoly::letter(1, 0)], (0, 1)).unwrap();
    let x = point(vec![vec![0.3, 0.1], vec![0.2, -0.1]]);
    let (y, rep) = inverse_solve_num(&id, &CenterPoint::scalar(&[0.0]), &x, &opts).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(y.max_abs_diff(&x) < 1e-15);

    let g = quadratic_g();
    let (y, rep) = inverse_solve_num(&g, &CenterPoint::scalar(&[0.0]), &point(vec![vec![0.11]]), &opts).unwrap();
    assert!((y.component(0)[(0, 0)] - 0.1).abs() < 1e-10);
    assert!(rep.derivative_check.unwrap() <= 10.0 * opts.tol);

    let x = point(vec![vec![0.11, 0.01], vec![0.0, 0.11]]);
    let (y, rep) = inverse_solve_num(&g, &CenterPoint::scalar(&[0.0]), &x, &opts).unwrap();
    let y = y.component(0);
    assert!((y[(0, 0)] - 0.1).abs() < 1e-10 && (y[(1, 1)] - 0.1).abs() < 1e-10);
    assert!(y[(1, 0)].abs() < 1e-15);
    assert!((y[(0, 1)] - 0.01 / 1.2).abs() < 1e-10);
    assert!(rep.derivative_check.unwrap() <= 10.0 * opts.tol);
}

#[test]
fn domain_escape_is_reported() {
    let opts = SolveOptions { beta: Some(0.01), ..Default::default() };
    let res = implicit_solve_num(&half_quadratic(), &origin2(), &point(vec![vec![0.18]]), &opts);
    assert!(matches!(res, Err(Error::DomainEscape { .. })));
    let opts = SolveOptions { max_iter: 2, ..Default::default() };
    let res = implicit_solve_num(&half_quadratic(), &origin2(), &point(vec![vec![0.18]]), &opts);
    assert!(matches!(res, Err(Error::MaxIterationsExceeded { .. })));
}

#[test]
fn complex_entries_are_supported() {
    use num_complex::Complex64 as C;
    let p = NcPoly::from_terms(
        2,
        [(word(&[1]), C::new(1.0, 0.0)), (word(&[1, 1]), C::new(-0.5, 0.0)), (word(&[0]), C::new(-1.0, 0.0))],
    )
    .unwrap();
    let f = NcPolyMap::new(vec![p], (1, 1)).unwrap();
    let x = MatrixPoint::new(vec![Matrix::from_rows(vec![vec![C::new(0.1, 0.05)]])]).unwrap();
    let center = CenterPoint::scalar(&[C::new(0.0, 0.0), C::new(0.0, 0.0)]);
    let (y, _) = implicit_solve_num(&f, &center, &x, &SolveOptions::default()).unwrap();
    let expected = C::new(1.0, 0.0) - (C::new(1.0, 0.0) - C::new(0.2, 0.1)).sqrt();
    assert!((y.component(0)[(0, 0)] - expected).norm() < 1e-10);
}

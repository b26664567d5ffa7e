mod common;

use common::*;
use ncfun::ncalg::eval_poly;
use ncfun::ncdiff::*;
use ncfun::{CenterPoint, Direction, Matrix, MatrixPoint, NcPoly, NcWord, Rational};
use proptest::prelude::*;

fn scalar_pt(v: &[i64]) -> MatrixPoint<Rational> {
    pt(v.iter().map(|&x| Matrix::scalar(1, q(x))).collect())
}

fn scalar_dir(v: &[i64]) -> Direction<Rational> {
    Direction::new(v.iter().map(|&x| Matrix::scalar(1, q(x))).collect()).unwrap()
}

fn entry(m: &Matrix<Rational>) -> Rational {
    m[(0, 0)].clone()
}

#[test]
fn first_order_examples() {
    let sq = NcPoly::monomial(1, word(&[0, 0]), q(1));
    let (x, y, z) = (scalar_pt(&[2]), scalar_pt(&[3]), scalar_dir(&[1]));
    assert_eq!(entry(&delta_r_block(&sq, &x, &y, &z).unwrap()), q(5));
    assert_eq!(entry(&delta_r_sym(&sq, &x, &y, &z).unwrap()), q(5));

    let c = NcPoly::constant(1, q(4));
    assert!(delta_r_block(&c, &x, &y, &z).unwrap().is_zero());
    let id = NcPoly::letter(1, 0);
    assert_eq!(entry(&delta_r_block(&id, &x, &y, &scalar_dir(&[7])).unwrap()), q(7));

    let xy = NcPoly::monomial(2, word(&[0, 1]), q(1));
    let v = delta_r_sym(&xy, &scalar_pt(&[1, 2]), &scalar_pt(&[3, 4]), &scalar_dir(&[1, 0])).unwrap();
    assert_eq!(entry(&v), q(4));
}

#[test]
fn higher_order_examples() {
    let sq = NcPoly::monomial(1, word(&[0, 0]), q(1));
    let cube = NcPoly::monomial(1, word(&[0, 0, 0]), q(1));
    let zeros = vec![scalar_pt(&[0]); 3];
    let ones = vec![scalar_pt(&[1]); 3];
    let dirs = [scalar_dir(&[2]), scalar_dir(&[3])];
    for f in [delta_r_higher::<Rational>, delta_r_higher_sym::<Rational>] {
        assert_eq!(entry(&f(&sq, &zeros, &dirs).unwrap()), q(6));
        assert!(f(&cube, &zeros, &dirs).unwrap().is_zero());
        assert_eq!(entry(&f(&sq, &ones, &dirs).unwrap()), q(6));
    }
}

#[test]
fn tt_examples() {
    let sq = NcPoly::monomial(1, word(&[0, 0]), q(1));
    let tt = tt_coefficients(&sq, &CenterPoint::scalar(&[q(2)])).unwrap();
    assert_eq!(tt.parts.len(), 3);
    assert_eq!(tt.parts[0], NcPoly::constant(1, q(4)));
    assert_eq!(tt.parts[1], NcPoly::monomial(1, word(&[0]), q(4)));
    let x = scalar_pt(&[5]);
    assert_eq!(entry(&tt_evaluate(&tt, &x, 2).unwrap()), q(25));
    assert_eq!(entry(&tt_evaluate(&tt, &x, 1).unwrap()), q(16));
    assert_eq!(entry(&tt_evaluate(&tt, &scalar_pt(&[2]), 0).unwrap()), q(4));

    let comm = NcPoly::from_terms(2, [(word(&[0, 1]), q(1)), (word(&[1, 0]), q(-1))]).unwrap();
    let tt = tt_coefficients(&comm, &CenterPoint::scalar(&[q(5), q(5)])).unwrap();
    assert_eq!(tt.parts.len(), 3);
    assert!(tt.parts[0].is_zero() && tt.parts[1].is_zero());
    assert_eq!(tt.parts[2], comm);

    let tt = tt_coefficients(&NcPoly::constant(1, q(3)), &CenterPoint::scalar(&[q(1)])).unwrap();
    assert_eq!(tt.parts, vec![NcPoly::constant(1, q(3))]);
}

#[test]
fn first_order_identity_operand_convention() {
    let sq = NcPoly::monomial(1, word(&[0, 0]), q(1));
    let s0 = Matrix::zeros(1, 1);
    assert!(first_order_identity_residual(&sq, &scalar_pt(&[2]), &scalar_pt(&[3]), &s0).unwrap().is_zero());
    assert!(first_order_identity_residual(&sq, &scalar_pt(&[2]), &scalar_pt(&[3]), &Matrix::scalar(1, q(1)))
        .unwrap()
        .is_zero());

    // with S on the other side the same combination is not an identity
    let x = pt(vec![jordan(2)]);
    let y = pt(vec![Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(2), q(3)]])]);
    let s = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(0), q(1)]]);
    assert!(first_order_identity_residual(&sq, &x, &y, &s).unwrap().is_zero());
    let z = Direction::new(vec![&s.matmul(x.component(0)) - &y.component(0).matmul(&s)]).unwrap();
    let swapped = &(&s.matmul(&eval_poly(&sq, &x).unwrap()) - &eval_poly(&sq, &y).unwrap().matmul(&s))
        - &delta_r_block(&sq, &x, &y, &z).unwrap();
    assert!(!swapped.is_zero());
}

fn float_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

fn float_case() -> impl Strategy<Value = (NcPoly<f64>, MatrixPoint<f64>, MatrixPoint<f64>, Direction<f64>)> {
    (1..=3usize, 1..=4usize, 1..=4usize).prop_flat_map(|(d, n, m)| {
        let term = (prop::collection::vec(0..d, 0..=5), -3.0f64..3.0);
        let p = prop::collection::vec(term, 1..6)
            .prop_map(move |ts| NcPoly::from_terms(d, ts.into_iter().map(|(w, c)| (NcWord::new(w), c))).unwrap());
        let x = prop::collection::vec(float_matrix(n, n), d).prop_map(|v| MatrixPoint::new(v).unwrap());
        let y = prop::collection::vec(float_matrix(m, m), d).prop_map(|v| MatrixPoint::new(v).unwrap());
        let z = prop::collection::vec(float_matrix(n, m), d).prop_map(|v| Direction::new(v).unwrap());
        (p, x, y, z)
    })
}

fn same_size(
    d_max: usize,
    deg: usize,
    n_max: usize,
) -> impl Strategy<Value = (NcPoly<Rational>, MatrixPoint<Rational>, MatrixPoint<Rational>)> {
    (1..=d_max, 1..=n_max).prop_flat_map(move |(d, n)| (poly(d, deg), point(d, n), point(d, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn block_and_symbolic_paths_agree((p, x, y, z) in poly_and_points(3, 5, 4)) {
        prop_assert_eq!(delta_r_block(&p, &x, &y, &z).unwrap(), delta_r_sym(&p, &x, &y, &z).unwrap());
    }

    #[test]
    fn float_paths_agree((p, x, y, z) in float_case()) {
        let a = delta_r_block(&p, &x, &y, &z).unwrap();
        let b = delta_r_sym(&p, &x, &y, &z).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-10 * a.max_abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_the_direction(
        (p, x, y, z1, z2, a) in (1..=3usize, 1..=3usize, 1..=3usize).prop_flat_map(|(d, n, m)| {
            (poly(d, 4), point(d, n), point(d, m), direction(d, n, m), direction(d, n, m), rat())
        })
    ) {
        let lhs = delta_r_block(&p, &x, &y, &z1.scale(&a).add(&z2)).unwrap();
        let rhs = &delta_r_block(&p, &x, &y, &z1).unwrap().scale(&a) + &delta_r_block(&p, &x, &y, &z2).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn difference_formula((p, x, y) in same_size(3, 5, 3)) {
        let z = x.sub(&y).unwrap().to_direction();
        let lhs = &eval_poly(&p, &x).unwrap() - &eval_poly(&p, &y).unwrap();
        prop_assert_eq!(lhs, delta_r_sym(&p, &x, &y, &z).unwrap());
    }

    #[test]
    fn first_order_identity_vanishes(
        (p, x, y, s) in (1..=3usize).prop_flat_map(|d| (poly(d, 4), point(d, 2), point(d, 3), matrix(2, 3)))
    ) {
        prop_assert!(first_order_identity_residual(&p, &x, &y, &s).unwrap().is_zero());
    }

    #[test]
    fn four_block_structure(
        (p, x1, x2, y1, y2, zs) in (1..=2usize, 1..=2usize, 1..=2usize, 1..=2usize, 1..=2usize).prop_flat_map(
            |(d, n1, n2, m1, m2)| {
                let zs = (direction(d, n1, m1), direction(d, n1, m2), direction(d, n2, m1), direction(d, n2, m2));
                (poly(d, 4), point(d, n1), point(d, n2), point(d, m1), point(d, m2), zs)
            },
        )
    ) {
        let (z11, z12, z21, z22) = zs;
        let (n1, m1) = (x1.n(), y1.n());
        let blocked: Vec<_> = (0..p.num_letters())
            .map(|k| {
                let mut m = Matrix::zeros(n1 + x2.n(), m1 + y2.n());
                m.set_block(0, 0, &z11.mats()[k]);
                m.set_block(0, m1, &z12.mats()[k]);
                m.set_block(n1, 0, &z21.mats()[k]);
                m.set_block(n1, m1, &z22.mats()[k]);
                m
            })
            .collect();
        let z = Direction::new(blocked).unwrap();
        let whole = delta_r_block(&p, &x1.direct_sum(&x2).unwrap(), &y1.direct_sum(&y2).unwrap(), &z).unwrap();
        prop_assert_eq!(whole.block(0, 0, n1, m1), delta_r_block(&p, &x1, &y1, &z11).unwrap());
        prop_assert_eq!(whole.block(0, m1, n1, y2.n()), delta_r_block(&p, &x1, &y2, &z12).unwrap());
        prop_assert_eq!(whole.block(n1, 0, x2.n(), m1), delta_r_block(&p, &x2, &y1, &z21).unwrap());
        prop_assert_eq!(whole.block(n1, m1, x2.n(), y2.n()), delta_r_block(&p, &x2, &y2, &z22).unwrap());
    }

    #[test]
    fn similarity_covariance(
        (p, x, y, z, t, s) in (1..=3usize, 1..=3usize, 1..=3usize).prop_flat_map(|(d, n, m)| {
            (poly(d, 4), point(d, n), point(d, m), direction(d, n, m), invertible(n), invertible(m))
        })
    ) {
        let s_inv = s.inverse().unwrap();
        let z2 = Direction::new(z.mats().iter().map(|zi| t.matmul(zi).matmul(&s_inv)).collect()).unwrap();
        let lhs = delta_r_block(&p, &x.similarity(&t).unwrap(), &y.similarity(&s).unwrap(), &z2).unwrap();
        prop_assert_eq!(lhs, t.matmul(&delta_r_block(&p, &x, &y, &z).unwrap()).matmul(&s_inv));
    }

    #[test]
    fn derivative_matches_central_differences((p, x, _, z) in float_case().prop_filter("square", |c| c.1.n() == c.2.n())) {
        let h = 1e-5;
        let zs = Direction::new(z.mats().to_vec()).unwrap();
        let shifted = |sign: f64| {
            let mats = x.mats().iter().zip(zs.mats()).map(|(xi, zi)| xi + &zi.scale(&(sign * h))).collect();
            eval_poly(&p, &MatrixPoint::new(mats).unwrap()).unwrap()
        };
        let fd = (&shifted(1.0) - &shifted(-1.0)).scale(&(0.5 / h));
        let exact = derivative(&p, &x, &zs).unwrap();
        prop_assert!(fd.max_abs_diff(&exact) <= 1e-7 * exact.max_abs().max(1.0));
    }

    #[test]
    fn higher_order_paths_agree(
        (p, pts, dirs) in (1..=2usize, 1..=3usize).prop_flat_map(|(d, n)| {
            (poly(d, 5), prop::collection::vec(point(d, n), 3), prop::collection::vec(direction(d, n, n), 2))
        })
    ) {
        prop_assert_eq!(delta_r_higher(&p, &pts, &dirs).unwrap(), delta_r_higher_sym(&p, &pts, &dirs).unwrap());
    }

    #[test]
    fn taylor_taylor_remainder(
        (p, c, x, nil, order) in (1..=3usize, 1..=3usize, 0..=3usize).prop_flat_map(|(d, n, order)| {
            let strict = prop::collection::vec(matrix(order + 1, order + 1), d);
            (poly(d, 5), prop::collection::vec(rat(), d), point(d, n), strict, Just(order))
        })
    ) {
        let center = CenterPoint::scalar(&c);
        let tt = tt_coefficients(&p, &center).unwrap();
        let px = eval_poly(&p, &x).unwrap();
        prop_assert_eq!(tt_evaluate(&tt, &x, tt.parts.len()).unwrap(), px.clone());
        let partial = tt_evaluate(&tt, &x, order).unwrap();
        prop_assert_eq!(&px - &partial, tt_remainder(&p, &center, &x, order).unwrap());

        // strictly upper triangular shifts of size order+1 kill every product of order+1 letters
        let k = order + 1;
        let mats = nil
            .iter()
            .zip(&c)
            .map(|(a, ci)| Matrix::from_fn(k, k, |i, j| if j > i { a[(i, j)].clone() } else if i == j { ci.clone() } else { q(0) }))
            .collect();
        let xn = pt(mats);
        prop_assert!(tt_remainder(&p, &center, &xn, order).unwrap().is_zero());
        prop_assert_eq!(tt_evaluate(&tt, &xn, order).unwrap(), eval_poly(&p, &xn).unwrap());
    }
}

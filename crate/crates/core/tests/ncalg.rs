mod common;

use common::*;
use ncfun::ncalg::{ampliate, direct_sum, eval_poly, shift_poly, similarity};
use ncfun::{CenterPoint, Matrix, MatrixPoint, NcPoly, Rational, Scalar};
use proptest::prelude::*;

#[test]
fn similarity_scales_the_off_diagonal() {
    let x = pt(vec![jordan(2)]);
    let s = Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(2)]]);
    let y = similarity(&x, &s).unwrap();
    let expected = Matrix::from_rows(vec![vec![q(0), Rational::from_ratio(1, 2)], vec![q(0), q(0)]]);
    assert_eq!(y.component(0), &expected);
}

#[test]
fn ampliated_evaluation() {
    let p = NcPoly::from_terms(1, [(word(&[0]), q(1)), (word(&[]), q(1))]).unwrap();
    let y = pt(vec![Matrix::scalar(1, q(5))]);
    assert_eq!(eval_poly(&p, &ampliate(&y, 3)).unwrap(), Matrix::scalar(3, q(6)));
    assert_eq!(ampliate(&y, 1), y);
}

#[test]
fn direct_sum_order_is_a_permutation_similarity() {
    let p = pt(vec![Matrix::scalar(1, q(2))]);
    let r = pt(vec![Matrix::from_rows(vec![vec![q(1), q(3)], vec![q(0), q(-1)]])]);
    let pr = direct_sum(&p, &r).unwrap();
    let rp = direct_sum(&r, &p).unwrap();
    // cyclic shift sending the first coordinate to the last
    let perm = Matrix::from_fn(3, 3, |i, j| if (i + 1) % 3 == j { q(1) } else { q(0) });
    assert_eq!(similarity(&pr, &perm).unwrap(), rp);
}

#[test]
fn shift_examples() {
    let sq = NcPoly::monomial(1, word(&[0, 0]), q(1));
    let expect =
        |c: i64| NcPoly::from_terms(1, [(word(&[]), q(c * c)), (word(&[0]), q(2 * c)), (word(&[0, 0]), q(1))]).unwrap();
    assert_eq!(shift_poly(&sq, &CenterPoint::scalar(&[q(1)])).unwrap(), expect(1));
    assert_eq!(shift_poly(&sq, &CenterPoint::scalar(&[q(2)])).unwrap(), expect(2));
    let xy = NcPoly::monomial(2, word(&[0, 1]), q(1));
    assert_eq!(shift_poly(&xy, &CenterPoint::scalar(&[q(0), q(0)])).unwrap(), xy);
}

fn center(d: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rat(), d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_respects_direct_sums((p, x, y, _) in poly_and_points(3, 4, 3)) {
        let lhs = eval_poly(&p, &direct_sum(&x, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, eval_poly(&p, &x).unwrap().direct_sum(&eval_poly(&p, &y).unwrap()));
    }

    #[test]
    fn evaluation_respects_similarity(
        (p, x, s) in (1..=3usize, 1..=3usize).prop_flat_map(|(d, n)| (poly(d, 4), point(d, n), invertible(n)))
    ) {
        let s_inv = s.inverse().unwrap();
        let lhs = eval_poly(&p, &similarity(&x, &s).unwrap()).unwrap();
        prop_assert_eq!(lhs, s.matmul(&eval_poly(&p, &x).unwrap()).matmul(&s_inv));
    }

    #[test]
    fn evaluation_intertwines_inclusions((p, x, y, _) in poly_and_points(3, 4, 3)) {
        // X·T = T·Y for T the inclusion of the first summand of Y ⊕ X
        let big = direct_sum(&y, &x).unwrap();
        let (n, m) = (y.n(), x.n());
        let t = Matrix::from_fn(n + m, n, |i, j| if i == j { q(1) } else { q(0) });
        prop_assert_eq!(eval_poly(&p, &big).unwrap().matmul(&t), t.matmul(&eval_poly(&p, &y).unwrap()));
    }

    #[test]
    fn ampliation_commutes_with_evaluation(
        (p, x) in (1..=3usize, 1..=3usize).prop_flat_map(|(d, n)| (poly(d, 4), point(d, n))),
        m in 1..=3usize,
    ) {
        prop_assert_eq!(eval_poly(&p, &ampliate(&x, m)).unwrap(), eval_poly(&p, &x).unwrap().ampliate(m));
    }

    #[test]
    fn shift_round_trip((p, c) in (1..=3usize).prop_flat_map(|d| (poly(d, 5), center(d)))) {
        let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
        let there = shift_poly(&p, &CenterPoint::scalar(&c)).unwrap();
        prop_assert_eq!(shift_poly(&there, &CenterPoint::scalar(&neg)).unwrap(), p);
    }

    #[test]
    fn shifted_evaluation(
        (p, c, x) in (1..=3usize, 1..=3usize).prop_flat_map(|(d, n)| (poly(d, 4), center(d), point(d, n)))
    ) {
        let center = CenterPoint::scalar(&c);
        let u = MatrixPoint::new(
            x.mats().iter().zip(&c).map(|(xi, ci)| xi - &Matrix::scalar(x.n(), ci.clone())).collect(),
        )
        .unwrap();
        prop_assert_eq!(eval_poly(&shift_poly(&p, &center).unwrap(), &u).unwrap(), eval_poly(&p, &x).unwrap());
    }

    #[test]
    fn algebra_operations_evaluate_pointwise(
        (p, r, x) in (1..=3usize, 1..=3usize).prop_flat_map(|(d, n)| (poly(d, 3), poly(d, 3), point(d, n)))
    ) {
        let (px, rx) = (eval_poly(&p, &x).unwrap(), eval_poly(&r, &x).unwrap());
        prop_assert_eq!(eval_poly(&p.add(&r), &x).unwrap(), &px + &rx);
        prop_assert_eq!(eval_poly(&p.mul(&r), &x).unwrap(), px.matmul(&rx));
    }
}

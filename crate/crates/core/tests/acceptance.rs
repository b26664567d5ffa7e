//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use ncfun::harness::{check_nc_axioms, run_suite, CaseSpec, EntrywiseSquare};
use ncfun::ncalg::eval_poly;
use ncfun::ncdiff::*;
use ncfun::ncode::{flow_sensitivity, integrate_ivp, TimePoly};
use ncfun::ncopt::{ampliation_consistency, solve_kkt, KktOptions, KktPoint, TraceFunctional};
use ncfun::nilp::*;
use ncfun::opspace::*;
use ncfun::{CenterPoint, Direction, LinearBlockMap, Matrix, MatrixPoint, NcPoly, NcPolyMap, Rational};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn draw<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).expect("strategy produces a value").current()
}

fn within(limit: Duration, start: Instant) -> Outcome {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn zero_center(d: usize) -> CenterPoint<Rational> {
    CenterPoint::scalar(&vec![q(0); d])
}

fn exact_nilpotent_solve() -> Outcome {
    let start = Instant::now();
    let f = geometric();
    for x in [jordan(2), jordan(3), jordan(4), jordan(3).direct_sum(&jordan(2))] {
        let xp = pt(vec![x.clone()]);
        let cert = certify_nilpotent(&xp, &zero_center(1), 8).map_err(|e| e.to_string())?;
        let sol = implicit_solve_nilp(&f, &zero_center(2), &xp, &cert).map_err(|e| e.to_string())?;
        let series = (1..cert.kappa).fold(Matrix::zeros(x.rows(), x.rows()), |acc, k| &acc + &x.pow(k));
        ensure(sol.y.component(0) == &series, || format!("size {}: solution is not the geometric series", x.rows()))?;
        let residual = f.eval(&xp.concat(&sol.y).unwrap()).unwrap();
        ensure(residual[0].is_zero(), || "nonzero residual".into())?;
        ensure(sol.iterations <= cert.kappa, || format!("{} iterations for rank {}", sol.iterations, cert.kappa))?;
    }
    within(Duration::from_secs(1), start)
}

fn exact_inverse_round_trip() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::deterministic();
    let g = quadratic_g();
    let gp = &g.components()[0];
    let finv = NcPolyMap::inverse_problem(&g).unwrap();
    let (c1, c2) = (zero_center(1), zero_center(2));
    for case in 0..50 {
        let n = 1 + case % 5;
        let x = pt(vec![draw(&mut runner, &nilpotent(n))]);
        let y = inverse_solve_nilp(&g, &c1, &x, 5).map_err(|e| e.to_string())?.y;
        ensure(&gp.eval(&y).unwrap() == x.component(0), || format!("case {case}: g(f(X)) != X"))?;
        let gx = pt(vec![gp.eval(&x).unwrap()]);
        let back = inverse_solve_nilp(&g, &c1, &gx, 5).map_err(|e| e.to_string())?.y;
        ensure(back == x, || format!("case {case}: f(g(Y)) != Y"))?;
        if case < 20 {
            let w = Direction::new(vec![draw(&mut runner, &matrix(n, n))]).unwrap();
            let df = implicit_derivative_nilp(&finv, &c2, &x, &y, &w).map_err(|e| e.to_string())?;
            ensure(&derivative(gp, &y, &df).unwrap() == &w.mats()[0], || format!("case {case}: δg∘δf != id"))?;
            let dg = Direction::new(vec![derivative(gp, &y, &w).unwrap()]).unwrap();
            let df = implicit_derivative_nilp(&finv, &c2, &x, &y, &dg).map_err(|e| e.to_string())?;
            ensure(df == w, || format!("case {case}: δf∘δg != id"))?;
        }
    }
    within(Duration::from_secs(5), start)
}

fn dual_path_difference() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::deterministic();
    let cases = poly_and_points(3, 5, 4);
    for case in 0..200 {
        let (p, x, y, z) = draw(&mut runner, &cases);
        let block = delta_r_block(&p, &x, &y, &z).unwrap();
        ensure(block == delta_r_sym(&p, &x, &y, &z).unwrap(), || format!("case {case}: paths differ"))?;
        let s = draw(&mut runner, &matrix(x.n(), y.n()));
        ensure(first_order_identity_residual(&p, &x, &y, &s).unwrap().is_zero(), || {
            format!("case {case}: intertwining identity residual")
        })?;
        let y2 = draw(&mut runner, &point(x.d(), x.n()));
        let diff = &eval_poly(&p, &x).unwrap() - &eval_poly(&p, &y2).unwrap();
        let via = delta_r_block(&p, &x, &y2, &x.sub(&y2).unwrap().to_direction()).unwrap();
        ensure(diff == via, || format!("case {case}: difference formula"))?;
    }
    within(Duration::from_secs(10), start)
}

fn taylor_taylor() -> Outcome {
    let mut runner = TestRunner::deterministic();
    for case in 0..50 {
        let d = 1 + case % 3;
        let n = 1 + case % 4;
        let (p, c, x) = draw(&mut runner, &(poly(d, 5), proptest::collection::vec(rat(), d), point(d, n)));
        let center = CenterPoint::scalar(&c);
        let tt = tt_coefficients(&p, &center).unwrap();
        let px = eval_poly(&p, &x).unwrap();
        ensure(tt_evaluate(&tt, &x, 5).unwrap() == px, || format!("case {case}: full order differs"))?;
        for order in 0..=3 {
            let rem = tt_remainder(&p, &center, &x, order).unwrap();
            ensure(&px - &tt_evaluate(&tt, &x, order).unwrap() == rem, || {
                format!("case {case}: remainder at {order}")
            })?;
            // center plus strictly upper triangular shifts: rank order + 1
            let k = order + 1;
            let shifts = draw(&mut runner, &proptest::collection::vec(matrix(k, k), d));
            let mats = shifts
                .iter()
                .zip(&c)
                .map(|(a, ci)| {
                    Matrix::from_fn(k, k, |i, j| {
                        if j > i {
                            a[(i, j)].clone()
                        } else if i == j {
                            ci.clone()
                        } else {
                            q(0)
                        }
                    })
                })
                .collect();
            let xn = pt(mats);
            ensure(tt_remainder(&p, &center, &xn, order).unwrap().is_zero(), || {
                format!("case {case}: remainder at {order} survives on a rank {k} point")
            })?;
        }
    }
    Ok(())
}

fn numeric_implicit_solve() -> Outcome {
    let start = Instant::now();
    let p = NcPoly::from_terms(2, [(word(&[1]), 1.0), (word(&[1, 1]), -0.5), (word(&[0]), -1.0)]).unwrap();
    let f = NcPolyMap::new(vec![p], (1, 1)).unwrap();
    let center = CenterPoint::scalar(&[0.0, 0.0]);
    let opts = SolveOptions::default();
    let one = |rows: Vec<Vec<f64>>| MatrixPoint::new(vec![Matrix::from_rows(rows)]).unwrap();
    let ratio_ok = |rep: &SolveReport| rep.step_norms.windows(2).all(|w| w[0] <= 1e-14 || w[1] <= (0.5 + 1e-6) * w[0]);

    let (y, rep) = implicit_solve_num(&f, &center, &one(vec![vec![0.18]]), &opts).map_err(|e| e.to_string())?;
    ensure((y.component(0)[(0, 0)] - 0.2).abs() < 1e-10, || format!("0.18 gave {}", y.component(0)[(0, 0)]))?;
    ensure(ratio_ok(&rep), || format!("step norms {:?}", rep.step_norms))?;

    let (y, rep) = implicit_solve_num(&f, &center, &one(vec![vec![0.1, 0.05], vec![0.0, 0.1]]), &opts)
        .map_err(|e| e.to_string())?;
    let (v, dv) = (1.0 - 0.8f64.sqrt(), 1.0 / 0.8f64.sqrt());
    let expected = Matrix::from_rows(vec![vec![v, 0.05 * dv], vec![0.0, v]]);
    ensure(y.component(0).max_abs_diff(&expected) < 1e-8, || format!("Jordan input gave {:?}", y.component(0)))?;
    ensure(ratio_ok(&rep), || format!("step norms {:?}", rep.step_norms))?;

    let radii = contraction_search(&f, &center, &SearchOptions::default()).map_err(|e| e.to_string())?;
    ensure(radii.observed_coeff <= 0.5 + 1e-6, || format!("sampled coefficient {}", radii.observed_coeff))?;
    let inside = 0.9 * radii.alpha;
    let x = one(vec![vec![inside, 0.0], vec![0.0, -inside]]);
    let (_, rep) = implicit_solve_num(&f, &center, &x, &opts).map_err(|e| e.to_string())?;
    ensure(ratio_ok(&rep) && rep.contraction_estimate <= 0.5 + 1e-6, || format!("ratio {}", rep.contraction_estimate))?;
    within(Duration::from_secs(1), start)
}

fn cb_norm_separation() -> Outcome {
    let t = LinearBlockMap::<f64>::from_fn(2, 1, 1, |z| Ok(vec![z[0].transpose()])).unwrap();
    let est = cb_norm_estimate(&t, 2, 4, DEFAULT_SEED);
    ensure(est.m_used == 2, || format!("m_used {}", est.m_used))?;
    ensure(est.levels[1] >= 1.999, || format!("level 2 estimate {}", est.levels[1]))?;
    ensure(est.levels[0] <= 1.001, || format!("level 1 estimate {}", est.levels[0]))
}

fn ode_flow() -> Outcome {
    let p = NcPoly::from_terms(1, [(word(&[0, 0]), 1.0)]).unwrap();
    let g = TimePoly::autonomous(NcPolyMap::new(vec![p], (0, 1)).unwrap()).map_err(|e| e.to_string())?;
    let one = |rows: Vec<Vec<f64>>| MatrixPoint::new(vec![Matrix::from_rows(rows)]).unwrap();

    let x = one(vec![vec![1.0]]);
    let tr = integrate_ivp(&g, 0.0, &x, 0.5, 256).map_err(|e| e.to_string())?;
    ensure((tr.endpoint().component(0)[(0, 0)] - 2.0).abs() < 1e-7, || "scalar closed form".into())?;
    let z = flow_sensitivity(&g, &tr, &x).map_err(|e| e.to_string())?;
    ensure((z.component(0)[(0, 0)] - 4.0).abs() < 1e-6, || format!("sensitivity {}", z.component(0)[(0, 0)]))?;
    let h = 1e-5;
    let end = |v: f64| integrate_ivp(&g, 0.0, &one(vec![vec![v]]), 0.5, 256).unwrap().endpoint().component(0)[(0, 0)];
    let fd = (end(1.0 + h) - end(1.0 - h)) / (2.0 * h);
    let zs = z.component(0)[(0, 0)];
    ensure((fd - zs).abs() / zs.abs() < 1e-5, || format!("finite difference {fd} vs {zs}"))?;

    let xj = one(vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
    let exact = Matrix::from_rows(vec![vec![2.0, 4.0], vec![0.0, 2.0]]);
    let err = |steps| integrate_ivp(&g, 0.0, &xj, 0.5, steps).unwrap().endpoint().component(0).max_abs_diff(&exact);
    ensure(err(256) < 1e-7, || format!("Jordan closed form error {}", err(256)))?;
    for steps in [16, 32, 64] {
        let ratio = err(steps) / err(2 * steps);
        ensure(ratio >= 8.0, || format!("halving {steps} steps reduced the error by {ratio}"))?;
    }
    Ok(())
}

fn constrained_extremum() -> Outcome {
    let map = |p| NcPolyMap::new(vec![p], (1, 1)).unwrap();
    let g = map(NcPoly::from_terms(2, [(word(&[0, 1]), 1.0)]).unwrap());
    let f = map(NcPoly::from_terms(2, [(word(&[0]), 1.0), (word(&[1]), 1.0), (word(&[]), -1.0)]).unwrap());
    let tau = TraceFunctional::new(vec![1.0]);
    let opts = KktOptions::default();
    let start = |x: Matrix<f64>| {
        let n = x.rows();
        let y = &Matrix::identity(n) - &x;
        KktPoint::new(MatrixPoint::new(vec![x]).unwrap(), MatrixPoint::new(vec![y]).unwrap(), vec![Matrix::zeros(n, n)])
            .unwrap()
    };

    let sol = solve_kkt(&g, &tau, &f, &start(Matrix::scalar(1, 0.4)), &opts).map_err(|e| e.to_string())?;
    let p = &sol.point;
    let got = (p.x.component(0)[(0, 0)], p.y.component(0)[(0, 0)], p.lambda[0][(0, 0)]);
    ensure((got.0 - 0.5).abs() < 1e-8 && (got.1 - 0.5).abs() < 1e-8 && (got.2 + 0.5).abs() < 1e-8, || {
        format!("scalar critical point {got:?}")
    })?;
    for m in [2, 3] {
        let r = ampliation_consistency(&g, &tau, &f, p, m).map_err(|e| e.to_string())?;
        ensure(r <= 1e-7, || format!("consistency at m = {m}: {r}"))?;
    }

    let x = Matrix::from_rows(vec![vec![0.4, 0.01], vec![0.0, 0.4]]);
    let sol = solve_kkt(&g, &tau, &f, &start(x), &opts).map_err(|e| e.to_string())?;
    let half = Matrix::scalar(2, 0.5);
    let p = &sol.point;
    ensure(p.x.component(0).max_abs_diff(&half) < 1e-6 && p.y.component(0).max_abs_diff(&half) < 1e-6, || {
        format!("matrix critical point {:?}", p.x.component(0))
    })?;
    for m in [2, 3] {
        let r = ampliation_consistency(&g, &tau, &f, p, m).map_err(|e| e.to_string())?;
        ensure(r <= 1e-7, || format!("consistency at m = {m}: {r}"))?;
    }
    Ok(())
}

fn axiom_harness() -> Outcome {
    let run = run_suite(&[], &CaseSpec::default()).map_err(|e| e.to_string())?;
    ensure(run.exit_code() == 0, || format!("suite run: {}", run.to_json()))?;
    let report = check_nc_axioms::<Rational>(&EntrywiseSquare { letters: 1 }, &CaseSpec::default())
        .map_err(|e| e.to_string())?;
    ensure(report.intertwining.failed > 0, || "entrywise square passed intertwining".into())?;
    ensure(report.witnesses.iter().any(|w| w["check"].as_str().is_some_and(|c| c.starts_with("intertwining"))), || {
        "no intertwining witness stored".into()
    })
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact nilpotent implicit solve", exact_nilpotent_solve),
        ("exact inverse round trip", exact_inverse_round_trip),
        ("dual-path difference operator", dual_path_difference),
        ("Taylor-Taylor expansion and remainder", taylor_taylor),
        ("numeric implicit solver", numeric_implicit_solve),
        ("cb-norm separation", cb_norm_separation),
        ("ODE flow and sensitivity", ode_flow),
        ("constrained extremum", constrained_extremum),
        ("axiom harness", axiom_harness),
    ];
    // written to the stdout handle directly so the lines survive output capture
    let mut out = std::io::stdout().lock();
    let mut failures = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(()) => writeln!(out, "criterion {}: PASS ({took:.3}s) {name}", i + 1).unwrap(),
            Err(msg) => {
                writeln!(out, "criterion {}: FAIL ({took:.3}s) {name}: {msg}", i + 1).unwrap();
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

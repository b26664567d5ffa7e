//! `ncfun` command-line front end. Every subcommand reads one JSON document
//! (stdin or `--input`) and writes one JSON document (stdout or `--output`).
//!
//! Exit codes: 0 success, 1 failed `check`, 2 schema or usage error,
//! 3 domain error reported by the library, 4 internal error.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ncfun::harness::{run_suite, CaseKernel, CaseSpec};
use ncfun::json::{
    field, infer_kernel, map_from_json, matrix_from_json, matrix_to_json, parse, point_from_json, point_to_json,
    poly_from_json, poly_to_json, to_canonical_string, usize_field, JsonScalar, Kernel, SCHEMA_VERSION,
};
use ncfun::ncode::{flow_sensitivity, integrate_ivp, ivp_residual, kappa_report, TimePoly};
use ncfun::ncopt::{ampliation_consistency, kkt_residual, solve_kkt, KktOptions, KktPoint, TraceFunctional};
use ncfun::opspace::{contraction_search, ns_norm, ContractionReport, SearchOptions, SolveOptions, SolveReport};
use ncfun::{ncdiff, nilp, opspace, CenterPoint, Direction, Error, Matrix, MatrixPoint, NcPolyMap, Rational};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (json schema 1)");

#[derive(Parser, Debug)]
#[command(name = "ncfun", version = VERSION, about = "Noncommutative function calculus on matrix tuples")]
struct Cli {
    /// Read the input document from this file instead of stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the output document to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a polynomial on a matrix tuple: {"poly", "point"}.
    Eval,
    /// Right difference-differential Δ_R p(X, Y)(Z): {"poly", "x", "y"?, "z"}.
    Deriv,
    /// Taylor-Taylor expansion about a scalar center: {"poly", "center", "x", "order"?}.
    Tt,
    /// Exact implicit solve on nilpotent input: {"map", "center", "x", "kappa_max"}.
    NilpSolve,
    /// Exact inverse on nilpotent input: {"map", "center", "x", "kappa_max"}.
    NilpInvert,
    /// Numeric implicit solve by chord iteration: {"map", "center", "x"}.
    Solve(NumericArgs),
    /// Numeric inverse g(Y) = X: {"map", "center", "x"}.
    Invert(NumericArgs),
    /// Integrate Y' = g(t, Y), Y(t0) = X: {"g", "x", "h"?}.
    Ode(OdeArgs),
    /// Critical point of a trace objective: {"objective", "tau", "constraint", "start"}.
    Extremum(ExtremumArgs),
    /// Run the randomized property suites.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct NumericArgs {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Largest ampliation level sampled by the radius search.
    #[arg(long, default_value_t = 2)]
    m_probe: usize,
    #[arg(long, default_value_t = opspace::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OdeArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 256)]
    steps: usize,
    /// Report Y at this time (defaults to t0 + delta).
    #[arg(long, allow_negative_numbers = true)]
    at: Option<f64>,
}

#[derive(Args, Debug)]
struct ExtremumArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Ampliation levels for the consistency table.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
    check_m: Vec<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelArg {
    Exact,
    Float,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Suite names (repeat or comma-separate); all suites when omitted.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
}

enum Failure {
    Library(Error),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &Option<PathBuf>) -> CliResult<Value> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text =
                std::fs::read_to_string(p).map_err(|e| Error::Schema(format!("cannot read {}: {e}", p.display())))?;
        }
        None => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Internal(format!("reading stdin: {e}")))?;
        }
    }
    Ok(parse(&text)?)
}

fn write_output(path: &Option<PathBuf>, v: &Value) -> CliResult<()> {
    let mut text = to_canonical_string(v);
    text.push('\n');
    let res = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::Internal(format!("writing output: {e}")))
}

fn center_from_json<T: JsonScalar>(v: &Value) -> ncfun::Result<CenterPoint<T>> {
    match v {
        Value::Array(vals) => {
            Ok(CenterPoint::scalar(&vals.iter().map(T::from_json).collect::<ncfun::Result<Vec<_>>>()?))
        }
        _ => Ok(CenterPoint::new(point_from_json(v)?)),
    }
}

fn direction_from_json<T: JsonScalar>(v: &Value) -> ncfun::Result<Direction<T>> {
    let mats = field(v, "mats")?
        .as_array()
        .ok_or_else(|| Error::Schema("`mats` must be an array".into()))?
        .iter()
        .map(matrix_from_json)
        .collect::<ncfun::Result<Vec<Matrix<T>>>>()?;
    Direction::new(mats).map_err(|e| Error::Schema(e.to_string()))
}

fn letters_of(v: &Value) -> Vec<String> {
    v.get("letters")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|s| s.as_str().map(str::to_owned)).collect())
        .unwrap_or_default()
}

fn cmd_eval<T: JsonScalar>(input: &Value) -> CliResult<Value> {
    let p = poly_from_json::<T>(field(input, "poly")?)?;
    let x = point_from_json::<T>(field(input, "point")?)?;
    Ok(json!({"result": matrix_to_json(&p.eval(&x)?)}))
}

fn agree<T: JsonScalar>(a: &Matrix<T>, b: &Matrix<T>) -> bool {
    if T::EXACT {
        a == b
    } else {
        a.max_abs_diff(b) <= 1e-10 * a.max_abs().max(1.0)
    }
}

fn cmd_deriv<T: JsonScalar>(input: &Value) -> CliResult<Value> {
    let p = poly_from_json::<T>(field(input, "poly")?)?;
    let x = point_from_json::<T>(field(input, "x")?)?;
    let y = match input.get("y") {
        Some(y) => point_from_json::<T>(y)?,
        None => x.clone(),
    };
    let z = direction_from_json::<T>(field(input, "z")?)?;
    let block = ncdiff::delta_r_block(&p, &x, &y, &z)?;
    let sym = ncdiff::delta_r_sym(&p, &x, &y, &z)?;
    Ok(json!({"result": matrix_to_json(&block), "path_agreement": agree(&block, &sym)}))
}

fn cmd_tt<T: JsonScalar>(input: &Value) -> CliResult<Value> {
    let poly_json = field(input, "poly")?;
    let p = poly_from_json::<T>(poly_json)?;
    let c = center_from_json::<T>(field(input, "center")?)?;
    let x = point_from_json::<T>(field(input, "x")?)?;
    let tt = ncdiff::tt_coefficients(&p, &c)?;
    let order = match input.get("order") {
        Some(_) => usize_field(input, "order")?,
        None => tt.parts.len().saturating_sub(1),
    };
    let partial = ncdiff::tt_evaluate(&tt, &x, order)?;
    let remainder = ncdiff::tt_remainder(&p, &c, &x, order)?;
    let letters = letters_of(poly_json);
    Ok(json!({
        "parts": tt.parts.iter().map(|q| poly_to_json(q, &letters)).collect::<Vec<_>>(),
        "result": matrix_to_json(&partial),
        "remainder": matrix_to_json(&remainder),
        "path_agreement": agree(&(&partial + &remainder), &p.eval(&x)?),
    }))
}

fn exact_only(input: &Value) -> CliResult<()> {
    if infer_kernel(input)? == Kernel::Float {
        return Err(Error::Schema("exact solvers need rational input (strings \"p/q\" or integers)".into()).into());
    }
    Ok(())
}

fn cmd_nilp_solve(input: &Value) -> CliResult<Value> {
    exact_only(input)?;
    let f = map_from_json::<Rational>(field(input, "map")?)?;
    let center = center_from_json::<Rational>(field(input, "center")?)?;
    let x = point_from_json::<Rational>(field(input, "x")?)?;
    let kappa_max = usize_field(input, "kappa_max")?;
    let x0 = match center.point().split(f.x_letters()) {
        (Some(x0), _) => CenterPoint::new(x0),
        _ => return Err(Error::Schema("the map needs X letters".into()).into()),
    };
    let cert = nilp::certify_nilpotent(&x, &x0, kappa_max)?;
    let sol = nilp::implicit_solve_nilp(&f, &center, &x, &cert)?;
    let exact = f.eval(&x.concat(&sol.y)?)?.iter().all(Matrix::is_zero);
    Ok(json!({
        "y": point_to_json(&sol.y),
        "iterations": sol.iterations,
        "kappa": sol.kappa,
        "joint_kappa_max": sol.joint_kappa_max,
        "exact_residual": exact,
    }))
}

fn cmd_nilp_invert(input: &Value) -> CliResult<Value> {
    exact_only(input)?;
    let g = map_from_json::<Rational>(field(input, "map")?)?;
    let y0 = center_from_json::<Rational>(field(input, "center")?)?;
    let x = point_from_json::<Rational>(field(input, "x")?)?;
    let sol = nilp::inverse_solve_nilp(&g, &y0, &x, usize_field(input, "kappa_max")?)?;
    let back = g.eval(&sol.y)?;
    let exact = back.iter().zip(x.mats()).all(|(a, b)| a == b);
    Ok(json!({
        "y": point_to_json(&sol.y),
        "iterations": sol.iterations,
        "kappa": sol.kappa,
        "joint_kappa_max": sol.joint_kappa_max,
        "exact_residual": exact,
    }))
}

fn radii_json(r: &ContractionReport) -> Value {
    json!({
        "gamma": r.gamma, "alpha": r.alpha, "beta": r.beta,
        "observed_coeff": r.observed_coeff, "m_bound": r.m_bound, "m_probe": r.m_probe,
    })
}

fn report_json(y: &MatrixPoint<f64>, rep: &SolveReport, radii: Option<&ContractionReport>, inside: bool) -> Value {
    json!({
        "y": point_to_json(y),
        "residuals": rep.residuals,
        "step_norms": rep.step_norms,
        "contraction_estimate": rep.contraction_estimate,
        "iterations": rep.iterations,
        "termination": format!("{:?}", rep.termination).to_lowercase(),
        "radii": radii.map(radii_json),
        "in_certified_region": inside,
        "derivative_check": rep.derivative_check,
    })
}

/// Radius search, and whether `X` lies in the certified `α`-ball about the
/// `X` part of the center. Inside the ball the iterates must stay within `β`.
fn certify(
    f: &NcPolyMap<f64>,
    center: &CenterPoint<f64>,
    x: &MatrixPoint<f64>,
    args: &NumericArgs,
) -> CliResult<(Option<ContractionReport>, bool)> {
    let opts = SearchOptions { m_probe: args.m_probe, seed: args.seed, ..Default::default() };
    let radii = match contraction_search(f, center, &opts) {
        Ok(r) => r,
        Err(Error::NoContractionFound { .. }) => return Ok((None, false)),
        Err(e) => return Err(e.into()),
    };
    let inside = match center.point().split(f.x_letters()) {
        (Some(x0), _) => {
            let x0 = CenterPoint::new(x0).ampliate_to(x.n())?;
            ns_norm(&x.sub(&x0)?) < radii.alpha
        }
        _ => false,
    };
    Ok((Some(radii), inside))
}

fn cmd_solve(input: &Value, args: &NumericArgs) -> CliResult<Value> {
    let f = map_from_json::<f64>(field(input, "map")?)?;
    let center = center_from_json::<f64>(field(input, "center")?)?;
    let x = point_from_json::<f64>(field(input, "x")?)?;
    let (radii, inside) = certify(&f, &center, &x, args)?;
    let opts = SolveOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        beta: radii.as_ref().filter(|_| inside).map(|r| r.beta),
    };
    let (y, mut rep) = opspace::implicit_solve_num(&f, &center, &x, &opts)?;
    rep.radii = radii.clone();
    Ok(report_json(&y, &rep, radii.as_ref(), inside))
}

fn cmd_invert(input: &Value, args: &NumericArgs) -> CliResult<Value> {
    let g = map_from_json::<f64>(field(input, "map")?)?;
    let y0 = center_from_json::<f64>(field(input, "center")?)?;
    let x = point_from_json::<f64>(field(input, "x")?)?;
    let f = NcPolyMap::inverse_problem(&g)?;
    let x0 = CenterPoint::new(MatrixPoint::new(g.eval(y0.point())?)?);
    let (radii, inside) = certify(&f, &x0.concat(&y0)?, &x, args)?;
    let opts = SolveOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        beta: radii.as_ref().filter(|_| inside).map(|r| r.beta),
    };
    let (y, mut rep) = opspace::inverse_solve_num(&g, &y0, &x, &opts)?;
    rep.radii = radii.clone();
    Ok(report_json(&y, &rep, radii.as_ref(), inside))
}

fn cmd_ode(input: &Value, args: &OdeArgs) -> CliResult<Value> {
    let g_json = field(input, "g")?;
    let terms = match g_json {
        Value::Array(a) => a.iter().map(map_from_json::<f64>).collect::<ncfun::Result<Vec<_>>>()?,
        other => vec![map_from_json::<f64>(other)?],
    };
    let g = TimePoly::new(terms)?;
    let x = point_from_json::<f64>(field(input, "x")?)?;
    let traj = integrate_ivp(&g, args.t0, &x, args.delta, args.steps)?;
    let at = args.at.unwrap_or(args.t0 + args.delta);
    let kappa = kappa_report(&g, &traj, 9, opspace::DEFAULT_SEED)?;
    let sensitivity = match input.get("h") {
        Some(h) => Some(point_to_json(&flow_sensitivity(&g, &traj, &point_from_json(h)?)?)),
        None => None,
    };
    Ok(json!({
        "t": at,
        "y": point_to_json(&traj.value_at(at)?),
        "ivp_residual": ivp_residual(&g, args.t0, &x, &traj)?,
        "sensitivity": sensitivity,
        "kappa_delta_report": {
            "kappa": kappa.kappa,
            "kappa_delta": kappa.kappa_delta,
            "cb_bound": kappa.cb_bound,
            "warning": kappa.warning,
            "c1_norm_sampled": kappa.c1_norm_sampled,
            "nodes_sampled": kappa.nodes_sampled,
        },
    }))
}

fn cmd_extremum(input: &Value, args: &ExtremumArgs) -> CliResult<Value> {
    let g = map_from_json::<f64>(field(input, "objective")?)?;
    let f = map_from_json::<f64>(field(input, "constraint")?)?;
    let tau = TraceFunctional::new(
        field(input, "tau")?
            .as_array()
            .ok_or_else(|| Error::Schema("`tau` must be an array of coefficients".into()))?
            .iter()
            .map(f64::from_json)
            .collect::<ncfun::Result<Vec<_>>>()?,
    );
    let start = field(input, "start")?;
    let x = point_from_json::<f64>(field(start, "x")?)?;
    let y = point_from_json::<f64>(field(start, "y")?)?;
    let lambda = match start.get("lambda") {
        Some(Value::Array(ls)) => ls.iter().map(matrix_from_json).collect::<ncfun::Result<Vec<_>>>()?,
        Some(_) => return Err(Error::Schema("`lambda` must be an array of matrices".into()).into()),
        None => vec![Matrix::zeros(x.n(), x.n()); y.d()],
    };
    let start = KktPoint::new(x, y, lambda).map_err(|e| Error::Schema(e.to_string()))?;
    let opts = KktOptions { tol: args.tol, max_iter: args.max_iter, ..Default::default() };
    let sol = solve_kkt(&g, &tau, &f, &start, &opts)?;
    let r = kkt_residual(&g, &tau, &f, &sol.point)?;
    let table = args
        .check_m
        .iter()
        .map(|&m| Ok(json!({"m": m, "residual": ampliation_consistency(&g, &tau, &f, &sol.point, m)?})))
        .collect::<ncfun::Result<Vec<_>>>()?;
    Ok(json!({
        "point": {
            "s": sol.point.s,
            "x": point_to_json(&sol.point.x),
            "y": point_to_json(&sol.point.y),
            "lambda": sol.point.lambda.iter().map(matrix_to_json).collect::<Vec<_>>(),
        },
        "residuals": {"stationarity_x": r.stationarity_x, "stationarity_y": r.stationarity_y, "constraint": r.constraint},
        "iterations": sol.iterations,
        "consistency": table,
    }))
}

fn cmd_check(args: &CheckArgs) -> CliResult<(Value, bool)> {
    let mut spec = CaseSpec::default();
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(count) = args.count {
        spec.count = count;
    }
    if let Some(k) = args.kernel {
        spec.kernel = match k {
            KernelArg::Exact => CaseKernel::Exact,
            KernelArg::Float => CaseKernel::Float,
        };
    }
    let run = run_suite(&args.suite, &spec)?;
    Ok((run.to_json(), run.all_passed()))
}

fn by_kernel(
    input: &Value,
    exact: fn(&Value) -> CliResult<Value>,
    float: fn(&Value) -> CliResult<Value>,
) -> CliResult<Value> {
    match infer_kernel(input)? {
        Kernel::Exact => exact(input),
        Kernel::Float => float(input),
    }
}

/// Runs the command and returns the output document and whether it counts
/// as a success.
fn dispatch(cli: &Cli) -> CliResult<(Value, bool)> {
    if let Command::Check(args) = &cli.command {
        return cmd_check(args);
    }
    let input = read_input(&cli.input)?;
    let out = match &cli.command {
        Command::Eval => by_kernel(&input, cmd_eval::<Rational>, cmd_eval::<f64>),
        Command::Deriv => by_kernel(&input, cmd_deriv::<Rational>, cmd_deriv::<f64>),
        Command::Tt => by_kernel(&input, cmd_tt::<Rational>, cmd_tt::<f64>),
        Command::NilpSolve => cmd_nilp_solve(&input),
        Command::NilpInvert => cmd_nilp_invert(&input),
        Command::Solve(a) => cmd_solve(&input, a),
        Command::Invert(a) => cmd_invert(&input, a),
        Command::Ode(a) => cmd_ode(&input, a),
        Command::Extremum(a) => cmd_extremum(&input, a),
        Command::Check(_) => unreachable!("handled above"),
    }?;
    Ok((out, true))
}

fn main() -> ExitCode {
    debug_assert!(VERSION.ends_with(&format!("schema {SCHEMA_VERSION})")));
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| dispatch(&cli))
        .unwrap_or_else(|p| {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            Err(Failure::Internal(msg.unwrap_or_else(|| "panic".into())))
        })
        .and_then(|(v, ok)| write_output(&cli.output, &v).map(|()| ok));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Library(Error::Schema(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(4)
        }
    }
}

//! JSON wire format for polynomials, polynomial maps and matrix tuples.
//!
//! ```text
//! NcPoly      {"letters": ["x0", …], "terms": [{"word": ["x0", "x1"], "coeff": "3/2" | 1.5}]}
//! NcPolyMap   {"x": ["x0", …], "y": ["y0", …], "components": [{"terms": […]}, …]}
//! MatrixPoint {"size": n, "mats": [[[…], …], …]}
//! ```
//!
//! Exact rationals are written as `"p/q"` strings (integers without a
//! denominator); floats are written with 17 significant digits. An input is
//! read in the exact kernel unless it contains a non-integer JSON number or
//! says `"kernel": "float"`.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ncalg::{MatrixPoint, NcPoly, NcPolyMap, NcWord};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// Version of the wire format, bumped on incompatible changes.
pub const SCHEMA_VERSION: &str = "1";

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// Scalars with a JSON representation.
pub trait JsonScalar: Scalar {
    fn from_json(v: &Value) -> Result<Self>;
    fn to_json(&self) -> Value;
}

impl JsonScalar for Rational {
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s).ok_or_else(|| schema(format!("`{s}` is not a rational"))),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Rational::from_i64(i)),
                None => parse_rational(&n.to_string()).ok_or_else(|| schema(format!("{n} is not exact"))),
            },
            other => Err(schema(format!("expected a number or \"p/q\" string, found {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

impl JsonScalar for f64 {
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| schema(format!("{n} is not representable"))),
            Value::String(s) => {
                let r = parse_rational(s).ok_or_else(|| schema(format!("`{s}` is not a number")))?;
                Ok(r.to_c64().re)
            }
            other => Err(schema(format!("expected a number, found {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        Value::from(*self)
    }
}

/// Scalar kernel of an input document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Exact,
    Float,
}

fn has_fraction(v: &Value) -> bool {
    match v {
        Value::Number(n) => !(n.is_i64() || n.is_u64()),
        Value::Array(a) => a.iter().any(has_fraction),
        Value::Object(o) => o.values().any(has_fraction),
        _ => false,
    }
}

/// Explicit `"kernel"` field, otherwise float iff some number has a
/// fractional part or exponent.
pub fn infer_kernel(v: &Value) -> Result<Kernel> {
    match v.get("kernel") {
        Some(Value::String(k)) if k == "exact" => Ok(Kernel::Exact),
        Some(Value::String(k)) if k == "float" => Ok(Kernel::Float),
        Some(other) => Err(schema(format!("kernel must be \"exact\" or \"float\", found {other}"))),
        None => Ok(if has_fraction(v) { Kernel::Float } else { Kernel::Exact }),
    }
}

/// Parses a document, reporting the position of syntax errors.
pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| schema(format!("malformed JSON at line {} column {}: {e}", e.line(), e.column())))
}

/// Compact rendering with sorted keys and floats in `{:.16e}` form, so that
/// rendering a parsed rendering reproduces it byte for byte.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("f64 number");
            out.push_str(&format!("{f:.16e}"));
        }
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(o) => {
            out.push('{');
            let mut keys: Vec<_> = o.keys().collect();
            keys.sort();
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(&o[k], out);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(format!("`{what}` must be an array")))
}

fn names(v: &Value, what: &str) -> Result<Vec<String>> {
    array(v, what)?
        .iter()
        .map(|n| n.as_str().map(str::to_owned).ok_or_else(|| schema(format!("`{what}` entries must be strings"))))
        .collect()
}

pub fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?.as_u64().map(|u| u as usize).ok_or_else(|| schema(format!("`{key}` must be a non-negative integer")))
}

fn parse_terms<T: JsonScalar>(terms: &Value, letters: &[String]) -> Result<NcPoly<T>> {
    let mut out = Vec::new();
    for t in array(terms, "terms")? {
        let word = array(field(t, "word")?, "word")?
            .iter()
            .map(|l| match l {
                Value::String(s) => {
                    letters.iter().position(|n| n == s).ok_or_else(|| schema(format!("unknown letter `{s}`")))
                }
                Value::Number(n) => n
                    .as_u64()
                    .map(|i| i as usize)
                    .filter(|&i| i < letters.len())
                    .ok_or_else(|| schema(format!("letter index {n} out of range"))),
                other => Err(schema(format!("bad letter {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((NcWord::new(word), T::from_json(field(t, "coeff")?)?));
    }
    NcPoly::from_terms(letters.len(), out).map_err(|e| schema(e.to_string()))
}

fn terms_to_json<T: JsonScalar>(p: &NcPoly<T>, letters: &[String]) -> Value {
    Value::Array(
        p.terms()
            .map(|(w, c)| {
                let word: Vec<Value> = w.letters().iter().map(|&i| Value::String(letters[i].clone())).collect();
                let mut o = Map::new();
                o.insert("word".into(), Value::Array(word));
                o.insert("coeff".into(), c.to_json());
                Value::Object(o)
            })
            .collect(),
    )
}

/// Default letter names `x0, x1, …`.
pub fn default_letters(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|i| format!("{prefix}{i}")).collect()
}

pub fn poly_from_json<T: JsonScalar>(v: &Value) -> Result<NcPoly<T>> {
    let letters = names(field(v, "letters")?, "letters")?;
    parse_terms(field(v, "terms")?, &letters)
}

pub fn poly_to_json<T: JsonScalar>(p: &NcPoly<T>, letters: &[String]) -> Value {
    let mut o = Map::new();
    o.insert("letters".into(), letters.iter().cloned().map(Value::String).collect());
    o.insert("terms".into(), terms_to_json(p, letters));
    Value::Object(o)
}

pub fn map_from_json<T: JsonScalar>(v: &Value) -> Result<NcPolyMap<T>> {
    let x = match v.get("x") {
        Some(x) => names(x, "x")?,
        None => Vec::new(),
    };
    let y = names(field(v, "y")?, "y")?;
    let letters: Vec<String> = x.iter().chain(&y).cloned().collect();
    let comps = array(field(v, "components")?, "components")?
        .iter()
        .map(|c| parse_terms(c.get("terms").unwrap_or(c), &letters))
        .collect::<Result<Vec<_>>>()?;
    NcPolyMap::new(comps, (x.len(), y.len())).map_err(|e| schema(e.to_string()))
}

pub fn map_to_json<T: JsonScalar>(f: &NcPolyMap<T>) -> Value {
    let x = default_letters("x", f.x_letters());
    let y = default_letters("y", f.y_letters());
    let letters: Vec<String> = x.iter().chain(&y).cloned().collect();
    let mut o = Map::new();
    o.insert("x".into(), x.into_iter().map(Value::String).collect());
    o.insert("y".into(), y.into_iter().map(Value::String).collect());
    let comps = f
        .components()
        .iter()
        .map(|p| {
            let mut c = Map::new();
            c.insert("terms".into(), terms_to_json(p, &letters));
            Value::Object(c)
        })
        .collect();
    o.insert("components".into(), Value::Array(comps));
    Value::Object(o)
}

pub fn matrix_from_json<T: JsonScalar>(v: &Value) -> Result<Matrix<T>> {
    let rows = array(v, "matrix")?
        .iter()
        .map(|r| array(r, "matrix row")?.iter().map(T::from_json).collect::<Result<Vec<T>>>())
        .collect::<Result<Vec<_>>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(schema("matrix rows must be non-empty and of equal length"));
    }
    Ok(Matrix::from_rows(rows))
}

pub fn matrix_to_json<T: JsonScalar>(m: &Matrix<T>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| r.iter().map(T::to_json).collect()).collect())
}

pub fn point_from_json<T: JsonScalar>(v: &Value) -> Result<MatrixPoint<T>> {
    let mats = array(field(v, "mats")?, "mats")?.iter().map(matrix_from_json).collect::<Result<Vec<Matrix<T>>>>()?;
    if let Some(size) = v.get("size") {
        let n = size.as_u64().ok_or_else(|| schema("`size` must be a positive integer"))? as usize;
        if mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(schema(format!("every matrix must be {n}x{n}")));
        }
    }
    MatrixPoint::new(mats).map_err(|e| schema(e.to_string()))
}

pub fn point_to_json<T: JsonScalar>(p: &MatrixPoint<T>) -> Value {
    let mut o = Map::new();
    o.insert("size".into(), Value::from(p.n()));
    o.insert("mats".into(), p.mats().iter().map(matrix_to_json).collect());
    Value::Object(o)
}

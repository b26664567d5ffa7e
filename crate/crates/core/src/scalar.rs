//! Scalar kernels.
//!
//! Two kernels are supported: exact rationals ([`Rational`], arbitrary
//! precision) and binary64 floats (`f64`, plus [`Complex64`] for complex
//! entries). A polynomial or point is homogeneous in one kernel.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Field element usable as a matrix entry.
///
/// Arithmetic goes through the `*_ref` helpers so that big rationals are not
/// cloned on every multiply-accumulate.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True for the exact rational kernel.
    const EXACT: bool;
    /// True when entries may carry an imaginary part.
    const COMPLEX: bool;

    fn from_i64(v: i64) -> Self;

    /// Conversion from a binary64 value. Exact for the rational kernel.
    fn from_f64(v: f64) -> Self;

    /// Absolute value (modulus) as a float, used for pivoting and norms.
    fn modulus(&self) -> f64;

    fn conj(&self) -> Self;

    fn to_c64(&self) -> Complex64;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;

    /// `self += a * b`
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

/// Marker for the binary64 kernels.
pub trait FloatScalar: Scalar + Copy {
    /// Real part.
    fn re(&self) -> f64;

    /// From a complex value; real kernels drop the imaginary part.
    fn from_c64(c: Complex64) -> Self;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const COMPLEX: bool = false;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn modulus(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const COMPLEX: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn modulus(&self) -> f64 {
        self.abs()
    }

    fn conj(&self) -> Self {
        *self
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl FloatScalar for f64 {
    fn re(&self) -> f64 {
        *self
    }

    fn from_c64(c: Complex64) -> Self {
        c.re
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const COMPLEX: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl FloatScalar for Complex64 {
    fn re(&self) -> f64 {
        self.re
    }

    fn from_c64(c: Complex64) -> Self {
        c
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal into a rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Ok(r) = t.parse::<BigRational>() {
        if r.denom().is_zero() {
            return None;
        }
        return Some(r);
    }
    // plain decimal like "0.25"
    let (int_part, frac_part) = t.split_once('.')?;
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if negative { -r } else { r })
}

/// Canonical `"p/q"` rendering (integers without denominator).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

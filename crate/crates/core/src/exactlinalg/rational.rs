use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Rational vector; the dimension is its length.
pub type RatVector = Vec<Rational>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn is_integral(x: &Rational) -> bool {
    x.denom().is_one()
}

/// Nearest integer, ties rounded away from zero.
pub fn round_half_away(x: &Rational) -> BigInt {
    let two = BigInt::from(2);
    // floor((2|x| + 1) / 2) with the sign restored
    let num = x.numer().abs() * &two + x.denom();
    let den = x.denom() * &two;
    let mag = num.div_floor(&den);
    if x.is_negative() {
        -mag
    } else {
        mag
    }
}

/// `|x - round(x)|`, the distance from `x` to the nearest integer.
pub fn frac_distance(x: &Rational) -> Rational {
    (x - Rational::from_integer(round_half_away(x))).abs()
}

/// `|x|^p` for `p >= 1`.
pub fn abs_pow(x: &Rational, p: u32) -> Rational {
    num_traits::pow(x.abs(), p as usize)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-3.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse rational {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = whole.abs() * &scale + frac;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Parses a comma-separated list such as `"1/2,0,3"`.
pub fn parse_rational_list(s: &str) -> Result<RatVector> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rational).collect()
}

pub fn format_rational(x: &Rational) -> String {
    if is_integral(x) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Integers that fit in `i64` become JSON numbers, everything else a `"p/q"` string.
pub fn rational_to_json(x: &Rational) -> Value {
    if is_integral(x) {
        if let Some(v) = x.numer().to_i64() {
            return Value::from(v);
        }
    }
    Value::String(format_rational(x))
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                // floats are accepted through their shortest decimal rendering
                parse_rational(&n.to_string())
            }
        }
        other => Err(Error::invalid(format!("expected rational, got {other}"))),
    }
}

pub fn vector_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

pub fn vector_from_json(v: &Value) -> Result<RatVector> {
    match v {
        Value::Array(items) => items.iter().map(rational_from_json).collect(),
        other => Err(Error::invalid(format!("expected array, got {other}"))),
    }
}

pub fn matrix_to_json(m: &super::RatMatrix) -> Value {
    Value::Array(m.row_iter().map(vector_to_json).collect())
}

/// Parses a row-major JSON matrix. `cols` fixes the width when there are no rows.
pub fn matrix_from_json(v: &Value, cols: Option<usize>) -> Result<super::RatMatrix> {
    let rows = match v {
        Value::Array(rows) => rows
            .iter()
            .map(vector_from_json)
            .collect::<Result<Vec<_>>>()?,
        other => return Err(Error::invalid(format!("expected matrix, got {other}"))),
    };
    let width = match (rows.first(), cols) {
        (Some(r), _) => r.len(),
        (None, Some(c)) => c,
        (None, None) => 0,
    };
    super::RatMatrix::from_rows(rows, width)
}

//! Exact rational arithmetic helpers shared by every analysis module.
//!
//! All probabilities and rates in this crate are exact rationals; floating
//! point appears only at report boundaries and inside the explicitly
//! float-mode feasibility scan. A rate whose conditioning event has zero
//! probability is not a number at all — it is [`RateValue::Undefined`], a
//! first-class value with its own comparison convention (see the `fairness`
//! module).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// Exact rational number used throughout the crate.
pub type Rational = BigRational;

/// Builds a rational from a signed numerator and denominator.
///
/// Panics if `den == 0`; intended for literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an unsigned pair.
pub fn rat_u(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Error produced when a token cannot be read as an exact rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational number (accepted forms: \"2/3\", \"0.35\", \"-4\")")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses a token as an exact rational.
///
/// Accepted forms: a fraction `n/d`, a decimal such as `0.35` (converted
/// exactly from its decimal digits, never through a float), or an integer.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let denom = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Exact decimal: sign applies to the whole literal.
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if !frac_part.chars().all(|c| c.is_ascii_digit()) || frac_part.is_empty() {
            return Err(err());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let whole = BigInt::from_str(int_digits).map_err(|_| err())?;
        let frac = BigInt::from_str(frac_part).map_err(|_| err())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let numer = (whole * &scale + frac) * BigInt::from(sign);
        return Ok(Rational::new(numer, scale));
    }
    let numer = BigInt::from_str(s).map_err(|_| err())?;
    Ok(Rational::from_integer(numer))
}

/// Renders `r` rounded to exactly six decimal places (round half away from
/// zero), computed in integer arithmetic so the text is platform-stable.
pub fn decimal6(r: &Rational) -> String {
    let scale = BigInt::from(1_000_000u64);
    let scaled = r * Rational::from_integer(scale.clone());
    // round half away from zero
    let two = BigInt::from(2);
    let numer = scaled.numer().clone();
    let denom = scaled.denom().clone(); // > 0 by normalization
    let doubled = numer.abs() * &two + &denom;
    let q = doubled / (denom * &two);
    let sign = if numer.is_negative() && !q.is_zero() {
        "-"
    } else {
        ""
    };
    let int_part = &q / &scale;
    let frac_part = &q % &scale;
    format!("{sign}{int_part}.{frac_part:06}")
}

/// Renders a rational as `fraction (decimal)`, e.g. `4/5 (0.800000)`.
pub fn fraction_and_decimal(r: &Rational) -> String {
    format!("{} ({})", r, decimal6(r))
}

/// Lossy conversion for float-mode computations and report decimals.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Converts a big integer to JSON: a number when it fits in `i64`,
/// otherwise a decimal string.
fn bigint_to_json(i: &BigInt) -> serde_json::Value {
    match i.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(i.to_string()),
    }
}

/// JSON form of an exact rational: `{"num": ..., "den": ...}`.
pub fn rational_to_json(r: &Rational) -> serde_json::Value {
    serde_json::json!({
        "num": bigint_to_json(r.numer()),
        "den": bigint_to_json(r.denom()),
    })
}

fn bigint_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::String(s) => BigInt::from_str(s).ok(),
        serde_json::Value::Number(n) => BigInt::from_str(&n.to_string()).ok(),
        _ => None,
    }
}

/// Reads a `{"num": ..., "den": ...}` JSON object back into a rational.
pub fn rational_from_json(v: &serde_json::Value) -> Option<Rational> {
    let num = bigint_from_json(v.get("num")?)?;
    let den = bigint_from_json(v.get("den")?)?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// A rate that is either an exact rational or undefined because its
/// conditioning event has zero probability (for example the positive
/// predictive value of a group in which nobody was hired).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RateValue {
    Defined(Rational),
    Undefined,
}

impl RateValue {
    pub fn defined(r: Rational) -> Self {
        RateValue::Defined(r)
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, RateValue::Defined(_))
    }

    pub fn as_defined(&self) -> Option<&Rational> {
        match self {
            RateValue::Defined(r) => Some(r),
            RateValue::Undefined => None,
        }
    }

    /// Exact ratio `num/den`, or `Undefined` when `den` is zero.
    pub fn ratio(num: Rational, den: Rational) -> Self {
        if den.is_zero() {
            RateValue::Undefined
        } else {
            RateValue::Defined(num / den)
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.as_defined().map(to_f64)
    }

    /// JSON form: `{"num": ..., "den": ...}` or the string `"undefined"`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            RateValue::Defined(r) => rational_to_json(r),
            RateValue::Undefined => serde_json::Value::from("undefined"),
        }
    }

    /// Renders as `fraction (decimal)` or `UNDEFINED`.
    pub fn render(&self) -> String {
        match self {
            RateValue::Defined(r) => fraction_and_decimal(r),
            RateValue::Undefined => "UNDEFINED".to_string(),
        }
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateValue::Defined(r) => write!(f, "{r}"),
            RateValue::Undefined => write!(f, "UNDEFINED"),
        }
    }
}

impl From<Rational> for RateValue {
    fn from(r: Rational) -> Self {
        RateValue::Defined(r)
    }
}

/// Convenience constructors for common constants.
pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

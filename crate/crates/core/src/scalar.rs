//! Scalar backends: exact rationals for verification, `f64` for tables.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Field operations shared by the exact and floating backends.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> Self;
    /// Exact values render as `"num/den"` strings, floats as JSON numbers.
    fn to_json(&self) -> serde_json::Value;
    fn render(&self) -> String;

    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(self.to_string()))
    }
    fn render(&self) -> String {
        format_float(*self)
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

/// `f64` carrying a first-order bound on its accumulated rounding error.
///
/// Used to detect cancellation in the closed forms as `q -> 1`, where the
/// `1/(1-q^i)` terms blow up and the sums cancel almost completely.
#[derive(Clone, Copy, Debug)]
pub struct Tracked {
    pub value: f64,
    pub err: f64,
}

impl Tracked {
    pub fn from_f64(value: f64) -> Self {
        Self { value, err: f64::EPSILON * 0.5 * value.abs() }
    }

    /// Estimated relative error of `value`; infinite when the value is zero
    /// but the error bound is not.
    pub fn relative_error(&self) -> f64 {
        if self.err == 0.0 {
            0.0
        } else {
            self.err / self.value.abs()
        }
    }

    fn rounded(value: f64, err: f64) -> Self {
        Self { value, err: err + f64::EPSILON * 0.5 * value.abs() }
    }
}

impl PartialEq for Tracked {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for Tracked {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl Add for Tracked {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::rounded(self.value + o.value, self.err + o.err)
    }
}

impl Sub for Tracked {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::rounded(self.value - o.value, self.err + o.err)
    }
}

impl Mul for Tracked {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let err = self.value.abs() * o.err + o.value.abs() * self.err + self.err * o.err;
        Self::rounded(self.value * o.value, err)
    }
}

impl Div for Tracked {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let value = self.value / o.value;
        let denom = (o.value.abs() - o.err).max(f64::MIN_POSITIVE);
        let err = (self.err + value.abs() * o.err) / denom;
        Self::rounded(value, err)
    }
}

impl Neg for Tracked {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, err: self.err }
    }
}

impl Zero for Tracked {
    fn zero() -> Self {
        Self { value: 0.0, err: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0
    }
}

impl One for Tracked {
    fn one() -> Self {
        Self { value: 1.0, err: 0.0 }
    }
}

impl Scalar for Tracked {
    fn from_i64(v: i64) -> Self {
        Self { value: v as f64, err: 0.0 }
    }
    fn to_f64(&self) -> f64 {
        self.value
    }
    fn magnitude(&self) -> Self {
        Self { value: self.value.abs(), err: self.err }
    }
    fn to_json(&self) -> serde_json::Value {
        self.value.to_json()
    }
    fn render(&self) -> String {
        format_float(self.value)
    }
}

/// Shorthand for an exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"` or a bare integer into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let num = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(num, den))
        }
        None => BigInt::from_str(s)
            .map(Rational::from_integer)
            .map_err(|_| bad()),
    }
}

/// Converts a plain decimal literal such as `"0.125"` to the rational it denotes exactly.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a decimal: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(num, den);
    Ok(if neg { -value } else { value })
}

/// Lowest-terms `numerator/denominator`; integers print without a denominator.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Formats an `f64` with the shortest representation that round-trips.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
        assert_eq!(parse_decimal("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_decimal("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_decimal(".7").unwrap(), ratio(7, 10));
        assert!(parse_decimal("1e-3").is_err());
        assert!(parse_decimal(".").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&ratio(40, 14)), "20/7");
        assert_eq!(format_rational(&ratio(2, 2)), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1.0), "1.0");
    }

    #[test]
    fn tracked_flags_cancellation() {
        let q = Tracked::from_f64(1.0 - 1e-9);
        let d = Tracked::one() - q;
        assert!(d.relative_error() > 1e-9);
        let well = Tracked::from_f64(0.5) * Tracked::from_f64(0.25) + Tracked::one();
        assert!(well.relative_error() < 1e-15);
    }

    #[test]
    fn json_rendering() {
        assert_eq!(ratio(20, 7).to_json(), serde_json::json!("20/7"));
        assert_eq!(0.25f64.to_json(), serde_json::json!(0.25));
    }

    #[test]
    fn powu_matches_repeated_product() {
        let q = ratio(2, 3);
        assert_eq!(q.powu(0), ratio(1, 1));
        assert_eq!(q.powu(5), ratio(32, 243));
        assert_eq!(0.5f64.powu(10), 1.0 / 1024.0);
    }
}

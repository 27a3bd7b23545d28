//! Exact rational helpers on top of [`num_rational::BigRational`].

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

/// `"num/den"`, or `"num"` when the denominator is 1 would be ambiguous for consumers, so the
/// denominator is always written.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `p/q`, a bare integer, or a finite decimal such as `0.125`.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let mag = whole.abs() * &scale + frac;
        let num = if neg { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Decimal rendering truncated (rounded toward zero) to `digits` places.
pub fn truncate_decimal(r: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let neg = r.is_negative();
    let scaled = (r.numer().abs() * &scale).div_floor(r.denom());
    let (whole, frac) = scaled.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    format!("{sign}{whole}.{:0>width$}", frac, width = digits as usize)
}

/// Lossy conversion for display only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

pub fn ceil_to_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

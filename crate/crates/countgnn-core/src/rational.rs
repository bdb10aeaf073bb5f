//! Exact rationals and their textual form.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational `{0}`")]
pub struct RationalParseError(pub String);

pub fn int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `p/q`, `p` or `-p/q` with decimal integers.
pub fn parse(text: &str) -> Result<Q, RationalParseError> {
    let bad = || RationalParseError(text.into());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
    let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

/// Integers print bare, everything else as `p/q` in lowest terms.
pub fn format(q: &Q) -> String {
    if q.denom().is_one() {
        alloc::format!("{}", q.numer())
    } else {
        alloc::format!("{}/{}", q.numer(), q.denom())
    }
}

/// Fixed-point decimal with `places` digits, rounded half away from zero.
/// Computed exactly, so the output does not depend on the platform's floats.
pub fn format_decimal(q: &Q, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = q * Q::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let rounded = (abs + half).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let mut out = String::new();
    if neg && !rounded.is_zero() {
        out.push('-');
    }
    let _ = write!(out, "{int_part}");
    if places > 0 {
        let digits = alloc::format!("{frac_part}");
        out.push('.');
        for _ in digits.len()..places {
            out.push('0');
        }
        out.push_str(&digits);
    }
    out
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn bitlen(b: &BigInt) -> u64 {
    b.bits().max(1)
}

/// Bits needed to write `q` as a signed numerator and a denominator.
pub fn bitsize(q: &Q) -> u64 {
    let sign = u64::from(q.numer().sign() == Sign::Minus);
    1 + sign + bitlen(q.numer()) + bitlen(q.denom())
}

pub fn relu(q: &Q) -> Q {
    if q.is_negative() {
        Q::zero()
    } else {
        q.clone()
    }
}

pub fn max_abs(values: &[Q]) -> Q {
    values.iter().map(|v| v.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a })
}

pub fn vec_sub_abs_max(a: &[Q], b: &[Q]) -> Q {
    let diffs: Vec<Q> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    max_abs(&diffs)
}

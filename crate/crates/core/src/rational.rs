//! Exact rational scalars and their text encoding.
//!
//! On the wire a rational is `n/d` (or just `n` when the denominator is one).
//! Input additionally accepts decimals such as `-0.125` or `2.5e-3`, which are
//! converted without rounding.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`; panics on a zero denominator, so only use with literal values.
pub fn ratio(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a / b)
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::MalformedRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = parse_integer(n.trim()).ok_or_else(bad)?;
        let d: BigInt = parse_integer(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, unsigned) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = unsigned.split_once('.').unwrap_or((unsigned, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{whole}{frac}").parse().ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * ten.pow(scale as u32))
    } else {
        Rational::new(digits, ten.pow(scale.unsigned_abs()))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_input_forms() {
        assert_eq!(parse_rational("7/4").unwrap(), ratio(7, 4));
        assert_eq!(parse_rational("-10").unwrap(), int(-10));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_rational("1E2").unwrap(), int(100));
        assert_eq!(parse_rational(" 6/-4 ").unwrap(), ratio(-3, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1/", "/2", "1.2.3", "--1", "1/0.5", "e5", "."] {
            assert!(parse_rational(s).is_err(), "{s:?} should not parse");
        }
        assert_eq!(parse_rational("3/0"), Err(Error::DivisionByZero));
        assert_eq!(checked_div(&int(1), &int(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format_rational(&ratio(14, 8)), "7/4");
        assert_eq!(format_rational(&ratio(-9, 3)), "-3");
        assert_eq!(format_rational(&int(0)), "0");
    }

    proptest::proptest! {
        #[test]
        fn text_round_trip(n in -100_000i64..100_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            proptest::prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}

//! Exact rational arithmetic helpers.
//!
//! Every length, time and probability in the library is a [`Rational`]. Floating
//! point only appears at the edges (reporting, factor curves involving `√2`).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a rational number")]
pub struct ParseRationalError {
    pub input: String,
}

/// `n / d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    rat(1, 2)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, plain integers, and decimal literals such as `"1.25"` or
/// `"2.5e-3"` exactly.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| err())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let numer: BigInt = format!("{whole}{frac}").parse().map_err(|_| err())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Formats as `p/q` (or `p` for integers), or with `decimals` digits after the point.
pub fn format_rational(r: &Rational, decimals: Option<usize>) -> String {
    match decimals {
        None => r.to_string(),
        Some(k) => format_decimal(r, k),
    }
}

fn format_decimal(r: &Rational, k: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), k);
    let scaled = r * Rational::from_integer(scale.clone());
    // round half away from zero
    let rounded = scaled.abs().round().to_integer();
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if k == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = k)
    }
}

/// A rational approximation of `√2` accurate to better than `1e-40`, taken from the
/// Pell convergents `p/q` with `p² − 2q² = ±1`.
pub fn sqrt2() -> Rational {
    let (mut p, mut q) = (BigInt::one(), BigInt::one());
    let bound = num_traits::pow(BigInt::from(10), 21);
    while q < bound {
        let next_p = &p + BigInt::from(2) * &q;
        let next_q = &p + &q;
        p = next_p;
        q = next_q;
    }
    Rational::new(p, q)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn max_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    values.into_iter().max().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("184/19").unwrap(), rat(184, 19));
        assert_eq!(parse_rational("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1e3").unwrap(), int(1000));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn decimal_formatting_rounds() {
        assert_eq!(format_rational(&rat(184, 19), Some(4)), "9.6842");
        assert_eq!(format_rational(&rat(-1, 3), Some(2)), "-0.33");
        assert_eq!(format_rational(&rat(5, 2), Some(0)), "3");
        assert_eq!(format_rational(&rat(25, 3), None), "25/3");
    }

    #[test]
    fn sqrt2_is_accurate() {
        let s = sqrt2();
        let err = &s * &s - int(2);
        assert!(err.abs() < rat(1, 1_000_000_000_000_000_000));
        assert!((to_f64(&s) - std::f64::consts::SQRT_2).abs() < 1e-15);
    }
}

//! Exact rational scalars shared by every module.
//!
//! All set endpoints, stripe parameters and certificate quantities are kept
//! as big-integer rationals; binary floating point only appears in
//! sampling-based checks. Queries that arrive as `f64` are converted
//! exactly (every finite float is a binary rational).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Exact conversion; `None` for NaN or infinities.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_f64(x)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_abs(x: &Rat) -> Rat {
    x.abs()
}

/// Serialized form used in every JSON artifact: `"num/den"`, denominator
/// always present and positive.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("rational literal longer than {0} bytes")]
    TooLong(usize),
    #[error("invalid rational literal: {0:?}")]
    Invalid(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

const MAX_LITERAL_LEN: usize = 4096;

/// Parses `"num/den"`, plain integers and decimal literals (`"-3/4"`,
/// `"7"`, `"0.125"`) into an exact rational. Input is untrusted: length
/// is capped and nothing panics.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatError::Empty);
    }
    if s.len() > MAX_LITERAL_LEN {
        return Err(ParseRatError::TooLong(MAX_LITERAL_LEN));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num = parse_int(n)?;
        let den = parse_int(d)?;
        if den.is_zero() {
            return Err(ParseRatError::ZeroDenominator);
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Decimal form: sign lives on the integer part only.
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRatError::Invalid(clip(s)));
        }
        let int = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            return Err(ParseRatError::Invalid(clip(s)));
        } else {
            parse_int(int_part)?
        };
        let negative = int_part.starts_with('-');
        let frac_digits: BigInt = frac_part
            .parse()
            .map_err(|_| ParseRatError::Invalid(clip(s)))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rat::new(frac_digits, scale);
        let whole = Rat::from(int);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    Ok(Rat::from(parse_int(s)?))
}

fn parse_int(s: &str) -> Result<BigInt, ParseRatError> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRatError::Invalid(clip(s)));
    }
    s.parse().map_err(|_| ParseRatError::Invalid(clip(s)))
}

fn clip(s: &str) -> String {
    let mut out: String = s.chars().take(32).collect();
    if s.chars().count() > 32 {
        out.push('…');
    }
    out
}

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::Rng;

use super::Rational;
use crate::error::{Error, Result};

/// Parses a decimal literal (`"12"`, `"-0.125"`, `"3.5e-2"`, `"1E3"`) exactly.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidDecimal(text.to_string());
    let s = text.trim();
    let (negative, s) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * Pow::pow(&ten, scale as u32))
    } else {
        Rational::new(numer, Pow::pow(&ten, scale.unsigned_abs()))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Nearest double (ties to even) to an exact rational.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` with both drawn uniformly from `1..=100`.
pub fn random_small_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let n: u32 = rng.gen_range(1..=100);
    let d: u32 = rng.gen_range(1..=100);
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `n choose k`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc.to_u64().unwrap_or(u64::MAX)
}

pub fn is_positive(q: &Rational) -> bool {
    q > &Rational::zero()
}

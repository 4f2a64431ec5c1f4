//! Big rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_bigint(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Parses `p`, `p/q`, or a decimal literal such as `-1.28` or `2.5e-3` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Usage(format!("invalid rational literal '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: Rational = parse_rational(p)?;
        let q: Rational = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Canonical `p/q` (or `p`) rendering; parses back to the same value.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Correctly rounded conversion for arbitrarily large numerators and denominators.
pub fn to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let neg = q.is_negative();
    let n = q.numer().abs();
    let d = q.denom().clone();
    // Scale so the integer quotient carries 64+ significant bits.
    let shift = 66i64 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if shift >= 0 {
        (n << shift as usize, d)
    } else {
        (n, d << (-shift) as usize)
    };
    let (quot, rem) = num.div_rem(&den);
    // Sticky bit keeps the rounding correct after truncation.
    let mut mant = quot;
    if !rem.is_zero() {
        mant |= BigInt::one();
    }
    let v = mant.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(shift as i32));
    if neg {
        -v
    } else {
        v
    }
}

/// Nearest rational with denominator at most `max_den` (continued fractions).
pub fn approximate_f64(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = float_to_rational(x)?;
    let mut h = (BigInt::zero(), BigInt::one());
    let mut k = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    let bound = BigInt::from(max_den);
    loop {
        let a = rest.floor().to_integer();
        let hn = &a * &h.1 + &h.0;
        let kn = &a * &k.1 + &k.0;
        if kn > bound {
            break;
        }
        h = (h.1, hn);
        k = (k.1, kn);
        let frac = &rest - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
    }
    if k.1.is_zero() {
        return None;
    }
    Some(Rational::new(h.1, k.1))
}

/// Exact value of a finite double.
pub fn float_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Product of prime powers, used for the printed denominators.
pub fn prime_power_product(factors: &[(u32, u32)]) -> BigInt {
    factors
        .iter()
        .fold(BigInt::one(), |acc, &(p, e)| acc * num_traits::pow(BigInt::from(p), e as usize))
}

pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimals() {
        assert_eq!(parse_rational("25/19").unwrap(), rat(25, 19));
        assert_eq!(parse_rational("-1.28").unwrap(), rat(-32, 25));
        assert_eq!(parse_rational("2.5e-3").unwrap(), rat(1, 400));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("1/0"), Err(Error::DivisionByZero));
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn f64_conversion_is_correctly_rounded() {
        assert_eq!(to_f64(&rat(1, 3)), 1.0 / 3.0);
        assert_eq!(to_f64(&rat(-22, 7)), -22.0 / 7.0);
        let huge = Rational::new(
            "264643025208158502912098205658743146287".parse().unwrap(),
            prime_power_product(&[(2, 81), (3, 9), (5, 3), (7, 4), (11, 2), (13, 3)]),
        );
        assert!((to_f64(&huge) - 0.069698255940).abs() < 1e-12);
    }

    #[test]
    fn continued_fraction_recovers_simple_fractions() {
        assert_eq!(approximate_f64(25.0 / 19.0, 1000).unwrap(), rat(25, 19));
        assert_eq!(approximate_f64(-0.3125, 64).unwrap(), rat(-5, 16));
    }

    #[test]
    fn format_round_trips() {
        for q in [rat(3, 7), int(-4), rat(-11, 16)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }
}

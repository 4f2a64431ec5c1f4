//! Error-bounded high-precision reals.
//!
//! A [`BigFloat`] is a ball `(mid ± rad)·2^-bits` with integer `mid` and
//! `rad`. Every operation widens `rad` so the true value stays inside the
//! ball. Monotone functions (roots, rational powers) are applied to both
//! endpoints with outward rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::quad::QuadElem;
use super::rational::{to_f64, Rational};
use crate::error::{Error, Result};

pub const DEFAULT_DIGITS: u32 = 60;
pub const GUARD_BITS: u32 = 64;

/// Working bits needed for `digits` decimal digits plus guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    mid: BigInt,
    rad: BigInt,
    bits: u32,
}

fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_mod_floor(d);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    // Round half away from zero; any rounding rule works since rad absorbs it.
    let two = BigInt::from(2);
    let (q, r) = n.div_mod_floor(d);
    if &r * &two >= *d {
        q + 1
    } else {
        q
    }
}

fn root_floor(x: &BigInt, q: u32) -> BigInt {
    if q == 1 {
        x.clone()
    } else {
        x.nth_root(q)
    }
}

fn root_ceil(x: &BigInt, q: u32) -> BigInt {
    let f = root_floor(x, q);
    if num_traits::pow(f.clone(), q as usize) == *x {
        f
    } else {
        f + 1
    }
}

impl BigFloat {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn zero(bits: u32) -> Self {
        BigFloat { mid: BigInt::zero(), rad: BigInt::zero(), bits }
    }

    pub fn from_int(n: i64, bits: u32) -> Self {
        BigFloat { mid: BigInt::from(n) << bits as usize, rad: BigInt::zero(), bits }
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        let scaled = q.numer() << bits as usize;
        let (quot, rem) = scaled.div_mod_floor(q.denom());
        if rem.is_zero() {
            return BigFloat { mid: quot, rad: BigInt::zero(), bits };
        }
        BigFloat { mid: div_round(&scaled, q.denom()), rad: BigInt::one(), bits }
    }

    /// Ball containing every value of the closed rational interval `[lo, hi]`.
    pub fn from_interval(lo: &Rational, hi: &Rational, bits: u32) -> Self {
        let a = BigFloat::from_rational(lo, bits);
        let b = BigFloat::from_rational(hi, bits);
        BigFloat::hull(&a, &b)
    }

    pub fn from_quad(q: &QuadElem, bits: u32) -> Self {
        let r = BigFloat::from_rational(&q.r, bits);
        if q.s.is_zero() {
            return r;
        }
        let root = BigFloat::from_int(q.d as i64, bits).sqrt().expect("positive radicand");
        r.add(&BigFloat::from_rational(&q.s, bits).mul(&root))
    }

    pub fn from_f64(x: f64, bits: u32) -> Self {
        BigFloat::from_rational(&Rational::from_float(x).expect("finite"), bits)
    }

    fn lo(&self) -> BigInt {
        &self.mid - &self.rad
    }

    fn hi(&self) -> BigInt {
        &self.mid + &self.rad
    }

    fn from_endpoints(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        let sum = &lo + &hi;
        let mid = sum.div_floor(&BigInt::from(2));
        let rad = std::cmp::max(&hi - &mid, &mid - &lo);
        BigFloat { mid, rad, bits }
    }

    pub fn hull(a: &BigFloat, b: &BigFloat) -> Self {
        let (a, b) = align(a, b);
        let lo = std::cmp::min(a.lo(), b.lo());
        let hi = std::cmp::max(a.hi(), b.hi());
        BigFloat::from_endpoints(lo, hi, a.bits)
    }

    /// Changes the working precision; never shrinks the enclosure.
    pub fn with_bits(&self, bits: u32) -> Self {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let sh = (bits - self.bits) as usize;
                BigFloat { mid: &self.mid << sh, rad: &self.rad << sh, bits }
            }
            Ordering::Less => {
                let d = BigInt::one() << (self.bits - bits) as usize;
                let lo = self.lo().div_floor(&d);
                let hi = div_ceil(&self.hi(), &d);
                BigFloat::from_endpoints(lo, hi, bits)
            }
        }
    }

    pub fn add(&self, o: &BigFloat) -> BigFloat {
        let (a, b) = align(self, o);
        BigFloat { mid: &a.mid + &b.mid, rad: &a.rad + &b.rad, bits: a.bits }
    }

    pub fn sub(&self, o: &BigFloat) -> BigFloat {
        let (a, b) = align(self, o);
        BigFloat { mid: &a.mid - &b.mid, rad: &a.rad + &b.rad, bits: a.bits }
    }

    pub fn neg(&self) -> BigFloat {
        BigFloat { mid: -&self.mid, rad: self.rad.clone(), bits: self.bits }
    }

    pub fn abs(&self) -> BigFloat {
        if self.mid.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, o: &BigFloat) -> BigFloat {
        let (a, b) = align(self, o);
        let scale = BigInt::one() << a.bits as usize;
        let prod = &a.mid * &b.mid;
        let mid = div_round(&prod, &scale);
        let spread = a.mid.abs() * &b.rad + b.mid.abs() * &a.rad + &a.rad * &b.rad;
        let rad = div_ceil(&spread, &scale) + 1;
        BigFloat { mid, rad, bits: a.bits }
    }

    pub fn mul_rational(&self, q: &Rational) -> BigFloat {
        self.mul(&BigFloat::from_rational(q, self.bits))
    }

    pub fn div(&self, o: &BigFloat) -> Result<BigFloat> {
        let (a, b) = align(self, o);
        let m2 = b.mid.abs();
        if m2 <= b.rad {
            return Err(Error::DivisionByZero);
        }
        let scale = BigInt::one() << a.bits as usize;
        let mid = div_round(&(&a.mid * &scale), &b.mid);
        let num = (&a.rad * &m2 + a.mid.abs() * &b.rad) * &scale;
        let den = &m2 * (&m2 - &b.rad);
        let rad = div_ceil(&num, &den) + 1;
        Ok(BigFloat { mid, rad, bits: a.bits })
    }

    pub fn recip(&self) -> Result<BigFloat> {
        BigFloat::from_int(1, self.bits).div(self)
    }

    pub fn powi(&self, e: i32) -> Result<BigFloat> {
        let mut acc = BigFloat::from_int(1, self.bits);
        let mut base = self.clone();
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        if e < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    pub fn sqrt(&self) -> Result<BigFloat> {
        self.root(2)
    }

    /// Principal `q`-th root of a nonnegative ball.
    pub fn root(&self, q: u32) -> Result<BigFloat> {
        assert!(q >= 1);
        let hi = self.hi();
        if hi.is_negative() {
            return Err(Error::NegativeRoot);
        }
        let lo = std::cmp::max(self.lo(), BigInt::zero());
        // value·2^b = (x·2^b)^(1/q) · 2^(b(q-1)/q)  =>  root of x·2^(b·q)
        let sh = (self.bits as usize) * (q as usize - 1);
        let lo_r = root_floor(&(lo << sh), q);
        let hi_r = root_ceil(&(hi << sh), q);
        Ok(BigFloat::from_endpoints(lo_r, hi_r, self.bits))
    }

    /// `x^(p/q)` for a positive ball `x`.
    pub fn pow_rational(&self, e: &Rational) -> Result<BigFloat> {
        let p = e.numer().to_i32().ok_or_else(|| Error::Usage("exponent too large".into()))?;
        let q = e.denom().to_u32().ok_or_else(|| Error::Usage("exponent too large".into()))?;
        if self.lo().sign() != Sign::Plus && q > 1 {
            if self.hi().is_negative() {
                return Err(Error::NegativeRoot);
            }
            if p < 0 {
                return Err(Error::DivisionByZero);
            }
        }
        // Extra bits absorb the amplification of the root error by p.
        let extra = 8 + (32 - p.unsigned_abs().leading_zeros());
        let work = self.with_bits(self.bits + extra);
        let r = work.root(q)?;
        Ok(r.powi(p)?.with_bits(self.bits))
    }

    /// π by Machin's formula with a rigorous truncation bound.
    pub fn pi(bits: u32) -> BigFloat {
        let work = bits + 16;
        let (a5, e5) = atan_inv(5, work);
        let (a239, e239) = atan_inv(239, work);
        let mid = a5 * 16 - a239 * 4;
        let rad = e5 * 16 + e239 * 4;
        BigFloat { mid, rad, bits: work }.with_bits(bits)
    }

    /// Absolute error bound as a double.
    pub fn err(&self) -> f64 {
        to_f64(&Rational::new(self.rad.clone(), BigInt::one() << self.bits as usize))
    }

    pub fn mid_rational(&self) -> Rational {
        Rational::new(self.mid.clone(), BigInt::one() << self.bits as usize)
    }

    pub fn lo_rational(&self) -> Rational {
        Rational::new(self.lo(), BigInt::one() << self.bits as usize)
    }

    pub fn hi_rational(&self) -> Rational {
        Rational::new(self.hi(), BigInt::one() << self.bits as usize)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.mid_rational())
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo_rational() <= q && q <= &self.hi_rational()
    }

    pub fn contains_zero(&self) -> bool {
        self.rad >= self.mid.abs()
    }

    /// Certainly strictly less than `o` (disjoint balls).
    pub fn certainly_lt(&self, o: &BigFloat) -> bool {
        let (a, b) = align(self, o);
        a.hi() < b.lo()
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo().is_positive()
    }

    pub fn certainly_negative(&self) -> bool {
        self.hi().is_negative()
    }

    /// Decimal string with `frac_digits` digits after the point (round half up).
    pub fn to_decimal(&self, frac_digits: usize) -> String {
        decimal_of(&self.mid, self.bits, frac_digits)
    }

    /// The decimal rendering is certain if both endpoints round to it.
    pub fn decimal_is_certain(&self, frac_digits: usize) -> bool {
        decimal_of(&self.lo(), self.bits, frac_digits) == decimal_of(&self.hi(), self.bits, frac_digits)
    }

    /// Scientific rendering with `sig` significant digits, e.g. `1.8e-31`.
    pub fn to_scientific(&self, sig: usize) -> String {
        let x = self.mid_rational();
        if x.is_zero() {
            return "0".into();
        }
        let neg = x.is_negative();
        let ax = x.abs();
        let mut exp10 = to_f64(&ax).log10().floor() as i64;
        let ten = Rational::from_integer(BigInt::from(10));
        let scaled = |e: i64| -> Rational {
            let shift = sig as i64 - 1 - e;
            if shift >= 0 {
                &ax * num_traits::pow(ten.clone(), shift as usize)
            } else {
                &ax / num_traits::pow(ten.clone(), (-shift) as usize)
            }
        };
        let mut digits = (scaled(exp10) + Rational::new(1.into(), 2.into())).floor().to_integer();
        if digits.to_string().len() > sig {
            exp10 += 1;
            digits = (scaled(exp10) + Rational::new(1.into(), 2.into())).floor().to_integer();
        }
        let s = digits.to_string();
        let (head, tail) = s.split_at(1);
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

fn decimal_of(m: &BigInt, bits: u32, frac_digits: usize) -> String {
    let neg = m.is_negative();
    let scaled = m.abs() * num_traits::pow(BigInt::from(10), frac_digits);
    let q = div_round(&scaled, &(BigInt::one() << bits as usize));
    let s = format!("{:0>width$}", q.to_string(), width = frac_digits + 1);
    let (int_part, frac_part) = s.split_at(s.len() - frac_digits);
    let sign = if neg && !q.is_zero() { "-" } else { "" };
    if frac_digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn align(a: &BigFloat, b: &BigFloat) -> (BigFloat, BigFloat) {
    if a.bits == b.bits {
        (a.clone(), b.clone())
    } else {
        let bits = a.bits.max(b.bits);
        (a.with_bits(bits), b.with_bits(bits))
    }
}

/// `atan(1/k)·2^bits` by its alternating series; returns (value, error bound).
fn atan_inv(k: u32, bits: u32) -> (BigInt, BigInt) {
    let one = BigInt::one() << bits as usize;
    let k2 = BigInt::from(k * k);
    let mut power = &one / BigInt::from(k); // 1/k^(2i+1), truncated
    let mut sum = BigInt::zero();
    let mut i = 0u32;
    let mut terms = 0u32;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * i + 1);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &k2;
        i += 1;
        terms += 1;
    }
    // Each truncating division loses < 1 unit, twice per term, plus the tail.
    (sum, BigInt::from(2 * terms + 2))
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.bits.saturating_sub(GUARD_BITS)) as f64 / std::f64::consts::LOG2_10) as usize;
        write!(f, "{} ± {:.1e}", self.to_decimal(digits.max(1)), self.err())
    }
}

/// Arithmetic expression over exact constants, evaluated with certified error.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Rational(Rational),
    Quad(QuadElem),
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Pow(Box<Expr>, Rational),
}

impl Expr {
    pub fn rational(q: Rational) -> Expr {
        Expr::Rational(q)
    }

    pub fn eval_at_bits(&self, bits: u32) -> Result<BigFloat> {
        Ok(match self {
            Expr::Rational(q) => BigFloat::from_rational(q, bits),
            Expr::Quad(q) => BigFloat::from_quad(q, bits),
            Expr::Pi => BigFloat::pi(bits),
            Expr::Neg(a) => a.eval_at_bits(bits)?.neg(),
            Expr::Add(a, b) => a.eval_at_bits(bits)?.add(&b.eval_at_bits(bits)?),
            Expr::Sub(a, b) => a.eval_at_bits(bits)?.sub(&b.eval_at_bits(bits)?),
            Expr::Mul(a, b) => a.eval_at_bits(bits)?.mul(&b.eval_at_bits(bits)?),
            Expr::Div(a, b) => {
                let den = b.eval_at_bits(bits)?;
                if den.mid.is_zero() && den.rad.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                a.eval_at_bits(bits)?.div(&den)?
            }
            Expr::Sqrt(a) => a.eval_at_bits(bits)?.sqrt()?,
            Expr::Pow(a, e) => {
                let base = a.eval_at_bits(bits)?;
                if e.is_integer() {
                    base.powi(e.to_integer().to_i32().ok_or_else(|| Error::Usage("exponent too large".into()))?)?
                } else {
                    base.pow_rational(e)?
                }
            }
        })
    }
}

/// Evaluates `expr` so the reported error is below `10^-digits`, raising the
/// working precision until it is (or giving up after a few doublings).
pub fn bigfloat_eval(expr: &Expr, digits: u32) -> Result<BigFloat> {
    let target = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), digits as usize));
    let mut bits = bits_for_digits(digits);
    for _ in 0..6 {
        let v = expr.eval_at_bits(bits)?;
        let rad = Rational::new(v.rad.clone(), BigInt::one() << v.bits as usize);
        if rad < target {
            return Ok(v);
        }
        bits *= 2;
    }
    Err(Error::Certification(format!("could not reach {digits} digits")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, prime_power_product};
    use proptest::prelude::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn unit_scale_rational_renders() {
        let g = Rational::new(
            "264643025208158502912098205658743146287".parse().unwrap(),
            prime_power_product(&[(2, 81), (3, 9), (5, 3), (7, 4), (11, 2), (13, 3)]),
        );
        let v = bigfloat_eval(&Expr::Rational(g), 60).unwrap();
        assert_eq!(v.to_decimal(12), "0.069698255940");
        assert!(v.decimal_is_certain(12));
    }

    #[test]
    fn sqrt3_squared_in_field_is_exact() {
        let s = QuadElem::sqrt_of(3);
        let v = bigfloat_eval(&Expr::Quad(&s * &s), 60).unwrap();
        assert_eq!(v.err(), 0.0);
        assert_eq!(v.to_decimal(5), "3.00000");
    }

    #[test]
    fn pi_digits() {
        let p = BigFloat::pi(bits_for_digits(50));
        assert_eq!(p.to_decimal(40), "3.1415926535897932384626433832795028841972");
        assert!(p.decimal_is_certain(40));
    }

    #[test]
    fn roots_and_powers() {
        let bits = bits_for_digits(40);
        let two = BigFloat::from_int(2, bits);
        assert_eq!(two.sqrt().unwrap().to_decimal(30), "1.414213562373095048801688724210");
        let x = BigFloat::from_int(3, bits).pow_rational(&rat(33, 14)).unwrap();
        assert!((x.to_f64() - 3f64.powf(33.0 / 14.0)).abs() < 1e-12);
        let y = BigFloat::from_int(8, bits).pow_rational(&rat(-2, 3)).unwrap();
        assert!(y.contains(&rat(1, 4)));
    }

    #[test]
    fn errors_on_bad_input() {
        let e = Expr::Sqrt(b(Expr::Rational(rat(-1, 1))));
        assert_eq!(bigfloat_eval(&e, 20), Err(Error::NegativeRoot));
        let e = Expr::Div(b(Expr::Rational(rat(1, 1))), b(Expr::Rational(rat(0, 1))));
        assert_eq!(bigfloat_eval(&e, 20), Err(Error::DivisionByZero));
    }

    #[test]
    fn scientific_rendering() {
        let v = BigFloat::from_rational(&rat(-55, 1_000_000), 200);
        assert_eq!(v.to_scientific(2), "-5.5e-5");
        let w = BigFloat::from_rational(&rat(1759, 10_000), 200);
        assert_eq!(w.to_scientific(2), "1.8e-1");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = (1i64..200, 1i64..50).prop_map(|(n, d)| Expr::Rational(rat(n, d)));
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Add(b(a), b(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Sub(b(a), b(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Expr::Mul(b(a), b(c))),
                inner.clone().prop_map(|a| Expr::Sqrt(b(Expr::Mul(b(a.clone()), b(a))))),
                inner.prop_map(|a| Expr::Pow(b(Expr::Mul(b(a.clone()), b(a))), rat(3, 7))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn error_bound_holds_against_double_precision(e in arb_expr()) {
            let coarse = e.eval_at_bits(bits_for_digits(30)).unwrap();
            let fine = e.eval_at_bits(bits_for_digits(60)).unwrap();
            // The finer midpoint must lie inside the coarse ball.
            prop_assert!(coarse.contains(&fine.mid_rational())
                || !BigFloat::hull(&coarse, &fine).certainly_lt(&coarse));
            let diff = coarse.sub(&fine);
            prop_assert!(diff.contains_zero());
        }

        #[test]
        fn rational_sum_round_trips(a in -10_000i64..10_000, b_ in 1i64..1000, c in -10_000i64..10_000, d in 1i64..1000) {
            let x = rat(a, b_);
            let y = rat(c, d);
            prop_assert_eq!((&x + &y) - &y, x);
        }
    }
}

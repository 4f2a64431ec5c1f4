//! Elements `r + s·√d` of a real quadratic field with rational `r`, `s`.
//!
//! `d = 1` stands for plain rationals. Values with `s = 0` embed into every
//! field, so operations only reject combining two irrational parts with
//! different radicands.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, int, to_f64, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadElem {
    pub r: Rational,
    pub s: Rational,
    pub d: u32,
}

impl QuadElem {
    pub fn new(r: Rational, s: Rational, d: u32) -> Self {
        assert!(d >= 1, "radicand must be positive");
        if d == 1 {
            return QuadElem { r: r + s, s: Rational::zero(), d: 1 };
        }
        QuadElem { r, s, d }
    }

    pub fn rational(r: Rational) -> Self {
        QuadElem { r, s: Rational::zero(), d: 1 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(int(n))
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    /// `√d` itself.
    pub fn sqrt_of(d: u32) -> Self {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    /// Radicand of the field this element needs (1 when rational).
    pub fn field(&self) -> u32 {
        if self.s.is_zero() {
            1
        } else {
            self.d
        }
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.r.clone())
    }

    pub fn conj(&self) -> Self {
        QuadElem { r: self.r.clone(), s: -self.s.clone(), d: self.d }
    }

    /// Field norm `r² − d·s²`.
    pub fn norm(&self) -> Rational {
        &self.r * &self.r - Rational::from_integer(BigInt::from(self.d)) * &self.s * &self.s
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conj();
        Ok(QuadElem { r: c.r / &n, s: c.s / &n, d: self.d })
    }

    pub fn signum(&self) -> i32 {
        let sr = sign(&self.r);
        let ss = sign(&self.s);
        if ss == 0 {
            return sr;
        }
        if sr == 0 || sr == ss {
            return ss;
        }
        // Opposite signs: compare r² with d·s².
        let lhs = &self.r * &self.r;
        let rhs = Rational::from_integer(BigInt::from(self.d)) * &self.s * &self.s;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sr,
            Ordering::Less => ss,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.r) + to_f64(&self.s) * (self.d as f64).sqrt()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = QuadElem::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn common_field(&self, other: &Self) -> u32 {
        match (self.s.is_zero(), other.s.is_zero()) {
            (true, true) => self.d.max(other.d),
            (true, false) => other.d,
            (false, true) => self.d,
            (false, false) => {
                assert!(
                    self.d == other.d,
                    "{}",
                    Error::MixedField(self.d, other.d)
                );
                self.d
            }
        }
    }

    /// Fallible field combination check used by matrix constructors.
    pub fn check_fields<'a>(items: impl IntoIterator<Item = &'a QuadElem>) -> Result<u32> {
        let mut field = 1;
        for q in items {
            let f = q.field();
            if f != 1 {
                if field != 1 && field != f {
                    return Err(Error::MixedField(field, f));
                }
                field = f;
            }
        }
        Ok(field)
    }
}

fn sign(q: &Rational) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

impl PartialEq for QuadElem {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.s == other.s && (self.s.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadElem {}

impl PartialOrd for QuadElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl<'a> Add<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn add(self, o: &QuadElem) -> QuadElem {
        let d = self.common_field(o);
        QuadElem { r: &self.r + &o.r, s: &self.s + &o.s, d }
    }
}

impl<'a> Sub<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn sub(self, o: &QuadElem) -> QuadElem {
        let d = self.common_field(o);
        QuadElem { r: &self.r - &o.r, s: &self.s - &o.s, d }
    }
}

impl<'a> Mul<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn mul(self, o: &QuadElem) -> QuadElem {
        let d = self.common_field(o);
        if self.s.is_zero() {
            return QuadElem { r: &self.r * &o.r, s: &self.r * &o.s, d };
        }
        if o.s.is_zero() {
            return QuadElem { r: &self.r * &o.r, s: &self.s * &o.r, d };
        }
        let dd = Rational::from_integer(BigInt::from(d));
        QuadElem {
            r: &self.r * &o.r + dd * &self.s * &o.s,
            s: &self.r * &o.s + &self.s * &o.r,
            d,
        }
    }
}

impl<'a> Div<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn div(self, o: &QuadElem) -> QuadElem {
        let inv = o.inv().expect("division by zero in quadratic field");
        self * &inv
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadElem {
            type Output = QuadElem;
            fn $m(self, o: QuadElem) -> QuadElem {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $m(self, o: &QuadElem) -> QuadElem {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem { r: -self.r, s: -self.s, d: self.d }
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -self.clone()
    }
}

impl From<Rational> for QuadElem {
    fn from(r: Rational) -> Self {
        QuadElem::rational(r)
    }
}

/// Canonical literal: `p/q`, `r/s*sqrt(d)`, or `p/q + r/s*sqrt(d)`.
impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s.is_zero() {
            return write!(f, "{}", format_rational(&self.r));
        }
        let rad = format!("sqrt({})", self.d);
        let s_part = if self.s.is_one() {
            rad.clone()
        } else if (-self.s.clone()).is_one() {
            format!("-{rad}")
        } else {
            format!("{}*{rad}", format_rational(&self.s))
        };
        if self.r.is_zero() {
            write!(f, "{s_part}")
        } else if self.s.is_negative() {
            let pos = QuadElem { r: Rational::zero(), s: -self.s.clone(), d: self.d };
            write!(f, "{} - {}", format_rational(&self.r), pos)
        } else {
            write!(f, "{} + {}", format_rational(&self.r), s_part)
        }
    }
}

/// Splits a positive integer into `k²·m` with `m` square-free (trial division).
pub fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut k = BigInt::one();
    let mut m = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            k *= num_traits::pow(p.clone(), (e / 2) as usize);
            if e % 2 == 1 {
                m *= &p;
            }
        }
        p += 1;
        if p > BigInt::from(1_000_000u32) {
            break;
        }
    }
    (k, m * rest)
}

/// Exact square root of a nonnegative rational inside some `Q(√m)`.
pub fn sqrt_rational(q: &Rational) -> Result<QuadElem> {
    if q.is_negative() {
        return Err(Error::NegativeRoot);
    }
    if q.is_zero() {
        return Ok(QuadElem::zero());
    }
    // √(p/q) = √(p·q)/q
    let pq = q.numer() * q.denom();
    let (k, m) = square_free_split(&pq);
    let coeff = Rational::new(k, q.denom().clone());
    if m.is_one() {
        return Ok(QuadElem::rational(coeff));
    }
    let d: u32 = m
        .try_into()
        .map_err(|_| Error::Usage("radicand too large for a quadratic field".into()))?;
    Ok(QuadElem::new(Rational::zero(), coeff, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use proptest::prelude::*;

    fn q(r: (i64, i64), s: (i64, i64), d: u32) -> QuadElem {
        QuadElem::new(rat(r.0, r.1), rat(s.0, s.1), d)
    }

    #[test]
    fn sqrt3_squared_is_three() {
        let s = QuadElem::sqrt_of(3);
        assert_eq!(&s * &s, QuadElem::from_int(3));
    }

    #[test]
    fn sign_of_mixed_terms() {
        // 2 - sqrt(3) > 0, 1 - sqrt(3) < 0
        assert_eq!(q((2, 1), (-1, 1), 3).signum(), 1);
        assert_eq!(q((1, 1), (-1, 1), 3).signum(), -1);
        assert!(q((7, 4), (0, 1), 3) > QuadElem::sqrt_of(3));
    }

    #[test]
    fn display_parses_back() {
        assert_eq!(q((1, 2), (-1, 2), 3).to_string(), "1/2 - 1/2*sqrt(3)");
        assert_eq!(q((0, 1), (1, 1), 2).to_string(), "sqrt(2)");
        assert_eq!(q((3, 1), (0, 1), 2).to_string(), "3");
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(sqrt_rational(&rat(9, 4)).unwrap(), QuadElem::rational(rat(3, 2)));
        assert_eq!(sqrt_rational(&rat(3, 4)).unwrap(), q((0, 1), (1, 2), 3));
        assert_eq!(sqrt_rational(&rat(-1, 1)), Err(Error::NegativeRoot));
    }

    #[test]
    fn fields_are_checked() {
        let a = QuadElem::sqrt_of(2);
        let b = QuadElem::sqrt_of(3);
        assert_eq!(QuadElem::check_fields([&a, &b]), Err(Error::MixedField(2, 3)));
        assert_eq!(QuadElem::check_fields([&a, &QuadElem::from_int(5)]), Ok(2));
    }

    proptest! {
        #[test]
        fn conjugate_product_is_norm(r in -1000i64..1000, s in -1000i64..1000, rd in 1i64..50, sd in 1i64..50) {
            let x = QuadElem::new(rat(r, rd), rat(s, sd), 3);
            let p = &x * &x.conj();
            prop_assert!(p.is_rational());
            prop_assert_eq!(p.r, x.norm());
        }

        #[test]
        fn division_inverts_multiplication(a in -100i64..100, b in 1i64..100, c in -100i64..100, e in -100i64..100) {
            let x = QuadElem::new(rat(a, b), rat(c, 7), 2);
            let y = QuadElem::new(rat(e, 3), rat(1, b), 2);
            prop_assert_eq!(&(&x * &y) / &y, x);
        }
    }
}

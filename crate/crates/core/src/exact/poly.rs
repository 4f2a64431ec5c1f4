//! Sparse polynomials in one or two variables over big rationals.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::bigfloat::BigFloat;
use super::rational::{format_rational, int, to_f64, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl ExactPolynomial {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1, "polynomial needs at least one variable");
        ExactPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Rational::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Univariate polynomial from coefficients in increasing power order.
    pub fn from_univariate(coeffs: &[Rational]) -> Self {
        let mut p = Self::zero(1);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(vec![k as u32], c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn leading_coefficient(&self) -> Option<Rational> {
        if self.nvars != 1 {
            return None;
        }
        self.terms.iter().next_back().map(|(_, c)| c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut r = Self::zero(self.nvars);
        if k.is_zero() {
            return r;
        }
        for (e, c) in &self.terms {
            r.terms.insert(e.clone(), c * k);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Rational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplies by the monomial with the given exponents.
    pub fn shift(&self, exps: &[u32]) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let e2: Vec<u32> = e.iter().zip(exps).map(|(a, b)| a + b).collect();
            r.terms.insert(e2, c.clone());
        }
        r
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            r.add_term(e2, c * int(e[var] as i64));
        }
        r
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.nvars {
            return Err(Error::Usage(format!(
                "polynomial in {} variable(s) evaluated at a point with {} coordinate(s)",
                self.nvars, n
            )));
        }
        Ok(())
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        self.check_arity(point.len())?;
        if self.nvars == 1 {
            return Ok(horner(&self.to_dense(), &point[0]));
        }
        let powers: Vec<Vec<Rational>> = (0..self.nvars)
            .map(|i| power_table(&point[i], self.degree_in(i)))
            .collect();
        let mut sum = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                t *= &powers[i][k as usize];
            }
            sum += t;
        }
        Ok(sum)
    }

    pub fn eval_ball(&self, point: &[BigFloat]) -> Result<BigFloat> {
        self.check_arity(point.len())?;
        let bits = point.iter().map(|p| p.bits()).max().unwrap_or(64);
        let powers: Vec<Vec<BigFloat>> = (0..self.nvars)
            .map(|i| {
                let mut v = vec![BigFloat::from_int(1, bits)];
                for k in 0..self.degree_in(i) as usize {
                    let next = v[k].mul(&point[i]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut sum = BigFloat::zero(bits);
        for (e, c) in &self.terms {
            let mut t = BigFloat::from_rational(c, bits);
            for (i, &k) in e.iter().enumerate() {
                t = t.mul(&powers[i][k as usize]);
            }
            sum = sum.add(&t);
        }
        Ok(sum)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(to_f64(c), |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .sum()
    }

    /// Dense coefficient vector of a univariate polynomial, lowest power first.
    pub fn to_dense(&self) -> Vec<Rational> {
        assert_eq!(self.nvars, 1, "dense form needs a univariate polynomial");
        let d = self.degree() as usize;
        let mut v = vec![Rational::zero(); if self.is_zero() { 0 } else { d + 1 }];
        for (e, c) in &self.terms {
            v[e[0] as usize] = c.clone();
        }
        v
    }
}

fn power_table(x: &Rational, deg: u32) -> Vec<Rational> {
    let mut v = Vec::with_capacity(deg as usize + 1);
    v.push(Rational::one());
    for k in 0..deg as usize {
        let next = &v[k] * x;
        v.push(next);
    }
    v
}

pub(crate) fn horner(coeffs: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names: &[&str] = if self.nvars == 1 { &["x"] } else { &["x", "y", "z", "w"] };
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let ac = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = names.get(i).copied().unwrap_or("v");
                    if k == 1 {
                        name.to_string()
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(&ac))?;
            } else if ac.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&ac), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    fn x2_minus_2() -> ExactPolynomial {
        ExactPolynomial::from_univariate(&[int(-2), int(0), int(1)])
    }

    #[test]
    fn evaluates_exactly() {
        assert_eq!(x2_minus_2().eval(&[rat(3, 2)]).unwrap(), rat(1, 4));
        assert_eq!(ExactPolynomial::zero(1).eval(&[rat(7, 3)]).unwrap(), int(0));
        assert!(x2_minus_2().eval(&[int(1), int(2)]).is_err());
    }

    #[test]
    fn bivariate_algebra() {
        let x = ExactPolynomial::var(2, 0);
        let y = ExactPolynomial::var(2, 1);
        let p = x.add(&y).pow(3);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.coeff(&[2, 1]), int(3));
        assert_eq!(p.eval(&[int(1), int(2)]).unwrap(), int(27));
        let dx = p.derivative(0);
        assert_eq!(dx.eval(&[int(1), int(2)]).unwrap(), int(27));
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn ball_evaluation_contains_exact_value() {
        let p = ExactPolynomial::from_univariate(&[rat(1, 3), rat(-7, 5), int(0), rat(2, 9)]);
        let x = rat(11, 7);
        let exact = p.eval(&[x.clone()]).unwrap();
        let ball = p.eval_ball(&[BigFloat::from_rational(&x, 200)]).unwrap();
        assert!(ball.contains(&exact));
    }
}

//! Real root isolation by Sturm sequences and refinement by exact bisection.

use num_traits::{One, Signed, Zero};

use super::poly::{horner, ExactPolynomial};
use super::rational::{int, Rational};
use crate::error::{Error, Result};

/// An isolating interval. `lo == hi` means the root is exactly `lo`;
/// otherwise the single root lies strictly inside `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * int(k as i64)).collect()
}

/// Remainder and quotient of `a / b` (dense, lowest power first).
fn divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r: Vec<Rational> = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / &lead;
        for (i, bc) in b.iter().enumerate() {
            let t = &c * bc;
            r[k + i] -= t;
        }
        q[k] = c;
        r.pop();
        trim(&mut r);
    }
    (q, r)
}

fn monic(p: &[Rational]) -> Vec<Rational> {
    let lead = p.last().cloned().unwrap_or_else(Rational::one);
    p.iter().map(|c| c / &lead).collect()
}

fn gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// The square-free part `p / gcd(p, p')`, same real roots without multiplicity.
pub fn square_free(p: &[Rational]) -> Vec<Rational> {
    let mut p = p.to_vec();
    trim(&mut p);
    if p.len() <= 2 {
        return p;
    }
    let g = gcd(&p, &derivative(&p));
    if g.len() <= 1 {
        return p;
    }
    divrem(&p, &g).0
}

/// Sturm chain of a square-free polynomial.
pub fn sturm_sequence(p: &[Rational]) -> Vec<Vec<Rational>> {
    let mut seq = vec![p.to_vec(), derivative(p)];
    trim(&mut seq[1]);
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        // Positive rescaling keeps signs and tames coefficient growth.
        let lead = r.last().unwrap().abs();
        seq.push(r.iter().map(|c| -(c / &lead)).collect());
    }
    seq
}

fn sign_variations(seq: &[Vec<Rational>], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in seq {
        let v = horner(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

fn dense_univariate(p: &ExactPolynomial) -> Result<Vec<Rational>> {
    if p.nvars() != 1 {
        return Err(Error::Usage("root isolation needs a univariate polynomial".into()));
    }
    if p.is_zero() {
        return Err(Error::Usage("the zero polynomial has no isolated roots".into()));
    }
    Ok(p.to_dense())
}

/// Number of distinct real roots in the half-open interval `(lo, hi]`.
pub fn count_roots(p: &ExactPolynomial, lo: &Rational, hi: &Rational) -> Result<usize> {
    let sf = square_free(&dense_univariate(p)?);
    let seq = sturm_sequence(&sf);
    Ok(sign_variations(&seq, lo) - sign_variations(&seq, hi))
}

/// Isolates every distinct real root of `p` in the closed interval `[lo, hi]`.
pub fn isolate_real_roots(p: &ExactPolynomial, interval: (Rational, Rational)) -> Result<Vec<RootInterval>> {
    let (lo, hi) = interval;
    if lo > hi {
        return Err(Error::Usage("interval endpoints out of order".into()));
    }
    let sf = square_free(&dense_univariate(p)?);
    if sf.len() <= 1 {
        return Ok(vec![]);
    }
    let seq = sturm_sequence(&sf);
    let mut out = Vec::new();
    if horner(&sf, &lo).is_zero() {
        out.push(RootInterval { lo: lo.clone(), hi: lo.clone() });
    }
    if lo == hi {
        return Ok(out);
    }
    let mut stack = vec![(lo, hi)];
    let mut open = Vec::new();
    while let Some((a, b)) = stack.pop() {
        // Roots in (a, b]; strip a root sitting exactly at b.
        let total = sign_variations(&seq, &a) - sign_variations(&seq, &b);
        let at_b = horner(&sf, &b).is_zero();
        if at_b {
            out.push(RootInterval { lo: b.clone(), hi: b.clone() });
        }
        let inside = total - usize::from(at_b);
        match inside {
            0 => {}
            1 => open.push(RootInterval { lo: a, hi: b }),
            _ => {
                // A root at the midpoint is reported by the left half's endpoint check.
                let m = (&a + &b) / int(2);
                stack.push((m.clone(), b));
                stack.push((a, m));
            }
        }
    }
    out.extend(open);
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out.dedup();
    Ok(out)
}

/// Shrinks an isolating interval below `tol` by bisection with exact signs.
pub fn refine_interval(p: &ExactPolynomial, interval: &RootInterval, tol: &Rational) -> Result<RootInterval> {
    if !tol.is_positive() {
        return Err(Error::Usage("tolerance must be positive".into()));
    }
    if interval.is_exact() {
        return Ok(interval.clone());
    }
    let dense = dense_univariate(p)?;
    if dense.len() == 2 {
        let r = -(&dense[0] / &dense[1]);
        if r <= interval.lo || r >= interval.hi {
            return Err(Error::NoRoot("linear root outside the interval".into()));
        }
        return Ok(RootInterval { lo: r.clone(), hi: r });
    }
    let sf = square_free(&dense);
    let mut a = interval.lo.clone();
    let mut b = interval.hi.clone();
    let sa = horner(&sf, &a).signum();
    let sb = horner(&sf, &b).signum();
    if sa.is_zero() || sb.is_zero() || sa == sb {
        return Err(Error::NoRoot("no sign change across the interval".into()));
    }
    while &b - &a >= *tol {
        let m = (&a + &b) / int(2);
        let sm = horner(&sf, &m).signum();
        if sm.is_zero() {
            return Ok(RootInterval { lo: m.clone(), hi: m });
        }
        if sm == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(RootInterval { lo: a, hi: b })
}

/// Approximation within `tol` of the single root isolated by `interval`.
pub fn refine_root(p: &ExactPolynomial, interval: &RootInterval, tol: &Rational) -> Result<Rational> {
    Ok(refine_interval(p, interval, tol)?.midpoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, to_f64};

    fn poly(c: &[i64]) -> ExactPolynomial {
        ExactPolynomial::from_univariate(&c.iter().map(|&k| int(k)).collect::<Vec<_>>())
    }

    #[test]
    fn isolates_sqrt2() {
        let p = poly(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p, (int(0), int(2))).unwrap();
        assert_eq!(roots.len(), 1);
        let r = refine_root(&p, &roots[0], &rat(1, 1_000_000_000_000)).unwrap();
        assert!((to_f64(&r) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn double_root_is_handled() {
        let p = poly(&[1, -2, 1]);
        let roots = isolate_real_roots(&p, (int(0), int(2))).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].is_exact() || (roots[0].lo < int(1) && int(1) < roots[0].hi));
        assert_eq!(refine_root(&p, &roots[0], &rat(1, 1000)).unwrap(), int(1));
    }

    #[test]
    fn linear_root_is_exact() {
        let p = poly(&[-1, 3]);
        let roots = isolate_real_roots(&p, (int(0), int(1))).unwrap();
        assert_eq!(refine_root(&p, &roots[0], &rat(1, 10)).unwrap(), rat(1, 3));
    }

    #[test]
    fn roots_on_endpoints_and_clusters() {
        // (x)(x-1)(x-1/1000)(x-2)
        let p = poly(&[0, 1]).mul(&poly(&[-1, 1])).mul(&ExactPolynomial::from_univariate(&[rat(-1, 1000), int(1)])).mul(&poly(&[-2, 1]));
        let roots = isolate_real_roots(&p, (int(0), int(2))).unwrap();
        assert_eq!(roots.len(), 4);
        assert!(roots[0].is_exact() && roots[0].lo == int(0));
        assert_eq!(count_roots(&p, &int(0), &int(2)).unwrap(), 3);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(isolate_real_roots(&ExactPolynomial::zero(1), (int(0), int(1))).is_err());
    }

    #[test]
    fn missing_sign_change_is_reported() {
        let p = poly(&[-2, 0, 1]);
        let bad = RootInterval { lo: int(2), hi: int(3) };
        assert!(matches!(refine_root(&p, &bad, &rat(1, 100)), Err(Error::NoRoot(_))));
    }
}

//! The one-parameter 14-dimensional family.
//!
//! With `v = a²`, `V = 9√3a⁴` and `∫‖x‖² = √3·Q(v)/(K a⁴)`, the NSM is
//! `G = Q(v)/(14K) · (3³³v⁶⁰)^{-1/14}`. The stationarity polynomial
//! `f(v) = 3^{-9/14} a^{67/7} G′(a)` works out to `(2vQ′ − (60/7)Q)/(378K)`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{bits, Abg};
use crate::error::{Error, Result};
use crate::exact::rational::{from_bigint, int, prime_power_product};
use crate::exact::sturm::{count_roots, refine_interval};
use crate::exact::{isolate_real_roots, rat, BigFloat, ExactPolynomial, Rational, RootInterval};
use crate::lattice::catalog;

/// Denominator constant of the second-moment integral.
pub fn k14() -> BigInt {
    prime_power_product(&[(2, 24), (3, 13), (5, 6), (7, 4), (11, 2), (13, 1)])
}

/// Prefactor denominator of the printed stationarity polynomial.
pub fn f14_denominator() -> BigInt {
    prime_power_product(&[(2, 24), (3, 15), (5, 5), (7, 6), (11, 2), (13, 1)])
}

/// Open interval of `v = a²` in which the closed form holds: (5/3, 13/7).
pub fn phase14() -> (Rational, Rational) {
    (rat(5, 3), rat(13, 7))
}

/// `Q(v)`: the integral numerator as a polynomial in `v = a²`.
pub fn moment_numerator14() -> Result<ExactPolynomial> {
    let mut coeffs = vec![Rational::zero(); 16];
    for (k, c) in catalog::b14_numerator() {
        if k % 2 != 0 || k > 30 {
            return Err(Error::Usage(format!("unexpected power a^{k} in the integral numerator")));
        }
        coeffs[(k / 2) as usize] = from_bigint(c);
    }
    Ok(ExactPolynomial::from_univariate(&coeffs))
}

/// The stationarity polynomial with the printed coefficients.
pub fn f14_printed() -> ExactPolynomial {
    let den = from_bigint(f14_denominator());
    let mut coeffs = vec![Rational::zero(); 16];
    for (k, c) in catalog::f14_coefficients() {
        coeffs[k as usize] = from_bigint(c) / &den;
    }
    ExactPolynomial::from_univariate(&coeffs)
}

/// The stationarity polynomial derived from `Q` by differentiation.
pub fn f14_derived() -> Result<ExactPolynomial> {
    let q = moment_numerator14()?;
    let v = ExactPolynomial::var(1, 0);
    let two_v_dq = v.mul(&q.derivative(0)).scale(&int(2));
    let num = two_v_dq.sub(&q.scale(&rat(60, 7)));
    Ok(num.scale(&(Rational::from_integer(1.into()) / from_bigint(k14() * 378))))
}

/// The printed stationarity polynomial, after checking it against the derivation.
pub fn f14() -> Result<ExactPolynomial> {
    let printed = f14_printed();
    let derived = f14_derived()?;
    if printed != derived {
        return Err(Error::Certification("printed stationarity polynomial disagrees with the derivative of the NSM".into()));
    }
    Ok(printed)
}

/// NSM at `v = a²`, for a ball `v`.
pub fn g14_at_v(v: &BigFloat) -> Result<BigFloat> {
    let b = v.bits();
    let q = moment_numerator14()?.eval_ball(std::slice::from_ref(v))?;
    let scale = BigFloat::from_rational(&from_bigint(num_traits::pow(BigInt::from(3), 33)), b)
        .mul(&v.powi(60)?)
        .pow_rational(&rat(-1, 14))?;
    q.mul(&scale).div(&BigFloat::from_rational(&from_bigint(k14() * 14), b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nsm14 {
    pub value: BigFloat,
    /// False when `a` lies outside the interval where the expression is valid.
    pub in_phase: bool,
}

pub fn in_phase14(a: &Rational) -> bool {
    let v = a * a;
    let (lo, hi) = phase14();
    a.is_positive() && lo < v && v < hi
}

pub fn g14(a: &Rational, digits: u32) -> Result<Nsm14> {
    if !a.is_positive() {
        return Err(Error::Domain("a must be positive".into()));
    }
    let v = BigFloat::from_rational(&(a * a), bits(digits));
    Ok(Nsm14 { value: g14_at_v(&v)?, in_phase: in_phase14(a) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Opt14 {
    /// Isolating intervals of every positive root of `f`, in increasing order.
    pub positive_roots: Vec<RootInterval>,
    /// 1-based index of the selected root among the positive roots.
    pub root_index: usize,
    /// Refined bracket of `v₀ = a_opt²`, with `f` changing sign across it.
    pub v_bracket: RootInterval,
    pub a_opt: BigFloat,
    pub g_opt: BigFloat,
    /// `f` is negative below and positive above the bracket, so `G` has a minimum there.
    pub is_minimum: bool,
}

/// Bound on the absolute value of every root (Cauchy).
fn cauchy_bound(p: &ExactPolynomial) -> Rational {
    let d = p.to_dense();
    let lead = d.last().unwrap().abs();
    int(1) + d[..d.len() - 1].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero)
}

pub fn optimize_g14(tol: &Rational, digits: u32) -> Result<Opt14> {
    if !tol.is_positive() || *tol > rat(1, 1_000_000_000) {
        return Err(Error::Usage("tolerance must be positive and at most 1e-9".into()));
    }
    let f = f14()?;
    let bound = cauchy_bound(&f);
    let roots: Vec<RootInterval> = isolate_real_roots(&f, (Rational::zero(), bound))?
        .into_iter()
        .filter(|r| r.hi.is_positive())
        .map(|r| refine_interval(&f, &r, &rat(1, 1 << 40)))
        .collect::<Result<_>>()?;
    let (lo, hi) = phase14();
    let inside: Vec<usize> = (0..roots.len()).filter(|&i| roots[i].lo >= lo && roots[i].hi <= hi).collect();
    if inside.len() != 1 {
        return Err(Error::NoRoot(format!("expected one stationary point in the phase, found {}", inside.len())));
    }
    let idx = inside[0];
    if count_roots(&f, &Rational::zero(), &roots[idx].hi)? != idx + 1 {
        return Err(Error::Certification("root count below the minimizer disagrees".into()));
    }
    // Refine far below `tol` so the ball evaluation of G keeps its digits.
    let fine = Rational::new(1.into(), num_traits::pow(BigInt::from(10), digits as usize + 10));
    let width = if *tol < fine { tol.clone() } else { fine };
    let bracket = refine_interval(&f, &roots[idx], &width)?;
    let is_minimum = f.eval(&[bracket.lo.clone()])?.is_negative() && f.eval(&[bracket.hi.clone()])?.is_positive();
    let b = bits(digits);
    let v = BigFloat::from_interval(&bracket.lo, &bracket.hi, b);
    let a_opt = v.sqrt()?;
    let g_opt = g14_at_v(&v)?;
    Ok(Opt14 { positive_roots: roots, root_index: idx + 1, v_bracket: bracket, a_opt, g_opt, is_minimum })
}

/// Diagonal entries of the second moment matrix: α on the 10-dimensional
/// block, β on the 4-dimensional block.
pub fn alpha_beta_14(v: &BigFloat) -> Result<Abg> {
    let b = v.bits();
    let g = g14_at_v(v)?;
    let fv = f14()?.eval_ball(std::slice::from_ref(v))?;
    // V² = 243 v⁴ and V^{1/7} = (V²)^{1/14}.
    let v2 = v.powi(4)?.mul(&BigFloat::from_int(243, b));
    let v17 = v2.pow_rational(&rat(1, 14))?;
    let base = v17.mul(&g);
    let t = fv.mul_rational(&rat(5103, 1)).div(&v2)?;
    Ok(Abg {
        alpha: base.sub(&t.mul_rational(&rat(1, 10))),
        beta: base.add(&t.mul_rational(&rat(1, 4))),
        gamma: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_matches_derived() {
        let f = f14().unwrap();
        assert_eq!(f.degree(), 15);
        let lead = f.leading_coefficient().unwrap();
        assert_eq!(lead, from_bigint(BigInt::from(-1018103123715692435i64)) / from_bigint(f14_denominator()));
    }

    #[test]
    fn g14_below_previous_record_in_phase() {
        for a in [rat(13, 10), rat(25, 19), rat(34, 25)] {
            let g = g14(&a, 40).unwrap();
            assert!(g.in_phase);
            assert!(g.value.to_f64() < 0.06952);
        }
        assert!(!g14(&rat(3, 2), 30).unwrap().in_phase);
    }

    #[test]
    fn trace_identity() {
        let v = BigFloat::from_rational(&rat(625, 361), 200);
        let abg = alpha_beta_14(&v).unwrap();
        let lhs = abg.alpha.mul_rational(&rat(10, 1)).add(&abg.beta.mul_rational(&rat(4, 1)));
        let g = g14_at_v(&v).unwrap();
        let v17 = v.powi(4).unwrap().mul(&BigFloat::from_int(243, 200)).pow_rational(&rat(1, 14)).unwrap();
        let rhs = g.mul(&v17).mul_rational(&rat(14, 1));
        assert!(lhs.sub(&rhs).abs().to_f64() < 1e-50);
    }

    #[test]
    fn sign_of_alpha_minus_beta_follows_f() {
        let v = rat(169, 100);
        let f = f14().unwrap().eval(&[v.clone()]).unwrap();
        let abg = alpha_beta_14(&BigFloat::from_rational(&v, 200)).unwrap();
        assert_eq!(abg.alpha.certainly_lt(&abg.beta), f.is_positive());
    }
}

#[cfg(test)]
mod optimum_tests {
    use super::*;

    #[test]
    fn minimizer_is_second_positive_root() {
        let o = optimize_g14(&rat(1, 1_000_000_000_000), 40).unwrap();
        assert_eq!(o.root_index, 2);
        assert!(o.is_minimum);
        assert_eq!(o.a_opt.to_decimal(12), "1.314224989311");
        assert_eq!(o.g_opt.to_decimal(12), "0.069261778717");
        assert!(o.g_opt.decimal_is_certain(12));
        let abg = alpha_beta_14(&o.a_opt.mul(&o.a_opt)).unwrap();
        assert!(abg.alpha.sub(&abg.beta).abs().to_f64() < 1e-30);
    }
}

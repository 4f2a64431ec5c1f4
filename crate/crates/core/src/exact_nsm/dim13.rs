//! The two-parameter 13-dimensional family with `a₁ = 1`.
//!
//! With `v₂ = a₂²`, `v₃ = a₃²` and `W = V^{2+2/13} = (v₂⁵v₃)^{14/13}`:
//! `G_A = P_A(v)/(D_A W)` and `G_B = G_A − (8v₂ − 83v₃ + 76)¹⁴/(D_B W)`.
//! Writing `G_B = H/(D_A W)` with the polynomial `H`, the chain rule gives
//! `a₂^{153/13}a₃^{28/13} ∂G_B/∂a₂ = (2v₂H_{v₂} − (140/13)H)/D_A` and
//! `a₂^{140/13}a₃^{41/13} ∂G_B/∂a₃ = (2v₃H_{v₃} − (28/13)H)/D_A`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{bits, Abg};
use crate::error::{Error, Result};
use crate::exact::rational::{from_bigint, int, prime_power_product};
use crate::exact::{rat, BigFloat, ExactPolynomial, Rational};
use crate::lattice::catalog;

pub fn d_a() -> BigInt {
    prime_power_product(&[(2, 81), (3, 10), (5, 4), (7, 4), (11, 2), (13, 3)])
}

pub fn d_b() -> BigInt {
    prime_power_product(&[(2, 78), (3, 5), (5, 3), (7, 2), (11, 1), (13, 2)])
}

/// `Σ c_ij v₂ⁱ v₃ʲ` with the tabulated integer coefficients.
pub fn numerator_a13() -> ExactPolynomial {
    ExactPolynomial::from_terms(2, catalog::appendix_a().into_iter().map(|(i, j, c)| (vec![i, j], from_bigint(c))))
}

/// `8v₂ − 83v₃ + 76`; the two expressions agree to order 13 across its zero set.
pub fn correction_base() -> ExactPolynomial {
    ExactPolynomial::from_terms(2, [(vec![1, 0], int(8)), (vec![0, 1], int(-83)), (vec![0, 0], int(76))])
}

/// `H = P_A − (D_A/D_B)·base¹⁴`, the numerator of `G_B` over `D_A`.
pub fn numerator_b13() -> Result<ExactPolynomial> {
    let (q, r) = d_a().div_rem(&d_b());
    if !r.is_zero() {
        return Err(Error::Certification("D_B does not divide D_A".into()));
    }
    Ok(numerator_a13().sub(&correction_base().pow(14).scale(&from_bigint(q))))
}

/// `(v₂⁵v₃)^{14/13}`.
fn w_power(v2: &BigFloat, v3: &BigFloat) -> Result<BigFloat> {
    v2.powi(5)?.mul(v3).pow_rational(&rat(14, 13))
}

fn squares(a2: &BigFloat, a3: &BigFloat) -> Result<(BigFloat, BigFloat)> {
    if !(a2.certainly_positive() && a3.certainly_positive()) {
        return Err(Error::Domain("scales must be positive".into()));
    }
    Ok((a2.mul(a2), a3.mul(a3)))
}

pub fn ga13_at_v(v2: &BigFloat, v3: &BigFloat) -> Result<BigFloat> {
    let b = v2.bits().max(v3.bits());
    let p = numerator_a13().eval_ball(&[v2.clone(), v3.clone()])?;
    p.div(&w_power(v2, v3)?.mul(&BigFloat::from_rational(&from_bigint(d_a()), b)))
}

pub fn gb13_at_v(v2: &BigFloat, v3: &BigFloat) -> Result<BigFloat> {
    let b = v2.bits().max(v3.bits());
    let h = numerator_b13()?.eval_ball(&[v2.clone(), v3.clone()])?;
    h.div(&w_power(v2, v3)?.mul(&BigFloat::from_rational(&from_bigint(d_a()), b)))
}

/// `G_A − G_B`, evaluated directly from the correction term.
pub fn correction13_at_v(v2: &BigFloat, v3: &BigFloat) -> Result<BigFloat> {
    let b = v2.bits().max(v3.bits());
    let base = correction_base().eval_ball(&[v2.clone(), v3.clone()])?;
    base.powi(14)?.div(&w_power(v2, v3)?.mul(&BigFloat::from_rational(&from_bigint(d_b()), b)))
}

pub fn ga13(a2: &BigFloat, a3: &BigFloat) -> Result<BigFloat> {
    let (v2, v3) = squares(a2, a3)?;
    ga13_at_v(&v2, &v3)
}

pub fn gb13(a2: &BigFloat, a3: &BigFloat) -> Result<BigFloat> {
    let (v2, v3) = squares(a2, a3)?;
    gb13_at_v(&v2, &v3)
}

/// Prefactor exponents `(p₂, p₃)` applied to `∂G_B/∂a₂` and `∂G_B/∂a₃`.
pub const FB_PREFACTORS: [(i64, i64); 2] = [(153, 28), (140, 41)];

/// Residual powers of `a₂` and `a₃` left after multiplying each partial
/// derivative by its prefactor (all four are zero when the construction
/// yields polynomials).
pub fn fb_power_residuals() -> [(Rational, Rational); 2] {
    // ∂G/∂a_k carries a₂^{-140/13} a₃^{-28/13} from W and one factor a_k⁻¹.
    let w2 = rat(-140, 13);
    let w3 = rat(-28, 13);
    let [(p2, p3), (q2, q3)] = FB_PREFACTORS;
    [
        (rat(p2, 13) + &w2 - int(1), rat(p3, 13) + &w3),
        (rat(q2, 13) + &w2, rat(q3, 13) + &w3 - int(1)),
    ]
}

/// The polynomials `f^B₂, f^B₃` in `(v₂, v₃)`.
pub fn fb_polys() -> Result<(ExactPolynomial, ExactPolynomial)> {
    if fb_power_residuals().iter().any(|(x, y)| !x.is_zero() || !y.is_zero()) {
        return Err(Error::Certification("fractional powers do not cancel".into()));
    }
    let h = numerator_b13()?;
    let inv = Rational::new(1.into(), d_a());
    let v2 = ExactPolynomial::var(2, 0);
    let v3 = ExactPolynomial::var(2, 1);
    let f2 = v2.mul(&h.derivative(0)).scale(&int(2)).sub(&h.scale(&rat(140, 13))).scale(&inv);
    let f3 = v3.mul(&h.derivative(1)).scale(&int(2)).sub(&h.scale(&rat(28, 13))).scale(&inv);
    if f2.degree() != 14 || f3.degree() != 14 {
        return Err(Error::Certification(format!("expected degree 14, got {} and {}", f2.degree(), f3.degree())));
    }
    Ok((f2, f3))
}

/// Entries of the second moment matrix in phase B: α on the last five
/// coordinates, β and γ on the diagonal and off-diagonal of the first eight.
pub fn abg13(a2: &BigFloat, a3: &BigFloat) -> Result<Abg> {
    let (v2, v3) = squares(a2, a3)?;
    let (f2, f3) = fb_polys()?;
    let pt = [v2.clone(), v3.clone()];
    let f2v = f2.eval_ball(&pt)?;
    let f3v = f3.eval_ball(&pt)?;
    let vsq = v2.powi(5)?.mul(&v3);
    let base = vsq.pow_rational(&rat(1, 13))?.mul(&gb13_at_v(&v2, &v3)?);
    let t = f2v.div(&vsq)?;
    Ok(Abg {
        alpha: base.add(&t.mul_rational(&rat(13, 10))),
        beta: base.sub(&t.mul_rational(&rat(13, 16))),
        gamma: Some(f2v.add(&f3v.mul_rational(&int(8))).div(&vsq)?.mul_rational(&rat(13, 112))),
    })
}

/// Exact α, β, γ of `B13(1, 1, 1)`.
pub fn abg13_at_unit() -> (Rational, Rational, Rational) {
    let p = |e: [u32; 6]| {
        from_bigint(prime_power_product(&[(2, e[0]), (3, e[1]), (5, e[2]), (7, e[3]), (11, e[4]), (13, e[5])]))
    };
    let big = |s: &str| from_bigint(s.parse::<BigInt>().unwrap());
    (
        big("304547502154926541417266582464260350511") / p([81, 10, 4, 4, 2, 2]),
        big("9787631469390979346380560690239381767") / p([83, 10, 1, 4, 2, 2]),
        -big("972574414727556817448919098411598577") / p([83, 10, 4, 4, 2, 2]),
    )
}

/// Exact NSM of `B13(1, 1, 1)`.
pub fn g13_unit() -> Rational {
    let den = prime_power_product(&[(2, 81), (3, 9), (5, 3), (7, 4), (11, 2), (13, 3)]);
    from_bigint("264643025208158502912098205658743146287".parse::<BigInt>().unwrap()) / from_bigint(den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Opt13 {
    /// Newton point in `(v₂, v₃)`.
    pub v: [Rational; 2],
    /// Half-width of the certified box around `v`.
    pub radius: Rational,
    /// Krawczyk contraction holds: the box contains exactly one common root.
    pub certified: bool,
    pub a2: BigFloat,
    pub a3: BigFloat,
    /// `G_B` enclosed over the certified box.
    pub g: BigFloat,
    pub newton_steps: usize,
    /// Finite-difference Hessian of `G_B` in `(a₂, a₃)`.
    pub hessian: [[f64; 2]; 2],
    pub positive_definite: bool,
}

struct System {
    f: [ExactPolynomial; 2],
    j: [[ExactPolynomial; 2]; 2],
}

impl System {
    fn new() -> Result<System> {
        let (f2, f3) = fb_polys()?;
        let j = [[f2.derivative(0), f2.derivative(1)], [f3.derivative(0), f3.derivative(1)]];
        Ok(System { f: [f2, f3], j })
    }

    fn eval(&self, x: &[BigFloat; 2]) -> Result<([BigFloat; 2], [[BigFloat; 2]; 2])> {
        let f = [self.f[0].eval_ball(x)?, self.f[1].eval_ball(x)?];
        let j = [
            [self.j[0][0].eval_ball(x)?, self.j[0][1].eval_ball(x)?],
            [self.j[1][0].eval_ball(x)?, self.j[1][1].eval_ball(x)?],
        ];
        Ok((f, j))
    }
}

/// Midpoint inverse of a 2×2 ball matrix, as exact rationals.
fn inverse_mid(j: &[[BigFloat; 2]; 2]) -> Result<[[Rational; 2]; 2]> {
    let m = |x: &BigFloat| x.mid_rational();
    let (a, b, c, d) = (m(&j[0][0]), m(&j[0][1]), m(&j[1][0]), m(&j[1][1]));
    let det = &a * &d - &b * &c;
    if det.is_zero() {
        return Err(Error::Certification("singular Jacobian".into()));
    }
    Ok([[&d / &det, -&b / &det], [-&c / &det, &a / &det]])
}

fn newton(sys: &System, start: [Rational; 2], digits: u32, bitsz: u32) -> Result<([Rational; 2], usize)> {
    let stop = Rational::new(1.into(), num_traits::pow(BigInt::from(10), digits as usize + 5));
    let mut x = start;
    let resid = |f: &[BigFloat; 2]| f[0].to_f64().abs() + f[1].to_f64().abs();
    for step in 1..=200 {
        let pt = [BigFloat::from_rational(&x[0], bitsz), BigFloat::from_rational(&x[1], bitsz)];
        let (f, j) = sys.eval(&pt)?;
        let y = inverse_mid(&j)?;
        let fm = [f[0].mid_rational(), f[1].mid_rational()];
        let dx = [&y[0][0] * &fm[0] + &y[0][1] * &fm[1], &y[1][0] * &fm[0] + &y[1][1] * &fm[1]];
        let r0 = resid(&f);
        let mut t = int(1);
        let mut next;
        loop {
            next = [
                BigFloat::from_rational(&(&x[0] - &t * &dx[0]), bitsz).mid_rational(),
                BigFloat::from_rational(&(&x[1] - &t * &dx[1]), bitsz).mid_rational(),
            ];
            let pn = [BigFloat::from_rational(&next[0], bitsz), BigFloat::from_rational(&next[1], bitsz)];
            let fn_ = [sys.f[0].eval_ball(&pn)?, sys.f[1].eval_ball(&pn)?];
            if resid(&fn_) <= r0 || t < rat(1, 1 << 20) || r0 == 0.0 {
                break;
            }
            t /= int(2);
        }
        let size = std::cmp::max((&next[0] - &x[0]).abs(), (&next[1] - &x[1]).abs());
        x = next;
        if size < stop {
            return Ok((x, step));
        }
    }
    Err(Error::NoRoot("Newton iteration did not converge".into()))
}

/// Krawczyk test on the box `m ± r`.
fn krawczyk(sys: &System, m: &[Rational; 2], r: &Rational, bitsz: u32) -> Result<bool> {
    let pt = [BigFloat::from_rational(&m[0], bitsz), BigFloat::from_rational(&m[1], bitsz)];
    let bx = [
        BigFloat::from_interval(&(&m[0] - r), &(&m[0] + r), bitsz),
        BigFloat::from_interval(&(&m[1] - r), &(&m[1] + r), bitsz),
    ];
    let (fm, jm) = sys.eval(&pt)?;
    let y = inverse_mid(&jm)?;
    let (_, jx) = sys.eval(&bx)?;
    let d = BigFloat::from_interval(&-r, r, bitsz);
    for i in 0..2 {
        // K_i − m_i = −(Y f(m))_i + Σ_k (δ_ik − (Y J(X))_ik)·[−r, r]
        let mut k = fm[0].mul_rational(&y[i][0]).add(&fm[1].mul_rational(&y[i][1])).neg();
        for col in 0..2 {
            let yj = jx[0][col].mul_rational(&y[i][0]).add(&jx[1][col].mul_rational(&y[i][1]));
            let e = if i == col { BigFloat::from_int(1, bitsz).sub(&yj) } else { yj.neg() };
            k = k.add(&e.mul(&d));
        }
        let lim = BigFloat::from_rational(r, bitsz);
        if !k.abs().certainly_lt(&lim) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn hessian(v: &[Rational; 2], bitsz: u32) -> Result<[[f64; 2]; 2]> {
    let a = |x: &Rational| BigFloat::from_rational(x, bitsz).sqrt();
    let a2 = a(&v[0])?.mid_rational();
    let a3 = a(&v[1])?.mid_rational();
    let h = rat(1, 100_000);
    let g = |x: &Rational, y: &Rational| -> Result<BigFloat> {
        gb13(&BigFloat::from_rational(x, bitsz), &BigFloat::from_rational(y, bitsz))
    };
    let g0 = g(&a2, &a3)?;
    let h2 = BigFloat::from_rational(&(&h * &h), bitsz);
    let second = |p: BigFloat, m: BigFloat| -> Result<f64> { Ok(p.add(&m).sub(&g0.mul_rational(&int(2))).div(&h2)?.to_f64()) };
    let g22 = second(g(&(&a2 + &h), &a3)?, g(&(&a2 - &h), &a3)?)?;
    let g33 = second(g(&a2, &(&a3 + &h))?, g(&a2, &(&a3 - &h))?)?;
    let pp = g(&(&a2 + &h), &(&a3 + &h))?;
    let pm = g(&(&a2 + &h), &(&a3 - &h))?;
    let mp = g(&(&a2 - &h), &(&a3 + &h))?;
    let mm = g(&(&a2 - &h), &(&a3 - &h))?;
    let g23 = pp.sub(&pm).sub(&mp).add(&mm).div(&h2.mul_rational(&int(4)))?.to_f64();
    Ok([[g22, g23], [g23, g33]])
}

/// Certified minimizer of `G_B`, starting Newton at `start` in `(v₂, v₃)`.
pub fn optimize_g13_from(start: [Rational; 2], tol: &Rational, digits: u32) -> Result<Opt13> {
    if !tol.is_positive() || *tol > rat(1, 1_000_000_000) {
        return Err(Error::Usage("tolerance must be positive and at most 1e-9".into()));
    }
    let b = bits(digits);
    let sys = System::new()?;
    let (v, steps) = newton(&sys, start, digits, b)?;
    let half = Rational::new(1.into(), num_traits::pow(BigInt::from(10), (digits / 2) as usize));
    let r = std::cmp::min(half, tol / int(2));
    let certified = krawczyk(&sys, &v, &r, b)?;
    if !certified {
        return Err(Error::Certification("Krawczyk operator does not contract".into()));
    }
    let bx = [
        BigFloat::from_interval(&(&v[0] - &r), &(&v[0] + &r), b),
        BigFloat::from_interval(&(&v[1] - &r), &(&v[1] + &r), b),
    ];
    let g = gb13_at_v(&bx[0], &bx[1])?;
    let hessian = hessian(&v, b)?;
    let positive_definite = hessian[0][0] > 0.0 && hessian[0][0] * hessian[1][1] - hessian[0][1] * hessian[1][0] > 0.0;
    Ok(Opt13 {
        a2: bx[0].sqrt()?,
        a3: bx[1].sqrt()?,
        v,
        radius: r,
        certified,
        g,
        newton_steps: steps,
        hessian,
        positive_definite,
    })
}

/// Certified minimizer of `G_B`, with Newton started at `(1, 1)`.
pub fn optimize_g13(tol: &Rational, digits: u32) -> Result<Opt13> {
    optimize_g13_from([int(1), int(1)], tol, digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(x: &Rational) -> BigFloat {
        BigFloat::from_rational(x, 240)
    }

    #[test]
    fn unit_values_render() {
        let (a, b, g) = abg13_at_unit();
        let five = |q: &Rational| BigFloat::from_rational(q, 128).to_decimal(6);
        assert_eq!(five(&a), "0.069513");
        assert_eq!(five(&b), "0.069814");
        assert_eq!(five(&g), "-0.000055");
        assert_eq!(BigFloat::from_rational(&g13_unit(), 128).to_decimal(12), "0.069698255940");
        assert_eq!((a * int(5) + b * int(8)) / int(13), g13_unit());
    }

    #[test]
    fn correction_vanishes_on_interface() {
        // 8v₂ − 83v₃ + 76 = 0 at v₃ = 1 − 1/83·(8 − 8v₂)... pick v₂ = 9/8, v₃ = 85/83.
        let v2 = rat(9, 8);
        let v3 = rat(85, 83);
        assert!(correction_base().eval(&[v2.clone(), v3.clone()]).unwrap().is_zero());
        let ga = ga13_at_v(&ball(&v2), &ball(&v3)).unwrap();
        let gb = gb13_at_v(&ball(&v2), &ball(&v3)).unwrap();
        assert!(ga.sub(&gb).abs().to_f64() < 1e-60);
    }

    #[test]
    fn fb_degrees_and_trace_identity() {
        let (f2, f3) = fb_polys().unwrap();
        assert_eq!((f2.degree(), f3.degree()), (14, 14));
        let (a2, a3) = (ball(&rat(1004, 1000)), ball(&rat(1008, 1000)));
        let abg = abg13(&a2, &a3).unwrap();
        let lhs = abg.alpha.mul_rational(&int(5)).add(&abg.beta.mul_rational(&int(8)));
        let (v2, v3) = (a2.mul(&a2), a3.mul(&a3));
        let v213 = v2.powi(5).unwrap().mul(&v3).pow_rational(&rat(1, 13)).unwrap();
        let rhs = gb13(&a2, &a3).unwrap().mul(&v213).mul_rational(&int(13));
        assert!(lhs.sub(&rhs).abs().to_f64() < 1e-50);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (f2, f3) = fb_polys().unwrap();
        let (a2, a3) = (rat(1004, 1000), rat(1008, 1000));
        let h = rat(1, 10_000_000);
        let g = |x: &Rational, y: &Rational| gb13(&ball(x), &ball(y)).unwrap();
        let d2 = g(&(&a2 + &h), &a3).sub(&g(&(&a2 - &h), &a3)).to_f64() / (2e-7);
        let d3 = g(&a2, &(&a3 + &h)).sub(&g(&a2, &(&a3 - &h))).to_f64() / (2e-7);
        let (x, y) = (crate::exact::rational::to_f64(&a2), crate::exact::rational::to_f64(&a3));
        let v = [x * x, y * y];
        let p2 = f2.eval_f64(&v) / (x.powf(153.0 / 13.0) * y.powf(28.0 / 13.0));
        let p3 = f3.eval_f64(&v) / (x.powf(140.0 / 13.0) * y.powf(41.0 / 13.0));
        assert!((d2 - p2).abs() < 1e-6 * p2.abs(), "{d2} {p2}");
        assert!((d3 - p3).abs() < 1e-6 * p3.abs(), "{d3} {p3}");
    }
}

#[cfg(test)]
mod optimum_tests {
    use super::*;

    #[test]
    fn certified_minimizer() {
        let t = std::time::Instant::now();
        let o = optimize_g13(&rat(1, 1_000_000_000_000), 60).unwrap();
        eprintln!("{:?} steps {}", t.elapsed(), o.newton_steps);
        assert!(o.certified && o.positive_definite);
        assert_eq!(o.a2.to_decimal(12), "1.004336185575");
        assert_eq!(o.a3.to_decimal(12), "1.014983466336");
        assert_eq!(o.g.to_decimal(12), "0.069697638992");
        let again = optimize_g13_from(o.v.clone(), &rat(1, 1_000_000_000_000), 60).unwrap();
        for k in 0..2 {
            assert!(crate::exact::rational::to_f64(&(&again.v[k] - &o.v[k])).abs() < 1e-60);
        }
        let abg = abg13(&o.a2, &o.a3).unwrap();
        assert!(abg.alpha.sub(&abg.beta).abs().to_f64() < 1e-20);
        assert!(abg.gamma.unwrap().abs().to_f64() < 1e-20);
        assert!(o.g.certainly_lt(&BigFloat::from_rational(&g13_unit(), 200)));
    }
}

//! Closed-form NSM and second-moment expressions for the 13- and
//! 14-dimensional families, their stationarity polynomials and certified
//! minimizers, and the one-step perturbation formulas.

pub mod dim13;
pub mod dim14;

use num_traits::Zero;
use serde::Serialize;

pub use dim13::{
    abg13, abg13_at_unit, fb_polys, g13_unit, ga13, gb13, optimize_g13, Opt13,
};
pub use dim14::{alpha_beta_14, f14, g14, g14_at_v, optimize_g14, Nsm14, Opt14};

use crate::error::{Error, Result};
use crate::exact::{bigfloat::bits_for_digits, rat, BigFloat, Rational};

/// Working precision used when none is requested.
pub const DEFAULT_DIGITS: u32 = 60;

pub(crate) fn bits(digits: u32) -> u32 {
    bits_for_digits(digits)
}

/// Diagonal and off-diagonal entries of a block-scalar second moment matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Abg {
    pub alpha: BigFloat,
    pub beta: BigFloat,
    /// Off-diagonal entry of the 8×8 block; absent in dimension 14.
    pub gamma: Option<BigFloat>,
}

/// The two closed-form step sizes for the 13-dimensional block pattern.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSteps {
    /// Step that zeroes the off-diagonal entry to first order.
    pub eps1: f64,
    /// Step that equalizes the diagonal entries to first order.
    pub eps2: f64,
}

/// `ε₁ = 13/(2(−5α + 18β + 78γ))`, exactly.
pub fn epsilon1(a: &Rational, b: &Rational, g: &Rational) -> Result<Rational> {
    let den = (a * rat(-5, 1) + b * rat(18, 1) + g * rat(78, 1)) * rat(2, 1);
    if den.is_zero() {
        return Err(Error::Degenerate("no finite step needed".into()));
    }
    Ok(rat(13, 1) / den)
}

/// `ε₂ = 13(β − α)/(2(−8α² + 3αβ + 5β² + 91γ²))`, exactly.
pub fn epsilon2(a: &Rational, b: &Rational, g: &Rational) -> Result<Rational> {
    let num = (b - a) * rat(13, 1);
    let den = (a * a * rat(-8, 1) + a * b * rat(3, 1) + b * b * rat(5, 1) + g * g * rat(91, 1)) * rat(2, 1);
    if den.is_zero() || num.is_zero() {
        return Err(Error::Degenerate("no finite step needed".into()));
    }
    Ok(num / den)
}

pub fn epsilon_steps(a: &Rational, b: &Rational, g: &Rational) -> Result<EpsilonSteps> {
    use crate::exact::rational::to_f64;
    Ok(EpsilonSteps { eps1: to_f64(&epsilon1(a, b, g)?), eps2: to_f64(&epsilon2(a, b, g)?) })
}

/// First-order updates `(α′, β′, γ′)` after one linear step of size ε.
pub fn perturbed_abg(a: f64, b: f64, g: f64, eps: f64) -> (f64, f64, f64) {
    (
        a + 16.0 * a * (b - a) / 13.0 * eps,
        b - 2.0 * (5.0 * b * b + 91.0 * g * g - 5.0 * a * b) / 13.0 * eps,
        g + 2.0 * g * (5.0 * a - 18.0 * b - 78.0 * g) / 13.0 * eps,
    )
}

/// Scales `(a₁, a₂, a₃)` of the 13-dimensional family reached from
/// `B13(1, 1, 1)` by one linear step of size ε.
pub fn scales_after_step(a: f64, b: f64, g: f64, eps: f64) -> [f64; 3] {
    [
        1.0 - (5.0 * b - 5.0 * a - 13.0 * g) / 13.0 * eps,
        1.0 + (8.0 * b - 8.0 * a) / 13.0 * eps,
        1.0 - (5.0 * b - 5.0 * a + 91.0 * g) / 13.0 * eps,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::to_f64;

    #[test]
    fn steps_from_unit_values() {
        let (a, b, g) = abg13_at_unit();
        let e = epsilon_steps(&a, &b, &g).unwrap();
        assert!((e.eps1 - 7.1843).abs() < 5e-5, "{}", e.eps1);
        assert!((e.eps2 - 7.1735).abs() < 5e-5, "{}", e.eps2);
        let (_, _, g1) = perturbed_abg(to_f64(&a), to_f64(&b), to_f64(&g), e.eps1);
        assert!(g1.abs() < 1e-18);
        let (a2, b2, _) = perturbed_abg(to_f64(&a), to_f64(&b), to_f64(&g), e.eps2);
        assert!((a2 - b2).abs() < 1e-17);
    }

    #[test]
    fn isotropic_input_needs_no_step() {
        let a = rat(1, 12);
        assert!(matches!(epsilon2(&a, &a, &rat(0, 1)), Err(Error::Degenerate(_))));
    }
}

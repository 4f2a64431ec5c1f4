//! Congruence certificates between Gram matrices and cheap invariants that
//! separate inequivalent lattices.
//!
//! Two Gram matrices `A`, `A′` describe equivalent lattices when
//! `A′ = c·U·A·Uᵀ` for an integer `U` with `det U = ±1` and a scalar `c > 0`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::enumeration::{shortest_vectors, theta_image, ThetaStep};
use crate::error::{Error, Result};
use crate::exact::{QuadElem, Rational};
use crate::lattice::matrix::{self, IMat, QMat};
use crate::lattice::{catalog, Gram, Lattice};

#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceCertificate {
    pub a: QMat,
    pub a_prime: QMat,
    pub u: IMat,
    pub c: Rational,
}

impl CongruenceCertificate {
    pub fn new(a: QMat, a_prime: QMat, u: IMat, c: Rational) -> Self {
        CongruenceCertificate { a, a_prime, u, c }
    }

    /// The certificate `(A′, A, U⁻¹, 1/c)`; fails unless `U` is unimodular.
    pub fn inverse(&self) -> Result<Self> {
        if self.c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(CongruenceCertificate {
            a: self.a_prime.clone(),
            a_prime: self.a.clone(),
            u: unimodular_inverse(&self.u)?,
            c: self.c.recip(),
        })
    }
}

pub fn unimodular_det(u: &IMat) -> i64 {
    let d = matrix::int_det(&matrix::imat_to_big(u));
    if d.is_one() {
        1
    } else if (-d.clone()).is_one() {
        -1
    } else {
        0
    }
}

/// Integer inverse of a matrix with determinant ±1.
pub fn unimodular_inverse(u: &IMat) -> Result<IMat> {
    if unimodular_det(u) == 0 {
        return Err(Error::Usage("matrix is not unimodular".into()));
    }
    let inv = matrix::inverse(&matrix::from_ints(u))?;
    matrix::to_integers(&inv)
        .and_then(|m| matrix::big_to_i64(&m))
        .ok_or_else(|| Error::Resource("inverse entries exceed 64 bits".into()))
}

fn check_dims(cert: &CongruenceCertificate) -> Result<usize> {
    let n = cert.a.len();
    fn square<T>(m: &[Vec<T>], n: usize) -> bool {
        m.len() == n && m.iter().all(|r| r.len() == n)
    }
    if n == 0 || !square(&cert.a, n) || !square(&cert.a_prime, n) || !square(&cert.u, n) {
        return Err(Error::Usage(format!("certificate matrices must all be {n}×{n}")));
    }
    Ok(n)
}

/// True iff `det U = ±1`, `c > 0` and `A′ = c·U·A·Uᵀ` entrywise.
pub fn verify_congruence(cert: &CongruenceCertificate) -> Result<bool> {
    check_dims(cert)?;
    if !cert.c.is_positive() || unimodular_det(&cert.u) == 0 {
        return Ok(false);
    }
    let u = matrix::from_ints(&cert.u);
    let uaut = matrix::mul(&matrix::mul(&u, &cert.a), &matrix::transpose(&u));
    Ok(matrix::scale(&uaut, &QuadElem::rational(cert.c.clone())) == cert.a_prime)
}

fn exact_gram(l: &Lattice) -> Result<QMat> {
    match l.gram() {
        Gram::Exact(m) => Ok(m),
        Gram::Float(_) => Err(Error::Usage(format!("{} has no exact Gram matrix", l.name()))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// The shipped certificates, built from the transcribed appendix matrices.
pub fn appendix_certificates() -> Result<Vec<(String, CongruenceCertificate)>> {
    let k10 = exact_gram(&catalog::k10p())?;
    let m = |name: &str| catalog::appendix_b(name);
    let one = Rational::one();
    let mut out = vec![
        ("K10p ~ A1".to_string(), CongruenceCertificate::new(matrix::from_ints(&m("A1")?), k10.clone(), m("U1")?, one.clone())),
        ("K10p ~ A2".to_string(), CongruenceCertificate::new(matrix::from_ints(&m("A2")?), k10, m("U2")?, one.clone())),
    ];
    // ½U₄G₄U₄ᵀ = ½U₅G₅U₅ᵀ, i.e. G₅ = (U₅⁻¹U₄) G₄ (U₅⁻¹U₄)ᵀ.
    let g = |name: &str| -> Result<QMat> {
        let b = matrix::from_ints(&m(name)?);
        Ok(matrix::mul(&b, &matrix::transpose(&b)))
    };
    let u = matrix::imul(&unimodular_inverse(&m("U5")?)?, &m("U4")?);
    out.push(("B4 ~ B5".to_string(), CongruenceCertificate::new(g("B4")?, g("B5")?, u, one)));
    Ok(out)
}

/// Checks the appendix certificates and the unimodularity of every printed `U`.
pub fn appendix_checks() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for name in ["U1", "U2", "U4", "U5"] {
        let d = unimodular_det(&catalog::appendix_b(name)?);
        out.push(CheckResult { name: format!("det {name}"), passed: d != 0, detail: format!("determinant {}", if d == 0 { "not ±1".into() } else { d.to_string() }) });
    }
    let g4 = gram_of_appendix("B4", "U4")?;
    let g5 = gram_of_appendix("B5", "U5")?;
    out.push(CheckResult {
        name: "U4 B4 B4' U4' = U5 B5 B5' U5'".into(),
        passed: g4 == g5,
        detail: "printed 12-dimensional identity".into(),
    });
    for (name, cert) in appendix_certificates()? {
        let passed = verify_congruence(&cert)?;
        out.push(CheckResult { name, passed, detail: format!("dimension {}", cert.a.len()) });
    }
    Ok(out)
}

/// `½·U·B·Bᵀ·Uᵀ` for the named appendix matrices.
pub fn gram_of_appendix(b: &str, u: &str) -> Result<QMat> {
    let b = matrix::from_ints(&catalog::appendix_b(b)?);
    let u = matrix::from_ints(&catalog::appendix_b(u)?);
    let ub = matrix::mul(&u, &b);
    Ok(matrix::scale(&matrix::mul(&ub, &matrix::transpose(&ub)), &QuadElem::rational(Rational::new(1.into(), 2.into()))))
}

pub const DEFAULT_SHELLS: usize = 5;
const SHELL_TOL: f64 = 1e-7;

/// Scale-invariant screen: lattices with different fingerprints are inequivalent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    /// `det(Gram)/μⁿ` with μ the minimal norm; equals `μ⁻ⁿ` at unit volume.
    pub det: f64,
    /// Minimal squared norm at unit volume.
    pub min_norm2: f64,
    pub kissing: usize,
    /// Cumulative counts of the first shells, norms at unit volume.
    pub theta: Vec<ThetaStep>,
}

impl Fingerprint {
    /// Equality up to a relative tolerance on the real-valued fields.
    pub fn matches(&self, other: &Fingerprint, tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * x.abs().max(y.abs());
        self.dim == other.dim
            && self.kissing == other.kissing
            && close(self.det, other.det)
            && close(self.min_norm2, other.min_norm2)
            && self.theta.len() == other.theta.len()
            && self.theta.iter().zip(&other.theta).all(|(a, b)| a.count == b.count && close(a.r2, b.r2))
    }
}

pub fn lattice_fingerprint(l: &Lattice, shells: usize) -> Result<Fingerprint> {
    if shells == 0 {
        return Err(Error::Usage("at least one shell is required".into()));
    }
    let unit = l.unit_volume();
    let short = shortest_vectors(&unit)?;
    let min = short.min_norm2;
    let mut r2 = min * 1.5;
    let theta = loop {
        let t = theta_image(&unit, r2, SHELL_TOL)?;
        // One extra shell guarantees the last kept shell is complete.
        if t.len() > shells {
            break t.into_iter().take(shells).collect::<Vec<_>>();
        }
        r2 *= 1.5;
    };
    Ok(Fingerprint { dim: l.dim(), det: min.powi(-(l.dim() as i32)), min_norm2: min, kissing: short.kissing, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Scale;

    fn ident(n: usize) -> IMat {
        (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
    }

    #[test]
    fn identity_certificate() {
        let a = exact_gram(&catalog::d4()).unwrap();
        let cert = CongruenceCertificate::new(a.clone(), a, ident(4), Rational::one());
        assert!(verify_congruence(&cert).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = exact_gram(&catalog::d4()).unwrap();
        let cert = CongruenceCertificate::new(a.clone(), a, ident(3), Rational::one());
        assert!(verify_congruence(&cert).is_err());
    }

    #[test]
    fn appendix_suite_passes() {
        for r in appendix_checks().unwrap() {
            assert!(r.passed, "{}", r.name);
        }
    }

    #[test]
    fn mutated_u1_fails() {
        let (_, mut cert) = appendix_certificates().unwrap().remove(0);
        cert.u[3][5] += 1;
        assert!(!verify_congruence(&cert).unwrap());
    }

    #[test]
    fn square_and_hexagonal_differ() {
        let z2 = lattice_fingerprint(&catalog::zn(2), 3).unwrap();
        let a2 = lattice_fingerprint(&catalog::hexagonal(), 3).unwrap();
        assert_eq!((z2.kissing, a2.kissing), (4, 6));
        assert!(!z2.matches(&a2, 1e-9));
    }

    #[test]
    fn scaling_leaves_fingerprint_unchanged() {
        let l = catalog::d4();
        let f1 = lattice_fingerprint(&l, 4).unwrap();
        let f3 = lattice_fingerprint(&l.scaled(&Scale::Exact(QuadElem::from_int(3))).unwrap(), 4).unwrap();
        assert!(f1.matches(&f3, 1e-9));
        assert_eq!(f1.theta[0].count, 25);
    }
}

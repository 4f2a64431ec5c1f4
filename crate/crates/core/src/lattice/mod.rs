//! Lattices given by square generator matrices (rows are basis vectors).

pub mod catalog;
pub mod file;
pub mod glue;
pub mod lll;
pub mod matrix;

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::rational::{float_to_rational, to_f64};
use crate::exact::{BigFloat, QuadElem, Rational};
use matrix::{FMat, IMat, QMat};

pub use glue::{glue, GlueSpec};
pub use lll::{lll_reduce, Reduced};

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// Entries in Q(√d); `d = 1` means purely rational.
    Exact { d: u32, rows: QMat },
    Float(FMat),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub exact: Option<Rational>,
    pub value: f64,
}

impl Param {
    pub fn exact(name: &str, q: Rational) -> Self {
        Param { name: name.into(), value: to_f64(&q), exact: Some(q) }
    }

    pub fn float(name: &str, x: f64) -> Self {
        Param { name: name.into(), exact: None, value: x }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Meta {
    pub family: String,
    pub params: Vec<Param>,
}

impl Meta {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gram {
    Exact(QMat),
    Float(FMat),
}

impl Gram {
    pub fn to_f64(&self) -> FMat {
        match self {
            Gram::Exact(m) => matrix::to_f64(m),
            Gram::Float(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    name: String,
    generator: Generator,
    meta: Option<Meta>,
}

/// A positive scale factor, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Scale {
    Exact(QuadElem),
    Float(f64),
}

impl Scale {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scale::Exact(q) => q.to_f64(),
            Scale::Float(x) => *x,
        }
    }

    pub fn one() -> Self {
        Scale::Exact(QuadElem::one())
    }
}

impl From<Rational> for Scale {
    fn from(q: Rational) -> Self {
        Scale::Exact(QuadElem::rational(q))
    }
}

fn check_square<T>(rows: &[Vec<T>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Usage("empty generator matrix".into()));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Usage(format!("generator matrix must be square ({n} rows)")));
    }
    Ok(n)
}

impl Lattice {
    pub fn exact(name: &str, rows: QMat) -> Result<Self> {
        check_square(&rows)?;
        let d = QuadElem::check_fields(rows.iter().flatten())?;
        if matrix::det(&rows).is_zero() {
            return Err(Error::Singular);
        }
        Ok(Lattice { name: name.into(), generator: Generator::Exact { d, rows }, meta: None })
    }

    pub fn from_ints(name: &str, rows: &[Vec<i64>]) -> Result<Self> {
        Self::exact(name, matrix::from_ints(rows))
    }

    pub fn float(name: &str, rows: FMat) -> Result<Self> {
        check_square(&rows)?;
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Usage("non-finite generator entry".into()));
        }
        if matrix::fdet(&rows) == 0.0 {
            return Err(Error::Singular);
        }
        Ok(Lattice { name: name.into(), generator: Generator::Float(rows), meta: None })
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn meta(&self) -> Option<&Meta> {
        self.meta.as_ref()
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        match &self.generator {
            Generator::Exact { rows, .. } => rows.len(),
            Generator::Float(rows) => rows.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.generator, Generator::Exact { .. })
    }

    pub fn field(&self) -> Option<u32> {
        match &self.generator {
            Generator::Exact { d, .. } => Some(*d),
            Generator::Float(_) => None,
        }
    }

    pub fn exact_rows(&self) -> Option<&QMat> {
        match &self.generator {
            Generator::Exact { rows, .. } => Some(rows),
            Generator::Float(_) => None,
        }
    }

    pub fn rows_f64(&self) -> FMat {
        match &self.generator {
            Generator::Exact { rows, .. } => matrix::to_f64(rows),
            Generator::Float(rows) => rows.clone(),
        }
    }

    /// Exact entries; floats are taken at their exact binary value.
    pub fn rows_exact_or_dyadic(&self) -> QMat {
        match &self.generator {
            Generator::Exact { rows, .. } => rows.clone(),
            Generator::Float(rows) => rows
                .iter()
                .map(|r| r.iter().map(|&x| QuadElem::rational(float_to_rational(x).expect("finite"))).collect())
                .collect(),
        }
    }

    pub fn det_exact(&self) -> Option<QuadElem> {
        self.exact_rows().map(|r| matrix::det(r))
    }

    pub fn det_f64(&self) -> f64 {
        match &self.generator {
            Generator::Exact { rows, .. } => matrix::det(rows).to_f64(),
            Generator::Float(rows) => matrix::fdet(rows),
        }
    }

    /// Cell volume `|det B|` as a certified ball.
    pub fn volume(&self, bits: u32) -> BigFloat {
        let d = matrix::det(&self.rows_exact_or_dyadic());
        BigFloat::from_quad(&d.abs(), bits)
    }

    pub fn gram(&self) -> Gram {
        match &self.generator {
            Generator::Exact { rows, .. } => Gram::Exact(matrix::mul(rows, &matrix::transpose(rows))),
            Generator::Float(rows) => Gram::Float(matrix::fgram(rows)),
        }
    }

    pub fn gram_f64(&self) -> FMat {
        self.gram().to_f64()
    }

    /// Dual lattice with generator `(Bᵀ)⁻¹`.
    pub fn dual(&self) -> Result<Lattice> {
        let generator = match &self.generator {
            Generator::Exact { rows, .. } => {
                let inv = matrix::transpose(&matrix::inverse(rows)?);
                let d = QuadElem::check_fields(inv.iter().flatten())?;
                Generator::Exact { d, rows: inv }
            }
            Generator::Float(rows) => Generator::Float(matrix::transpose(&matrix::finverse(rows)?)),
        };
        Ok(Lattice { name: format!("{}*", self.name), generator, meta: None })
    }

    pub fn scaled(&self, c: &Scale) -> Result<Lattice> {
        if c.to_f64() <= 0.0 {
            return Err(Error::Domain("scale factor must be positive".into()));
        }
        let generator = match (&self.generator, c) {
            (Generator::Exact { rows, .. }, Scale::Exact(q)) => {
                let rows = matrix::scale(rows, q);
                let d = QuadElem::check_fields(rows.iter().flatten())?;
                Generator::Exact { d, rows }
            }
            _ => {
                let k = c.to_f64();
                Generator::Float(self.rows_f64().iter().map(|r| r.iter().map(|x| x * k).collect()).collect())
            }
        };
        Ok(Lattice { name: self.name.clone(), generator, meta: None })
    }

    /// Same lattice with basis `U·B` for an integer matrix `U`.
    pub fn transformed(&self, u: &IMat) -> Lattice {
        let generator = match &self.generator {
            Generator::Exact { d, rows } => Generator::Exact {
                d: *d,
                rows: matrix::mul(&matrix::from_ints(u), rows),
            },
            Generator::Float(rows) => {
                let uf: FMat = u.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
                Generator::Float(matrix::fmul(&uf, rows))
            }
        };
        Lattice { name: self.name.clone(), generator, meta: self.meta.clone() }
    }

    /// Generator rescaled to unit determinant, rounded to doubles.
    ///
    /// The scale factor is computed from the exact (or exact binary) entries,
    /// so `L` and `cL` give the same doubles whenever `cB` is exact.
    pub fn unit_volume_rows(&self) -> FMat {
        let bits = 192;
        let rows = self.rows_exact_or_dyadic();
        let n = rows.len() as i64;
        let v = BigFloat::from_quad(&matrix::det(&rows).abs(), bits);
        let c = v
            .pow_rational(&Rational::new((-1).into(), n.into()))
            .expect("positive volume");
        rows.iter()
            .map(|r| r.iter().map(|x| BigFloat::from_quad(x, bits).mul(&c).to_f64()).collect())
            .collect()
    }

    pub fn unit_volume(&self) -> Lattice {
        Lattice {
            name: self.name.clone(),
            generator: Generator::Float(self.unit_volume_rows()),
            meta: self.meta.clone(),
        }
    }
}

/// Block-diagonal product `a₁Λ₁ × … × a_kΛ_k`.
pub fn product_scaled(components: &[(Lattice, Scale)]) -> Result<Lattice> {
    if components.is_empty() {
        return Err(Error::Usage("product needs at least one component".into()));
    }
    let scaled: Vec<Lattice> = components
        .iter()
        .map(|(l, s)| l.scaled(s))
        .collect::<Result<_>>()?;
    let n: usize = scaled.iter().map(|l| l.dim()).sum();
    let name = components.iter().map(|(l, _)| l.name().to_string()).collect::<Vec<_>>().join(" x ");
    if scaled.iter().all(|l| l.is_exact()) {
        let mut rows = vec![vec![QuadElem::zero(); n]; n];
        let mut off = 0;
        for l in &scaled {
            let r = l.exact_rows().unwrap();
            for (i, row) in r.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    rows[off + i][off + j] = x.clone();
                }
            }
            off += l.dim();
        }
        Lattice::exact(&name, rows)
    } else {
        let mut rows = vec![vec![0.0; n]; n];
        let mut off = 0;
        for l in &scaled {
            for (i, row) in l.rows_f64().iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    rows[off + i][off + j] = *x;
                }
            }
            off += l.dim();
        }
        Lattice::float(&name, rows)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", file::print_lattice(self))
    }
}

/// True when every entry of `q` is an integer (used for membership checks).
pub fn is_integer_vector(q: &[QuadElem]) -> bool {
    q.iter().all(|x| x.to_rational().is_some_and(|r| r.is_integer()))
}

pub(crate) fn positive_f64(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{what} must be positive")))
    }
}

pub(crate) fn positive_rational(x: &Rational, what: &str) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::int;

    fn d4() -> Lattice {
        catalog::d4()
    }

    #[test]
    fn zn_gram_is_identity() {
        let z = catalog::zn(3);
        assert_eq!(z.gram(), Gram::Exact(matrix::identity(3)));
    }

    #[test]
    fn dual_involution_and_det() {
        let l = d4();
        let dd = l.dual().unwrap().dual().unwrap();
        assert_eq!(dd.gram(), l.gram());
        assert_eq!(l.dual().unwrap().det_exact().unwrap().abs(), QuadElem::rational(Rational::new(1.into(), 2.into())));
    }

    #[test]
    fn scaled_dual_gram() {
        let l = d4();
        let three = Scale::Exact(QuadElem::from_int(3));
        let lhs = l.scaled(&three).unwrap().dual().unwrap().gram();
        let Gram::Exact(base) = l.dual().unwrap().gram() else { panic!() };
        let expect = matrix::scale(&base, &QuadElem::rational(Rational::new(1.into(), 9.into())));
        assert_eq!(lhs, Gram::Exact(expect));
    }

    #[test]
    fn product_determinant_law() {
        let z1 = catalog::zn(1);
        let p = product_scaled(&[(z1.clone(), Scale::one()), (z1, Scale::one())]).unwrap();
        assert_eq!(p.gram(), catalog::zn(2).gram());
        let a = QuadElem::rational(Rational::new(3.into(), 2.into()));
        let q = product_scaled(&[(d4(), Scale::Exact(a.clone())), (catalog::zn(2), Scale::one())]).unwrap();
        assert_eq!(q.det_exact().unwrap().abs(), &a.pow(4) * &QuadElem::from_int(2));
    }

    #[test]
    fn singular_and_nonpositive_are_rejected() {
        assert_eq!(Lattice::from_ints("s", &[vec![1, 2], vec![2, 4]]), Err(Error::Singular));
        assert!(d4().scaled(&Scale::Exact(QuadElem::from_int(0))).is_err());
        let _ = int(0);
    }

    #[test]
    fn unit_volume_is_scale_invariant() {
        let l = d4();
        let big = l.scaled(&Scale::Exact(QuadElem::from_int(3))).unwrap();
        assert_eq!(l.unit_volume_rows(), big.unit_volume_rows());
    }
}

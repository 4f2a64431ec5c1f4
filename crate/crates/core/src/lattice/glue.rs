//! Gluing: the union of translates `Λ_p + g` over a finite glue group Γ.
//!
//! Glue vectors are expressed in coordinates of the product basis. Those
//! coordinates are rational with denominators dividing |Γ|; stacking them
//! under the identity, clearing denominators, and taking an integer Hermite
//! normal form gives a basis of the glued lattice.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::matrix::{self, QMat};
use super::{Generator, Lattice, Scale};
use crate::error::{Error, Result};
use crate::exact::rational::{approximate_f64, to_f64};
use crate::exact::{QuadElem, Rational};

pub const MAX_GLUE_ORDER: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct GlueComponent {
    pub start: usize,
    pub end: usize,
    pub scale: Scale,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GlueVectors {
    Exact(QMat),
    Float(Vec<Vec<f64>>),
}

impl GlueVectors {
    pub fn len(&self) -> usize {
        match self {
            GlueVectors::Exact(v) => v.len(),
            GlueVectors::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlueSpec {
    pub name: String,
    /// Generator of the (scaled) product lattice Λ_p.
    pub product: Lattice,
    /// Row ranges of the component blocks, for reporting.
    pub components: Vec<GlueComponent>,
    pub glue: GlueVectors,
    /// The listed vectors claim to be all of Γ (closure is then checked);
    /// otherwise they are generators.
    pub whole_group: bool,
}

/// Glued lattice plus the order of Γ modulo Λ_p.
#[derive(Clone, Debug)]
pub struct Glued {
    pub lattice: Lattice,
    pub group_order: usize,
}

type Coset = Vec<Rational>;

fn frac(q: &Rational) -> Rational {
    q - q.floor()
}

fn reduce(c: &[Rational]) -> Coset {
    c.iter().map(frac).collect()
}

fn add_mod(a: &[Rational], b: &[Rational]) -> Coset {
    a.iter().zip(b).map(|(x, y)| frac(&(x + y))).collect()
}

fn coordinates(spec: &GlueSpec) -> Result<Vec<Coset>> {
    match (&spec.glue, spec.product.generator()) {
        (GlueVectors::Exact(vs), Generator::Exact { rows, .. }) => {
            let inv = matrix::inverse(rows)?;
            vs.iter()
                .map(|g| {
                    let c = matrix::mul(&[g.clone()], &inv).remove(0);
                    c.iter()
                        .map(|x| {
                            x.to_rational().ok_or_else(|| {
                                Error::NonLattice("glue vector has irrational product coordinates".into())
                            })
                        })
                        .collect()
                })
                .collect()
        }
        _ => {
            let inv = matrix::finverse(&spec.product.rows_f64())?;
            let vs: Vec<Vec<f64>> = match &spec.glue {
                GlueVectors::Exact(v) => matrix::to_f64(v),
                GlueVectors::Float(v) => v.clone(),
            };
            vs.iter()
                .map(|g| {
                    let c = matrix::fmul(&[g.clone()], &inv).remove(0);
                    c.iter()
                        .map(|&x| {
                            let q = approximate_f64(x, MAX_GLUE_ORDER as u64)
                                .ok_or_else(|| Error::NonLattice("non-finite glue coordinate".into()))?;
                            if (to_f64(&q) - x).abs() > 1e-9 * (1.0 + x.abs()) {
                                return Err(Error::NonLattice("glue vector has unbounded order".into()));
                            }
                            Ok(q)
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Elements of the group generated by `gens` modulo the integers.
fn generated_group(gens: &[Coset], n: usize) -> Result<BTreeSet<Coset>> {
    let zero: Coset = vec![Rational::zero(); n];
    let mut group = BTreeSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = add_mod(&x, g);
            if group.insert(y.clone()) {
                if group.len() > MAX_GLUE_ORDER {
                    return Err(Error::NonLattice(format!("glue group exceeds {MAX_GLUE_ORDER} elements")));
                }
                frontier.push(y);
            }
        }
    }
    Ok(group)
}

pub fn glue(spec: &GlueSpec) -> Result<Lattice> {
    Ok(glue_with_order(spec)?.lattice)
}

pub fn glue_with_order(spec: &GlueSpec) -> Result<Glued> {
    let n = spec.product.dim();
    let coords = coordinates(spec)?;
    for c in &coords {
        if c.len() != n {
            return Err(Error::Usage("glue vector dimension mismatch".into()));
        }
        let order = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        if order > BigInt::from(MAX_GLUE_ORDER) {
            return Err(Error::NonLattice(format!("glue vector order {order} exceeds {MAX_GLUE_ORDER}")));
        }
    }
    let reps: Vec<Coset> = coords.iter().map(|c| reduce(c)).collect();
    let group = generated_group(&reps, n)?;
    if spec.whole_group {
        let listed: BTreeSet<Coset> = reps.iter().cloned().collect();
        for a in &listed {
            for b in &listed {
                if !listed.contains(&add_mod(a, b)) {
                    return Err(Error::NonLattice("listed glue vectors are not closed under addition".into()));
                }
            }
        }
        if !listed.contains(&vec![Rational::zero(); n]) {
            return Err(Error::NonLattice("listed glue group lacks the zero coset".into()));
        }
    }

    // Integer HNF of [D·I; D·coords].
    let den = coords
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { den.clone() } else { BigInt::zero() }).collect())
        .collect();
    for c in &coords {
        m.push(c.iter().map(|q| (q * Rational::from_integer(den.clone())).to_integer()).collect());
    }
    let h = matrix::hermite_normal_form(&m);
    debug_assert_eq!(h.len(), n);
    let denq = QuadElem::rational(Rational::from_integer(den.clone()));
    let new_coords: QMat = matrix::int_to_quad(&h)
        .iter()
        .map(|r| r.iter().map(|x| x / &denq).collect())
        .collect();

    let lattice = match spec.product.generator() {
        Generator::Exact { rows, .. } => {
            let out = Lattice::exact(&spec.name, matrix::mul(&new_coords, rows))?;
            let lhs = &out.det_exact().unwrap().abs() * &QuadElem::from_int(group.len() as i64);
            if lhs != spec.product.det_exact().unwrap().abs() {
                return Err(Error::NonLattice("glue determinant law violated".into()));
            }
            out
        }
        Generator::Float(rows) => {
            let cf = matrix::to_f64(&new_coords);
            Lattice::float(&spec.name, matrix::fmul(&cf, rows))?
        }
    };
    Ok(Glued { lattice, group_order: group.len() })
}

/// True when `v` is a point of `l` (checked exactly for exact lattices).
pub fn contains(l: &Lattice, v: &[QuadElem]) -> Result<bool> {
    let rows = l.exact_rows().ok_or_else(|| Error::Usage("membership needs an exact lattice".into()))?;
    let c = matrix::solve_left(rows, v)?;
    Ok(super::is_integer_vector(&c))
}

/// Integer coordinates of `v` in the basis of `l`, if `v` lies in `l`.
pub fn integer_coordinates(l: &Lattice, v: &[QuadElem]) -> Option<Vec<i64>> {
    let rows = l.exact_rows()?;
    let c = matrix::solve_left(rows, v).ok()?;
    c.iter()
        .map(|x| x.to_rational().filter(|q| q.is_integer()).and_then(|q| q.to_integer().to_i64()))
        .collect()
}

/// Group order of the listed glue vectors modulo the product, without building the lattice.
pub fn glue_group_order(spec: &GlueSpec) -> Result<usize> {
    let coords = coordinates(spec)?;
    let reps: Vec<Coset> = coords.iter().map(|c| reduce(c)).collect();
    Ok(generated_group(&reps, spec.product.dim())?.len())
}

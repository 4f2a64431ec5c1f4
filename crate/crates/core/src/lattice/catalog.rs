//! Built-in lattices, symmetry generators, equivalence matrices and coefficient tables.

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use super::glue::{GlueComponent, GlueSpec, GlueVectors};
use super::matrix::{self, FMat, IMat, QMat};
use super::{product_scaled, Lattice, Meta, Param, Scale};
use crate::error::{Error, Result};
use crate::exact::rational::{int, rat, to_f64};
use crate::exact::{QuadElem, Rational};

pub const APPENDIX_A_CSV: &str = include_str!("../../data/appendix_a_coefficients.csv");
pub const B14_NUMERATOR_CSV: &str = include_str!("../../data/b14_second_moment_numerator.csv");
pub const F14_CSV: &str = include_str!("../../data/b14_stationarity_poly.csv");
pub const APPENDIX_B_TXT: &str = include_str!("../../data/appendix_b.txt");

/// Names understood by [`get`].
pub const NAMES: &[(&str, &str)] = &[
    ("Z", "integer lattice Z^n (param n)"),
    ("D4", "checkerboard lattice D4"),
    ("Dn", "checkerboard lattice D_n (param n)"),
    ("A2", "hexagonal lattice"),
    ("K10p", "top-left 10x10 block of B14"),
    ("B14", "glued K'10 x aD4 (param a > 0)"),
    ("B14glue", "glue specification of B14 (param a > 0)"),
    ("B13", "glued A7 x a2 D5 x a3 sqrt2 Z (params a1, a2, a3)"),
    ("B13p", "B13 at unit scales"),
    ("B13glue", "glue specification of B13 (params a1, a2, a3)"),
    ("AppendixA", "coefficient table of the 13-dimensional phase-A numerator"),
    ("AppendixB", "equivalence certificates A1, A2, U1, U2, B4, B5, U4, U5"),
    ("B14numerator", "coefficients of the 14-dimensional second-moment numerator"),
    ("f14", "coefficients of the 14-dimensional stationarity polynomial"),
    ("symmetries", "W, M2, M2', M2'', M4, M4', M10, M10', Mrefl14"),
];

fn q(r: Rational) -> QuadElem {
    QuadElem::rational(r)
}

fn qi(n: i64) -> QuadElem {
    QuadElem::from_int(n)
}

fn sqrt3() -> QuadElem {
    QuadElem::sqrt_of(3)
}

fn half() -> QuadElem {
    q(rat(1, 2))
}

pub fn zn(n: usize) -> Lattice {
    Lattice::exact(&format!("Z{n}"), matrix::identity(n))
        .expect("identity is nonsingular")
        .with_meta(Meta { family: "Z".into(), params: vec![Param::exact("n", int(n as i64))] })
}

/// D_n = {x ∈ Z^n : Σx even}, n ≥ 2.
pub fn dn(n: usize) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::Domain("D_n needs n >= 2".into()));
    }
    let mut rows = vec![vec![0i64; n]; n];
    rows[0][0] = -1;
    rows[0][1] = -1;
    rows[1][0] = 1;
    rows[1][1] = -1;
    for i in 2..n {
        rows[i][i - 1] = 1;
        rows[i][i] = -1;
    }
    Ok(Lattice::from_ints(&format!("D{n}"), &rows)?
        .with_meta(Meta { family: "D".into(), params: vec![Param::exact("n", int(n as i64))] }))
}

pub fn d4() -> Lattice {
    dn(4).expect("n = 4")
}

pub fn hexagonal() -> Lattice {
    Lattice::exact("A2", vec![vec![qi(1), qi(0)], vec![half(), &sqrt3() * &half()]])
        .expect("nonsingular")
        .with_meta(Meta { family: "A2".into(), params: vec![] })
}

fn b14_rows(a: &QuadElem) -> QMat {
    let z = QuadElem::zero;
    let h = half();
    let qh = &sqrt3() * &half();
    let mqh = -&qh;
    let q3 = sqrt3();
    let ah = a * &half();
    let ma = -a;
    let mut r: QMat = vec![
        vec![qi(2), z(), z(), z(), z(), z(), z(), z(), z(), z()],
        vec![qi(1), q3.clone(), z(), z(), z(), z(), z(), z(), z(), z()],
        vec![z(), z(), qi(2), z(), z(), z(), z(), z(), z(), z()],
        vec![z(), z(), qi(1), q3.clone(), z(), z(), z(), z(), z(), z()],
        vec![z(), z(), z(), z(), qi(2), z(), z(), z(), z(), z()],
        vec![z(), z(), z(), z(), qi(1), q3.clone(), z(), z(), z(), z()],
        vec![qi(1), z(), h.clone(), mqh.clone(), h.clone(), mqh.clone(), qi(1), z(), z(), z()],
        vec![h.clone(), qh.clone(), qi(1), z(), qi(1), z(), h.clone(), qh.clone(), z(), z()],
        vec![h.clone(), mqh.clone(), qi(1), z(), h.clone(), mqh.clone(), z(), z(), qi(1), z()],
        vec![qi(1), z(), h.clone(), qh.clone(), qi(1), z(), z(), z(), h.clone(), qh.clone()],
        vec![qi(1), z(), qi(1), z(), h.clone(), qh.clone(), z(), z(), z(), z()],
        vec![z(); 10],
        vec![z(); 10],
        vec![h.clone(), mqh.clone(), h.clone(), mqh, qi(1), z(), z(), z(), z(), z()],
    ];
    let tails = [
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![z(), z(), z(), z()],
        vec![a.clone(), z(), z(), z()],
        vec![ma.clone(), a.clone(), z(), z()],
        vec![ma, z(), a.clone(), z()],
        vec![ah.clone(), ah.clone(), ah.clone(), ah],
    ];
    for (row, tail) in r.iter_mut().zip(tails) {
        row.extend(tail);
    }
    r
}

fn b14_meta(a: Param) -> Meta {
    Meta { family: "B14".into(), params: vec![a] }
}

/// The 14-dimensional glued lattice at an exact positive scale `a`.
pub fn b14(a: &Rational) -> Result<Lattice> {
    super::positive_rational(a, "a")?;
    Ok(Lattice::exact("B14", b14_rows(&q(a.clone())))?.with_meta(b14_meta(Param::exact("a", a.clone()))))
}

/// The 14-dimensional glued lattice at a floating scale (e.g. the irrational optimum).
pub fn b14_float(a: f64) -> Result<Lattice> {
    let a = super::positive_f64(a, "a")?;
    let rows = b14_rows(&qi(1));
    let f: FMat = matrix::to_f64(&rows)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.into_iter()
                .enumerate()
                .map(|(j, x)| if j >= 10 && i >= 10 { x * a } else { x })
                .collect()
        })
        .collect();
    Ok(Lattice::float("B14", f)?.with_meta(b14_meta(Param::float("a", a))))
}

/// K′10: the top-left 10×10 block of B14.
pub fn k10p() -> Lattice {
    let rows: QMat = b14_rows(&qi(1)).into_iter().take(10).map(|r| r[..10].to_vec()).collect();
    Lattice::exact("K10p", rows).expect("nonsingular")
}

/// The four printed coset representatives of the B14 glue group.
pub fn b14_glue_vectors(a: &QuadElem) -> QMat {
    let z = QuadElem::zero;
    let h = half();
    let qh = &sqrt3() * &half();
    let ah = a * &half();
    vec![
        vec![z(); 14],
        vec![qi(1), z(), qi(1), z(), h.clone(), qh.clone(), z(), z(), z(), z(), a.clone(), z(), z(), z()],
        vec![h.clone(), -&qh, h.clone(), -&qh, qi(1), z(), z(), z(), z(), z(), ah.clone(), ah.clone(), ah.clone(), ah.clone()],
        vec![h.clone(), qh.clone(), h.clone(), qh.clone(), -&h, qh, z(), z(), z(), z(), ah.clone(), -&ah, -&ah, -&ah],
    ]
}

fn b14_glue_from(product: Lattice, glue: GlueVectors, a: Scale) -> GlueSpec {
    GlueSpec {
        name: "B14".into(),
        product,
        components: vec![
            GlueComponent { start: 0, end: 10, scale: Scale::one() },
            GlueComponent { start: 10, end: 14, scale: a },
        ],
        glue,
        whole_group: true,
    }
}

/// K′10 × aD4 with the printed glue group (|Γ| = 4).
pub fn b14_glue(a: &Rational) -> Result<GlueSpec> {
    super::positive_rational(a, "a")?;
    let s = Scale::from(a.clone());
    let product = product_scaled(&[(k10p(), Scale::one()), (d4(), s.clone())])?;
    Ok(b14_glue_from(product, GlueVectors::Exact(b14_glue_vectors(&q(a.clone()))), s))
}

pub fn b14_glue_float(a: f64) -> Result<GlueSpec> {
    let a = super::positive_f64(a, "a")?;
    let s = Scale::Float(a);
    let product = product_scaled(&[(k10p(), Scale::one()), (d4(), s.clone())])?;
    let glue: Vec<Vec<f64>> = matrix::to_f64(&b14_glue_vectors(&qi(1)))
        .into_iter()
        .map(|r| r.into_iter().enumerate().map(|(j, x)| if j >= 10 { x * a } else { x }).collect())
        .collect();
    Ok(b14_glue_from(product, GlueVectors::Float(glue), s))
}

/// Rows of B13(a1, a2, a3) over any scalar type built from the three scales.
/// The first seven rows carry `+a1` in column 0; callers negate it.
#[allow(clippy::too_many_arguments)]
fn b13_rows_generic<T: Clone>(a1: T, a2: T, zero: T, two_a2: T, a2_half: T, b: T, bp: T) -> Vec<Vec<T>> {
    let mut rows = vec![vec![zero.clone(); 13]; 13];
    for (i, row) in rows.iter_mut().enumerate().take(7) {
        row[0] = a1.clone();
        row[i + 1] = a1.clone();
    }
    rows[7][8] = two_a2;
    for i in 8..12 {
        rows[i][8] = a2.clone();
        rows[i][i + 1] = a2.clone();
    }
    for j in 0..8 {
        rows[12][j] = if j < 3 { b.clone() } else { bp.clone() };
    }
    for j in 8..13 {
        rows[12][j] = a2_half.clone();
    }
    rows
}

fn b13_meta(a1: Param, a2: Param, a3: Param) -> Meta {
    Meta { family: "B13".into(), params: vec![a1, a2, a3] }
}

/// The 13-dimensional glued lattice at exact positive scales.
pub fn b13(a1: &Rational, a2: &Rational, a3: &Rational) -> Result<Lattice> {
    for (x, n) in [(a1, "a1"), (a2, "a2"), (a3, "a3")] {
        super::positive_rational(x, n)?;
    }
    let b = (a1 * int(10) + a3) / int(16);
    let bp = &b - a1;
    let mut rows = b13_rows_generic(
        q(a1.clone()),
        q(a2.clone()),
        QuadElem::zero(),
        q(a2 * int(2)),
        q(a2 / int(2)),
        q(b),
        q(bp),
    );
    for row in rows.iter_mut().take(7) {
        row[0] = -&row[0];
    }
    Ok(Lattice::exact("B13", rows)?.with_meta(b13_meta(
        Param::exact("a1", a1.clone()),
        Param::exact("a2", a2.clone()),
        Param::exact("a3", a3.clone()),
    )))
}

pub fn b13_float(a1: f64, a2: f64, a3: f64) -> Result<Lattice> {
    for (x, n) in [(a1, "a1"), (a2, "a2"), (a3, "a3")] {
        super::positive_f64(x, n)?;
    }
    Ok(Lattice::float("B13", b13_linear_part(a1, a2, a3))?.with_meta(b13_meta(
        Param::float("a1", a1),
        Param::float("a2", a2),
        Param::float("a3", a3),
    )))
}

/// Generator of B13 as a plain matrix, for any real scales (it is linear in them).
pub fn b13_linear_part(a1: f64, a2: f64, a3: f64) -> FMat {
    let b = (10.0 * a1 + a3) / 16.0;
    let mut rows = b13_rows_generic(a1, a2, 0.0, 2.0 * a2, a2 / 2.0, b, b - a1);
    for row in rows.iter_mut().take(7) {
        row[0] = -row[0];
    }
    rows
}

/// B′13 = B13(1, 1, 1).
pub fn b13_prime() -> Lattice {
    b13(&int(1), &int(1), &int(1)).expect("unit scales").with_name("B13p")
}

/// A7 × a2·D5 × a3·√2Z (first twelve rows of B13 plus the all-ones direction)
/// glued by the last row of B13 (|Γ| = 8).
pub fn b13_glue(a1: &Rational, a2: &Rational, a3: &Rational) -> Result<GlueSpec> {
    let full = b13(a1, a2, a3)?;
    let rows = full.exact_rows().expect("exact").clone();
    let mut prod = rows[..12].to_vec();
    let mut ones = vec![QuadElem::zero(); 13];
    for x in ones.iter_mut().take(8) {
        *x = q(a3 / int(2));
    }
    prod.push(ones);
    Ok(GlueSpec {
        name: "B13".into(),
        product: Lattice::exact("A7 x D5 x sqrt2Z", prod)?,
        components: vec![
            GlueComponent { start: 0, end: 7, scale: Scale::from(a1.clone()) },
            GlueComponent { start: 7, end: 12, scale: Scale::from(a2.clone()) },
            GlueComponent { start: 12, end: 13, scale: Scale::from(a3.clone()) },
        ],
        glue: GlueVectors::Exact(vec![rows[12].clone()]),
        whole_group: false,
    })
}

// ---------------------------------------------------------------------------
// Coefficient tables.

fn parse_csv_rows(text: &str, ncols: usize) -> Vec<Vec<BigInt>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<BigInt> = l.split(',').map(|c| c.trim().parse().expect("catalog csv")).collect();
            assert_eq!(cols.len(), ncols, "catalog csv column count");
            cols
        })
        .collect()
}

/// Appendix A table: `(i, j, c_ij)` with 120 rows.
pub fn appendix_a() -> Vec<(u32, u32, BigInt)> {
    parse_csv_rows(APPENDIX_A_CSV, 3)
        .into_iter()
        .map(|mut r| {
            let c = r.pop().unwrap();
            let j = u32::try_from(r.pop().unwrap()).unwrap();
            let i = u32::try_from(r.pop().unwrap()).unwrap();
            (i, j, c)
        })
        .collect()
}

fn univariate_table(text: &str) -> Vec<(u32, BigInt)> {
    parse_csv_rows(text, 2)
        .into_iter()
        .map(|mut r| {
            let c = r.pop().unwrap();
            (u32::try_from(r.pop().unwrap()).unwrap(), c)
        })
        .collect()
}

/// Numerator coefficients of the 14-dimensional second moment, by power of a.
pub fn b14_numerator() -> Vec<(u32, BigInt)> {
    univariate_table(B14_NUMERATOR_CSV)
}

/// Printed coefficients of the 14-dimensional stationarity polynomial, by power of v.
pub fn f14_coefficients() -> Vec<(u32, BigInt)> {
    univariate_table(F14_CSV)
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Named integer matrix from the equivalence appendix (A1, A2, U1, U2, B4, B5, U4, U5).
pub fn appendix_b(name: &str) -> Result<IMat> {
    let mut out: Option<IMat> = None;
    let mut current = false;
    for line in APPENDIX_B_TXT.lines() {
        let line = line.trim();
        if let Some(tag) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if current {
                break;
            }
            current = tag == name;
            if current {
                out = Some(Vec::new());
            }
        } else if current && !line.is_empty() {
            let row = line.split_whitespace().map(|x| x.parse().expect("appendix_b entry")).collect();
            out.as_mut().unwrap().push(row);
        }
    }
    out.ok_or_else(|| Error::UnknownName(name.into()))
}

pub const APPENDIX_B_NAMES: [&str; 8] = ["A1", "A2", "U1", "U2", "B4", "B5", "U4", "U5"];

// ---------------------------------------------------------------------------
// Symmetry generators (right multiplication of row vectors).

fn block(blocks: &[Vec<Option<QMat>>], bs: usize) -> QMat {
    let n = blocks.len() * bs;
    let mut m = vec![vec![QuadElem::zero(); n]; n];
    for (bi, brow) in blocks.iter().enumerate() {
        for (bj, b) in brow.iter().enumerate() {
            if let Some(b) = b {
                for i in 0..bs {
                    for j in 0..bs {
                        m[bi * bs + i][bj * bs + j] = b[i][j].clone();
                    }
                }
            }
        }
    }
    m
}

pub fn w() -> QMat {
    let r3 = sqrt3();
    let k = q(rat(1, 4));
    vec![vec![k.clone(), -&(&r3 * &k)], vec![&r3 * &k, k]]
}

pub fn m2() -> QMat {
    let h = half();
    let s = &sqrt3() * &h;
    vec![vec![h.clone(), -&s], vec![-&s, -&h]]
}

pub fn m2_prime() -> QMat {
    let h = half();
    let s = &sqrt3() * &h;
    vec![vec![h.clone(), s.clone()], vec![s, -&h]]
}

pub fn m2_double_prime() -> QMat {
    vec![vec![qi(1), qi(0)], vec![qi(0), qi(-1)]]
}

pub fn m4() -> QMat {
    let s = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]];
    s.iter().map(|r| r.iter().map(|&x| q(rat(x, 2))).collect()).collect()
}

pub fn m4_prime() -> QMat {
    let mut m = matrix::identity(4);
    m[3][3] = qi(-1);
    m
}

pub fn m10() -> QMat {
    let (a, b, c) = (Some(m2()), Some(m2_double_prime()), Some(m2_prime()));
    block(
        &[
            vec![a.clone(), None, None, None, None],
            vec![None, None, b.clone(), None, None],
            vec![None, b, None, None, None],
            vec![None, None, None, a, None],
            vec![None, None, None, None, c],
        ],
        2,
    )
}

pub fn m10_prime() -> QMat {
    let a = Some(m2());
    block(
        &[
            vec![a.clone(), None, None, None, None],
            vec![None, None, None, None, a.clone()],
            vec![None, a.clone(), None, None, None],
            vec![None, None, a.clone(), None, None],
            vec![None, None, None, a, None],
        ],
        2,
    )
}

pub fn mrefl14() -> QMat {
    let i2h = Some(matrix::scale(&matrix::identity(2), &half()));
    let mi2h = Some(matrix::scale(&matrix::identity(2), &q(rat(-1, 2))));
    let ww = Some(w());
    let wt = Some(matrix::transpose(&w()));
    block(
        &[
            vec![i2h.clone(), ww.clone(), ww.clone(), mi2h.clone(), None],
            vec![wt.clone(), i2h.clone(), mi2h.clone(), wt.clone(), None],
            vec![wt.clone(), mi2h.clone(), i2h.clone(), wt, None],
            vec![mi2h, ww.clone(), ww, i2h, None],
            vec![None, None, None, None, Some(matrix::identity(2))],
        ],
        2,
    )
}

/// Block-diagonal `[[m10, 0], [0, m4]]` in dimension 14.
pub fn embed_14(m10: &QMat, m4: &QMat) -> QMat {
    let mut m = vec![vec![QuadElem::zero(); 14]; 14];
    for i in 0..10 {
        m[i][..10].clone_from_slice(&m10[i]);
    }
    for i in 0..4 {
        m[10 + i][10..].clone_from_slice(&m4[i]);
    }
    m
}

/// The 14-dimensional image of a 10×10 symmetry acting on the first ten coordinates.
pub fn i10(m: &QMat) -> QMat {
    embed_14(m, &matrix::identity(4))
}

pub fn symmetry(name: &str) -> Result<QMat> {
    Ok(match name {
        "W" => w(),
        "M2" => m2(),
        "M2'" => m2_prime(),
        "M2''" => m2_double_prime(),
        "M4" => m4(),
        "M4'" => m4_prime(),
        "M10" => m10(),
        "M10'" => m10_prime(),
        "Mrefl14" => mrefl14(),
        _ => return Err(Error::UnknownName(name.into())),
    })
}

pub const SYMMETRY_NAMES: [&str; 9] = ["W", "M2", "M2'", "M2''", "M4", "M4'", "M10", "M10'", "Mrefl14"];

// ---------------------------------------------------------------------------
// Lookup by name.

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Exact(Rational),
    Float(f64),
}

impl ParamValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ParamValue::Exact(q) => to_f64(q),
            ParamValue::Float(x) => *x,
        }
    }
}

#[derive(Clone, Debug)]
pub enum CatalogItem {
    Lattice(Lattice),
    Glue(GlueSpec),
    Table(Vec<Vec<BigInt>>),
    Matrices(Vec<(String, QMat)>),
}

fn lookup<'a>(params: &'a [(String, ParamValue)], name: &str) -> Option<&'a ParamValue> {
    params.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

fn param_or(params: &[(String, ParamValue)], name: &str, default: i64) -> ParamValue {
    lookup(params, name).cloned().unwrap_or(ParamValue::Exact(int(default)))
}

fn usize_param(params: &[(String, ParamValue)], name: &str) -> Result<usize> {
    match lookup(params, name) {
        Some(ParamValue::Exact(q)) if q.is_integer() && *q > int(0) && *q <= int(64) => {
            Ok(q.to_integer().try_into().unwrap())
        }
        Some(_) => Err(Error::Domain(format!("{name} must be an integer in 1..=64"))),
        None => Err(Error::Usage(format!("missing parameter {name}"))),
    }
}

fn check_known(params: &[(String, ParamValue)], known: &[&str]) -> Result<()> {
    for (n, _) in params {
        if !known.contains(&n.as_str()) {
            return Err(Error::Usage(format!("unknown parameter {n}")));
        }
    }
    Ok(())
}

fn triple(params: &[(String, ParamValue)]) -> [ParamValue; 3] {
    [param_or(params, "a1", 1), param_or(params, "a2", 1), param_or(params, "a3", 1)]
}

pub fn get(name: &str, params: &[(String, ParamValue)]) -> Result<CatalogItem> {
    use CatalogItem as C;
    match name {
        "Z" => {
            check_known(params, &["n"])?;
            Ok(C::Lattice(zn(usize_param(params, "n")?)))
        }
        "D4" => {
            check_known(params, &[])?;
            Ok(C::Lattice(d4()))
        }
        "Dn" => {
            check_known(params, &["n"])?;
            Ok(C::Lattice(dn(usize_param(params, "n")?)?))
        }
        "A2" => {
            check_known(params, &[])?;
            Ok(C::Lattice(hexagonal()))
        }
        "K10p" => Ok(C::Lattice(k10p())),
        "B14" | "B14glue" => {
            check_known(params, &["a"])?;
            let a = param_or(params, "a", 1);
            Ok(match (name, a) {
                ("B14", ParamValue::Exact(a)) => C::Lattice(b14(&a)?),
                ("B14", ParamValue::Float(a)) => C::Lattice(b14_float(a)?),
                (_, ParamValue::Exact(a)) => C::Glue(b14_glue(&a)?),
                (_, ParamValue::Float(a)) => C::Glue(b14_glue_float(a)?),
            })
        }
        "B13" | "B13glue" => {
            check_known(params, &["a1", "a2", "a3"])?;
            let t = triple(params);
            let exact: Option<Vec<Rational>> = t
                .iter()
                .map(|p| match p {
                    ParamValue::Exact(q) => Some(q.clone()),
                    ParamValue::Float(_) => None,
                })
                .collect();
            match (name, exact) {
                ("B13", Some(e)) => Ok(C::Lattice(b13(&e[0], &e[1], &e[2])?)),
                ("B13", None) => Ok(C::Lattice(b13_float(t[0].to_f64(), t[1].to_f64(), t[2].to_f64())?)),
                (_, Some(e)) => Ok(C::Glue(b13_glue(&e[0], &e[1], &e[2])?)),
                (_, None) => Err(Error::Domain("B13glue needs exact scales".into())),
            }
        }
        "B13p" => Ok(C::Lattice(b13_prime())),
        "AppendixA" => Ok(C::Table(appendix_a().into_iter().map(|(i, j, c)| vec![i.into(), j.into(), c]).collect())),
        "B14numerator" => Ok(C::Table(b14_numerator().into_iter().map(|(k, c)| vec![k.into(), c]).collect())),
        "f14" => Ok(C::Table(f14_coefficients().into_iter().map(|(k, c)| vec![k.into(), c]).collect())),
        "AppendixB" => Ok(C::Matrices(
            APPENDIX_B_NAMES
                .iter()
                .map(|n| Ok((n.to_string(), matrix::from_ints(&appendix_b(n)?))))
                .collect::<Result<_>>()?,
        )),
        "symmetries" => Ok(C::Matrices(
            SYMMETRY_NAMES.iter().map(|n| Ok((n.to_string(), symmetry(n)?))).collect::<Result<_>>()?,
        )),
        _ => Err(Error::UnknownName(name.into())),
    }
}

/// Convenience: a catalog entry that must be a lattice (glue specs are glued).
pub fn get_lattice(name: &str, params: &[(String, ParamValue)]) -> Result<Lattice> {
    match get(name, params)? {
        CatalogItem::Lattice(l) => Ok(l),
        CatalogItem::Glue(g) => super::glue(&g),
        _ => Err(Error::Usage(format!("{name} is not a lattice"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::glue::glue_with_order;
    use crate::lattice::Gram;

    #[test]
    fn b14_volume_formula() {
        let a = rat(25, 19);
        let l = b14(&a).unwrap();
        let expect = &(&sqrt3() * &qi(9)) * &q(a.pow(4));
        assert_eq!(l.det_exact().unwrap().abs(), expect);
    }

    #[test]
    fn k10p_gram_is_integral_with_fours() {
        let Gram::Exact(g) = k10p().gram() else { panic!() };
        assert!(matrix::is_integral(&g));
        assert!((0..10).all(|i| g[i][i] == qi(4)));
        assert_eq!(k10p().det_exact().unwrap().abs(), &sqrt3() * &qi(18));
    }

    #[test]
    fn b13_prime_gram_is_rational_with_glue_denominators() {
        let Gram::Exact(g) = b13_prime().gram() else { panic!() };
        // The glue row has norm 3(11/16)² + 5(5/16)² + 5/4 = 101/32.
        assert_eq!(g[12][12], q(rat(101, 32)));
        assert!(matrix::is_integral(&matrix::scale(&g, &qi(32))));
        assert!(g[..12].iter().all(|r| r[..12].iter().all(|x| x.to_rational().is_some_and(|v| v.is_integer()))));
    }

    #[test]
    fn b14_glue_reproduces_catalog_lattice() {
        let a = rat(25, 19);
        let g = glue_with_order(&b14_glue(&a).unwrap()).unwrap();
        assert_eq!(g.group_order, 4);
        let direct = b14(&a).unwrap();
        assert_eq!(g.lattice.det_exact().unwrap().abs(), direct.det_exact().unwrap().abs());
        // Same lattice: each basis expresses the other with integer coordinates.
        for row in direct.exact_rows().unwrap() {
            assert!(crate::lattice::glue::contains(&g.lattice, row).unwrap());
        }
    }

    #[test]
    fn b13_glue_has_order_eight() {
        let g = glue_with_order(&b13_glue(&int(1), &rat(3, 2), &rat(5, 4)).unwrap()).unwrap();
        assert_eq!(g.group_order, 8);
        let direct = b13(&int(1), &rat(3, 2), &rat(5, 4)).unwrap();
        assert_eq!(g.lattice.det_exact().unwrap().abs(), q(rat(3, 2).pow(5) * rat(5, 4)));
        for row in direct.exact_rows().unwrap() {
            assert!(crate::lattice::glue::contains(&g.lattice, row).unwrap());
        }
    }

    #[test]
    fn tables_have_expected_shape() {
        let a = appendix_a();
        assert_eq!(a.len(), 120);
        assert_eq!(a[0], (0, 0, "237032097068933436616799735576002560".parse().unwrap()));
        assert_eq!(b14_numerator().len(), 16);
        assert_eq!(f14_coefficients().len(), 16);
        for n in APPENDIX_B_NAMES {
            let m = appendix_b(n).unwrap();
            let d = if n.ends_with('1') || n.ends_with('2') { 10 } else { 12 };
            assert_eq!(m.len(), d, "{n}");
            assert!(m.iter().all(|r| r.len() == d), "{n}");
        }
    }

    #[test]
    fn symmetry_generators_are_orthogonal() {
        for n in SYMMETRY_NAMES {
            let m = symmetry(n).unwrap();
            let k = if n == "W" { q(rat(1, 4)) } else { qi(1) };
            let p = matrix::mul(&m, &matrix::transpose(&m));
            assert_eq!(p, matrix::scale(&matrix::identity(m.len()), &k), "{n}");
        }
    }

    #[test]
    fn lookup_by_name() {
        let p = vec![("n".to_string(), ParamValue::Exact(int(3)))];
        assert!(matches!(get("Z", &p).unwrap(), CatalogItem::Lattice(l) if l.dim() == 3));
        assert!(matches!(get("nope", &[]), Err(Error::UnknownName(_))));
        let bad = vec![("a".to_string(), ParamValue::Exact(int(-1)))];
        assert!(get("B14", &bad).is_err());
    }
}

//! Plain-text lattice documents.
//!
//! ```text
//! # comments start with '#'
//! name B14
//! field sqrt(3)            # or: field rational | field float
//! family B14
//! param a = 25/19
//! rows:
//! 2 0 ...
//! 1 sqrt(3) ...
//! glue:                    # optional; rows above are then the product basis
//! group whole              # or: group generators
//! component 0..10 scale 1
//! component 10..14 scale a
//! vector 1 0 1 0 1/2 1/2*sqrt(3) 0 0 0 0 a 0 0 0
//! ```
//!
//! Entries are whitespace-separated expressions over integers, decimals,
//! `p/q`, `sqrt(k)`, bound parameters, `+ - * /` and parentheses.

use num_traits::{Signed, Zero};

use super::glue::{GlueComponent, GlueSpec, GlueVectors};
use super::matrix::{FMat, QMat};
use super::{Lattice, Meta, Param, Scale};
use crate::error::{Error, Result};
use crate::exact::quad::sqrt_rational;
use crate::exact::rational::{format_rational, parse_rational, to_f64};
use crate::exact::{QuadElem, Rational};

#[derive(Clone, Debug)]
pub enum Document {
    Lattice(Lattice),
    Glue(GlueSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum FieldKind {
    Exact,
    Float,
}

#[derive(Clone, Debug)]
enum Value {
    Exact(QuadElem),
    Float(f64),
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

struct ExprParser<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
    kind: FieldKind,
    params: &'a [Param],
}

impl<'a> ExprParser<'a> {
    fn fail(&self, msg: &str) -> Error {
        err(self.line, self.col0 + self.pos + 1, msg)
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Value> {
        let v = self.sum()?;
        if self.pos != self.text.len() {
            return Err(self.fail("unexpected character"));
        }
        Ok(v)
    }

    fn sum(&mut self) -> Result<Value> {
        let mut acc = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = self.combine(acc, rhs, c)?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = self.combine(acc, rhs, c)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(match self.unary()? {
                    Value::Exact(x) => Value::Exact(-x),
                    Value::Float(x) => Value::Float(-x),
                })
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.fail("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E')
                {
                    // Exponent signs belong to the literal.
                    let c = self.peek().unwrap();
                    self.pos += 1;
                    if (c == b'e' || c == b'E') && matches!(self.peek(), Some(b'+' | b'-')) {
                        self.pos += 1;
                    }
                }
                let lit = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
                match self.kind {
                    FieldKind::Float => lit.parse::<f64>().map(Value::Float).map_err(|_| self.fail("bad number")),
                    FieldKind::Exact => parse_rational(lit)
                        .map(|q| Value::Exact(QuadElem::rational(q)))
                        .map_err(|_| self.fail("bad number")),
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
                if ident == "sqrt" {
                    if self.peek() != Some(b'(') {
                        return Err(self.fail("expected '(' after sqrt"));
                    }
                    self.pos += 1;
                    let arg = self.sum()?;
                    if self.peek() != Some(b')') {
                        return Err(self.fail("expected ')'"));
                    }
                    self.pos += 1;
                    return match arg {
                        Value::Float(x) if x >= 0.0 => Ok(Value::Float(x.sqrt())),
                        Value::Float(_) => Err(self.fail("square root of a negative number")),
                        Value::Exact(x) => {
                            let r = x.to_rational().ok_or_else(|| self.fail("nested square roots"))?;
                            sqrt_rational(&r).map(Value::Exact).map_err(|e| self.fail(&e.to_string()))
                        }
                    };
                }
                let p = self
                    .params
                    .iter()
                    .find(|p| p.name == ident)
                    .ok_or_else(|| err(self.line, self.col0 + start + 1, format!("unbound parameter {ident}")))?;
                Ok(match (self.kind, &p.exact) {
                    (FieldKind::Exact, Some(q)) => Value::Exact(QuadElem::rational(q.clone())),
                    (FieldKind::Exact, None) => return Err(self.fail("floating parameter in an exact document")),
                    (FieldKind::Float, _) => Value::Float(p.value),
                })
            }
            _ => Err(self.fail("expected a number, sqrt(..), parameter or '('")),
        }
    }

    fn combine(&self, a: Value, b: Value, op: u8) -> Result<Value> {
        match (a, b) {
            (Value::Exact(x), Value::Exact(y)) => {
                QuadElem::check_fields([&x, &y]).map_err(|e| self.fail(&e.to_string()))?;
                Ok(Value::Exact(match op {
                    b'+' => &x + &y,
                    b'-' => &x - &y,
                    b'*' => &x * &y,
                    _ => {
                        if y.is_zero() {
                            return Err(self.fail("division by zero"));
                        }
                        &x / &y
                    }
                }))
            }
            (Value::Float(x), Value::Float(y)) => Ok(Value::Float(match op {
                b'+' => x + y,
                b'-' => x - y,
                b'*' => x * y,
                _ => {
                    if y == 0.0 {
                        return Err(self.fail("division by zero"));
                    }
                    x / y
                }
            })),
            _ => Err(self.fail("mixed exact and floating values")),
        }
    }
}

fn eval(token: &str, line: usize, col: usize, kind: FieldKind, params: &[Param]) -> Result<Value> {
    ExprParser { text: token.as_bytes(), pos: 0, line, col0: col, kind, params }.parse()
}

/// Whitespace-separated tokens with their 0-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

enum Section {
    Header,
    Rows,
    Glue,
}

pub fn parse_lattice_file(text: &str) -> Result<Document> {
    let mut name = String::from("lattice");
    let mut kind = FieldKind::Exact;
    let mut declared_d: Option<u32> = None;
    let mut family: Option<String> = None;
    let mut params: Vec<Param> = Vec::new();
    let mut exact_rows: QMat = Vec::new();
    let mut float_rows: FMat = Vec::new();
    let mut exact_glue: QMat = Vec::new();
    let mut float_glue: FMat = Vec::new();
    let mut components: Vec<GlueComponent> = Vec::new();
    let mut whole_group = true;
    let mut section = Section::Header;
    let mut saw_glue = false;

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let content = raw.split('#').next().unwrap();
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }
        let head = toks[0].1;
        match head {
            "rows:" => {
                section = Section::Rows;
                continue;
            }
            "glue:" => {
                section = Section::Glue;
                saw_glue = true;
                continue;
            }
            _ => {}
        }
        let entries = |toks: &[(usize, &str)]| -> Result<Vec<Value>> {
            toks.iter().map(|(c, t)| eval(t, ln, *c, kind, &params)).collect()
        };
        match section {
            Section::Header => match head {
                "name" if toks.len() == 2 => name = toks[1].1.to_string(),
                "family" if toks.len() == 2 => family = Some(toks[1].1.to_string()),
                "field" if toks.len() == 2 => {
                    let f = toks[1].1;
                    if f == "float" {
                        kind = FieldKind::Float;
                    } else if f == "rational" {
                        kind = FieldKind::Exact;
                    } else if let Some(d) = f.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
                        let d: u32 = d.parse().map_err(|_| err(ln, toks[1].0 + 1, "bad field discriminant"))?;
                        declared_d = Some(d);
                        kind = FieldKind::Exact;
                    } else {
                        return Err(err(ln, toks[1].0 + 1, "unknown field"));
                    }
                }
                "param" => {
                    if toks.len() != 4 || toks[2].1 != "=" {
                        return Err(err(ln, toks[0].0 + 1, "expected: param <name> = <value>"));
                    }
                    let pname = toks[1].1;
                    let col = toks[3].0;
                    let p = match kind {
                        FieldKind::Exact => Param::exact(
                            pname,
                            parse_rational(toks[3].1).map_err(|_| err(ln, col + 1, "parameter must be rational"))?,
                        ),
                        FieldKind::Float => {
                            match eval(toks[3].1, ln, col, kind, &params)? {
                                Value::Float(x) => Param::float(pname, x),
                                Value::Exact(_) => unreachable!(),
                            }
                        }
                    };
                    params.retain(|q| q.name != pname);
                    params.push(p);
                }
                _ => return Err(err(ln, toks[0].0 + 1, format!("unexpected '{head}'"))),
            },
            Section::Rows => {
                let vals = entries(&toks)?;
                push_row(vals, &mut exact_rows, &mut float_rows);
            }
            Section::Glue => match head {
                "group" if toks.len() == 2 => match toks[1].1 {
                    "whole" => whole_group = true,
                    "generators" => whole_group = false,
                    _ => return Err(err(ln, toks[1].0 + 1, "expected 'whole' or 'generators'")),
                },
                "component" => {
                    if toks.len() != 4 || toks[2].1 != "scale" {
                        return Err(err(ln, toks[0].0 + 1, "expected: component i..j scale <expr>"));
                    }
                    let (s, e) = toks[1]
                        .1
                        .split_once("..")
                        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                        .ok_or_else(|| err(ln, toks[1].0 + 1, "bad component range"))?;
                    let scale = match eval(toks[3].1, ln, toks[3].0, kind, &params)? {
                        Value::Exact(x) => Scale::Exact(x),
                        Value::Float(x) => Scale::Float(x),
                    };
                    components.push(GlueComponent { start: s, end: e, scale });
                }
                "vector" => {
                    let vals = entries(&toks[1..])?;
                    push_row(vals, &mut exact_glue, &mut float_glue);
                }
                _ => return Err(err(ln, toks[0].0 + 1, format!("unexpected '{head}' in glue block"))),
            },
        }
    }

    let n = exact_rows.len().max(float_rows.len());
    if n == 0 {
        return Err(err(text.lines().count().max(1), 1, "no rows"));
    }
    let mut lattice = match kind {
        FieldKind::Exact => {
            let d = QuadElem::check_fields(exact_rows.iter().flatten())?;
            if let Some(dd) = declared_d {
                if d != 1 && d != dd {
                    return Err(Error::MixedField(dd, d));
                }
            }
            Lattice::exact(&name, exact_rows)?
        }
        FieldKind::Float => Lattice::float(&name, float_rows)?,
    };
    if let Some(f) = family {
        lattice = lattice.with_meta(Meta { family: f, params: params.clone() });
    } else if !params.is_empty() {
        lattice = lattice.with_meta(Meta { family: String::new(), params: params.clone() });
    }
    if !saw_glue {
        return Ok(Document::Lattice(lattice));
    }
    let glue = match kind {
        FieldKind::Exact => GlueVectors::Exact(exact_glue),
        FieldKind::Float => GlueVectors::Float(float_glue),
    };
    Ok(Document::Glue(GlueSpec { name, product: lattice, components, glue, whole_group }))
}

fn push_row(vals: Vec<Value>, exact: &mut QMat, float: &mut FMat) {
    if matches!(vals.first(), Some(Value::Float(_))) {
        float.push(vals.into_iter().map(|v| if let Value::Float(x) = v { x } else { 0.0 }).collect());
    } else {
        exact.push(vals.into_iter().map(|v| if let Value::Exact(x) = v { x } else { QuadElem::zero() }).collect());
    }
}

/// Exact scalar in the document syntax (no spaces).
pub fn format_quad(x: &QuadElem) -> String {
    let (r, s, d) = (&x.r, &x.s, x.d);
    if s.is_zero() || d == 1 {
        return format_rational(r);
    }
    let irr = if s == &Rational::from_integer(1.into()) {
        format!("sqrt({d})")
    } else if s == &Rational::from_integer((-1).into()) {
        format!("-sqrt({d})")
    } else {
        format!("{}*sqrt({d})", format_rational(s))
    };
    if r.is_zero() {
        irr
    } else if s.is_negative() {
        format!("{}{}", format_rational(r), irr)
    } else {
        format!("{}+{}", format_rational(r), irr)
    }
}

fn format_float(x: f64) -> String {
    // `{:?}` prints the shortest representation that round-trips.
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn scale_text(s: &Scale) -> String {
    match s {
        Scale::Exact(q) => format_quad(q),
        Scale::Float(x) => format_float(*x),
    }
}

fn header(l: &Lattice, out: &mut String) {
    out.push_str(&format!("name {}\n", l.name()));
    match l.field() {
        Some(1) => out.push_str("field rational\n"),
        Some(d) => out.push_str(&format!("field sqrt({d})\n")),
        None => out.push_str("field float\n"),
    }
    if let Some(m) = l.meta() {
        if !m.family.is_empty() {
            out.push_str(&format!("family {}\n", m.family));
        }
        for p in &m.params {
            match &p.exact {
                Some(q) => out.push_str(&format!("param {} = {}\n", p.name, format_rational(q))),
                None if l.is_exact() => {}
                None => out.push_str(&format!("param {} = {}\n", p.name, format_float(p.value))),
            }
        }
    }
}

fn rows_text(l: &Lattice, out: &mut String) {
    out.push_str("rows:\n");
    match l.exact_rows() {
        Some(rows) => {
            for r in rows {
                out.push_str(&r.iter().map(format_quad).collect::<Vec<_>>().join(" "));
                out.push('\n');
            }
        }
        None => {
            for r in l.rows_f64() {
                out.push_str(&r.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(" "));
                out.push('\n');
            }
        }
    }
}

pub fn print_lattice(l: &Lattice) -> String {
    let mut out = String::new();
    header(l, &mut out);
    rows_text(l, &mut out);
    out
}

pub fn print_glue_spec(g: &GlueSpec) -> String {
    let mut out = String::new();
    header(&g.product.clone().with_name(&g.name), &mut out);
    rows_text(&g.product, &mut out);
    out.push_str("glue:\n");
    out.push_str(if g.whole_group { "group whole\n" } else { "group generators\n" });
    for c in &g.components {
        out.push_str(&format!("component {}..{} scale {}\n", c.start, c.end, scale_text(&c.scale)));
    }
    match &g.glue {
        GlueVectors::Exact(vs) => {
            for v in vs {
                out.push_str(&format!("vector {}\n", v.iter().map(format_quad).collect::<Vec<_>>().join(" ")));
            }
        }
        GlueVectors::Float(vs) => {
            for v in vs {
                out.push_str(&format!(
                    "vector {}\n",
                    v.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(" ")
                ));
            }
        }
    }
    out
}

pub fn print_document(doc: &Document) -> String {
    match doc {
        Document::Lattice(l) => print_lattice(l),
        Document::Glue(g) => print_glue_spec(g),
    }
}

/// Float value of a parameter, for diagnostics.
pub fn param_value(p: &Param) -> f64 {
    p.exact.as_ref().map(to_f64).unwrap_or(p.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use crate::lattice::catalog;

    fn lattice(doc: Document) -> Lattice {
        match doc {
            Document::Lattice(l) => l,
            Document::Glue(_) => panic!("expected a lattice"),
        }
    }

    #[test]
    fn identity_document() {
        let l = lattice(parse_lattice_file("rows:\n1 0\n0 1\n").unwrap());
        assert_eq!(l.gram(), catalog::zn(2).gram());
    }

    #[test]
    fn division_by_zero_is_rejected() {
        let e = parse_lattice_file("rows:\n1/0 0\n0 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
    }

    #[test]
    fn syntax_error_reports_column() {
        let e = parse_lattice_file("rows:\n1 0\n0 (1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, column: 5, .. }), "{e:?}");
    }

    #[test]
    fn mixed_fields_are_rejected() {
        assert!(parse_lattice_file("rows:\nsqrt(2) 0\n0 sqrt(3)\n").is_err());
    }

    #[test]
    fn b14_round_trip_and_volume() {
        let l = catalog::b14(&rat(25, 19)).unwrap();
        let text = print_lattice(&l);
        let back = lattice(parse_lattice_file(&text).unwrap());
        assert_eq!(back.exact_rows(), l.exact_rows());
        assert_eq!(print_lattice(&back), text);
        let v = &QuadElem::sqrt_of(3) * &QuadElem::rational(rat(9, 1) * rat(25, 19).pow(4));
        assert_eq!(back.det_exact().unwrap().abs(), v);
    }

    #[test]
    fn parameters_are_substituted() {
        let text = "field sqrt(3)\nparam a = 3/2\nrows:\n2*a 0\n1 sqrt(3)*a\n";
        let l = lattice(parse_lattice_file(text).unwrap());
        let want = &QuadElem::rational(rat(9, 2)) * &QuadElem::sqrt_of(3);
        assert_eq!(l.det_exact().unwrap(), want);
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let l = catalog::b14_float(1.314_224_989_311_070_4).unwrap();
        let back = lattice(parse_lattice_file(&print_lattice(&l)).unwrap());
        assert_eq!(back.rows_f64(), l.rows_f64());
    }

    #[test]
    fn glue_document_round_trip() {
        let g = catalog::b14_glue(&rat(4, 3)).unwrap();
        let text = print_glue_spec(&g);
        let Document::Glue(back) = parse_lattice_file(&text).unwrap() else { panic!() };
        assert_eq!(back.glue, g.glue);
        assert_eq!(print_glue_spec(&back), text);
        let l = crate::lattice::glue(&back).unwrap();
        assert_eq!(l.det_exact().unwrap().abs(), catalog::b14(&rat(4, 3)).unwrap().det_exact().unwrap().abs());
    }
}

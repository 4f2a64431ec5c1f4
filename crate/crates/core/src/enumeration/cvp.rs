//! Depth-first sphere enumeration (Schnorr–Euchner order) on an LLL-reduced basis.
//!
//! With the reduced Gram matrix `G = L Lᵀ` (Cholesky, `L` lower triangular)
//! and the orthonormal rows `Q = L⁻¹ B̂`, a query `x` maps to `y = x Qᵀ` and
//! `‖x − uB̂‖² = ‖y − uL‖²`. Column `k` of `uL` only involves `u_k..u_{n-1}`,
//! so coordinates are fixed from the last one down.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::QuadElem;
use crate::lattice::matrix::{self, FMat, IMat, QMat};
use crate::lattice::{lll_reduce, Gram, Lattice};

/// Default relative tie tolerance on squared distances.
pub const TIE_TOL: f64 = 1e-9;
/// Candidates closer than this (relative) to the minimum but outside the tie
/// tolerance mark the result as degenerate.
pub const DEGENERATE_WINDOW: f64 = 1e-6;

/// All lattice points at minimal distance from a query.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosestSet {
    pub distance2: f64,
    /// Bound on the floating error of `distance2` (zero when resolved exactly).
    pub error_bound: f64,
    /// Integer coordinates in the lattice's own basis, sorted lexicographically.
    pub minimizers: Vec<Vec<i64>>,
    pub degenerate: bool,
    pub exact: bool,
}

/// Exact Gram matrix of the reduced basis as `(R + S√d) / den` with small integers.
#[derive(Clone, Debug)]
pub(crate) struct ExactGram {
    n: usize,
    r: Vec<i128>,
    s: Vec<i128>,
    d: u32,
}

/// An exact norm `(a + b√d)/den` with a shared denominator; compared via [`cmp_quad`].
pub(crate) type ExactNorm = (i128, i128);

impl ExactGram {
    fn new(g: &QMat) -> Option<ExactGram> {
        let n = g.len();
        let d = QuadElem::check_fields(g.iter().flatten()).ok()?;
        let den = g
            .iter()
            .flatten()
            .fold(BigInt::from(1), |acc, x| acc.lcm(x.r.denom()).lcm(x.s.denom()));
        let conv = |q: &num_rational::BigRational| -> Option<i128> {
            (q * num_rational::BigRational::from_integer(den.clone())).to_integer().to_i128()
        };
        let mut r = Vec::with_capacity(n * n);
        let mut s = Vec::with_capacity(n * n);
        for row in g {
            for x in row {
                let rv = conv(&x.r)?;
                let sv = conv(&x.s)?;
                // Keep products of entries with coordinates up to 2^20 inside i128.
                if rv.abs() > 1 << 60 || sv.abs() > 1 << 60 {
                    return None;
                }
                r.push(rv);
                s.push(sv);
            }
        }
        Some(ExactGram { n, r, s, d })
    }

    pub(crate) fn norm(&self, z: &[i64]) -> ExactNorm {
        let n = self.n;
        let (mut a, mut b) = (0i128, 0i128);
        for i in 0..n {
            if z[i] == 0 {
                continue;
            }
            let (mut ra, mut rb) = (0i128, 0i128);
            for j in 0..n {
                let zj = z[j] as i128;
                ra += self.r[i * n + j] * zj;
                rb += self.s[i * n + j] * zj;
            }
            a += ra * z[i] as i128;
            b += rb * z[i] as i128;
        }
        (a, b)
    }

    pub(crate) fn cmp(&self, x: ExactNorm, y: ExactNorm) -> std::cmp::Ordering {
        cmp_quad(x.0 - y.0, x.1 - y.1, self.d)
    }
}

/// Sign of `a + b√d` as an ordering against zero.
fn cmp_quad(a: i128, b: i128, d: u32) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    let sa = a.signum();
    let sb = b.signum();
    if sb == 0 {
        return a.cmp(&0);
    }
    if sa == 0 {
        return sb.cmp(&0);
    }
    if sa == sb {
        return sa.cmp(&0);
    }
    // Opposite signs: compare a² with b²d in big integers.
    let a2 = BigInt::from(a) * BigInt::from(a);
    let b2d = BigInt::from(b) * BigInt::from(b) * BigInt::from(d);
    match a2.cmp(&b2d) {
        Greater => sa.cmp(&0),
        Less => sb.cmp(&0),
        Equal => Equal,
    }
}

/// Per-thread work buffers for the search.
#[derive(Clone, Debug)]
pub struct Scratch {
    u: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    dx: Vec<f64>,
    ddx: Vec<f64>,
    pub y: Vec<f64>,
    pub best: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            u: vec![0.0; n],
            c: vec![0.0; n],
            d: vec![0.0; n + 1],
            dx: vec![0.0; n],
            ddx: vec![0.0; n],
            y: vec![0.0; n],
            best: vec![0.0; n],
        }
    }
}

/// Preprocessed lattice ready for closest-point and ball queries.
#[derive(Clone, Debug)]
pub struct Enumerator {
    n: usize,
    /// Reduced basis `B̂ = T·B` (rows).
    reduced: FMat,
    /// `T` with `B̂ = T·B`; coordinates map back as `u = û·T`.
    t: IMat,
    /// Row-major lower-triangular Cholesky factor of the reduced Gram matrix.
    l: Vec<f64>,
    inv_diag: Vec<f64>,
    /// Orthonormal rows `Q = L⁻¹ B̂`.
    q: FMat,
    exact_rows: Option<QMat>,
    exact_gram: Option<ExactGram>,
    /// `|det|^{2/n}`, the natural squared length scale.
    scale2: f64,
}

impl Enumerator {
    pub fn new(lat: &Lattice) -> Result<Enumerator> {
        let red = lll_reduce(lat);
        let n = lat.dim();
        let reduced = red.lattice.rows_f64();
        let gram = red.lattice.gram();
        let g = gram.to_f64();
        let lm = matrix::cholesky(&g)?;
        let linv = matrix::finverse(&lm)?;
        let q = matrix::fmul(&linv, &reduced);
        let l: Vec<f64> = lm.iter().flatten().copied().collect();
        let inv_diag = (0..n).map(|k| 1.0 / lm[k][k]).collect();
        let exact_gram = match &gram {
            Gram::Exact(g) => ExactGram::new(g),
            Gram::Float(_) => None,
        };
        let scale2 = lat.det_f64().abs().powf(2.0 / n as f64);
        Ok(Enumerator {
            n,
            reduced,
            t: red.transform,
            l,
            inv_diag,
            q,
            exact_rows: red.lattice.exact_rows().cloned(),
            exact_gram,
            scale2,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn reduced_rows(&self) -> &FMat {
        &self.reduced
    }

    pub fn transform(&self) -> &IMat {
        &self.t
    }

    /// Orthonormal frame: a residual `r` in the search frame is `r·Q` in space.
    pub fn frame(&self) -> &FMat {
        &self.q
    }

    pub fn cholesky_row_major(&self) -> &[f64] {
        &self.l
    }

    pub fn scale2(&self) -> f64 {
        self.scale2
    }

    pub(crate) fn exact_gram(&self) -> Option<&ExactGram> {
        self.exact_gram.as_ref()
    }

    /// `y = x Qᵀ`.
    pub fn to_frame(&self, x: &[f64], y: &mut [f64]) {
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = self.q[k].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Frame coordinates of the point `û B̂`, i.e. `û L`.
    pub fn point_in_frame(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in j..n {
                acc += u[i] * self.l[i * n + j];
            }
            *o = acc;
        }
    }

    /// Reduced coordinates to coordinates in the original basis.
    pub fn to_original(&self, u: &[i64]) -> Vec<i64> {
        (0..self.n).map(|j| (0..self.n).map(|i| u[i] * self.t[i][j]).sum()).collect()
    }

    /// Visits every `û` with `‖y − ûL‖² ≤ r2`; the visitor returns the bound to use from then on.
    pub fn search<F: FnMut(&[f64], f64) -> f64>(&self, y: &[f64], mut r2: f64, s: &mut Scratch, mut visit: F) {
        let n = self.n;
        let l = &self.l;
        let Scratch { u, c, d, dx, ddx, .. } = s;
        d[n] = 0.0;
        let mut k = n - 1;
        c[k] = y[k] * self.inv_diag[k];
        u[k] = c[k].round();
        let step = if c[k] >= u[k] { 1.0 } else { -1.0 };
        dx[k] = step;
        ddx[k] = step;
        loop {
            let t = l[k * n + k] * (u[k] - c[k]);
            let nd = d[k + 1] + t * t;
            if nd <= r2 {
                if k == 0 {
                    r2 = visit(u, nd);
                } else {
                    d[k] = nd;
                    k -= 1;
                    let mut acc = y[k];
                    for i in k + 1..n {
                        acc -= u[i] * l[i * n + k];
                    }
                    c[k] = acc * self.inv_diag[k];
                    u[k] = c[k].round();
                    let step = if c[k] >= u[k] { 1.0 } else { -1.0 };
                    dx[k] = step;
                    ddx[k] = step;
                    continue;
                }
            } else {
                k += 1;
                if k == n {
                    break;
                }
            }
            u[k] += dx[k];
            ddx[k] = -ddx[k];
            dx[k] = ddx[k] - dx[k];
        }
    }

    /// One closest point in reduced coordinates (stored in `s.best`) and its squared distance.
    /// `s.y` must hold the query in frame coordinates.
    pub fn nearest_in_frame(&self, s: &mut Scratch) -> f64 {
        let y = std::mem::take(&mut s.y);
        let mut best = std::mem::take(&mut s.best);
        let mut bd = f64::INFINITY;
        self.search(&y, f64::INFINITY, s, |u, nd| {
            if nd < bd {
                bd = nd;
                best.copy_from_slice(u);
            }
            bd
        });
        s.y = y;
        s.best = best;
        bd
    }

    fn candidates(&self, y: &[f64], s: &mut Scratch) -> (f64, Vec<(Vec<f64>, f64)>) {
        let abs = 1e-12 * self.scale2;
        let mut best = f64::INFINITY;
        let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
        self.search(y, f64::INFINITY, s, |u, nd| {
            if nd < best {
                best = nd;
                let lim = best * (1.0 + DEGENERATE_WINDOW) + abs;
                cands.retain(|(_, e)| *e <= lim);
            }
            cands.push((u.to_vec(), nd));
            best * (1.0 + DEGENERATE_WINDOW) + abs
        });
        (best, cands)
    }

    /// All closest points to `x` with a relative tie tolerance on squared distance.
    pub fn closest_points(&self, x: &[f64], tie_tol: f64) -> ClosestSet {
        let mut s = Scratch::new(self.n);
        let mut y = vec![0.0; self.n];
        self.to_frame(x, &mut y);
        let (best, cands) = self.candidates(&y, &mut s);
        let abs = 1e-12 * self.scale2;
        let tie = best * (1.0 + tie_tol) + abs;
        let mut degenerate = false;
        let mut mins = Vec::new();
        for (u, nd) in &cands {
            if *nd <= tie {
                mins.push(self.to_original(&to_i64(u)));
            } else {
                degenerate = true;
            }
        }
        mins.sort();
        ClosestSet {
            distance2: best,
            error_bound: 64.0 * f64::EPSILON * (best + self.scale2),
            minimizers: mins,
            degenerate,
            exact: false,
        }
    }

    /// Closest points to an exact query (in space coordinates), ties resolved exactly.
    pub fn closest_points_exact(&self, x: &[QuadElem]) -> Result<ClosestSet> {
        let rows = self
            .exact_rows
            .as_ref()
            .ok_or_else(|| Error::Usage("exact closest points need an exact lattice".into()))?;
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
        let mut s = Scratch::new(self.n);
        let mut y = vec![0.0; self.n];
        self.to_frame(&xf, &mut y);
        let (best, cands) = self.candidates(&y, &mut s);
        let mut exact: Vec<(Vec<i64>, QuadElem)> = Vec::new();
        for (u, _) in &cands {
            let ui = to_i64(u);
            let mut d2 = QuadElem::zero();
            for j in 0..self.n {
                let mut p = QuadElem::zero();
                for i in 0..self.n {
                    if ui[i] != 0 {
                        p = &p + &(&rows[i][j] * &QuadElem::from_int(ui[i]));
                    }
                }
                let diff = &x[j] - &p;
                d2 = &d2 + &(&diff * &diff);
            }
            exact.push((ui, d2));
        }
        let min = exact.iter().map(|(_, d)| d.clone()).min().expect("nonempty");
        let mut mins: Vec<Vec<i64>> =
            exact.iter().filter(|(_, d)| *d == min).map(|(u, _)| self.to_original(u)).collect();
        mins.sort();
        Ok(ClosestSet { distance2: best, error_bound: 0.0, minimizers: mins, degenerate: false, exact: true })
    }

    /// Minimal vectors of the coset `c·B̂ + 2Λ` (reduced coordinates), with the
    /// tie decision made exactly when an exact Gram matrix is available.
    pub(crate) fn coset_minima(&self, c: &[i64], s: &mut Scratch) -> CosetMinima {
        let n = self.n;
        let half: Vec<f64> = c.iter().map(|&x| x as f64 * 0.5).collect();
        let mut y = vec![0.0; n];
        self.point_in_frame(&half, &mut y);
        let (best, cands) = self.candidates(&y, s);
        let vecs: Vec<(Vec<i64>, f64)> = cands
            .iter()
            .map(|(u, nd)| (c.iter().zip(u).map(|(&ci, &ui)| ci - 2 * ui as i64).collect(), *nd))
            .collect();
        if let Some(g) = &self.exact_gram {
            let norms: Vec<ExactNorm> = vecs.iter().map(|(v, _)| g.norm(v)).collect();
            let mut min = norms[0];
            for &m in &norms[1..] {
                if g.cmp(m, min).is_lt() {
                    min = m;
                }
            }
            let vectors = vecs
                .iter()
                .zip(&norms)
                .filter(|(_, &m)| g.cmp(m, min).is_eq())
                .map(|((v, _), _)| v.clone())
                .collect();
            return CosetMinima { vectors, degenerate: false };
        }
        let abs = 1e-12 * self.scale2;
        let tie = best * (1.0 + TIE_TOL) + abs;
        let mut degenerate = false;
        let mut vectors = Vec::new();
        for (v, nd) in vecs {
            if nd <= tie {
                vectors.push(v);
            } else {
                degenerate = true;
            }
        }
        CosetMinima { vectors, degenerate }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CosetMinima {
    /// Reduced coordinates of the minimal coset vectors.
    pub vectors: Vec<Vec<i64>>,
    pub degenerate: bool,
}

pub(crate) fn to_i64(u: &[f64]) -> Vec<i64> {
    u.iter().map(|&x| x as i64).collect()
}

/// Squared length `‖uB‖²` from original coordinates.
pub fn norm2_of(rows: &FMat, u: &[i64]) -> f64 {
    let n = rows[0].len();
    (0..n)
        .map(|j| {
            let v: f64 = u.iter().zip(rows).map(|(&ui, r)| ui as f64 * r[j]).sum();
            v * v
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use crate::lattice::catalog;

    #[test]
    fn z2_single_and_tie() {
        let e = Enumerator::new(&catalog::zn(2)).unwrap();
        let r = e.closest_points(&[0.4, 2.6], TIE_TOL);
        assert_eq!(r.minimizers, vec![vec![0, 3]]);
        assert!((r.distance2 - 0.32).abs() < 1e-12);
        let t = e.closest_points(&[0.5, 0.0], TIE_TOL);
        assert_eq!(t.minimizers, vec![vec![0, 0], vec![1, 0]]);
        let x = [QuadElem::rational(rat(1, 2)), QuadElem::zero()];
        let ex = e.closest_points_exact(&x).unwrap();
        assert_eq!(ex.minimizers.len(), 2);
    }

    #[test]
    fn d4_deep_hole() {
        let d4 = catalog::d4();
        let e = Enumerator::new(&d4).unwrap();
        let r = e.closest_points(&[0.5; 4], TIE_TOL);
        assert_eq!(r.minimizers.len(), 8);
        assert!((r.distance2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quad_sign() {
        use std::cmp::Ordering::*;
        assert_eq!(cmp_quad(2, -1, 3), Greater); // 2 − √3
        assert_eq!(cmp_quad(1, -1, 3), Less);
        assert_eq!(cmp_quad(-2, 1, 4), Equal);
        assert_eq!(cmp_quad(3, 0, 3), Greater);
    }
}

//! Lattice point enumeration: closest points, balls, theta images, shortest
//! vectors, Voronoi-relevant vectors, the parametric facet test and
//! automorphism checks.

pub mod cvp;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use cvp::{ClosestSet, Enumerator, Scratch, TIE_TOL};

use crate::error::{Error, Result};
use crate::exact::QuadElem;
use crate::lattice::{matrix, Lattice};

/// Default cap on the number of points a ball enumeration may produce.
pub const DEFAULT_POINT_CAP: usize = 20_000_000;
/// Largest dimension accepted by [`relevant_vectors`].
pub const MAX_RELEVANT_DIM: usize = 16;

pub fn closest_points(l: &Lattice, x: &[f64], tie_tol: f64) -> Result<ClosestSet> {
    if x.len() != l.dim() {
        return Err(Error::Usage("query dimension mismatch".into()));
    }
    if !(tie_tol >= 0.0) {
        return Err(Error::Usage("tie tolerance must be nonnegative".into()));
    }
    let e = Enumerator::new(l)?;
    // Dyadic queries on exact lattices are resolved exactly.
    if l.is_exact() && tie_tol > 0.0 {
        let xq: Option<Vec<QuadElem>> = x
            .iter()
            .map(|&v| crate::exact::rational::float_to_rational(v).map(QuadElem::rational))
            .collect();
        if let Some(xq) = xq {
            return e.closest_points_exact(&xq);
        }
    }
    Ok(e.closest_points(x, tie_tol))
}

/// Every nonzero point with `‖uB‖² ≤ r2·(1 + tol)`, both signs, as
/// (original coordinates, squared norm), sorted by norm then coordinates.
pub fn enumerate_ball(l: &Lattice, r2: f64, tol: f64, cap: usize) -> Result<Vec<(Vec<i64>, f64)>> {
    let e = Enumerator::new(l)?;
    enumerate_ball_with(&e, r2, tol, cap)
}

pub fn enumerate_ball_with(e: &Enumerator, r2: f64, tol: f64, cap: usize) -> Result<Vec<(Vec<i64>, f64)>> {
    if !(r2 >= 0.0) {
        return Err(Error::Usage("radius must be nonnegative".into()));
    }
    if r2 == 0.0 {
        return Ok(vec![]);
    }
    let n = e.dim();
    let mut s = Scratch::new(n);
    let y = vec![0.0; n];
    let bound = r2 * (1.0 + tol);
    let mut out: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut overflow = false;
    e.search(&y, bound, &mut s, |u, nd| {
        if u.iter().any(|&x| x != 0.0) {
            if out.len() >= cap {
                overflow = true;
                return -1.0;
            }
            out.push((cvp::to_i64(u), nd));
        }
        bound
    });
    if overflow {
        return Err(Error::Resource(format!("ball enumeration exceeds {cap} points")));
    }
    let mut out: Vec<(Vec<i64>, f64)> = out.into_iter().map(|(u, nd)| (e.to_original(&u), nd)).collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaStep {
    pub r2: f64,
    pub count: usize,
}

/// Cumulative point counts `N(r)` (origin included) at each shell up to `r2_max`.
pub fn theta_image(l: &Lattice, r2_max: f64, shell_tol: f64) -> Result<Vec<ThetaStep>> {
    if !(r2_max > 0.0) {
        return Err(Error::Usage("r2_max must be positive".into()));
    }
    let pts = enumerate_ball(l, r2_max, shell_tol, DEFAULT_POINT_CAP)?;
    Ok(shells(pts.iter().map(|p| p.1), shell_tol))
}

/// Groups sorted norms into shells whose members lie within `tol` (relative) of the shell's first norm.
pub fn shells(norms: impl IntoIterator<Item = f64>, tol: f64) -> Vec<ThetaStep> {
    let mut steps: Vec<ThetaStep> = Vec::new();
    let mut count = 1;
    let mut start = f64::NAN;
    for r in norms {
        if steps.is_empty() || r - start > tol * r {
            start = r;
            steps.push(ThetaStep { r2: r, count: count + 1 });
        } else {
            steps.last_mut().unwrap().count = count + 1;
        }
        count += 1;
    }
    steps
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shortest {
    pub min_norm2: f64,
    pub kissing: usize,
    /// Original coordinates of the minimal vectors.
    pub vectors: Vec<Vec<i64>>,
    pub exact: bool,
}

pub fn shortest_vectors(l: &Lattice) -> Result<Shortest> {
    let e = Enumerator::new(l)?;
    let bound = e.reduced_rows().iter().map(|r| r.iter().map(|x| x * x).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let pts = enumerate_ball_with(&e, bound, 1e-9, DEFAULT_POINT_CAP)?;
    let min = pts.first().map(|p| p.1).ok_or_else(|| Error::Degenerate("no nonzero vectors found".into()))?;
    if let Some(exact) = exact_form(l) {
        let norms: Vec<QuadElem> = pts.iter().map(|(u, _)| exact.norm(u)).collect();
        let m = norms.iter().min().cloned().unwrap();
        let vectors: Vec<Vec<i64>> =
            pts.iter().zip(&norms).filter(|(_, n)| **n == m).map(|(p, _)| p.0.clone()).collect();
        return Ok(Shortest { min_norm2: m.to_f64(), kissing: vectors.len(), vectors, exact: true });
    }
    let vectors: Vec<Vec<i64>> = pts.iter().filter(|p| p.1 <= min * (1.0 + TIE_TOL)).map(|p| p.0.clone()).collect();
    Ok(Shortest { min_norm2: min, kissing: vectors.len(), vectors, exact: false })
}

/// Exact quadratic form `u ↦ uAuᵀ` for exact lattices.
pub struct ExactForm {
    gram: matrix::QMat,
}

impl ExactForm {
    pub fn norm(&self, u: &[i64]) -> QuadElem {
        let n = u.len();
        let mut acc = QuadElem::zero();
        for i in 0..n {
            if u[i] == 0 {
                continue;
            }
            let mut row = QuadElem::zero();
            for j in 0..n {
                if u[j] != 0 {
                    row = &row + &(&self.gram[i][j] * &QuadElem::from_int(u[j]));
                }
            }
            acc = &acc + &(&row * &QuadElem::from_int(u[i]));
        }
        acc
    }
}

/// The exact quadratic form of an exact lattice.
pub fn exact_form(l: &Lattice) -> Option<ExactForm> {
    match l.gram() {
        crate::lattice::Gram::Exact(g) => Some(ExactForm { gram: g }),
        crate::lattice::Gram::Float(_) => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelevantVectors {
    /// Original coordinates, closed under negation, sorted.
    pub vectors: Vec<Vec<i64>>,
    /// Binary cosets (reduced coordinates) whose tie decision was within the degenerate window.
    pub degenerate_cosets: Vec<Vec<i64>>,
    pub exact: bool,
}

impl RelevantVectors {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    /// SHA-256 of the sorted coordinate list.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.vectors {
            for x in v {
                h.update(x.to_le_bytes());
            }
            h.update(b";");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Facet normals of the Voronoi cell: for each nonzero class of `Λ/2Λ`, the
/// class contributes its minimal pair exactly when the minimum is attained by
/// one `±v` pair only.
pub fn relevant_vectors(l: &Lattice) -> Result<RelevantVectors> {
    let e = Enumerator::new(l)?;
    relevant_vectors_with(&e)
}

pub fn relevant_vectors_with(e: &Enumerator) -> Result<RelevantVectors> {
    let n = e.dim();
    if n > MAX_RELEVANT_DIM {
        return Err(Error::Resource(format!("relevant vectors need n <= {MAX_RELEVANT_DIM}")));
    }
    let total: u32 = (1u32 << n) - 1;
    let results: Vec<(Vec<Vec<i64>>, Option<Vec<i64>>)> = (1..=total)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |s, mask| {
                let c: Vec<i64> = (0..n).map(|i| i64::from((mask >> i) & 1 == 1)).collect();
                let m = e.coset_minima(&c, s);
                let flagged = if m.degenerate { Some(c.clone()) } else { None };
                let vs = if m.vectors.len() == 2 {
                    m.vectors.iter().map(|v| e.to_original(v)).collect()
                } else {
                    vec![]
                };
                (vs, flagged)
            },
        )
        .collect();
    let mut vectors = Vec::new();
    let mut degenerate_cosets = Vec::new();
    for (vs, f) in results {
        vectors.extend(vs);
        degenerate_cosets.extend(f);
    }
    vectors.sort();
    Ok(RelevantVectors { vectors, degenerate_cosets, exact: e.exact_gram().is_some() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub label: String,
    pub facets: usize,
    pub digest: String,
    pub degenerate_cosets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseReport {
    pub stable: bool,
    pub points: Vec<PhasePoint>,
}

/// Whether the integer coordinate sets of the relevant vectors agree at every
/// member of a parametric family.
pub fn phase_condition_i(points: &[(String, Lattice)]) -> Result<PhaseReport> {
    if points.is_empty() {
        return Err(Error::Usage("phase test needs at least one point".into()));
    }
    let mut sets: Vec<BTreeSet<Vec<i64>>> = Vec::new();
    let mut out = Vec::new();
    for (label, l) in points {
        let r = relevant_vectors(l)?;
        if !r.degenerate_cosets.is_empty() {
            return Err(Error::Degenerate(format!(
                "{} near-tied cosets at {label}; move the test point away from the boundary",
                r.degenerate_cosets.len()
            )));
        }
        out.push(PhasePoint {
            label: label.clone(),
            facets: r.count(),
            digest: r.digest(),
            degenerate_cosets: r.degenerate_cosets.len(),
        });
        sets.push(r.vectors.into_iter().collect());
    }
    let stable = sets.windows(2).all(|w| w[0] == w[1]);
    Ok(PhaseReport { stable, points: out })
}

/// True when `M` is orthogonal and maps the lattice onto itself (`B M B⁻¹` integral).
pub fn verify_automorphism(l: &Lattice, m: &matrix::QMat) -> Result<bool> {
    let b = l.exact_rows().ok_or_else(|| Error::Usage("automorphism check needs an exact lattice".into()))?;
    let n = b.len();
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Usage("matrix dimension mismatch".into()));
    }
    let field = l.field().unwrap_or(1);
    let mf = QuadElem::check_fields(m.iter().flatten())?;
    if mf != 1 && field != 1 && mf != field {
        return Err(Error::MixedField(field, mf));
    }
    if matrix::mul(m, &matrix::transpose(m)) != matrix::identity(n) {
        return Ok(false);
    }
    let image = matrix::mul(&matrix::mul(b, m), &matrix::inverse(b)?);
    Ok(matrix::is_integral(&image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use crate::lattice::catalog;

    #[test]
    fn z2_ball_and_theta() {
        let z = catalog::zn(2);
        let b = enumerate_ball(&z, 1.0, 1e-9, 100).unwrap();
        assert_eq!(b.len(), 4);
        assert!(enumerate_ball(&z, 0.0, 1e-9, 100).unwrap().is_empty());
        let t = theta_image(&z, 2.0, 1e-9).unwrap();
        assert_eq!(t, vec![ThetaStep { r2: 1.0, count: 5 }, ThetaStep { r2: 2.0, count: 9 }]);
        assert!(matches!(enumerate_ball(&z, 100.0, 0.0, 10), Err(Error::Resource(_))));
    }

    #[test]
    fn zn_shortest_and_relevant() {
        for n in 1..=5 {
            let z = catalog::zn(n);
            let s = shortest_vectors(&z).unwrap();
            assert_eq!((s.min_norm2, s.kissing), (1.0, 2 * n));
            assert_eq!(relevant_vectors(&z).unwrap().count(), 2 * n);
        }
    }

    #[test]
    fn classical_facet_counts() {
        assert_eq!(relevant_vectors(&catalog::hexagonal()).unwrap().count(), 6);
        assert_eq!(relevant_vectors(&catalog::d4()).unwrap().count(), 24);
        assert_eq!(shortest_vectors(&catalog::d4()).unwrap().kissing, 24);
    }

    #[test]
    fn automorphisms_of_b14() {
        let l = catalog::b14(&rat(4, 3)).unwrap();
        assert!(verify_automorphism(&l, &matrix::identity(14)).unwrap());
        assert!(verify_automorphism(&l, &catalog::i10(&catalog::mrefl14())).unwrap());
        assert!(!verify_automorphism(&l, &catalog::i10(&catalog::m10())).unwrap());
        assert!(!verify_automorphism(&l, &catalog::i10(&catalog::m10_prime())).unwrap());
        assert!(verify_automorphism(&l, &catalog::embed_14(&catalog::m10(), &catalog::m4())).unwrap());
        assert!(verify_automorphism(&l, &catalog::embed_14(&catalog::m10_prime(), &catalog::m4_prime())).unwrap());
    }
}

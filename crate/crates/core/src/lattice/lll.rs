//! LLL basis reduction in double precision with a recorded unimodular transform.

use super::matrix::{self, FMat, IMat};
use super::Lattice;

pub const LLL_DELTA: f64 = 0.99;

#[derive(Clone, Debug)]
pub struct Reduced {
    /// Reduced lattice; exact when the input was exact.
    pub lattice: Lattice,
    /// Unimodular `T` with reduced basis `T·B`.
    pub transform: IMat,
}

fn gram_schmidt(b: &FMat) -> (FMat, Vec<f64>) {
    let n = b.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar: FMat = b.clone();
    let mut norms = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let dot: f64 = b[i].iter().zip(&bstar[j]).map(|(x, y)| x * y).sum();
            mu[i][j] = dot / norms[j];
            for k in 0..b[i].len() {
                bstar[i][k] -= mu[i][j] * bstar[j][k];
            }
        }
        norms[i] = bstar[i].iter().map(|x| x * x).sum();
    }
    (mu, norms)
}

/// Reduces `rows` in place and returns `T` with `rows_out = T·rows_in`.
pub fn lll_rows(rows: &mut FMat, delta: f64) -> IMat {
    let n = rows.len();
    let mut t: IMat = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 1_000_000, "LLL failed to terminate");
        // Size reduction of row k against rows k-1..0.
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(rows);
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for c in 0..rows[k].len() {
                    rows[k][c] -= q * rows[j][c];
                }
                for c in 0..n {
                    t[k][c] -= qi * t[j][c];
                }
            }
        }
        let (mu, norms) = gram_schmidt(rows);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            rows.swap(k, k - 1);
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    t
}

pub fn lll_reduce(l: &Lattice) -> Reduced {
    let mut rows = l.rows_f64();
    let t = lll_rows(&mut rows, LLL_DELTA);
    // Rebuilt from the original entries so exact lattices stay exact.
    Reduced { lattice: l.transformed(&t), transform: t }
}

/// Checks the Lovász condition for every consecutive pair.
pub fn is_lll_reduced(rows: &FMat, delta: f64) -> bool {
    let (mu, norms) = gram_schmidt(rows);
    let n = rows.len();
    let size_ok = (0..n).all(|i| (0..i).all(|j| mu[i][j].abs() <= 0.5 + 1e-9));
    let lovasz_ok = (1..n).all(|k| norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] * (1.0 - 1e-12));
    size_ok && lovasz_ok
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(t: &IMat) -> Option<IMat> {
    let q = matrix::inverse(&matrix::from_ints(t)).ok()?;
    let ints = matrix::to_integers(&q)?;
    matrix::big_to_i64(&ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    #[test]
    fn reduces_skewed_plane_basis() {
        let l = Lattice::from_ints("skew", &[vec![1, 0], vec![100, 1]]).unwrap();
        let r = lll_reduce(&l);
        let rows = r.lattice.rows_f64();
        let max = rows.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).fold(0.0, f64::max);
        assert!(max <= 2.0 + 1e-12);
        assert!(is_lll_reduced(&rows, LLL_DELTA));
        assert_eq!(r.lattice.det_f64().abs(), 1.0);
    }

    #[test]
    fn identity_is_unchanged() {
        let z = catalog::zn(4);
        let r = lll_reduce(&z);
        assert_eq!(r.lattice.gram(), z.gram());
    }

    #[test]
    fn transform_is_unimodular() {
        let l = catalog::b14(&crate::exact::rat(25, 19)).unwrap();
        let r = lll_reduce(&l);
        let det = matrix::int_det(&matrix::imat_to_big(&r.transform));
        assert!(det == 1.into() || det == (-1).into());
        assert!(is_lll_reduced(&r.lattice.rows_f64(), LLL_DELTA));
        assert!(unimodular_inverse(&r.transform).is_some());
    }
}

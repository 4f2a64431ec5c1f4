//! Dense matrix helpers: exact over Q(√d), integer, and double precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{QuadElem, Rational};

pub type QMat = Vec<Vec<QuadElem>>;
pub type FMat = Vec<Vec<f64>>;
pub type IMat = Vec<Vec<i64>>;

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { QuadElem::one() } else { QuadElem::zero() }).collect())
        .collect()
}

pub fn from_ints(rows: &[Vec<i64>]) -> QMat {
    rows.iter().map(|r| r.iter().map(|&x| QuadElem::from_int(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mul(a: &[Vec<QuadElem>], b: &[Vec<QuadElem>]) -> QMat {
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut acc = QuadElem::zero();
                    for t in 0..k {
                        if !row[t].is_zero() && !b[t][j].is_zero() {
                            acc = &acc + &(&row[t] * &b[t][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn scale(a: &[Vec<QuadElem>], c: &QuadElem) -> QMat {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

/// Determinant by Gaussian elimination over the field.
pub fn det(a: &[Vec<QuadElem>]) -> QuadElem {
    let n = a.len();
    let mut m: QMat = a.to_vec();
    let mut d = QuadElem::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return QuadElem::zero();
        };
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        let piv = m[col][col].clone();
        d = &d * &piv;
        let inv = piv.inv().expect("nonzero pivot");
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    d
}

/// Inverse by Gauss–Jordan elimination.
pub fn inverse(a: &[Vec<QuadElem>]) -> Result<QMat> {
    let n = a.len();
    let mut m: QMat = a.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::Singular)?;
        m.swap(p, col);
        inv.swap(p, col);
        let pinv = m[col][col].inv()?;
        for c in 0..n {
            m[col][c] = &m[col][c] * &pinv;
            inv[col][c] = &inv[col][c] * &pinv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
                let t = &f * &inv[col][c];
                inv[r][c] = &inv[r][c] - &t;
            }
        }
    }
    Ok(inv)
}

/// Solves `x A = b` for a row vector `x`.
pub fn solve_left(a: &[Vec<QuadElem>], b: &[QuadElem]) -> Result<Vec<QuadElem>> {
    let inv = inverse(a)?;
    Ok(mul(&[b.to_vec()], &inv).remove(0))
}

pub fn to_f64(a: &[Vec<QuadElem>]) -> FMat {
    a.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect()
}

pub fn is_integral(a: &[Vec<QuadElem>]) -> bool {
    a.iter().flatten().all(|x| x.to_rational().is_some_and(|q| q.is_integer()))
}

pub fn to_rationals(a: &[Vec<QuadElem>]) -> Option<Vec<Vec<Rational>>> {
    a.iter().map(|r| r.iter().map(|x| x.to_rational()).collect()).collect()
}

pub fn to_integers(a: &[Vec<QuadElem>]) -> Option<Vec<Vec<BigInt>>> {
    a.iter()
        .map(|r| {
            r.iter()
                .map(|x| x.to_rational().filter(|q| q.is_integer()).map(|q| q.to_integer()))
                .collect()
        })
        .collect()
}

pub fn int_to_quad(a: &[Vec<BigInt>]) -> QMat {
    a.iter()
        .map(|r| r.iter().map(|x| QuadElem::rational(Rational::from_integer(x.clone()))).collect())
        .collect()
}

/// Exact integer determinant (Bareiss fraction-free elimination).
pub fn int_det(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

pub fn imat_to_big(a: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Row-style Hermite normal form of an integer matrix; zero rows dropped.
pub fn hermite_normal_form(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        // Euclid on the column below pivot_row until one nonzero entry remains.
        loop {
            let nz: Vec<usize> = (pivot_row..rows).filter(|&r| !m[r][col].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by_key(|&&r| m[r][col].abs()).unwrap();
            m.swap(pivot_row, best);
            let mut done = true;
            for r in pivot_row + 1..rows {
                if m[r][col].is_zero() {
                    continue;
                }
                let q = m[r][col].div_floor(&m[pivot_row][col]);
                for c in col..cols {
                    let t = &q * &m[pivot_row][c];
                    m[r][c] -= t;
                }
                if !m[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col].is_zero() {
            continue;
        }
        if m[pivot_row][col].is_negative() {
            for c in col..cols {
                m[pivot_row][c] = -&m[pivot_row][c];
            }
        }
        for r in 0..pivot_row {
            let q = m[r][col].div_floor(&m[pivot_row][col]);
            if q.is_zero() {
                continue;
            }
            for c in col..cols {
                let t = &q * &m[pivot_row][c];
                m[r][c] -= t;
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m
}

pub fn fmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> FMat {
    let m = b[0].len();
    a.iter()
        .map(|row| (0..m).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn fidentity(n: usize) -> FMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn fgram(b: &[Vec<f64>]) -> FMat {
    b.iter()
        .map(|r| b.iter().map(|s| r.iter().zip(s).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

/// Lower-triangular `L` with `A = L Lᵀ`.
pub fn cholesky(a: &[Vec<f64>]) -> Result<FMat> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if v <= 0.0 {
                    return Err(Error::Singular);
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Inverse with partial pivoting.
pub fn finverse(a: &[Vec<f64>]) -> Result<FMat> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut inv = fidentity(n);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        if m[p][col] == 0.0 {
            return Err(Error::Singular);
        }
        m.swap(p, col);
        inv.swap(p, col);
        let d = m[col][col];
        for c in 0..n {
            m[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for c in 0..n {
                    m[r][c] -= f * m[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant with partial pivoting.
pub fn fdet(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        if m[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    d
}

pub fn imul(a: &[Vec<i64>], b: &[Vec<i64>]) -> IMat {
    let m = b[0].len();
    a.iter()
        .map(|row| (0..m).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn big_to_i64(a: &[Vec<BigInt>]) -> Option<IMat> {
    a.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_and_det() {
        let q = QuadElem::sqrt_of(3);
        let a = vec![vec![QuadElem::from_int(2), QuadElem::zero()], vec![QuadElem::one(), q.clone()]];
        assert_eq!(det(&a), &QuadElem::from_int(2) * &q);
        let inv = inverse(&a).unwrap();
        assert_eq!(mul(&a, &inv), identity(2));
    }

    #[test]
    fn hnf_of_index_two_sublattice() {
        let m = imat_to_big(&[vec![2, 0], vec![0, 2], vec![1, 1]]);
        let h = hermite_normal_form(&m);
        assert_eq!(h, imat_to_big(&[vec![1, 1], vec![0, 2]]));
    }

    #[test]
    fn bareiss_matches_float() {
        let m = vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(int_det(&imat_to_big(&m)), BigInt::from(4));
        let f: FMat = m.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        assert!((fdet(&f) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let back = fmul(&l, &transpose(&l));
        assert!((back[1][1] - 3.0).abs() < 1e-14);
    }
}

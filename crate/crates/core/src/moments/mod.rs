//! Monte Carlo estimates of the normalized second moment and the second
//! moment matrix, pooled statistics and the isotropy diagnostic.
//!
//! Samples are drawn uniformly from the fundamental parallelepiped of the
//! unit-volume generator. They are grouped into fixed-size blocks; each block
//! has its own ChaCha stream keyed by `(seed, block index)`, so the result
//! does not depend on how blocks are scheduled. Standard errors come from the
//! spread of block means, which also makes common-random-number differences
//! between two lattices straightforward.

pub mod geometry;

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use geometry::{geometry_report, ball_volume, GeometryReport};

use crate::enumeration::{Enumerator, Scratch};
use crate::error::{Error, Result};
use crate::lattice::matrix::FMat;
use crate::lattice::Lattice;

/// Default threshold for every statistical verdict, in standard errors.
pub const Z_THRESHOLD: f64 = 4.0;

const MAX_BLOCK: u64 = 4096;

/// Samples per block for a run of `samples` draws.
pub fn block_size(samples: u64) -> u64 {
    (samples / 256).clamp(1, MAX_BLOCK)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Raw sums over one block of samples, at unit volume.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSums {
    pub count: u64,
    pub norm2: f64,
    /// Packed upper triangle of `Σ e eᵀ`, row by row.
    pub outer: Vec<f64>,
    pub max_norm2: f64,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// A mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `(mean − reference)/stderr`.
    pub fn z(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub lattice: String,
    pub dim: usize,
    pub samples: u64,
    pub seed: u64,
    /// `|det B|` of the lattice as given.
    pub volume: f64,
    pub g_hat: f64,
    pub g_stderr: f64,
    /// Normalized second moment matrix, `E[e eᵀ]/V^{2/n}`.
    pub u_hat: FMat,
    pub u_stderr: FMat,
    /// Largest sampled quantization error, in the lattice's own scale.
    pub max_error: f64,
    #[serde(skip)]
    pub blocks: Vec<BlockSums>,
}

/// A linear functional `Σ w·U_ij` of the second moment matrix.
pub type Functional = [(usize, usize, f64)];

fn block_value(b: &BlockSums, n: usize, f: &Functional) -> f64 {
    f.iter().map(|&(i, j, w)| w * b.outer[packed(n, i, j)]).sum()
}

/// Mean and standard error of per-block totals `t_b` over counts `n_b`.
fn ratio_estimate(totals: &[(f64, u64)]) -> Estimate {
    let mut s = Sum::default();
    let mut count = 0u64;
    for &(t, c) in totals {
        s.add(t);
        count += c;
    }
    let mean = s.value() / count as f64;
    let k = totals.len();
    if k < 2 {
        return Estimate { mean, stderr: f64::NAN };
    }
    let mut v = Sum::default();
    for &(t, c) in totals {
        let d = t - mean * c as f64;
        v.add(d * d);
    }
    let var = v.value() * k as f64 / (k as f64 - 1.0) / (count as f64 * count as f64);
    Estimate { mean, stderr: var.sqrt() }
}

impl MomentReport {
    /// A report carrying a given matrix and per-entry errors but no samples.
    pub fn synthetic(name: &str, u: FMat, stderr: FMat) -> MomentReport {
        let n = u.len();
        let g = (0..n).map(|i| u[i][i]).sum::<f64>() / n as f64;
        let g_stderr = (0..n).map(|i| stderr[i][i] * stderr[i][i]).sum::<f64>().sqrt() / n as f64;
        MomentReport {
            lattice: name.into(),
            dim: n,
            samples: 0,
            seed: 0,
            volume: 1.0,
            g_hat: g,
            g_stderr,
            u_hat: u,
            u_stderr: stderr,
            max_error: f64::NAN,
            blocks: Vec::new(),
        }
    }

    /// `tr(U_hat)/n`; agrees with `g_hat` up to rounding.
    pub fn g_from_trace(&self) -> f64 {
        (0..self.dim).map(|i| self.u_hat[i][i]).sum::<f64>() / self.dim as f64
    }

    /// Estimate of a linear functional of U, with a block-based standard error.
    pub fn functional(&self, f: &Functional) -> Result<Estimate> {
        if self.blocks.is_empty() {
            return Err(Error::Usage("report has no sample blocks".into()));
        }
        let totals: Vec<(f64, u64)> = self.blocks.iter().map(|b| (block_value(b, self.dim, f), b.count)).collect();
        Ok(ratio_estimate(&totals))
    }
}

/// Difference `f(a) − f(b)` of two reports drawn with the same seed and
/// sample count, with the standard error of the paired difference.
pub fn paired_difference(a: &MomentReport, b: &MomentReport, f: &Functional) -> Result<Estimate> {
    if a.seed != b.seed || a.samples != b.samples || a.blocks.len() != b.blocks.len() || a.dim != b.dim {
        return Err(Error::Usage("paired difference needs reports with equal seed, samples and dimension".into()));
    }
    let totals: Vec<(f64, u64)> = a
        .blocks
        .iter()
        .zip(&b.blocks)
        .map(|(x, y)| (block_value(x, a.dim, f) - block_value(y, b.dim, f), x.count))
        .collect();
    Ok(ratio_estimate(&totals))
}

/// The functional `tr(U)/n`, i.e. the NSM.
pub fn nsm_functional(n: usize) -> Vec<(usize, usize, f64)> {
    (0..n).map(|i| (i, i, 1.0 / n as f64)).collect()
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(block);
    rng
}

fn run_block(e: &Enumerator, b: &FMat, seed: u64, block: u64, count: u64) -> BlockSums {
    let n = e.dim();
    let l = e.cholesky_row_major();
    let mut rng = block_rng(seed, block);
    let mut s = Scratch::new(n);
    let mut w = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut outer = vec![0.0; n * (n + 1) / 2];
    let mut norm2 = 0.0;
    let mut max_norm2: f64 = 0.0;
    for _ in 0..count {
        for wi in w.iter_mut() {
            *wi = rng.gen::<f64>();
        }
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = (0..n).map(|i| w[i] * b[i][j]).sum();
        }
        e.to_frame(&x, &mut s.y);
        e.nearest_in_frame(&mut s);
        // Residual in the search frame: y − ûL.
        for j in 0..n {
            let mut p = 0.0;
            for i in j..n {
                p += s.best[i] * l[i * n + j];
            }
            r[j] = s.y[j] - p;
        }
        let mut q = 0.0;
        let mut k = 0;
        for i in 0..n {
            q += r[i] * r[i];
            for j in i..n {
                outer[k] += r[i] * r[j];
                k += 1;
            }
        }
        norm2 += q;
        max_norm2 = max_norm2.max(q);
    }
    // Rotate `Σ r rᵀ` back to the lattice's frame: Qᵀ S Q.
    let qf = e.frame();
    let full: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| outer[packed(n, i, j)]).collect()).collect();
    let mut sq = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let a = full[i][k];
            if a != 0.0 {
                for j in 0..n {
                    sq[i][j] += a * qf[k][j];
                }
            }
        }
    }
    let mut rotated = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        for j in i..n {
            rotated[packed(n, i, j)] = (0..n).map(|k| qf[k][i] * sq[k][j]).sum();
        }
    }
    BlockSums { count, norm2, outer: rotated, max_norm2 }
}

/// Monte Carlo estimate of the NSM; the report also carries the matrix.
pub fn estimate_nsm(l: &Lattice, samples: u64, seed: u64) -> Result<MomentReport> {
    estimate_second_moment_matrix(l, samples, seed)
}

pub fn estimate_second_moment_matrix(l: &Lattice, samples: u64, seed: u64) -> Result<MomentReport> {
    if samples == 0 {
        return Err(Error::Usage("samples must be at least 1".into()));
    }
    let n = l.dim();
    let b = l.unit_volume_rows();
    let unit = Lattice::float(l.name(), b.clone())?;
    let e = Enumerator::new(&unit)?;
    let bs = block_size(samples);
    let nblocks = samples.div_ceil(bs);
    let blocks: Vec<BlockSums> = (0..nblocks)
        .into_par_iter()
        .map(|k| run_block(&e, &b, seed, k, bs.min(samples - k * bs)))
        .collect();

    let nf = n as f64;
    let g = ratio_estimate(&blocks.iter().map(|x| (x.norm2 / nf, x.count)).collect::<Vec<_>>());
    let mut u_hat = vec![vec![0.0; n]; n];
    let mut u_stderr = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let idx = packed(n, i, j);
            let est = ratio_estimate(&blocks.iter().map(|x| (x.outer[idx], x.count)).collect::<Vec<_>>());
            u_hat[i][j] = est.mean;
            u_hat[j][i] = est.mean;
            u_stderr[i][j] = est.stderr;
            u_stderr[j][i] = est.stderr;
        }
    }
    let volume = l.det_f64().abs();
    let max_norm2 = blocks.iter().map(|x| x.max_norm2).fold(0.0, f64::max);
    Ok(MomentReport {
        lattice: l.name().to_string(),
        dim: n,
        samples,
        seed,
        volume,
        g_hat: g.mean,
        g_stderr: g.stderr,
        u_hat,
        u_stderr,
        max_error: max_norm2.sqrt() * volume.powf(1.0 / nf),
        blocks,
    })
}

/// `U − (tr U/n) I`.
pub fn traceless(u: &[Vec<f64>]) -> FMat {
    let n = u.len();
    let t = (0..n).map(|i| u[i][i]).sum::<f64>() / n as f64;
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { u[i][j] - t } else { u[i][j] }).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    /// Frobenius norm of the traceless part.
    pub traceless_norm: f64,
    pub max_abs_z: f64,
    /// Entry `(i, j)` attaining `max_abs_z`.
    pub worst: (usize, usize),
    /// True when every entry of the traceless part is within the threshold.
    pub consistent: bool,
}

impl Diagnostic {
    pub fn verdict(&self) -> &'static str {
        if self.consistent {
            "consistent with local optimality"
        } else {
            "not isotropic"
        }
    }
}

/// Tests whether U is proportional to the identity, entry by entry.
pub fn zamir_feder_diagnostic(r: &MomentReport, threshold: f64) -> Result<Diagnostic> {
    let n = r.dim;
    let ubar = traceless(&r.u_hat);
    let traceless_norm = ubar.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut max_abs_z = 0.0;
    let mut worst = (0, 0);
    for i in 0..n {
        for j in i..n {
            let se = if r.blocks.is_empty() {
                r.u_stderr[i][j]
            } else if i == j {
                let mut f: Vec<(usize, usize, f64)> = (0..n).map(|k| (k, k, -1.0 / n as f64)).collect();
                f[i].2 += 1.0;
                r.functional(&f)?.stderr
            } else {
                r.u_stderr[i][j]
            };
            let z = (ubar[i][j] / se).abs();
            if z > max_abs_z || z.is_nan() {
                max_abs_z = z;
                worst = (i, j);
            }
        }
    }
    Ok(Diagnostic { traceless_norm, max_abs_z, worst, consistent: max_abs_z < threshold })
}

/// A pooled statistic whose expected value is zero when U has the block
/// structure described by the coordinate ranges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PooledStat {
    pub label: String,
    pub estimate: Estimate,
    pub z: f64,
}

/// Pooled block statistics of U.
///
/// Coordinates are split into consecutive `ranges`. Returned are the diagonal
/// mean of every range and the zero-mean statistics: the mean off-diagonal
/// entry within each range, the mean entry between each pair of ranges, and
/// the difference of diagonal means of consecutive ranges. Under the
/// hypothesis `U ∝ I` all of the latter vanish.
pub fn pooled_statistics(r: &MomentReport, ranges: &[Range<usize>]) -> Result<(Vec<(String, Estimate)>, Vec<PooledStat>)> {
    let label = |g: &Range<usize>| format!("[{}..{})", g.start, g.end);
    let diag = |g: &Range<usize>, sign: f64| -> Vec<(usize, usize, f64)> {
        g.clone().map(|i| (i, i, sign / g.len() as f64)).collect()
    };
    let mut means = Vec::new();
    let mut stats = Vec::new();
    let mut push = |name: String, f: Vec<(usize, usize, f64)>| -> Result<()> {
        let e = r.functional(&f)?;
        stats.push(PooledStat { label: name, z: e.z(0.0), estimate: e });
        Ok(())
    };
    for g in ranges {
        if g.end > r.dim || g.is_empty() {
            return Err(Error::Usage(format!("range {} outside dimension {}", label(g), r.dim)));
        }
        means.push((format!("diag {}", label(g)), r.functional(&diag(g, 1.0))?));
    }
    for g in ranges {
        if g.len() > 1 {
            let m = (g.len() * (g.len() - 1) / 2) as f64;
            let f = g.clone().flat_map(|i| (i + 1..g.end).map(move |j| (i, j, 1.0 / m))).collect();
            push(format!("offdiag {}", label(g)), f)?;
        }
    }
    for (a, g) in ranges.iter().enumerate() {
        for h in &ranges[a + 1..] {
            let m = (g.len() * h.len()) as f64;
            let f = g.clone().flat_map(|i| h.clone().map(move |j| (i, j, 1.0 / m))).collect();
            push(format!("cross {}x{}", label(g), label(h)), f)?;
        }
    }
    for w in ranges.windows(2) {
        let mut f = diag(&w[0], 1.0);
        f.extend(diag(&w[1], -1.0));
        push(format!("diag {} - diag {}", label(&w[0]), label(&w[1])), f)?;
    }
    Ok((means, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::lattice::{catalog, Scale};

    #[test]
    fn z1_matches_one_twelfth() {
        let r = estimate_nsm(&catalog::zn(1), 100_000, 1).unwrap();
        assert!((r.g_hat - 1.0 / 12.0).abs() < 4.0 * r.g_stderr, "{} ± {}", r.g_hat, r.g_stderr);
        assert!((r.u_hat[0][0] - r.g_hat).abs() < 1e-15);
        assert!(r.max_error <= 0.5);
    }

    #[test]
    fn deterministic_and_scale_invariant() {
        let l = catalog::dn(4).unwrap();
        let a = estimate_second_moment_matrix(&l, 5000, 7).unwrap();
        let b = estimate_second_moment_matrix(&l, 5000, 7).unwrap();
        assert_eq!(a, b);
        let scaled = l.scaled(&Scale::Exact(rat(7, 3).into())).unwrap();
        let c = estimate_second_moment_matrix(&scaled, 5000, 7).unwrap();
        assert_eq!(a.g_hat.to_bits(), c.g_hat.to_bits());
        let d = estimate_second_moment_matrix(&l, 5000, 8).unwrap();
        assert_ne!(a.g_hat, d.g_hat);
    }

    #[test]
    fn trace_matches_direct_sum() {
        let r = estimate_second_moment_matrix(&catalog::hexagonal(), 20_000, 3).unwrap();
        assert!((r.g_from_trace() - r.g_hat).abs() < 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(r.u_hat[i][j], r.u_hat[j][i]);
            }
        }
    }

    #[test]
    fn synthetic_identity_is_consistent() {
        let u = vec![vec![1.0 / 12.0, 0.0], vec![0.0, 1.0 / 12.0]];
        let se = vec![vec![1e-6; 2]; 2];
        let d = zamir_feder_diagnostic(&MomentReport::synthetic("I", u, se), Z_THRESHOLD).unwrap();
        assert_eq!(d.traceless_norm, 0.0);
        assert!(d.consistent);
    }

    #[test]
    fn packed_index_covers_triangle() {
        let n = 5;
        let mut seen = vec![false; n * (n + 1) / 2];
        for i in 0..n {
            for j in i..n {
                seen[packed(n, i, j)] = true;
                assert_eq!(packed(n, i, j), packed(n, j, i));
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn traceless_is_idempotent() {
        let u = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let t = traceless(&u);
        assert_eq!(t[0][0] + t[1][1], 0.0);
        assert_eq!(traceless(&t), t);
    }
}

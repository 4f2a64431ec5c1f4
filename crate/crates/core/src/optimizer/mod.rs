//! Deterministic descent on the generator driven by Monte Carlo second
//! moments, and optimal scaling of product lattices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::rational::to_f64;
use crate::exact::Rational;
use crate::exact_nsm::epsilon1;
use crate::lattice::matrix::{self, FMat};
use crate::lattice::{catalog, Lattice};
use crate::moments::{self, paired_difference, pooled_statistics, MomentReport, Z_THRESHOLD};

pub use crate::moments::traceless;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `A = I − εŪ`.
    Linear,
    /// `A = exp(−εŪ)`, volume preserving for traceless Ū.
    Exponential,
}

/// Matrix exponential by scaling and squaring of the Taylor series.
pub fn expm(x: &[Vec<f64>]) -> FMat {
    let n = x.len();
    let norm = x.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.5 {
        s += 1;
    }
    let scale = f64::powi(2.0, -s);
    let xs: FMat = x.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut sum = matrix::fidentity(n);
    let mut term = matrix::fidentity(n);
    // ‖X‖ ≤ 1/2: 24 terms leave a remainder far below 1e-16.
    for k in 1..=24 {
        term = matrix::fmul(&term, &xs);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = matrix::fmul(&sum, &sum);
    }
    sum
}

/// The perturbation matrix `A_ε` built from a traceless `Ū`.
pub fn perturbation(ubar: &[Vec<f64>], eps: f64, variant: Variant) -> FMat {
    let n = ubar.len();
    let x: FMat = ubar.iter().map(|r| r.iter().map(|v| -eps * v).collect()).collect();
    match variant {
        Variant::Linear => {
            let mut a = x;
            for (i, row) in a.iter_mut().enumerate().take(n) {
                row[i] += 1.0;
            }
            a
        }
        Variant::Exponential => expm(&x),
    }
}

/// The lattice with generator `B·A`.
pub fn apply(l: &Lattice, a: &[Vec<f64>]) -> Result<Lattice> {
    Lattice::float(l.name(), matrix::fmul(&l.rows_f64(), a))
}

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum StepRule {
    /// Closed-form step zeroing the off-diagonal entry when U has the
    /// 13-dimensional block pattern, else a line search.
    Auto,
    /// Always use this step.
    Fixed(f64),
    /// Three-point parabolic line search with common random numbers.
    LineSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentConfig {
    pub samples: u64,
    pub seed: u64,
    pub max_steps: usize,
    pub rule: StepRule,
    pub variant: Variant,
    pub threshold: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            samples: 1_000_000,
            seed: 1,
            max_steps: 5,
            rule: StepRule::Auto,
            variant: Variant::Linear,
            threshold: Z_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub g_hat: f64,
    pub g_stderr: f64,
    pub max_abs_z: f64,
    /// Step taken after this estimate; `None` when the loop stopped here.
    pub eps: Option<f64>,
    /// How ε was chosen.
    pub rule: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentState {
    #[serde(skip)]
    pub lattice: Lattice,
    pub step_index: usize,
    pub last: MomentReport,
    pub history: Vec<StepRecord>,
    pub verdict: String,
}

/// Pooled projection of U onto the 13-dimensional block pattern: the
/// off-diagonal entry of the first eight coordinates and the two diagonal
/// means, returned as `(α, β, γ)`, together with the largest |z| of the
/// statistics that the pattern says vanish (cross block and the last block's
/// off-diagonal).
pub fn pooled_abg13(r: &MomentReport) -> Result<((moments::Estimate, moments::Estimate, moments::Estimate), f64)> {
    if r.dim != 13 {
        return Err(Error::Usage("block pattern needs dimension 13".into()));
    }
    let (means, stats) = pooled_statistics(r, &[0..8, 8..13])?;
    let find = |label: &str| stats.iter().find(|s| s.label.starts_with(label)).cloned();
    let gamma = find("offdiag [0..8)").unwrap().estimate;
    let residual = ["offdiag [8..13)", "cross"]
        .iter()
        .map(|l| find(l).unwrap().z.abs())
        .fold(0.0, f64::max);
    Ok(((means[1].1, means[0].1, gamma), residual))
}

/// `Ū` of the 13-dimensional block pattern with the given entries.
pub fn pattern13(alpha: f64, beta: f64, gamma: f64) -> FMat {
    let mut u = vec![vec![0.0; 13]; 13];
    for i in 0..13 {
        for j in 0..13 {
            u[i][j] = match (i < 8, j < 8) {
                (true, true) if i == j => beta,
                (true, true) => gamma,
                (false, false) if i == j => alpha,
                _ => 0.0,
            };
        }
    }
    traceless(&u)
}

fn line_search(l: &Lattice, r0: &MomentReport, ubar: &FMat, cfg: &DescentConfig) -> Result<f64> {
    // A natural unit: the step that changes entries of U by their own size.
    let e0 = 1.0 / (2.0 * r0.g_hat);
    let g = |eps: f64| -> Result<f64> {
        let cand = apply(l, &perturbation(ubar, eps, cfg.variant))?;
        let r = moments::estimate_second_moment_matrix(&cand, cfg.samples, cfg.seed)?;
        paired_difference(&r, r0, &moments::nsm_functional(r.dim)).map(|d| d.mean)
    };
    let (g1, g2) = (g(e0)?, g(2.0 * e0)?);
    // Parabola A t² + B t through (0, 0), (1, g1), (2, g2) with t = ε/e0.
    let a = (g2 - 2.0 * g1) / 2.0;
    let b = g1 - a;
    let t = if a > 0.0 {
        -b / (2.0 * a)
    } else if g2 < g1.min(0.0) {
        2.0
    } else if g1 < 0.0 {
        1.0
    } else {
        0.0
    };
    Ok((t * e0).clamp(0.0, 2.0 * e0))
}

/// Refines `l0` by repeated steps `B ← B·A_ε`.
pub fn descend(l0: &Lattice, cfg: &DescentConfig) -> Result<DescentState> {
    if cfg.max_steps == 0 {
        return Err(Error::Usage("max_steps must be at least 1".into()));
    }
    let mut lattice = Lattice::float(l0.name(), l0.rows_f64())?;
    let mut history = Vec::new();
    let mut report = moments::estimate_second_moment_matrix(&lattice, cfg.samples, cfg.seed)?;
    let mut verdict = String::from("step budget exhausted");
    for step in 0..cfg.max_steps {
        let diag = moments::zamir_feder_diagnostic(&report, cfg.threshold)?;
        let mut rec = StepRecord {
            step,
            g_hat: report.g_hat,
            g_stderr: report.g_stderr,
            max_abs_z: diag.max_abs_z,
            eps: None,
            rule: None,
        };
        if diag.consistent {
            history.push(rec);
            verdict = diag.verdict().to_string();
            return Ok(DescentState { lattice, step_index: step, last: report, history, verdict });
        }
        let pattern = if report.dim == 13 {
            let ((a, b, g), resid) = pooled_abg13(&report)?;
            (resid < cfg.threshold).then_some((a.mean, b.mean, g.mean))
        } else {
            None
        };
        let (ubar, eps, rule) = match (cfg.rule, pattern) {
            (StepRule::Fixed(e), _) => (traceless(&report.u_hat), e, "fixed"),
            (StepRule::Auto, Some((a, b, g))) => {
                let q = |x: f64| Rational::from_float(x).ok_or_else(|| Error::Usage("non-finite moment".into()));
                let e = to_f64(&epsilon1(&q(a)?, &q(b)?, &q(g)?)?);
                (pattern13(a, b, g), e, "closed form (block pattern)")
            }
            _ => {
                let ubar = traceless(&report.u_hat);
                let e = line_search(&lattice, &report, &ubar, cfg)?;
                (ubar, e, "line search")
            }
        };
        rec.eps = Some(eps);
        rec.rule = Some(rule.to_string());
        history.push(rec);
        let next = apply(&lattice, &perturbation(&ubar, eps, cfg.variant))?;
        let next_report = moments::estimate_second_moment_matrix(&next, cfg.samples, cfg.seed)?;
        let d = paired_difference(&next_report, &report, &moments::nsm_functional(report.dim))?;
        if d.mean >= 0.0 {
            verdict = "converged at statistical resolution".into();
            return Ok(DescentState { lattice, step_index: step, last: report, history, verdict });
        }
        lattice = next;
        report = next_report;
    }
    let diag = moments::zamir_feder_diagnostic(&report, cfg.threshold)?;
    history.push(StepRecord {
        step: cfg.max_steps,
        g_hat: report.g_hat,
        g_stderr: report.g_stderr,
        max_abs_z: diag.max_abs_z,
        eps: None,
        rule: None,
    });
    if diag.consistent {
        verdict = diag.verdict().to_string();
    }
    Ok(DescentState { lattice, step_index: cfg.max_steps, last: report, history, verdict })
}

/// Least-squares scales `(a₁, a₂, a₃)` of the 13-dimensional family for a
/// generator, with the largest entrywise residual.
pub fn fit_b13_scales(rows: &[Vec<f64>]) -> Result<([f64; 3], f64)> {
    // The generator is linear in the scales.
    let basis: Vec<FMat> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .iter()
        .map(|s| catalog::b13_linear_part(s[0], s[1], s[2]))
        .collect();
    let flat = |m: &FMat| m.iter().flatten().copied().collect::<Vec<f64>>();
    let cols: Vec<Vec<f64>> = basis.iter().map(flat).collect();
    let y = flat(&rows.to_vec());
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut aty = vec![0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            ata[i][j] = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
        }
        aty[i] = cols[i].iter().zip(&y).map(|(a, b)| a * b).sum();
    }
    let inv = matrix::finverse(&ata)?;
    let s: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * aty[j]).sum()).collect();
    let resid = (0..y.len())
        .map(|k| (y[k] - (0..3).map(|i| s[i] * cols[i][k]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    Ok(([s[0], s[1], s[2]], resid))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductScales {
    pub scales: Vec<f64>,
    pub g_product: f64,
}

/// NSM of `a₁Λ₁ × … × a_kΛ_k` from component dimensions, NSMs and volumes.
pub fn product_nsm(components: &[(usize, f64, f64)], scales: &[f64]) -> f64 {
    let n: usize = components.iter().map(|c| c.0).sum();
    let mut log_v = 0.0;
    let mut second = 0.0;
    for (&(ni, gi, vi), &a) in components.iter().zip(scales) {
        let vol = a.powi(ni as i32) * vi;
        log_v += vol.ln();
        second += ni as f64 * gi * vol.powf(2.0 / ni as f64);
    }
    second / (n as f64 * (2.0 * log_v / n as f64).exp())
}

/// Scales equalizing the per-dimension second moment of every component,
/// normalized to unit total volume, and the resulting NSM.
///
/// Components are `(dimension, NSM, volume)`.
pub fn optimal_product_scales(components: &[(usize, f64, f64)]) -> Result<ProductScales> {
    if components.is_empty() {
        return Err(Error::Usage("no components".into()));
    }
    if components.iter().any(|c| c.0 == 0 || !(c.1 > 0.0) || !(c.2 > 0.0)) {
        return Err(Error::Usage("components need positive dimension, NSM and volume".into()));
    }
    // Per-dimension second moment G_i (a_i^{n_i} V_i)^{2/n_i} = a_i² G_i V_i^{2/n_i}.
    let raw: Vec<f64> = components.iter().map(|&(ni, gi, vi)| 1.0 / (gi * vi.powf(2.0 / ni as f64)).sqrt()).collect();
    let n: usize = components.iter().map(|c| c.0).sum();
    let log_v: f64 = components.iter().zip(&raw).map(|(&(ni, _, vi), a)| ni as f64 * a.ln() + vi.ln()).sum();
    let c = (-log_v / n as f64).exp();
    let scales: Vec<f64> = raw.iter().map(|a| a * c).collect();
    let log_g: f64 = components.iter().map(|&(ni, gi, _)| ni as f64 * gi.ln()).sum::<f64>() / n as f64;
    Ok(ProductScales { scales, g_product: log_g.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_nsm::abg13_at_unit;

    #[test]
    fn traceless_of_unit_pattern() {
        let (a, b, g) = abg13_at_unit();
        let (a, b, g) = (to_f64(&a), to_f64(&b), to_f64(&g));
        let u = pattern13(a, b, g);
        let tr: f64 = (0..13).map(|i| u[i][i]).sum();
        assert!(tr.abs() < 1e-16);
        let mean = (5.0 * a + 8.0 * b) / 13.0;
        assert!((u[0][0] - (b - mean)).abs() < 1e-17);
        assert!((u[12][12] - (a - mean)).abs() < 1e-17);
        let lin = perturbation(&u, 7.0, Variant::Linear);
        for i in 0..13 {
            for j in 0..13 {
                let d = if i == j { 1.0 - lin[i][j] } else { -lin[i][j] };
                assert!(d.abs() < 0.0014);
            }
        }
        let ex = perturbation(&u, 7.0, Variant::Exponential);
        assert!((matrix::fdet(&ex) - 1.0).abs() < 1e-12);
        assert_eq!(perturbation(&u, 0.0, Variant::Exponential), matrix::fidentity(13));
    }

    #[test]
    fn product_rule() {
        let p = optimal_product_scales(&[(1, 1.0 / 12.0, 1.0), (1, 1.0 / 12.0, 1.0)]).unwrap();
        assert!((p.scales[0] - p.scales[1]).abs() < 1e-15);
        assert!((p.g_product - 1.0 / 12.0).abs() < 1e-15);
        let comps = [(10, 0.0709, 18.0 * 3f64.sqrt()), (4, 0.0766, 2.0)];
        let p = optimal_product_scales(&comps).unwrap();
        let direct = product_nsm(&comps, &p.scales);
        assert!((direct.ln() - p.g_product.ln()).abs() < 1e-12);
        // Any other scaling is worse.
        let worse = product_nsm(&comps, &[p.scales[0] * 1.01, p.scales[1]]);
        assert!(worse > direct);
    }

    #[test]
    fn fit_recovers_scales() {
        let l = catalog::b13_float(1.1, 0.9, 1.05).unwrap();
        let (s, r) = fit_b13_scales(&l.rows_f64()).unwrap();
        assert!(r < 1e-14);
        assert!((s[0] - 1.1).abs() < 1e-14 && (s[1] - 0.9).abs() < 1e-14 && (s[2] - 1.05).abs() < 1e-14);
    }

    #[test]
    fn square_lattice_is_a_fixed_point() {
        let cfg = DescentConfig { samples: 100_000, ..Default::default() };
        let s = descend(&catalog::zn(2), &cfg).unwrap();
        assert_eq!(s.step_index, 0);
        assert_eq!(s.verdict, "consistent with local optimality");
    }
}

//! Packing, covering and kissing data.

use serde::Serialize;

use crate::enumeration::{exact_form, shortest_vectors};
use crate::error::{Error, Result};
use crate::exact::{rat, BigFloat, Rational};
use crate::lattice::Lattice;

const BITS: u32 = 224;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReport {
    pub lattice: String,
    pub family: Option<String>,
    pub volume: f64,
    /// Packing radius, half the minimal distance.
    pub rho: f64,
    /// Packing density.
    pub delta: f64,
    pub kissing: usize,
    /// Covering radius from the family's closed form.
    pub covering_radius: Option<f64>,
    /// Thickness `vol(Bⁿ(R))/V`.
    pub thickness: Option<f64>,
    /// Largest quantization error seen in a Monte Carlo run; a lower bound on R.
    pub r_lower: f64,
}

/// `vol(Bⁿ(r)) = π^{n/2} rⁿ / Γ(n/2 + 1)`.
pub fn ball_volume(n: usize, r: &BigFloat) -> Result<BigFloat> {
    let bits = r.bits();
    let pi = BigFloat::pi(bits);
    let rn = r.powi(n as i32)?;
    if n % 2 == 0 {
        let k = n / 2;
        let fact: u64 = (1..=k as u64).product();
        pi.powi(k as i32)?.mul(&rn).div(&BigFloat::from_int(fact as i64, bits))
    } else {
        // Γ(n/2 + 1) = n!!·√π / 2^{(n+1)/2}.
        let k = (n - 1) / 2;
        let dfact: u64 = (1..=n as u64).step_by(2).product();
        let num = pi.powi(k as i32)?.mul(&rn).mul(&BigFloat::from_int(1i64 << (k + 1), bits));
        num.div(&BigFloat::from_int(dfact as i64, bits))
    }
}

fn sqrt_f(x: f64) -> Rational {
    crate::exact::rational::float_to_rational(x).unwrap_or_else(|| rat(0, 1))
}

/// Covering radius of the known families, in the lattice's own scale.
fn family_covering_radius(l: &Lattice, family: &str) -> Option<BigFloat> {
    let meta = l.meta();
    let param = |name: &str| -> Option<BigFloat> {
        let p = meta?.param(name)?;
        Some(match &p.exact {
            Some(q) => BigFloat::from_rational(q, BITS),
            None => BigFloat::from_rational(&sqrt_f(p.value), BITS),
        })
    };
    let k = |n: i64| BigFloat::from_int(n, BITS);
    match family {
        "B14" => {
            // √((a² + 3)(3a² + 1)/(6a²))
            let a2 = param("a")?.powi(2).ok()?;
            let num = a2.add(&k(3)).mul(&a2.mul(&k(3)).add(&k(1)));
            num.div(&a2.mul(&k(6))).ok()?.sqrt().ok()
        }
        "B13" => {
            // With a₁ = 1 the radius is √2·√(64a₂⁴ + 48a₂²a₃² − 64a₂² + 9a₃⁴ − 8a₃² + 144)/16;
            // general a₁ follows from B13(a) = a₁·B13(a/a₁).
            let a1 = param("a1")?;
            let v2 = param("a2")?.div(&a1).ok()?.powi(2).ok()?;
            let v3 = param("a3")?.div(&a1).ok()?.powi(2).ok()?;
            let inner = v2
                .mul(&v2)
                .mul(&k(64))
                .add(&v2.mul(&v3).mul(&k(48)))
                .sub(&v2.mul(&k(64)))
                .add(&v3.mul(&v3).mul(&k(9)))
                .sub(&v3.mul(&k(8)))
                .add(&k(144));
            let r = inner.mul(&k(2)).sqrt().ok()?.div(&k(16)).ok()?;
            Some(r.mul(&a1.abs()))
        }
        "Z" => Some(BigFloat::from_int(l.dim() as i64, BITS).sqrt().ok()?.div(&k(2)).ok()?),
        _ => None,
    }
}

/// Geometric summary. `family_hint` overrides the family recorded on the
/// lattice; `samples` draws bound the covering radius from below.
pub fn geometry_report(l: &Lattice, family_hint: Option<&str>, samples: u64, seed: u64) -> Result<GeometryReport> {
    let n = l.dim();
    let short = shortest_vectors(l)?;
    let min_norm2 = match (exact_form(l), short.vectors.first()) {
        (Some(f), Some(v)) => BigFloat::from_quad(&f.norm(v), BITS),
        (_, Some(_)) => BigFloat::from_rational(&sqrt_f(short.min_norm2), BITS),
        _ => return Err(Error::Degenerate("no shortest vector".into())),
    };
    let volume = l.volume(BITS).abs();
    let rho = min_norm2.sqrt()?.div(&BigFloat::from_int(2, BITS))?;
    let delta = ball_volume(n, &rho)?.div(&volume)?;
    let family = family_hint.map(str::to_string).or_else(|| l.meta().map(|m| m.family.clone()));
    let cover = family.as_deref().and_then(|f| family_covering_radius(l, f));
    let thickness = match &cover {
        Some(r) => Some(ball_volume(n, r)?.div(&volume)?.to_f64()),
        None => None,
    };
    let r_lower = if samples > 0 { super::estimate_nsm(l, samples, seed)?.max_error } else { 0.0 };
    Ok(GeometryReport {
        lattice: l.name().to_string(),
        family,
        volume: volume.to_f64(),
        rho: rho.to_f64(),
        delta: delta.to_f64(),
        kissing: short.kissing,
        covering_radius: cover.map(|r| r.to_f64()),
        thickness,
        r_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    #[test]
    fn cube_densities() {
        let hand = [1.0, std::f64::consts::PI / 4.0, std::f64::consts::PI / 6.0];
        for (n, want) in (1..=3).zip(hand) {
            let g = geometry_report(&catalog::zn(n), None, 2000, 1).unwrap();
            assert!((g.delta - want).abs() < 1e-14, "n={n}: {}", g.delta);
            assert!((g.rho - 0.5).abs() < 1e-15);
            assert_eq!(g.kissing, 2 * n);
            assert!(g.r_lower <= g.covering_radius.unwrap() + 1e-12);
        }
    }

    #[test]
    fn ball_volumes() {
        let one = BigFloat::from_int(1, 128);
        let v4 = ball_volume(4, &one).unwrap().to_f64();
        assert!((v4 - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
        let v5 = ball_volume(5, &one).unwrap().to_f64();
        assert!((v5 - 8.0 * std::f64::consts::PI.powi(2) / 15.0).abs() < 1e-14);
    }
}

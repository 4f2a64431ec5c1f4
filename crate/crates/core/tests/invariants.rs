//! Property tests for basis-independence and certificate algebra.

use num_traits::One;
use proptest::prelude::*;

use latquant::equivalence::{lattice_fingerprint, unimodular_det, verify_congruence, CongruenceCertificate};
use latquant::exact::Rational;
use latquant::lattice::matrix::{self, IMat, QMat};
use latquant::lattice::{catalog, Gram, Lattice};

/// Product of elementary operations applied to the identity: always unimodular.
fn unimodular(n: usize) -> impl Strategy<Value = IMat> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 1..8).prop_map(move |ops| {
        let mut u: IMat = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
        for (i, j, k, swap) in ops {
            if i == j {
                continue;
            }
            if swap {
                u.swap(i, j);
            } else {
                let rj = u[j].clone();
                for (x, y) in u[i].iter_mut().zip(rj) {
                    *x += k * y;
                }
            }
        }
        u
    })
}

fn exact_gram(l: &Lattice) -> QMat {
    match l.gram() {
        Gram::Exact(m) => m,
        Gram::Float(_) => panic!("expected an exact Gram matrix"),
    }
}

fn congruent(g: &QMat, u: &IMat) -> QMat {
    let uq = matrix::from_ints(u);
    matrix::mul(&matrix::mul(&uq, g), &matrix::transpose(&uq))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_certificates_verify_both_ways(u in unimodular(4)) {
        prop_assert!(unimodular_det(&u) != 0);
        let g = exact_gram(&catalog::d4());
        let cert = CongruenceCertificate::new(g.clone(), congruent(&g, &u), u, Rational::one());
        prop_assert!(verify_congruence(&cert).unwrap());
        let inv = cert.inverse().unwrap();
        prop_assert!(verify_congruence(&inv).unwrap());
        prop_assert_eq!(inv.inverse().unwrap(), cert);
    }

    #[test]
    fn wrong_scale_is_rejected(u in unimodular(4), k in 2i64..5) {
        let g = exact_gram(&catalog::d4());
        let cert = CongruenceCertificate::new(g.clone(), congruent(&g, &u), u, Rational::from_integer(k.into()));
        prop_assert!(!verify_congruence(&cert).unwrap());
    }

    #[test]
    fn fingerprint_ignores_basis(u in unimodular(4)) {
        let l = catalog::d4();
        let f = lattice_fingerprint(&l, 3).unwrap();
        let g = lattice_fingerprint(&l.transformed(&u), 3).unwrap();
        prop_assert!(f.matches(&g, 1e-9), "{:?} vs {:?}", f, g);
    }

    #[test]
    fn determinant_is_basis_independent(u in unimodular(13)) {
        let l = catalog::b13_prime();
        let d = l.det_f64();
        let t = l.transformed(&u).det_f64();
        prop_assert!((d.abs() - t.abs()).abs() <= 1e-9 * d.abs());
    }
}

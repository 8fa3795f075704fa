use std::f64::consts::TAU;

use hadamard_core::constructions::*;
use hadamard_core::cyclic::*;
use hadamard_core::matrix::{is_hadamard, kron, unitarity_residual, ToleranceSpec};
use hadamard_core::phase_bounds::{factorize, phi_lower_bound};
use hadamard_core::{CMatrix, Complex64};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceSpec {
    ToleranceSpec::uniform(1e-10).unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

#[test]
fn fourier_and_kron() {
    for n in 1..=32 {
        let f = fourier(n);
        assert!(unitarity_residual(&f) < 1e-12, "n={n}");
        assert!(is_hadamard(&f, &tol()));
    }
    for (a, b) in [(2, 3), (4, 4), (3, 5), (8, 8), (2, 16)] {
        assert!(is_hadamard(&kron(&fourier(a), &fourier(b)).unwrap(), &tol()));
    }
    let h2 = kron(&fourier(2), &fourier(2)).unwrap();
    assert!(is_hadamard(&kron(&h2, &fourier(3)).unwrap(), &tol()));
}

#[test]
fn catalog_members_are_hadamard() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let t = r.random_range(0.0..TAU);
        assert!(is_hadamard(&catalog(CatalogId::Dita6, &[t]).unwrap(), &tol()));
    }
    let s = catalog(CatalogId::Sym6, &[]).unwrap();
    assert!(is_hadamard(&s, &tol()) && s.max_abs_diff(&s.transpose()) < 1e-15);
    let h = catalog(CatalogId::Herm6, &[]).unwrap();
    assert!(is_hadamard(&h, &tol()) && h.max_abs_diff(&h.adjoint()) < 1e-15);
}

#[test]
fn conference_matrices_double_to_hadamards() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let w4 = catalog(CatalogId::W4, &[r.random_range(0.0..TAU)]).unwrap();
        let p = [r.random_range(0.0..TAU), r.random_range(0.0..TAU)];
        let w6 = catalog(CatalogId::W6, &p).unwrap();
        for w in [&w4, &w6] {
            let n = w.n() as f64;
            let g = w * &w.adjoint();
            assert!(g.max_abs_diff(&CMatrix::identity(w.n()).scale_re((n - 1.0) / n)) < 1e-10);
            assert!(check_conference(w, &tol()).is_ok());
        }
        let d4 = conference_double(&w4).unwrap();
        let d6 = conference_double(&w6).unwrap();
        assert_eq!((d4.n(), d6.n()), (8, 12));
        assert!(is_hadamard(&d4, &tol()) && is_hadamard(&d6, &tol()));
    }
    assert!(conference_double(&fourier(4)).is_err());
}

#[test]
fn block_constructions() {
    let f2 = fourier(2);
    let f3 = fourier(3);
    let e = elementary_array(&f3, &f3, &[0.0, 0.3, 1.9]).unwrap();
    assert!(is_hadamard(&e, &tol()));
    let w = williamson_array(&f2, &f2, &f2, &f2, &[0.0, 0.4], &[0.0, 1.0], &[0.0, 2.0]).unwrap();
    assert!(is_hadamard(&w, &tol()) && w.n() == 8);
    let g = generalized_product(&f3, &[fourier(2), f2.clone(), f2.conj()]).unwrap();
    assert!(is_hadamard(&g, &tol()) && g.n() == 6);
    assert!(elementary_array(&f3, &f2, &[0.0, 0.0, 0.0]).is_err());
    assert!(elementary_array(&f3, &f3, &[0.1, 0.0, 0.0]).is_err());
    assert_eq!(generalized_product_phase_count(0, &[1, 1, 1], 2), 5);
}

#[test]
fn fourier4_family_catalog() {
    let w = catalog(CatalogId::W4, &[0.5]).unwrap();
    assert!(check_conference(&w, &tol()).is_ok());
    for k in 0..10 {
        assert!(is_hadamard(&hadamard4_family(k as f64), &tol()));
    }
}

#[test]
fn phi_table() {
    let want: [(u64, u32); 5] = [(8, 5), (16, 17), (6, 2), (9, 4), (36, 49)];
    for (n, phi) in want {
        assert_eq!(phi_lower_bound(n).unwrap().phi, BigUint::from(phi), "N={n}");
    }
    for p in (2u64..=97).filter(|&p| factorize(p) == vec![(p, 1)]) {
        assert_eq!(phi_lower_bound(p).unwrap().phi, BigUint::from(0u32), "p={p}");
    }
}

fn gauss_cases() -> Vec<(usize, i64, i64)> {
    let mut out = Vec::new();
    for n in (3..=13).step_by(2) {
        for a in 0..n as i64 {
            if gcd(a, n as i64) != 1 {
                continue;
            }
            for b in 0..n as i64 {
                out.push((n, a, b));
            }
        }
    }
    for n in (2..=12).step_by(2) {
        out.push((n, 1, 0));
    }
    out
}

#[test]
fn biunimodular_iff_circulant_hadamard() {
    let ht = ToleranceSpec::uniform(1e-9).unwrap();
    for (n, a, b) in gauss_cases() {
        let x = gauss_sequence(n, a, b).unwrap();
        let s = 1.0 / (n as f64).sqrt();
        let c = circulant(&x.iter().map(|z| z * s).collect::<Vec<_>>());
        assert!(is_biunimodular(&x, 1e-9), "n={n} a={a} b={b}");
        assert!(is_hadamard(&c, &ht));
        let z = x_to_z(&x).unwrap();
        let worst = cyclic_residuals(&z).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(worst < 1e-10, "n={n}: {worst:e}");
    }
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = r.random_range(2..=8);
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::from_polar(1.0, r.random_range(0.0..TAU))).collect();
        let s = 1.0 / (n as f64).sqrt();
        let c = circulant(&x.iter().map(|z| z * s).collect::<Vec<_>>());
        assert_eq!(is_biunimodular(&x, 1e-9), is_hadamard(&c, &ht));
    }
    // a Fourier row is unimodular but its DFT is a spike
    let x: Vec<Complex64> = fourier(5).row(1).iter().map(|z| z * 5f64.sqrt()).collect();
    assert!(!is_biunimodular(&x, 1e-9));
}

#[test]
fn cyclic_examples() {
    let c = CyclicCandidate::new(vec![Complex64::i(), -Complex64::i()]).unwrap();
    assert!(cyclic_residuals(&c).iter().all(|v| v.norm() < 1e-15));
    let ones = CyclicCandidate::new(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
    let r = cyclic_residuals(&ones);
    assert!((r[0] - 3.0).norm() < 1e-15 && (r[1] - 3.0).norm() < 1e-15 && r[2].norm() < 1e-15);
    assert!(CyclicCandidate::new(vec![Complex64::new(0.0, 0.0)]).is_err());
}

use std::f64::consts::TAU;

use hadamard_core::constructions::{catalog, fourier, hadamard4_family, CatalogId};
use hadamard_core::equivalence::*;
use hadamard_core::matrix::{kron, ToleranceSpec};
use hadamard_core::CMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceSpec {
    ToleranceSpec::uniform(1e-9).unwrap()
}

fn random_transform(r: &mut ChaCha8Rng, n: usize) -> EquivalenceTransform {
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(r);
    cols.shuffle(r);
    EquivalenceTransform::new(
        (0..n).map(|_| r.random_range(0.0..TAU)).collect(),
        (0..n).map(|_| r.random_range(0.0..TAU)).collect(),
        rows,
        cols,
        r.random_bool(0.5),
    )
    .unwrap()
}

#[test]
fn scrambled_matrices_are_recognized() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mats = [
        fourier(3),
        fourier(5),
        hadamard4_family(0.9),
        catalog(CatalogId::Dita6, &[0.3]).unwrap(),
        catalog(CatalogId::Sym6, &[]).unwrap(),
        fourier(6),
    ];
    for m in &mats {
        for _ in 0..5 {
            let t = random_transform(&mut r, m.n());
            let b = apply_transform(m, &t).unwrap();
            let w = equivalent_exhaustive(m, &b, &tol()).unwrap().expect("equivalent");
            assert!(apply_transform(m, &w).unwrap().max_abs_diff(&b) < 1e-9);
            assert_eq!(invariant_fingerprint(m).len(), invariant_fingerprint(&b).len());
            let (fa, fb) = (invariant_fingerprint(m), invariant_fingerprint(&b));
            assert!(fa.iter().zip(&fb).all(|(x, y)| (x - y).abs() < 1e-9));
        }
    }
}

#[test]
fn inequivalent_pairs() {
    let f4 = fourier(4);
    let h22 = kron(&fourier(2), &fourier(2)).unwrap();
    assert!(equivalent_exhaustive(&f4, &h22, &tol()).unwrap().is_none());
    // the order-4 family contains both: τ = π/2 and τ = 0
    assert!(equivalent_exhaustive(&hadamard4_family(TAU / 4.0), &f4, &tol()).unwrap().is_some());
    assert!(equivalent_exhaustive(&hadamard4_family(0.0), &h22, &tol()).unwrap().is_some());
    let f6 = fourier(6);
    let s6 = catalog(CatalogId::Sym6, &[]).unwrap();
    assert!(equivalent_exhaustive(&f6, &s6, &tol()).unwrap().is_none());
}

#[test]
fn dephase_recomposes() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for n in 2..=6 {
        let m = apply_transform(&fourier(n), &random_transform(&mut r, n)).unwrap();
        let d = dephase(&m).unwrap();
        assert!(d.recompose().max_abs_diff(&m) < 1e-14);
        for k in 0..n {
            assert!(d.core[(0, k)].im == 0.0 && d.core[(k, 0)].im == 0.0);
        }
    }
}

#[test]
fn order_limits() {
    let f7 = fourier(7);
    assert!(equivalent_exhaustive(&f7, &f7, &tol()).is_err());
    assert!(equivalent_exhaustive(&fourier(3), &fourier(4), &tol()).is_err());
    assert!(dephase(&CMatrix::zeros(2, 3)).is_err());
}

#[test]
fn transform_json_round_trip() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let t = random_transform(&mut r, 5);
    let s = serde_json::to_string(&t).unwrap();
    let back: EquivalenceTransform = serde_json::from_str(&s).unwrap();
    assert_eq!(t, back);
    let bad = s.replace("\"row_perm\":[", "\"row_perm\":[0,");
    assert!(serde_json::from_str::<EquivalenceTransform>(&bad).is_err());
}

//! Equivalence transforms, dephasing and exhaustive equivalence search.
//!
//! Two matrices are equivalent when one is obtained from the other by
//! rescaling rows and columns with phases, permuting rows and columns, and
//! optionally conjugating every entry.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{cis, CMatrix, ToleranceSpec};

/// Largest order accepted by [`equivalent_exhaustive`].
pub const EXHAUSTIVE_MAX_ORDER: usize = 6;

const DEGENERATE: f64 = 1e-12;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `out_ij = e^{i·l_i} · M'[row_perm[i]][col_perm[j]] · e^{i·r_j}` where
/// `M'` is `M` or its entrywise conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformRepr")]
pub struct EquivalenceTransform {
    pub left_phases: Vec<f64>,
    pub right_phases: Vec<f64>,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub conjugate: bool,
}

#[derive(Deserialize)]
struct TransformRepr {
    left_phases: Vec<f64>,
    right_phases: Vec<f64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    conjugate: bool,
}

impl TryFrom<TransformRepr> for EquivalenceTransform {
    type Error = Error;
    fn try_from(r: TransformRepr) -> Result<Self> {
        EquivalenceTransform::new(r.left_phases, r.right_phases, r.row_perm, r.col_perm, r.conjugate)
    }
}

fn check_perm(p: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &k in p {
        if k >= p.len() || seen[k] {
            return Err(Error::Malformed(format!("{what} is not a permutation of 0..{}", p.len())));
        }
        seen[k] = true;
    }
    Ok(())
}

impl EquivalenceTransform {
    /// Validates lengths and permutations and wraps phases into `[0, 2π)`.
    pub fn new(
        left_phases: Vec<f64>,
        right_phases: Vec<f64>,
        row_perm: Vec<usize>,
        col_perm: Vec<usize>,
        conjugate: bool,
    ) -> Result<Self> {
        let n = row_perm.len();
        for (len, what) in [
            (left_phases.len(), "left_phases"),
            (right_phases.len(), "right_phases"),
            (col_perm.len(), "col_perm"),
        ] {
            if len != n {
                return Err(Error::Malformed(format!("{what} has length {len}, expected {n}")));
            }
        }
        check_perm(&row_perm, "row_perm")?;
        check_perm(&col_perm, "col_perm")?;
        if left_phases.iter().chain(&right_phases).any(|p| !p.is_finite()) {
            return Err(Error::Malformed("non-finite phase".into()));
        }
        Ok(EquivalenceTransform {
            left_phases: left_phases.into_iter().map(wrap_phase).collect(),
            right_phases: right_phases.into_iter().map(wrap_phase).collect(),
            row_perm,
            col_perm,
            conjugate,
        })
    }

    pub fn identity(n: usize) -> Self {
        EquivalenceTransform {
            left_phases: vec![0.0; n],
            right_phases: vec![0.0; n],
            row_perm: (0..n).collect(),
            col_perm: (0..n).collect(),
            conjugate: false,
        }
    }

    pub fn n(&self) -> usize {
        self.row_perm.len()
    }
}

pub fn apply_transform(m: &CMatrix, t: &EquivalenceTransform) -> Result<CMatrix> {
    let n = m.ensure_square()?;
    if t.n() != n {
        return Err(Error::OrderMismatch { expected: n, found: t.n() });
    }
    let l: Vec<Complex64> = t.left_phases.iter().map(|&p| cis(p)).collect();
    let r: Vec<Complex64> = t.right_phases.iter().map(|&p| cis(p)).collect();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let z = m[(t.row_perm[i], t.col_perm[j])];
        let z = if t.conjugate { z.conj() } else { z };
        l[i] * z * r[j]
    }))
}

/// `M = diag(e^{i·d_left}) · core · diag(1, e^{i·d_right})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasedForm {
    pub d_left: Vec<f64>,
    pub core: CMatrix,
    pub d_right: Vec<f64>,
}

impl DephasedForm {
    pub fn recompose(&self) -> CMatrix {
        let l: Vec<Complex64> = self.d_left.iter().map(|&p| cis(p)).collect();
        let r: Vec<Complex64> =
            std::iter::once(Complex64::new(1.0, 0.0)).chain(self.d_right.iter().map(|&p| cis(p))).collect();
        self.core.scale_rows(&l).scale_cols(&r)
    }
}

/// Moves all phases of the first row and column into diagonal factors,
/// leaving a core whose first row and column are real and non-negative.
pub fn dephase(m: &CMatrix) -> Result<DephasedForm> {
    let n = m.ensure_square()?;
    if let Some(i) = (0..n).find(|&i| m[(i, 0)].norm() < DEGENERATE) {
        return Err(Error::DegenerateEntry { axis: "first column", index: i });
    }
    if let Some(j) = (0..n).find(|&j| m[(0, j)].norm() < DEGENERATE) {
        return Err(Error::DegenerateEntry { axis: "first row", index: j });
    }
    let d_left: Vec<f64> = (0..n).map(|i| wrap_phase(m[(i, 0)].arg())).collect();
    let d_right: Vec<f64> = (1..n).map(|j| wrap_phase((m[(0, j)] * cis(-d_left[0])).arg())).collect();
    let mut core = m
        .scale_rows(&d_left.iter().map(|&p| cis(-p)).collect::<Vec<_>>())
        .scale_cols(
            &std::iter::once(Complex64::new(1.0, 0.0))
                .chain(d_right.iter().map(|&p| cis(-p)))
                .collect::<Vec<_>>(),
        );
    for i in 0..n {
        core[(i, 0)] = Complex64::new(m[(i, 0)].norm(), 0.0);
        core[(0, i)] = Complex64::new(m[(0, i)].norm(), 0.0);
    }
    Ok(DephasedForm { d_left, core, d_right })
}

/// Advances `p` to the next permutation in lexicographic order; false when
/// `p` was the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive search for a transform mapping `a` onto `b` entrywise within
/// `tol.eps_unitary`. Orders above [`EXHAUSTIVE_MAX_ORDER`] are refused.
pub fn equivalent_exhaustive(
    a: &CMatrix,
    b: &CMatrix,
    tol: &ToleranceSpec,
) -> Result<Option<EquivalenceTransform>> {
    equivalent_within(a, b, tol.eps_unitary)
}

/// [`equivalent_exhaustive`] with an explicit entrywise tolerance.
///
/// Search order: conjugation flag (false first), then the row of `a` that
/// lands first, then column permutations lexicographically. Remaining rows
/// are matched greedily against the dephased core of `b`. The first witness
/// in this order is returned.
pub fn equivalent_within(a: &CMatrix, b: &CMatrix, eps: f64) -> Result<Option<EquivalenceTransform>> {
    let n = a.ensure_square()?;
    b.ensure_square()?;
    if b.n() != n {
        return Err(Error::OrderMismatch { expected: n, found: b.n() });
    }
    if n > EXHAUSTIVE_MAX_ORDER {
        return Err(Error::SizeLimit(format!(
            "exhaustive equivalence search is limited to n <= {EXHAUSTIVE_MAX_ORDER} (got {n}); \
             compare invariant fingerprints instead"
        )));
    }
    let target = dephase(b)?;
    let core_b = &target.core;
    // dephasing can amplify input perturbations by a small factor
    let match_eps = 4.0 * eps;

    for conjugate in [false, true] {
        let ap = if conjugate { a.conj() } else { a.clone() };
        for r0 in 0..n {
            let mut sigma: Vec<usize> = (0..n).collect();
            loop {
                if let Some(t) = try_match(&ap, core_b, &target, r0, &sigma, conjugate, match_eps) {
                    let image = apply_transform(a, &t)?;
                    if image.max_abs_diff(b) <= eps {
                        return Ok(Some(t));
                    }
                }
                if !next_permutation(&mut sigma) {
                    break;
                }
            }
        }
    }
    Ok(None)
}

fn try_match(
    ap: &CMatrix,
    core_b: &CMatrix,
    target: &DephasedForm,
    r0: usize,
    sigma: &[usize],
    conjugate: bool,
    eps: f64,
) -> Option<EquivalenceTransform> {
    let n = ap.n();
    let c = |i: usize, j: usize| ap[(i, sigma[j])];
    if (0..n).any(|j| c(r0, j).norm() < DEGENERATE) || (0..n).any(|i| c(i, 0).norm() < DEGENERATE) {
        return None;
    }
    let lambda: Vec<f64> = (0..n).map(|i| c(i, 0).arg()).collect();
    let mu: Vec<f64> = (0..n).map(|j| c(r0, j).arg() - lambda[r0]).collect();
    let dephased_row = |k: usize| -> Vec<Complex64> {
        (0..n).map(|j| c(k, j) * cis(-lambda[k] - mu[j])).collect()
    };
    let row_close = |row: &[Complex64], i: usize| row.iter().enumerate().all(|(j, z)| (z - core_b[(i, j)]).norm() <= eps);

    if !row_close(&dephased_row(r0), 0) {
        return None;
    }
    let rows: Vec<Vec<Complex64>> = (0..n).map(dephased_row).collect();
    let mut used = vec![false; n];
    used[r0] = true;
    let mut pi = vec![r0; n];
    for i in 1..n {
        let k = (0..n).find(|&k| !used[k] && row_close(&rows[k], i))?;
        used[k] = true;
        pi[i] = k;
    }
    let left: Vec<f64> = (0..n).map(|i| target.d_left[i] - lambda[pi[i]]).collect();
    let right: Vec<f64> = (0..n)
        .map(|j| if j == 0 { 0.0 } else { target.d_right[j - 1] } - mu[j])
        .collect();
    EquivalenceTransform::new(left, right, pi, sigma.to_vec(), conjugate).ok()
}

/// Sorted real parts and sorted absolute imaginary parts of the invariants
/// `a_ij·a_kl·conj(a_il)·conj(a_kj)`. Equivalent matrices have equal
/// fingerprints, so unequal fingerprints rule equivalence out cheaply.
pub fn invariant_fingerprint(m: &CMatrix) -> Vec<f64> {
    let n = m.n();
    let mut re = Vec::with_capacity(n.pow(4));
    let mut im = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let z = m[(i, j)] * m[(k, l)] * m[(i, l)].conj() * m[(k, j)].conj();
                    re.push(z.re);
                    im.push(z.im.abs());
                }
            }
        }
    }
    re.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    re.extend(im);
    re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{catalog, fourier, CatalogId};
    use crate::matrix::{is_hadamard, ONE};
    use std::f64::consts::PI;

    fn tol() -> ToleranceSpec {
        ToleranceSpec::default()
    }

    #[test]
    fn dephase_fourier_is_trivial() {
        let f = fourier(3);
        let d = dephase(&f).unwrap();
        assert!(d.core.max_abs_diff(&f) < 1e-15);
        assert!(d.d_left.iter().chain(&d.d_right).all(|&p| p == 0.0));
    }

    #[test]
    fn dephase_undoes_row_phase() {
        let f = fourier(3);
        let m = f.scale_rows(&[Complex64::i(), ONE, ONE]);
        let d = dephase(&m).unwrap();
        assert!((d.d_left[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(&d.d_left[1..], &[0.0, 0.0]);
        assert!(d.core.max_abs_diff(&f) < 1e-15);
        assert!(d.recompose().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn dephase_rejects_zero_border() {
        let e = dephase(&CMatrix::identity(2)).unwrap_err();
        assert_eq!(e, Error::DegenerateEntry { axis: "first column", index: 1 });
    }

    #[test]
    fn swap_rows_of_fourier2() {
        let t = EquivalenceTransform::new(vec![0.0; 2], vec![0.0; 2], vec![1, 0], vec![0, 1], false).unwrap();
        let out = apply_transform(&fourier(2), &t).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expect = CMatrix::from_real_rows(&[&[1.0, -1.0], &[1.0, 1.0]], s).unwrap();
        assert!(out.max_abs_diff(&expect) < 1e-15);
        assert!(is_hadamard(&out, &tol()));
        // a column sign flip also does it, and the search tries that first
        let w = equivalent_exhaustive(&fourier(2), &out, &tol()).unwrap().unwrap();
        assert!(apply_transform(&fourier(2), &w).unwrap().max_abs_diff(&out) < 1e-12);
    }

    #[test]
    fn conjugation_is_found() {
        let a = catalog(CatalogId::Dita6, &[0.7]).unwrap();
        let mut tr = EquivalenceTransform::identity(6);
        tr.conjugate = true;
        let c = apply_transform(&a, &tr).unwrap();
        assert!(c.max_abs_diff(&a.conj()) < 1e-15);
        let w = equivalent_exhaustive(&a, &c, &tol()).unwrap().unwrap();
        assert!(apply_transform(&a, &w).unwrap().max_abs_diff(&c) < 1e-9);
    }

    #[test]
    fn identity_witness() {
        let a = catalog(CatalogId::Dita6, &[1.0]).unwrap();
        let w = equivalent_exhaustive(&a, &a, &tol()).unwrap().unwrap();
        assert_eq!(w.row_perm, (0..6).collect::<Vec<_>>());
        assert_eq!(w.col_perm, (0..6).collect::<Vec<_>>());
        assert!(!w.conjugate);
    }

    #[test]
    fn herm6_matches_its_transpose() {
        let h = catalog(CatalogId::Herm6, &[]).unwrap();
        let w = equivalent_exhaustive(&h, &h.transpose(), &tol()).unwrap();
        let w = w.expect("witness");
        assert!(apply_transform(&h, &w).unwrap().max_abs_diff(&h.transpose()) < 1e-10);
    }

    #[test]
    fn inequivalent_pair() {
        // F4 and the real 4x4 Hadamard H2⊗H2 are inequivalent
        let h = crate::matrix::kron(&fourier(2), &fourier(2)).unwrap();
        assert_eq!(equivalent_exhaustive(&fourier(4), &h, &tol()).unwrap(), None);
    }

    #[test]
    fn size_limit() {
        let f = fourier(7);
        assert!(matches!(equivalent_exhaustive(&f, &f, &tol()), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn transform_json() {
        let t = EquivalenceTransform::new(vec![0.5, 7.0], vec![-1.0, 0.0], vec![1, 0], vec![0, 1], true).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<EquivalenceTransform>(&s).unwrap(), t);
        let bad = r#"{"left_phases":[0,0],"right_phases":[0,0],"row_perm":[0,0],"col_perm":[0,1],"conjugate":false}"#;
        assert!(serde_json::from_str::<EquivalenceTransform>(bad).is_err());
    }

    #[test]
    fn permutations_in_order() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn fingerprint_is_invariant() {
        let a = catalog(CatalogId::Sym6, &[]).unwrap();
        let t = EquivalenceTransform::new(
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![3, 1, 4, 0, 5, 2],
            vec![5, 4, 3, 2, 1, 0],
            true,
        )
        .unwrap();
        let b = apply_transform(&a, &t).unwrap();
        let (fa, fb) = (invariant_fingerprint(&a), invariant_fingerprint(&b));
        assert!(fa.iter().zip(&fb).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}

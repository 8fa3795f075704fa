//! Closed-form Hadamard and conference constructions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::cyclic::circulant;
use crate::error::{Error, Result};
use crate::matrix::{cis, unitarity_residual, CMatrix, ToleranceSpec, ONE, ZERO};

/// The Fourier matrix, `F_jk = e^{2πi·jk/n}/√n`.
///
/// # Panics
/// If `n == 0`.
pub fn fourier(n: usize) -> CMatrix {
    assert!(n >= 1, "fourier matrix needs n >= 1");
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        // reduce jk mod n first so large orders keep full accuracy
        let e = (j * k) % n;
        cis(2.0 * PI * e as f64 / n as f64) * s
    })
}

/// The one-parameter order-4 family in dephased form,
/// `½[[1,1,1,1],[1,1,−1,−1],[1,−1,−e^{it},e^{it}],[1,−1,e^{it},−e^{it}]]`.
/// Every order-4 complex Hadamard matrix is equivalent to one of these.
pub fn hadamard4_family(t: f64) -> CMatrix {
    let e = cis(t);
    let m1 = -ONE;
    let rows = vec![
        vec![ONE, ONE, ONE, ONE],
        vec![ONE, ONE, m1, m1],
        vec![ONE, m1, -e, e],
        vec![ONE, m1, e, -e],
    ];
    CMatrix::from_rows(rows).expect("4x4").scale_re(0.5)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The unimodular Gauss sequence of length `n`.
///
/// Odd `n`: `x_k = e^{2πi(ak²+bk)/n}`, requires `gcd(a, n) = 1`.
/// Even `n`: `x_k = e^{iπk²/n}`; `a` and `b` are ignored.
pub fn gauss_sequence(n: usize, a: i64, b: i64) -> Result<Vec<Complex64>> {
    if n < 2 {
        return Err(Error::Domain(format!("gauss sequence needs n >= 2, got {n}")));
    }
    let nn = n as i64;
    if n % 2 == 1 {
        if gcd(a.rem_euclid(nn) as u64, n as u64) != 1 {
            return Err(Error::NotCoprime { a, n });
        }
        Ok((0..nn)
            .map(|k| {
                let e = (a.rem_euclid(nn) * k % nn * k + b.rem_euclid(nn) * k).rem_euclid(nn);
                cis(2.0 * PI * e as f64 / n as f64)
            })
            .collect())
    } else {
        // k² mod 2n keeps the angle in [0, 2π)
        Ok((0..nn).map(|k| cis(PI * ((k * k) % (2 * nn)) as f64 / n as f64)).collect())
    }
}

/// Circulant Hadamard matrix whose first row is the Gauss sequence over `√n`.
pub fn gauss_circulant(n: usize, a: i64, b: i64) -> Result<CMatrix> {
    let s = 1.0 / (n as f64).sqrt();
    let x: Vec<Complex64> = gauss_sequence(n, a, b)?.into_iter().map(|z| z * s).collect();
    Ok(circulant(&x))
}

fn require_unitary(m: &CMatrix, what: &str) -> Result<()> {
    m.ensure_square()
        .map_err(|_| Error::Malformed(format!("{what} must be square")))?;
    let r = unitarity_residual(m);
    if r > ToleranceSpec::default().eps_unitary {
        return Err(Error::NotUnitary { residual: r });
    }
    Ok(())
}

fn require_same_order(expected: usize, m: &CMatrix) -> Result<()> {
    if m.n() != expected || !m.is_square() {
        return Err(Error::OrderMismatch { expected, found: m.n() });
    }
    Ok(())
}

fn dressing(d: &[f64], m: usize) -> Result<Vec<Complex64>> {
    if d.len() != m {
        return Err(Error::ParamCount { expected: m, found: d.len() });
    }
    if d[0] != 0.0 {
        return Err(Error::Domain(format!("phase vector must start with 0, found {}", d[0])));
    }
    Ok(d.iter().map(|&p| cis(p)).collect())
}

/// `(1/√2)[[A, B₁], [A, −B₁]]` with `B₁ = diag(e^{i·d})·B`.
pub fn elementary_array(a: &CMatrix, b: &CMatrix, d: &[f64]) -> Result<CMatrix> {
    let m = a.n();
    require_same_order(m, b)?;
    require_unitary(a, "A")?;
    require_unitary(b, "B")?;
    let b1 = b.scale_rows(&dressing(d, m)?);
    let mut out = CMatrix::zeros(2 * m, 2 * m);
    out.set_block(0, 0, a);
    out.set_block(0, m, &b1);
    out.set_block(m, 0, a);
    out.set_block(m, m, &-&b1);
    Ok(out.scale_re(std::f64::consts::FRAC_1_SQRT_2))
}

/// Free phases of [`elementary_array`] when `A`, `B` carry `p` and `q`.
pub fn elementary_array_phase_count(m: usize, p: usize, q: usize) -> usize {
    p + q + m.saturating_sub(1)
}

/// The 4m-dimensional sign array
/// `½[[A, B, C, D], [A, −B, C, −D], [A, B, −C, −D], [A, −B, −C, D]]`
/// with `B`, `C`, `D` row-dressed by their phase vectors.
#[allow(clippy::too_many_arguments)]
pub fn williamson_array(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    d: &CMatrix,
    db: &[f64],
    dc: &[f64],
    dd: &[f64],
) -> Result<CMatrix> {
    let m = a.n();
    for blk in [b, c, d] {
        require_same_order(m, blk)?;
    }
    for (blk, name) in [(a, "A"), (b, "B"), (c, "C"), (d, "D")] {
        require_unitary(blk, name)?;
    }
    let blocks = [
        a.clone(),
        b.scale_rows(&dressing(db, m)?),
        c.scale_rows(&dressing(dc, m)?),
        d.scale_rows(&dressing(dd, m)?),
    ];
    const SIGNS: [[f64; 4]; 4] =
        [[1., 1., 1., 1.], [1., -1., 1., -1.], [1., 1., -1., -1.], [1., -1., -1., 1.]];
    let mut out = CMatrix::zeros(4 * m, 4 * m);
    for (i, row) in SIGNS.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            out.set_block(i * m, j * m, &blocks[j].scale_re(0.5 * s));
        }
    }
    Ok(out)
}

/// Free phases of [`williamson_array`] for block phase counts `p, q, r, s`.
pub fn williamson_phase_count(m: usize, p: usize, q: usize, r: usize, s: usize) -> usize {
    p + q + r + s + 3 * m.saturating_sub(1)
}

/// Block matrix with block `(i, j)` equal to `m_ij · N_j`.
pub fn generalized_product(m: &CMatrix, blocks: &[CMatrix]) -> Result<CMatrix> {
    let order = m.ensure_square()?;
    if blocks.len() != order {
        return Err(Error::ParamCount { expected: order, found: blocks.len() });
    }
    let p = blocks[0].n();
    for blk in blocks {
        require_same_order(p, blk)?;
        require_unitary(blk, "N block")?;
    }
    let size = order * p;
    if size > crate::matrix::MAX_ORDER {
        return Err(Error::Size { order: size, max: crate::matrix::MAX_ORDER });
    }
    let mut out = CMatrix::zeros(size, size);
    for i in 0..order {
        for (j, blk) in blocks.iter().enumerate() {
            out.set_block(i * p, j * p, &blk.scale(m[(i, j)]));
        }
    }
    Ok(out)
}

/// Free phases of [`generalized_product`]: the outer matrix keeps its
/// `outer` phases, the first block its own, and every further block its own
/// plus `p − 1` from a left diagonal dressing.
pub fn generalized_product_phase_count(outer: usize, block_counts: &[usize], p: usize) -> usize {
    let mut total = outer;
    for (i, &c) in block_counts.iter().enumerate() {
        total += c;
        if i > 0 {
            total += p.saturating_sub(1);
        }
    }
    total
}

/// Checks the complex conference conditions: zero diagonal, off-diagonal
/// moduli `1/√n`, `W·W* = ((n−1)/n)·I`.
pub fn check_conference(w: &CMatrix, tol: &ToleranceSpec) -> Result<()> {
    let n = w.ensure_square()?;
    if n < 2 {
        return Err(Error::ConferenceViolation("order must be at least 2".into()));
    }
    let target = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        for j in 0..n {
            let z = w[(i, j)].norm();
            if i == j && z > tol.eps_modulus {
                return Err(Error::ConferenceViolation(format!(
                    "diagonal entry ({i}, {i}) has modulus {z:e}, expected 0"
                )));
            }
            if i != j && (z - target).abs() > tol.eps_modulus {
                return Err(Error::ConferenceViolation(format!(
                    "off-diagonal entry ({i}, {j}) has modulus {z}, expected {target}"
                )));
            }
        }
    }
    let gram = w * &w.adjoint();
    let expect = CMatrix::identity(n).scale_re((n as f64 - 1.0) / n as f64);
    let r = gram.max_abs_diff(&expect);
    if r > tol.eps_unitary {
        return Err(Error::ConferenceViolation(format!("max |W W* - (n-1)/n I| = {r:e}")));
    }
    Ok(())
}

/// `M_{2n} = (1/√2)[[W + I/√n, W* − I/√n], [W − I/√n, −W* − I/√n]]`.
pub fn conference_double(w: &CMatrix) -> Result<CMatrix> {
    check_conference(w, &ToleranceSpec::default())?;
    let n = w.n();
    let shift = CMatrix::identity(n).scale_re(1.0 / (n as f64).sqrt());
    let ws = w.adjoint();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.set_block(0, 0, &(w + &shift));
    out.set_block(0, n, &(&ws - &shift));
    out.set_block(n, 0, &(w - &shift));
    out.set_block(n, n, &(&-&ws - &shift));
    Ok(out.scale_re(std::f64::consts::FRAC_1_SQRT_2))
}

/// Fixed matrices shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogId {
    /// One-phase order-6 family.
    Dita6,
    /// Symmetric order-6 Hadamard matrix.
    Sym6,
    /// Hermitian order-6 Hadamard matrix.
    Herm6,
    /// One-phase order-4 conference matrix.
    W4,
    /// Two-phase order-6 conference matrix.
    W6,
}

impl CatalogId {
    pub const ALL: [CatalogId; 5] =
        [CatalogId::Dita6, CatalogId::Sym6, CatalogId::Herm6, CatalogId::W4, CatalogId::W6];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogId::Dita6 => "dita6",
            CatalogId::Sym6 => "sym6",
            CatalogId::Herm6 => "herm6",
            CatalogId::W4 => "w4",
            CatalogId::W6 => "w6",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            CatalogId::Dita6 | CatalogId::W4 => 1,
            CatalogId::Sym6 | CatalogId::Herm6 => 0,
            CatalogId::W6 => 2,
        }
    }

    pub fn order(self) -> usize {
        match self {
            CatalogId::W4 => 4,
            _ => 6,
        }
    }

    /// Conference (not Hadamard) matrices.
    pub fn is_conference(self) -> bool {
        matches!(self, CatalogId::W4 | CatalogId::W6)
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownCatalogId(s.to_string()))
    }
}

/// Looks up a catalog matrix by its string id.
pub fn catalog_matrix(id: &str, params: &[f64]) -> Result<CMatrix> {
    catalog(id.parse()?, params)
}

pub fn catalog(id: CatalogId, params: &[f64]) -> Result<CMatrix> {
    if params.len() != id.param_count() {
        return Err(Error::ParamCount { expected: id.param_count(), found: params.len() });
    }
    if let Some(p) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::Domain(format!("phase {p} is not finite")));
    }
    let i = Complex64::i();
    let m1 = -ONE;
    let mi = -i;
    match id {
        CatalogId::Dita6 => {
            let e = cis(params[0]);
            let ec = e.conj();
            rows6(
                [
                    [ONE, ONE, ONE, ONE, ONE, ONE],
                    [ONE, m1, i, mi, mi, i],
                    [ONE, i, m1, e, -e, mi],
                    [ONE, mi, -ec, m1, i, ec],
                    [ONE, mi, ec, i, m1, -ec],
                    [ONE, i, mi, -e, e, m1],
                ],
                6,
            )
        }
        CatalogId::Sym6 => rows6(
            [
                [ONE, ONE, ONE, ONE, ONE, ONE],
                [ONE, m1, m1, ONE, i, mi],
                [ONE, m1, mi, m1, ONE, i],
                [ONE, ONE, m1, mi, m1, i],
                [ONE, i, ONE, m1, m1, mi],
                [ONE, mi, i, i, mi, m1],
            ],
            6,
        ),
        CatalogId::Herm6 => rows6(
            [
                [ONE, ONE, ONE, ONE, ONE, ONE],
                [ONE, m1, i, i, mi, mi],
                [ONE, mi, m1, ONE, m1, i],
                [ONE, mi, ONE, m1, i, m1],
                [ONE, i, m1, mi, ONE, m1],
                [ONE, i, mi, m1, m1, ONE],
            ],
            6,
        ),
        CatalogId::W4 => {
            let e = cis(params[0]);
            let rows = vec![
                vec![ZERO, ONE, ONE, ONE],
                vec![ONE, ZERO, -e, e],
                vec![ONE, e, ZERO, -e],
                vec![ONE, -e, e, ZERO],
            ];
            Ok(CMatrix::from_rows(rows)?.scale_re(0.5))
        }
        CatalogId::W6 => {
            let (al, be) = (params[0], params[1]);
            let a = cis(al);
            let amb = cis(al - be);
            let apb = cis(al + be);
            rows6(
                [
                    [ZERO, ONE, ONE, ONE, ONE, ONE],
                    [ONE, ZERO, -a, -a, a, a],
                    [ONE, -a, ZERO, a, -amb, amb],
                    [ONE, -a, a, ZERO, amb, -amb],
                    [ONE, a, -apb, apb, ZERO, -a],
                    [ONE, a, apb, -apb, -a, ZERO],
                ],
                6,
            )
        }
    }
}

fn rows6(rows: [[Complex64; 6]; 6], n: usize) -> Result<CMatrix> {
    let m = CMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())?;
    Ok(m.scale_re(1.0 / (n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_hadamard, is_unitary, kron};

    fn tol() -> ToleranceSpec {
        ToleranceSpec::default()
    }

    #[test]
    fn order4_family_is_hadamard() {
        let tol = ToleranceSpec::default();
        for k in 0..20 {
            let h = hadamard4_family(0.37 * k as f64);
            assert!(is_hadamard(&h, &tol));
            assert!((h[(2, 2)] + cis(0.37 * k as f64).scale(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn small_fouriers() {
        assert_eq!(fourier(1), CMatrix::identity(1));
        let h2 = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]], 1.0 / 2f64.sqrt()).unwrap();
        assert!(fourier(2).max_abs_diff(&h2) < 1e-15);
        assert!(is_hadamard(&fourier(5), &tol()));
    }

    #[test]
    fn gauss_examples() {
        let g2 = gauss_circulant(2, 0, 0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((g2[(0, 1)] - Complex64::new(0.0, s)).norm() < 1e-15);
        assert!(is_hadamard(&g2, &tol()));
        assert!(is_hadamard(&gauss_circulant(3, 1, 0).unwrap(), &tol()));
        let g4 = gauss_circulant(4, 0, 0).unwrap();
        let expect = [ONE, cis(PI / 4.0), -ONE, cis(PI / 4.0)];
        for (k, z) in expect.iter().enumerate() {
            assert!((g4[(0, k)] - z * 0.5).norm() < 1e-15);
        }
        assert!(is_hadamard(&g4, &tol()));
        assert_eq!(gauss_circulant(9, 3, 1), Err(Error::NotCoprime { a: 3, n: 9 }));
    }

    #[test]
    fn elementary_array_cases() {
        let f2 = fourier(2);
        let e = elementary_array(&f2, &f2, &[0.0, 0.0]).unwrap();
        assert!(is_hadamard(&e, &tol()));
        // with A = B and no dressing this is F2 ⊗ A exactly
        assert!(e.max_abs_diff(&kron(&f2, &f2).unwrap()) < 1e-15);
        for t in [0.3, 1.7, 4.0] {
            assert!(is_hadamard(&elementary_array(&f2, &f2, &[0.0, t]).unwrap(), &tol()));
        }
        let f3 = fourier(3);
        let six = elementary_array(&f3, &f3.conj(), &[0.0, 0.4, 2.2]).unwrap();
        assert!(is_hadamard(&six, &tol()));
        assert_eq!(elementary_array_phase_count(3, 0, 0), 2);
    }

    #[test]
    fn elementary_array_errors() {
        let f2 = fourier(2);
        assert!(matches!(
            elementary_array(&f2, &fourier(3), &[0.0, 0.0]),
            Err(Error::OrderMismatch { .. })
        ));
        let bad = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]], 1.0).unwrap();
        assert!(matches!(elementary_array(&f2, &bad, &[0.0, 0.0]), Err(Error::NotUnitary { .. })));
        assert!(matches!(elementary_array(&f2, &f2, &[0.0]), Err(Error::ParamCount { .. })));
    }

    #[test]
    fn williamson_cases() {
        let f2 = fourier(2);
        let z = [0.0, 0.0];
        let w = williamson_array(&f2, &f2, &f2, &f2, &z, &z, &z).unwrap();
        assert!(is_hadamard(&w, &tol()));
        assert!(w.data().iter().all(|c| c.im.abs() < 1e-15));
        let (s, t, u) = (0.4, 1.3, 2.9);
        let w = williamson_array(&f2, &f2, &f2, &f2, &[0.0, s], &[0.0, t], &[0.0, u]).unwrap();
        assert!(is_hadamard(&w, &tol()));
        assert!((w[(1, 2)] * 2.0 * 2f64.sqrt() - cis(s)).norm() < 1e-14);
        let id = CMatrix::identity(2);
        let w = williamson_array(&f2, &id, &f2, &f2, &z, &z, &z).unwrap();
        assert!(is_unitary(&w, &tol()));
        assert!(!is_hadamard(&w, &tol()));
        assert_eq!(williamson_phase_count(2, 0, 0, 0, 0), 3);
    }

    #[test]
    fn generalized_product_cases() {
        let f2 = fourier(2);
        let a = catalog(CatalogId::Dita6, &[0.8]).unwrap();
        let q = generalized_product(&f2, &[a.clone(), a.clone()]).unwrap();
        let e = elementary_array(&a, &a, &[0.0; 6]).unwrap();
        assert!(q.max_abs_diff(&e) < 1e-14);
        let q = generalized_product(&fourier(3), &vec![f2.clone(); 3]).unwrap();
        assert!(is_hadamard(&q, &tol()));
        assert!(generalized_product(&f2, std::slice::from_ref(&f2)).is_err());
        assert_eq!(generalized_product_phase_count(0, &[1, 1], 4), 5);
    }

    #[test]
    fn conference_doubling() {
        let w4 = catalog(CatalogId::W4, &[0.0]).unwrap();
        let m8 = conference_double(&w4).unwrap();
        assert_eq!(m8.n(), 8);
        assert!(is_hadamard(&m8, &tol()));
        let w6 = catalog(CatalogId::W6, &[0.3, 1.1]).unwrap();
        assert!(is_hadamard(&conference_double(&w6).unwrap(), &tol()));
        assert!(matches!(
            conference_double(&CMatrix::identity(3)),
            Err(Error::ConferenceViolation(_))
        ));
    }

    #[test]
    fn catalog_entries() {
        let t = 0.9;
        let d = catalog_matrix("dita6", &[t]).unwrap();
        let s6 = 6f64.sqrt();
        assert!((d[(2, 3)] - cis(t) / s6).norm() < 1e-15);
        assert!((d[(3, 2)] + cis(-t) / s6).norm() < 1e-15);
        let sym = catalog_matrix("sym6", &[]).unwrap();
        assert_eq!(sym, sym.transpose());
        assert!(is_hadamard(&sym, &tol()));
        let herm = catalog_matrix("herm6", &[]).unwrap();
        assert_eq!(herm, herm.adjoint());
        assert!(is_hadamard(&herm, &tol()));
        assert_eq!(catalog_matrix("nope", &[]), Err(Error::UnknownCatalogId("nope".into())));
        assert_eq!(
            catalog_matrix("w6", &[0.1]),
            Err(Error::ParamCount { expected: 2, found: 1 })
        );
    }
}

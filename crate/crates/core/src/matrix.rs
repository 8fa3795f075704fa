//! Dense complex matrices and the unitary / Hadamard predicates.
//!
//! [`CMatrix`] is row-major and may be rectangular; operations that need a
//! square operand check it. Rectangular blocks are the same type under the
//! [`CBlock`] alias.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order a constructor may produce.
pub const MAX_ORDER: usize = 4096;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Tolerances for the unitary and modulus predicates and for solver
/// convergence.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceSpec {
    pub eps_unitary: f64,
    pub eps_modulus: f64,
    pub eps_solver: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec { eps_unitary: 1e-10, eps_modulus: 1e-10, eps_solver: 1e-9 }
    }
}

impl ToleranceSpec {
    pub fn new(eps_unitary: f64, eps_modulus: f64, eps_solver: f64) -> Result<Self> {
        let spec = ToleranceSpec { eps_unitary, eps_modulus, eps_solver };
        spec.validate()?;
        Ok(spec)
    }

    /// All three tolerances set to `eps`.
    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, eps)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_unitary", self.eps_unitary),
            ("eps_modulus", self.eps_modulus),
            ("eps_solver", self.eps_solver),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::Domain(format!("{name} = {v} must lie in (0, 1e-3)")));
            }
        }
        Ok(())
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Rectangular block; same representation as [`CMatrix`].
pub type CBlock = CMatrix;

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Row-major data; rejects empty shapes, length mismatches and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Malformed("matrix must have at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Malformed(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Malformed(format!(
                "entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Malformed("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    /// Real-valued rows scaled by `scale`.
    pub fn from_real_rows(rows: &[&[f64]], scale: f64) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x * scale, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `diag(e^{iφ_0}, …)`.
    pub fn phase_diag(phases: &[f64]) -> Self {
        Self::diag(&phases.iter().map(|&p| cis(p)).collect::<Vec<_>>())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Order of a square matrix (the row count otherwise).
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Malformed(format!("expected a square matrix, found {}x{}", self.rows, self.cols)))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Left-multiply by `diag(d)` without forming it.
    pub fn scale_rows(&self, d: &[Complex64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| d[i] * self[(i, j)])
    }

    /// Right-multiply by `diag(d)` without forming it.
    pub fn scale_cols(&self, d: &[Complex64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Dense product; panics on incompatible shapes.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "incompatible shapes for product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>+.4}{:>+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `max |(M*M − I)_ij|` for a square matrix.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let g = &m.adjoint() * m;
    g.max_abs_diff(&CMatrix::identity(m.n()))
}

/// `max ||m_ij| − 1/√n|`.
pub fn modulus_residual(m: &CMatrix) -> f64 {
    let target = 1.0 / (m.n() as f64).sqrt();
    m.data().iter().map(|z| (z.norm() - target).abs()).fold(0.0, f64::max)
}

pub fn is_unitary(m: &CMatrix, tol: &ToleranceSpec) -> bool {
    m.is_square() && unitarity_residual(m) <= tol.eps_unitary
}

pub fn is_hadamard(m: &CMatrix, tol: &ToleranceSpec) -> bool {
    is_unitary(m, tol) && modulus_residual(m) <= tol.eps_modulus
}

/// Kronecker product `[a_ij·B]`, capped at [`MAX_ORDER`].
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_with_limit(a, b, MAX_ORDER)
}

pub fn kron_with_limit(a: &CMatrix, b: &CMatrix, max_order: usize) -> Result<CMatrix> {
    let rows = a.rows().saturating_mul(b.rows());
    let cols = a.cols().saturating_mul(b.cols());
    if rows.max(cols) > max_order {
        return Err(Error::Size { order: rows.max(cols), max: max_order });
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows(), j / b.cols())] * b[(i % b.rows(), j % b.cols())]
    }))
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues ascending, the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.n();
    // symmetrize so round-off in the input cannot leak into the solver
    let sym = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Positive-semidefinite square root, negative eigenvalues clamped to 0.
pub fn hermitian_sqrt(h: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let roots: Vec<Complex64> = values.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)).collect();
    &vectors.scale_cols(&roots) * &vectors.adjoint()
}

/// Largest singular value of an arbitrary block.
pub fn largest_singular_value(t: &CMatrix) -> f64 {
    let gram = &t.adjoint() * t;
    let (values, _) = hermitian_eigen(&gram);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `D_T = (I − T*T)^{1/2}` for a contraction `T` (largest singular value at
/// most `1 + 1e-10`).
pub fn defect_operator(t: &CBlock) -> Result<CMatrix> {
    defect_operator_with(t, &ToleranceSpec::default())
}

pub fn defect_operator_with(t: &CBlock, tol: &ToleranceSpec) -> Result<CMatrix> {
    let s = largest_singular_value(t);
    if s > 1.0 + tol.eps_unitary {
        return Err(Error::ContractionViolation { singular_value: s });
    }
    let gram = &t.adjoint() * t;
    let defect_sq = &CMatrix::identity(t.cols()) - &gram;
    Ok(hermitian_sqrt(&defect_sq))
}

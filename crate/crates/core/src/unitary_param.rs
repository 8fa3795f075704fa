//! Parameterizations of unitary matrices.
//!
//! The main one writes an order-`n` unitary as
//!
//! ```text
//! A = d_n · O⁰ · d¹ · O¹ · d² ⋯ O^{n−2} · d^{n−1}
//! ```
//!
//! where `d_n` is a full phase diagonal, `d^g` is a phase diagonal whose
//! first `g` entries are 1, and `O^g = diag(I_g, L)` embeds the orthogonal
//! matrix [`orthogonal_from_vector`] built from `n − g − 1` angles. That is
//! `n(n−1)/2` angles and `n(n+1)/2` phases in all.
//!
//! [`hadamard_seed`] fixes enough of them that the first row and column are
//! flat (all `1/√n`), leaving `(n−2)²` free parameters in a [`ParamPoint`].
//! [`border_contraction`] is the block construction from a contraction and
//! two isometries.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equivalence::wrap_phase;
use crate::error::{Error, Result};
use crate::matrix::{
    cis, hermitian_eigen, hermitian_sqrt, largest_singular_value, unitarity_residual, CBlock, CMatrix,
    ToleranceSpec, ONE,
};

/// Free angles of the Hadamard seed at order `n`: `(n−2)(n−3)/2`.
pub fn free_angle_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        (n - 2) * (n - 3) / 2
    }
}

/// Free phases of the Hadamard seed at order `n`: `(n−1)(n−2)/2`.
pub fn free_phase_count(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (n - 1) * (n - 2) / 2
    }
}

/// Free parameters of a standard-form Hadamard candidate.
///
/// Angles are listed generation by generation (`a₁…a_{n−3}`, `b₁…`, …),
/// phases likewise (`α₁…α_{n−2}`, `β₁…`, …).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRepr")]
pub struct ParamPoint {
    pub n: usize,
    pub free_angles: Vec<f64>,
    pub free_phases: Vec<f64>,
}

#[derive(Deserialize)]
struct ParamRepr {
    n: usize,
    free_angles: Vec<f64>,
    free_phases: Vec<f64>,
}

impl TryFrom<ParamRepr> for ParamPoint {
    type Error = Error;
    fn try_from(r: ParamRepr) -> Result<Self> {
        ParamPoint::new(r.n, r.free_angles, r.free_phases)
    }
}

impl ParamPoint {
    pub fn new(n: usize, free_angles: Vec<f64>, free_phases: Vec<f64>) -> Result<Self> {
        let p = ParamPoint { n, free_angles, free_phases };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("order must be at least 2, got {}", self.n)));
        }
        if self.free_angles.len() != free_angle_count(self.n) {
            return Err(Error::ParamCount { expected: free_angle_count(self.n), found: self.free_angles.len() });
        }
        if self.free_phases.len() != free_phase_count(self.n) {
            return Err(Error::ParamCount { expected: free_phase_count(self.n), found: self.free_phases.len() });
        }
        if self.free_angles.iter().chain(&self.free_phases).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Total number of free parameters, `(n−2)²`.
    pub fn dim(&self) -> usize {
        self.free_angles.len() + self.free_phases.len()
    }

    /// Angles followed by phases.
    pub fn to_vec(&self) -> Vec<f64> {
        self.free_angles.iter().chain(&self.free_phases).copied().collect()
    }

    /// Inverse of [`ParamPoint::to_vec`].
    pub fn from_vec(n: usize, x: &[f64]) -> Result<Self> {
        let na = free_angle_count(n);
        if x.len() != na + free_phase_count(n) {
            return Err(Error::ParamCount { expected: na + free_phase_count(n), found: x.len() });
        }
        ParamPoint::new(n, x[..na].to_vec(), x[na..].to_vec())
    }

    /// Angles uniform in `(0, π/2)`, phases uniform in `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        ParamPoint {
            n,
            free_angles: (0..free_angle_count(n)).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect(),
            free_phases: (0..free_phase_count(n)).map(|_| rng.random_range(0.0..TAU)).collect(),
        }
    }
}

/// Every angle and phase of the factorization.
///
/// `all_angles`: generation 0 (`n−1` angles), generation 1 (`n−2`), …
/// `all_phases`: `d_n` (`n` phases), then `d¹` (`n−1`), …, `d^{n−1}` (1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullParam {
    pub n: usize,
    pub all_angles: Vec<f64>,
    pub all_phases: Vec<f64>,
}

impl FullParam {
    pub fn angle_count(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    pub fn phase_count(n: usize) -> usize {
        n * (n + 1) / 2
    }

    pub fn new(n: usize, all_angles: Vec<f64>, all_phases: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("order must be at least 1".into()));
        }
        if all_angles.len() != Self::angle_count(n) {
            return Err(Error::ParamCount { expected: Self::angle_count(n), found: all_angles.len() });
        }
        if all_phases.len() != Self::phase_count(n) {
            return Err(Error::ParamCount { expected: Self::phase_count(n), found: all_phases.len() });
        }
        Ok(FullParam { n, all_angles, all_phases })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        FullParam {
            n,
            all_angles: (0..Self::angle_count(n)).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect(),
            all_phases: (0..Self::phase_count(n)).map(|_| rng.random_range(0.0..TAU)).collect(),
        }
    }

    /// Angles of generation `g` (`n − g − 1` of them).
    pub fn generation_angles(&self, g: usize) -> &[f64] {
        let start: usize = (0..g).map(|h| self.n - h - 1).sum();
        &self.all_angles[start..start + self.n - g - 1]
    }

    /// Phases of `d^g`, where `g = 0` means `d_n` (`n − g` of them).
    pub fn diagonal_phases(&self, g: usize) -> &[f64] {
        let start: usize = (0..g).map(|h| self.n - h).sum();
        &self.all_phases[start..start + self.n - g]
    }
}

/// Rotation by `θ` in the `(i, i+1)` plane, `i` 1-based in `1..n`.
pub fn rotation_j(n: usize, i: usize, theta: f64) -> Result<CMatrix> {
    if i < 1 || i + 1 > n {
        return Err(Error::Domain(format!("rotation index {i} out of range 1..={}", n.saturating_sub(1))));
    }
    let mut r = CMatrix::identity(n);
    let (s, c) = theta.sin_cos();
    r[(i - 1, i - 1)] = Complex64::new(c, 0.0);
    r[(i - 1, i)] = Complex64::new(-s, 0.0);
    r[(i, i - 1)] = Complex64::new(s, 0.0);
    r[(i, i)] = Complex64::new(c, 0.0);
    Ok(r)
}

/// Real orthogonal matrix of order `k = χ.len() + 1` whose first column is
/// `(cos χ₁, sin χ₁ cos χ₂, …, sin χ₁ ⋯ sin χ_{k−1})` and whose column
/// `j+1` is the `χ_j`-derivative of that column with `χ₁ … χ_{j−1}` set to
/// `π/2`.
pub fn orthogonal_from_vector(angles: &[f64]) -> CMatrix {
    let (re, _) = orthogonal_real(angles);
    let k = angles.len() + 1;
    CMatrix::from_fn(k, k, |i, j| Complex64::new(re[i * k + j], 0.0))
}

/// Row-major real entries and the order.
fn orthogonal_real(angles: &[f64]) -> (Vec<f64>, usize) {
    let k = angles.len() + 1;
    let mut o = vec![0.0; k * k];
    let sc: Vec<(f64, f64)> = angles.iter().map(|a| a.sin_cos()).collect();
    // column 0
    let mut p = 1.0;
    for (j, &(s, c)) in sc.iter().enumerate() {
        o[j * k] = p * c;
        p *= s;
    }
    o[(k - 1) * k] = p;
    // column j: −sin χ_j at row j−1, then cos χ_j times the tail of column 0
    for j in 1..k {
        let (s, c) = sc[j - 1];
        o[(j - 1) * k + j] = -s;
        let mut p = c;
        for (r, &(sr, cr)) in sc.iter().enumerate().skip(j) {
            o[r * k + j] = p * cr;
            p *= sr;
        }
        o[(k - 1) * k + j] = p;
    }
    (o, k)
}

/// Angles `θ₁ … θ_{k−1}` with `O = J_{k−1,k}(θ_{k−1}) ⋯ J_{1,2}(θ₁)`,
/// found by peeling one plane rotation at a time off the first row.
pub fn rotation_angles(o: &CMatrix) -> Vec<f64> {
    let k = o.n();
    let mut rest = o.clone();
    let mut thetas = Vec::with_capacity(k.saturating_sub(1));
    for i in 0..k.saturating_sub(1) {
        // row i of J_{k−1}⋯J_{i+1}·J_i restricted to columns i, i+1 is (cos, −sin)
        let theta = (-rest[(i, i + 1)].re).atan2(rest[(i, i)].re);
        thetas.push(theta);
        let j = rotation_j(k, i + 1, theta).expect("index in range");
        rest = &rest * &j.transpose();
    }
    thetas
}

/// True when [`orthogonal_from_vector`] factors into adjacent-plane
/// rotations to within `1e-10`.
pub fn factor_check(angles: &[f64]) -> bool {
    let o = orthogonal_from_vector(angles);
    let k = o.n();
    let thetas = rotation_angles(&o);
    let mut prod = CMatrix::identity(k);
    for (i, &t) in thetas.iter().enumerate() {
        prod = &rotation_j(k, i + 1, t).expect("index in range") * &prod;
    }
    prod.max_abs_diff(&o) < 1e-10
}

/// Product of the factorization, left to right.
pub fn assemble_unitary(p: &FullParam) -> Result<CMatrix> {
    let p = FullParam::new(p.n, p.all_angles.clone(), p.all_phases.clone())?;
    let n = p.n;
    let mut a = CMatrix::phase_diag(p.diagonal_phases(0));
    for g in 0..n.saturating_sub(1) {
        a = right_mul_embedded(&a, g, p.generation_angles(g));
        let d: Vec<Complex64> = p.diagonal_phases(g + 1).iter().map(|&x| cis(x)).collect();
        for i in 0..n {
            for (jj, dj) in d.iter().enumerate() {
                a[(i, g + 1 + jj)] *= dj;
            }
        }
    }
    Ok(a)
}

/// `a · diag(I_g, L(angles))` without forming the embedding.
fn right_mul_embedded(a: &CMatrix, g: usize, angles: &[f64]) -> CMatrix {
    let (l, k) = orthogonal_real(angles);
    let n = a.n();
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..k {
                acc += a[(i, g + r)] * l[r * k + j];
            }
            out[(i, g + j)] = acc;
        }
    }
    out
}

/// Fixed leading angle of generation `g ≥ 1`: `arccos(1/√(n−g))`; for
/// `g = 0` every angle is fixed, `χ_k = arccos(1/√(n+1−k))`.
fn fixed_angle(n: usize, g: usize, k: usize) -> f64 {
    if g == 0 {
        (1.0 / ((n + 1 - k) as f64).sqrt()).acos()
    } else {
        (1.0 / ((n - g) as f64).sqrt()).acos()
    }
}

/// Expands a free point into the full factorization parameters of the
/// standard-form seed.
pub fn seed_full_param(point: &ParamPoint) -> Result<FullParam> {
    point.validate()?;
    let n = point.n;
    let mut angles = Vec::with_capacity(FullParam::angle_count(n));
    let mut phases = vec![0.0; n];
    let mut fa = point.free_angles.iter();
    let mut fp = point.free_phases.iter();
    for g in 0..n - 1 {
        if g == 0 {
            angles.extend((1..n).map(|k| fixed_angle(n, 0, k)));
        } else {
            angles.push(fixed_angle(n, g, 1));
            angles.extend(fa.by_ref().take(n - g - 2));
        }
        phases.push(PI);
        phases.extend(fp.by_ref().take(n - g - 2));
    }
    debug_assert!(fa.next().is_none() && fp.next().is_none());
    FullParam::new(n, angles, phases)
}

/// The standard-form unitary of a free point: first row and column are all
/// `1/√n`; the inner moduli depend on the point.
pub fn hadamard_seed(point: &ParamPoint) -> Result<CMatrix> {
    assemble_unitary(&seed_full_param(point)?)
}

/// Angles `χ` with `|first column of L(χ)| = mods` (a unit vector).
/// Tail norms are summed from the end; subtracting from the total loses
/// everything once the tail is small.
fn angles_of_moduli(mods: &[f64]) -> Vec<f64> {
    let k = mods.len();
    let mut tails = vec![0.0; k];
    let mut acc = 0.0;
    for r in (0..k).rev() {
        tails[r] = acc;
        acc += mods[r] * mods[r];
    }
    (0..k.saturating_sub(1)).map(|r| tails[r].sqrt().atan2(mods[r])).collect()
}

/// Exact inverse of [`assemble_unitary`] for a unitary input. Angles land
/// in `[0, π/2]`, phases in `[0, 2π)`; phases of vanishing entries are 0.
pub fn decompose_unitary(u: &CMatrix) -> Result<FullParam> {
    let n = u.ensure_square()?;
    let res = unitarity_residual(u);
    if res > 1e-8 {
        return Err(Error::NotUnitary { residual: res });
    }
    let mut angles = Vec::with_capacity(FullParam::angle_count(n));
    let mut phases = Vec::with_capacity(FullParam::phase_count(n));
    let mut rest = u.clone();
    for g in 0..n {
        let k = n - g;
        let col: Vec<Complex64> = (0..k).map(|i| rest[(i, 0)]).collect();
        let ph: Vec<f64> = col.iter().map(|z| if z.norm() < 1e-300 { 0.0 } else { wrap_phase(z.arg()) }).collect();
        phases.extend(&ph);
        if k == 1 {
            break;
        }
        // angles from the moduli of the first column
        let mods: Vec<f64> = col.iter().map(|z| z.norm()).collect();
        let chis = angles_of_moduli(&mods);
        // strip d and L: rest ← Lᵀ · diag(e^{−iφ}) · rest, then drop the first row/column
        let (l, _) = orthogonal_real(&chis);
        let stripped = CMatrix::from_fn(k, k, |i, j| {
            (0..k).map(|r| rest[(r, j)] * cis(-ph[r]) * l[r * k + i]).sum()
        });
        angles.extend(chis);
        rest = stripped.block(1, 1, k - 1, k - 1);
    }
    FullParam::new(n, angles, phases)
}

/// Free point of a standard-form (dephased) Hadamard matrix. Fails when
/// the fixed parameters of the decomposition differ from the seed's by more
/// than `1e-8`.
pub fn param_point_from_dephased(core: &CMatrix) -> Result<ParamPoint> {
    let n = core.ensure_square()?;
    if n < 2 {
        return Err(Error::Domain("order must be at least 2".into()));
    }
    let full = decompose_unitary(core)?;
    let angle_err = |a: f64, b: f64| (a - b).abs();
    let phase_err = |a: f64, b: f64| {
        let d = wrap_phase(a - b);
        d.min(TAU - d)
    };
    let mut worst: f64 = 0.0;
    let mut fa = Vec::new();
    let mut fp = Vec::new();
    for &p in full.diagonal_phases(0) {
        worst = worst.max(phase_err(p, 0.0));
    }
    for g in 0..n - 1 {
        let ga = full.generation_angles(g);
        if g == 0 {
            for (k, &a) in ga.iter().enumerate() {
                worst = worst.max(angle_err(a, fixed_angle(n, 0, k + 1)));
            }
        } else {
            worst = worst.max(angle_err(ga[0], fixed_angle(n, g, 1)));
            fa.extend(&ga[1..]);
        }
        let gp = full.diagonal_phases(g + 1);
        worst = worst.max(phase_err(gp[0], PI));
        fp.extend(&gp[1..]);
    }
    if worst > 1e-8 {
        return Err(Error::Domain(format!(
            "matrix is not in the seed's standard form (fixed parameters off by {worst:e})"
        )));
    }
    ParamPoint::new(n, fa, fp)
}

const ISOMETRY_REJECT: f64 = 1e-8;

/// `(G)^{-1/2}` for a Hermitian positive-definite Gram matrix near `I`.
fn inverse_sqrt(g: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(g);
    let d: Vec<Complex64> = vals.iter().map(|&l| Complex64::new(1.0 / l.sqrt(), 0.0)).collect();
    &vecs.scale_cols(&d) * &vecs.adjoint()
}

/// Unitary completing a unit vector `v` as its first column: the phases of
/// `v` times the orthogonal matrix generated by `|v|`.
fn complete_unit_vector(v: &[Complex64]) -> CMatrix {
    let mods: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let chis = angles_of_moduli(&mods);
    let phases: Vec<Complex64> =
        v.iter().map(|z| if z.norm() < 1e-300 { ONE } else { z / z.norm() }).collect();
    orthogonal_from_vector(&chis).scale_rows(&phases)
}

/// Unitary whose columns are eigenvectors of `I − W·W*` in increasing
/// eigenvalue order, for `W` with orthonormal columns.
fn defect_eigenbasis(w: &CMatrix) -> CMatrix {
    if w.cols() == 1 {
        return complete_unit_vector(&w.col(0));
    }
    let k = w.rows();
    let proj = &CMatrix::identity(k) - &(w * &w.adjoint());
    hermitian_eigen(&proj).1
}

/// Block unitary `[[A, D_{A*}U], [V D_A, D]]` with
/// `D = −V A* U + X M Y*`, where the columns of `X` and `Y` are eigenvectors
/// of `D_{V*}` and `D_U` in increasing eigenvalue order and `M` carries `K`
/// in its lower-right `(n−2m)` block.
///
/// `A` is an `m×m` contraction, `U` (`m×(n−m)`) has orthonormal rows and
/// `V` (`(n−m)×m`) orthonormal columns. `K` is required exactly when
/// `n > 2m`. Near-isometries (within `1e-8`) are re-orthonormalized.
pub fn border_contraction(a: &CBlock, u: &CBlock, v: &CBlock, k: Option<&CMatrix>) -> Result<CMatrix> {
    let m = a.ensure_square()?;
    let nm = u.cols();
    let n = m + nm;
    if u.rows() != m || v.rows() != nm || v.cols() != m {
        return Err(Error::Malformed(format!(
            "block shapes do not fit: A {m}x{m}, U {}x{}, V {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    if 2 * m > n {
        return Err(Error::Domain(format!("need m <= n/2, got m = {m}, n = {n}")));
    }
    let tol = ToleranceSpec::default();
    let s = largest_singular_value(a);
    if s > 1.0 + tol.eps_unitary {
        return Err(Error::ContractionViolation { singular_value: s });
    }
    let uu = u * &u.adjoint();
    let r = uu.max_abs_diff(&CMatrix::identity(m));
    if r > ISOMETRY_REJECT {
        return Err(Error::IsometryViolation { relation: "U U* = I_m", residual: r });
    }
    let u = &inverse_sqrt(&uu) * u;
    let vv = &v.adjoint() * v;
    let r = vv.max_abs_diff(&CMatrix::identity(m));
    if r > ISOMETRY_REJECT {
        return Err(Error::IsometryViolation { relation: "V* V = I_m", residual: r });
    }
    let v = v * &inverse_sqrt(&vv);

    let rest = n - 2 * m;
    match (rest, k) {
        (0, None) => {}
        (0, Some(km)) => return Err(Error::OrderMismatch { expected: 0, found: km.n() }),
        (_, None) => return Err(Error::OrderMismatch { expected: rest, found: 0 }),
        (_, Some(km)) => {
            km.ensure_square()?;
            if km.n() != rest {
                return Err(Error::OrderMismatch { expected: rest, found: km.n() });
            }
            let r = unitarity_residual(km);
            if r > tol.eps_unitary {
                return Err(Error::NotUnitary { residual: r });
            }
        }
    }

    let a_star = a.adjoint();
    let d_a = hermitian_sqrt(&(&CMatrix::identity(m) - &(&a_star * a)));
    let d_a_star = hermitian_sqrt(&(&CMatrix::identity(m) - &(a * &a_star)));
    let mut d = -&(&(&v * &a_star) * &u);
    if let Some(km) = k {
        let x = defect_eigenbasis(&v);
        let y = defect_eigenbasis(&u.adjoint());
        let mut mm = CMatrix::zeros(nm, nm);
        mm.set_block(m, m, km);
        d = &d + &(&(&x * &mm) * &y.adjoint());
    }
    let mut out = CMatrix::zeros(n, n);
    out.set_block(0, 0, a);
    out.set_block(0, m, &(&d_a_star * &u));
    out.set_block(m, 0, &(&v * &d_a));
    out.set_block(m, m, &d);
    Ok(out)
}

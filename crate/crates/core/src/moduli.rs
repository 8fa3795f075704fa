//! The moduli system of the Hadamard seed and its closed-form companions.
//!
//! For a [`ParamPoint`] the residuals are `|a_ij|² − 1/n` over the inner
//! block `1 ≤ i, j ≤ n−2` (0-based) of [`hadamard_seed`]. The first row
//! and column are flat by construction and the last row and column then
//! follow from unitarity, leaving `(n−2)²` equations in `(n−2)²` unknowns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unitary_param::{hadamard_seed, ParamPoint};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Singular values above this fraction of the largest count towards rank.
pub const RANK_RELATIVE_THRESHOLD: f64 = 1e-6;
/// Largest residual at which a point counts as a solution for rank tests.
pub const SOLUTION_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub n: usize,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jacobian_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family_dim: Option<usize>,
}

/// Inner-block residuals, row-major.
pub fn residual_vector(point: &ParamPoint) -> Result<Vec<f64>> {
    let a = hadamard_seed(point)?;
    let n = point.n;
    let inv = 1.0 / n as f64;
    let mut out = Vec::with_capacity((n - 2) * (n - 2));
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            out.push(a[(i, j)].norm_sqr() - inv);
        }
    }
    Ok(out)
}

pub fn residuals(point: &ParamPoint) -> Result<ResidualReport> {
    let residuals = residual_vector(point)?;
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(ResidualReport { n: point.n, residuals, max_abs, jacobian_rank: None, family_dim: None })
}

/// Central-difference Jacobian of [`residual_vector`] with respect to the
/// free angles followed by the free phases.
pub fn jacobian_fd(point: &ParamPoint, h: f64) -> Result<DMatrix<f64>> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::Domain(format!("finite-difference step {h} outside [1e-8, 1e-4]")));
    }
    point.validate()?;
    let x = point.to_vec();
    let dim = x.len();
    let rows = (point.n - 2) * (point.n - 2);
    let mut jac = DMatrix::zeros(rows, dim);
    let mut xp = x.clone();
    for k in 0..dim {
        xp[k] = x[k] + h;
        let fp = residual_vector(&ParamPoint::from_vec(point.n, &xp)?)?;
        xp[k] = x[k] - h;
        let fm = residual_vector(&ParamPoint::from_vec(point.n, &xp)?)?;
        xp[k] = x[k];
        for r in 0..rows {
            jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Singular values, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `RANK_RELATIVE_THRESHOLD × largest`.
pub fn numerical_rank(sv: &[f64]) -> usize {
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RELATIVE_THRESHOLD * top).count()
}

/// `(n−2)²` minus the numerical rank of the Jacobian at a solution.
pub fn family_dimension(point: &ParamPoint) -> Result<usize> {
    Ok(analyze(point)?.family_dim.expect("filled by analyze"))
}

/// Residual report with rank and family dimension filled in; the point
/// must be a solution (max residual below `1e-8`).
pub fn analyze(point: &ParamPoint) -> Result<ResidualReport> {
    let mut report = residuals(point)?;
    if report.max_abs >= SOLUTION_THRESHOLD {
        return Err(Error::NotAtSolution { max_abs: report.max_abs });
    }
    let dim = point.dim();
    let rank = if dim == 0 { 0 } else { numerical_rank(&singular_values(&jacobian_fd(point, DEFAULT_FD_STEP)?)) };
    report.jacobian_rank = Some(rank);
    report.family_dim = Some(dim - rank);
    Ok(report)
}

/// `(n−2)cos²a₁ + (2/√n)cos a₁ cos α₁ − 1`.
pub fn eq21_first(n: usize, a1: f64, alpha1: f64) -> f64 {
    let nf = n as f64;
    let c = a1.cos();
    (nf - 2.0) * c * c + 2.0 / nf.sqrt() * c * alpha1.cos() - 1.0
}

/// Companion equation in `a₂, α₂` after eliminating `cos a₁ cos α₁`.
/// Pass `a2 = 0` when the order has no `a₂` (`n = 4`).
pub fn eq21_companion_a2(n: usize, a1: f64, a2: f64, alpha1: f64, alpha2: f64) -> f64 {
    let nf = n as f64;
    let (s1, c1) = a1.sin_cos();
    let c2 = a2.cos();
    s1 * ((nf - 3.0) * s1 * c2 * c2
        + 2.0 * ((nf - 3.0) / (nf - 1.0)).sqrt() * c2 * (alpha2.cos() / nf.sqrt() - c1 * (alpha1 - alpha2).cos())
        - s1)
}

/// Companion equation in `b₁, β₁`. Pass `b1 = 0` when absent (`n = 4`).
pub fn eq21_companion_b1(n: usize, a1: f64, b1: f64, alpha1: f64, beta1: f64) -> f64 {
    let nf = n as f64;
    let (s1, c1) = a1.sin_cos();
    let cb = b1.cos();
    s1 * ((nf - 3.0) * s1 * cb * cb
        + 2.0 * ((nf - 3.0) / (nf - 1.0)).sqrt() * cb * (-(alpha1 + beta1).cos() / nf.sqrt() + c1 * beta1.cos())
        - s1)
}

/// The four moduli equations at order 4.
pub fn n4_system(a1: f64, alpha1: f64, alpha2: f64, beta1: f64) -> [f64; 4] {
    let (s, c) = a1.sin_cos();
    [
        2.0 * c * c + c * alpha1.cos() - 1.0,
        s * (alpha2.cos() - 2.0 * c * (alpha1 - alpha2).cos()),
        s * (2.0 * c * beta1.cos() - (alpha1 + beta1).cos()),
        (2.0 * a1).cos() * (alpha1 - alpha2).cos() * beta1.cos()
            + c * (alpha2 + beta1).cos()
            + (alpha1 - alpha2).sin() * beta1.sin(),
    ]
}

/// Constant block of `p₁`: `(n−3−2/√n)x⁴ − 2(n−1)x² + (n−3+2/√n)`.
pub fn curve_p1(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let r = 2.0 / nf.sqrt();
    let x2 = x * x;
    (nf - 3.0 - r) * x2 * x2 - 2.0 * (nf - 1.0) * x2 + (nf - 3.0 + r)
}

/// `y²` coefficient of `p₁`: `(n−3+2/√n)x⁴ − 2(n−1)x² + (n−3−2/√n)`.
pub fn curve_p2(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let r = 2.0 / nf.sqrt();
    let x2 = x * x;
    (nf - 3.0 + r) * x2 * x2 - 2.0 * (nf - 1.0) * x2 + (nf - 3.0 - r)
}

/// `p₁(x, y) = P₂(x)·y² + P₁(x)`, the half-angle image of the first
/// moduli equation with denominators cleared.
pub fn weierstrass_p1(n: usize, x1: f64, y1: f64) -> f64 {
    curve_p2(n, x1) * y1 * y1 + curve_p1(n, x1)
}

/// Zeros (of `P₁`) and poles (zeros of `P₂`) of `y₁² = −P₁/P₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoints {
    pub n: usize,
    /// `±√((√n−1)/(√n+1))`
    pub zeros_inner: [f64; 2],
    /// `±√((n+√n−2)/(n−√n−2))`
    pub zeros_outer: [f64; 2],
    /// `±√((√n+1)/(√n−1))`
    pub poles_outer: [f64; 2],
    /// `±√((n−√n−2)/(n+√n−2))`
    pub poles_inner: [f64; 2],
    /// Largest `|P₁|` at a zero or `|P₂|` at a pole.
    pub max_residual: f64,
    /// Positive zeros and poles alternate when sorted.
    pub interlaced: bool,
}

pub fn curve_zeros_poles(n: usize) -> Result<CurvePoints> {
    if n < 5 {
        return Err(Error::Domain(format!("curve data needs n >= 5, got {n}")));
    }
    let nf = n as f64;
    let r = nf.sqrt();
    let pm = |v: f64| [v, -v];
    let z1 = ((r - 1.0) / (r + 1.0)).sqrt();
    let z2 = ((nf + r - 2.0) / (nf - r - 2.0)).sqrt();
    let p1 = ((r + 1.0) / (r - 1.0)).sqrt();
    let p2 = ((nf - r - 2.0) / (nf + r - 2.0)).sqrt();
    let mut max_residual: f64 = 0.0;
    for z in [z1, -z1, z2, -z2] {
        max_residual = max_residual.max(curve_p1(n, z).abs());
    }
    for p in [p1, -p1, p2, -p2] {
        max_residual = max_residual.max(curve_p2(n, p).abs());
    }
    let mut tagged = [(z1, true), (z2, true), (p1, false), (p2, false)];
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let interlaced = tagged.windows(2).all(|w| w[0].1 != w[1].1);
    Ok(CurvePoints {
        n,
        zeros_inner: pm(z1),
        zeros_outer: pm(z2),
        poles_outer: pm(p1),
        poles_inner: pm(p2),
        max_residual,
        interlaced,
    })
}

fn check_unit_interval(m: &[f64]) -> Result<()> {
    if let Some(v) = m.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain(format!("squared modulus {v} outside (0, 1)")));
    }
    Ok(())
}

/// Cosine of the free phase of a 3×3 unitary with squared moduli
/// `m₁ = |u₁₁|², m₂ = |u₁₂|², m₃ = |u₂₁|², m₄ = |u₂₂|²`:
///
/// ```text
/// (−1 + 2m₁ − m₁² + m₂ + m₃ + m₄ − m₁m₂ − m₁m₃ − m₂m₃ − 2m₁m₄ − m₁m₂m₃ + m₁²m₄)
///   / (2√(m₁m₂m₃(1−m₁−m₂)(1−m₁−m₃)))
/// ```
///
/// The phase is that of the block bordering of `u₁₁`: with real positive
/// first row and column, `u₂₂ = −√m₁·v₁u₁ − e^{iφ}·v₂u₂`. A value in
/// `[−1, 1]` means the moduli are realized by a unitary.
pub fn unistochastic3_cos_phase(m1: f64, m2: f64, m3: f64, m4: f64) -> Result<f64> {
    check_unit_interval(&[m1, m2, m3, m4])?;
    let (r12, r13) = (1.0 - m1 - m2, 1.0 - m1 - m3);
    if r12 <= 0.0 || r13 <= 0.0 {
        return Err(Error::Domain("need m1 + m2 < 1 and m1 + m3 < 1".into()));
    }
    let num = -1.0 + 2.0 * m1 - m1 * m1 + m2 + m3 + m4 - m1 * m2 - m1 * m3 - m2 * m3 - 2.0 * m1 * m4
        - m1 * m2 * m3
        + m1 * m1 * m4;
    Ok(num / (2.0 * (m1 * m2 * m3 * r12 * r13).sqrt()))
}

/// Cosine of `arg u₂₂` for the 3×3 unitary with the same moduli, dephased
/// so that its first row and column are real positive:
/// `(1 − m₁ − m₂ − m₃ − m₄ + m₁m₄ + m₂m₃) / (2√(m₁m₂m₃m₄))`.
pub fn unistochastic3_cos_u22(m1: f64, m2: f64, m3: f64, m4: f64) -> Result<f64> {
    check_unit_interval(&[m1, m2, m3, m4])?;
    if m1 + m2 >= 1.0 || m1 + m3 >= 1.0 || m3 + m4 >= 1.0 || m2 + m4 >= 1.0 {
        return Err(Error::Domain("moduli are not the corner of a doubly stochastic matrix".into()));
    }
    let num = 1.0 - m1 - m2 - m3 - m4 + m1 * m4 + m2 * m3;
    Ok(num / (2.0 * (m1 * m2 * m3 * m4).sqrt()))
}

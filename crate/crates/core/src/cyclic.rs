//! Cyclic n-roots, bi-unimodular sequences and circulant matrices.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{cis, CMatrix, ONE};

/// A candidate solution `z` of the cyclic n-roots system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CandidateRepr", into = "CandidateRepr")]
pub struct CyclicCandidate {
    z: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CandidateRepr {
    z: Vec<[f64; 2]>,
}

impl TryFrom<CandidateRepr> for CyclicCandidate {
    type Error = Error;
    fn try_from(r: CandidateRepr) -> Result<Self> {
        CyclicCandidate::new(r.z.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<CyclicCandidate> for CandidateRepr {
    fn from(c: CyclicCandidate) -> Self {
        CandidateRepr { z: c.z.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl CyclicCandidate {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Malformed("empty candidate".into()));
        }
        for (k, w) in z.iter().enumerate() {
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::Malformed(format!("z[{k}] is not finite")));
            }
            if w.norm() < 1e-300 {
                return Err(Error::DegenerateEntry { axis: "z", index: k });
            }
        }
        Ok(CyclicCandidate { z })
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Residuals of the cyclic system: for `k = 1..n−1` the cyclic sum of all
/// `n` products of `k` consecutive entries, then `Π z_j − 1`.
pub fn cyclic_residuals(c: &CyclicCandidate) -> Vec<Complex64> {
    let z = c.z();
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    // run[j] holds z_j z_{j+1} … z_{j+k-1}
    let mut run: Vec<Complex64> = z.to_vec();
    for k in 1..n {
        out.push(run.iter().sum());
        run = (0..n).map(|j| run[j] * z[(j + k) % n]).collect();
    }
    out.push(z.iter().product::<Complex64>() - ONE);
    out
}

/// `z_j = x_{j+1}/x_j`, indices mod n.
pub fn x_to_z(x: &[Complex64]) -> Result<CyclicCandidate> {
    if let Some(k) = x.iter().position(|w| w.norm() < 1e-300) {
        return Err(Error::DegenerateEntry { axis: "x", index: k });
    }
    let n = x.len();
    CyclicCandidate::new((0..n).map(|j| x[(j + 1) % n] / x[j]).collect())
}

/// `y_j = n^{−1/2} Σ_k x_k e^{2πi·kj/n}`, evaluated directly.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &xk)| xk * cis(2.0 * PI * ((k * j) % n) as f64 / n as f64))
                .sum::<Complex64>()
                * s
        })
        .collect()
}

/// Unimodular with unimodular normalized DFT, both to `tol`.
pub fn is_biunimodular(x: &[Complex64], tol: f64) -> bool {
    !x.is_empty()
        && x.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
        && dft(x).iter().all(|y| (y.norm() - 1.0).abs() <= tol)
}

/// Row `i` is the first row cyclically shifted right by `i`:
/// `C_ij = x_{(j−i) mod n}`.
pub fn circulant(first_row: &[Complex64]) -> CMatrix {
    let n = first_row.len();
    CMatrix::from_fn(n, n, |i, j| first_row[(j + n - i) % n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{fourier, gauss_sequence};
    use crate::matrix::ZERO;

    fn close(a: &[Complex64], b: &[Complex64], eps: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < eps)
    }

    #[test]
    fn residual_examples() {
        let i = Complex64::i();
        let r = cyclic_residuals(&CyclicCandidate::new(vec![i, -i]).unwrap());
        assert!(close(&r, &[ZERO, ZERO], 1e-15));
        let w = cis(2.0 * PI / 3.0);
        let r = cyclic_residuals(&CyclicCandidate::new(vec![ONE, w, w * w]).unwrap());
        assert!(r.iter().all(|v| v.norm() < 1e-14), "{r:?}");
        let r = cyclic_residuals(&CyclicCandidate::new(vec![ONE; 3]).unwrap());
        let three = Complex64::new(3.0, 0.0);
        assert!(close(&r, &[three, three, ZERO], 1e-15));
    }

    #[test]
    fn x_to_z_cases() {
        let c = Complex64::new(0.3, -2.0);
        assert!(close(x_to_z(&[c; 4]).unwrap().z(), &[ONE; 4], 1e-15));
        let g = gauss_sequence(5, 1, 0).unwrap();
        let r = cyclic_residuals(&x_to_z(&g).unwrap());
        assert!(r.iter().all(|v| v.norm() < 1e-12));
        let row: Vec<Complex64> = fourier(4).row(0).iter().map(|z| z * 2.0).collect();
        assert!(close(x_to_z(&row).unwrap().z(), &[ONE; 4], 1e-15));
        assert!(x_to_z(&[ONE, ZERO]).is_err());
    }

    #[test]
    fn biunimodular_cases() {
        assert!(is_biunimodular(&gauss_sequence(7, 3, 2).unwrap(), 1e-10));
        assert!(!is_biunimodular(&[ONE; 4], 1e-10));
        assert!(is_biunimodular(&gauss_sequence(4, 0, 0).unwrap(), 1e-10));
    }

    #[test]
    fn circulant_orientation() {
        let e1 = [ONE, ZERO, ZERO];
        assert_eq!(circulant(&e1), CMatrix::identity(3));
        let x = [ONE, Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let c = circulant(&x);
        assert_eq!(c.row(1), &[x[2], x[0], x[1]]);
    }

    #[test]
    fn candidate_json_round_trip() {
        let c = CyclicCandidate::new(vec![Complex64::new(0.1, 0.2), Complex64::new(-1.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<CyclicCandidate>(&s).unwrap(), c);
        assert!(serde_json::from_str::<CyclicCandidate>(r#"{"z":[[0,0]]}"#).is_err());
    }
}

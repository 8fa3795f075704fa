//! Matrix JSON and CSV formats.
//!
//! JSON: `{"n": 3, "entries": [[re, im], ...]}`, row-major. Rectangular
//! blocks use `"rows"`/`"cols"` in place of `"n"`.
//! CSV: one `i,j,re,im` line per entry.
//!
//! Floats are written in shortest round-trip form, so reading back yields
//! the same bits.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    cols: Option<usize>,
    entries: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.data().iter().map(|z| [z.re, z.im]).collect();
        let repr = if self.is_square() {
            MatrixRepr { n: Some(self.n()), rows: None, cols: None, entries }
        } else {
            MatrixRepr { n: None, rows: Some(self.rows()), cols: Some(self.cols()), entries }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        repr_to_matrix(repr).map_err(serde::de::Error::custom)
    }
}

fn repr_to_matrix(repr: MatrixRepr) -> Result<CMatrix> {
    let (rows, cols) = match (repr.n, repr.rows, repr.cols) {
        (Some(n), None, None) => (n, n),
        (None, Some(r), Some(c)) => (r, c),
        _ => return Err(Error::Format("expected either \"n\" or both \"rows\" and \"cols\"".into())),
    };
    let data = repr.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
    CMatrix::from_vec(rows, cols, data)
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(m).expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix> {
    let repr: MatrixRepr = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    repr_to_matrix(repr)
}

pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            // Debug formatting of f64 is shortest round-trip
            out.push_str(&format!("{i},{j},{:?},{:?}\n", z.re, z.im));
        }
    }
    out
}

/// Reads `i,j,re,im` lines; an optional header line and blank lines are
/// skipped. Every entry of the square matrix must appear exactly once.
pub fn matrix_from_csv(s: &str) -> Result<CMatrix> {
    let mut cells: Vec<(usize, usize, Complex64)> = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Format(format!("line {}: expected i,j,re,im", lineno + 1)));
        }
        let bad = |what: &str| Error::Format(format!("line {}: bad {what}", lineno + 1));
        let i: usize = parts[0].parse().map_err(|_| bad("row index"))?;
        let j: usize = parts[1].parse().map_err(|_| bad("column index"))?;
        let re: f64 = parts[2].parse().map_err(|_| bad("real part"))?;
        let im: f64 = parts[3].parse().map_err(|_| bad("imaginary part"))?;
        cells.push((i, j, Complex64::new(re, im)));
    }
    let count = cells.len();
    let n = (count as f64).sqrt().round() as usize;
    if n == 0 || n * n != count {
        return Err(Error::Malformed(format!("{count} entries do not form a square matrix")));
    }
    let mut data = vec![None; count];
    for (i, j, z) in cells {
        if i >= n || j >= n {
            return Err(Error::Malformed(format!("index ({i}, {j}) out of range for n = {n}")));
        }
        if data[i * n + j].replace(z).is_some() {
            return Err(Error::Malformed(format!("entry ({i}, {j}) given twice")));
        }
    }
    CMatrix::from_vec(n, n, data.into_iter().map(|z| z.expect("all cells filled")).collect())
}

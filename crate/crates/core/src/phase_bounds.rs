//! Free-phase lower bounds and multiplicity upper bounds.

use num_bigint::{BigInt, BigUint};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

/// Lower bound on the number of free phases at order `n`, together with the
/// factorization it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseBound {
    pub n: u64,
    /// `(p, q)` pairs, primes ascending.
    pub factorization: Vec<(u64, u32)>,
    pub phi: BigUint,
}

impl Serialize for PhaseBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PhaseBound", 3)?;
        st.serialize_field("N", &self.n)?;
        st.serialize_field("factorization", &self.factorization)?;
        st.serialize_field("phi", &big_to_json(&self.phi))?;
        st.end()
    }
}

/// JSON number when the value fits in `u64`, decimal string otherwise.
pub fn big_to_json(v: &BigUint) -> serde_json::Value {
    match u64::try_from(v) {
        Ok(small) => serde_json::Value::from(small),
        Err(_) => serde_json::Value::String(v.to_string()),
    }
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut q = 0;
            while n.is_multiple_of(p) {
                n /= p;
                q += 1;
            }
            out.push((p, q));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn pow(p: u64, e: u32) -> BigInt {
    big(p).pow(e)
}

/// `1 + [(p−1)(q−1) − 1]·p^{q−1}`, zero for `q = 1`.
fn prime_power_phi(p: u64, q: u32) -> BigInt {
    if q == 1 {
        return BigInt::from(0);
    }
    let coeff = big(p - 1) * big(u64::from(q) - 1) - 1;
    1 + coeff * pow(p, q - 1)
}

fn phi_of(factors: &[(u64, u32)]) -> BigInt {
    match factors {
        [] => BigInt::from(0),
        [(p, q)] => prime_power_phi(*p, *q),
        [(p, q), rest @ ..] => {
            let n1: BigInt = rest.iter().map(|&(r, e)| pow(r, e)).product();
            let (p, q) = (*p, *q);
            1 + (big(p - 1) * big(u64::from(q)) * &n1 - big(p)) * pow(p, q - 1)
                + phi_of(rest) * pow(p, q)
        }
    }
}

/// `φ(N)` for `N ≥ 2`.
pub fn phi_lower_bound(n: u64) -> Result<PhaseBound> {
    if n < 2 {
        return Err(Error::Domain(format!("phi needs N >= 2, got {n}")));
    }
    let factorization = factorize(n);
    let phi = phi_of(&factorization)
        .to_biguint()
        .ok_or_else(|| Error::NumericFailure("negative phase bound".into()))?;
    Ok(PhaseBound { n, factorization, phi })
}

/// `2^{n(n−3)/2}`, with the exponent floored at 0 for `n < 3`.
pub fn multiplicity_upper_bound(n: u64) -> BigUint {
    let e = if n >= 3 { n * (n - 3) / 2 } else { 0 };
    BigUint::from(1u8) << e
}

/// `2^{r−1−(n−2)(n−3)/2}`.
pub fn reduced_bound(r: i64, n: i64) -> Result<BigUint> {
    let e = r - 1 - (n - 2) * (n - 3) / 2;
    if e < 0 {
        return Err(Error::Domain(format!(
            "rank r = {r} too small for n = {n}: exponent {e} is negative"
        )));
    }
    Ok(BigUint::from(1u8) << e as u64)
}

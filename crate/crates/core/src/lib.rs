//! Construction, canonicalization, verification and numerical discovery of
//! complex Hadamard matrices.
//!
//! The crate is organised by task:
//!
//! * [`matrix`]: dense complex matrices, predicates, Kronecker product,
//!   defect operators.
//! * [`equivalence`]: phase/permutation/conjugation transforms, dephasing,
//!   exhaustive equivalence search for small orders.
//! * [`constructions`]: Fourier, Gauss circulants, block arrays, conference
//!   doubling and a small catalog of fixed matrices.
//! * [`phase_bounds`]: free-phase lower bounds and multiplicity bounds.
//! * [`unitary_param`]: the interlaced diagonal/orthogonal factorization,
//!   its Hadamard seed, and contraction bordering.
//! * [`moduli`]: the inner-block moduli residuals and the closed-form
//!   equations used to cross-check them.
//! * [`solver`]: damped least squares with restarts, and family tracing.
//! * [`cyclic`]: cyclic n-roots, bi-unimodular sequences, circulants.

pub mod constructions;
pub mod cyclic;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod matrix;
pub mod moduli;
pub mod phase_bounds;
pub mod solver;
pub mod unitary_param;

pub use error::{Error, Result};
pub use matrix::{CBlock, CMatrix, ToleranceSpec};
pub use num_complex::Complex64;

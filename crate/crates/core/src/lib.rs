//! Exact lattice arithmetic for rank-2 Picard lattices of quartic K3 surfaces.
//!
//! The crate checks, with integer arithmetic only, the lattice-side hypotheses
//! that force a K3 automorphism of infinite order which no Cremona
//! transformation of the ambient projective space restricts to:
//!
//! * [`lattice`]: Gram matrices, inner products, determinants, signatures.
//! * [`quadform`]: binary forms, Pell equations, representability, automorphs.
//! * [`discgroup`]: Smith normal form and the discriminant group `L*/L`.
//! * [`isometry`]: isometry validation, order, characteristic data, orbits.
//! * [`certificate`]: the five-step certificate pipeline and its report.
//! * [`oracle`]: brute-force verifiers that every decision procedure must agree with.

pub mod certificate;
pub mod discgroup;
mod error;
pub mod intser;
pub mod isometry;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod quadform;

pub use error::{Error, Result};
pub use lattice::{GramLattice, LatticeVector, Signature};
pub use matrix::IntMatrix;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

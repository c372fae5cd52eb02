//! Graded dimensions of principal subspaces of level-k standard modules for
//! affine sl(3).
//!
//! * [`root_data`]: weights, the invariant form and affine highest weights.
//! * [`qseries`]: truncated series in (x1, x2, q) with exact coefficients.
//! * [`characters`]: the modified characters χ′ of the principal subspaces.
//! * [`recursions`]: the q-difference identities as residual computations,
//!   plus a small text language for writing new ones.
//! * [`voa_oracle`]: independent graded dimensions from the lattice
//!   vertex-operator realization inside a tensor power of Fock spaces.

pub mod characters;
pub mod qseries;
pub mod recursions;
pub mod root_data;
pub mod voa_oracle;

pub use characters::{char_of, CharError, CharSpec, Family};
pub use qseries::{Envelope, Series, SeriesError};
pub use root_data::{AffineHW, Rational, Weight};

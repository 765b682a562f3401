//! Exact-arithmetic toolkit for dynamics of convergent power series on the
//! integer ring `O_K` of a finite extension `K` of the `p`-adic numbers.
//!
//! The crate computes the minimal decomposition `O_K = A ⊔ B ⊔ C` of such a
//! system: `A` the finite set of periodic points, `B` a union of clopen
//! invariant sets on which the dynamics is conjugate to an odometer, and `C`
//! the attracting basins. The decomposition is driven by cycle lifting on
//! the induced maps over `O/pi^n O`, with a closed-form analysis of affine
//! maps available both standalone and as an independent cross-check.
//!
//! Modules:
//! - [`ring`]: exact arithmetic in `O_K/pi^N O_K` (valuations, units,
//!   canonical digit expansions).
//! - [`series`]: the algebra of convergent power series: evaluation,
//!   derivative, composition, Weierstrass degree and preparation.
//! - [`dynamics`]: induced level maps, cycle detection, the cycle
//!   invariants and their four-way classification, single-step lifting.
//! - [`engine`]: the decomposition driver producing a verdict-labelled
//!   tree that tiles `O_K`.
//! - [`affine`]: closed-form minimal decomposition of `x -> alpha x + beta`.
//! - [`io`]: JSON descriptors and report types.
//! - [`verify`]: the seeded property-suite runner.

pub mod affine;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod fq;
pub mod io;
pub mod ring;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use ring::{Element, ResidueClass, RingSpec, Valuation};
pub use series::ConvergentSeries;

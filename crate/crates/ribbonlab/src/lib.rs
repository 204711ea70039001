//! Dimension-reduction toolkit for thin nematic elastomer sheets and bilayers.
//!
//! The crate follows one pipeline through three levels of description:
//!
//! * **3D**: an incompressible-neo-Hookean-type bulk energy with a spontaneous
//!   metric induced by a director texture frozen across the thickness
//!   ([`material`]).
//! * **2D**: the bending-regime plate model obtained by relaxing the quadratic
//!   energy over thickness profiles.  The relaxed density is an anisotropic
//!   quadratic form in the second fundamental form with an explicit target
//!   curvature and a residual offset ([`relaxation`], [`plate`]).
//! * **1D**: the narrow-ribbon limit of the twist plate model, an explicit
//!   piecewise density in the bending and torsion rates of a rod frame
//!   ([`rod`]).
//!
//! [`geometry`] turns minimizing rates back into actual shapes: frame
//! integration on SO(3), ribbon and cylinder meshes, OBJ/CSV export.
//! [`verify`] bundles the cross-checks that tie the levels together
//! (closed forms against quadrature oracles, plate minima against rod minima,
//! recovery sequences against the plate limit).
//!
//! Everything is nondimensional: the shear modulus `mu` and the reference
//! thickness scale `h0` are the units, and reported quantities carry unit
//! strings in terms of `mu`, `alpha0` and `h0`.

// Guards written as `!(x > 0.0)` are deliberate: unlike `x <= 0.0` they also
// reject NaN, which every entry-point validation here must do.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod material;
pub mod plate;
pub mod quadrature;
pub mod relaxation;
pub mod report;
pub mod rod;
pub mod verify;

pub use error::{Error, Result};

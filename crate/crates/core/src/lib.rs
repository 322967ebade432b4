//! Dilation-theoretic norm bounds for commuting contractive matrices.
//!
//! The crate builds unitary colligations and their transfer functions for
//! pairs (or tuples) of commuting contractions, evaluates the transfer
//! function on finite Blaschke model spaces, and uses the resulting
//! dilations to compute a hierarchy of operator-norm bounds for
//! polynomials in two commuting matrix variables. Every bound comes with
//! explicit numerical certificates; nothing is reported as verified
//! unless the corresponding residual clears its tolerance.
//!
//! The main entry points are:
//!
//! * [`contraction`]: row contractions, defect spaces, purity and
//!   unitary / completely-non-unitary splitting.
//! * [`model`]: finite-dimensional model spaces attached to a Blaschke
//!   product, with exact Gram matrices and the compressed backward shift.
//! * [`dilation`]: intertwining isometries, unitary extensions, transfer
//!   functions and dilation pairs for commuting contractions.
//! * [`bounds`]: the norm-bound hierarchy and the chain verifier.
//! * [`cli`]: JSON file formats and the `ando-lab` command line tool.

pub mod bounds;
pub mod cli;
pub mod cmatrix;
pub mod contraction;
pub mod dilation;
pub mod error;
pub mod fock;
pub mod model;
pub mod polynomial;
pub mod report;
pub mod tol;

pub use cmatrix::CMatrix;
pub use error::{Error, Result};
pub use tol::Tolerances;

//! Numerical tools for elliptic-hyperbolic variational equations: type
//! classification on the extended projective disc, extremal surfaces and
//! nonlinear Hodge duality, a mixed lens-domain solver, symmetric positive
//! systems for Keldysh-type equations and conformal energy diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN fails validation, and stencil
// loops read better with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod energy;
pub mod friedrichs;
pub mod geometry;
pub mod grid;
pub mod hodge_disc;
pub mod io;
pub mod linalg;
pub mod quad;
pub mod surfaces;

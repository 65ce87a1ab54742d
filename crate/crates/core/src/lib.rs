//! Numerical toolkit for rotationally symmetric gradient rho-Einstein solitons
//! `Ric + Hess f = rho R g + lambda g` and the Ricci–Bourguignon flow
//! `dg/dt = -2 (Ric - rho R g)`.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod growth;
pub mod identities;
pub mod interp;
pub mod ode;
pub mod par;
pub mod params;
pub mod selfsim;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{curvature, f_laplacian, radial_hessian, CurvatureData, EndKind, WarpedGeometry};
pub use grid::{derivative, make_grid, RadialGrid, RadialProfile};
pub use params::SolitonParams;

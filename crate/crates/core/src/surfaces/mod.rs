//! Extremal graphs in Euclidean and Minkowski 3-space, the Legendre
//! transform, and nonlinear Hodge equations `δ(ρ(Q)ω) = dω = 0`.

mod density;
mod extremal;
mod hodge;
mod legendre;

pub use density::{CustomDensity, Density, DensityKind, DensityValue, SonicLocus, LIGHT_CONE_TOL};
pub use extremal::{area_functional, extremal_residual, ExtremalKind};
pub use hodge::{dual_form, energy, hodge_residual, DualForm, DualTolerances, HodgeResidual};
pub use legendre::{legendre_transform, legendre_transform_with, HodographField, LegendreOptions};

use thiserror::Error;

use crate::grid::GridError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("divergence form undefined: 1 - |grad u|^2 = {margin} at ({x}, {y})")]
    DivergenceUndefined { x: f64, y: f64, margin: f64 },
    #[error("Legendre transform is singular on the whole grid")]
    LegendreSingular,
    #[error("Q = {q} lies on the light cone")]
    LightCone { q: f64 },
    #[error("Q = {q} reaches the cavitation bound {limit}")]
    Cavitation { q: f64, limit: f64 },
    #[error("Q = {q} is outside the density's domain")]
    DensityDomain { q: f64 },
    #[error("form is not closed: residual {residual} exceeds {threshold}")]
    NotClosed { residual: f64, threshold: f64 },
    #[error("path integrals disagree by {defect} (tolerance {tol})")]
    PathDependence { defect: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

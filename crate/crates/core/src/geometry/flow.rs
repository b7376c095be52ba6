//! Flow metrics of the compressible continuity equation and of extremal
//! graphs, each split into a conformally flat part and a rank-one correction.

use serde::{Deserialize, Serialize};

use super::{GeometryError, MetricTensor2, DEFAULT_TYPE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    /// `c²(dx² + dy²) − (*dψ)²` for an ideal polytropic gas with velocity `(u, v)`.
    Continuity,
    /// `dx² + dy² + dψ²` for a graph `z = ψ` with `∇ψ = (u, v)`.
    MinimalEuclidean,
    /// `dx² + dy² − dψ²` for a graph in Minkowski space.
    MinkowskiGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowMetric {
    /// Full metric: conformal part plus correction.
    pub metric: MetricTensor2,
    /// Factor multiplying `dx² + dy²`.
    pub conformal_factor: f64,
    /// Coefficients `(g11, g12, g22)` of the rank-one non-Euclidean part.
    pub correction: [f64; 3],
}

/// Squared speed at which the polytropic sound speed vanishes.
pub fn cavitation_limit(gamma_ad: f64) -> f64 {
    2.0 / (gamma_ad - 1.0)
}

pub fn flow_metric(
    kind: FlowKind,
    u: f64,
    v: f64,
    gamma_ad: f64,
) -> Result<FlowMetric, GeometryError> {
    let (conformal_factor, correction) = match kind {
        FlowKind::Continuity => {
            if !(gamma_ad > 1.0) {
                return Err(GeometryError::InvalidArgument(format!(
                    "adiabatic exponent must exceed 1, got {gamma_ad}"
                )));
            }
            let speed2 = u * u + v * v;
            let limit = cavitation_limit(gamma_ad);
            let c2 = 1.0 - 0.5 * (gamma_ad - 1.0) * speed2;
            // Compared through c² so that 2/(γ−1) rounding does not decide it.
            if c2 <= DEFAULT_TYPE_TOL {
                return Err(GeometryError::Cavitation { speed2, limit });
            }
            // *dψ = u dy − v dx
            (c2, [-v * v, u * v, -u * u])
        }
        FlowKind::MinimalEuclidean => (1.0, [u * u, u * v, v * v]),
        FlowKind::MinkowskiGraph => (1.0, [-u * u, -u * v, -v * v]),
    };
    let metric = MetricTensor2::new(
        conformal_factor + correction[0],
        correction[1],
        conformal_factor + correction[2],
        DEFAULT_TYPE_TOL,
    );
    Ok(FlowMetric {
        metric,
        conformal_factor,
        correction,
    })
}

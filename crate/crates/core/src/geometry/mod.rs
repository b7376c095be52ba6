//! Metrics, type classification and characteristic geometry on the
//! extended projective disc.
//!
//! Points inside the unit circle are ordinary points of the Beltrami disc;
//! points outside are ideal points. The circle itself (the absolute) is the
//! parabolic line of the Laplace–Beltrami operator.

mod characteristics;
mod flow;
mod lens;

pub use characteristics::{
    characteristic_slopes, trace_characteristic, Branch, CharacteristicPath, Heading, Slope,
    TraceOptions,
};
pub use flow::{cavitation_limit, flow_metric, FlowKind, FlowMetric};
pub use lens::{
    build_lens_domain, polar_lines_of_chord, Leaf, LensDomain, Line2, Region, Segment, SegmentKind,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default half-width of the parabolic band and of metric degeneracy.
pub const DEFAULT_TYPE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("metric is singular on the absolute at ({x}, {y})")]
    MetricSingular { x: f64, y: f64 },
    #[error("no distinct characteristic directions at ({x}, {y})")]
    DegenerateDirection { x: f64, y: f64 },
    #[error("invalid chord x0 = {x0}: {reason}")]
    InvalidChord { x0: f64, reason: &'static str },
    #[error("speed squared {speed2} reaches the cavitation bound {limit}")]
    Cavitation { speed2: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Riemannian,
    Lorentzian,
    Degenerate,
    /// `det g > 0` with `g11 < 0`; never produced by the metrics in this crate.
    NegativeDefinite,
}

/// A symmetric 2×2 metric tensor at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor2 {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub signature: Signature,
}

impl MetricTensor2 {
    pub fn new(g11: f64, g12: f64, g22: f64, tol: f64) -> Self {
        let det = g11 * g22 - g12 * g12;
        let signature = if det.abs() <= tol {
            Signature::Degenerate
        } else if det < 0.0 {
            Signature::Lorentzian
        } else if g11 > 0.0 {
            Signature::Riemannian
        } else {
            Signature::NegativeDefinite
        };
        Self {
            g11,
            g12,
            g22,
            signature,
        }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }
}

/// Beltrami's projective-disc metric, extended to ideal points.
pub fn beltrami_metric(p: Point2) -> Result<MetricTensor2, GeometryError> {
    let d = 1.0 - p.x * p.x - p.y * p.y;
    if d.abs() <= DEFAULT_TYPE_TOL {
        return Err(GeometryError::MetricSingular { x: p.x, y: p.y });
    }
    let d2 = d * d;
    // |det g| = 1/|d|^3, so it cannot degenerate once d is bounded away from 0.
    Ok(MetricTensor2::new(
        (1.0 - p.y * p.y) / d2,
        p.x * p.y / d2,
        (1.0 - p.x * p.x) / d2,
        0.0,
    ))
}

/// Principal coefficients `α u_xx + 2β u_xy + γ u_yy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl OperatorCoefficients {
    pub fn discriminant(&self) -> f64 {
        self.alpha * self.gamma - self.beta * self.beta
    }
}

/// Principal part of the linearised extremal-surface equation in hodograph
/// coordinates `(p, q)`.
pub fn operator_coefficients_exp2(p: Point2) -> OperatorCoefficients {
    OperatorCoefficients {
        alpha: 1.0 - p.x * p.x,
        beta: -p.x * p.y,
        gamma: 1.0 - p.y * p.y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeClass {
    pub kind: TypeKind,
    pub discriminant: f64,
    pub tolerance: f64,
}

pub fn classify(c: &OperatorCoefficients, tol: f64) -> TypeClass {
    let discriminant = c.discriminant();
    let kind = if discriminant.abs() <= tol {
        TypeKind::Parabolic
    } else if discriminant > 0.0 {
        TypeKind::Elliptic
    } else {
        TypeKind::Hyperbolic
    };
    TypeClass {
        kind,
        discriminant,
        tolerance: tol,
    }
}

//! Polar lines of vertical chords and the lens-shaped mixed domain built from
//! an annular sector and the triangle cut off by a chord's polar lines.

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2};

/// A line `n1·x + n2·y = d` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2 {
    pub n1: f64,
    pub n2: f64,
    pub d: f64,
}

impl Line2 {
    pub fn new(n1: f64, n2: f64, d: f64) -> Result<Self, GeometryError> {
        let len = n1.hypot(n2);
        if !(len > 0.0) || !d.is_finite() {
            return Err(GeometryError::InvalidArgument(
                "line normal must be nonzero and finite".into(),
            ));
        }
        Ok(Self {
            n1: n1 / len,
            n2: n2 / len,
            d: d / len,
        })
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.n1 * p.x + self.n2 * p.y - self.d
    }

    /// Distance of the line from the origin.
    pub fn origin_distance(&self) -> f64 {
        self.d.abs()
    }

    /// Unit direction along the line.
    pub fn direction(&self) -> (f64, f64) {
        (-self.n2, self.n1)
    }

    pub fn intersect(&self, other: &Line2) -> Option<Point2> {
        let det = self.n1 * other.n2 - self.n2 * other.n1;
        if det.abs() < 1e-14 {
            return None;
        }
        Some(Point2::new(
            (self.d * other.n2 - self.n2 * other.d) / det,
            (self.n1 * other.d - self.d * other.n1) / det,
        ))
    }
}

fn check_chord(x0: f64) -> Result<(), GeometryError> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(GeometryError::InvalidChord {
            x0,
            reason: "chord abscissa must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Tangent lines to the unit circle at `(x0, ±√(1−x0²))`, upper line first,
/// together with their intersection point.
pub fn polar_lines_of_chord(x0: f64) -> Result<(Line2, Line2, Point2), GeometryError> {
    check_chord(x0)?;
    let y0 = (1.0 - x0 * x0).sqrt();
    let upper = Line2 {
        n1: x0,
        n2: y0,
        d: 1.0,
    };
    let lower = Line2 {
        n1: x0,
        n2: -y0,
        d: 1.0,
    };
    Ok((upper, lower, Point2::new(1.0 / x0, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Inner arc `r = ε`.
    EllipticArc,
    /// Arc of the unit circle between the chord's endpoints; interior to the domain.
    ParabolicArc,
    /// Piece of a polar line between its tangency point and the pole.
    CharacteristicSegment,
    /// Ray piece `θ = ±θ0`, `ε ≤ r ≤ 1`.
    RadialSegment,
}

/// A boundary piece; arcs are centred at the origin and run from `start` to
/// `end` in the stored direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: Point2,
    pub end: Point2,
}

impl Segment {
    pub fn is_arc(&self) -> bool {
        matches!(
            self.kind,
            SegmentKind::EllipticArc | SegmentKind::ParabolicArc
        )
    }

    /// `n + 1` points from `start` to `end`, inclusive.
    pub fn sample(&self, n: usize) -> Vec<Point2> {
        let n = n.max(1);
        if self.is_arc() {
            let r = self.start.norm();
            let (t0, t1) = (self.start.angle(), self.end.angle());
            (0..=n)
                .map(|i| Point2::from_polar(r, t0 + (t1 - t0) * i as f64 / n as f64))
                .collect()
        } else {
            (0..=n)
                .map(|i| {
                    let s = i as f64 / n as f64;
                    Point2::new(
                        self.start.x + s * (self.end.x - self.start.x),
                        self.start.y + s * (self.end.y - self.start.y),
                    )
                })
                .collect()
        }
    }
}

/// One element of the characteristic foliation of the hyperbolic part: the
/// pair of polar lines of the chord `x = tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub tau: f64,
    /// Angle of the tangency points, `arccos(tau)`.
    pub half_angle: f64,
    pub upper: Line2,
    pub lower: Line2,
    pub pole: Point2,
}

impl Leaf {
    /// Radius of the upper line at polar angle `theta ∈ [-half_angle, half_angle]`.
    pub fn radius_upper(&self, theta: f64) -> f64 {
        1.0 / (self.half_angle - theta).cos()
    }

    pub fn radius_lower(&self, theta: f64) -> f64 {
        1.0 / (self.half_angle + theta).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensDomain {
    pub x0: f64,
    pub eps: f64,
    pub theta0: f64,
    pub pole: Point2,
    pub upper_polar: Line2,
    pub lower_polar: Line2,
    /// Outer boundary, counterclockwise, starting at the pole.
    pub boundary: Vec<Segment>,
    /// The parabolic arc `ν`, from `(1, −θ0)` to `(1, θ0)`.
    pub nu: Segment,
}

/// Which part of the lens a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Elliptic,
    Hyperbolic,
    Outside,
}

pub fn build_lens_domain(x0: f64, eps: f64) -> Result<LensDomain, GeometryError> {
    check_chord(x0)?;
    if !(eps > 0.0 && eps < x0) {
        return Err(GeometryError::InvalidChord {
            x0,
            reason: "inner radius must satisfy 0 < eps < x0",
        });
    }
    let theta0 = x0.acos();
    let (upper, lower, pole) = polar_lines_of_chord(x0)?;
    let top = Point2::from_polar(1.0, theta0);
    let bottom = Point2::from_polar(1.0, -theta0);
    let inner_top = Point2::from_polar(eps, theta0);
    let inner_bottom = Point2::from_polar(eps, -theta0);
    let boundary = vec![
        Segment {
            kind: SegmentKind::CharacteristicSegment,
            start: pole,
            end: top,
        },
        Segment {
            kind: SegmentKind::RadialSegment,
            start: top,
            end: inner_top,
        },
        Segment {
            kind: SegmentKind::EllipticArc,
            start: inner_top,
            end: inner_bottom,
        },
        Segment {
            kind: SegmentKind::RadialSegment,
            start: inner_bottom,
            end: bottom,
        },
        Segment {
            kind: SegmentKind::CharacteristicSegment,
            start: bottom,
            end: pole,
        },
    ];
    Ok(LensDomain {
        x0,
        eps,
        theta0,
        pole,
        upper_polar: upper,
        lower_polar: lower,
        boundary,
        nu: Segment {
            kind: SegmentKind::ParabolicArc,
            start: bottom,
            end: top,
        },
    })
}

impl LensDomain {
    /// Largest radius reached by the domain (the pole).
    pub fn r_max(&self) -> f64 {
        1.0 / self.x0
    }

    /// Angular half-width of the hyperbolic part at radius `r ≥ 1`.
    pub fn hyperbolic_half_width(&self, r: f64) -> f64 {
        if r < 1.0 {
            return self.theta0;
        }
        self.theta0 - (1.0 / r).min(1.0).acos()
    }

    /// Classifies polar coordinates `(r, θ)`, closed regions; `r = 1` counts as elliptic.
    pub fn region_polar(&self, r: f64, theta: f64) -> Region {
        if r >= self.eps && r <= 1.0 && theta.abs() <= self.theta0 {
            Region::Elliptic
        } else if r > 1.0 && theta.abs() <= self.hyperbolic_half_width(r) {
            Region::Hyperbolic
        } else {
            Region::Outside
        }
    }

    pub fn region(&self, p: Point2) -> Region {
        self.region_polar(p.norm(), p.angle())
    }

    /// The first `count` leaves of the foliation, ordered by decreasing pole
    /// distance; the first leaf is the polar pair of the defining chord.
    pub fn leaves(&self, count: usize) -> Vec<Leaf> {
        (0..count)
            .map(|i| {
                let tau = self.x0 + (1.0 - self.x0) * i as f64 / count as f64;
                self.leaf(tau)
            })
            .collect()
    }

    /// The leaf through the chord `x = tau`, `x0 ≤ tau < 1`.
    pub fn leaf(&self, tau: f64) -> Leaf {
        let y = (1.0 - tau * tau).sqrt();
        Leaf {
            tau,
            half_angle: tau.acos(),
            upper: Line2 {
                n1: tau,
                n2: y,
                d: 1.0,
            },
            lower: Line2 {
                n1: tau,
                n2: -y,
                d: 1.0,
            },
            pole: Point2::new(1.0 / tau, 0.0),
        }
    }

    /// Chord abscissa of the leaf through an ideal point of the hyperbolic part.
    pub fn leaf_through(&self, p: Point2) -> Option<f64> {
        let r = p.norm();
        if r <= 1.0 || self.region(p) != Region::Hyperbolic {
            return None;
        }
        // The point sits on a polar line at angular offset arccos(1/r) from
        // its tangency point.
        let half_angle = p.angle().abs() + (1.0 / r).acos();
        Some(half_angle.cos())
    }
}

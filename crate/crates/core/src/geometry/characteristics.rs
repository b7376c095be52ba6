//! Characteristic directions of `(a²−x²)dy² + 2xy dx dy + (a²−y²)dx² = 0`.
//!
//! Outside the circle of radius `a` the two real directions at a point are
//! the tangent lines from that point to the circle, so every integral curve
//! is a straight line at distance `a` from the origin.

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2};

/// A characteristic direction `dy/dx`, or the vertical direction `dx = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Finite(f64),
    Vertical,
}

/// Real slopes `m` of `(a²−x²)m² + 2xy·m + (a²−y²) = 0`.
///
/// Empty at elliptic points (`x² + y² < a²`); a single entry on the circle;
/// two entries outside. When the leading coefficient vanishes (`|x| = a`)
/// the vertical direction is one of the roots.
pub fn characteristic_slopes(p: Point2, a: f64) -> Vec<Slope> {
    let (x, y) = (p.x, p.y);
    let a2 = a * a;
    let lead = a2 - x * x;
    let mid = 2.0 * x * y;
    let tail = a2 - y * y;
    let scale = a2.max(x * x).max(y * y).max(1.0);
    let tol = 1e-12 * scale;

    if lead.abs() <= tol {
        let mut out = Vec::with_capacity(2);
        if mid.abs() > tol {
            out.push(Slope::Finite(-tail / mid));
        }
        out.push(Slope::Vertical);
        return out;
    }

    // Quarter discriminant: (xy)² − (a²−x²)(a²−y²) = a²(x²+y²−a²).
    let disc = a2 * (x * x + y * y - a2);
    if disc < -tol * scale {
        return Vec::new();
    }
    if disc.abs() <= tol * scale {
        return vec![Slope::Finite(-x * y / lead)];
    }
    let root = disc.sqrt();
    let half = 0.5 * mid;
    // Cancellation-free pair of roots.
    let qv = -(half + half.signum() * root);
    let (m1, m2) = if qv == 0.0 {
        (root / lead, -root / lead)
    } else {
        (qv / lead, tail / qv)
    };
    let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
    vec![Slope::Finite(lo), Slope::Finite(hi)]
}

/// Which of the two tangent lines through an ideal point to follow: the sign
/// of `x·dy − y·dx`, i.e. the side of the origin the line passes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Direction of travel along the tangent line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heading {
    /// Away from the point of tangency.
    Outward,
    /// Towards the point of tangency; the path stops there.
    TowardCircle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub radius: f64,
    pub heading: Heading,
    /// Distance from the circle at which a point counts as on it.
    pub circle_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            radius: 1.0,
            heading: Heading::Outward,
            circle_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPath {
    pub points: Vec<Point2>,
    pub step: f64,
    pub branch: Branch,
    pub radius: f64,
}

impl CharacteristicPath {
    pub fn arc_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }

    /// Largest deviation of `|x·dy − y·dx|` from the radius over all chords of
    /// the path; zero for a straight line tangent to the circle.
    pub fn tangency_defect(&self) -> f64 {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        let (dx, dy) = (last.x - first.x, last.y - first.y);
        let len = dx.hypot(dy);
        if len == 0.0 {
            return 0.0;
        }
        let (ux, uy) = (dx / len, dy / len);
        self.points
            .iter()
            .map(|p| ((p.x * uy - p.y * ux).abs() - self.radius).abs())
            .fold(0.0, f64::max)
    }
}

/// Unit characteristic direction at `p` for the given branch and heading.
fn direction(p: Point2, a: f64, branch: Branch, heading: Heading) -> (f64, f64) {
    let r = p.norm();
    let (ex, ey) = (p.x / r, p.y / r);
    let (nx, ny) = (-ey, ex);
    let beta = branch.sign() * (a / r).min(1.0);
    let mut alpha = (1.0 - beta * beta).max(0.0).sqrt();
    if heading == Heading::TowardCircle {
        alpha = -alpha;
    }
    (alpha * ex + beta * nx, alpha * ey + beta * ny)
}

/// Integrates the chosen characteristic branch with a fixed-step classical
/// Runge–Kutta scheme in arc length.
pub fn trace_characteristic(
    start: Point2,
    branch: Branch,
    step: f64,
    max_len: f64,
    opts: TraceOptions,
) -> Result<CharacteristicPath, GeometryError> {
    let a = opts.radius;
    if !(a > 0.0) {
        return Err(GeometryError::InvalidArgument(format!(
            "characteristic radius must be positive, got {a}"
        )));
    }
    if !(step > 0.0) || !(max_len >= 0.0) || !start.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "invalid trace parameters: step {step}, max_len {max_len}"
        )));
    }
    let r0 = start.norm();
    if r0 < a - opts.circle_tol {
        return Err(GeometryError::DegenerateDirection {
            x: start.x,
            y: start.y,
        });
    }

    let mut points = vec![start];
    let mut p = start;
    let mut travelled = 0.0;
    let f = |q: Point2| direction(q, a, branch, opts.heading);
    while travelled < max_len - 1e-15 {
        if opts.heading == Heading::TowardCircle {
            let (dx, dy) = f(p);
            // Distance along the line to the tangency point.
            let remaining = -(p.x * dx + p.y * dy);
            if remaining <= opts.circle_tol {
                break;
            }
            if remaining <= step.min(max_len - travelled) {
                p = Point2::new(p.x + remaining * dx, p.y + remaining * dy);
                points.push(p);
                break;
            }
        }
        let h = step.min(max_len - travelled);
        let k1 = f(p);
        let k2 = f(Point2::new(p.x + 0.5 * h * k1.0, p.y + 0.5 * h * k1.1));
        let k3 = f(Point2::new(p.x + 0.5 * h * k2.0, p.y + 0.5 * h * k2.1));
        let k4 = f(Point2::new(p.x + h * k3.0, p.y + h * k3.1));
        p = Point2::new(
            p.x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            p.y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        points.push(p);
        travelled += h;
    }
    Ok(CharacteristicPath {
        points,
        step,
        branch,
        radius: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_distance(p: Point2, n1: f64, n2: f64, d: f64) -> f64 {
        (n1 * p.x + n2 * p.y - d).abs()
    }

    #[test]
    fn slopes_examples() {
        let s = characteristic_slopes(Point2::new(2f64.sqrt(), 0.0), 1.0);
        assert_eq!(s.len(), 2);
        match (s[0], s[1]) {
            (Slope::Finite(a), Slope::Finite(b)) => {
                assert!((a + 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(characteristic_slopes(Point2::new(0.0, 0.0), 1.0).is_empty());
        assert_eq!(
            characteristic_slopes(Point2::new(1.0, 0.0), 1.0),
            vec![Slope::Vertical]
        );
        // |x| = a off the axis: one finite root plus the vertical one.
        let s = characteristic_slopes(Point2::new(1.0, 2.0), 1.0);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1], Slope::Vertical);
        if let Slope::Finite(m) = s[0] {
            // (1 - 4) + 4m = 0
            assert!((m - 0.75).abs() < 1e-14);
        }
    }

    #[test]
    fn slopes_solve_the_quadratic() {
        for &(x, y) in &[(1.3, 0.4), (-2.0, 1.5), (0.2, -1.7), (3.0, 3.0)] {
            for s in characteristic_slopes(Point2::new(x, y), 1.0) {
                if let Slope::Finite(m) = s {
                    let v = (1.0 - x * x) * m * m + 2.0 * x * y * m + (1.0 - y * y);
                    assert!(v.abs() < 1e-10 * (1.0 + m * m), "({x},{y}) m={m} v={v}");
                }
            }
        }
    }

    #[test]
    fn trace_from_tangency_point_stays_on_tangent() {
        let start = Point2::new(0.5, 0.75f64.sqrt());
        let path =
            trace_characteristic(start, Branch::Minus, 1e-3, 1.0, TraceOptions::default()).unwrap();
        for p in &path.points {
            assert!(line_distance(*p, 0.5, 0.75f64.sqrt(), 1.0) < 1e-6);
        }
        assert!((path.arc_length() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_from_axis_has_unit_slope() {
        let start = Point2::new(2f64.sqrt(), 0.0);
        let path =
            trace_characteristic(start, Branch::Plus, 1e-2, 0.5, TraceOptions::default()).unwrap();
        let end = path.points.last().unwrap();
        let slope = (end.y - start.y) / (end.x - start.x);
        assert!((slope - 1.0).abs() < 1e-10);
        assert!(path.tangency_defect() < 1e-10);
    }

    #[test]
    fn trace_inside_disc_is_degenerate() {
        assert!(matches!(
            trace_characteristic(
                Point2::new(0.0, 0.0),
                Branch::Plus,
                1e-3,
                1.0,
                TraceOptions::default()
            ),
            Err(GeometryError::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn trace_toward_circle_stops_at_tangency() {
        let start = Point2::new(2.0, 0.0);
        let opts = TraceOptions {
            heading: Heading::TowardCircle,
            ..TraceOptions::default()
        };
        let path = trace_characteristic(start, Branch::Plus, 1e-2, 10.0, opts).unwrap();
        let end = path.points.last().unwrap();
        assert!((end.norm() - 1.0).abs() < 1e-9);
        // Tangency point of the tangent from (2,0) is (1/2, ±√3/2).
        assert!((end.x - 0.5).abs() < 1e-9);
        assert!((path.arc_length() - 3f64.sqrt()).abs() < 1e-9);
    }
}

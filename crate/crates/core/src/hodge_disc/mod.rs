//! The polar form `Lφ = r²(1−r²)φ_rr + φ_θθ + r(1−2r²)φ_r` of the
//! Laplace–Beltrami-type equation on the extended disc, the multiplier pair
//! `(ψ₁, ψ₂)` behind its uniqueness argument, and a lens-domain solver.
//!
//! Polar fields are [`GridField`]s on a [`Chart::Polar`] lattice whose first
//! axis is `r` and second axis is `θ`.

mod lens_solver;

pub use lens_solver::{
    overdetermination_gap, solve_open_problem, BoundaryData, GapReport, LensSolution,
    RegionResidual, SolveOptions, SolveRegion,
};

use thiserror::Error;

use crate::geometry::{CharacteristicPath, GeometryError};
use crate::grid::{Chart, Derivatives, GridError, GridField};
use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeDiscError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("elliptic solve did not converge: {0}")]
    NonConvergence(#[from] LinalgError),
    #[error("characteristic marching left {uncovered} of {total} hyperbolic nodes uncovered")]
    FoliationGap { uncovered: usize, total: usize },
    #[error("boundary data mismatch {mismatch} at corner (r, θ) = ({r}, {theta})")]
    CornerMismatch { r: f64, theta: f64, mismatch: f64 },
    #[error("path point (r, θ) = ({r}, {theta}) is not in the hyperbolic region")]
    OutsideHyperbolicRegion { r: f64, theta: f64 },
    #[error("path point (r, θ) = ({r}, {theta}) is outside the field's chart")]
    OutsideChart { r: f64, theta: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn require_polar(phi: &GridField) -> Result<(), HodgeDiscError> {
    phi.require_chart(Chart::Polar)?;
    phi.require_components(1)?;
    if phi.origin()[0] <= 0.0 {
        return Err(HodgeDiscError::InvalidArgument(
            "polar fields must stay away from r = 0".into(),
        ));
    }
    Ok(())
}

/// Node-ordered radius of every node.
fn radii(phi: &GridField) -> Vec<f64> {
    let [nx, ny] = phi.dims();
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(phi.coord(i, j).0);
        }
    }
    out
}

/// `Lφ` at every node, one-sided on the lattice edge.
pub fn polar_residual(phi: &GridField) -> Result<GridField, HodgeDiscError> {
    require_polar(phi)?;
    let d = Derivatives::of(phi, 0);
    let out = radii(phi)
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            r * r * (1.0 - r * r) * d.dxx[k] + d.dyy[k] + r * (1.0 - 2.0 * r * r) * d.dx[k]
        })
        .collect();
    Ok(phi.scalar_like(out)?)
}

/// `ψ₁ = r²(1−r²)φ_r² − φ_θ²` and `ψ₂ = −2φ_rφ_θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryPair {
    pub psi1: GridField,
    pub psi2: GridField,
}

pub fn psi_pair(phi: &GridField) -> Result<AuxiliaryPair, HodgeDiscError> {
    require_polar(phi)?;
    let d = Derivatives::of(phi, 0);
    let r = radii(phi);
    let mut p1 = Vec::with_capacity(r.len());
    let mut p2 = Vec::with_capacity(r.len());
    for k in 0..r.len() {
        let (fr, ft) = (d.dx[k], d.dy[k]);
        p1.push(r[k] * r[k] * (1.0 - r[k] * r[k]) * fr * fr - ft * ft);
        p2.push(-2.0 * fr * ft);
    }
    Ok(AuxiliaryPair {
        psi1: phi.scalar_like(p1)?,
        psi2: phi.scalar_like(p2)?,
    })
}

/// `max |ψ₂_θ − ψ₁_r + 2φ_r·Lφ|` over nodes at least two away from the
/// lattice edge, where every stencil involved is centred.
pub fn multiplier_identity_residual(phi: &GridField) -> Result<f64, HodgeDiscError> {
    let [nr, nt] = phi.dims();
    let (r0, t0) = phi.coord(0, 0);
    let (r1, t1) = phi.coord(nr - 1, nt - 1);
    multiplier_identity_residual_within(phi, (r0, r1), (t0, t1))
}

/// As [`multiplier_identity_residual`], restricted to nodes inside a fixed
/// window. Refinement studies should pass the same window at every level so
/// the maximum is taken over the same physical set.
pub fn multiplier_identity_residual_within(
    phi: &GridField,
    r_range: (f64, f64),
    theta_range: (f64, f64),
) -> Result<f64, HodgeDiscError> {
    let pair = psi_pair(phi)?;
    let l = polar_residual(phi)?;
    let dp2 = Derivatives::of(&pair.psi2, 0);
    let dp1 = Derivatives::of(&pair.psi1, 0);
    let dphi = Derivatives::of(phi, 0);
    let lv = l.values();
    let [nr, nt] = phi.dims();
    let slack = 1e-9 * phi.spacing()[0].min(phi.spacing()[1]);
    let mut m = 0.0f64;
    for j in 2..nt.saturating_sub(2) {
        for i in 2..nr.saturating_sub(2) {
            let (r, t) = phi.coord(i, j);
            let inside = r >= r_range.0 - slack
                && r <= r_range.1 + slack
                && t >= theta_range.0 - slack
                && t <= theta_range.1 + slack;
            if !inside || phi.is_masked(i, j) {
                continue;
            }
            let k = j * nr + i;
            m = m.max((dp2.dy[k] - dp1.dx[k] + 2.0 * dphi.dx[k] * lv[k]).abs());
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiField {
    pub chi: GridField,
    /// Node `(i, j)` where `χ = 0`.
    pub base: (usize, usize),
    /// Largest disagreement between the two integration paths.
    pub defect: f64,
}

/// Integrates `χ_θ = ψ₁`, `χ_r = ψ₂` from the node nearest `base = (r, θ)`:
/// first along `r`, then along `θ`; the other order is the check path.
pub fn chi_reconstruct(pair: &AuxiliaryPair, base: (f64, f64)) -> Result<ChiField, HodgeDiscError> {
    let g = &pair.psi1;
    require_polar(g)?;
    let [nr, nt] = g.dims();
    let [hr, ht] = g.spacing();
    let o = g.origin();
    let snap =
        |v: f64, o: f64, h: f64, n: usize| (((v - o) / h).round().max(0.0) as usize).min(n - 1);
    let (bi, bj) = (snap(base.0, o[0], hr, nr), snap(base.1, o[1], ht, nt));
    let p1 = |i: usize, j: usize| pair.psi1.get(i, j, 0);
    let p2 = |i: usize, j: usize| pair.psi2.get(i, j, 0);
    let at = |i: usize, j: usize| j * nr + i;

    // Path A: along r on row bj, then along θ.
    let mut a = vec![0.0; nr * nt];
    for i in (0..bi).rev() {
        a[at(i, bj)] = a[at(i + 1, bj)] - 0.5 * hr * (p2(i, bj) + p2(i + 1, bj));
    }
    for i in bi + 1..nr {
        a[at(i, bj)] = a[at(i - 1, bj)] + 0.5 * hr * (p2(i - 1, bj) + p2(i, bj));
    }
    for i in 0..nr {
        for j in (0..bj).rev() {
            a[at(i, j)] = a[at(i, j + 1)] - 0.5 * ht * (p1(i, j) + p1(i, j + 1));
        }
        for j in bj + 1..nt {
            a[at(i, j)] = a[at(i, j - 1)] + 0.5 * ht * (p1(i, j - 1) + p1(i, j));
        }
    }
    // Path B: along θ on column bi, then along r.
    let mut b = vec![0.0; nr * nt];
    for j in (0..bj).rev() {
        b[at(bi, j)] = b[at(bi, j + 1)] - 0.5 * ht * (p1(bi, j) + p1(bi, j + 1));
    }
    for j in bj + 1..nt {
        b[at(bi, j)] = b[at(bi, j - 1)] + 0.5 * ht * (p1(bi, j - 1) + p1(bi, j));
    }
    for j in 0..nt {
        for i in (0..bi).rev() {
            b[at(i, j)] = b[at(i + 1, j)] - 0.5 * hr * (p2(i, j) + p2(i + 1, j));
        }
        for i in bi + 1..nr {
            b[at(i, j)] = b[at(i - 1, j)] + 0.5 * hr * (p2(i - 1, j) + p2(i, j));
        }
    }
    let defect = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(ChiField {
        chi: g.scalar_like(a)?,
        base: (bi, bj),
        defect,
    })
}

/// `dχ/dθ` along a characteristic, by formula and by differencing `χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiAlongPath {
    /// Polar angle at each sample, the midpoint of consecutive path points.
    pub theta: Vec<f64>,
    /// `−(r√(r²−1)φ_r ± φ_θ)²`, the sign following `dr/dθ`.
    pub formula: Vec<f64>,
    /// Difference quotients of the reconstructed `χ` between path points.
    pub differenced: Vec<f64>,
}

impl ChiAlongPath {
    pub fn max_discrepancy(&self) -> f64 {
        self.formula
            .iter()
            .zip(&self.differenced)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn chi_characteristic_derivative(
    phi: &GridField,
    path: &CharacteristicPath,
) -> Result<ChiAlongPath, HodgeDiscError> {
    require_polar(phi)?;
    let polar: Vec<(f64, f64)> = path.points.iter().map(|p| (p.norm(), p.angle())).collect();
    for &(r, theta) in &polar {
        if r <= 1.0 {
            return Err(HodgeDiscError::OutsideHyperbolicRegion { r, theta });
        }
    }
    let d = Derivatives::of(phi, 0);
    let fr = phi.scalar_like(d.dx)?;
    let ft = phi.scalar_like(d.dy)?;
    let pair = psi_pair(phi)?;
    let o = phi.origin();
    let chi = chi_reconstruct(&pair, (o[0], o[1]))?.chi;
    let sample = |f: &GridField, r: f64, t: f64| {
        f.interpolate(r, t, 0)
            .ok_or(HodgeDiscError::OutsideChart { r, theta: t })
    };

    let mut out = ChiAlongPath {
        theta: Vec::new(),
        formula: Vec::new(),
        differenced: Vec::new(),
    };
    for w in polar.windows(2) {
        let ((r0, t0), (r1, t1)) = (w[0], w[1]);
        let dt = t1 - t0;
        if dt.abs() < 1e-14 {
            continue;
        }
        let (rm, tm) = (0.5 * (r0 + r1), 0.5 * (t0 + t1));
        let sign = ((r1 - r0) * dt).signum();
        let s = rm * (rm * rm - 1.0).sqrt();
        let v = s * sample(&fr, rm, tm)? + sign * sample(&ft, rm, tm)?;
        out.theta.push(tm);
        out.formula.push(-v * v);
        out.differenced
            .push((sample(&chi, r1, t1)? - sample(&chi, r0, t0)?) / dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{trace_characteristic, Branch, Point2, TraceOptions};

    fn polar(r: (f64, f64), t: (f64, f64), n: usize, f: impl Fn(f64, f64) -> f64) -> GridField {
        GridField::spanning(Chart::Polar, r, t, [n, n], f).unwrap()
    }

    #[test]
    fn residual_examples() {
        let c = polar((0.2, 0.9), (-1.0, 1.0), 11, |_, _| 3.0);
        assert!(polar_residual(&c).unwrap().max_abs(0) < 1e-12);
        let t = polar((0.2, 0.9), (-1.0, 1.0), 11, |_, t| t);
        assert!(polar_residual(&t).unwrap().max_abs(0) < 1e-12);
        let q = polar((0.2, 1.8), (-1.0, 1.0), 17, |r, _| r * r);
        let res = polar_residual(&q).unwrap();
        for j in 0..17 {
            for i in 0..17 {
                let (r, _) = q.coord(i, j);
                assert!((res.get(i, j, 0) - (4.0 * r * r - 6.0 * r.powi(4))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn psi_examples() {
        let p = psi_pair(&polar((0.2, 0.9), (-1.0, 1.0), 11, |_, _| 1.0)).unwrap();
        assert_eq!(p.psi1.max_abs(0), 0.0);
        assert_eq!(p.psi2.max_abs(0), 0.0);

        let f = polar((0.2, 1.8), (-1.0, 1.0), 17, |r, _| r * r);
        let p = psi_pair(&f).unwrap();
        for &(i, j) in &[(0, 0), (8, 3), (16, 16)] {
            let (r, _) = f.coord(i, j);
            assert!((p.psi1.get(i, j, 0) - 4.0 * r.powi(4) * (1.0 - r * r)).abs() < 1e-10);
            assert!(p.psi2.get(i, j, 0).abs() < 1e-12);
        }

        let p = psi_pair(&polar((0.2, 0.9), (-1.0, 1.0), 11, |_, t| t)).unwrap();
        for v in p.psi1.values() {
            assert!((v + 1.0).abs() < 1e-12);
        }
        assert!(p.psi2.max_abs(0) < 1e-12);
    }

    #[test]
    fn multiplier_identity_second_order() {
        let errs: Vec<f64> = [17, 33, 65, 129]
            .iter()
            .map(|&n| {
                let f = polar((1.05, 1.5), (-0.5, 0.5), n, |r, t| r * r * t);
                // Two coarse cells in from each edge.
                let (hr, ht) = (0.45 / 8.0, 1.0 / 8.0);
                multiplier_identity_residual_within(
                    &f,
                    (1.05 + hr, 1.5 - hr),
                    (-0.5 + ht, 0.5 - ht),
                )
                .unwrap()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "{errs:?}");
        }
        let c = polar((0.3, 0.8), (-0.5, 0.5), 9, |_, _| 2.0);
        assert_eq!(multiplier_identity_residual(&c).unwrap(), 0.0);
        let q = |n| {
            let f = polar((0.3, 1.6), (-0.5, 0.5), n, |r, _| r * r);
            multiplier_identity_residual_within(&f, (0.3 + 1.3 / 8.0, 1.6 - 1.3 / 8.0), (-0.5, 0.5))
                .unwrap()
        };
        assert!(q(17) / q(33) > 3.5);
    }

    #[test]
    fn chi_examples() {
        let c = psi_pair(&polar((0.2, 0.9), (-1.0, 1.0), 11, |_, _| 1.0)).unwrap();
        let chi = chi_reconstruct(&c, (0.2, -1.0)).unwrap();
        assert_eq!(chi.chi.max_abs(0), 0.0);
        assert_eq!(chi.defect, 0.0);

        let f = polar((0.2, 0.9), (-1.0, 1.0), 11, |_, t| t);
        let chi = chi_reconstruct(&psi_pair(&f).unwrap(), (0.55, 0.0)).unwrap();
        assert!(chi.defect < 1e-12);
        for j in 0..11 {
            let (_, t) = f.coord(3, j);
            assert!((chi.chi.get(3, j, 0) + t).abs() < 1e-12);
        }

        let f = polar((0.2, 0.9), (-1.0, 1.0), 11, |r, _| r * r);
        let chi = chi_reconstruct(&psi_pair(&f).unwrap(), (0.2, -1.0)).unwrap();
        assert!(chi.defect > 1e-3);
    }

    #[test]
    fn chi_along_characteristic() {
        let path = trace_characteristic(
            Point2::from_polar(1.01, 0.0),
            Branch::Plus,
            1e-2,
            0.5,
            TraceOptions::default(),
        )
        .unwrap();
        let grid = |f: fn(f64, f64) -> f64| polar((1.0, 1.3), (-0.2, 0.6), 61, f);

        let s = chi_characteristic_derivative(&grid(|_, _| 0.5), &path).unwrap();
        assert!(s.formula.iter().all(|&v| v == 0.0));

        let s = chi_characteristic_derivative(&grid(|_, t| t), &path).unwrap();
        for v in &s.formula {
            assert!((v + 1.0).abs() < 1e-10);
        }
        assert!(s.max_discrepancy() < 1e-8);

        let s = chi_characteristic_derivative(&grid(|r, _| r * r), &path).unwrap();
        assert!(s.formula.iter().all(|&v| v <= 0.0));

        let inside = trace_characteristic(
            Point2::new(0.9, 0.0),
            Branch::Plus,
            1e-2,
            0.5,
            TraceOptions {
                circle_tol: 0.2,
                ..TraceOptions::default()
            },
        )
        .unwrap();
        assert!(matches!(
            chi_characteristic_derivative(&grid(|_, t| t), &inside),
            Err(HodgeDiscError::OutsideHyperbolicRegion { .. })
        ));
    }
}

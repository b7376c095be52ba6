//! Mixed solver for the open problem on a lens domain: Dirichlet data on the
//! inner arc and the two radial sides, nothing on the characteristic sides.
//!
//! The elliptic part `ε ≤ r < 1` is a 5-point finite-difference solve on a
//! polar lattice offset by half a cell from `r = 1`. Its last row imposes the
//! equation with one-sided radial differences, which selects the regular
//! branch at the degenerate line. The trace on `r = 1` is extrapolated from
//! the last three rows.
//!
//! For `r > 1` the substitution `r = sec α` turns the operator into
//! `φ_θθ − φ_αα`, so along the tangent-line characteristics `θ ± α = const`
//! the solution is a d'Alembert sum of the trace plus a source integral over
//! the characteristic triangle. The trace has zero `α`-derivative because
//! `φ_α = r√(r²−1)·φ_r` vanishes at `r = 1`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HodgeDiscError;
use crate::geometry::{LensDomain, Region};
use crate::grid::{Chart, GridField};
use crate::linalg::{bicgstab, BandedLu, CsrMatrix};
use crate::quad::gauss_legendre;

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Data on the non-characteristic part of the boundary, plus an optional
/// right-hand side `f` for `Lφ = f`.
#[derive(Clone)]
pub struct BoundaryData {
    /// `θ ↦ φ(ε, θ)`.
    pub inner: Fn1,
    /// `r ↦ φ(r, θ0)` for `ε ≤ r ≤ 1`.
    pub upper: Fn1,
    /// `r ↦ φ(r, −θ0)`.
    pub lower: Fn1,
    pub source: Option<Fn2>,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("has_source", &self.source.is_some())
            .finish_non_exhaustive()
    }
}

impl BoundaryData {
    pub fn homogeneous() -> Self {
        Self {
            inner: Arc::new(|_| 0.0),
            upper: Arc::new(|_| 0.0),
            lower: Arc::new(|_| 0.0),
            source: None,
        }
    }

    /// Restriction of `φ(r, θ)` to the open-problem boundary of `dom`.
    pub fn from_fn(
        dom: &LensDomain,
        phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let phi: Fn2 = Arc::new(phi);
        let (eps, t0) = (dom.eps, dom.theta0);
        let (a, b, c) = (phi.clone(), phi.clone(), phi);
        Self {
            inner: Arc::new(move |t| a(eps, t)),
            upper: Arc::new(move |r| b(r, t0)),
            lower: Arc::new(move |r| c(r, -t0)),
            source: None,
        }
    }

    pub fn with_source(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    fn source_at(&self, r: f64, theta: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |f| f(r, theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Angular cells across the lens; the radial step is matched to it.
    pub resolution: usize,
    /// Skip the banded factorization and go straight to BiCGSTAB.
    pub iterative: bool,
    pub pivot_tol: f64,
    pub iter_tol: f64,
    pub max_iter: usize,
    /// Allowed jump between inner and radial data at `(ε, ±θ0)`.
    pub corner_tol: f64,
    /// Slack, in radians, for characteristic feet landing past `±θ0`.
    pub foot_tol: f64,
    /// Gauss points per direction for the source integral.
    pub quad_order: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            resolution: 32,
            iterative: false,
            pivot_tol: 1e-13,
            iter_tol: 1e-12,
            max_iter: 20_000,
            corner_tol: 1e-8,
            foot_tol: 1e-9,
            quad_order: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveRegion {
    Elliptic,
    Hyperbolic,
}

/// One CSV row of the per-region residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionResidual {
    pub region: SolveRegion,
    /// Max-norm of the discrete residual `Lφ − f` over the region.
    pub norm: f64,
    pub h: f64,
}

#[derive(Debug, Clone)]
pub struct LensSolution {
    /// Combined field on the polar lattice; nodes outside the lens are masked.
    pub field: GridField,
    /// Extrapolated trace `φ(1, θ)` at the lattice angles.
    pub trace: Vec<f64>,
    pub residuals: Vec<RegionResidual>,
    /// Larger of the radial and angular steps.
    pub h: f64,
    /// Index of the last elliptic row.
    pub last_elliptic: usize,
    theta0: f64,
    eps: f64,
    data: BoundaryData,
    quad: (Vec<f64>, Vec<f64>),
}

impl LensSolution {
    pub fn max_abs(&self) -> f64 {
        self.field.max_abs(0)
    }

    /// Largest `|φ|` on the parabolic line, read from the trace.
    pub fn max_abs_on_nu(&self) -> f64 {
        self.trace.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `φ(1, θ)` by linear interpolation of the trace.
    pub fn trace_at(&self, theta: f64) -> f64 {
        let m = self.trace.len() - 1;
        let k = 2.0 * self.theta0 / m as f64;
        let s = ((theta + self.theta0) / k).clamp(0.0, m as f64);
        let j = (s.floor() as usize).min(m - 1);
        let t = s - j as f64;
        (1.0 - t) * self.trace[j] + t * self.trace[j + 1]
    }

    /// `φ(r, θ)` anywhere in the lens: bilinear in the elliptic part, the
    /// characteristic formula in the hyperbolic part.
    pub fn eval(&self, r: f64, theta: f64) -> Result<f64, HodgeDiscError> {
        let outside = || {
            HodgeDiscError::InvalidArgument(format!("(r, θ) = ({r}, {theta}) is outside the lens"))
        };
        if theta.abs() > self.theta0 + 1e-12 || r < self.eps - 1e-12 {
            return Err(outside());
        }
        if r > 1.0 {
            let alpha = (1.0 / r).acos();
            if theta.abs() + alpha > self.theta0 + 1e-12 {
                return Err(outside());
            }
            return Ok(self.hyperbolic_value(r, theta));
        }
        let r_last = self.field.coord(self.last_elliptic, 0).0;
        if r <= r_last {
            return self.field.interpolate(r, theta, 0).ok_or_else(outside);
        }
        let below = self
            .field
            .interpolate(r_last, theta, 0)
            .ok_or_else(outside)?;
        let t = (r - r_last) / (1.0 - r_last);
        Ok((1.0 - t) * below + t * self.trace_at(theta))
    }

    fn hyperbolic_value(&self, r: f64, theta: f64) -> f64 {
        let alpha = (1.0 / r).acos();
        let mu = (theta + alpha).min(self.theta0);
        let lambda = (theta - alpha).max(-self.theta0);
        let mut v = 0.5 * (self.trace_at(mu) + self.trace_at(lambda));
        if self.data.source.is_some() {
            v += source_integral(&self.data, mu, lambda, &self.quad);
        }
        v
    }
}

/// `−¼ ∬_{λ ≤ b ≤ a ≤ μ} f(sec((a−b)/2), (a+b)/2) db da` through the map
/// `a = λ + (μ−λ)s`, `b = λ + (a−λ)t` onto the unit square.
fn source_integral(data: &BoundaryData, mu: f64, lambda: f64, quad: &(Vec<f64>, Vec<f64>)) -> f64 {
    let w = mu - lambda;
    if w <= 0.0 {
        return 0.0;
    }
    let (x, wt) = quad;
    let mut sum = 0.0;
    for (xs, ws) in x.iter().zip(wt) {
        let s = 0.5 * (xs + 1.0);
        let a = lambda + w * s;
        for (xt, wtt) in x.iter().zip(wt) {
            let t = 0.5 * (xt + 1.0);
            let b = lambda + (a - lambda) * t;
            let r = 1.0 / (0.5 * (a - b)).cos();
            sum += ws * wtt * s * data.source_at(r, 0.5 * (a + b));
        }
    }
    // Two factors of ½ from the Gauss interval change, then the Jacobian w²s.
    -0.25 * 0.25 * w * w * sum
}

/// Lattice for a given resolution: `(h, k, n_e, n_h, m)`.
struct Lattice {
    h: f64,
    k: f64,
    n_e: usize,
    n_h: usize,
    m: usize,
}

impl Lattice {
    fn new(dom: &LensDomain, resolution: usize) -> Self {
        let m = resolution;
        let k = 2.0 * dom.theta0 / m as f64;
        let n_e = (((1.0 - dom.eps) / k - 0.5).round() as usize).max(4);
        let h = (1.0 - dom.eps) / (n_e as f64 + 0.5);
        // Hyperbolic rows at 1 + (q + ½)h up to the pole.
        let n_h = ((dom.r_max() - 1.0) / h - 0.5).floor().max(0.0) as usize + 1;
        Self { h, k, n_e, n_h, m }
    }

    fn nr(&self) -> usize {
        self.n_e + 1 + self.n_h
    }
}

fn check_corners(dom: &LensDomain, data: &BoundaryData, tol: f64) -> Result<(), HodgeDiscError> {
    for (theta, radial) in [(dom.theta0, &data.upper), (-dom.theta0, &data.lower)] {
        let mismatch = ((data.inner)(theta) - radial(dom.eps)).abs();
        if !(mismatch <= tol) {
            return Err(HodgeDiscError::CornerMismatch {
                r: dom.eps,
                theta,
                mismatch,
            });
        }
    }
    Ok(())
}

/// Solves `Lφ = f` on the lens from data on the inner arc and the radial sides.
pub fn solve_open_problem(
    dom: &LensDomain,
    data: &BoundaryData,
    opts: &SolveOptions,
) -> Result<LensSolution, HodgeDiscError> {
    if opts.resolution < 8 {
        return Err(HodgeDiscError::InvalidArgument(format!(
            "resolution {} is below 8",
            opts.resolution
        )));
    }
    if opts.quad_order == 0 {
        return Err(HodgeDiscError::InvalidArgument(
            "quad_order must be positive".into(),
        ));
    }
    check_corners(dom, data, opts.corner_tol)?;
    let lat = Lattice::new(dom, opts.resolution);
    let (h, k, n_e, m) = (lat.h, lat.k, lat.n_e, lat.m);
    let nr = lat.nr();
    let mut field = GridField::zeros(Chart::Polar, [dom.eps, -dom.theta0], [h, k], [nr, m + 1], 1)?;
    let r_of = |i: usize| dom.eps + i as f64 * h;
    let th_of = |j: usize| -dom.theta0 + j as f64 * k;

    // Dirichlet values.
    for j in 0..=m {
        field.set(0, j, 0, (data.inner)(th_of(j)));
    }
    for i in 1..=n_e {
        field.set(i, 0, 0, (data.lower)(r_of(i)));
        field.set(i, m, 0, (data.upper)(r_of(i)));
    }

    let interior = solve_elliptic(&field, data, &lat, opts)?;
    for i in 1..=n_e {
        for j in 1..m {
            field.set(i, j, 0, interior[(i - 1) * (m - 1) + (j - 1)]);
        }
    }

    let mut trace = vec![0.0; m + 1];
    trace[0] = (data.lower)(1.0);
    trace[m] = (data.upper)(1.0);
    for (j, t) in trace.iter_mut().enumerate().take(m).skip(1) {
        *t = 1.875 * field.get(n_e, j, 0) - 1.25 * field.get(n_e - 1, j, 0)
            + 0.375 * field.get(n_e - 2, j, 0);
    }

    let mut sol = LensSolution {
        field,
        trace,
        residuals: Vec::new(),
        h: h.max(k),
        last_elliptic: n_e,
        theta0: dom.theta0,
        eps: dom.eps,
        data: data.clone(),
        quad: gauss_legendre(opts.quad_order),
    };

    // Hyperbolic rows, one parallel task per row.
    let rows: Vec<(Vec<Option<f64>>, usize, usize)> = (n_e + 1..nr)
        .into_par_iter()
        .map(|i| {
            let r = r_of(i);
            let alpha = (1.0 / r).acos();
            let (mut uncovered, mut total) = (0, 0);
            let vals = (0..=m)
                .map(|j| {
                    let theta = th_of(j);
                    if dom.region_polar(r, theta) != Region::Hyperbolic {
                        return None;
                    }
                    total += 1;
                    let slack = theta.abs() + alpha - dom.theta0;
                    if slack > opts.foot_tol {
                        uncovered += 1;
                    }
                    Some(sol.hyperbolic_value(r, theta))
                })
                .collect();
            (vals, uncovered, total)
        })
        .collect();
    let (mut uncovered, mut total) = (0, 0);
    let mut mask = vec![false; nr * (m + 1)];
    for (q, (vals, u, t)) in rows.into_iter().enumerate() {
        uncovered += u;
        total += t;
        let i = n_e + 1 + q;
        for (j, v) in vals.into_iter().enumerate() {
            match v {
                Some(v) => sol.field.set(i, j, 0, v),
                None => mask[j * nr + i] = true,
            }
        }
    }
    if uncovered > 0 {
        return Err(HodgeDiscError::FoliationGap { uncovered, total });
    }
    sol.field.set_mask(Some(mask))?;
    sol.residuals = region_residuals(&sol, data, &lat);
    Ok(sol)
}

/// Row coefficients `(a/h², b/(2h))` of `r²(1−r²)∂_rr + r(1−2r²)∂_r`.
fn radial_coeffs(r: f64, h: f64) -> (f64, f64) {
    (
        r * r * (1.0 - r * r) / (h * h),
        r * (1.0 - 2.0 * r * r) / (2.0 * h),
    )
}

fn solve_elliptic(
    field: &GridField,
    data: &BoundaryData,
    lat: &Lattice,
    opts: &SolveOptions,
) -> Result<Vec<f64>, HodgeDiscError> {
    let (h, k, n_e, m) = (lat.h, lat.k, lat.n_e, lat.m);
    let n = n_e * (m - 1);
    let idx = |i: usize, j: usize| (i - 1) * (m - 1) + (j - 1);
    let ck = 1.0 / (k * k);
    let (r0, t0) = (field.origin()[0], field.origin()[1]);
    let assembled: Vec<(Vec<(usize, f64)>, f64)> = (0..n)
        .into_par_iter()
        .map(|row| {
            let (i, j) = (row / (m - 1) + 1, row % (m - 1) + 1);
            let r = r0 + i as f64 * h;
            let (a, b) = radial_coeffs(r, h);
            let mut entries: Vec<(usize, isize, f64)> =
                vec![(i, j as isize - 1, ck), (i, j as isize + 1, ck)];
            let mut diag = -2.0 * ck;
            if i < n_e {
                diag -= 2.0 * a;
                entries.push((i + 1, j as isize, a + b));
                entries.push((i - 1, j as isize, a - b));
            } else {
                // One-sided second and first differences towards the interior.
                diag += 2.0 * a + 3.0 * b;
                entries.push((i - 1, j as isize, -5.0 * a - 4.0 * b));
                entries.push((i - 2, j as isize, 4.0 * a + b));
                entries.push((i - 3, j as isize, -a));
            }
            let mut rhs = data.source_at(r, t0 + j as f64 * k);
            let mut cols = vec![(row, diag)];
            for (ii, jj, c) in entries {
                let jj = jj as usize;
                if ii == 0 || jj == 0 || jj == m {
                    rhs -= c * field.get(ii, jj, 0);
                } else {
                    cols.push((idx(ii, jj), c));
                }
            }
            cols.sort_by_key(|&(c, _)| c);
            (cols, rhs)
        })
        .collect();
    let (rows, rhs): (Vec<_>, Vec<_>) = assembled.into_iter().unzip();
    let a = CsrMatrix::from_rows(n, &rows);
    if !opts.iterative {
        if let Ok(lu) = BandedLu::factor(&a, opts.pivot_tol) {
            return Ok(lu.solve(&rhs));
        }
    }
    Ok(bicgstab(&a, &rhs, None, opts.iter_tol, opts.max_iter)?)
}

fn region_residuals(sol: &LensSolution, data: &BoundaryData, lat: &Lattice) -> Vec<RegionResidual> {
    let f = &sol.field;
    let (h, k, n_e, m) = (lat.h, lat.k, lat.n_e, lat.m);
    let nr = lat.nr();
    let ck = 1.0 / (k * k);
    let residual_at = |i: usize, j: usize, one_sided: bool| -> f64 {
        let (r, theta) = f.coord(i, j);
        let (a, b) = radial_coeffs(r, h);
        let v = |ii: usize| f.get(ii, j, 0);
        let radial = if one_sided {
            a * (2.0 * v(i) - 5.0 * v(i - 1) + 4.0 * v(i - 2) - v(i - 3))
                + b * (3.0 * v(i) - 4.0 * v(i - 1) + v(i - 2))
        } else {
            a * (v(i + 1) - 2.0 * v(i) + v(i - 1)) + b * (v(i + 1) - v(i - 1))
        };
        let angular = ck * (f.get(i, j + 1, 0) - 2.0 * v(i) + f.get(i, j - 1, 0));
        radial + angular - data.source_at(r, theta)
    };
    let mut elliptic = 0.0f64;
    for i in 1..=n_e {
        for j in 1..m {
            elliptic = elliptic.max(residual_at(i, j, i == n_e).abs());
        }
    }
    let mut hyperbolic = 0.0f64;
    for i in n_e + 2..nr.saturating_sub(1) {
        for j in 1..m {
            let stencil = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
            if stencil.iter().all(|&(a, b)| !f.is_masked(a, b)) {
                hyperbolic = hyperbolic.max(residual_at(i, j, false).abs());
            }
        }
    }
    vec![
        RegionResidual {
            region: SolveRegion::Elliptic,
            norm: elliptic,
            h: sol.h,
        },
        RegionResidual {
            region: SolveRegion::Hyperbolic,
            norm: hyperbolic,
            h: sol.h,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// Max `|induced − prescribed|` over the characteristic sides.
    pub gap: f64,
    pub h: f64,
    /// Where the max is attained.
    pub r: f64,
    pub theta: f64,
    pub samples: usize,
}

/// Solves the open problem from `data`, then compares the trace it induces on
/// the two characteristic sides with `prescribed(r, θ)` there.
pub fn overdetermination_gap(
    dom: &LensDomain,
    data: &BoundaryData,
    prescribed: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: &SolveOptions,
) -> Result<GapReport, HodgeDiscError> {
    let sol = solve_open_problem(dom, data, opts)?;
    let per_side = 4 * opts.resolution;
    let mut report = GapReport {
        gap: 0.0,
        h: sol.h,
        r: 1.0,
        theta: dom.theta0,
        samples: 0,
    };
    for sign in [1.0, -1.0] {
        // Parametrised by α ∈ [0, θ0]; r = sec α, θ = ±(θ0 − α).
        for s in 0..=per_side {
            let alpha = dom.theta0 * s as f64 / per_side as f64;
            let r = (1.0 / alpha.cos()).min(dom.r_max());
            let theta = sign * (dom.theta0 - alpha);
            let induced = if r > 1.0 {
                sol.hyperbolic_value(r, theta)
            } else {
                sol.trace_at(theta)
            };
            let d = (induced - prescribed(r, theta)).abs();
            report.samples += 1;
            if d > report.gap {
                report.gap = d;
                report.r = r;
                report.theta = theta;
            }
        }
    }
    Ok(report)
}

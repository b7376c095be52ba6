//! The Legendre (hodograph) transform `φ(p, q) = p·x + q·y − f(x, y)` with
//! `(p, q) = ∇f`, resampled onto a regular grid in the `(p, q)` plane.

use super::SurfaceError;
use crate::grid::{Chart, Derivatives, GridField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreOptions {
    /// Nodes of the hodograph grid; `None` reuses the input dimensions.
    pub dims: Option<[usize; 2]>,
    /// Triangles whose vertices have `|f_xx f_yy − f_xy²|` at most this are dropped.
    pub hessian_tol: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        Self {
            dims: None,
            hessian_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodographField {
    /// `φ` on the hodograph grid; nodes not covered by a regular triangle are masked.
    pub phi: GridField,
    /// Input triangles rejected by the Jacobian test.
    pub singular_triangles: usize,
    pub total_triangles: usize,
}

impl HodographField {
    pub fn masked_nodes(&self) -> usize {
        self.phi
            .mask()
            .map(|m| m.iter().filter(|&&b| b).count())
            .unwrap_or(0)
    }
}

/// True if a difference stencil centred at `(i, j)` touches a masked node.
fn near_mask(f: &GridField, i: usize, j: usize) -> bool {
    if f.mask().is_none() {
        return false;
    }
    let [nx, ny] = f.dims();
    // One-sided stencils on the lattice edge reach three nodes inwards.
    let reach_x = if i == 0 || i + 1 == nx { 3 } else { 1 };
    let reach_y = if j == 0 || j + 1 == ny { 3 } else { 1 };
    let (i0, i1) = (i.saturating_sub(reach_x), (i + reach_x).min(nx - 1));
    let (j0, j1) = (j.saturating_sub(reach_y), (j + reach_y).min(ny - 1));
    (j0..=j1).any(|jj| (i0..=i1).any(|ii| f.is_masked(ii, jj)))
}

pub fn legendre_transform(f: &GridField) -> Result<HodographField, SurfaceError> {
    legendre_transform_with(f, LegendreOptions::default())
}

/// Scatters `(∇f, φ)` over the input triangulation and interpolates linearly
/// inside each image triangle. Where images overlap (a folded map) the first
/// triangle in node order wins.
pub fn legendre_transform_with(
    f: &GridField,
    opts: LegendreOptions,
) -> Result<HodographField, SurfaceError> {
    f.require_components(1)?;
    let [nx, ny] = f.dims();
    let d = Derivatives::of(f, 0);
    let n = nx * ny;
    let mut pq = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut regular = Vec::with_capacity(n);
    for k in 0..n {
        let (i, j) = (k % nx, k / nx);
        let (x, y) = f.coord(i, j);
        let (p, q) = (d.dx[k], d.dy[k]);
        pq.push((p, q));
        phi.push(p * x + q * y - f.get(i, j, 0));
        let hess = d.dxx[k] * d.dyy[k] - d.dxy[k] * d.dxy[k];
        regular.push(!near_mask(f, i, j) && hess.abs() > opts.hessian_tol);
    }

    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    let mut singular = 0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let (b, c, e) = (a + 1, a + nx, a + nx + 1);
            for t in [[a, b, e], [a, e, c]] {
                if t.iter().all(|&v| regular[v]) {
                    tris.push(t);
                } else {
                    singular += 1;
                }
            }
        }
    }
    let total_triangles = 2 * (nx - 1) * (ny - 1);
    if tris.is_empty() {
        return Err(SurfaceError::LegendreSingular);
    }

    let (mut pmin, mut pmax, mut qmin, mut qmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for t in &tris {
        for &v in t {
            let (p, q) = pq[v];
            pmin = pmin.min(p);
            pmax = pmax.max(p);
            qmin = qmin.min(q);
            qmax = qmax.max(q);
        }
    }
    if !(pmax > pmin && qmax > qmin) {
        return Err(SurfaceError::LegendreSingular);
    }
    let [mx, my] = opts.dims.unwrap_or([nx, ny]);
    let hp = (pmax - pmin) / (mx - 1) as f64;
    let hq = (qmax - qmin) / (my - 1) as f64;
    let mut out = GridField::zeros(Chart::Cartesian, [pmin, qmin], [hp, hq], [mx, my], 1)?;
    let mut filled = vec![false; mx * my];

    for t in &tris {
        let [(p0, q0), (p1, q1), (p2, q2)] = [pq[t[0]], pq[t[1]], pq[t[2]]];
        let det = (p1 - p0) * (q2 - q0) - (p2 - p0) * (q1 - q0);
        if det.abs() <= 1e-14 * hp * hq {
            continue;
        }
        let lo_i = (((p0.min(p1).min(p2) - pmin) / hp).floor().max(0.0)) as usize;
        let hi_i = ((((p0.max(p1).max(p2) - pmin) / hp).ceil()) as usize).min(mx - 1);
        let lo_j = (((q0.min(q1).min(q2) - qmin) / hq).floor().max(0.0)) as usize;
        let hi_j = ((((q0.max(q1).max(q2) - qmin) / hq).ceil()) as usize).min(my - 1);
        for jj in lo_j..=hi_j {
            for ii in lo_i..=hi_i {
                let node = jj * mx + ii;
                if filled[node] {
                    continue;
                }
                let (p, q) = out.coord(ii, jj);
                // Barycentric coordinates with a small slack for shared edges.
                let l1 = ((p - p0) * (q2 - q0) - (p2 - p0) * (q - q0)) / det;
                let l2 = ((p1 - p0) * (q - q0) - (p - p0) * (q1 - q0)) / det;
                let l0 = 1.0 - l1 - l2;
                let slack = -1e-9;
                if l0 >= slack && l1 >= slack && l2 >= slack {
                    out.set(ii, jj, 0, l0 * phi[t[0]] + l1 * phi[t[1]] + l2 * phi[t[2]]);
                    filled[node] = true;
                }
            }
        }
    }
    if !filled.iter().any(|&b| b) {
        return Err(SurfaceError::LegendreSingular);
    }
    let mask: Vec<bool> = filled.iter().map(|&b| !b).collect();
    if mask.iter().any(|&m| m) {
        out.set_mask(Some(mask))?;
    }
    Ok(HodographField {
        phi: out,
        singular_triangles: singular,
        total_triangles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: usize, f: impl Fn(f64, f64) -> f64) -> GridField {
        GridField::spanning(Chart::Cartesian, (-1.0, 1.0), (-1.0, 1.0), [n, n], f).unwrap()
    }

    fn max_err(h: &HodographField, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let [mx, my] = h.phi.dims();
        let mut m = 0.0f64;
        for j in 0..my {
            for i in 0..mx {
                if !h.phi.is_masked(i, j) {
                    let (p, q) = h.phi.coord(i, j);
                    m = m.max((h.phi.get(i, j, 0) - exact(p, q)).abs());
                }
            }
        }
        m
    }

    #[test]
    fn round_paraboloid_is_self_dual() {
        let h = legendre_transform(&field(21, |x, y| 0.5 * (x * x + y * y))).unwrap();
        assert_eq!(h.masked_nodes(), 0);
        assert!(max_err(&h, |p, q| 0.5 * (p * p + q * q)) < 1e-12);
    }

    #[test]
    fn anisotropic_paraboloid() {
        let h = legendre_transform(&field(21, |x, y| 0.5 * x * x + y * y)).unwrap();
        assert!(max_err(&h, |p, q| 0.5 * p * p + 0.25 * q * q) < 1e-12);
        // The gradient image is [−1,1]×[−2,2].
        let o = h.phi.origin();
        assert!((o[0] + 1.0).abs() < 1e-12 && (o[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn affine_is_singular() {
        assert!(matches!(
            legendre_transform(&field(11, |x, y| 2.0 * x - y + 1.0)),
            Err(SurfaceError::LegendreSingular)
        ));
    }

    #[test]
    fn round_trip_recovers_original_values() {
        let errs: Vec<f64> = [17usize, 33]
            .iter()
            .map(|&n| {
                let f = field(n, |x, y| {
                    0.5 * (x * x + y * y) + 0.1 * x.powi(3) + 0.05 * x * y
                });
                let once = legendre_transform(&f).unwrap();
                let twice = legendre_transform(&once.phi).unwrap();
                let mut m = 0.0f64;
                let [mx, my] = twice.phi.dims();
                for j in 2..my - 2 {
                    for i in 2..mx - 2 {
                        if twice.phi.is_masked(i, j) {
                            continue;
                        }
                        let (x, y) = twice.phi.coord(i, j);
                        if x.abs() <= 1.0 && y.abs() <= 1.0 {
                            let exact = 0.5 * (x * x + y * y) + 0.1 * x.powi(3) + 0.05 * x * y;
                            m = m.max((twice.phi.get(i, j, 0) - exact).abs());
                        }
                    }
                }
                m
            })
            .collect();
        assert!(errs[1] < 1e-2, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }
}

//! Area functional and residuals of the extremal-graph equations.

use serde::{Deserialize, Serialize};

use super::SurfaceError;
use crate::grid::{Derivatives, GridField};

/// Margin below which `1 − |∇u|²` counts as light-like.
const LIGHT_LIKE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalKind {
    /// `(1−p²)q_y + 2pq·p_y + (1−q²)p_x` with `(p, q) = ∇f`.
    MinkowskiGraph,
    /// `(1+q²)p_x − 2pq·p_y + (1+p²)q_y`, the non-parametric minimal surface
    /// equation.
    EuclideanMinimal,
    /// `∇·(∇u/√(1−|∇u|²))`, maximal space-like graphs.
    LorentzMaximal,
}

/// `∬ √|1 − f_x² − f_y²|` by the midpoint rule, with gradients taken at cell
/// centres from the four corner values. Cells touching a masked node are skipped.
pub fn area_functional(f: &GridField) -> Result<f64, SurfaceError> {
    f.require_components(1)?;
    let [nx, ny] = f.dims();
    let [hx, hy] = f.spacing();
    let mut total = 0.0;
    for j in 0..ny - 1 {
        let mut row = 0.0;
        for i in 0..nx - 1 {
            if f.is_masked(i, j)
                || f.is_masked(i + 1, j)
                || f.is_masked(i, j + 1)
                || f.is_masked(i + 1, j + 1)
            {
                continue;
            }
            let (f00, f10) = (f.get(i, j, 0), f.get(i + 1, j, 0));
            let (f01, f11) = (f.get(i, j + 1, 0), f.get(i + 1, j + 1, 0));
            let p = 0.5 * ((f10 - f00) + (f11 - f01)) / hx;
            let q = 0.5 * ((f01 - f00) + (f11 - f10)) / hy;
            row += (1.0 - p * p - q * q).abs().sqrt();
        }
        total += row;
    }
    Ok(total * hx * hy)
}

/// Pointwise residual of the chosen extremal-graph equation.
pub fn extremal_residual(f: &GridField, kind: ExtremalKind) -> Result<GridField, SurfaceError> {
    f.require_components(1)?;
    let d = Derivatives::of(f, 0);
    let n = d.dx.len();
    let mut out = vec![0.0; n];
    let [nx, _] = f.dims();
    for k in 0..n {
        let (p, q) = (d.dx[k], d.dy[k]);
        let (fxx, fxy, fyy) = (d.dxx[k], d.dxy[k], d.dyy[k]);
        out[k] = match kind {
            ExtremalKind::MinkowskiGraph => {
                (1.0 - p * p) * fyy + 2.0 * p * q * fxy + (1.0 - q * q) * fxx
            }
            ExtremalKind::EuclideanMinimal => {
                (1.0 + q * q) * fxx - 2.0 * p * q * fxy + (1.0 + p * p) * fyy
            }
            ExtremalKind::LorentzMaximal => {
                let (i, j) = (k % nx, k / nx);
                if f.is_masked(i, j) {
                    0.0
                } else {
                    let margin = 1.0 - p * p - q * q;
                    if margin <= LIGHT_LIKE_TOL {
                        let (x, y) = f.coord(i, j);
                        return Err(SurfaceError::DivergenceUndefined { x, y, margin });
                    }
                    // ∇·(W∇u) = W[Δu + ∇u·∇Q / (2(1−Q))], Q = |∇u|², W = (1−Q)^{-1/2}.
                    let w = 1.0 / margin.sqrt();
                    let qx = 2.0 * (p * fxx + q * fxy);
                    let qy = 2.0 * (p * fxy + q * fyy);
                    w * (fxx + fyy + (p * qx + q * qy) / (2.0 * margin))
                }
            }
        };
    }
    let mut field = f.scalar_like(out)?;
    if let Some(mask) = f.mask() {
        field.set_mask(Some(mask.to_vec()))?;
    }
    Ok(field)
}

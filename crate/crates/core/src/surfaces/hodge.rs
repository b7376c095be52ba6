//! Residuals of `δ(ρ(Q)ω) = dω = 0` for a 1-form `ω = ω₁dx + ω₂dy`, the dual
//! potential `dσ = *(ρω)`, and the energy `∫ e(Q)`.

use super::{Density, SurfaceError};
use crate::grid::{d1, Axis, Chart, GridField};

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeResidual {
    /// `∂x ω₂ − ∂y ω₁`.
    pub closedness: GridField,
    /// `∂x(ρω₁) + ∂y(ρω₂)`.
    pub coclosedness: GridField,
}

impl HodgeResidual {
    pub fn max_closedness(&self) -> f64 {
        self.closedness.max_abs(0)
    }

    pub fn max_coclosedness(&self) -> f64 {
        self.coclosedness.max_abs(0)
    }
}

fn rho_weighted(omega: &GridField, dens: &Density) -> Result<(Vec<f64>, Vec<f64>), SurfaceError> {
    let w1 = omega.component(0);
    let w2 = omega.component(1);
    let [nx, _] = omega.dims();
    let mut r1 = Vec::with_capacity(w1.len());
    let mut r2 = Vec::with_capacity(w1.len());
    for k in 0..w1.len() {
        let rho = if omega.is_masked(k % nx, k / nx) {
            0.0
        } else {
            dens.rho(w1[k] * w1[k] + w2[k] * w2[k])?
        };
        r1.push(rho * w1[k]);
        r2.push(rho * w2[k]);
    }
    Ok((r1, r2))
}

pub fn hodge_residual(omega: &GridField, dens: &Density) -> Result<HodgeResidual, SurfaceError> {
    omega.require_components(2)?;
    omega.require_chart(Chart::Cartesian)?;
    let dims = omega.dims();
    let [hx, hy] = omega.spacing();
    let w1 = omega.component(0);
    let w2 = omega.component(1);
    let dw2x = d1(&w2, dims, hx, Axis::X);
    let dw1y = d1(&w1, dims, hy, Axis::Y);
    let closed: Vec<f64> = dw2x.iter().zip(&dw1y).map(|(a, b)| a - b).collect();

    let (r1, r2) = rho_weighted(omega, dens)?;
    let dr1x = d1(&r1, dims, hx, Axis::X);
    let dr2y = d1(&r2, dims, hy, Axis::Y);
    let coclosed: Vec<f64> = dr1x.iter().zip(&dr2y).map(|(a, b)| a + b).collect();

    let mut closedness = omega.scalar_like(closed)?;
    let mut coclosedness = omega.scalar_like(coclosed)?;
    if let Some(m) = omega.mask() {
        closedness.set_mask(Some(m.to_vec()))?;
        coclosedness.set_mask(Some(m.to_vec()))?;
    }
    Ok(HodgeResidual {
        closedness,
        coclosedness,
    })
}

#[derive(Debug, Clone)]
pub struct DualForm {
    /// Potential with `∇σ = (−ρω₂, ρω₁)`, zero at the grid origin.
    pub sigma: GridField,
    /// `dσ` by differencing `σ`.
    pub dsigma: GridField,
    /// Residuals of `dσ` under the dual density.
    pub dual_residual: HodgeResidual,
    pub dual_density: Density,
    /// Largest gap between the two integration paths.
    pub path_defect: f64,
    /// Largest `|dσ|²` on the grid.
    pub max_dual_q: f64,
}

/// Thresholds for [`dual_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTolerances {
    /// Both residuals of `ω` must stay below this.
    pub closed: f64,
    /// Allowed disagreement between the two integration paths.
    pub path: f64,
}

impl Default for DualTolerances {
    fn default() -> Self {
        Self {
            closed: 1e-8,
            path: 1e-8,
        }
    }
}

/// Builds `σ` from `dσ = *(ρω)` by trapezoidal integration along the path
/// "first along x, then along y", checked against the path "first y, then x".
pub fn dual_form(
    omega: &GridField,
    dens: &Density,
    tol: DualTolerances,
) -> Result<DualForm, SurfaceError> {
    if omega.mask().is_some_and(|m| m.iter().any(|&b| b)) {
        return Err(SurfaceError::InvalidArgument(
            "dual potential needs an unmasked, simply connected grid".into(),
        ));
    }
    let res = hodge_residual(omega, dens)?;
    let worst = res.max_closedness().max(res.max_coclosedness());
    if worst > tol.closed {
        return Err(SurfaceError::NotClosed {
            residual: worst,
            threshold: tol.closed,
        });
    }
    let dual_density = dens.dual()?;
    let [nx, ny] = omega.dims();
    let [hx, hy] = omega.spacing();
    let (r1, r2) = rho_weighted(omega, dens)?;
    // ∇σ = *(ρω) = (−ρω₂, ρω₁)
    let sx = |k: usize| -r2[k];
    let sy = |k: usize| r1[k];
    let at = |i: usize, j: usize| j * nx + i;

    let mut along_x = vec![0.0; nx * ny];
    for i in 1..nx {
        along_x[at(i, 0)] = along_x[at(i - 1, 0)] + 0.5 * hx * (sx(at(i - 1, 0)) + sx(at(i, 0)));
    }
    for j in 1..ny {
        for i in 0..nx {
            along_x[at(i, j)] =
                along_x[at(i, j - 1)] + 0.5 * hy * (sy(at(i, j - 1)) + sy(at(i, j)));
        }
    }
    let mut along_y = vec![0.0; nx * ny];
    for j in 1..ny {
        along_y[at(0, j)] = along_y[at(0, j - 1)] + 0.5 * hy * (sy(at(0, j - 1)) + sy(at(0, j)));
    }
    for i in 1..nx {
        for j in 0..ny {
            along_y[at(i, j)] =
                along_y[at(i - 1, j)] + 0.5 * hx * (sx(at(i - 1, j)) + sx(at(i, j)));
        }
    }
    let path_defect = along_x
        .iter()
        .zip(&along_y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if path_defect > tol.path {
        return Err(SurfaceError::PathDependence {
            defect: path_defect,
            tol: tol.path,
        });
    }

    let sigma = omega.scalar_like(along_x)?;
    let dims = omega.dims();
    let gx = d1(sigma.values(), dims, hx, Axis::X);
    let gy = d1(sigma.values(), dims, hy, Axis::Y);
    let mut grad = Vec::with_capacity(2 * gx.len());
    let mut max_dual_q = 0.0f64;
    for (a, b) in gx.iter().zip(&gy) {
        grad.push(*a);
        grad.push(*b);
        max_dual_q = max_dual_q.max(a * a + b * b);
    }
    let dsigma = GridField::new(
        Chart::Cartesian,
        omega.origin(),
        omega.spacing(),
        dims,
        2,
        grad,
    )?;
    let dual_residual = hodge_residual(&dsigma, &dual_density)?;
    Ok(DualForm {
        sigma,
        dsigma,
        dual_residual,
        dual_density,
        path_defect,
        max_dual_q,
    })
}

/// `∫ e(|ω|²)` by the midpoint rule over cells whose four corners are kept.
///
/// `region` uses the field-mask convention: `true` excludes a node.
pub fn energy(
    omega: &GridField,
    dens: &Density,
    region: Option<&[bool]>,
) -> Result<f64, SurfaceError> {
    omega.require_components(2)?;
    let [nx, ny] = omega.dims();
    if let Some(r) = region {
        if r.len() != nx * ny {
            return Err(SurfaceError::InvalidArgument(format!(
                "region mask has {} entries, expected {}",
                r.len(),
                nx * ny
            )));
        }
    }
    let excluded =
        |i: usize, j: usize| omega.is_masked(i, j) || region.is_some_and(|r| r[j * nx + i]);
    let [hx, hy] = omega.spacing();
    let mut total = 0.0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if excluded(i, j) || excluded(i + 1, j) || excluded(i, j + 1) || excluded(i + 1, j + 1)
            {
                continue;
            }
            let mut w = [0.0; 2];
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                for (c, wc) in w.iter_mut().enumerate() {
                    *wc += 0.25 * omega.get(i + di, j + dj, c);
                }
            }
            total += dens.primitive(w[0] * w[0] + w[1] * w[1])?;
        }
    }
    Ok(total * hx * hy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize, f: impl Fn(f64, f64) -> [f64; 2]) -> GridField {
        let h = 1.0 / (n - 1) as f64;
        GridField::from_fn2(Chart::Cartesian, [0.0, 0.0], [h, h], [n, n], f).unwrap()
    }

    fn centred(n: usize, f: impl Fn(f64, f64) -> [f64; 2]) -> GridField {
        let h = 2.0 / (n - 1) as f64;
        GridField::from_fn2(Chart::Cartesian, [-1.0, -1.0], [h, h], [n, n], f).unwrap()
    }

    #[test]
    fn residual_examples() {
        let r = hodge_residual(&unit_square(11, |_, _| [1.0, 0.0]), &Density::Euclidean).unwrap();
        assert!(r.max_closedness() < 1e-14 && r.max_coclosedness() < 1e-14);

        let w = centred(21, |x, y| [x, y]);
        let r = hodge_residual(&w, &Density::Euclidean).unwrap();
        assert!(r.max_closedness() < 1e-13);
        // Centred differences see ρ(h²) at the neighbours: 2/√(1+h²).
        let h = 0.1f64;
        assert!((r.coclosedness.get(10, 10, 0) - 2.0 / (1.0 + h * h).sqrt()).abs() < 1e-12);

        for d in [Density::Euclidean, Density::Minkowski, Density::Unit] {
            let w = centred(21, |x, y| [-0.3 * y, 0.3 * x]);
            let r = hodge_residual(&w, &d).unwrap();
            let c = r.closedness.get(10, 10, 0) / 0.3;
            assert!((c - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_dual() {
        for c in [0.5, 1.0, 2.0] {
            let w = unit_square(17, |_, _| [c, 0.0]);
            let dual = dual_form(&w, &Density::Euclidean, DualTolerances::default()).unwrap();
            let expected = c * c / (1.0 + c * c);
            for k in 0..dual.dsigma.values().len() / 2 {
                let (a, b) = (dual.dsigma.values()[2 * k], dual.dsigma.values()[2 * k + 1]);
                assert!((a * a + b * b - expected).abs() < 1e-10);
            }
            assert!(dual.dual_residual.max_closedness() < 1e-10);
            assert!(dual.dual_residual.max_coclosedness() < 1e-10);
            if c == 1.0 {
                let s = &dual.sigma;
                let (_, y) = s.coord(5, 9);
                assert!((s.get(5, 9, 0) - y / 2f64.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_field_dual_is_zero() {
        let w = unit_square(9, |_, _| [0.0, 0.0]);
        let dual = dual_form(&w, &Density::Euclidean, DualTolerances::default()).unwrap();
        assert_eq!(dual.sigma.max_abs(0), 0.0);
    }

    #[test]
    fn rotation_is_not_closed() {
        let w = centred(9, |x, y| [-y, x]);
        assert!(matches!(
            dual_form(&w, &Density::Euclidean, DualTolerances::default()),
            Err(SurfaceError::NotClosed { .. })
        ));
    }

    #[test]
    fn small_radial_field_dual_residual_vanishes() {
        // a(x, y) is closed but only co-closed to first order in a.
        let run = |a: f64, n: usize| {
            let w = centred(n, |x, y| [a * x, a * y]);
            let tol = DualTolerances {
                closed: 10.0,
                path: 1.0,
            };
            let r = dual_form(&w, &Density::Euclidean, tol)
                .unwrap()
                .dual_residual;
            r.max_closedness().max(r.max_coclosedness())
        };
        let large = run(0.1, 17);
        let small = run(0.01, 17);
        assert!(small < large / 5.0, "{large} {small}");
        assert!(run(0.01, 33) < 2.0 * small);
    }

    #[test]
    fn energy_examples() {
        let w = unit_square(5, |_, _| [0.0, 0.0]);
        assert_eq!(energy(&w, &Density::Euclidean, None).unwrap(), 0.0);
        let w = unit_square(5, |_, _| [3f64.sqrt(), 0.0]);
        assert!((energy(&w, &Density::Euclidean, None).unwrap() - 2.0).abs() < 1e-14);
        let w = unit_square(5, |_, _| [0.5, 0.0]);
        let e = energy(&w, &Density::Minkowski, None).unwrap();
        assert!((e - 2.0 * (1.0 - 0.75f64.sqrt())).abs() < 1e-14);

        let mut region = vec![false; 25];
        region[0] = true;
        let e = energy(&w, &Density::Minkowski, Some(&region)).unwrap();
        assert!((e - 15.0 / 16.0 * 2.0 * (1.0 - 0.75f64.sqrt())).abs() < 1e-14);
    }
}

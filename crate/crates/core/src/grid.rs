//! Structured-grid sample fields and finite-difference stencils.
//!
//! A [`GridField`] stores samples on an `nx × ny` lattice. The first axis is
//! `x` (or `r`, or `η`), the second is `y` (or `θ`, or `ξ`). Values are
//! row-major with rows running along the second axis, so node `(i, j)`,
//! component `c` lives at `(j * nx + i) * components + c`.
//!
//! All derivative helpers use centered second-order differences in the
//! interior and second-order one-sided stencils on the boundary rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 3 nodes per axis, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("grid spacing must be positive and finite, got ({0}, {1})")]
    BadSpacing(f64, f64),
    #[error("component count must be 1 or 2, got {0}")]
    BadComponents(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("mask has {got} entries, expected {expected}")]
    MaskMismatch { expected: usize, got: usize },
    #[error("operation needs a {expected:?} chart, field is {got:?}")]
    WrongChart { expected: Chart, got: Chart },
    #[error("operation needs {expected} component(s), field has {got}")]
    WrongComponents { expected: usize, got: usize },
}

/// Coordinate chart carried by a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Cartesian,
    Polar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    chart: Chart,
    origin: [f64; 2],
    spacing: [f64; 2],
    dims: [usize; 2],
    components: usize,
    values: Vec<f64>,
    /// `true` marks a node as excluded.
    mask: Option<Vec<bool>>,
}

impl GridField {
    pub fn new(
        chart: Chart,
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        components: usize,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let [nx, ny] = dims;
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall(nx, ny));
        }
        let [hx, hy] = spacing;
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(GridError::BadSpacing(hx, hy));
        }
        if components != 1 && components != 2 {
            return Err(GridError::BadComponents(components));
        }
        let expected = nx * ny * components;
        if values.len() != expected {
            return Err(GridError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            chart,
            origin,
            spacing,
            dims,
            components,
            values,
            mask: None,
        })
    }

    pub fn zeros(
        chart: Chart,
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        components: usize,
    ) -> Result<Self, GridError> {
        Self::new(
            chart,
            origin,
            spacing,
            dims,
            components,
            vec![0.0; dims[0] * dims[1] * components],
        )
    }

    /// Samples a scalar function at every node.
    pub fn from_fn(
        chart: Chart,
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let mut out = Self::zeros(chart, origin, spacing, dims, 1)?;
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let (x, y) = out.coord(i, j);
                out.values[j * dims[0] + i] = f(x, y);
            }
        }
        Ok(out)
    }

    /// Samples a 2-vector function at every node.
    pub fn from_fn2(
        chart: Chart,
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        f: impl Fn(f64, f64) -> [f64; 2],
    ) -> Result<Self, GridError> {
        let mut out = Self::zeros(chart, origin, spacing, dims, 2)?;
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let (x, y) = out.coord(i, j);
                let v = f(x, y);
                let k = 2 * (j * dims[0] + i);
                out.values[k] = v[0];
                out.values[k + 1] = v[1];
            }
        }
        Ok(out)
    }

    /// Uniform grid covering `[x0, x1] × [y0, y1]` with `nx × ny` nodes.
    pub fn spanning(
        chart: Chart,
        x: (f64, f64),
        y: (f64, f64),
        dims: [usize; 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let [nx, ny] = dims;
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall(nx, ny));
        }
        let hx = (x.1 - x.0) / (nx - 1) as f64;
        let hy = (y.1 - y.0) / (ny - 1) as f64;
        Self::from_fn(chart, [x.0, y.0], [hx, hy], dims, f)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }
    pub fn nx(&self) -> usize {
        self.dims[0]
    }
    pub fn ny(&self) -> usize {
        self.dims[1]
    }
    pub fn components(&self) -> usize {
        self.components
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn set_mask(&mut self, mask: Option<Vec<bool>>) -> Result<(), GridError> {
        if let Some(m) = &mask {
            let expected = self.dims[0] * self.dims[1];
            if m.len() != expected {
                return Err(GridError::MaskMismatch {
                    expected,
                    got: m.len(),
                });
            }
        }
        self.mask = mask;
        Ok(())
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, GridError> {
        self.set_mask(Some(mask))?;
        Ok(self)
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask
            .as_ref()
            .map(|m| m[j * self.dims[0] + i])
            .unwrap_or(false)
    }

    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
        )
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.dims[0] + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, c: usize) -> f64 {
        self.values[self.node(i, j) * self.components + c]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: usize, v: f64) {
        let k = self.node(i, j) * self.components + c;
        self.values[k] = v;
    }

    /// Copies one component out as a scalar array in node order.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(c)
            .step_by(self.components)
            .copied()
            .collect()
    }

    /// Builds a scalar field on the same lattice from node-ordered values.
    pub fn scalar_like(&self, values: Vec<f64>) -> Result<Self, GridError> {
        Self::new(self.chart, self.origin, self.spacing, self.dims, 1, values)
    }

    pub fn require_chart(&self, chart: Chart) -> Result<(), GridError> {
        if self.chart != chart {
            return Err(GridError::WrongChart {
                expected: chart,
                got: self.chart,
            });
        }
        Ok(())
    }

    pub fn require_components(&self, n: usize) -> Result<(), GridError> {
        if self.components != n {
            return Err(GridError::WrongComponents {
                expected: n,
                got: self.components,
            });
        }
        Ok(())
    }

    /// Largest `|value|` of component `c` over unmasked nodes.
    pub fn max_abs(&self, c: usize) -> f64 {
        self.max_abs_where(c, |_, _| true)
    }

    /// Largest `|value|` of component `c` over unmasked nodes at least `ring`
    /// nodes away from the lattice edge.
    pub fn max_abs_inset(&self, c: usize, ring: usize) -> f64 {
        let [nx, ny] = self.dims;
        self.max_abs_where(c, |i, j| {
            i >= ring && j >= ring && i + ring < nx && j + ring < ny
        })
    }

    fn max_abs_where(&self, c: usize, keep: impl Fn(usize, usize) -> bool) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.dims[1] {
            for i in 0..self.dims[0] {
                if keep(i, j) && !self.is_masked(i, j) {
                    m = m.max(self.get(i, j, c).abs());
                }
            }
        }
        m
    }

    /// True for nodes not on the outer ring of the lattice.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.dims[0] && j + 1 < self.dims[1]
    }

    /// Bilinear interpolation of component `c`; `None` outside the lattice.
    pub fn interpolate(&self, x: f64, y: f64, c: usize) -> Option<f64> {
        let fx = (x - self.origin[0]) / self.spacing[0];
        let fy = (y - self.origin[1]) / self.spacing[1];
        let (nx, ny) = (self.dims[0] as f64, self.dims[1] as f64);
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > nx - 1.0 + eps || fy > ny - 1.0 + eps {
            return None;
        }
        let fx = fx.clamp(0.0, nx - 1.0);
        let fy = fy.clamp(0.0, ny - 1.0);
        let i = (fx.floor() as usize).min(self.dims[0] - 2);
        let j = (fy.floor() as usize).min(self.dims[1] - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.get(i, j, c);
        let v10 = self.get(i + 1, j, c);
        let v01 = self.get(i, j + 1, c);
        let v11 = self.get(i + 1, j + 1, c);
        Some(
            (1.0 - tx) * (1.0 - ty) * v00
                + tx * (1.0 - ty) * v10
                + (1.0 - tx) * ty * v01
                + tx * ty * v11,
        )
    }
}

/// Axis selector for the stencil helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// First derivative along `axis` of a node-ordered scalar array.
pub fn d1(data: &[f64], dims: [usize; 2], h: f64, axis: Axis) -> Vec<f64> {
    let [nx, ny] = dims;
    let mut out = vec![0.0; nx * ny];
    let (n, stride) = match axis {
        Axis::X => (nx, 1),
        Axis::Y => (ny, nx),
    };
    let lines = match axis {
        Axis::X => ny,
        Axis::Y => nx,
    };
    for line in 0..lines {
        let base = match axis {
            Axis::X => line * nx,
            Axis::Y => line,
        };
        let at = |k: usize| data[base + k * stride];
        for k in 0..n {
            let v = if k == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else {
                (at(k + 1) - at(k - 1)) / (2.0 * h)
            };
            out[base + k * stride] = v;
        }
    }
    out
}

/// Second derivative along `axis`.
pub fn d2(data: &[f64], dims: [usize; 2], h: f64, axis: Axis) -> Vec<f64> {
    let [nx, ny] = dims;
    let mut out = vec![0.0; nx * ny];
    let (n, stride) = match axis {
        Axis::X => (nx, 1),
        Axis::Y => (ny, nx),
    };
    let lines = match axis {
        Axis::X => ny,
        Axis::Y => nx,
    };
    let h2 = h * h;
    for line in 0..lines {
        let base = match axis {
            Axis::X => line * nx,
            Axis::Y => line,
        };
        let at = |k: usize| data[base + k * stride];
        for k in 0..n {
            let v = if k == 0 {
                if n >= 4 {
                    (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
                } else {
                    (at(0) - 2.0 * at(1) + at(2)) / h2
                }
            } else if k == n - 1 {
                if n >= 4 {
                    (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / h2
                } else {
                    (at(n - 1) - 2.0 * at(n - 2) + at(n - 3)) / h2
                }
            } else {
                (at(k + 1) - 2.0 * at(k) + at(k - 1)) / h2
            };
            out[base + k * stride] = v;
        }
    }
    out
}

/// Node-ordered derivative arrays of a scalar component up to second order.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dxx: Vec<f64>,
    pub dyy: Vec<f64>,
    pub dxy: Vec<f64>,
}

impl Derivatives {
    pub fn of(field: &GridField, c: usize) -> Self {
        let data = field.component(c);
        let dims = field.dims();
        let [hx, hy] = field.spacing();
        let dx = d1(&data, dims, hx, Axis::X);
        let dy = d1(&data, dims, hy, Axis::Y);
        let dxx = d2(&data, dims, hx, Axis::X);
        let dyy = d2(&data, dims, hy, Axis::Y);
        let dxy = d1(&dx, dims, hy, Axis::Y);
        Self {
            dx,
            dy,
            dxx,
            dyy,
            dxy,
        }
    }
}

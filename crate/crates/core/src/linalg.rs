//! Small dense and banded linear algebra used by the solvers.
//!
//! The structured-grid systems here have a natural band structure once the
//! unknowns are ordered layer by layer, so a banded LU (with partial
//! pivoting) and a banded Cholesky cover the direct solves. Krylov
//! fallbacks work on a compressed-row matrix.

use thiserror::Error;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("zero pivot at row {row} (|pivot| = {pivot:e})")]
    SingularPivot { row: usize, pivot: f64 },
    #[error("matrix not positive definite at row {row} (diagonal {diag:e})")]
    NotPositiveDefinite { row: usize, diag: f64 },
    #[error("iteration did not converge: relative residual {residual:e} after {iterations} steps")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iteration broke down at step {0}")]
    Breakdown(usize),
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn mat2_sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

pub fn mat2_scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mat2_transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Symmetric part `(A + Aᵀ)/2`.
pub fn mat2_sym(a: &Mat2) -> Mat2 {
    let off = 0.5 * (a[0][1] + a[1][0]);
    [[a[0][0], off], [off, a[1][1]]]
}

pub fn mat2_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat2_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// Max-abs entry.
pub fn mat2_norm(a: &Mat2) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Eigenvalues `(min, max)` of a symmetric 2×2 matrix (lower-left ignored).
pub fn sym2_eigenvalues(a: &Mat2) -> (f64, f64) {
    let (p, q, r) = (a[0][0], a[0][1], a[1][1]);
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    (mean - rad, mean + rad)
}

/// Singular values `(min, max)` of a general 2×2 matrix.
pub fn mat2_singular_values(a: &Mat2) -> (f64, f64) {
    let ata = mat2_mul(&mat2_transpose(a), a);
    let hi = sym2_eigenvalues(&ata).1.max(0.0).sqrt();
    if hi == 0.0 {
        return (0.0, 0.0);
    }
    // The product of the singular values is |det|; taking the square root of
    // the small eigenvalue of AᵀA would lose half the digits.
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    ((det.abs() / hi).min(hi), hi)
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut r = row.clone();
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                debug_assert!(c < ncols);
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: rows.len(),
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn mul_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (i, yi) in y.iter().enumerate().take(self.nrows) {
            for (c, v) in self.row(i) {
                out[c] += v * yi;
            }
        }
        out
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

/// Banded LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    rows: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factors a square CSR matrix. `tol` is the relative pivot threshold.
    pub fn factor(a: &CsrMatrix, tol: f64) -> Result<Self, LinalgError> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut rows = vec![0.0; n * width];
        let mut scale = 0.0f64;
        for i in 0..n {
            for (c, v) in a.row(i) {
                rows[i * width + (c + kl - i)] = v;
                scale = scale.max(v.abs());
            }
        }
        let idx = |i: usize, j: usize| -> usize { i * width + (j + kl - i) };
        let mut pivots = vec![0; n];
        let thresh = tol * scale.max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = rows[idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            if best <= thresh {
                return Err(LinalgError::SingularPivot {
                    row: k,
                    pivot: best,
                });
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    rows.swap(idx(k, c), idx(p, c));
                }
            }
            let piv = rows[idx(k, k)];
            for r in k + 1..=last_row {
                let m = rows[idx(r, k)] / piv;
                rows[idx(r, k)] = m;
                if m != 0.0 {
                    for c in k + 1..=last_col {
                        let u = rows[idx(k, c)];
                        rows[idx(r, c)] -= m * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            width,
            rows,
            pivots,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kl = self.kl;
        let idx = |i: usize, j: usize| -> usize { i * self.width + (j + kl - i) };
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            let xk = x[k];
            for r in k + 1..=last_row {
                x[r] -= self.rows[idx(r, k)] * xk;
            }
        }
        let ku_total = self.width - 1 - kl;
        for k in (0..n).rev() {
            let last_col = (k + ku_total).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=last_col {
                s -= self.rows[idx(k, c)] * x[c];
            }
            x[k] = s / self.rows[idx(k, k)];
        }
        x
    }
}

/// Symmetric positive-definite band matrix, lower band stored row-wise.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        // requires j <= i, i - j <= bw
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        assert!(i - j <= self.bw, "entry outside band");
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.at(i, j)]
    }

    /// Accumulates `AᵀA` for the rows of `a` into a fresh band.
    pub fn normal_matrix(a: &CsrMatrix, weights: Option<&[f64]>) -> Self {
        let mut bw = 0;
        for i in 0..a.nrows() {
            let cols: Vec<usize> = a.row(i).map(|e| e.0).collect();
            if let (Some(lo), Some(hi)) = (cols.iter().min(), cols.iter().max()) {
                bw = bw.max(hi - lo);
            }
        }
        let mut out = Self::zeros(a.ncols(), bw);
        for i in 0..a.nrows() {
            let w = weights.map(|w| w[i]).unwrap_or(1.0);
            let row: Vec<(usize, f64)> = a.row(i).collect();
            for &(ca, va) in &row {
                for &(cb, vb) in &row {
                    if cb <= ca {
                        out.add(ca, cb, w * va * vb);
                    }
                }
            }
        }
        out
    }

    /// In-place Cholesky `A = L Lᵀ`. Fails when a pivot drops below
    /// `tol` times the largest original diagonal.
    pub fn cholesky(mut self, tol: f64) -> Result<BandCholesky, LinalgError> {
        let n = self.n;
        let bw = self.bw;
        let max_diag = (0..n).map(|i| self.get(i, i)).fold(0.0f64, f64::max);
        let thresh = tol * max_diag.max(f64::MIN_POSITIVE);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = self.data[self.at(i, j)];
                for k in k0..j {
                    s -= self.data[self.at(i, k)] * self.data[self.at(j, k)];
                }
                if j == i {
                    if s <= thresh {
                        return Err(LinalgError::NotPositiveDefinite { row: i, diag: s });
                    }
                    let k = self.at(i, i);
                    self.data[k] = s.sqrt();
                } else {
                    let k = self.at(i, j);
                    self.data[k] = s / self.data[self.at(j, j)];
                }
            }
        }
        Ok(BandCholesky { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let n = l.n;
        let bw = l.bw;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.data[l.at(i, k)] * y[k];
            }
            y[i] = s / l.data[l.at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l.data[l.at(k, i)] * y[k];
            }
            y[i] = s / l.data[l.at(i, i)];
        }
        y
    }

    /// Smallest diagonal of the factor squared over the largest: a cheap
    /// conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let l = &self.l;
        let d: Vec<f64> = (0..l.n).map(|i| l.data[l.at(i, i)].powi(2)).collect();
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(0.0, f64::max);
        lo / hi
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BiCGSTAB for general square systems.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let r_hat = r.clone();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    if norm(&r) / bnorm <= tol {
        return Ok(x);
    }
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < f64::MIN_POSITIVE {
            return Err(LinalgError::Breakdown(it));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = a.mul_vec(&p);
        let denom = dot(&r_hat, &v);
        if denom.abs() < f64::MIN_POSITIVE {
            return Err(LinalgError::Breakdown(it));
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok(x);
        }
        let t = a.mul_vec(&s);
        let tt = dot(&t, &t);
        if tt < f64::MIN_POSITIVE {
            return Err(LinalgError::Breakdown(it));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
        if omega == 0.0 {
            return Err(LinalgError::Breakdown(it));
        }
    }
    let ax = a.mul_vec(&x);
    let res = norm(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / bnorm;
    Err(LinalgError::NoConvergence {
        iterations: max_iter,
        residual: res,
    })
}

/// Conjugate gradients on the normal equations (CGLS) for `min ‖Ax − b‖`.
/// Convergence is measured on `‖Aᵀr‖ / ‖Aᵀb‖`.
pub fn cgls(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, LinalgError> {
    let n = a.ncols();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut s = a.mul_transpose_vec(&r);
    let s0 = norm(&a.mul_transpose_vec(b)).max(f64::MIN_POSITIVE);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    for _ in 0..max_iter {
        if gamma.sqrt() / s0 <= tol {
            return Ok(x);
        }
        let q = a.mul_vec(&p);
        let qq = dot(&q, &q);
        if qq < f64::MIN_POSITIVE {
            break;
        }
        let alpha = gamma / qq;
        for i in 0..n {
            x[i] += alpha * p[i];
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s = a.mul_transpose_vec(&r);
        let gamma_new = dot(&s, &s);
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for i in 0..n {
            p[i] = s[i] + beta * p[i];
        }
    }
    if gamma.sqrt() / s0 <= tol {
        return Ok(x);
    }
    Err(LinalgError::NoConvergence {
        iterations: max_iter,
        residual: gamma.sqrt() / s0,
    })
}

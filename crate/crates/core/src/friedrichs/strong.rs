//! Discrete strong solutions by nodal least squares.
//!
//! Unknowns are `(w₁, w₂)` at the nodes `η_i = i·R/N`, `i = 0..=N`, and
//! `ξ_j = 2πj/N`, periodic in `j`. Each node contributes the two rows of
//! `E(Lw − F)` with centred differences, one-sided at `η = 0` and `η = R`;
//! the boundary condition enters as a penalty row per node of `η = R`. Rows
//! are weighted by the trapezoid rule so the objective approximates
//! `‖E(Lw − F)‖²_{L²} + λ‖σw₁ + τw₂ − g‖²_{L²(∂)}`. Nothing is imposed at
//! `η = 0` beyond the equation itself.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    boundary_admissibility, multiplier, BoundaryPair, FirstOrderSystem, FriedrichsError,
    MultiplierChoice, Verdict,
};
use crate::grid::{Chart, GridField};
use crate::linalg::{cgls, CsrMatrix, SymBand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsqMethod {
    /// Banded Cholesky on the normal equations.
    Direct,
    /// Conjugate gradients on the normal equations, matrix-free.
    Cgls,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongOptions {
    /// Intervals in `η` and nodes in `ξ`.
    pub resolution: usize,
    pub method: LsqMethod,
    /// Weight `λ` of the boundary penalty.
    pub penalty: f64,
    /// Relative pivot floor for the Cholesky factor.
    pub pivot_tol: f64,
    pub cgls_tol: f64,
    pub max_iter: usize,
}

impl Default for StrongOptions {
    fn default() -> Self {
        Self {
            resolution: 32,
            method: LsqMethod::Direct,
            penalty: 1.0,
            pivot_tol: 1e-14,
            cgls_tol: 1e-11,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    /// `(w₁, w₂)` on the `(η, ξ)` lattice; `ξ` wraps around without a
    /// duplicated seam node.
    pub w: GridField,
    /// Weighted discrete `L²` norm of `E(Lw − F)`.
    pub interior_residual: f64,
    /// `max |σw₁ + τw₂ − g|` over `η = R`.
    pub boundary_defect: f64,
    /// Larger of the two steps.
    pub h: f64,
}

impl DiscreteSolution {
    /// Discrete `L²` distance (trapezoid in `η`) to exact component fields.
    pub fn l2_error(&self, exact: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
        let [n1, m] = self.w.dims();
        let [he, hx] = self.w.spacing();
        let mut s = 0.0;
        for j in 0..m {
            for i in 0..n1 {
                let (eta, xi) = self.w.coord(i, j);
                let ex = exact(eta, xi);
                let wt = if i == 0 || i + 1 == n1 { 0.5 } else { 1.0 };
                let d0 = self.w.get(i, j, 0) - ex[0];
                let d1 = self.w.get(i, j, 1) - ex[1];
                s += wt * (d0 * d0 + d1 * d1);
            }
        }
        (s * he * hx).sqrt()
    }
}

/// Exact data of `u` at one point, for building a manufactured right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSample {
    pub eta: f64,
    pub u_eta: f64,
    pub u_eta_eta: f64,
    pub u_xi: f64,
    pub u_xi_xi: f64,
}

/// `f = K′u_η + K u_ηη + u_ξξ + k u_ξ` at each sample.
pub fn manufactured_rhs(sys: &FirstOrderSystem, samples: &[ManufacturedSample]) -> Vec<f64> {
    let tc = &sys.type_change;
    samples
        .iter()
        .map(|s| tc.dk(s.eta) * s.u_eta + tc.k(s.eta) * s.u_eta_eta + s.u_xi_xi + sys.k * s.u_xi)
        .collect()
}

/// Sparse row entries, right-hand side and weight.
type WeightedRow = (Vec<(usize, f64)>, f64, f64);

struct Assembly {
    a: CsrMatrix,
    b: Vec<f64>,
    /// Row weights (squared scale factors).
    weights: Vec<f64>,
    interior_rows: usize,
}

fn assemble(
    sys: &FirstOrderSystem,
    choice: &MultiplierChoice,
    bc: &BoundaryPair,
    rhs: &(dyn Fn(f64, f64) -> f64 + Sync),
    n: usize,
    penalty: f64,
) -> Assembly {
    let m = n;
    let r = sys.radius();
    let (he, hx) = (r / n as f64, TAU / m as f64);
    let col = |i: usize, j: usize, comp: usize| (i * m + j) * 2 + comp;
    let per_row: Vec<Vec<WeightedRow>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let eta = i as f64 * he;
            let (kv, dkv) = (sys.type_change.k(eta), sys.type_change.dk(eta));
            let e = multiplier(sys, choice.a, choice.c, eta);
            let d_eta: Vec<(usize, f64)> = if i == 0 {
                vec![(0, -1.5 / he), (1, 2.0 / he), (2, -0.5 / he)]
            } else if i == n {
                vec![(n, 1.5 / he), (n - 1, -2.0 / he), (n - 2, 0.5 / he)]
            } else {
                vec![(i + 1, 0.5 / he), (i - 1, -0.5 / he)]
            };
            let wt = if i == 0 || i == n {
                0.5 * he * hx
            } else {
                he * hx
            };
            let mut rows = Vec::with_capacity(2 * m + m);
            for j in 0..m {
                let xi = j as f64 * hx;
                let (jp, jm) = ((j + 1) % m, (j + m - 1) % m);
                // R1 = K w₁_η + w₂_ξ + K′w₁ + k w₂ − f,  R2 = −w₂_η + w₁_ξ.
                let mut r1: Vec<(usize, f64)> = d_eta
                    .iter()
                    .map(|&(ii, c)| (col(ii, j, 0), kv * c))
                    .collect();
                r1.push((col(i, jp, 1), 0.5 / hx));
                r1.push((col(i, jm, 1), -0.5 / hx));
                r1.push((col(i, j, 0), dkv));
                r1.push((col(i, j, 1), sys.k));
                let mut r2: Vec<(usize, f64)> =
                    d_eta.iter().map(|&(ii, c)| (col(ii, j, 1), -c)).collect();
                r2.push((col(i, jp, 0), 0.5 / hx));
                r2.push((col(i, jm, 0), -0.5 / hx));
                let f = rhs(eta, xi);
                for erow in e {
                    let mut entries: Vec<(usize, f64)> = r1
                        .iter()
                        .map(|&(c, v)| (c, erow[0] * v))
                        .chain(r2.iter().map(|&(c, v)| (c, erow[1] * v)))
                        .collect();
                    entries.sort_by_key(|e| e.0);
                    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
                    for (c, v) in entries {
                        match merged.last_mut() {
                            Some(last) if last.0 == c => last.1 += v,
                            _ => merged.push((c, v)),
                        }
                    }
                    rows.push((merged, erow[0] * f, wt));
                }
            }
            rows
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * (n + 1) * m + m);
    let mut b = Vec::with_capacity(rows.capacity());
    let mut weights = Vec::with_capacity(rows.capacity());
    for (entries, v, w) in per_row.into_iter().flatten() {
        rows.push(entries);
        b.push(v);
        weights.push(w);
    }
    let interior_rows = rows.len();
    for j in 0..m {
        let xi = j as f64 * hx;
        let (s, t) = ((bc.sigma)(xi), (bc.tau)(xi));
        rows.push(vec![(col(n, j, 0), s), (col(n, j, 1), t)]);
        b.push(bc.value_at(xi));
        weights.push(penalty * hx);
    }
    Assembly {
        a: CsrMatrix::from_rows(2 * (n + 1) * m, &rows),
        b,
        weights,
        interior_rows,
    }
}

/// Least-squares strong solution of `Lw = (f, 0)` with `σw₁ + τw₂ = g` at `η = R`.
pub fn solve_strong(
    sys: &FirstOrderSystem,
    choice: &MultiplierChoice,
    bc: &BoundaryPair,
    rhs: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: &StrongOptions,
) -> Result<DiscreteSolution, FriedrichsError> {
    solve_strong_from(sys, choice, bc, rhs, opts, None)
}

/// As [`solve_strong`], starting the iterative method from `guess`.
pub fn solve_strong_from(
    sys: &FirstOrderSystem,
    choice: &MultiplierChoice,
    bc: &BoundaryPair,
    rhs: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: &StrongOptions,
    guess: Option<&[f64]>,
) -> Result<DiscreteSolution, FriedrichsError> {
    let n = opts.resolution;
    if n < 8 {
        return Err(FriedrichsError::InvalidArgument(format!(
            "resolution {n} is below 8"
        )));
    }
    if !(opts.penalty > 0.0) {
        return Err(FriedrichsError::InvalidArgument(
            "penalty must be positive".into(),
        ));
    }
    let report = boundary_admissibility(sys, bc, choice.a, choice.c)?;
    if report.verdict != Verdict::Admissible {
        return Err(FriedrichsError::Precondition(format!(
            "κ* is not positive definite (min eigenvalue {})",
            report.kappa.min_eig
        )));
    }
    let asm = assemble(sys, choice, bc, rhs, n, opts.penalty);
    let unknowns = asm.a.ncols();
    if let Some(g) = guess {
        if g.len() != unknowns {
            return Err(FriedrichsError::InvalidArgument(format!(
                "initial guess has {} entries, expected {unknowns}",
                g.len()
            )));
        }
    }
    let x = match opts.method {
        LsqMethod::Direct => {
            let normal = SymBand::normal_matrix(&asm.a, Some(&asm.weights));
            let chol = normal.cholesky(opts.pivot_tol)?;
            let wb: Vec<f64> = asm.b.iter().zip(&asm.weights).map(|(b, w)| b * w).collect();
            chol.solve(&asm.a.mul_transpose_vec(&wb))
        }
        LsqMethod::Cgls => {
            // Scale rows by √weight so plain CGLS minimises the weighted norm.
            let scales: Vec<f64> = asm.weights.iter().map(|w| w.sqrt()).collect();
            let rows: Vec<Vec<(usize, f64)>> = (0..asm.a.nrows())
                .map(|r| asm.a.row(r).map(|(c, v)| (c, v * scales[r])).collect())
                .collect();
            let scaled = CsrMatrix::from_rows(unknowns, &rows);
            let sb: Vec<f64> = asm.b.iter().zip(&scales).map(|(b, s)| b * s).collect();
            cgls(&scaled, &sb, guess, opts.cgls_tol, opts.max_iter)?
        }
    };

    let ax = asm.a.mul_vec(&x);
    let interior_residual = (0..asm.interior_rows)
        .map(|r| asm.weights[r] * (ax[r] - asm.b[r]).powi(2))
        .sum::<f64>()
        .sqrt();
    let boundary_defect = (asm.interior_rows..ax.len())
        .map(|r| (ax[r] - asm.b[r]).abs())
        .fold(0.0, f64::max);
    let m = n;
    let (he, hx) = (sys.radius() / n as f64, TAU / m as f64);
    let mut values = vec![0.0; x.len()];
    // Solver order is (i, j, comp); GridField order is (j, i, comp).
    for i in 0..=n {
        for j in 0..m {
            for c in 0..2 {
                values[(j * (n + 1) + i) * 2 + c] = x[(i * m + j) * 2 + c];
            }
        }
    }
    let w = GridField::new(Chart::Polar, [0.0, 0.0], [he, hx], [n + 1, m], 2, values)
        .map_err(|e| FriedrichsError::InvalidArgument(e.to_string()))?;
    Ok(DiscreteSolution {
        w,
        interior_residual,
        boundary_defect,
        h: he.max(hx),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_system, TypeChangeFn};
    use super::*;

    fn preset() -> (FirstOrderSystem, MultiplierChoice) {
        let s = build_system(&TypeChangeFn::keldysh_linear(0.5, 1.0).unwrap(), 1.0).unwrap();
        let ch = MultiplierChoice {
            a: 1.0,
            c: 1.0,
            interval: (0.5, 2f64.sqrt()),
        };
        (s, ch)
    }

    fn exact(eta: f64, xi: f64) -> [f64; 2] {
        [eta * xi.sin(), 0.5 * eta * eta * xi.cos()]
    }

    fn manufactured(s: &FirstOrderSystem) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
        move |eta, xi| {
            manufactured_rhs(
                s,
                &[ManufacturedSample {
                    eta,
                    u_eta: eta * xi.sin(),
                    u_eta_eta: xi.sin(),
                    u_xi: 0.5 * eta * eta * xi.cos(),
                    u_xi_xi: -0.5 * eta * eta * xi.sin(),
                }],
            )[0]
        }
    }

    fn bc() -> BoundaryPair {
        // σ = 1, τ = −1 with g = w₁ − w₂ of the exact solution at η = 1.
        BoundaryPair::constant(1.0, -1.0).with_value(|xi| xi.sin() - 0.5 * xi.cos())
    }

    #[test]
    fn rhs_examples() {
        let (s, _) = preset();
        let zero = ManufacturedSample {
            eta: 0.3,
            u_eta: 0.0,
            u_eta_eta: 0.0,
            u_xi: 0.0,
            u_xi_xi: 0.0,
        };
        assert_eq!(manufactured_rhs(&s, &[zero]), vec![0.0]);
        let lin = ManufacturedSample { u_eta: 1.0, ..zero };
        assert_eq!(manufactured_rhs(&s, &[lin]), vec![1.0]);
        let xi = 0.7f64;
        let sin = ManufacturedSample {
            u_xi: xi.cos(),
            u_xi_xi: -xi.sin(),
            ..zero
        };
        assert!((manufactured_rhs(&s, &[sin])[0] - (xi.cos() - xi.sin())).abs() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero() {
        let (s, ch) = preset();
        let sol = solve_strong(
            &s,
            &ch,
            &BoundaryPair::constant(1.0, -1.0),
            &|_, _| 0.0,
            &StrongOptions {
                resolution: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sol.w.max_abs(0) < 1e-12 && sol.w.max_abs(1) < 1e-12);
    }

    #[test]
    fn manufactured_solution_converges() {
        let (s, ch) = preset();
        let f = manufactured(&s);
        let run = |n| {
            solve_strong(
                &s,
                &ch,
                &bc(),
                &f,
                &StrongOptions {
                    resolution: n,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let (a, b) = (run(16), run(32));
        let (ea, eb) = (a.l2_error(exact), b.l2_error(exact));
        assert!(ea / eb >= 1.7, "{ea} {eb}");
        assert!(b.boundary_defect < 10.0 * b.h);
        assert!(b.interior_residual < a.interior_residual);
        assert!(b.boundary_defect < a.boundary_defect);
    }

    #[test]
    fn cgls_agrees_from_different_starts() {
        let (s, ch) = preset();
        let f = manufactured(&s);
        let opts = StrongOptions {
            resolution: 8,
            method: LsqMethod::Cgls,
            ..Default::default()
        };
        let a = solve_strong(&s, &ch, &bc(), &f, &opts).unwrap();
        let guess: Vec<f64> = (0..2 * 9 * 8)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3)
            .collect();
        let b = solve_strong_from(&s, &ch, &bc(), &f, &opts, Some(&guess)).unwrap();
        let direct = solve_strong(
            &s,
            &ch,
            &bc(),
            &f,
            &StrongOptions {
                resolution: 8,
                ..Default::default()
            },
        )
        .unwrap();
        let diff = |x: &DiscreteSolution, y: &DiscreteSolution| {
            x.w.values()
                .iter()
                .zip(y.w.values())
                .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
        };
        assert!(diff(&a, &b) < 1e-7, "{}", diff(&a, &b));
        assert!(diff(&a, &direct) < 1e-7, "{}", diff(&a, &direct));
    }

    #[test]
    fn rejects_non_positive_choice() {
        let (s, _) = preset();
        let ch = MultiplierChoice {
            a: 1.0,
            c: 0.5,
            interval: (0.5, 2f64.sqrt()),
        };
        assert!(solve_strong(
            &s,
            &ch,
            &BoundaryPair::constant(1.0, -1.0),
            &|_, _| 0.0,
            &StrongOptions::default()
        )
        .is_err());
    }
}

//! Symmetric positive first-order systems for the Keldysh-type equation
//! `[K(η)u_η]_η + u_ξξ + k·u_ξ = f` on the disc `0 ≤ η ≤ R`, `ξ` periodic.
//!
//! With `w = (u_η, u_ξ)` the equation becomes `A¹w_η + A²w_ξ + Bw = (f, 0)`
//! where `A¹ = diag(K, −1)`, `A²` swaps components and `B = [[K′, k], [0, 0]]`.
//! Multiplying by `E = [[a, −cK], [c, a]]` makes the system symmetric positive
//! when `c` is in a window fixed by `K(0)`, `K′` and the boundary condition
//! `σ(ξ)w₁ + τ(ξ)w₂ = 0` at `η = R`. This module checks every hypothesis of
//! that construction numerically and solves the resulting problem by least
//! squares.

mod strong;

pub use strong::{
    manufactured_rhs, solve_strong, solve_strong_from, DiscreteSolution, LsqMethod,
    ManufacturedSample, StrongOptions,
};

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    mat2_det, mat2_mul, mat2_scale, mat2_singular_values, mat2_sub, mat2_sym, mat2_transpose,
    sym2_eigenvalues, LinalgError, Mat2,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FriedrichsError {
    #[error("invalid type-change function: {0}")]
    InvalidTypeChange(String),
    #[error("the lower-order coefficient k must be nonzero")]
    ZeroCoupling,
    #[error("multiplier is singular: det E = {det} at η = {eta}")]
    SingularMultiplier { eta: f64, det: f64 },
    #[error("boundary decomposition fails check `{check}`: {detail}")]
    InadmissibleBoundary { check: &'static str, detail: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible multiplier; binding constraints: {}", constraints.join(", "))]
    Infeasible { constraints: Vec<String> },
    #[error("least-squares solve broke down: {0}")]
    SolverBreakdown(#[from] LinalgError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Number of intervals of the sampling grid for positivity checks; each check
/// also runs on a grid four times finer.
pub const DEFAULT_SAMPLES: usize = 64;
/// Eigenvalues of `μ*` down to `−EIG_TOL` count as non-negative.
pub const EIG_TOL: f64 = 1e-12;

/// A polynomial type-change coefficient `K(η) = Σ cᵢηⁱ` on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeChangeFn {
    /// Coefficients in increasing degree.
    pub coeffs: Vec<f64>,
    pub radius: f64,
}

impl TypeChangeFn {
    pub fn polynomial(coeffs: Vec<f64>, radius: f64) -> Result<Self, FriedrichsError> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(FriedrichsError::InvalidArgument(
                "polynomial needs finite coefficients".into(),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FriedrichsError::InvalidArgument(format!(
                "radius {radius} must be positive"
            )));
        }
        Ok(Self { coeffs, radius })
    }

    /// `K(η) = η − η_crit`.
    pub fn keldysh_linear(eta_crit: f64, radius: f64) -> Result<Self, FriedrichsError> {
        Self::polynomial(vec![-eta_crit, 1.0], radius)
    }

    pub fn k(&self, eta: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * eta + c)
    }

    pub fn dk(&self, eta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * eta + i as f64 * c)
    }

    /// `n` intervals refined four times: `4n + 1` equally spaced points of `[0, R]`.
    pub fn audit_grid(&self, n: usize) -> Vec<f64> {
        let m = 4 * n.max(1);
        (0..=m).map(|i| self.radius * i as f64 / m as f64).collect()
    }

    /// Checks `K′ > 0`, `K(0) < 0 < K(R)` on the audit grid and returns
    /// `(ν₀, η_crit)`, the sampled minimum of `K′` and the sign change of `K`.
    pub fn validate(&self, n: usize) -> Result<(f64, f64), FriedrichsError> {
        let etas = self.audit_grid(n);
        let (mut nu0, mut at) = (f64::INFINITY, 0.0);
        for &e in &etas {
            let d = self.dk(e);
            if d < nu0 {
                nu0 = d;
                at = e;
            }
        }
        if !(nu0 > 0.0) {
            return Err(FriedrichsError::InvalidTypeChange(format!(
                "K′({at}) = {nu0} is not bounded below by a positive constant"
            )));
        }
        let (k0, kr) = (self.k(0.0), self.k(self.radius));
        if !(k0 < 0.0 && kr > 0.0) {
            return Err(FriedrichsError::InvalidTypeChange(format!(
                "K must change sign on [0, R]: K(0) = {k0}, K(R) = {kr}"
            )));
        }
        // K is increasing, so bisection on its sign is safe.
        let (mut lo, mut hi) = (0.0, self.radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.k(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * self.radius {
                break;
            }
        }
        Ok((nu0, 0.5 * (lo + hi)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderSystem {
    pub type_change: TypeChangeFn,
    /// Lower-order coefficient `k`.
    pub k: f64,
    pub nu0: f64,
    pub eta_crit: f64,
}

impl FirstOrderSystem {
    pub fn a1(&self, eta: f64) -> Mat2 {
        [[self.type_change.k(eta), 0.0], [0.0, -1.0]]
    }

    pub fn a2(&self) -> Mat2 {
        [[0.0, 1.0], [1.0, 0.0]]
    }

    pub fn b(&self, eta: f64) -> Mat2 {
        [[self.type_change.dk(eta), self.k], [0.0, 0.0]]
    }

    pub fn radius(&self) -> f64 {
        self.type_change.radius
    }
}

pub fn build_system(
    type_change: &TypeChangeFn,
    k: f64,
) -> Result<FirstOrderSystem, FriedrichsError> {
    if k == 0.0 || !k.is_finite() {
        return Err(FriedrichsError::ZeroCoupling);
    }
    let (nu0, eta_crit) = type_change.validate(DEFAULT_SAMPLES)?;
    Ok(FirstOrderSystem {
        type_change: type_change.clone(),
        k,
        nu0,
        eta_crit,
    })
}

/// `E(η) = [[a, −cK], [c, a]]`.
pub fn multiplier(sys: &FirstOrderSystem, a: f64, c: f64, eta: f64) -> Mat2 {
    [[a, -c * sys.type_change.k(eta)], [c, a]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipliedSystem {
    pub a: f64,
    pub c: f64,
    /// `(η, det E(η))` on the audit grid.
    pub det_profile: Vec<(f64, f64)>,
    /// Largest `|M − Mᵀ|` entry over `EA¹` and `EA²` on the audit grid.
    pub asymmetry: f64,
}

impl MultipliedSystem {
    pub fn min_det(&self) -> f64 {
        self.det_profile
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
    }
}

fn asymmetry(m: &Mat2) -> f64 {
    (m[0][1] - m[1][0]).abs()
}

pub fn apply_multiplier(
    sys: &FirstOrderSystem,
    a: f64,
    c: f64,
) -> Result<MultipliedSystem, FriedrichsError> {
    if !(a > 0.0) {
        return Err(FriedrichsError::InvalidArgument(format!(
            "a = {a} must be positive"
        )));
    }
    let etas = sys.type_change.audit_grid(DEFAULT_SAMPLES);
    let mut det_profile = Vec::with_capacity(etas.len());
    let mut asym = 0.0f64;
    for &eta in &etas {
        let e = multiplier(sys, a, c, eta);
        det_profile.push((eta, mat2_det(&e)));
        asym = asym
            .max(asymmetry(&mat2_mul(&e, &sys.a1(eta))))
            .max(asymmetry(&mat2_mul(&e, &sys.a2())));
    }
    let out = MultipliedSystem {
        a,
        c,
        det_profile,
        asymmetry: asym,
    };
    if let Some(&(eta, det)) = out.det_profile.iter().find(|p| !(p.1 > 0.0)) {
        return Err(FriedrichsError::SingularMultiplier { eta, det });
    }
    Ok(out)
}

/// `κ = EB − ½(EA¹)_η`, the `ξ`-derivative term being zero since `A²` and `E`
/// do not depend on `ξ`.
pub fn kappa(sys: &FirstOrderSystem, a: f64, c: f64, eta: f64) -> Mat2 {
    let e = multiplier(sys, a, c, eta);
    // (EA¹)_η = E_η A¹ + E A¹_η with E_η = [[0, −cK′], [0, 0]], A¹_η = diag(K′, 0).
    let dk = sys.type_change.dk(eta);
    let e_eta = [[0.0, -c * dk], [0.0, 0.0]];
    let a1_eta = [[dk, 0.0], [0.0, 0.0]];
    let d = crate::linalg::mat2_add(&mat2_mul(&e_eta, &sys.a1(eta)), &mat2_mul(&e, &a1_eta));
    mat2_sub(&mat2_mul(&e, &sys.b(eta)), &mat2_scale(&d, 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSample {
    pub eta: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// `(ak/2)(cK′ − ak/2)`.
    pub delta: f64,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub samples: Vec<KappaSample>,
    pub min_eig: f64,
    pub max_eig: f64,
    /// Largest `|det κ* − Δ|` relative to `max(1, |Δ|)`.
    pub delta_defect: f64,
    pub positive_definite: bool,
}

/// Symmetric part `κ*` of `κ` sampled over the audit grid.
pub fn kappa_star(sys: &FirstOrderSystem, a: f64, c: f64) -> KappaReport {
    let etas = sys.type_change.audit_grid(DEFAULT_SAMPLES);
    let samples: Vec<KappaSample> = etas
        .par_iter()
        .map(|&eta| {
            let ks = mat2_sym(&kappa(sys, a, c, eta));
            let (min_eig, max_eig) = sym2_eigenvalues(&ks);
            let ak2 = 0.5 * a * sys.k;
            KappaSample {
                eta,
                min_eig,
                max_eig,
                delta: ak2 * (c * sys.type_change.dk(eta) - ak2),
                det: mat2_det(&ks),
            }
        })
        .collect();
    let min_eig = samples
        .iter()
        .map(|s| s.min_eig)
        .fold(f64::INFINITY, f64::min);
    let max_eig = samples
        .iter()
        .map(|s| s.max_eig)
        .fold(f64::NEG_INFINITY, f64::max);
    let delta_defect = samples
        .iter()
        .map(|s| (s.det - s.delta).abs() / s.delta.abs().max(1.0))
        .fold(0.0, f64::max);
    KappaReport {
        samples,
        min_eig,
        max_eig,
        delta_defect,
        positive_definite: min_eig > 0.0,
    }
}

type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary condition `σ(ξ)w₁ + τ(ξ)w₂ = g(ξ)` at `η = R`; `g` is zero for the
/// homogeneous problem.
#[derive(Clone)]
pub struct BoundaryPair {
    pub sigma: Coef,
    pub tau: Coef,
    pub value: Option<Coef>,
    /// Points of `[0, 2π)` at which `σ`, `τ` are checked.
    pub samples: usize,
}

impl fmt::Debug for BoundaryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryPair")
            .field("sigma(0)", &(self.sigma)(0.0))
            .field("tau(0)", &(self.tau)(0.0))
            .field("inhomogeneous", &self.value.is_some())
            .finish()
    }
}

impl BoundaryPair {
    pub fn constant(sigma: f64, tau: f64) -> Self {
        Self::new(move |_| sigma, move |_| tau)
    }

    pub fn new(
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tau: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sigma: Arc::new(sigma),
            tau: Arc::new(tau),
            value: None,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn with_value(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.value = Some(Arc::new(g));
        self
    }

    pub fn value_at(&self, xi: f64) -> f64 {
        self.value.as_ref().map_or(0.0, |g| g(xi))
    }

    fn xi_samples(&self) -> Vec<f64> {
        let n = self.samples.max(1);
        (0..n)
            .map(|j| std::f64::consts::TAU * j as f64 / n as f64)
            .collect()
    }
}

/// `β = [[a, c], [c, −a/K(R)]]` with the normal `n = K⁻¹ dη`.
pub fn beta(a: f64, c: f64, k_at_r: f64) -> Mat2 {
    [[a, c], [c, -a / k_at_r]]
}

/// `β₋ = v ⊗ (σ, τ) / (σ² + τ²)` with `v = (σa + τc, σc − τa/K(R))`, so that
/// `β₋w` is a multiple of `σw₁ + τw₂`.
pub fn beta_minus(sigma: f64, tau: f64, a: f64, c: f64, k_at_r: f64) -> Mat2 {
    let s = sigma * sigma + tau * tau;
    let v = [sigma * a + tau * c, sigma * c - tau * a / k_at_r];
    [
        [v[0] * sigma / s, v[0] * tau / s],
        [v[1] * sigma / s, v[1] * tau / s],
    ]
}

/// Closed form of `μ*` in terms of `σ, τ, a, c, K(R)`; used as a cross-check.
pub fn mu_star_closed_form(sigma: f64, tau: f64, a: f64, c: f64, k_at_r: f64) -> Mat2 {
    let s = sigma * sigma + tau * tau;
    let (st, d) = (sigma * tau, tau * tau - sigma * sigma);
    let kinv = 1.0 / k_at_r;
    let off = st * a * (kinv - 1.0) / s;
    [
        [(d * a - 2.0 * st * c) / s, off],
        [off, (d * a * kinv - 2.0 * st * c) / s],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub xi: f64,
    pub mu_min_eig: f64,
    pub mu_max_eig: f64,
    /// `|det(r₊, r₋)|` for unit range vectors; zero when the ranges overlap.
    pub range_separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Admissible,
    /// The boundary decomposition is fine but `κ*` is not positive definite.
    NotPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub a: f64,
    pub c: f64,
    pub det_e_min: f64,
    pub kappa: KappaReport,
    pub boundary: Vec<BoundarySample>,
    pub mu_min_eig: f64,
    pub mu_max_eig: f64,
    /// Largest deviation of the computed `μ*` from its closed form.
    pub mu_closed_form_defect: f64,
    pub ranges_trivial: bool,
    pub null_spaces_span: bool,
    pub verdict: Verdict,
}

/// Range and null space of a 2×2 matrix of rank one, as unit vectors.
fn rank_one_parts(m: &Mat2) -> Option<([f64; 2], [f64; 2])> {
    let (lo, hi) = mat2_singular_values(m);
    if hi == 0.0 || lo > 1e-10 * hi {
        return None;
    }
    let unit = |v: [f64; 2]| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    let col = if m[0][0].hypot(m[1][0]) >= m[0][1].hypot(m[1][1]) {
        [m[0][0], m[1][0]]
    } else {
        [m[0][1], m[1][1]]
    };
    let row = if m[0][0].hypot(m[0][1]) >= m[1][0].hypot(m[1][1]) {
        m[0]
    } else {
        m[1]
    };
    Some((unit(col), unit([-row[1], row[0]])))
}

fn cross(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Checks the boundary decomposition at `η = R` for every sampled `ξ`.
/// Errors name the first failed check; `κ*` positivity only sets the verdict.
pub fn boundary_admissibility(
    sys: &FirstOrderSystem,
    bc: &BoundaryPair,
    a: f64,
    c: f64,
) -> Result<AdmissibilityReport, FriedrichsError> {
    let det_e_min = apply_multiplier(sys, a, c)?.min_det();
    let kr = sys.type_change.k(sys.radius());
    let xis = bc.xi_samples();
    for &xi in &xis {
        let st = (bc.sigma)(xi) * (bc.tau)(xi);
        if !(st * sys.k < 0.0) {
            return Err(FriedrichsError::Precondition(format!(
                "σ(ξ)τ(ξ) = {st} at ξ = {xi} must be nonzero with sign opposite to k = {}",
                sys.k
            )));
        }
    }
    let b = beta(a, c, kr);
    let mut boundary = Vec::with_capacity(xis.len());
    let (mut cf_defect, mut ranges_trivial, mut spans) = (0.0f64, true, true);
    for &xi in &xis {
        let (s, t) = ((bc.sigma)(xi), (bc.tau)(xi));
        let bm = beta_minus(s, t, a, c, kr);
        let bp = mat2_sub(&b, &bm);
        let mu = mat2_sub(&bp, &bm);
        let mu_star = mat2_sym(&mu);
        let closed = mu_star_closed_form(s, t, a, c, kr);
        cf_defect = cf_defect.max(crate::linalg::mat2_norm(&mat2_sub(&mu_star, &closed)));
        let (lo, hi) = sym2_eigenvalues(&mu_star);
        let mut separation = 0.0;
        match (rank_one_parts(&bm), rank_one_parts(&bp)) {
            (Some((rm, nm)), Some((rp, np))) => {
                separation = cross(rm, rp).abs();
                ranges_trivial &= separation > 1e-10;
                spans &= cross(nm, np).abs() > 1e-10;
            }
            _ => {
                ranges_trivial = false;
                spans = false;
            }
        }
        boundary.push(BoundarySample {
            xi,
            mu_min_eig: lo,
            mu_max_eig: hi,
            range_separation: separation,
        });
    }
    let mu_min_eig = boundary
        .iter()
        .map(|s| s.mu_min_eig)
        .fold(f64::INFINITY, f64::min);
    let mu_max_eig = boundary
        .iter()
        .map(|s| s.mu_max_eig)
        .fold(f64::NEG_INFINITY, f64::max);
    if mu_min_eig < -EIG_TOL {
        return Err(FriedrichsError::InadmissibleBoundary {
            check: "mu_nonnegative",
            detail: format!("min eigenvalue of μ* is {mu_min_eig}"),
        });
    }
    if !ranges_trivial {
        return Err(FriedrichsError::InadmissibleBoundary {
            check: "ranges_trivial",
            detail: "ranges of β₊ and β₋ intersect".into(),
        });
    }
    if !spans {
        return Err(FriedrichsError::InadmissibleBoundary {
            check: "null_spaces_span",
            detail: "null spaces of β₊ and β₋ do not span".into(),
        });
    }
    let kappa = kappa_star(sys, a, c);
    let verdict = if kappa.positive_definite {
        Verdict::Admissible
    } else {
        Verdict::NotPositive
    };
    Ok(AdmissibilityReport {
        a,
        c,
        det_e_min,
        kappa,
        boundary,
        mu_min_eig,
        mu_max_eig,
        mu_closed_form_defect: cf_defect,
        ranges_trivial,
        null_spaces_span: spans,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierChoice {
    pub a: f64,
    pub c: f64,
    /// Open interval of feasible `c`.
    pub interval: (f64, f64),
}

/// Feasibility of `|c|` given the sign; `(det E > 0, κ* ≻ 0, μ* ⪰ 0)`.
fn constraints(sys: &FirstOrderSystem, bc: &BoundaryPair, c: f64) -> (bool, bool, bool) {
    let det_ok = sys
        .type_change
        .audit_grid(DEFAULT_SAMPLES)
        .iter()
        .all(|&e| 1.0 + c * c * sys.type_change.k(e) > 0.0);
    let kappa_ok = kappa_star(sys, 1.0, c).positive_definite;
    let kr = sys.type_change.k(sys.radius());
    let b = beta(1.0, c, kr);
    let mu_ok = bc.xi_samples().iter().all(|&xi| {
        let bm = beta_minus((bc.sigma)(xi), (bc.tau)(xi), 1.0, c, kr);
        let mu = mat2_sub(&mat2_sub(&b, &bm), &bm);
        sym2_eigenvalues(&mat2_sym(&mu)).0 >= -EIG_TOL
    });
    (det_ok, kappa_ok, mu_ok)
}

/// Finds the feasible window of `c` (with `a = 1`) by bisection on `|c|`:
/// `det E > 0` bounds it above, `κ* ≻ 0` and `μ* ⪰ 0` below. Returns the
/// midpoint.
pub fn choose_parameters(
    sys: &FirstOrderSystem,
    bc: &BoundaryPair,
) -> Result<MultiplierChoice, FriedrichsError> {
    for xi in bc.xi_samples() {
        let st = (bc.sigma)(xi) * (bc.tau)(xi);
        if !(st * sys.k < 0.0) {
            return Err(FriedrichsError::Precondition(format!(
                "σ(ξ)τ(ξ) = {st} at ξ = {xi} must have sign opposite to k = {}",
                sys.k
            )));
        }
    }
    let sign = sys.k.signum();
    let det_ok = |m: f64| constraints(sys, bc, sign * m).0;
    let low_ok = |m: f64| {
        let (_, k, mu) = constraints(sys, bc, sign * m);
        k && mu
    };
    // Upper end: det E fails once c²|min K| ≥ 1.
    let mut hi = 1.0;
    while det_ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if det_ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let upper = lo;
    let top = upper * (1.0 - 1e-9);
    if !low_ok(top) {
        let (d, k, mu) = constraints(sys, bc, sign * top);
        let mut names = vec!["det_e_positive (upper bound on |c|)".to_string()];
        if !d {
            names.clear();
            names.push("det_e_positive".into());
        }
        if !k {
            names.push("kappa_positive_definite (lower bound on |c|)".into());
        }
        if !mu {
            names.push("mu_nonnegative (lower bound on |c|)".into());
        }
        return Err(FriedrichsError::Infeasible { constraints: names });
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if low_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lower = hi;
    let mid = 0.5 * (lower + upper);
    let interval = if sign > 0.0 {
        (lower, upper)
    } else {
        (-upper, -lower)
    };
    Ok(MultiplierChoice {
        a: 1.0,
        c: sign * mid,
        interval,
    })
}

/// `E·M` for the coefficient matrices, mainly for inspection and tests.
pub fn multiplied_coefficients(sys: &FirstOrderSystem, a: f64, c: f64, eta: f64) -> [Mat2; 3] {
    let e = multiplier(sys, a, c, eta);
    [
        mat2_mul(&e, &sys.a1(eta)),
        mat2_mul(&e, &sys.a2()),
        mat2_mul(&e, &sys.b(eta)),
    ]
}

/// `true` if `M = Mᵀ` entrywise to `tol`.
pub fn is_symmetric(m: &Mat2, tol: f64) -> bool {
    crate::linalg::mat2_norm(&mat2_sub(m, &mat2_transpose(m))) <= tol
}

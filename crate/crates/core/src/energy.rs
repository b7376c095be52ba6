//! Energies `∫_{B_r} e(Q)` of fields on `ℝⁿ`, the conformally weighted profile
//! `r^{4−n} E(B_r)`, power-law growth fits and the Liouville hypothesis check.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surfaces::{Density, SonicLocus, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("Q = {q} at |x| = {radius} is outside the density's domain")]
    DensityDomain { q: f64, radius: f64 },
    #[error("sampler returned Q = {q} < 0 at |x| = {radius}")]
    NegativeQ { q: f64, radius: f64 },
    #[error(
        "conformal energy decreases between r = {r1} and r = {r2} for a field declared stationary"
    )]
    MonotonicityViolated { r1: f64, r2: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

type QFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `Q = |F|²` as a function on `ℝⁿ`.
#[derive(Clone)]
pub struct FieldSampler {
    pub dim: usize,
    pub q: QFn,
    /// Caller's assertion that the field is stationary under radial variations.
    pub stationary: bool,
}

impl fmt::Debug for FieldSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSampler")
            .field("dim", &self.dim)
            .field("stationary", &self.stationary)
            .finish_non_exhaustive()
    }
}

impl FieldSampler {
    pub fn new(dim: usize, q: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            q: Arc::new(q),
            stationary: false,
        }
    }

    pub fn constant(dim: usize, q0: f64) -> Self {
        Self::new(dim, move |_| q0)
    }

    /// `Q(x) = exp(−|x|²)`.
    pub fn gaussian(dim: usize) -> Self {
        Self::new(dim, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
    }

    pub fn declared_stationary(mut self) -> Self {
        self.stationary = true;
        self
    }
}

/// Node counts of the ball rule: midpoint nodes with cell weights integrated
/// exactly against the radial `sⁿ⁻¹` and angular `sinᵖφ` factors, so constant
/// integrands are reproduced to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallQuadrature {
    pub radial: usize,
    /// Cells per polar angle on `[0, π]`; the azimuth gets twice as many.
    pub angular: usize,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        Self {
            radial: 32,
            angular: 8,
        }
    }
}

/// `∫_a^b sinᵖ φ dφ` by the reduction formula.
fn sin_power_integral(p: usize, a: f64, b: f64) -> f64 {
    match p {
        0 => b - a,
        1 => a.cos() - b.cos(),
        _ => {
            let pf = p as f64;
            let edge = |x: f64| -x.sin().powi(p as i32 - 1) * x.cos() / pf;
            edge(b) - edge(a) + (pf - 1.0) / pf * sin_power_integral(p - 2, a, b)
        }
    }
}

/// Unit directions and weights of the product rule on `Sⁿ⁻¹`.
fn sphere_rule(n: usize, angular: usize) -> Vec<(Vec<f64>, f64)> {
    if n == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    // One factor per polar angle φ₁..φ_{n−2} (weight sin^{n−1−i}), then the azimuth.
    let polar: Vec<Vec<(f64, f64)>> = (0..n - 2)
        .map(|i| {
            let p = n - 2 - i;
            let h = PI / angular as f64;
            (0..angular)
                .map(|c| {
                    let (a, b) = (c as f64 * h, (c + 1) as f64 * h);
                    (0.5 * (a + b), sin_power_integral(p, a, b))
                })
                .collect()
        })
        .collect();
    let na = 2 * angular;
    let ha = 2.0 * PI / na as f64;
    let azimuth: Vec<(f64, f64)> = (0..na).map(|c| ((c as f64 + 0.5) * ha, ha)).collect();

    let mut out = Vec::new();
    let mut idx = vec![0usize; n - 2];
    loop {
        let mut w = 1.0;
        let mut dir = Vec::with_capacity(n);
        let mut sin_prod = 1.0;
        for (f, &k) in polar.iter().zip(&idx) {
            let (phi, wt) = f[k];
            dir.push(sin_prod * phi.cos());
            sin_prod *= phi.sin();
            w *= wt;
        }
        for &(phi, wt) in &azimuth {
            let mut d = dir.clone();
            d.push(sin_prod * phi.cos());
            d.push(sin_prod * phi.sin());
            out.push((d, w * wt));
        }
        // Odometer over the polar angles.
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < angular {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Volume of the unit ball in `ℝⁿ`, `πⁿ/²/Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

fn energy_density(dens: &Density, q: f64, radius: f64) -> Result<f64, EnergyError> {
    if q < 0.0 || q.is_nan() {
        return Err(EnergyError::NegativeQ { q, radius });
    }
    dens.primitive(q).map_err(|e| match e {
        SurfaceError::InvalidArgument(s) => EnergyError::InvalidArgument(s),
        _ => EnergyError::DensityDomain { q, radius },
    })
}

/// Energies and the largest sampled `Q` for nested balls at once; each shell
/// is integrated once and accumulated.
fn shell_energies(
    sampler: &FieldSampler,
    dens: &Density,
    radii: &[f64],
    quad: &BallQuadrature,
) -> Result<(Vec<f64>, f64), EnergyError> {
    let n = sampler.dim;
    if n == 0 {
        return Err(EnergyError::InvalidArgument(
            "dimension must be positive".into(),
        ));
    }
    if quad.radial == 0 || quad.angular == 0 {
        return Err(EnergyError::InvalidArgument(
            "quadrature needs nodes".into(),
        ));
    }
    let sphere = sphere_rule(n, quad.angular);
    let nf = n as f64;
    // Shells of every ball: (ball index, inner, outer).
    let mut shells = Vec::new();
    for (b, &r) in radii.iter().enumerate() {
        let h = r / quad.radial as f64;
        for s in 0..quad.radial {
            shells.push((b, s as f64 * h, (s + 1) as f64 * h));
        }
    }
    let parts: Vec<(usize, f64, f64)> = shells
        .par_iter()
        .map(|&(b, a, c)| {
            let mid = 0.5 * (a + c);
            let radial_w = (c.powf(nf) - a.powf(nf)) / nf;
            let mut sum = 0.0;
            let mut qmax = 0.0f64;
            let mut x = vec![0.0; n];
            for (dir, w) in &sphere {
                for (xi, d) in x.iter_mut().zip(dir) {
                    *xi = mid * d;
                }
                let q = (sampler.q)(&x);
                qmax = qmax.max(q);
                sum += w * energy_density(dens, q, mid)?;
            }
            Ok((b, sum * radial_w, qmax))
        })
        .collect::<Result<_, EnergyError>>()?;
    let mut out = vec![0.0; radii.len()];
    let mut qmax = 0.0f64;
    for (b, e, q) in parts {
        out[b] += e;
        qmax = qmax.max(q);
    }
    Ok((out, qmax))
}

/// `∫_{B_r} e(Q)` by the deterministic radial-spherical product rule.
pub fn ball_energy(
    sampler: &FieldSampler,
    dens: &Density,
    r: f64,
    quad: &BallQuadrature,
) -> Result<f64, EnergyError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(EnergyError::InvalidArgument(format!(
            "radius {r} must be positive"
        )));
    }
    Ok(shell_energies(sampler, dens, &[r], quad)?.0[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEnergyProfile {
    pub n: usize,
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    /// `r^{4−n} E(B_r)`.
    pub conformal: Vec<f64>,
    /// Sonic or singular value of `Q` for the density, if it has one.
    pub q_crit: Option<f64>,
    pub q_max_sampled: f64,
    pub energy_nondecreasing: bool,
    pub conformal_nondecreasing: bool,
    /// Whether the monotonicity of `conformal` was enforced.
    pub asserted: bool,
}

impl RadialEnergyProfile {
    /// CSV rows `r,E,conformal`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.radii.len()).map(move |i| (self.radii[i], self.energies[i], self.conformal[i]))
    }
}

fn nondecreasing(v: &[f64]) -> Option<usize> {
    v.windows(2).position(|w| w[1] < w[0])
}

/// Energies over nested balls. The conformal column must be nondecreasing
/// when the sampler is declared stationary; otherwise its monotonicity is
/// only reported.
pub fn conformal_profile(
    sampler: &FieldSampler,
    dens: &Density,
    radii: &[f64],
    quad: &BallQuadrature,
) -> Result<RadialEnergyProfile, EnergyError> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(EnergyError::InvalidArgument(
            "radii must be positive".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EnergyError::InvalidArgument(
            "radii must be increasing".into(),
        ));
    }
    let (energies, q_max_sampled) = shell_energies(sampler, dens, radii, quad)?;
    let n = sampler.dim;
    let conformal: Vec<f64> = radii
        .iter()
        .zip(&energies)
        .map(|(r, e)| r.powi(4 - n as i32) * e)
        .collect();
    let bad = nondecreasing(&conformal);
    if sampler.stationary {
        if let Some(i) = bad {
            return Err(EnergyError::MonotonicityViolated {
                r1: radii[i],
                r2: radii[i + 1],
            });
        }
    }
    let q_crit = match dens.sonic_q() {
        SonicLocus::None => None,
        SonicLocus::Root(q) | SonicLocus::SingularTransition(q) => Some(q),
    };
    Ok(RadialEnergyProfile {
        n,
        radii: radii.to_vec(),
        energy_nondecreasing: nondecreasing(&energies).is_none(),
        energies,
        conformal,
        q_crit,
        q_max_sampled,
        conformal_nondecreasing: bad.is_none(),
        asserted: sampler.stationary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFit {
    /// `E ≈ C r^k` by least squares in log–log; `residual` is the RMS of the
    /// log misfit.
    PowerLaw { c: f64, k: f64, residual: f64 },
    /// Every energy is zero: any growth bound holds.
    Vanishing,
}

impl GrowthFit {
    /// The exponent, `−∞` for a vanishing field.
    pub fn exponent(&self) -> f64 {
        match self {
            GrowthFit::PowerLaw { k, .. } => *k,
            GrowthFit::Vanishing => f64::NEG_INFINITY,
        }
    }
}

pub fn growth_fit(radii: &[f64], energies: &[f64]) -> Result<GrowthFit, EnergyError> {
    if radii.len() != energies.len() {
        return Err(EnergyError::InvalidArgument(
            "radii and energies differ in length".into(),
        ));
    }
    if radii.len() < 3 {
        return Err(EnergyError::InvalidArgument(
            "need at least three radii".into(),
        ));
    }
    if energies.iter().all(|&e| e == 0.0) {
        return Ok(GrowthFit::Vanishing);
    }
    if energies.iter().any(|&e| !(e > 0.0)) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(EnergyError::InvalidArgument(
            "log-log fit needs positive radii and energies".into(),
        ));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EnergyError::InvalidArgument(
            "radii must not all coincide".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let k = sxy / sxx;
    let b = my - k * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - b - k * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(GrowthFit::PowerLaw {
        c: b.exp(),
        k,
        residual,
    })
}

pub fn profile_growth(profile: &RadialEnergyProfile) -> Result<GrowthFit, EnergyError> {
    growth_fit(&profile.radii, &profile.energies)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `n > 4`.
    Dimension,
    /// `4 + k − n < 0`.
    Growth,
    /// `ρ′ ≤ 0`.
    DensityNonincreasing,
    /// `Q ≤ Q_crit`.
    BoundedByQcrit,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "failed", rename_all = "snake_case")]
pub enum Verdict {
    Applies,
    DoesNotApply(Hypothesis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub rho_prime_nonpositive: bool,
    pub bounded_by_qcrit: bool,
    pub stationary: bool,
}

impl HypothesisFlags {
    pub fn all() -> Self {
        Self {
            rho_prime_nonpositive: true,
            bounded_by_qcrit: true,
            stationary: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleVerdict {
    pub n: usize,
    pub k: f64,
    /// `4 + k − n`.
    pub growth_margin: f64,
    pub flags: HypothesisFlags,
    pub verdict: Verdict,
}

/// Whether finite-growth fields must vanish: all of `n > 4`, `4 + k − n < 0`
/// and the three flags. The first failed hypothesis is named.
pub fn liouville_verdict(n: usize, k: f64, flags: HypothesisFlags) -> LiouvilleVerdict {
    let margin = 4.0 + k - n as f64;
    let checks = [
        (Hypothesis::Dimension, n > 4),
        (Hypothesis::Growth, margin < 0.0),
        (
            Hypothesis::DensityNonincreasing,
            flags.rho_prime_nonpositive,
        ),
        (Hypothesis::BoundedByQcrit, flags.bounded_by_qcrit),
        (Hypothesis::Stationary, flags.stationary),
    ];
    let verdict = checks
        .iter()
        .find(|(_, ok)| !ok)
        .map_or(Verdict::Applies, |(h, _)| Verdict::DoesNotApply(*h));
    LiouvilleVerdict {
        n,
        k,
        growth_margin: margin,
        flags,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        for n in 1..=6 {
            let q = BallQuadrature {
                radial: 4,
                angular: 3,
            };
            let e = ball_energy(&FieldSampler::constant(n, 1.0), &Density::Unit, 1.0, &q).unwrap();
            assert!((e - unit_ball_volume(n)).abs() < 1e-12, "n = {n}: {e}");
        }
    }

    #[test]
    fn energy_examples() {
        let q = BallQuadrature::default();
        assert_eq!(
            ball_energy(&FieldSampler::constant(3, 0.0), &Density::Unit, 2.0, &q).unwrap(),
            0.0
        );
        let e = ball_energy(&FieldSampler::constant(5, 0.7), &Density::Unit, 1.0, &q).unwrap();
        assert!((e - 0.7 * 8.0 * PI * PI / 15.0).abs() < 1e-12);
        let e = ball_energy(
            &FieldSampler::constant(2, 3.0),
            &Density::Euclidean,
            1.0,
            &q,
        )
        .unwrap();
        assert!((e - 2.0 * PI).abs() < 1e-12);
        assert!(matches!(
            ball_energy(
                &FieldSampler::constant(2, 6.0),
                &Density::Polytropic { gamma: 1.4 },
                1.0,
                &q
            ),
            Err(EnergyError::DensityDomain { .. })
        ));
        assert!(matches!(
            ball_energy(&FieldSampler::constant(2, -1.0), &Density::Unit, 1.0, &q),
            Err(EnergyError::NegativeQ { .. })
        ));
    }

    #[test]
    fn gaussian_quadrature_is_second_order() {
        // ∫_{B_1} e^{−|x|²} in ℝ³ = π^{3/2} erf(1) − 2π/e.
        let erf1 = 0.842_700_792_949_714_9;
        let exact = PI.powf(1.5) * erf1 - 2.0 * PI / 1f64.exp();
        let err = |radial, angular| {
            let q = BallQuadrature { radial, angular };
            (ball_energy(&FieldSampler::gaussian(3), &Density::Unit, 1.0, &q).unwrap() - exact)
                .abs()
        };
        let (a, b) = (err(8, 4), err(16, 8));
        assert!(a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn profile_examples() {
        let q = BallQuadrature::default();
        let radii = [0.5, 1.0, 1.5, 2.0];
        let p =
            conformal_profile(&FieldSampler::constant(5, 0.0), &Density::Unit, &radii, &q).unwrap();
        assert!(p.conformal.iter().all(|&v| v == 0.0) && p.conformal_nondecreasing);
        let p =
            conformal_profile(&FieldSampler::constant(5, 2.0), &Density::Unit, &radii, &q).unwrap();
        for (r, c) in radii.iter().zip(&p.conformal) {
            assert!((c - 2.0 * unit_ball_volume(5) * r.powi(4)).abs() < 1e-11);
        }
        assert!(p.conformal.windows(2).all(|w| w[1] > w[0]));
        let g = conformal_profile(&FieldSampler::gaussian(6), &Density::Unit, &radii, &q).unwrap();
        assert!(!g.asserted && g.energy_nondecreasing);
        // The Gaussian's conformal energy in ℝ⁶ decays at large r.
        let g = conformal_profile(
            &FieldSampler::gaussian(6).declared_stationary(),
            &Density::Unit,
            &[1.0, 3.0, 6.0],
            &BallQuadrature {
                radial: 16,
                angular: 4,
            },
        );
        assert!(matches!(g, Err(EnergyError::MonotonicityViolated { .. })));
        assert_eq!(
            conformal_profile(
                &FieldSampler::constant(5, 1.0),
                &Density::Polytropic { gamma: 1.4 },
                &[1.0],
                &q
            )
            .unwrap()
            .q_crit,
            Some(5.0 / 6.0)
        );
    }

    #[test]
    fn fit_examples() {
        let r = [1.0, 2.0, 3.0, 5.0];
        let e: Vec<f64> = r.iter().map(|x| 7.0 * x * x).collect();
        match growth_fit(&r, &e).unwrap() {
            GrowthFit::PowerLaw { c, k, residual } => {
                assert!((c - 7.0).abs() < 1e-8 && (k - 2.0).abs() < 1e-8 && residual < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(growth_fit(&r, &[0.0; 4]).unwrap(), GrowthFit::Vanishing);
        assert_eq!(GrowthFit::Vanishing.exponent(), f64::NEG_INFINITY);
        let e: Vec<f64> = r.iter().map(|x| x.powi(4) + x).collect();
        match growth_fit(&r, &e).unwrap() {
            GrowthFit::PowerLaw { k, residual, .. } => {
                assert!(k > 1.0 && k < 4.0 && residual > 0.0)
            }
            other => panic!("{other:?}"),
        }
        assert!(growth_fit(&r[..2], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn verdict_table() {
        let all = HypothesisFlags::all();
        assert_eq!(liouville_verdict(5, 0.5, all).verdict, Verdict::Applies);
        assert_eq!(
            liouville_verdict(4, 0.1, all).verdict,
            Verdict::DoesNotApply(Hypothesis::Dimension)
        );
        assert_eq!(
            liouville_verdict(6, 3.0, all).verdict,
            Verdict::DoesNotApply(Hypothesis::Growth)
        );
        let flags = HypothesisFlags {
            stationary: false,
            ..all
        };
        assert_eq!(
            liouville_verdict(7, 1.0, flags).verdict,
            Verdict::DoesNotApply(Hypothesis::Stationary)
        );
        assert_eq!(
            liouville_verdict(5, f64::NEG_INFINITY, all).verdict,
            Verdict::Applies
        );
    }

    proptest! {
        #[test]
        fn power_laws_are_recovered(c in 0.01f64..100.0, k in -3.0f64..6.0) {
            let r = [0.5f64, 1.0, 2.0, 4.0, 8.0];
            let e: Vec<f64> = r.iter().map(|x| c * x.powf(k)).collect();
            match growth_fit(&r, &e).unwrap() {
                GrowthFit::PowerLaw { c: c2, k: k2, .. } => {
                    prop_assert!((c2 - c).abs() <= 1e-6 * c);
                    prop_assert!((k2 - k).abs() <= 1e-6 * k.abs().max(1.0));
                }
                GrowthFit::Vanishing => prop_assert!(false),
            }
        }

        #[test]
        fn ball_energy_grows_with_radius(r1 in 0.1f64..2.0, dr in 0.01f64..1.0) {
            let s = FieldSampler::new(3, |x| (x[0] * x[1]).powi(2) + x[2].abs());
            let q = BallQuadrature { radial: 8, angular: 4 };
            let a = ball_energy(&s, &Density::Euclidean, r1, &q).unwrap();
            let b = ball_energy(&s, &Density::Euclidean, r1 + dr, &q).unwrap();
            prop_assert!(b >= a);
        }
    }
}

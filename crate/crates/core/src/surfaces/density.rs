//! Densities `ρ(Q)` of nonlinear Hodge equations and their primitives
//! `e(Q) = ∫₀^Q ρ(s) ds`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SurfaceError;
use crate::quad::adaptive_simpson;

/// Default half-width of the excluded band around the light cone `Q = 1`.
pub const LIGHT_CONE_TOL: f64 = 1e-8;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied density; the primitive is computed by quadrature.
pub struct CustomDensity {
    pub name: String,
    rho: Box<ScalarFn>,
    drho: Box<ScalarFn>,
    /// Exclusive upper end of the admissible `Q` range.
    pub q_max: f64,
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("q_max", &self.q_max)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    /// `1/√(1+Q)`: graphs in Euclidean space.
    Euclidean,
    /// `1/√|1−Q|`: graphs in Minkowski space, space-like for `Q < 1`.
    Minkowski,
    /// Isentropic gas density `(1 − (γ−1)Q/2)^{1/(γ−1)}`.
    Polytropic {
        gamma: f64,
    },
    /// `ρ ≡ 1`, so `e(Q) = Q`.
    Unit,
    Custom(Arc<CustomDensity>),
}

/// Serializable name of a density, for configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Euclidean,
    Minkowski,
    Polytropic {
        gamma: f64,
    },
    /// `ρ ≡ 1`, so `e(Q) = Q`.
    Unit,
}

impl From<DensityKind> for Density {
    fn from(k: DensityKind) -> Self {
        match k {
            DensityKind::Euclidean => Density::Euclidean,
            DensityKind::Minkowski => Density::Minkowski,
            DensityKind::Polytropic { gamma } => Density::Polytropic { gamma },
            DensityKind::Unit => Density::Unit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub rho: f64,
    pub drho: f64,
    pub e: f64,
}

/// Where `Qρ(Q)²` stops increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SonicLocus {
    /// The equation keeps its type for all admissible `Q`.
    None,
    /// Smallest positive root of `d/dQ (Qρ²) = 0`.
    Root(f64),
    /// `ρ` blows up at this `Q`; the type changes across a singularity.
    SingularTransition(f64),
}

impl Density {
    pub fn custom(
        name: impl Into<String>,
        rho: impl Fn(f64) -> f64 + Send + Sync + 'static,
        drho: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q_max: f64,
    ) -> Self {
        Density::Custom(Arc::new(CustomDensity {
            name: name.into(),
            rho: Box::new(rho),
            drho: Box::new(drho),
            q_max,
        }))
    }

    pub fn name(&self) -> String {
        match self {
            Density::Euclidean => "euclidean".into(),
            Density::Minkowski => "minkowski".into(),
            Density::Polytropic { gamma } => format!("polytropic({gamma})"),
            Density::Unit => "unit".into(),
            Density::Custom(c) => c.name.clone(),
        }
    }

    /// Exclusive upper bound of the admissible `Q`, if any.
    pub fn q_limit(&self) -> Option<f64> {
        match self {
            Density::Polytropic { gamma } => Some(2.0 / (gamma - 1.0)),
            Density::Custom(c) if c.q_max.is_finite() => Some(c.q_max),
            _ => None,
        }
    }

    fn check(&self, q: f64) -> Result<(), SurfaceError> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(SurfaceError::DensityDomain { q });
        }
        match self {
            Density::Minkowski if (1.0 - q).abs() <= LIGHT_CONE_TOL => {
                Err(SurfaceError::LightCone { q })
            }
            Density::Polytropic { gamma } => {
                if !(*gamma > 1.0) {
                    return Err(SurfaceError::InvalidArgument(format!(
                        "adiabatic exponent must exceed 1, got {gamma}"
                    )));
                }
                // Tolerance keeps Q = 2/(γ−1) from slipping through on rounding.
                if 1.0 - 0.5 * (gamma - 1.0) * q <= 1e-12 {
                    Err(SurfaceError::Cavitation {
                        q,
                        limit: 2.0 / (gamma - 1.0),
                    })
                } else {
                    Ok(())
                }
            }
            Density::Custom(c) if q >= c.q_max => Err(SurfaceError::DensityDomain { q }),
            _ => Ok(()),
        }
    }

    pub fn rho(&self, q: f64) -> Result<f64, SurfaceError> {
        self.check(q)?;
        Ok(match self {
            Density::Euclidean => 1.0 / (1.0 + q).sqrt(),
            Density::Minkowski => 1.0 / (1.0 - q).abs().sqrt(),
            Density::Polytropic { gamma } => {
                (1.0 - 0.5 * (gamma - 1.0) * q).powf(1.0 / (gamma - 1.0))
            }
            Density::Unit => 1.0,
            Density::Custom(c) => (c.rho)(q),
        })
    }

    pub fn eval(&self, q: f64) -> Result<DensityValue, SurfaceError> {
        self.check(q)?;
        let v = match self {
            Density::Euclidean => {
                let s = (1.0 + q).sqrt();
                DensityValue {
                    rho: 1.0 / s,
                    drho: -0.5 / (s * s * s),
                    e: 2.0 * (s - 1.0),
                }
            }
            Density::Minkowski => {
                if q < 1.0 {
                    let s = (1.0 - q).sqrt();
                    DensityValue {
                        rho: 1.0 / s,
                        drho: 0.5 / (s * s * s),
                        // 2(1 − s) written without cancellation.
                        e: 2.0 * q / (1.0 + s),
                    }
                } else {
                    // Time-like branch; ∫ across Q = 1 converges.
                    let s = (q - 1.0).sqrt();
                    DensityValue {
                        rho: 1.0 / s,
                        drho: -0.5 / (s * s * s),
                        e: 2.0 + 2.0 * s,
                    }
                }
            }
            Density::Polytropic { gamma } => {
                let g1 = gamma - 1.0;
                let b = 1.0 - 0.5 * g1 * q;
                DensityValue {
                    rho: b.powf(1.0 / g1),
                    drho: -0.5 * b.powf(1.0 / g1 - 1.0),
                    e: 2.0 / gamma * (1.0 - b.powf(gamma / g1)),
                }
            }
            Density::Unit => DensityValue {
                rho: 1.0,
                drho: 0.0,
                e: q,
            },
            Density::Custom(c) => DensityValue {
                rho: (c.rho)(q),
                drho: (c.drho)(q),
                e: self.primitive_by_quadrature(q, 1e-13)?,
            },
        };
        Ok(v)
    }

    pub fn primitive(&self, q: f64) -> Result<f64, SurfaceError> {
        Ok(self.eval(q)?.e)
    }

    /// `∫₀^Q ρ` by adaptive Simpson, independent of the closed forms.
    ///
    /// Near and beyond the light cone the Minkowski integrand is singular;
    /// there the pieces are mapped by `s = 1 ∓ t²`, which makes them constant.
    pub fn primitive_by_quadrature(&self, q: f64, tol: f64) -> Result<f64, SurfaceError> {
        self.check(q)?;
        let f = |s: f64| self.rho_unchecked(s);
        match self {
            Density::Minkowski if q > 0.95 => {
                let head = adaptive_simpson(&f, 0.0, 0.9, tol);
                let t_head = 0.1f64.sqrt();
                if q < 1.0 {
                    let neck = adaptive_simpson(&|_t: f64| 2.0, (1.0 - q).sqrt(), t_head, tol);
                    Ok(head + neck)
                } else {
                    let neck = adaptive_simpson(&|_t: f64| 2.0, 0.0, t_head, tol);
                    let tail = adaptive_simpson(&|_t: f64| 2.0, 0.0, (q - 1.0).sqrt(), tol);
                    Ok(head + neck + tail)
                }
            }
            _ => Ok(adaptive_simpson(&f, 0.0, q, tol)),
        }
    }

    fn rho_unchecked(&self, q: f64) -> f64 {
        match self {
            Density::Euclidean => 1.0 / (1.0 + q).sqrt(),
            Density::Minkowski => 1.0 / (1.0 - q).abs().sqrt(),
            Density::Polytropic { gamma } => (1.0 - 0.5 * (gamma - 1.0) * q)
                .max(0.0)
                .powf(1.0 / (gamma - 1.0)),
            Density::Unit => 1.0,
            Density::Custom(c) => (c.rho)(q),
        }
    }

    /// Type-change locus of the associated second-order equation.
    pub fn sonic_q(&self) -> SonicLocus {
        match self {
            Density::Euclidean | Density::Unit => SonicLocus::None,
            Density::Minkowski => SonicLocus::SingularTransition(1.0),
            Density::Polytropic { gamma } => SonicLocus::Root(2.0 / (gamma + 1.0)),
            Density::Custom(c) => {
                // ρ + 2Qρ′ changes sign at the root of d/dQ(Qρ²) = ρ(ρ + 2Qρ′).
                let g = |q: f64| (c.rho)(q) + 2.0 * q * (c.drho)(q);
                let hi = if c.q_max.is_finite() { c.q_max } else { 1e6 };
                let n = 4000;
                let mut prev = (0.0, g(0.0));
                for k in 1..=n {
                    let q = hi * k as f64 / n as f64 * (1.0 - 1e-12);
                    let v = g(q);
                    if v == 0.0 {
                        return SonicLocus::Root(q);
                    }
                    if v.signum() != prev.1.signum() {
                        let (mut a, mut b) = (prev.0, q);
                        let fa = prev.1;
                        for _ in 0..200 {
                            let m = 0.5 * (a + b);
                            if g(m).signum() == fa.signum() {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        return SonicLocus::Root(0.5 * (a + b));
                    }
                    prev = (q, v);
                }
                SonicLocus::None
            }
        }
    }

    /// The dual density: the pairing `ρ̃(ρ²Q) = 1/ρ(Q)` sends Euclidean graphs
    /// to space-like Minkowski graphs and back.
    pub fn dual(&self) -> Result<Density, SurfaceError> {
        match self {
            Density::Euclidean => Ok(Density::Minkowski),
            Density::Minkowski => Ok(Density::Euclidean),
            other => Err(SurfaceError::InvalidArgument(format!(
                "no closed-form dual for density {}",
                other.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        let v = Density::Euclidean.eval(0.0).unwrap();
        assert_eq!((v.rho, v.e), (1.0, 0.0));
        let v = Density::Euclidean.eval(3.0).unwrap();
        assert_eq!(v.rho, 0.5);
        assert!((v.e - 2.0).abs() < 1e-15);
        let v = Density::Minkowski.eval(0.75).unwrap();
        assert!((v.rho - 2.0).abs() < 1e-15);
        assert!((v.e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            Density::Minkowski.eval(1.0),
            Err(SurfaceError::LightCone { .. })
        ));
        assert!(matches!(
            Density::Polytropic { gamma: 1.4 }.eval(5.0),
            Err(SurfaceError::Cavitation { .. })
        ));
        assert!(matches!(
            Density::Euclidean.eval(-1.0),
            Err(SurfaceError::DensityDomain { .. })
        ));
    }

    #[test]
    fn sonic_loci() {
        assert_eq!(Density::Euclidean.sonic_q(), SonicLocus::None);
        assert_eq!(
            Density::Minkowski.sonic_q(),
            SonicLocus::SingularTransition(1.0)
        );
        match (Density::Polytropic { gamma: 1.4 }).sonic_q() {
            SonicLocus::Root(q) => assert!((q - 5.0 / 6.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn custom_sonic_root_matches_polytropic() {
        let g = 1.4f64;
        let d = Density::custom(
            "gas",
            move |q| (1.0 - 0.5 * (g - 1.0) * q).powf(1.0 / (g - 1.0)),
            move |q| -0.5 * (1.0 - 0.5 * (g - 1.0) * q).powf(1.0 / (g - 1.0) - 1.0),
            2.0 / (g - 1.0),
        );
        match d.sonic_q() {
            SonicLocus::Root(q) => assert!((q - 5.0 / 6.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
        assert_eq!(Density::Unit.sonic_q(), SonicLocus::None);
    }

    #[test]
    fn polytropic_sonic_matches_sound_speed() {
        // At the sonic point the squared speed equals c² = 1 − (γ−1)Q/2.
        let gamma = 1.4f64;
        let q = 2.0 / (gamma + 1.0);
        assert!((q - (1.0 - 0.5 * (gamma - 1.0) * q)).abs() < 1e-15);
    }

    #[test]
    fn minkowski_primitive_crosses_light_cone() {
        let e = Density::Minkowski.eval(2.0).unwrap().e;
        let quad = Density::Minkowski
            .primitive_by_quadrature(2.0, 1e-13)
            .unwrap();
        assert!((e - 4.0).abs() < 1e-14);
        assert!((quad - 4.0).abs() < 1e-10);
    }

    #[test]
    fn monotonicity_of_densities() {
        for k in 0..200 {
            let q = k as f64 * 0.05;
            assert!(Density::Euclidean.eval(q).unwrap().drho <= 0.0);
        }
        // Space-like Minkowski density increases towards the light cone.
        for k in 0..99 {
            let q = k as f64 * 0.01;
            assert!(Density::Minkowski.eval(q).unwrap().drho > 0.0);
        }
        for k in 1..100 {
            let q = 1.0 + k as f64 * 0.1;
            assert!(Density::Minkowski.eval(q).unwrap().drho < 0.0);
        }
    }

    proptest! {
        #[test]
        fn primitive_matches_quadrature(t in 0.0f64..0.9) {
            let cases = [
                (Density::Euclidean, 10.0),
                (Density::Minkowski, 1.0),
                (Density::Polytropic { gamma: 1.4 }, 5.0),
                (Density::Polytropic { gamma: 5.0 / 3.0 }, 3.0),
            ];
            for (d, bound) in cases.iter() {
                let q = t * bound;
                let closed = d.eval(q).unwrap().e;
                let quad = d.primitive_by_quadrature(q, 1e-13).unwrap();
                prop_assert!((closed - quad).abs() < 1e-10, "{} q={q}: {closed} vs {quad}", d.name());
            }
        }

        #[test]
        fn derivative_matches_difference(q in 0.01f64..0.8) {
            let h = 1e-6;
            for d in [Density::Euclidean, Density::Minkowski, Density::Polytropic { gamma: 1.4 }] {
                let fd = (d.rho(q + h).unwrap() - d.rho(q - h).unwrap()) / (2.0 * h);
                let v = d.eval(q).unwrap();
                prop_assert!((fd - v.drho).abs() < 1e-6 * (1.0 + v.drho.abs()));
            }
        }

        #[test]
        fn primitive_increasing(a in 0.0f64..0.9, b in 0.0f64..0.9) {
            prop_assume!(a < b);
            for d in [Density::Euclidean, Density::Minkowski, Density::Polytropic { gamma: 1.4 }] {
                prop_assert!(d.eval(b).unwrap().e > d.eval(a).unwrap().e);
            }
        }
    }
}

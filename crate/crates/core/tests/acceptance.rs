//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ellhyp::energy::{
    conformal_profile, growth_fit, liouville_verdict, BallQuadrature, FieldSampler,
    HypothesisFlags, Verdict as LVerdict,
};
use ellhyp::friedrichs::{
    apply_multiplier, boundary_admissibility, build_system, kappa, kappa_star, manufactured_rhs,
    solve_strong, BoundaryPair, FriedrichsError, ManufacturedSample, MultiplierChoice,
    StrongOptions, TypeChangeFn, Verdict,
};
use ellhyp::geometry::{
    beltrami_metric, build_lens_domain, classify, operator_coefficients_exp2, trace_characteristic,
    Branch, Point2, Signature, TraceOptions, TypeKind,
};
use ellhyp::grid::{Chart, GridField};
use ellhyp::hodge_disc::{
    multiplier_identity_residual_within, overdetermination_gap, solve_open_problem, BoundaryData,
    SolveOptions,
};
use ellhyp::surfaces::{dual_form, Density, DualTolerances, SonicLocus};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn discriminant_identity() -> Outcome {
    let n = 201;
    let h = 4.0 / (n - 1) as f64;
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    for j in 0..n {
        for i in 0..n {
            let p = Point2::new(-2.0 + i as f64 * h, -2.0 + j as f64 * h);
            let c = operator_coefficients_exp2(p);
            let d = 1.0 - p.x * p.x - p.y * p.y;
            worst = worst.max((c.discriminant() - d).abs());
            if d.abs() < 1e-9 {
                continue;
            }
            let kind = classify(&c, 1e-12).kind;
            let sig = beltrami_metric(p).map_err(|e| e.to_string())?.signature;
            let agree = matches!(
                (kind, sig),
                (TypeKind::Elliptic, Signature::Riemannian)
                    | (TypeKind::Hyperbolic, Signature::Lorentzian)
            );
            if !agree {
                mismatches += 1;
            }
        }
    }
    check(
        worst < 1e-12 && mismatches == 0,
        format!("max |Δ − (1−p²−q²)| = {worst:.1e}, signature mismatches = {mismatches}"),
    )
}

fn characteristic_tangency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r = rng.gen_range(1.0 + 1e-6..2.0);
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let branch = if rng.gen_bool(0.5) {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let path = trace_characteristic(
            Point2::from_polar(r, t),
            branch,
            1e-3,
            1.0,
            TraceOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        if (path.arc_length() - 1.0).abs() > 1e-9 {
            return Err(format!("path stopped at arc length {}", path.arc_length()));
        }
        worst = worst.max(path.tangency_defect());
    }
    check(
        worst < 1e-6,
        format!("max distance defect over 20 paths = {worst:.1e}"),
    )
}

fn multiplier_identity_order() -> Outcome {
    let window = (
        (1.05 + 0.45 / 8.0, 1.5 - 0.45 / 8.0),
        (-0.5 + 1.0 / 8.0, 0.5 - 1.0 / 8.0),
    );
    let mut errs = Vec::new();
    for n in [17, 33, 65, 129] {
        let f = GridField::spanning(Chart::Polar, (1.05, 1.5), (-0.5, 0.5), [n, n], |r, t| {
            r * r * t
        })
        .map_err(|e| e.to_string())?;
        errs.push(
            multiplier_identity_residual_within(&f, window.0, window.1)
                .map_err(|e| e.to_string())?,
        );
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    check(
        orders.iter().all(|&p| p >= 1.8),
        format!("residuals {}, orders {orders:.3?}", sci(&errs)),
    )
}

fn lens_uniqueness() -> Outcome {
    let dom = build_lens_domain(0.5, 0.25).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [16, 32, 64] {
        let opts = SolveOptions {
            resolution: n,
            ..Default::default()
        };
        let sol = solve_open_problem(&dom, &BoundaryData::homogeneous(), &opts)
            .map_err(|e| e.to_string())?;
        let m = sol.max_abs();
        ok &= m < 5.0 * sol.h;
        parts.push(format!("N={n}: max|φ| = {m:.1e} (5h = {:.3})", 5.0 * sol.h));
    }
    check(ok, parts.join("; "))
}

fn overdetermination() -> Outcome {
    let dom = build_lens_domain(0.5, 0.25).map_err(|e| e.to_string())?;
    let data = BoundaryData::from_fn(&dom, |_, t| t);
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [16, 32, 64] {
        let opts = SolveOptions {
            resolution: n,
            ..Default::default()
        };
        let g = overdetermination_gap(&dom, &data, &|_, t| t + 0.1, &opts)
            .map_err(|e| e.to_string())?;
        ok &= (g.gap - 0.1).abs() <= 5.0 * g.h;
        parts.push(format!("N={n}: gap = {:.6} (h = {:.3})", g.gap, g.h));
    }
    check(ok, parts.join("; "))
}

fn positivity_checker() -> Outcome {
    let sys = build_system(
        &TypeChangeFn::keldysh_linear(0.5, 1.0).map_err(|e| e.to_string())?,
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let bc = BoundaryPair::constant(1.0, -1.0);
    let r = boundary_admissibility(&sys, &bc, 1.0, 1.0).map_err(|e| e.to_string())?;
    let det_min = apply_multiplier(&sys, 1.0, 1.0)
        .map_err(|e| e.to_string())?
        .min_det();
    let expected = [[0.5, 0.5], [0.5, 1.0]];
    let k_dev = (0..=10)
        .map(|i| {
            let m = kappa(&sys, 1.0, 1.0, i as f64 / 10.0);
            (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| (m[a][b] - expected[a][b]).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let kmin = kappa_star(&sys, 1.0, 1.0).min_eig;
    let singular = matches!(
        boundary_admissibility(&sys, &bc, 1.0, 2.0),
        Err(FriedrichsError::SingularMultiplier { .. })
    );
    let inadmissible = matches!(
        boundary_admissibility(&sys, &bc, 1.0, 0.1),
        Err(FriedrichsError::InadmissibleBoundary { .. })
    );
    let ok = det_min >= 0.5 - 1e-12
        && k_dev < 1e-12
        && (kmin - 0.1909830).abs() < 1e-6
        && (r.mu_min_eig - 0.5).abs() < 1e-12
        && (r.mu_max_eig - 1.5).abs() < 1e-12
        && r.verdict == Verdict::Admissible
        && singular
        && inadmissible;
    check(
        ok,
        format!(
            "min det E = {det_min}, κ* defect {k_dev:.1e}, κ* min eig = {kmin:.7}, μ* eig = {{{}, {}}}, verdict {:?}, c=2 singular: {singular}, c=0.1 inadmissible: {inadmissible}",
            r.mu_min_eig, r.mu_max_eig, r.verdict
        ),
    )
}

fn friedrichs_convergence() -> Outcome {
    let sys = build_system(
        &TypeChangeFn::keldysh_linear(0.5, 1.0).map_err(|e| e.to_string())?,
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let choice = MultiplierChoice {
        a: 1.0,
        c: 1.0,
        interval: (0.5, 2f64.sqrt()),
    };
    let bc = BoundaryPair::constant(1.0, -1.0).with_value(|xi| xi.sin() - 0.5 * xi.cos());
    let f = |eta: f64, xi: f64| {
        manufactured_rhs(
            &sys,
            &[ManufacturedSample {
                eta,
                u_eta: eta * xi.sin(),
                u_eta_eta: xi.sin(),
                u_xi: 0.5 * eta * eta * xi.cos(),
                u_xi_xi: -0.5 * eta * eta * xi.sin(),
            }],
        )[0]
    };
    let mut errs = Vec::new();
    let mut ok = true;
    let mut defects = Vec::new();
    for n in [32, 64] {
        let opts = StrongOptions {
            resolution: n,
            ..Default::default()
        };
        let sol = solve_strong(&sys, &choice, &bc, &f, &opts).map_err(|e| e.to_string())?;
        errs.push(sol.l2_error(|eta, xi| [eta * xi.sin(), 0.5 * eta * eta * xi.cos()]));
        ok &= sol.boundary_defect < 10.0 * sol.h;
        defects.push(sol.boundary_defect);
    }
    let ratio = errs[0] / errs[1];
    check(
        ok && ratio >= 1.7,
        format!(
            "L2 errors {}, ratio {ratio:.3}, boundary defects {}",
            sci(&errs),
            sci(&defects)
        ),
    )
}

fn duality() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [0.5, 1.0, 2.0] {
        let omega = GridField::from_fn2(
            Chart::Cartesian,
            [0.0, 0.0],
            [1.0 / 32.0; 2],
            [33, 33],
            |_, _| [c, 0.0],
        )
        .map_err(|e| e.to_string())?;
        let d = dual_form(&omega, &Density::Euclidean, DualTolerances::default())
            .map_err(|e| e.to_string())?;
        let res = d
            .dual_residual
            .max_closedness()
            .max(d.dual_residual.max_coclosedness());
        let target = c * c / (1.0 + c * c);
        let v = d.dsigma.values();
        let q_dev = v
            .chunks(2)
            .map(|w| (w[0] * w[0] + w[1] * w[1] - target).abs())
            .fold(0.0, f64::max);
        ok &= res < 1e-10 && q_dev < 1e-10 && matches!(d.dual_density, Density::Minkowski);
        parts.push(format!(
            "c={c}: residual {res:.1e}, |dσ|² defect {q_dev:.1e}"
        ));
    }
    check(ok, parts.join("; "))
}

fn energy_closed_forms() -> Outcome {
    let e = |d: &Density, q: f64| -> Result<(f64, f64), String> {
        Ok((
            d.primitive(q).map_err(|e| e.to_string())?,
            d.primitive_by_quadrature(q, 1e-13)
                .map_err(|e| e.to_string())?,
        ))
    };
    let (ee, eq) = e(&Density::Euclidean, 3.0)?;
    let (me, mq) = e(&Density::Minkowski, 0.75)?;
    let sonic = match (Density::Polytropic { gamma: 1.4 }).sonic_q() {
        SonicLocus::Root(q) => q,
        other => return Err(format!("sonic locus {other:?}")),
    };
    let ok = (ee - 2.0).abs() < 1e-10
        && (eq - 2.0).abs() < 1e-10
        && (me - 1.0).abs() < 1e-10
        && (mq - 1.0).abs() < 1e-10
        && (sonic - 5.0 / 6.0).abs() < 1e-10;
    check(
        ok,
        format!(
            "e_euc(3) = {ee} / {eq} (quadrature), e_mink(0.75) = {me} / {mq}, sonic Q = {sonic}"
        ),
    )
}

fn liouville_table() -> Outcome {
    let flags = HypothesisFlags::all();
    let cases = [
        (5, 0.5, true),
        (4, 0.0, false),
        (4, 0.5, false),
        (6, 3.0, false),
    ];
    let table_ok = cases.iter().all(|&(n, k, applies)| {
        (liouville_verdict(n, k, flags).verdict == LVerdict::Applies) == applies
    });
    let radii: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
    let energies: Vec<f64> = radii.iter().map(|r| 7.0 * r * r).collect();
    let k = growth_fit(&radii, &energies)
        .map_err(|e| e.to_string())?
        .exponent();
    let profile = conformal_profile(
        &FieldSampler::constant(5, 1.0),
        &Density::Euclidean,
        &[0.5, 1.0, 1.5, 2.0, 3.0],
        &BallQuadrature::default(),
    )
    .map_err(|e| e.to_string())?;
    let increasing = profile.conformal.windows(2).all(|w| w[1] > w[0]);
    check(
        table_ok && (k - 2.0).abs() < 1e-6 && increasing,
        format!(
            "verdict table ok: {table_ok}, fitted k = {k}, conformal column {:.4?}",
            profile.conformal
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "discriminant identity",
            discriminant_identity,
            Some(Duration::from_secs(1)),
        ),
        (
            "characteristic tangency",
            characteristic_tangency,
            Some(Duration::from_secs(5)),
        ),
        (
            "multiplier identity order",
            multiplier_identity_order,
            Some(Duration::from_secs(10)),
        ),
        ("lens uniqueness", lens_uniqueness, None),
        ("over-determination gap", overdetermination, None),
        (
            "positivity checker",
            positivity_checker,
            Some(Duration::from_secs(1)),
        ),
        (
            "least-squares convergence",
            friedrichs_convergence,
            Some(Duration::from_secs(60)),
        ),
        ("Hodge duality", duality, None),
        ("energy closed forms", energy_closed_forms, None),
        ("Liouville verdicts", liouville_table, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = run();
        let dt = t0.elapsed();
        let slow = limit.is_some_and(|l| dt > l);
        let (pass, detail) = match outcome {
            Ok(d) if !slow => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.3} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            dt.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! One function per subcommand. Each writes its primary artifact to `--out`
//! (or stdout) and a JSON summary to `--report` (or stderr).

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use ellhyp::energy::{
    conformal_profile, liouville_verdict, profile_growth, BallQuadrature, FieldSampler,
    HypothesisFlags,
};
use ellhyp::friedrichs::{
    boundary_admissibility, build_system, choose_parameters, kappa, manufactured_rhs, solve_strong,
    BoundaryPair, FirstOrderSystem, LsqMethod, ManufacturedSample, MultiplierChoice, StrongOptions,
    TypeChangeFn,
};
use ellhyp::geometry::{
    build_lens_domain, classify, operator_coefficients_exp2, trace_characteristic, Branch, Heading,
    Point2, TraceOptions, TypeKind,
};
use ellhyp::grid::{Chart, GridField};
use ellhyp::hodge_disc::{overdetermination_gap, solve_open_problem, BoundaryData, SolveOptions};
use ellhyp::io::{read_field, to_json, write_field, CsvTable};
use ellhyp::surfaces::{
    dual_form, extremal_residual, hodge_residual, legendre_transform_with, Density, DualTolerances,
    ExtremalKind, LegendreOptions,
};

use crate::config::bad;
use crate::{
    BranchArg, Command, DensityArgs, DensityName, HeadingArg, KPreset, MethodArg, ResidualKind,
    RhsArg, SamplerArg, SystemArgs,
};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::ClassifyMap { rect, tol, output } => {
            positive("tol", tol)?;
            let (origin, spacing, dims) =
                lattice(rect.xmin, rect.xmax, rect.ymin, rect.ymax, rect.nx, rect.ny)?;
            let field = GridField::from_fn(Chart::Cartesian, origin, spacing, dims, |x, y| {
                operator_coefficients_exp2(Point2::new(x, y)).discriminant()
            })?;
            let mut counts = [0usize; 3];
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let (x, y) = field.coord(i, j);
                    let class = classify(&operator_coefficients_exp2(Point2::new(x, y)), tol);
                    counts[match class.kind {
                        TypeKind::Elliptic => 0,
                        TypeKind::Hyperbolic => 1,
                        TypeKind::Parabolic => 2,
                    }] += 1;
                }
            }
            emit(&output.out, &write_field(&field))?;
            summary(
                &output.report,
                &json!({"elliptic": counts[0], "hyperbolic": counts[1], "parabolic": counts[2], "tol": tol}),
            )
        }
        Command::Chars {
            count,
            start_radius,
            branch,
            heading,
            step,
            length,
            output,
        } => {
            positive("step", step)?;
            positive("length", length)?;
            if count == 0 {
                return Err(bad("count must be at least 1"));
            }
            let branches: &[Branch] = match branch {
                BranchArg::Plus => &[Branch::Plus],
                BranchArg::Minus => &[Branch::Minus],
                BranchArg::Both => &[Branch::Plus, Branch::Minus],
            };
            let opts = TraceOptions {
                heading: match heading {
                    HeadingArg::Outward => Heading::Outward,
                    HeadingArg::TowardCircle => Heading::TowardCircle,
                },
                ..Default::default()
            };
            let mut table = CsvTable::new(&["path", "branch", "s", "x", "y"]);
            let mut worst = 0.0f64;
            let mut id = 0usize;
            for i in 0..count {
                let start = Point2::from_polar(start_radius, 2.0 * PI * i as f64 / count as f64);
                for &b in branches {
                    let path = trace_characteristic(start, b, step, length, opts)?;
                    worst = worst.max(path.tangency_defect());
                    let name = if b == Branch::Plus { "plus" } else { "minus" };
                    let mut s = 0.0;
                    for (k, p) in path.points.iter().enumerate() {
                        if k > 0 {
                            let q = path.points[k - 1];
                            s += (p.x - q.x).hypot(p.y - q.y);
                        }
                        table.push(vec![
                            id.into(),
                            name.into(),
                            s.into(),
                            p.x.into(),
                            p.y.into(),
                        ])?;
                    }
                    id += 1;
                }
            }
            emit(&output.out, &table.render())?;
            summary(
                &output.report,
                &json!({"paths": id, "max_tangency_defect": worst}),
            )
        }
        Command::Domain { lens, output } => {
            let dom = build_lens_domain(lens.x0, lens.eps)?;
            emit(&output.out, &to_json(&dom)?)
        }
        Command::Residual {
            input,
            kind,
            density,
            output,
        } => {
            let field = load_field(&input)?;
            let (out, maxima) = match kind {
                ResidualKind::Hodge => {
                    let dens = make_density(&density);
                    let res = hodge_residual(&field, &dens)?;
                    let mut values = Vec::with_capacity(2 * res.closedness.values().len());
                    for (a, b) in res
                        .closedness
                        .values()
                        .iter()
                        .zip(res.coclosedness.values())
                    {
                        values.push(*a);
                        values.push(*b);
                    }
                    let mut f = GridField::new(
                        field.chart(),
                        field.origin(),
                        field.spacing(),
                        field.dims(),
                        2,
                        values,
                    )?;
                    f.set_mask(field.mask().map(|m| m.to_vec()))?;
                    (f, vec![res.max_closedness(), res.max_coclosedness()])
                }
                other => {
                    let k = match other {
                        ResidualKind::MinkowskiGraph => ExtremalKind::MinkowskiGraph,
                        ResidualKind::EuclideanMinimal => ExtremalKind::EuclideanMinimal,
                        _ => ExtremalKind::LorentzMaximal,
                    };
                    let r = extremal_residual(&field, k)?;
                    let m = r.max_abs(0);
                    (r, vec![m])
                }
            };
            emit(&output.out, &write_field(&out))?;
            summary(&output.report, &json!({"max_residual": maxima}))
        }
        Command::Legendre {
            input,
            nx,
            ny,
            hessian_tol,
            output,
        } => {
            positive("hessian-tol", hessian_tol)?;
            let field = load_field(&input)?;
            let dims = match (nx, ny) {
                (None, None) => None,
                (a, b) => Some([a.unwrap_or(field.nx()), b.unwrap_or(field.ny())]),
            };
            let h = legendre_transform_with(&field, LegendreOptions { dims, hessian_tol })?;
            emit(&output.out, &write_field(&h.phi))?;
            summary(
                &output.report,
                &json!({
                    "singular_triangles": h.singular_triangles,
                    "total_triangles": h.total_triangles,
                    "masked_nodes": h.masked_nodes(),
                }),
            )
        }
        Command::Dualize {
            input,
            constant,
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
            density,
            closed_tol,
            path_tol,
            output,
        } => {
            positive("closed-tol", closed_tol)?;
            positive("path-tol", path_tol)?;
            let omega = match (input, constant) {
                (Some(p), None) => load_field(&p)?,
                (None, Some(c)) => {
                    if c.len() != 2 {
                        return Err(bad("--constant takes two components"));
                    }
                    let (origin, spacing, dims) = lattice(xmin, xmax, ymin, ymax, nx, ny)?;
                    GridField::from_fn2(Chart::Cartesian, origin, spacing, dims, |_, _| {
                        [c[0], c[1]]
                    })?
                }
                _ => return Err(bad("dualize needs exactly one of --input or --constant")),
            };
            let dens = make_density(&density);
            let d = dual_form(
                &omega,
                &dens,
                DualTolerances {
                    closed: closed_tol,
                    path: path_tol,
                },
            )?;
            emit(&output.out, &write_field(&d.sigma))?;
            let (c1, c2) = (
                d.dual_residual.max_closedness(),
                d.dual_residual.max_coclosedness(),
            );
            summary(
                &output.report,
                &json!({
                    "density": dens.name(),
                    "dual_density": d.dual_density.name(),
                    "max_dual_closedness": c1,
                    "max_dual_coclosedness": c2,
                    "max_dual_residual": c1.max(c2),
                    "path_defect": d.path_defect,
                    "max_dual_q": d.max_dual_q,
                }),
            )
        }
        Command::EnergyProfile {
            dim,
            density,
            sampler,
            q0,
            radii,
            rmin,
            rmax,
            count,
            radial,
            angular,
            stationary,
            output,
        } => {
            if dim < 1 {
                return Err(bad("dim must be at least 1"));
            }
            let radii = if radii.is_empty() {
                if count < 2 || !(rmin > 0.0 && rmax > rmin) {
                    return Err(bad("need count >= 2 and 0 < rmin < rmax"));
                }
                (0..count)
                    .map(|i| rmin + (rmax - rmin) * i as f64 / (count - 1) as f64)
                    .collect()
            } else {
                radii
            };
            let mut s = match sampler {
                SamplerArg::Constant => FieldSampler::constant(dim, q0),
                SamplerArg::Gaussian => FieldSampler::gaussian(dim),
            };
            if stationary {
                s = s.declared_stationary();
            }
            let dens = make_density(&density);
            let quad = BallQuadrature { radial, angular };
            let profile = conformal_profile(&s, &dens, &radii, &quad)?;
            let mut table = CsvTable::new(&["r", "E", "conformal"]);
            for (r, e, c) in profile.rows() {
                table.push(vec![r.into(), e.into(), c.into()])?;
            }
            emit(&output.out, &table.render())?;

            let fit = profile_growth(&profile)?;
            let rho_prime_nonpositive = (0..=64)
                .map(|i| profile.q_max_sampled * i as f64 / 64.0)
                .all(|q| dens.eval(q).is_ok_and(|v| v.drho <= 0.0));
            let flags = HypothesisFlags {
                rho_prime_nonpositive,
                bounded_by_qcrit: profile.q_crit.is_none_or(|qc| profile.q_max_sampled <= qc),
                stationary,
            };
            let verdict = liouville_verdict(dim, fit.exponent(), flags);
            summary(
                &output.report,
                &json!({"profile": profile, "fit": fit, "liouville": verdict}),
            )
        }
        Command::SolveKeldysh {
            system,
            a,
            c,
            rhs,
            resolutions,
            method,
            penalty,
            max_iter,
            field,
            output,
        } => {
            check_resolutions(&resolutions)?;
            positive("penalty", penalty)?;
            let sys = make_system(&system)?;
            let (sigma, tau, r) = (system.sigma, system.tau, sys.radius());
            let mut bc = BoundaryPair::constant(sigma, tau);
            if matches!(rhs, RhsArg::Manufactured) {
                bc = bc.with_value(move |xi| sigma * r * xi.sin() + tau * 0.5 * r * r * xi.cos());
            }
            let choice = match c {
                Some(c) => MultiplierChoice {
                    a: a.unwrap_or(1.0),
                    c,
                    interval: (c, c),
                },
                None => choose_parameters(&sys, &bc)?,
            };
            let report = boundary_admissibility(&sys, &bc, choice.a, choice.c)?;
            let f = |eta: f64, xi: f64| match rhs {
                RhsArg::Zero => 0.0,
                RhsArg::Manufactured => manufactured_rhs(
                    &sys,
                    &[ManufacturedSample {
                        eta,
                        u_eta: eta * xi.sin(),
                        u_eta_eta: xi.sin(),
                        u_xi: 0.5 * eta * eta * xi.cos(),
                        u_xi_xi: -0.5 * eta * eta * xi.sin(),
                    }],
                )[0],
            };
            let exact = |eta: f64, xi: f64| match rhs {
                RhsArg::Zero => [0.0, 0.0],
                RhsArg::Manufactured => [eta * xi.sin(), 0.5 * eta * eta * xi.cos()],
            };
            let mut table = CsvTable::new(&[
                "resolution",
                "h",
                "interior_residual",
                "boundary_defect",
                "kappa_min_eig",
                "mu_min_eig",
                "l2_error",
            ]);
            let mut last = None;
            for &n in &resolutions {
                let opts = StrongOptions {
                    resolution: n,
                    method: match method {
                        MethodArg::Direct => LsqMethod::Direct,
                        MethodArg::Cgls => LsqMethod::Cgls,
                    },
                    penalty,
                    max_iter,
                    ..Default::default()
                };
                let sol = solve_strong(&sys, &choice, &bc, &f, &opts)?;
                table.push(vec![
                    n.into(),
                    sol.h.into(),
                    sol.interior_residual.into(),
                    sol.boundary_defect.into(),
                    report.kappa.min_eig.into(),
                    report.mu_min_eig.into(),
                    sol.l2_error(exact).into(),
                ])?;
                last = Some(sol);
            }
            emit(&output.out, &table.render())?;
            if let (Some(path), Some(sol)) = (field, last) {
                emit(&Some(path), &write_field(&sol.w))?;
            }
            summary(
                &output.report,
                &json!({"a": choice.a, "c": choice.c, "interval": choice.interval}),
            )
        }
        Command::VerifySympos {
            system,
            a,
            c,
            output,
        } => {
            let sys = make_system(&system)?;
            let bc = BoundaryPair::constant(system.sigma, system.tau);
            let report = boundary_admissibility(&sys, &bc, a, c)?;
            let k_mat = kappa(&sys, a, c, sys.radius());
            let doc = json!({
                "type_change": sys.type_change,
                "coupling": sys.k,
                "sigma": system.sigma,
                "tau": system.tau,
                "a": a,
                "c": c,
                "det_e_min": report.det_e_min,
                "kappa_at_radius": k_mat,
                "kappa_min_eig": report.kappa.min_eig,
                "mu_eigenvalues": [report.mu_min_eig, report.mu_max_eig],
                "verdict": report.verdict,
                "report": report,
            });
            emit(&output.out, &to_json(&doc)?)
        }
        Command::UniquenessDemo {
            lens,
            resolutions,
            iterative,
            output,
        } => {
            check_resolutions(&resolutions)?;
            let dom = build_lens_domain(lens.x0, lens.eps)?;
            let data = BoundaryData::homogeneous();
            let mut table = CsvTable::new(&["resolution", "h", "region", "norm", "max_abs_phi"]);
            let mut rows = Vec::new();
            for &n in &resolutions {
                let opts = SolveOptions {
                    resolution: n,
                    iterative,
                    ..Default::default()
                };
                let sol = solve_open_problem(&dom, &data, &opts)?;
                let m = sol.max_abs();
                for r in &sol.residuals {
                    let region = serde_json::to_value(r.region)?;
                    table.push(vec![
                        n.into(),
                        sol.h.into(),
                        region.as_str().unwrap_or("").into(),
                        r.norm.into(),
                        m.into(),
                    ])?;
                }
                rows.push(json!({"resolution": n, "h": sol.h, "max_abs_phi": m, "below_5h": m < 5.0 * sol.h}));
            }
            emit(&output.out, &table.render())?;
            summary(&output.report, &json!({"runs": rows}))
        }
        Command::Overdetermination {
            lens,
            resolutions,
            perturbation,
            output,
        } => {
            check_resolutions(&resolutions)?;
            let dom = build_lens_domain(lens.x0, lens.eps)?;
            let data = BoundaryData::from_fn(&dom, |_, t| t);
            let mut table = CsvTable::new(&["resolution", "h", "gap", "r", "theta"]);
            for &n in &resolutions {
                let opts = SolveOptions {
                    resolution: n,
                    ..Default::default()
                };
                let g = overdetermination_gap(&dom, &data, &|_, t| t + perturbation, &opts)?;
                table.push(vec![
                    n.into(),
                    g.h.into(),
                    g.gap.into(),
                    g.r.into(),
                    g.theta.into(),
                ])?;
            }
            emit(&output.out, &table.render())?;
            summary(&output.report, &json!({"perturbation": perturbation}))
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {v}")))
    }
}

fn check_resolutions(res: &[usize]) -> Result<()> {
    if res.is_empty() {
        return Err(bad("at least one resolution is required"));
    }
    if let Some(n) = res.iter().find(|&&n| n < 8) {
        return Err(bad(format!("resolution {n} is below 8")));
    }
    Ok(())
}

type Lattice = ([f64; 2], [f64; 2], [usize; 2]);

fn lattice(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Lattice> {
    if !(xmax > xmin && ymax > ymin) {
        return Err(bad("rectangle bounds must satisfy min < max"));
    }
    if nx < 3 || ny < 3 {
        return Err(bad("grids need at least 3 nodes per axis"));
    }
    let hx = (xmax - xmin) / (nx - 1) as f64;
    let hy = (ymax - ymin) / (ny - 1) as f64;
    Ok(([xmin, ymin], [hx, hy], [nx, ny]))
}

fn make_density(d: &DensityArgs) -> Density {
    match d.density {
        DensityName::Euclidean => Density::Euclidean,
        DensityName::Minkowski => Density::Minkowski,
        DensityName::Polytropic => Density::Polytropic { gamma: d.gamma },
        DensityName::Unit => Density::Unit,
    }
}

fn make_system(s: &SystemArgs) -> Result<FirstOrderSystem> {
    positive("radius", s.radius)?;
    let tc = match s.k_preset {
        KPreset::KeldyshLinear => {
            if !s.k_coeffs.is_empty() {
                return Err(bad("--k-coeffs needs --k-preset polynomial"));
            }
            TypeChangeFn::keldysh_linear(s.eta_crit, s.radius)?
        }
        KPreset::Polynomial => {
            if s.k_coeffs.is_empty() {
                return Err(bad("--k-preset polynomial needs --k-coeffs"));
            }
            TypeChangeFn::polynomial(s.k_coeffs.clone(), s.radius)?
        }
    };
    Ok(build_system(&tc, s.coupling)?)
}

fn load_field(path: &Path) -> Result<GridField> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_field(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn summary(report: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    let text = to_json(value)?;
    match report {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

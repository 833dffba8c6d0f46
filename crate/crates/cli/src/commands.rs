//! One function per subcommand. Each returns an [`Outcome`]; contract
//! checks that fail are recorded as violations rather than errors so the
//! report is still written.

use std::f64::consts::{E, PI};

use renorm_core::energy::{antiderivative_f, lift_degree, SphereField};
use renorm_core::hodge::{mirror_potential, HodgeParts};
use renorm_core::minimize::{position_gradient, Termination};
use renorm_core::{
    decompose, detect_map, extend_boundary, extension_energy_bound, gauge_project, level_set_flux, minimize_positions,
    plane_energy_at, renormalized_energy, stability_sweep, torus_decompose, torus_energy, vortex_count_bound,
    Complex64, Error, MinimizeProblem, SingularMap, TorusMap, VortexConfig,
};
use serde_json::{json, Value};

use crate::config::{unit_circle_identity, Domain, ProblemConfig};
use crate::error::CliError;
use crate::report::{bound, breakdown, point, points, Outcome, Table};

/// Pointwise reconstruction tolerance away from vortices.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-5;
/// Largest trace of `b` on the circle.
pub const B_TRACE_TOLERANCE: f64 = 1e-8;
/// Largest deviation of the lift from the unit sphere.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Largest deviation of `h / 2 pi` from integers.
pub const QUANTIZATION_TOLERANCE: f64 = 1e-10;
/// Position-gradient norm allowed at a converged interior minimizer.
pub const CRITICALITY_TOLERANCE: f64 = 1e-3;
/// Central-difference step for the position gradient.
pub const GRADIENT_STEP: f64 = 1e-4;

fn vortex_list(v: &VortexConfig) -> Value {
    Value::Array(
        v.entries()
            .iter()
            .map(|e| json!({ "position": point(e.position), "charge": e.charge, "boundary": e.on_boundary() }))
            .collect(),
    )
}

fn disk_parts(config: &ProblemConfig, command: &str) -> Result<(SingularMap, HodgeParts), CliError> {
    config.require_domain(Domain::Disk, command)?;
    let map = config.disk_map()?;
    let grid = config.grid(&map.vortices.positions())?;
    let parts = decompose(&map, grid)?;
    Ok((map, parts))
}

fn b_trace_max(parts: &HodgeParts, n: usize) -> f64 {
    (0..n).map(|j| parts.b_value(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).abs()).fold(0.0, f64::max)
}

pub fn decompose_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    let (map, parts) = disk_parts(config, "decompose")?;
    let grid = parts.grid.clone();
    let a = parts.a.as_scalar().expect("scalar field");
    let b = parts.b.as_scalar().expect("scalar field");
    let residual = parts.reconstruction_residual(&map);
    let b_trace = b_trace_max(&parts, config.resolution.n_theta);
    let b_dirichlet = grid.integrate(|z| parts.b_gradient(z).norm_sqr());

    let mut table = Table::new("field", &["x", "y", "a", "b"]);
    for (k, z) in grid.nodes().iter().enumerate() {
        table.push(vec![z.re, z.im, a[k], b[k]]);
    }
    let mut out = Outcome::new(json!({
        "vortices": vortex_list(&map.vortices),
        "a_mean": grid.integrate_values(a) / PI,
        "b_boundary_max": b_trace,
        "b_dirichlet": b_dirichlet,
        "b_vanishes": parts.b_vanishes(),
        "reconstruction_residual": residual,
        "reconstruction_tolerance": RECONSTRUCTION_TOLERANCE,
    }))
    .with_table(table);
    out.require(residual <= RECONSTRUCTION_TOLERANCE, || {
        format!("reconstruction residual {residual:.3e} exceeds {RECONSTRUCTION_TOLERANCE:.0e}")
    });
    out.require(b_trace <= B_TRACE_TOLERANCE, || format!("trace of b {b_trace:.3e} exceeds {B_TRACE_TOLERANCE:.0e}"));
    Ok(out)
}

pub fn energy_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    match config.domain() {
        Domain::Disk => {
            let (map, parts) = disk_parts(config, "energy")?;
            let e = renormalized_energy(&map, &parts)?;
            Ok(Outcome::new(json!({ "energy": breakdown(&e), "b_vanishes": parts.b_vanishes() })))
        }
        Domain::Plane => {
            let p = config.plane.as_ref().expect("validated plane table");
            let c = |v: &[[f64; 2]]| v.iter().map(|q| Complex64::new(q[0], q[1])).collect::<Vec<_>>();
            let (zeros, poles) = (c(&p.zeros), c(&p.poles));
            let total =
                plane_energy_at(&zeros, &poles, p.radius, config.resolution.n_radial, config.resolution.n_theta)?;
            Ok(Outcome::new(json!({
                "energy": { "total": total },
                "radius": p.radius,
                "zeros": points(&zeros),
                "poles": points(&poles),
                "quantum_ratio": total / (2.0 * PI * zeros.len().max(1) as f64),
            })))
        }
        Domain::Torus => torus_energy_cmd(config),
    }
}

pub fn lift_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    let (map, parts) = disk_parts(config, "lift")?;
    let u = SphereField::from_map(&map, &parts)?;
    let degree = lift_degree(&u);
    let unit_defect = u.max_unit_defect();
    let mut table = Table::new("sphere", &["x", "y", "u1", "u2", "u3"]);
    for (z, jet) in parts.grid.nodes().iter().zip(&u.jets) {
        table.push(vec![z.re, z.im, jet.u[0], jet.u[1], jet.u[2]]);
    }
    let mut out = Outcome::new(json!({
        "degree": { "raw": degree.raw, "rounded": degree.rounded, "ambiguous": degree.ambiguous },
        "quarter_dirichlet": u.quarter_dirichlet(),
        "max_unit_defect": unit_defect,
        "conformality_defect": renorm_core::conformality_defect(&map, &parts),
        "b_vanishes": parts.b_vanishes(),
    }))
    .with_table(table);
    out.require(unit_defect <= UNIT_TOLERANCE, || format!("lift leaves the sphere by {unit_defect:.3e}"));
    Ok(out)
}

pub fn detect_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    config.require_domain(Domain::Disk, "detect")?;
    let map = config.disk_map()?;
    let grid = config.grid(&[])?;
    let found = detect_map(&grid, &map).map_err(|e| match e {
        Error::Unresolved { .. } => {
            CliError::Usage(format!("unresolved plaquette: {e}; raise `resolution` (currently {})", config.resolution))
        }
        other => other.into(),
    })?;
    let mut table = Table::new("vortices", &["x", "y", "charge"]);
    for v in found.entries() {
        table.push(vec![v.position.re, v.position.im, v.charge as f64]);
    }
    let charges_match = {
        let mut a: Vec<i32> = found.entries().iter().map(|v| v.charge).collect();
        let mut b: Vec<i32> = map.vortices.entries().iter().map(|v| v.charge).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    };
    Ok(Outcome::new(json!({
        "detected": vortex_list(&found),
        "count": found.len(),
        "total_charge": found.total_charge(),
        "configured": vortex_list(&map.vortices),
        "charges_match": charges_match,
    }))
    .with_table(table))
}

pub fn bound_check_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    let (_, parts) = disk_parts(config, "bound-check")?;
    let g0 = config.boundary_signal()?;
    let (positive, total) = vortex_count_bound(&parts, &g0)?;
    let mut out = Outcome::new(json!({ "positive": bound(&positive), "total": bound(&total) }));
    for r in [&positive, &total] {
        out.require(r.holds, || format!("bound violated: {} (lhs {:.6e} > rhs {:.6e})", r.context, r.lhs, r.rhs));
    }
    Ok(out)
}

pub fn level_flux_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    let (_, parts) = disk_parts(config, "level-flux")?;
    let g0 = config.boundary_signal()?;
    let mut table = Table::new("levels", &["level", "flux", "claim_rhs", "relative_gap"]);
    let mut rows = Vec::new();
    for level in config.flux_levels() {
        match level_set_flux(&parts, level, &g0) {
            Ok(r) => {
                table.push(vec![r.level, r.flux, r.claim_rhs, r.relative_gap()]);
                rows.push(json!({
                    "level": r.level,
                    "flux": r.flux,
                    "claim_rhs": r.claim_rhs,
                    "relative_gap": r.relative_gap(),
                    "segments": r.segments,
                }));
            }
            Err(Error::NonRegularLevel { level, suggestion, reason }) => {
                rows.push(json!({ "level": level, "skipped": reason, "suggestion": suggestion }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome::new(json!({ "levels": rows })).with_table(table))
}

pub fn extend_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    config.require_domain(Domain::Disk, "extend")?;
    let g0 = config.boundary_signal()?;
    let degree = match config.extend.as_ref().and_then(|e| e.degree) {
        Some(d) => d,
        None => config.boundary_degree()?,
    };
    let map = extend_boundary(&g0, degree)?;
    let grid = config.grid(&map.vortices.positions())?;
    let report = extension_energy_bound(&g0, degree, grid)?;
    let mut out = Outcome::new(json!({
        "degree": degree,
        "vortices": vortex_list(&map.vortices),
        "bound": bound(&report),
    }));
    out.require(report.holds, || format!("extension bound violated: lhs {:.6e} > rhs {:.6e}", report.lhs, report.rhs));
    Ok(out)
}

pub fn minimize_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    config.require_domain(Domain::Disk, "minimize")?;
    let g0 = config.boundary_signal()?;
    let charges = config.minimize_charges();
    let problem = MinimizeProblem::new(
        g0,
        charges,
        config.margin,
        (config.resolution.n_radial, config.resolution.n_theta),
        config.optimizer_settings(),
    )?;
    let result = minimize_positions(&problem)?;

    let gradient = position_gradient(&problem, &result.positions, GRADIENT_STEP);
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let interior = result.positions.iter().all(|p| p.norm() < 1.0 - config.margin - 1e-6);

    let q = result.positions.len();
    let mut header = vec!["evaluation".to_string(), "energy".to_string()];
    for i in 0..q {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("trace", &header_refs);
    for t in &result.trace {
        let mut row = vec![t.evaluation as f64, t.energy];
        row.extend(t.positions.iter().flat_map(|p| [p.re, p.im]));
        table.push(row);
    }
    let starts: Vec<Value> = result
        .starts
        .iter()
        .map(|s| {
            json!({
                "initial": points(&s.initial),
                "energy": s.energy,
                "evaluations": s.evaluations,
                "termination": termination(s.termination),
            })
        })
        .collect();
    let mut out = Outcome::new(json!({
        "positions": points(&result.positions),
        "radii": result.positions.iter().map(|p| p.norm()).collect::<Vec<_>>(),
        "charges": result.charges,
        "energy": result.energy,
        "evaluations": result.evaluations,
        "termination": termination(result.termination),
        "gradient_norm": gradient_norm,
        "starts": starts,
    }))
    .with_table(table);
    if result.termination == Termination::Converged && interior {
        out.require(gradient_norm <= CRITICALITY_TOLERANCE, || {
            format!("converged configuration has position gradient {gradient_norm:.3e} > {CRITICALITY_TOLERANCE:.0e}")
        });
    }
    Ok(out)
}

fn termination(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::Budget => "budget",
        Termination::Trivial => "trivial",
    }
}

pub fn sweep_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    config.require_domain(Domain::Disk, "sweep-stability")?;
    let base = config.vortex_config()?;
    let (index, path, limit) = config.sweep_path()?;
    let g0 = config.boundary_signal()?;
    let rep =
        stability_sweep(&base, index, &path, limit, &g0, (config.resolution.n_radial, config.resolution.n_theta))?;
    let mut table = Table::new("sweep", &["step", "x", "y", "energy", "relative_gap"]);
    for (k, ((p, e), g)) in rep.positions.iter().zip(&rep.energies).zip(&rep.relative_gaps).enumerate() {
        table.push(vec![k as f64, p.re, p.im, *e, *g]);
    }
    Ok(Outcome::new(json!({
        "index": index,
        "limit": point(limit),
        "positions": points(&rep.positions),
        "energies": rep.energies,
        "limit_energy": rep.limit_energy,
        "relative_gaps": rep.relative_gaps,
        "final_gap": rep.final_gap(),
    }))
    .with_table(table))
}

pub fn torus_energy_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    config.require_domain(Domain::Torus, "torus-energy")?;
    let map: TorusMap = config.torus_map()?;
    let parts = torus_decompose(&map, config.torus_kernel())?;
    let e = torus_energy(&parts, config.torus_resolution())?;
    let (hx, hy) = parts.h_quanta();
    let quantization = (hx - hx.round()).abs().max((hy - hy.round()).abs());
    let mut out = Outcome::new(json!({
        "energy": breakdown(&e),
        "h": point(parts.h),
        "h_quanta": [hx, hy],
        "quantization_error": quantization,
        "winding": [map.winding_pair().0, map.winding_pair().1],
        "b_vanishes": parts.b_vanishes(),
    }));
    out.require(quantization <= QUANTIZATION_TOLERANCE, || {
        format!("h / 2pi misses the integers by {quantization:.3e}")
    });
    Ok(out)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), CliError>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Quick invariant suite on closed-form instances at the configured resolution.
pub fn selftest_cmd(config: &ProblemConfig) -> Result<Outcome, CliError> {
    let res = config.resolution;
    let single = 2.0 * PI * E / (E + 1.0);
    let c = Complex64::new;
    let disk = |map: &SingularMap| -> Result<HodgeParts, CliError> {
        let grid = config.grid(&map.vortices.positions())?;
        Ok(decompose(map, grid)?)
    };
    let single_map = || -> Result<SingularMap, CliError> {
        Ok(SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1)?, Default::default()))
    };
    let quadratic = || -> Result<SingularMap, CliError> {
        let phase = renorm_core::SmoothPhase::polynomial(vec![
            renorm_core::PhaseTerm::new(1.0, 2, 0),
            renorm_core::PhaseTerm::new(1.0, 0, 2),
        ])?;
        Ok(SingularMap::new(VortexConfig::empty(), phase))
    };
    let pair = || -> Result<SingularMap, CliError> {
        let v =
            VortexConfig::new(vec![renorm_core::Vortex::new(0.3, 0.0, 1), renorm_core::Vortex::new(-0.3, 0.0, -1)])?;
        Ok(SingularMap::new(v, Default::default()))
    };

    let checks = vec![
        check("weight normalization", || {
            let total = antiderivative_f(40.0) - antiderivative_f(-40.0);
            Ok(((total - 0.5).abs() <= 1e-10, format!("int f = {total:.15}")))
        }),
        check("single-vortex energy", || {
            let map = single_map()?;
            let e = renormalized_energy(&map, &disk(&map)?)?.total;
            Ok(((e - single).abs() <= 1e-4, format!("{e:.8} vs {single:.8}")))
        }),
        check("gauge identity", || {
            let map = quadratic()?;
            let parts = disk(&map)?;
            let e = renormalized_energy(&map, &parts)?.total;
            let (_, g) = gauge_project(&map, &parts)?;
            Ok((
                (e - PI).abs() <= 1e-4 && g.residual <= 1e-4,
                format!("E = {e:.8}, identity residual {:.2e}", g.residual),
            ))
        }),
        check("plane Blaschke energy", || {
            let e = plane_energy_at(&[c(0.3, 0.0)], &[c(-0.3, 0.0)], 20.0, res.n_radial, res.n_theta)?;
            Ok((((e - 2.0 * PI) / (2.0 * PI)).abs() <= 0.01, format!("{e:.6} vs 2 pi")))
        }),
        check("reconstruction", || {
            let map = pair()?;
            let r = disk(&map)?.reconstruction_residual(&map);
            Ok((r <= RECONSTRUCTION_TOLERANCE, format!("residual {r:.2e}")))
        }),
        check("detection", || {
            let map = pair()?;
            let found = detect_map(&*config.grid(&[])?, &map)?;
            let ok = found.len() == 2
                && found.entries().iter().all(|v| {
                    let target = if v.charge > 0 { c(0.3, 0.0) } else { c(-0.3, 0.0) };
                    v.charge.abs() == 1 && (v.position - target).norm() < 0.05
                });
            Ok((ok, format!("{} vortices found", found.len())))
        }),
        check("mirror Neumann condition", || {
            let v = VortexConfig::new(vec![
                renorm_core::Vortex::new(0.4, -0.2, 1),
                renorm_core::Vortex::new(-0.1, 0.5, 2),
            ])?;
            let mut worst = 0.0f64;
            for j in 0..256 {
                let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 256.0);
                let (_, grad) = mirror_potential(&v, w)?;
                worst = worst.max((grad * w.conj()).re.abs());
            }
            Ok((worst <= 1e-10, format!("max |d_r a| {worst:.2e}")))
        }),
        check("extension bound", || {
            let g0 = unit_circle_identity(res.n_theta)?;
            let grid = config.grid(&[c(0.0, 0.0)])?;
            let r = extension_energy_bound(&g0, 1, grid)?;
            let target = 2.0 * single;
            Ok((r.holds && (r.lhs - target).abs() <= 1e-3, format!("lhs {:.6} rhs {:.4}", r.lhs, r.rhs)))
        }),
        check("torus winding energy", || {
            let parts = torus_decompose(&TorusMap::winding(1, 1), renorm_core::GreenKernel::Theta)?;
            let e = torus_energy(&parts, config.torus_resolution())?.total;
            let target = 2.0 * PI * PI;
            Ok(((e - target).abs() <= 1e-8, format!("{e:.10} vs 2 pi^2")))
        }),
    ];

    let mut table = Table::new("checks", &["index", "passed"]);
    let mut rows = Vec::new();
    let mut out_violations = Vec::new();
    for (i, ch) in checks.iter().enumerate() {
        table.push(vec![i as f64, if ch.passed { 1.0 } else { 0.0 }]);
        rows.push(json!({ "name": ch.name, "passed": ch.passed, "detail": ch.detail }));
        if !ch.passed {
            out_violations.push(format!("{}: {}", ch.name, ch.detail));
        }
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let mut out = Outcome::new(json!({ "checks": rows, "passed": passed, "total": checks.len() })).with_table(table);
    out.violations = out_violations;
    Ok(out)
}

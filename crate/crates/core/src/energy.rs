//! Renormalized energy, its sphere-valued lift and first variation.
//!
//! With `w = e^{a} g` and `u` the inverse stereographic image of `w`
//! (north pole at `w = 0`), the lift is `u = (sech a cos phi, sech a sin phi, -tanh a)`
//! where `phi = arg g`. Its differential follows from `grad phi = A`, the
//! connection of `g`, so no sample of `u` is ever differentiated.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{build_polar_grid, compensated_sum, PolarGrid};
use crate::hodge::{decompose, HarmonicField, HodgeParts, RESIDUAL_EXCLUSION};
use crate::maps::{PhaseTerm, SingularMap, SmoothPhase};

/// `f(t) = e^{2t} / (1 + e^{2t})^2`, evaluated through `e^{-2|t|}` (f is even).
pub fn weight_f(t: f64) -> f64 {
    let e = (-2.0 * t.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `F(t) = -1 / (2 (e^{2t} + 1))`, the antiderivative of `f` with `F(+inf) = 0`.
pub fn antiderivative_f(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-2.0 * t).exp();
        -0.5 * e / (1.0 + e)
    } else {
        -0.5 / ((2.0 * t).exp() + 1.0)
    }
}

/// Quantile of the probability density `2 f`, whose distribution function is
/// the logistic `1 / (1 + e^{-2t})`.
pub fn weight_quantile(u: f64) -> f64 {
    0.5 * (u / (1.0 - u)).ln()
}

/// `sech(a)` and `tanh(a)` without overflow.
fn sech_tanh(a: f64) -> (f64, f64) {
    let e = (-2.0 * a.abs()).exp();
    let sech = 2.0 * (-a.abs()).exp() / (1.0 + e);
    let tanh = a.signum() * (1.0 - e) / (1.0 + e);
    (sech, tanh)
}

/// A point of the sphere together with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereJet {
    pub u: [f64; 3],
    pub ux: [f64; 3],
    pub uy: [f64; 3],
}

impl SphereJet {
    /// Lift of `e^{a + i phi}` given `a`, the unit `e^{i phi}` and both gradients.
    pub fn from_polar(a: f64, grad_a: Complex64, phase: Complex64, grad_phi: Complex64) -> Self {
        let (s, t) = sech_tanh(a);
        let (c, n) = (phase.re, phase.im);
        let u = [s * c, s * n, -t];
        let ua = [-s * t * c, -s * t * n, -s * s];
        let up = [-s * n, s * c, 0.0];
        let comb = |da: f64, dp: f64| [ua[0] * da + up[0] * dp, ua[1] * da + up[1] * dp, ua[2] * da + up[2] * dp];
        Self { u, ux: comb(grad_a.re, grad_phi.re), uy: comb(grad_a.im, grad_phi.im) }
    }

    pub fn dirichlet_density(&self) -> f64 {
        dot(&self.ux, &self.ux) + dot(&self.uy, &self.uy)
    }

    /// `u . (u_x x u_y)`, the pullback of the area form.
    pub fn jacobian(&self) -> f64 {
        dot(&self.u, &cross(&self.ux, &self.uy))
    }

    /// Largest of `||u_x| - |u_y||` and `|<u_x, u_y>|`.
    pub fn conformality_defect(&self) -> f64 {
        let nx = dot(&self.ux, &self.ux).sqrt();
        let ny = dot(&self.uy, &self.uy).sqrt();
        (nx - ny).abs().max(dot(&self.ux, &self.uy).abs())
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Sampled sphere-valued map with quadrature weights for its domain.
#[derive(Debug, Clone)]
pub struct SphereField {
    pub jets: Vec<SphereJet>,
    pub weights: Vec<f64>,
}

impl SphereField {
    /// Lift `pi^{-1}(e^{a} g)` of a disk map on the grid of `parts`.
    pub fn from_map(map: &SingularMap, parts: &HodgeParts) -> Result<Self> {
        let jets: Vec<SphereJet> = parts.grid.sample(|z| map_jet(map, parts, z)).into_iter().collect::<Result<_>>()?;
        Ok(Self { jets, weights: parts.grid.weights().to_vec() })
    }

    /// Lift of `w = prod (z - p_j) / prod (z - q_j)` on the disk of radius
    /// `radius`, sampled on an `n_radial x n_theta` polar grid.
    pub fn meromorphic(
        zeros: &[Complex64],
        poles: &[Complex64],
        radius: f64,
        n_radial: usize,
        n_theta: usize,
    ) -> Result<Self> {
        let centers: Vec<Complex64> = zeros.iter().chain(poles).map(|p| p / radius).collect();
        let grid = build_polar_grid(n_radial, n_theta, &centers)?;
        let jets = grid.sample(|zeta| {
            let z = zeta * radius;
            let mut a = 0.0;
            let mut phase = Complex64::new(1.0, 0.0);
            let mut log_deriv = Complex64::new(0.0, 0.0);
            for (pts, sign) in [(zeros, 1.0), (poles, -1.0)] {
                for p in pts {
                    let d = z - p;
                    a += sign * d.norm().ln();
                    let unit = d / d.norm();
                    phase *= if sign > 0.0 { unit } else { unit.conj() };
                    log_deriv += sign / d;
                }
            }
            let grad_a = log_deriv.conj();
            SphereJet::from_polar(a, grad_a, phase / phase.norm(), Complex64::new(0.0, 1.0) * grad_a)
        });
        let scale = radius * radius;
        Ok(Self { jets, weights: grid.weights().iter().map(|w| w * scale).collect() })
    }

    /// `(1/4) int |grad u|^2`.
    pub fn quarter_dirichlet(&self) -> f64 {
        0.25 * compensated_sum(self.jets.iter().zip(&self.weights).map(|(j, w)| w * j.dirichlet_density()))
    }

    pub fn max_unit_defect(&self) -> f64 {
        self.jets.iter().map(|j| (dot(&j.u, &j.u).sqrt() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn map_jet(map: &SingularMap, parts: &HodgeParts, z: Complex64) -> Result<SphereJet> {
    let (a, ga) = parts.a_value_gradient(z)?;
    let g = map.eval(z)?;
    let conn = map.connection_unchecked(z);
    Ok(SphereJet::from_polar(a, ga, g, conn))
}

/// Terms of the renormalized energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `int f(a) (|grad g|^2 + |grad a|^2)`.
    pub weighted_term: f64,
    /// `(1/4) int |grad b|^2`.
    pub b_term: f64,
    /// `(1/4) int |h|^2`, zero on the disk.
    pub h_term: f64,
    /// `(1/4) int |grad u|^2` through the lift.
    pub lift_term: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// `|lift_term + b_term + h_term - total|`: both routes to the weighted
    /// integral must agree.
    pub fn consistency_defect(&self) -> f64 {
        (self.lift_term + self.b_term + self.h_term - self.total).abs()
    }
}

pub fn renormalized_energy(map: &SingularMap, parts: &HodgeParts) -> Result<EnergyBreakdown> {
    let rows: Vec<[f64; 3]> = parts
        .grid
        .sample(|z| {
            let (a, ga) = parts.a_value_gradient(z)?;
            let g = map.eval(z)?;
            let conn = map.connection_unchecked(z);
            let gb = parts.b_gradient(z);
            let jet = SphereJet::from_polar(a, ga, g, conn);
            Ok([weight_f(a) * (conn.norm_sqr() + ga.norm_sqr()), 0.25 * gb.norm_sqr(), 0.25 * jet.dirichlet_density()])
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let w = parts.grid.weights();
    let sum = |col: usize| compensated_sum(rows.iter().zip(w).map(|(r, wi)| r[col] * wi));
    let (weighted_term, b_term, lift_term) = (sum(0), sum(1), sum(2));
    Ok(EnergyBreakdown { weighted_term, b_term, h_term: 0.0, lift_term, total: weighted_term + b_term })
}

/// `int f(a) |grad a|^2`.
pub fn weighted_gradient_term(parts: &HodgeParts) -> f64 {
    parts.grid.integrate(|z| {
        let (a, ga) = parts.a_unchecked(z);
        weight_f(a) * ga.norm_sqr()
    })
}

/// `int |grad arctan e^{a}|^2` through the chain rule
/// `grad arctan e^{a} = (sech a / 2) grad a`.
pub fn arctan_term(parts: &HodgeParts) -> f64 {
    parts.grid.integrate(|z| {
        let (a, ga) = parts.a_unchecked(z);
        let (s, _) = sech_tanh(a);
        (0.5 * s * ga).norm_sqr()
    })
}

/// Default resolution for plane truncations.
pub const PLANE_RESOLUTION: (usize, usize) = (128, 256);

/// `(1/4) int_{|z| < R} |grad u|^2` for the lift of `prod (z - p_j)/(z - q_j)`,
/// using the pullback `2 f(log|w|) |w'/w|^2`.
pub fn plane_energy(zeros: &[Complex64], poles: &[Complex64], radius: f64) -> Result<f64> {
    plane_energy_at(zeros, poles, radius, PLANE_RESOLUTION.0, PLANE_RESOLUTION.1)
}

pub fn plane_energy_at(
    zeros: &[Complex64],
    poles: &[Complex64],
    radius: f64,
    n_radial: usize,
    n_theta: usize,
) -> Result<f64> {
    check_plane(zeros, poles, radius)?;
    let centers: Vec<Complex64> = zeros.iter().chain(poles).map(|p| p / radius).collect();
    let grid = build_polar_grid(n_radial, n_theta, &centers)?;
    let inner = grid.integrate(|zeta| {
        let z = zeta * radius;
        let mut a = 0.0;
        let mut l = Complex64::new(0.0, 0.0);
        for p in zeros {
            a += (z - p).norm().ln();
            l += 1.0 / (z - p);
        }
        for q in poles {
            a -= (z - q).norm().ln();
            l -= 1.0 / (z - q);
        }
        2.0 * weight_f(a) * l.norm_sqr()
    });
    Ok(inner * radius * radius)
}

fn check_plane(zeros: &[Complex64], poles: &[Complex64], radius: f64) -> Result<()> {
    if zeros.len() != poles.len() {
        return Err(Error::Precondition(format!(
            "plane maps need as many zeros as poles ({} vs {})",
            zeros.len(),
            poles.len()
        )));
    }
    let reach = zeros.iter().chain(poles).map(|p| p.norm()).fold(0.0, f64::max);
    if !radius.is_finite() || radius < 4.0 * reach {
        return Err(Error::Precondition(format!("truncation radius {radius} must be at least 4 x {reach}")));
    }
    Ok(())
}

/// Topological degree of a sphere-valued map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftDegree {
    pub raw: f64,
    pub rounded: i64,
    /// Set when `raw` is more than 0.1 away from `rounded`.
    pub ambiguous: bool,
}

/// `(1/4 pi) int u . (u_x x u_y)`.
pub fn lift_degree(u: &SphereField) -> LiftDegree {
    let raw = compensated_sum(u.jets.iter().zip(&u.weights).map(|(j, w)| w * j.jacobian())) / (4.0 * PI);
    let rounded = raw.round() as i64;
    LiftDegree { raw, rounded, ambiguous: (raw - rounded as f64).abs() > 0.1 }
}

/// Outcome of replacing `g` by `g e^{-ib}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeReport {
    pub energy_before: f64,
    pub energy_after: f64,
    /// `int (f(a) + 1/4) |grad b|^2`.
    pub correction: f64,
    /// `|energy_before - energy_after - correction|`.
    pub residual: f64,
    /// `int |grad b|^2`.
    pub b_dirichlet: f64,
}

/// Removes the exact part: the projected map keeps the vortices and takes
/// the harmonic extension of the phase trace as its phase.
pub fn gauge_project(map: &SingularMap, parts: &HodgeParts) -> Result<(SingularMap, GaugeReport)> {
    let projected = project_map(map, parts)?;
    let before = renormalized_energy(map, parts)?;
    let projected_parts = decompose(&projected, parts.grid.clone())?;
    let after = renormalized_energy(&projected, &projected_parts)?;
    let rows: Vec<(f64, f64)> = parts.grid.sample(|z| {
        let (a, _) = parts.a_unchecked(z);
        let gb = parts.b_gradient(z).norm_sqr();
        ((weight_f(a) + 0.25) * gb, gb)
    });
    let w = parts.grid.weights();
    let correction = compensated_sum(rows.iter().zip(w).map(|(r, wi)| r.0 * wi));
    let b_dirichlet = compensated_sum(rows.iter().zip(w).map(|(r, wi)| r.1 * wi));
    Ok((
        projected,
        GaugeReport {
            energy_before: before.total,
            energy_after: after.total,
            correction,
            residual: (before.total - after.total - correction).abs(),
            b_dirichlet,
        },
    ))
}

fn project_map(map: &SingularMap, parts: &HodgeParts) -> Result<SingularMap> {
    let h0: &HarmonicField = parts.trace_extension();
    if h0.bandwidth() == 0 && h0.constant() == 0.0 {
        return Ok(SingularMap::new(map.vortices.clone(), SmoothPhase::zero()));
    }
    let n = (4 * h0.bandwidth()).max(64).next_power_of_two();
    let phase = SmoothPhase::zero().with_boundary_phase(h0.boundary_samples(n)?)?;
    Ok(SingularMap::new(map.vortices.clone(), phase))
}

/// Largest boundary value of a test phase that still counts as zero trace.
const TRACE_TOLERANCE: f64 = 1e-10;

fn check_trace(test: &SmoothPhase) -> Result<()> {
    let max_trace =
        (0..256).map(|j| test.value(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 256.0)).abs()).fold(0.0, f64::max);
    if max_trace > TRACE_TOLERANCE {
        return Err(Error::NonZeroTrace { max_trace });
    }
    Ok(())
}

/// `d/dt E(g e^{it psi})` at `t = 0`:
/// `int 2 f(a) <A, grad psi> + (1/2) <grad b, grad psi>`.
pub fn first_variation(map: &SingularMap, parts: &HodgeParts, test: &SmoothPhase) -> Result<f64> {
    check_trace(test)?;
    if test.is_zero() {
        return Ok(0.0);
    }
    let values: Vec<f64> = parts
        .grid
        .sample(|z| {
            let (a, _) = parts.a_value_gradient(z)?;
            let conn = map.connection_unchecked(z);
            let gt = test.gradient(z);
            let gb = parts.b_gradient(z);
            Ok(2.0 * weight_f(a) * inner(conn, gt) + 0.5 * inner(gb, gt))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(parts.grid.integrate_values(&values))
}

fn inner(u: Complex64, v: Complex64) -> f64 {
    u.re * v.re + u.im * v.im
}

/// Centered difference `(E(g e^{i h psi}) - E(g e^{-i h psi})) / 2h`.
pub fn first_variation_fd(map: &SingularMap, test: &SmoothPhase, grid: Arc<PolarGrid>, step: f64) -> Result<f64> {
    let energy = |t: f64| -> Result<f64> {
        let phase = map.phase.add_scaled(test, t)?;
        let moved = SingularMap::new(map.vortices.clone(), phase);
        let parts = decompose(&moved, grid.clone())?;
        Ok(renormalized_energy(&moved, &parts)?.total)
    };
    Ok((energy(step)? - energy(-step)?) / (2.0 * step))
}

/// Zero-trace test phases `(1 - x^2 - y^2) x^m y^n`, ordered by total degree
/// of `x^m y^n` and then by decreasing `m`.
pub fn el_test_basis(count: usize) -> Vec<SmoothPhase> {
    let mut out = Vec::with_capacity(count);
    'outer: for deg in 0u32.. {
        for n in 0..=deg {
            if out.len() == count {
                break 'outer;
            }
            let m = deg - n;
            let terms = vec![PhaseTerm::new(1.0, m, n), PhaseTerm::new(-1.0, m + 2, n), PhaseTerm::new(-1.0, m, n + 2)];
            out.push(SmoothPhase::polynomial_with_cap(terms, deg + 2).expect("finite coefficients"));
        }
    }
    out
}

/// Default size of the test basis: all `x^m y^n` with `m + n <= 4`.
pub const EL_BASIS_SIZE: usize = 15;

/// Largest first variation over the first `count` test phases.
pub fn el_residual(map: &SingularMap, parts: &HodgeParts, count: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for test in el_test_basis(count) {
        worst = worst.max(first_variation(map, parts, &test)?.abs());
    }
    Ok(worst)
}

/// Largest conformality defect of the lift over nodes away from vortices.
pub fn conformality_defect(map: &SingularMap, parts: &HodgeParts) -> f64 {
    node_max(map, parts, |jet, _, _, _| jet.conformality_defect())
}

/// Largest `|dbar(e^{a} g)| / |e^{a} g| = |(a_x - A_y) + i (a_y + A_x)| / 2`
/// over nodes away from vortices.
pub fn dbar_residual(map: &SingularMap, parts: &HodgeParts) -> f64 {
    node_max(map, parts, |_, _, ga, conn| 0.5 * Complex64::new(ga.re - conn.im, ga.im + conn.re).norm())
}

fn node_max(
    map: &SingularMap,
    parts: &HodgeParts,
    f: impl Fn(&SphereJet, f64, Complex64, Complex64) -> f64 + Sync + Send,
) -> f64 {
    parts
        .grid
        .sample(|z| {
            if parts.vortices().distance_to(z) < RESIDUAL_EXCLUSION {
                return 0.0;
            }
            let (a, ga) = parts.a_unchecked(z);
            let conn = map.connection_unchecked(z);
            let g = map.eval(z).unwrap_or(Complex64::new(1.0, 0.0));
            f(&SphereJet::from_polar(a, ga, g, conn), a, ga, conn)
        })
        .into_iter()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Vortex, VortexConfig};

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    const SINGLE: f64 = 4.593376519935639;

    fn grid(centers: &[Complex64]) -> Arc<PolarGrid> {
        Arc::new(build_polar_grid(128, 256, centers).unwrap())
    }

    fn r2(coef: f64) -> SmoothPhase {
        SmoothPhase::polynomial(vec![PhaseTerm::new(coef, 2, 0), PhaseTerm::new(coef, 0, 2)]).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_f(0.0), 0.25);
        assert_eq!(antiderivative_f(0.0), -0.25);
        let total = antiderivative_f(60.0) - antiderivative_f(-60.0);
        assert!((total - 0.5).abs() < 1e-10);
        let far = weight_f(50.0);
        assert!(far.is_finite() && (far / (-100.0f64).exp() - 1.0).abs() < 1e-12);
        assert!(weight_f(-800.0) >= 0.0 && antiderivative_f(800.0) == 0.0 && antiderivative_f(-800.0) == -0.5);
    }

    #[test]
    fn antiderivative_is_consistent() {
        for &t in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            let h = 1e-5;
            let d = (antiderivative_f(t + h) - antiderivative_f(t - h)) / (2.0 * h);
            assert!((d - weight_f(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_inverts_distribution() {
        for &u in &[0.1, 0.5, 0.93] {
            let t = weight_quantile(u);
            assert!((2.0 * (antiderivative_f(t) + 0.5) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn single_vortex_energy() {
        let map = SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1).unwrap(), SmoothPhase::zero());
        let parts = decompose(&map, grid(&[c(0.0, 0.0)])).unwrap();
        let e = renormalized_energy(&map, &parts).unwrap();
        assert!((e.total - SINGLE).abs() < 1e-4, "total {}", e.total);
        assert!(e.consistency_defect() < 1e-10);
        assert!((weighted_gradient_term(&parts) - SINGLE / 2.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_phase_energy() {
        let map = SingularMap::new(VortexConfig::empty(), r2(1.0));
        let parts = decompose(&map, grid(&[])).unwrap();
        let e = renormalized_energy(&map, &parts).unwrap();
        assert!((e.weighted_term - PI / 2.0).abs() < 1e-8);
        assert!((e.b_term - PI / 2.0).abs() < 1e-8);
        assert!((e.total - PI).abs() < 1e-8);
        assert_eq!(
            renormalized_energy(&SingularMap::constant(), &decompose(&SingularMap::constant(), grid(&[])).unwrap())
                .unwrap()
                .total,
            0.0
        );
    }

    #[test]
    fn gauge_projection_examples() {
        let map = SingularMap::new(VortexConfig::empty(), r2(1.0));
        let parts = decompose(&map, grid(&[])).unwrap();
        let (proj, rep) = gauge_project(&map, &parts).unwrap();
        assert!(rep.energy_after.abs() < 1e-12);
        assert!(rep.residual < 1e-8);
        assert!((proj.eval(c(0.3, 0.1)).unwrap() - Complex64::from_polar(1.0, 1.0)).norm() < 1e-12);

        let map = SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1).unwrap(), r2(1.0));
        let parts = decompose(&map, grid(&[c(0.0, 0.0)])).unwrap();
        let (_, rep) = gauge_project(&map, &parts).unwrap();
        assert!((rep.energy_after - SINGLE).abs() < 1e-4);
        assert!(rep.residual < 1e-4, "residual {}", rep.residual);
        assert!(rep.energy_after <= rep.energy_before + 1e-8);
    }

    #[test]
    fn first_variation_examples() {
        let g = grid(&[]);
        let map = SingularMap::new(VortexConfig::empty(), r2(1.0));
        let parts = decompose(&map, g.clone()).unwrap();
        let test = SmoothPhase::polynomial(vec![
            PhaseTerm::new(1.0, 0, 0),
            PhaseTerm::new(-1.0, 2, 0),
            PhaseTerm::new(-1.0, 0, 2),
        ])
        .unwrap();
        let fv = first_variation(&map, &parts, &test).unwrap();
        let fd = first_variation_fd(&map, &test, g.clone(), 1e-4).unwrap();
        assert!(fv.abs() > 0.1);
        assert!(((fv - fd) / fd).abs() < 1e-5, "{fv} vs {fd}");
        assert_eq!(first_variation(&map, &parts, &SmoothPhase::zero()).unwrap(), 0.0);
        let bad = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 1, 0)]).unwrap();
        assert!(matches!(first_variation(&map, &parts, &bad), Err(Error::NonZeroTrace { .. })));
        assert!(el_residual(&map, &parts, EL_BASIS_SIZE).unwrap() > 0.1);
    }

    #[test]
    fn identity_map_is_critical_and_conformal() {
        let map = SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1).unwrap(), SmoothPhase::zero());
        let parts = decompose(&map, grid(&[c(0.0, 0.0)])).unwrap();
        assert!(el_residual(&map, &parts, EL_BASIS_SIZE).unwrap() < 1e-6);
        assert!(conformality_defect(&map, &parts) < 1e-10);
        assert!(dbar_residual(&map, &parts) < 1e-12);
    }

    #[test]
    fn basis_functions_vanish_on_circle() {
        let basis = el_test_basis(EL_BASIS_SIZE);
        assert_eq!(basis.len(), EL_BASIS_SIZE);
        for b in &basis {
            assert!(check_trace(b).is_ok());
        }
    }

    #[test]
    fn blaschke_plane_energy_and_degree() {
        let e = plane_energy(&[c(0.3, 0.0)], &[c(-0.3, 0.0)], 20.0).unwrap();
        assert!((e / (2.0 * PI) - 1.0).abs() < 0.01, "energy {e}");
        let u = SphereField::meromorphic(&[c(0.3, 0.0)], &[c(-0.3, 0.0)], 20.0, 128, 256).unwrap();
        let d = lift_degree(&u);
        assert_eq!(d.rounded, 1);
        assert!((d.raw - 1.0).abs() < 0.02);
        assert!(u.max_unit_defect() < 1e-12);
        assert!((u.quarter_dirichlet() - e).abs() < 1e-8);
        let e40 = plane_energy(&[c(0.3, 0.0)], &[c(-0.3, 0.0)], 40.0).unwrap();
        assert!(e < e40 && e40 < 2.0 * PI);
        assert!(plane_energy(&[c(0.3, 0.0)], &[c(-0.3, 0.0)], 1.0).is_err());
    }

    #[test]
    fn lift_of_constant_has_degree_zero() {
        let map = SingularMap::constant();
        let parts = decompose(&map, grid(&[])).unwrap();
        let u = SphereField::from_map(&map, &parts).unwrap();
        assert_eq!(lift_degree(&u).rounded, 0);
        assert_eq!(lift_degree(&u).raw, 0.0);
    }

    #[test]
    fn mixed_map_routes_agree() {
        let v = VortexConfig::new(vec![Vortex::new(0.3, 0.2, 1), Vortex::new(-0.4, -0.1, -1)]).unwrap();
        let phase = SmoothPhase::polynomial(vec![PhaseTerm::new(0.6, 2, 1), PhaseTerm::new(0.3, 1, 0)]).unwrap();
        let map = SingularMap::new(v.clone(), phase);
        let parts = decompose(&map, grid(&v.positions())).unwrap();
        let e = renormalized_energy(&map, &parts).unwrap();
        assert!(e.consistency_defect() / e.total.max(1.0) < 1e-10);
        let arctan = arctan_term(&parts);
        let direct = weighted_gradient_term(&parts);
        assert!((arctan - direct).abs() / e.total < 1e-12);
    }
}

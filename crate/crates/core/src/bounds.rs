//! Quantitative estimates: vortex count, level-set flux, weak-L2 size,
//! the extension operator and stability under vortex displacement.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::energy::{renormalized_energy, weighted_gradient_term};
use crate::error::{Error, Result};
use crate::grid::{build_polar_grid, compensated_sum, BoundarySignal, PolarGrid};
use crate::hodge::{decompose, BoundaryDatum, HodgeParts};
use crate::maps::{boundary_lift, SingularMap, SmoothPhase, Vortex, VortexConfig, BOUNDARY_TOLERANCE};

/// Relative slack allowed before an inequality is declared violated.
const BOUND_TOLERANCE: f64 = 1e-9;

/// One instance of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    pub context: String,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64, context: impl Into<String>) -> Self {
        let holds = lhs <= rhs + BOUND_TOLERANCE * rhs.abs().max(1.0);
        Self { lhs, rhs, holds, slack: rhs - lhs, context: context.into() }
    }
}

/// Both vortex-count inequalities for the decomposition of a map with
/// boundary trace `g0`.
///
/// The positive-charge form is
/// `pi sum_{int, d>0} d + (pi/2) sum_{bdy, d>0} d <= |d_theta g0|_1 / 2 + int f(a)|grad a|^2`.
/// The total-charge form uses `3/(2 pi)` and `2/pi` as constants when every
/// vortex is interior, and `3/pi`, `4/pi` otherwise.
pub fn vortex_count_bound(parts: &HodgeParts, g0: &BoundarySignal) -> Result<(BoundReport, BoundReport)> {
    let tv = boundary_lift(g0)?.total_variation;
    let energy = weighted_gradient_term(parts);
    let v = parts.vortices();
    let pos_int: f64 = v.interior().filter(|v| v.charge > 0).map(|v| v.charge as f64).sum();
    let pos_bdy: f64 = v.boundary().filter(|v| v.charge > 0).map(|v| v.charge as f64).sum();
    let abs_total: f64 = v.entries().iter().map(|v| v.charge.unsigned_abs() as f64).sum();
    let positive = BoundReport::new(
        PI * pos_int + 0.5 * PI * pos_bdy,
        0.5 * tv + energy,
        "positive charges vs boundary variation and weighted gradient energy",
    );
    let (c_tv, c_e) = if v.boundary().next().is_some() { (3.0 / PI, 4.0 / PI) } else { (1.5 / PI, 2.0 / PI) };
    let total = BoundReport::new(
        abs_total,
        c_tv * tv + c_e * energy,
        "total |charge| vs boundary variation and weighted gradient energy",
    );
    Ok((positive, total))
}

/// Flux of `grad a` through a level set together with the boundary-and-charge
/// value it must equal.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxReport {
    pub level: f64,
    /// `int_{a = t} |grad a|`.
    pub flux: f64,
    /// `2 pi sum_{d>0} d - int_{circle, a<t} lambda'`.
    pub claim_rhs: f64,
    pub segments: usize,
}

impl FluxReport {
    pub fn relative_gap(&self) -> f64 {
        (self.flux - self.claim_rhs).abs() / self.claim_rhs.abs().max(1e-12)
    }
}

/// Contours `a = t` by marching squares on the grid samples and integrates
/// `|grad a|` with the closed-form gradient at segment midpoints.
pub fn level_set_flux(parts: &HodgeParts, level: f64, g0: &BoundarySignal) -> Result<FluxReport> {
    let grid = &parts.grid;
    let values = parts.a.as_scalar().expect("a is scalar");
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if values.iter().any(|v| (v - level).abs() <= 1e-13 * scale) {
        return Err(non_regular(level, "a grid sample lies on the level"));
    }
    let nodes = grid.nodes();
    let (nr, nt) = (grid.n_radial(), grid.n_theta());
    let crossing = |i: usize, j: usize| -> Complex64 {
        let s = (level - values[i]) / (values[j] - values[i]);
        nodes[i] + s * (nodes[j] - nodes[i])
    };

    let mut segments: Vec<(Complex64, Complex64)> = Vec::new();
    for i in 0..nr - 1 {
        for k in 0..nt {
            let corners = [grid.index(i, k), grid.index(i + 1, k), grid.index(i + 1, k + 1), grid.index(i, k + 1)];
            let above: Vec<bool> = corners.iter().map(|&c| values[c] > level).collect();
            let mut cuts = Vec::with_capacity(4);
            for e in 0..4 {
                if above[e] != above[(e + 1) % 4] {
                    cuts.push((e, crossing(corners[e], corners[(e + 1) % 4])));
                }
            }
            match cuts.len() {
                0 => {}
                2 => segments.push((cuts[0].1, cuts[1].1)),
                4 => {
                    let mean = corners.iter().map(|&c| values[c]).sum::<f64>() / 4.0;
                    if (mean > level) == above[0] {
                        // Corners 1 and 3 are cut off.
                        segments.push((cuts[0].1, cuts[1].1));
                        segments.push((cuts[2].1, cuts[3].1));
                    } else {
                        segments.push((cuts[3].1, cuts[0].1));
                        segments.push((cuts[1].1, cuts[2].1));
                    }
                }
                _ => unreachable!("a quadrilateral has an even number of sign changes"),
            }
        }
    }

    let mut contributions = Vec::with_capacity(segments.len());
    for (p, q) in &segments {
        let mid = 0.5 * (p + q);
        let (_, grad) =
            parts.a_value_gradient(mid).map_err(|_| non_regular(level, "the level passes through a vortex"))?;
        let g = grad.norm();
        if g < 1e-10 {
            return Err(non_regular(level, "the gradient vanishes on the level"));
        }
        contributions.push(g * (q - p).norm());
    }
    let flux = compensated_sum(contributions);

    let positive: f64 = parts.vortices().entries().iter().filter(|v| v.charge > 0).map(|v| v.effective_charge()).sum();
    let boundary = boundary_flux_below(parts, level, g0)?;
    Ok(FluxReport { level, flux, claim_rhs: 2.0 * PI * positive - boundary, segments: segments.len() })
}

fn non_regular(level: f64, reason: &'static str) -> Error {
    Error::NonRegularLevel { level, suggestion: level + 1e-3, reason }
}

/// `int_{circle, a < t} lambda'`, with `a` and `lambda'` linear between samples.
fn boundary_flux_below(parts: &HodgeParts, level: f64, g0: &BoundarySignal) -> Result<f64> {
    let dlift = boundary_lift(g0)?.derivative()?;
    let n = g0.len();
    let a: Vec<f64> = (0..n)
        .map(|j| {
            let x = Complex64::from_polar(1.0, g0.theta(j));
            parts.a_value_gradient(x).map(|(v, _)| v).unwrap_or(f64::NEG_INFINITY)
        })
        .collect();
    let h = 2.0 * PI / n as f64;
    let pieces = (0..n).map(|j| {
        let (a0, a1) = (a[j] - level, a[(j + 1) % n] - level);
        let (l0, l1) = (dlift[j], dlift[(j + 1) % n]);
        // Portion [s0, s1] of the unit interval where a < t.
        let (s0, s1) = match (a0 < 0.0, a1 < 0.0) {
            (true, true) => (0.0, 1.0),
            (false, false) => return 0.0,
            (true, false) => (0.0, crossing_fraction(a0, a1)),
            (false, true) => (crossing_fraction(a0, a1), 1.0),
        };
        let lam = |s: f64| l0 + s * (l1 - l0);
        h * (s1 - s0) * 0.5 * (lam(s0) + lam(s1))
    });
    Ok(compensated_sum(pieces))
}

fn crossing_fraction(a0: f64, a1: f64) -> f64 {
    if a0.is_infinite() || a1.is_infinite() {
        return if a0.is_infinite() { 0.0 } else { 1.0 };
    }
    a0 / (a0 - a1)
}

/// Superlevel sets lighter than this many mean node weights are not
/// resolved by the quadrature and do not contribute candidate levels.
const RESOLVED_NODES: f64 = 64.0;

/// Discrete `sup_gamma gamma * |{v > gamma}|^{1/2}` for nonnegative samples
/// with quadrature weights.
///
/// Candidate levels are the midpoints between consecutive distinct sorted
/// values, plus the minimum value with the full measure. Levels whose
/// superlevel set weighs less than `RESOLVED_NODES` mean node weights are
/// skipped: there a single ring of nodes carries a weight unrelated to the
/// true measure, and the cutoff vanishes under refinement.
pub fn weak_l2_quasinorm(values: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.len(), "one weight per value");
    if values.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let total = compensated_sum(weights.iter().copied());
    let resolved = RESOLVED_NODES * total / values.len() as f64;
    let mut best = 0.0f64;
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for (rank, &i) in order.iter().enumerate() {
        let w = weights[i];
        let t = sum + w;
        carry += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
        sum = t;
        let level = match order.get(rank + 1) {
            Some(&next) if values[next] < values[i] => 0.5 * (values[i] + values[next]),
            Some(_) => continue,
            None => values[i],
        };
        let m = sum + carry;
        if m >= resolved || rank + 1 == order.len() {
            best = best.max(level.max(0.0) * m.max(0.0).sqrt());
        }
    }
    best
}

/// The competitor with one charge-`d` vortex at the origin whose phase is
/// the harmonic extension of the lift of `(z/|z|)^{-d} g0`.
pub fn extend_boundary(g0: &BoundarySignal, degree: i64) -> Result<SingularMap> {
    let lift = boundary_lift(g0)?;
    if lift.degree != degree {
        return Err(Error::DegreeMismatch { expected: degree, found: lift.degree });
    }
    let residual: Vec<f64> = lift.periodic_part()?.real_values().unwrap().to_vec();
    let phase = if residual.iter().all(|v| v.abs() < 1e-14) {
        SmoothPhase::zero()
    } else {
        SmoothPhase::zero().with_boundary_phase(BoundarySignal::from_real(residual)?)?
    };
    let vortices = if degree == 0 {
        VortexConfig::empty()
    } else {
        let charge = i32::try_from(degree).map_err(|_| Error::Precondition("degree out of range".into()))?;
        VortexConfig::single(Complex64::new(0.0, 0.0), charge)?
    };
    Ok(SingularMap::new(vortices, phase))
}

/// `(1/2) int |grad u|^2 <= (pi^2/2) |d_theta g0|_1 + 4 pi |d|` for the extension.
pub fn extension_energy_bound(g0: &BoundarySignal, degree: i64, grid: Arc<PolarGrid>) -> Result<BoundReport> {
    let map = extend_boundary(g0, degree)?;
    let parts = decompose(&map, grid)?;
    let energy = renormalized_energy(&map, &parts)?;
    let tv = boundary_lift(g0)?.total_variation;
    Ok(BoundReport::new(
        2.0 * energy.lift_term,
        0.5 * PI * PI * tv + 4.0 * PI * degree.unsigned_abs() as f64,
        "extension lift energy vs boundary variation and degree",
    ))
}

/// Energies along a displacement path with the boundary datum held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub positions: Vec<Complex64>,
    /// `int f(a_k) |grad a_k|^2` at every path point.
    pub energies: Vec<f64>,
    /// Same quantity for the limit configuration.
    pub limit_energy: f64,
    /// `|E_k - E_limit| / |E_limit|`.
    pub relative_gaps: Vec<f64>,
}

impl StabilityReport {
    pub fn final_gap(&self) -> f64 {
        self.relative_gaps.last().copied().unwrap_or(0.0)
    }
}

/// Moves vortex `index` of `base` along `path` and finally to `limit`.
///
/// A limit on the circle carries twice the moving charge, which keeps the
/// Neumann problem compatible. Each configuration is integrated on its own
/// grid refined at the vortex radii.
pub fn stability_sweep(
    base: &VortexConfig,
    index: usize,
    path: &[Complex64],
    limit: Complex64,
    g0: &BoundarySignal,
    resolution: (usize, usize),
) -> Result<StabilityReport> {
    let moving =
        *base.entries().get(index).ok_or_else(|| Error::Precondition(format!("no vortex with index {index}")))?;
    if moving.on_boundary() {
        return Err(Error::Precondition("the moving vortex must start in the interior".into()));
    }
    if let Some(p) = path.iter().chain(std::iter::once(&limit)).find(|p| p.norm() > 1.0 + BOUNDARY_TOLERANCE) {
        return Err(Error::Precondition(format!("path point {p} leaves the closed disk")));
    }
    if path.iter().any(|p| (1.0 - p.norm()).abs() <= BOUNDARY_TOLERANCE) {
        return Err(Error::Precondition("path points must be interior; pass the boundary point as the limit".into()));
    }
    let datum = BoundaryDatum::new(g0)?;
    let config_at = |p: Complex64, charge: i32| -> Result<VortexConfig> {
        let mut entries = base.entries().to_vec();
        entries[index] = Vortex { position: p, charge };
        VortexConfig::new(entries)
    };
    let energy_of = |config: VortexConfig| -> Result<f64> {
        let grid = build_polar_grid(resolution.0, resolution.1, &config.positions())?;
        let pot = datum.potential(config)?;
        Ok(grid.integrate(|z| pot.weighted_density(z)))
    };

    let energies: Vec<f64> = path.iter().map(|&p| energy_of(config_at(p, moving.charge)?)).collect::<Result<_>>()?;
    let limit_charge = if (1.0 - limit.norm()).abs() <= BOUNDARY_TOLERANCE { 2 * moving.charge } else { moving.charge };
    let limit_energy = energy_of(config_at(limit, limit_charge)?)?;
    let relative_gaps = energies.iter().map(|e| (e - limit_energy).abs() / limit_energy.abs().max(1e-300)).collect();
    Ok(StabilityReport { positions: path.to_vec(), energies, limit_energy, relative_gaps })
}

//! Circle-valued maps on the disk with finitely many point singularities.
//!
//! A map is `g(z) = prod_i ((z - p_i)/|z - p_i|)^{d_i} e^{i psi(z)}` where
//! the charge `d_i` is the winding of `g` around `p_i`. Gradients are
//! carried as complex numbers: the vector `(u, v)` is `u + iv`, so that
//! rotation by a quarter turn is multiplication by `i`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{BoundarySignal, PolarGrid};
use crate::hodge::HarmonicField;

/// Interior vortices closer than this are considered coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-10;
/// Points with `|1 - |p|| <= BOUNDARY_TOLERANCE` sit on the circle.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;
/// Default cap on the total degree of polynomial phases.
pub const DEFAULT_DEGREE_CAP: u32 = 8;
/// Queries closer than this to a vortex are rejected.
const EVALUATION_EXCLUSION: f64 = 1e-13;
/// Arg increments at least this large cannot be unwrapped unambiguously.
const RESOLVABLE_STEP: f64 = PI - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub position: Complex64,
    pub charge: i32,
}

impl Vortex {
    pub fn new(x: f64, y: f64, charge: i32) -> Self {
        Self { position: Complex64::new(x, y), charge }
    }

    pub fn on_boundary(&self) -> bool {
        (1.0 - self.position.norm()).abs() <= BOUNDARY_TOLERANCE
    }

    /// Weight of the vortex in the Neumann problem: the charge itself in
    /// the interior, half of it on the circle.
    pub fn effective_charge(&self) -> f64 {
        if self.on_boundary() {
            0.5 * self.charge as f64
        } else {
            self.charge as f64
        }
    }
}

/// A validated list of vortices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VortexConfig {
    entries: Vec<Vortex>,
}

impl VortexConfig {
    pub fn new(entries: Vec<Vortex>) -> Result<Self> {
        for (i, v) in entries.iter().enumerate() {
            if v.charge == 0 {
                return Err(Error::InvalidConfiguration(format!("vortex {i}: charge must be a nonzero integer")));
            }
            if !(v.position.re.is_finite() && v.position.im.is_finite()) {
                return Err(Error::InvalidConfiguration(format!("vortex {i}: non-finite position")));
            }
            if v.position.norm() > 1.0 + BOUNDARY_TOLERANCE {
                return Err(Error::InvalidConfiguration(format!("vortex {i}: position outside the closed unit disk")));
            }
            if v.on_boundary() && v.charge % 2 != 0 {
                return Err(Error::InvalidConfiguration(format!(
                    "vortex {i}: boundary vortices must carry an even charge, got {}",
                    v.charge
                )));
            }
            for (j, w) in entries[..i].iter().enumerate() {
                if (v.position - w.position).norm() <= COINCIDENCE_TOLERANCE {
                    return Err(Error::InvalidConfiguration(format!("vortices {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(position: Complex64, charge: i32) -> Result<Self> {
        Self::new(vec![Vortex { position, charge }])
    }

    pub fn entries(&self) -> &[Vortex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> Vec<Complex64> {
        self.entries.iter().map(|v| v.position).collect()
    }

    pub fn interior(&self) -> impl Iterator<Item = &Vortex> {
        self.entries.iter().filter(|v| !v.on_boundary())
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Vortex> {
        self.entries.iter().filter(|v| v.on_boundary())
    }

    /// Interior charges plus half the boundary charges.
    pub fn total_charge(&self) -> i64 {
        let interior: i64 = self.interior().map(|v| v.charge as i64).sum();
        let boundary: i64 = self.boundary().map(|v| v.charge as i64).sum();
        interior + boundary / 2
    }

    /// Distance from `z` to the nearest vortex, infinite when there is none.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.entries.iter().map(|v| (z - v.position).norm()).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_query(&self, z: Complex64) -> Result<()> {
        if self.distance_to(z) <= EVALUATION_EXCLUSION {
            return Err(Error::Domain { x: z.re, y: z.im, reason: "query point is a vortex" });
        }
        Ok(())
    }
}

/// One monomial `coefficient * x^mx * y^ny`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTerm {
    pub coefficient: f64,
    pub mx: u32,
    pub ny: u32,
}

impl PhaseTerm {
    pub fn new(coefficient: f64, mx: u32, ny: u32) -> Self {
        Self { coefficient, mx, ny }
    }

    pub fn degree(&self) -> u32 {
        self.mx + self.ny
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        self.coefficient * x.powi(self.mx as i32) * y.powi(self.ny as i32)
    }

    fn gradient(&self, x: f64, y: f64) -> Complex64 {
        let (m, n) = (self.mx as i32, self.ny as i32);
        let gx = if m > 0 { m as f64 * x.powi(m - 1) * y.powi(n) } else { 0.0 };
        let gy = if n > 0 { n as f64 * x.powi(m) * y.powi(n - 1) } else { 0.0 };
        Complex64::new(gx, gy) * self.coefficient
    }

    fn laplacian(&self, x: f64, y: f64) -> f64 {
        let (m, n) = (self.mx as i32, self.ny as i32);
        let lxx = if m > 1 { (m * (m - 1)) as f64 * x.powi(m - 2) * y.powi(n) } else { 0.0 };
        let lyy = if n > 1 { (n * (n - 1)) as f64 * x.powi(m) * y.powi(n - 2) } else { 0.0 };
        self.coefficient * (lxx + lyy)
    }
}

/// Smooth real phase: a polynomial plus an optional harmonic part given by
/// its boundary values.
#[derive(Debug, Clone)]
pub struct SmoothPhase {
    terms: Vec<PhaseTerm>,
    boundary_phase: Option<(BoundarySignal, HarmonicField)>,
}

impl Default for SmoothPhase {
    fn default() -> Self {
        Self::zero()
    }
}

impl SmoothPhase {
    pub fn zero() -> Self {
        Self { terms: Vec::new(), boundary_phase: None }
    }

    pub fn polynomial(terms: Vec<PhaseTerm>) -> Result<Self> {
        Self::polynomial_with_cap(terms, DEFAULT_DEGREE_CAP)
    }

    pub fn polynomial_with_cap(terms: Vec<PhaseTerm>, cap: u32) -> Result<Self> {
        for t in &terms {
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidPhase("non-finite coefficient".into()));
            }
            if t.degree() > cap {
                return Err(Error::InvalidPhase(format!("term x^{} y^{} exceeds the degree cap {cap}", t.mx, t.ny)));
            }
        }
        let terms = terms.into_iter().filter(|t| t.coefficient != 0.0).collect();
        Ok(Self { terms, boundary_phase: None })
    }

    /// `Re(c z^k)` expanded into monomials.
    pub fn complex_monomial(c: Complex64, k: u32) -> Result<Self> {
        let mut terms = Vec::new();
        let mut binom = 1.0;
        for j in 0..=k {
            // i^j
            let ij = match j % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            let coef = (c * ij).re * binom;
            if coef != 0.0 {
                terms.push(PhaseTerm::new(coef, k - j, j));
            }
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        Self::polynomial(terms)
    }

    /// Attaches a harmonic part whose trace is the given real signal.
    pub fn with_boundary_phase(mut self, signal: BoundarySignal) -> Result<Self> {
        let field = HarmonicField::from_boundary(&signal)?;
        self.boundary_phase = Some((signal, field));
        Ok(self)
    }

    pub fn terms(&self) -> &[PhaseTerm] {
        &self.terms
    }

    pub fn boundary_phase(&self) -> Option<&BoundarySignal> {
        self.boundary_phase.as_ref().map(|(s, _)| s)
    }

    pub fn harmonic_part(&self) -> Option<&HarmonicField> {
        self.boundary_phase.as_ref().map(|(_, h)| h)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(PhaseTerm::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.boundary_phase.is_none()
    }

    pub fn polynomial_value(&self, z: Complex64) -> f64 {
        self.terms.iter().map(|t| t.value(z.re, z.im)).sum()
    }

    pub fn polynomial_gradient(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.gradient(z.re, z.im)).sum()
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.polynomial_value(z) + self.harmonic_part().map_or(0.0, |h| h.value(z))
    }

    pub fn gradient(&self, z: Complex64) -> Complex64 {
        self.polynomial_gradient(z) + self.harmonic_part().map_or(Complex64::new(0.0, 0.0), |h| h.gradient(z))
    }

    /// Laplacian; the boundary-phase part is harmonic and contributes nothing.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        self.terms.iter().map(|t| t.laplacian(z.re, z.im)).sum()
    }

    /// `self + t * other`. Boundary phases are summed sample-wise and must
    /// then share a sample count.
    pub fn add_scaled(&self, other: &SmoothPhase, t: f64) -> Result<SmoothPhase> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|p| PhaseTerm::new(t * p.coefficient, p.mx, p.ny)));
        let cap = self.degree().max(other.degree()).max(DEFAULT_DEGREE_CAP);
        let mut out = SmoothPhase::polynomial_with_cap(terms, cap)?;
        let signal = match (self.boundary_phase(), other.boundary_phase()) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(scaled_signal(b, t)?),
            (Some(a), Some(b)) => {
                let (av, bv) = (a.real_values().unwrap(), b.real_values().unwrap());
                if av.len() != bv.len() {
                    return Err(Error::InvalidPhase("boundary phases differ in sample count".into()));
                }
                Some(BoundarySignal::from_real(av.iter().zip(bv).map(|(x, y)| x + t * y).collect())?)
            }
        };
        if let Some(s) = signal {
            out = out.with_boundary_phase(s)?;
        }
        Ok(out)
    }
}

fn scaled_signal(s: &BoundarySignal, t: f64) -> Result<BoundarySignal> {
    BoundarySignal::from_real(s.real_values().unwrap().iter().map(|v| t * v).collect())
}

/// `g = prod_i ((z - p_i)/|z - p_i|)^{d_i} e^{i psi}`.
#[derive(Debug, Clone)]
pub struct SingularMap {
    pub vortices: VortexConfig,
    pub phase: SmoothPhase,
}

impl SingularMap {
    pub fn new(vortices: VortexConfig, phase: SmoothPhase) -> Self {
        Self { vortices, phase }
    }

    pub fn constant() -> Self {
        Self::new(VortexConfig::empty(), SmoothPhase::zero())
    }

    /// Total argument `sum_i d_i arg(z - p_i) + psi(z)`, unreduced.
    fn argument(&self, z: Complex64) -> f64 {
        let singular: f64 = self.vortices.entries().iter().map(|v| v.charge as f64 * (z - v.position).arg()).sum();
        singular + self.phase.value(z)
    }

    /// `g(z)`, exactly unit modulus up to rounding of `cis`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.vortices.check_query(z)?;
        let g = Complex64::from_polar(1.0, self.argument(z));
        Ok(g / g.norm())
    }

    /// Connection `A = -i g^{-1} grad g = sum_i d_i grad-perp log|z - p_i| + grad psi`.
    pub fn connection(&self, z: Complex64) -> Result<Complex64> {
        self.vortices.check_query(z)?;
        Ok(self.connection_unchecked(z))
    }

    pub(crate) fn connection_unchecked(&self, z: Complex64) -> Complex64 {
        let singular: Complex64 = self
            .vortices
            .entries()
            .iter()
            .map(|v| {
                let w = z - v.position;
                Complex64::new(0.0, v.charge as f64) * w / w.norm_sqr()
            })
            .sum();
        singular + self.phase.gradient(z)
    }

    /// `|grad g|^2 = |A|^2`.
    pub fn gradient_norm_sqr(&self, z: Complex64) -> Result<f64> {
        Ok(self.connection(z)?.norm_sqr())
    }

    /// Value on the unit circle at angle `theta`. At a boundary vortex the
    /// even charge makes the one-sided limits agree, and that limit is used.
    pub fn boundary_value(&self, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, theta);
        let mut arg = self.phase.value(z);
        for v in self.vortices.entries() {
            let w = z - v.position;
            let direction = if w.norm() <= EVALUATION_EXCLUSION { Complex64::new(0.0, 1.0) * z } else { w };
            arg += v.charge as f64 * direction.arg();
        }
        Complex64::from_polar(1.0, arg)
    }

    /// Boundary trace sampled at `n` uniform angles.
    pub fn trace(&self, n: usize) -> Result<BoundarySignal> {
        BoundarySignal::sample_unit(n, |t| self.boundary_value(t))
    }
}

/// Principal increment of the argument from `a` to `b`.
pub fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

/// Winding number of a closed loop of unit samples (last joins first).
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Precondition("winding number needs at least two samples".into()));
    }
    let mut total = 0.0;
    for j in 0..n {
        let step = phase_step(samples[j], samples[(j + 1) % n]);
        if step.abs() >= RESOLVABLE_STEP {
            return Err(Error::Unresolved { cell: j, step });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Lift of a boundary datum.
#[derive(Debug, Clone)]
pub struct BoundaryLift {
    /// `lambda` with `e^{i lambda(theta)} g0(0) = g0(theta)` and `lambda(0) = 0`.
    pub lift: BoundarySignal,
    pub degree: i64,
    /// Discrete total variation of the lift around the whole circle.
    pub total_variation: f64,
}

impl BoundaryLift {
    /// `lambda - degree * theta`, a periodic signal.
    pub fn periodic_part(&self) -> Result<BoundarySignal> {
        let lift = self.lift.real_values().expect("lift is real");
        let d = self.degree as f64;
        BoundarySignal::from_real(lift.iter().enumerate().map(|(j, l)| l - d * self.lift.theta(j)).collect())
    }

    /// Spectral `lambda'` at the sample angles.
    pub fn derivative(&self) -> Result<Vec<f64>> {
        let d = self.degree as f64;
        let p = self.periodic_part()?.derivative()?;
        Ok(p.real_values().unwrap().iter().map(|v| v + d).collect())
    }
}

pub fn boundary_lift(g0: &BoundarySignal) -> Result<BoundaryLift> {
    let samples =
        g0.unit_values().ok_or_else(|| Error::Precondition("boundary lift needs a unit-complex signal".into()))?;
    let n = samples.len();
    let mut lift = Vec::with_capacity(n);
    let start = samples.first().map_or(0.0, |u| u.arg());
    let mut acc = start;
    let mut tv = 0.0;
    for j in 0..n {
        // Unwrap each sample's own argument next to the running sum so the
        // lift re-exponentiates to machine precision.
        let own = samples[j].arg();
        lift.push(own + 2.0 * PI * ((acc - own) / (2.0 * PI)).round());
        let step = phase_step(samples[j], samples[(j + 1) % n]);
        if step.abs() >= RESOLVABLE_STEP {
            return Err(Error::Unresolved { cell: j, step });
        }
        acc += step;
        tv += step.abs();
    }
    let degree = ((acc - start) / (2.0 * PI)).round() as i64;
    Ok(BoundaryLift { lift: BoundarySignal::from_real(lift)?, degree, total_variation: tv })
}

/// Winding charge of every grid cell.
///
/// Cell `i * n_theta + k` is the quadrilateral between rings `i`, `i + 1`
/// and angles `k`, `k + 1`; the last index is the central cell inside ring 0.
#[derive(Debug, Clone)]
pub struct CellCharges {
    pub charges: Vec<i64>,
    pub n_theta: usize,
}

impl CellCharges {
    pub fn center_index(&self) -> usize {
        self.charges.len() - 1
    }
}

fn cell_charges(grid: &PolarGrid, edge: impl Fn(usize, usize) -> Result<f64>) -> Result<CellCharges> {
    let (nr, nt) = (grid.n_radial(), grid.n_theta());
    let mut charges = vec![0i64; (nr - 1) * nt + 1];
    for i in 0..nr - 1 {
        for k in 0..nt {
            let cell = i * nt + k;
            // Counterclockwise: outward, along the outer ring, inward, back.
            let corners = [grid.index(i, k), grid.index(i + 1, k), grid.index(i + 1, k + 1), grid.index(i, k + 1)];
            let mut total = 0.0;
            for e in 0..4 {
                total += edge(corners[e], corners[(e + 1) % 4]).map_err(|err| with_cell(err, cell))?;
            }
            charges[cell] = (total / (2.0 * PI)).round() as i64;
        }
    }
    let mut total = 0.0;
    for k in 0..nt {
        total += edge(grid.index(0, k), grid.index(0, k + 1)).map_err(|err| with_cell(err, (nr - 1) * nt))?;
    }
    charges[(nr - 1) * nt] = (total / (2.0 * PI)).round() as i64;
    Ok(CellCharges { charges, n_theta: nt })
}

fn with_cell(err: Error, cell: usize) -> Error {
    match err {
        Error::Unresolved { step, .. } => Error::Unresolved { cell, step },
        other => other,
    }
}

/// Locates vortices from map samples at the grid nodes (flat index order).
///
/// Nonzero cell charges are grouped into clusters of adjacent cells; each
/// cluster with nonzero net charge becomes a vortex at the charge-weighted
/// centroid of its cells.
pub fn detect_singularities(grid: &PolarGrid, samples: &[Complex64]) -> Result<VortexConfig> {
    if samples.len() != grid.len() {
        return Err(Error::Precondition(format!("expected {} samples, got {}", grid.len(), samples.len())));
    }
    let cells = cell_charges(grid, |a, b| {
        let step = phase_step(samples[a], samples[b]);
        if step.abs() < RESOLVABLE_STEP {
            Ok(step)
        } else if (step.abs() - PI).abs() < EDGE_VORTEX_TOLERANCE {
            Ok(on_edge_turn(a, b))
        } else {
            Err(Error::Unresolved { cell: 0, step })
        }
    })?;
    locate(grid, &cells)
}

/// Detection with access to the map itself: every edge increment is
/// computed by bisecting the edge until the halves agree with the whole, so
/// cells around vortices of any charge are resolved.
///
/// The grid must still resolve the smooth phase: an edge across which it
/// changes by half a turn or more is reported as unresolved.
pub fn detect_map(grid: &PolarGrid, map: &SingularMap) -> Result<VortexConfig> {
    let samples: Vec<Complex64> = grid.sample(|z| map.eval(z)).into_iter().collect::<Result<_>>()?;
    let nodes = grid.nodes();
    let smooth: Vec<f64> = grid.sample(|z| map.phase.value(z));
    let cells = cell_charges(grid, |a, b| {
        let dpsi = smooth[b] - smooth[a];
        if dpsi.abs() >= RESOLVABLE_STEP {
            return Err(Error::Unresolved { cell: 0, step: dpsi });
        }
        let step = edge_increment(map, (nodes[a], samples[a]), (nodes[b], samples[b]), 0)?;
        Ok(step.unwrap_or_else(|| on_edge_turn(a, b)))
    })?;
    locate(grid, &cells)
}

const MAX_EDGE_DEPTH: u32 = 24;
const EDGE_VORTEX_TOLERANCE: f64 = 1e-6;

/// Half turn across an edge that passes through an odd-charge vortex.
/// Orienting by node index gives the two adjacent cells opposite signs, so
/// the charge lands in exactly one of them.
fn on_edge_turn(a: usize, b: usize) -> f64 {
    if a < b {
        PI
    } else {
        -PI
    }
}

/// Phase increment of `map` along the segment between two sampled points.
///
/// `None` means the segment shrank onto an odd-charge vortex.
fn edge_increment(
    map: &SingularMap,
    (za, ga): (Complex64, Complex64),
    (zb, gb): (Complex64, Complex64),
    depth: u32,
) -> Result<Option<f64>> {
    let coarse = phase_step(ga, gb);
    let zm = 0.5 * (za + zb);
    let gm = match map.eval(zm) {
        Ok(g) => g,
        Err(_) if depth > 0 => return Ok(None),
        Err(e) => return Err(e),
    };
    let fine = phase_step(ga, gm) + phase_step(gm, gb);
    if coarse.abs() < 0.5 * PI && (fine - coarse).abs() <= 1e-9 {
        return Ok(Some(coarse));
    }
    if depth >= MAX_EDGE_DEPTH {
        if (fine.abs() - PI).abs() < EDGE_VORTEX_TOLERANCE {
            return Ok(None);
        }
        return Err(Error::Unresolved { cell: 0, step: fine });
    }
    let left = edge_increment(map, (za, ga), (zm, gm), depth + 1)?;
    let right = edge_increment(map, (zm, gm), (zb, gb), depth + 1)?;
    match (left, right) {
        (Some(l), Some(r)) => Ok(Some(l + r)),
        _ => Ok(None),
    }
}

fn locate(grid: &PolarGrid, cells: &CellCharges) -> Result<VortexConfig> {
    let nt = cells.n_theta;
    let n_rings = grid.n_radial() - 1;
    let center = cells.center_index();
    let neighbours = |c: usize| -> Vec<usize> {
        if c == center {
            return (0..nt).collect();
        }
        let (i, k) = ((c / nt) as i64, (c % nt) as i64);
        let mut out = Vec::with_capacity(9);
        if i == 0 {
            out.push(center);
        }
        for di in -1..=1i64 {
            for dk in -1..=1i64 {
                let ii = i + di;
                if (di, dk) == (0, 0) || ii < 0 || ii >= n_rings as i64 {
                    continue;
                }
                out.push(ii as usize * nt + (k + dk).rem_euclid(nt as i64) as usize);
            }
        }
        out
    };
    let cell_center = |c: usize| -> Complex64 {
        if c == center {
            return Complex64::new(0.0, 0.0);
        }
        let (i, k) = (c / nt, c % nt);
        0.25 * (grid.node(i, k) + grid.node(i, k + 1) + grid.node(i + 1, k) + grid.node(i + 1, k + 1))
    };

    let mut seen = vec![false; cells.charges.len()];
    let mut found = Vec::new();
    for start in 0..cells.charges.len() {
        if seen[start] || cells.charges[start] == 0 {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let (mut net, mut mass, mut centroid) = (0i64, 0.0, Complex64::new(0.0, 0.0));
        while let Some(c) = queue.pop_front() {
            let q = cells.charges[c];
            net += q;
            mass += q.abs() as f64;
            centroid += cell_center(c) * q.abs() as f64;
            for nb in neighbours(c) {
                if !seen[nb] && cells.charges[nb] != 0 {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        if net != 0 {
            let charge = i32::try_from(net).map_err(|_| Error::InvalidConfiguration("charge overflow".into()))?;
            found.push(Vortex { position: centroid / mass, charge });
        }
    }
    VortexConfig::new(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_polar_grid;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn identity() -> SingularMap {
        SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1).unwrap(), SmoothPhase::zero())
    }

    fn blaschke() -> SingularMap {
        let v = VortexConfig::new(vec![Vortex::new(0.3, 0.0, 1), Vortex::new(-0.3, 0.0, -1)]).unwrap();
        SingularMap::new(v, SmoothPhase::zero())
    }

    #[test]
    fn identity_map_values() {
        let g = identity();
        assert!((g.eval(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(g.eval(c(0.0, 0.0)), Err(Error::Domain { .. })));
        let trace = g.trace(64).unwrap();
        for (j, v) in trace.unit_values().unwrap().iter().enumerate() {
            assert!((v - Complex64::from_polar(1.0, trace.theta(j))).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_map_is_one() {
        let g = SingularMap::constant();
        assert_eq!(g.eval(c(0.2, -0.4)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn blaschke_value_matches_complex_arithmetic() {
        let z = c(0.0, 1.0);
        let direct = ((z - 0.3) / (z + 0.3)) / ((z - 0.3) / (z + 0.3)).norm();
        assert!((blaschke().eval(z).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn validation_rules() {
        assert!(VortexConfig::new(vec![Vortex::new(0.1, 0.0, 0)]).is_err());
        assert!(VortexConfig::new(vec![Vortex::new(1.0, 0.0, 1)]).is_err());
        assert!(VortexConfig::new(vec![Vortex::new(1.0, 0.0, 2)]).is_ok());
        assert!(VortexConfig::new(vec![Vortex::new(0.1, 0.0, 1), Vortex::new(0.1, 0.0, -1)]).is_err());
        assert!(VortexConfig::new(vec![Vortex::new(1.2, 0.0, 2)]).is_err());
        let v = VortexConfig::new(vec![Vortex::new(0.0, 1.0, 2), Vortex::new(0.2, 0.0, 1)]).unwrap();
        assert_eq!(v.total_charge(), 2);
    }

    #[test]
    fn winding_examples() {
        let loop_of = |f: &dyn Fn(f64) -> Complex64| -> Vec<Complex64> {
            (0..64).map(|j| f(2.0 * PI * j as f64 / 64.0)).collect()
        };
        assert_eq!(winding_number(&loop_of(&|t| Complex64::from_polar(1.0, t))).unwrap(), 1);
        assert_eq!(winding_number(&loop_of(&|_| c(1.0, 0.0))).unwrap(), 0);
        assert_eq!(winding_number(&loop_of(&|t| Complex64::from_polar(1.0, -3.0 * t))).unwrap(), -3);
        let coarse = [c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(matches!(winding_number(&coarse), Err(Error::Unresolved { .. })));
    }

    #[test]
    fn lift_examples() {
        let g0 = BoundarySignal::sample_unit(256, |t| Complex64::from_polar(1.0, t)).unwrap();
        let l = boundary_lift(&g0).unwrap();
        assert_eq!(l.degree, 1);
        for (j, v) in l.lift.real_values().unwrap().iter().enumerate() {
            assert!((v - l.lift.theta(j)).abs() < 1e-12);
        }
        let one = BoundarySignal::sample_unit(32, |_| c(1.0, 0.0)).unwrap();
        let l = boundary_lift(&one).unwrap();
        assert_eq!(l.degree, 0);
        assert!(l.lift.real_values().unwrap().iter().all(|&v| v == 0.0));

        let g0 = BoundarySignal::sample_unit(512, |t| Complex64::from_polar(1.0, 2.0 * t + 0.3 * t.sin())).unwrap();
        let l = boundary_lift(&g0).unwrap();
        assert_eq!(l.degree, 2);
        assert!((l.total_variation - 4.0 * PI).abs() < 1e-3);
        let samples = g0.unit_values().unwrap();
        for (j, v) in l.lift.real_values().unwrap().iter().enumerate() {
            assert!((Complex64::from_polar(1.0, *v) * samples[0] - samples[j]).norm() < 1e-12);
        }
        let deriv = l.derivative().unwrap();
        for (j, v) in deriv.iter().enumerate() {
            assert!((v - (2.0 + 0.3 * l.lift.theta(j).cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn detects_identity_and_blaschke() {
        let grid = build_polar_grid(32, 64, &[]).unwrap();
        let found = detect_map(&grid, &identity()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found.entries()[0].charge, 1);
        assert!(found.entries()[0].position.norm() < 0.05);

        let found = detect_map(&grid, &blaschke()).unwrap();
        let mut e = found.entries().to_vec();
        e.sort_by_key(|v| std::cmp::Reverse(v.charge));
        assert_eq!((e[0].charge, e[1].charge), (1, -1));
        let cell = 1.0 / 32.0 + 2.0 * PI * 0.3 / 64.0;
        assert!((e[0].position - c(0.3, 0.0)).norm() < 2.0 * cell, "{e:?}");
        assert!((e[1].position - c(-0.3, 0.0)).norm() < 2.0 * cell);
    }

    #[test]
    fn smooth_phase_has_no_vortices() {
        let grid = build_polar_grid(16, 32, &[]).unwrap();
        let phase = SmoothPhase::polynomial(vec![PhaseTerm::new(1.5, 2, 1), PhaseTerm::new(-0.7, 0, 1)]).unwrap();
        let g = SingularMap::new(VortexConfig::empty(), phase);
        assert!(detect_map(&grid, &g).unwrap().is_empty());
    }

    #[test]
    fn high_charge_is_resolved_by_bisection() {
        let grid = build_polar_grid(8, 16, &[]).unwrap();
        let v = VortexConfig::single(c(0.55, 0.02), 5).unwrap();
        let found = detect_map(&grid, &SingularMap::new(v, SmoothPhase::zero())).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found.entries()[0].charge, 5);
    }

    #[test]
    fn coarse_grid_reports_unresolved_cell() {
        let grid = build_polar_grid(8, 16, &[]).unwrap();
        let v = VortexConfig::single(c(0.1, 0.0), 1).unwrap();
        let phase = SmoothPhase::polynomial(vec![PhaseTerm::new(60.0, 2, 0)]).unwrap();
        assert!(matches!(detect_map(&grid, &SingularMap::new(v, phase)), Err(Error::Unresolved { .. })));
    }

    #[test]
    fn phase_derivatives_are_consistent() {
        let phase = SmoothPhase::polynomial(vec![PhaseTerm::new(0.4, 3, 1), PhaseTerm::new(-1.1, 0, 2)]).unwrap();
        let z = c(0.3, -0.2);
        let h = 1e-6;
        let gx = (phase.value(z + h) - phase.value(z - h)) / (2.0 * h);
        let gy = (phase.value(z + c(0.0, h)) - phase.value(z - c(0.0, h))) / (2.0 * h);
        assert!((phase.gradient(z) - c(gx, gy)).norm() < 1e-8);
        let lap = 0.4 * 6.0 * z.re * z.im - 2.2;
        assert!((phase.laplacian(z) - lap).abs() < 1e-14);
    }

    #[test]
    fn complex_monomial_is_real_part() {
        let c0 = c(0.3, -0.8);
        let p = SmoothPhase::complex_monomial(c0, 3).unwrap();
        let z = c(0.4, 0.25);
        assert!((p.value(z) - (c0 * z * z * z).re).abs() < 1e-14);
        assert!(p.laplacian(z).abs() < 1e-13);
    }

    #[test]
    fn connection_matches_numeric_phase_gradient() {
        let g = blaschke();
        let z = c(0.1, 0.45);
        let h = 1e-6;
        let dx = phase_step(g.eval(z - h).unwrap(), g.eval(z + h).unwrap()) / (2.0 * h);
        let dy = phase_step(g.eval(z - c(0.0, h)).unwrap(), g.eval(z + c(0.0, h)).unwrap()) / (2.0 * h);
        assert!((g.connection(z).unwrap() - c(dx, dy)).norm() < 1e-7);
    }
}

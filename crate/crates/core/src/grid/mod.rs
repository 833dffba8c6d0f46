//! Polar quadrature on the closed unit disk and uniformly sampled boundary data.
//!
//! The radial direction uses composite right-Radau panels on `[0, 1]`, so the
//! outermost ring sits exactly on the circle and every weight is positive.
//! Panels cluster geometrically around the radii of requested refinement
//! centers and break exactly at them; a panel ending at an interior center
//! radius uses Gauss-Legendre nodes instead, so no ring passes through a
//! center. The angular direction is the uniform periodic trapezoid rule.

mod boundary;
mod quadrature;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use boundary::{boundary_transform, signed_frequency, BoundarySignal, BoundaryValues};
pub use quadrature::{compensated_sum, gauss_legendre, right_radau};

/// Nodes per radial panel before leftover nodes are spread out.
const PANEL_ORDER: usize = 8;
/// Half-width of the coarsest refinement layer around a center radius.
const REFINE_WIDTH: f64 = 0.1;
const MIN_PANEL_WIDTH: f64 = 1e-6;
const CENTER_CLEARANCE: f64 = 1e-9;

/// Tensor-product polar grid. Node `(i, k)` has flat index `i * n_theta + k`
/// and sits at radius `radii[i]`, angle `2 pi k / n_theta`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    n_theta: usize,
    centers: Vec<Complex64>,
    breaks: Vec<f64>,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl PolarGrid {
    pub fn n_radial(&self) -> usize {
        self.radii.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Radial weights for `int_0^1 f(r) r dr`, the Jacobian already included.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_theta as f64
    }

    pub fn refinement_centers(&self) -> &[Complex64] {
        &self.centers
    }

    /// Panel breakpoints in increasing order, starting at 0 and ending at 1.
    pub fn panel_breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Area weights; they sum to `pi`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, ring: usize, k: usize) -> usize {
        ring * self.n_theta + k % self.n_theta
    }

    pub fn node(&self, ring: usize, k: usize) -> Complex64 {
        self.nodes[self.index(ring, k)]
    }

    /// Evaluates `f` at every node in parallel, in flat index order.
    pub fn sample<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Complex64) -> T + Sync + Send,
    {
        self.nodes.par_iter().map(|&z| f(z)).collect()
    }

    /// Integrates `f` over the disk. Values are computed in parallel and
    /// summed sequentially, so the result does not depend on thread count.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync + Send,
    {
        let values = self.sample(f);
        compensated_sum(values.iter().zip(&self.weights).map(|(v, w)| v * w))
    }

    /// Weighted sum of precomputed nodal values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "one value per grid node");
        compensated_sum(values.iter().zip(&self.weights).map(|(v, w)| v * w))
    }

    /// Mean over the disk, `(1/pi) int f`.
    pub fn mean<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync + Send,
    {
        self.integrate(f) / PI
    }
}

/// Builds a polar grid with `n_radial` rings and `n_theta` angles.
///
/// Requires `n_radial >= 8`, even `n_theta >= 16` and refinement centers in
/// the closed disk.
pub fn build_polar_grid(n_radial: usize, n_theta: usize, centers: &[Complex64]) -> Result<PolarGrid> {
    if n_radial < 8 {
        return Err(Error::InvalidGrid(format!("need at least 8 radial nodes, got {n_radial}")));
    }
    if n_theta < 16 || n_theta % 2 != 0 {
        return Err(Error::InvalidGrid(format!("angular count must be even and at least 16, got {n_theta}")));
    }
    if let Some(c) = centers.iter().find(|c| c.norm().is_nan() || c.norm() > 1.0 + 1e-10) {
        return Err(Error::InvalidGrid(format!("refinement center {c} lies outside the closed disk")));
    }

    let breaks = panel_breaks(n_radial, centers);
    let panels = breaks.len() - 1;
    let mut counts = vec![n_radial / panels; panels];
    let mut by_width: Vec<usize> = (0..panels).collect();
    by_width.sort_by(|&a, &b| {
        let wa = breaks[a + 1] - breaks[a];
        let wb = breaks[b + 1] - breaks[b];
        wb.total_cmp(&wa).then(a.cmp(&b))
    });
    for &p in by_width.iter().take(n_radial % panels) {
        counts[p] += 1;
    }

    let mut radii = Vec::with_capacity(n_radial);
    let mut radial_weights = Vec::with_capacity(n_radial);
    for (p, &count) in counts.iter().enumerate() {
        let (lo, hi) = (breaks[p], breaks[p + 1]);
        let half = 0.5 * (hi - lo);
        let ends_at_center = hi < 1.0 && centers.iter().any(|c| (c.norm() - hi).abs() <= CENTER_CLEARANCE);
        let (x, w) = if ends_at_center { gauss_legendre(count) } else { right_radau(count) };
        for (xi, wi) in x.iter().zip(&w) {
            let r = lo + half * (xi + 1.0);
            radii.push(r);
            radial_weights.push(half * wi * r);
        }
    }
    *radii.last_mut().expect("at least one ring") = 1.0;

    let dtheta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_radial * n_theta);
    let mut weights = Vec::with_capacity(n_radial * n_theta);
    let angles: Vec<Complex64> = (0..n_theta).map(|k| Complex64::from_polar(1.0, dtheta * k as f64)).collect();
    for (r, wr) in radii.iter().zip(&radial_weights) {
        for e in &angles {
            nodes.push(e * r);
            weights.push(wr * dtheta);
        }
    }

    Ok(PolarGrid { radii, radial_weights, n_theta, centers: centers.to_vec(), breaks, nodes, weights })
}

/// Panel breakpoints: a uniform backbone using half the panel budget plus
/// layers at `rho +- REFINE_WIDTH 2^{-j}` around every center radius `rho`.
fn panel_breaks(n_radial: usize, centers: &[Complex64]) -> Vec<f64> {
    let budget = (n_radial / PANEL_ORDER).max(1);
    let mut radii: Vec<f64> = centers.iter().map(|c| c.norm().min(1.0)).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() < MIN_PANEL_WIDTH);

    if radii.is_empty() {
        return (0..=budget).map(|p| p as f64 / budget as f64).collect();
    }

    let refine_budget = budget.div_ceil(2);
    let uniform = (budget - refine_budget).max(1);
    let mut levels = (refine_budget / (2 * radii.len())).max(1);
    loop {
        let mut breaks: Vec<f64> = (0..=uniform).map(|p| p as f64 / uniform as f64).collect();
        for &rho in &radii {
            breaks.push(rho);
            for j in 0..levels {
                let d = REFINE_WIDTH * 0.5f64.powi(j as i32);
                breaks.push(rho - d);
                breaks.push(rho + d);
            }
        }
        breaks.retain(|b| (0.0..=1.0).contains(b));
        breaks.sort_by(f64::total_cmp);
        // Keep the exact center radius when a nearby break collapses onto it.
        breaks.dedup_by(|later, kept| {
            let merge = (*later - *kept).abs() < MIN_PANEL_WIDTH;
            if merge && radii.iter().any(|r| (*later - r).abs() <= CENTER_CLEARANCE) {
                *kept = *later;
            }
            merge
        });
        *breaks.last_mut().unwrap() = 1.0;
        breaks[0] = 0.0;
        if 2 * (breaks.len() - 1) <= n_radial || levels == 0 {
            if 2 * (breaks.len() - 1) <= n_radial {
                return breaks;
            }
            return (0..=budget).map(|p| p as f64 / budget as f64).collect();
        }
        levels -= 1;
    }
}

/// Nodal values of a scalar or covector field on a shared grid.
#[derive(Debug, Clone)]
pub enum FieldValues {
    Scalar(Vec<f64>),
    Covector(Vec<[f64; 2]>),
}

#[derive(Debug, Clone)]
pub struct DiskField {
    pub grid: Arc<PolarGrid>,
    pub values: FieldValues,
}

impl DiskField {
    pub fn scalar(grid: Arc<PolarGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "one value per grid node");
        Self { grid, values: FieldValues::Scalar(values) }
    }

    pub fn covector(grid: Arc<PolarGrid>, values: Vec<[f64; 2]>) -> Self {
        assert_eq!(values.len(), grid.len(), "one value per grid node");
        Self { grid, values: FieldValues::Covector(values) }
    }

    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn(Complex64) -> f64 + Sync + Send) -> Self {
        let values = grid.sample(f);
        Self::scalar(grid, values)
    }

    pub fn as_scalar(&self) -> Option<&[f64]> {
        match &self.values {
            FieldValues::Scalar(v) => Some(v),
            FieldValues::Covector(_) => None,
        }
    }
}

/// Quadrature integral of a scalar field. Covector fields have no
/// coordinate-free integral and are rejected.
pub fn integrate_disk(field: &DiskField) -> Result<f64> {
    match &field.values {
        FieldValues::Scalar(v) => Ok(field.grid.integrate_values(v)),
        FieldValues::Covector(_) => Err(Error::InvalidGrid("cannot integrate a covector field".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nr: usize, nt: usize) -> PolarGrid {
        build_polar_grid(nr, nt, &[]).unwrap()
    }

    #[test]
    fn constant_one_integrates_to_pi() {
        let g = grid(64, 128);
        assert!((g.integrate(|_| 1.0) - PI).abs() < 1e-12);
    }

    #[test]
    fn radius_squared_integrates_to_half_pi() {
        let g = grid(64, 128);
        assert!((g.integrate(|z| z.norm_sqr()) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_radius_integrates_to_minus_half_pi() {
        let g = grid(128, 256);
        let err = (g.integrate(|z| z.norm().ln()) + PI / 2.0).abs();
        assert!(err < 1e-4, "error {err}");
    }

    #[test]
    fn refinement_halving_does_not_increase_log_error() {
        let mut prev = f64::INFINITY;
        for (nr, nt) in [(16, 32), (32, 64), (64, 128), (128, 256)] {
            let err = (grid(nr, nt).integrate(|z| z.norm().ln()) + PI / 2.0).abs();
            assert!(err <= prev, "{nr}x{nt}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn outer_ring_is_on_the_circle() {
        let g = build_polar_grid(40, 64, &[Complex64::new(0.3, 0.1)]).unwrap();
        assert_eq!(*g.radii().last().unwrap(), 1.0);
        assert_eq!(g.n_radial(), 40);
        assert_eq!(g.len(), 40 * 64);
    }

    #[test]
    fn centers_attract_radial_nodes() {
        let g = build_polar_grid(32, 64, &[Complex64::new(0.9, 0.0)]).unwrap();
        let near = g.radii().iter().filter(|&&r| (0.8..=1.0).contains(&r)).count();
        assert!(4 * near >= g.n_radial(), "{near} of {}", g.n_radial());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_polar_grid(4, 64, &[]).is_err());
        assert!(build_polar_grid(16, 33, &[]).is_err());
        assert!(build_polar_grid(16, 64, &[Complex64::new(1.5, 0.0)]).is_err());
    }

    #[test]
    fn covector_integration_is_rejected() {
        let g = Arc::new(grid(8, 16));
        let n = g.len();
        let field = DiskField::covector(g, vec![[0.0, 0.0]; n]);
        assert!(integrate_disk(&field).is_err());
    }
}

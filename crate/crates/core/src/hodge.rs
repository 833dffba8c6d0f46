//! Decomposition `-i g^{-1} grad g = grad-perp a + grad b`.
//!
//! For `g = prod ((z-p)/|z-p|)^d e^{i psi}` the pieces are available in
//! closed or spectral form:
//!
//! * `b = psi - P[psi]`, where `P` is the harmonic extension of the trace,
//! * `a = Phi - H(P[psi]) + c`, with `Phi = sum d log|z - p|`, `H` the
//!   harmonic conjugate vanishing at the origin, and `c` fixing zero mean.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{BoundarySignal, DiskField, PolarGrid};
use crate::maps::{boundary_lift, BoundaryLift, SingularMap, SmoothPhase, VortexConfig};

/// Points closer than this to a vortex are skipped by pointwise residual checks.
pub const RESIDUAL_EXCLUSION: f64 = 0.05;
/// Relative size below which trailing spectral modes are dropped.
const MODE_CUTOFF: f64 = 1e-17;
/// Tolerance on the flux defect of Neumann data.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-6;

/// Real harmonic function `h = c0 + 2 Re sum_{k>=1} c_k z^k` on the closed disk.
///
/// On the circle this is `sum_k c_k e^{ik theta}` with `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    constant: f64,
    coeffs: Vec<Complex64>,
}

impl HarmonicField {
    pub fn zero() -> Self {
        Self { constant: 0.0, coeffs: Vec::new() }
    }

    /// `constant + 2 Re sum coeffs[k-1] z^k`.
    pub fn from_coefficients(constant: f64, coeffs: Vec<Complex64>) -> Self {
        let mut h = Self { constant, coeffs };
        h.trim();
        h
    }

    /// Spectral harmonic extension of real boundary samples.
    pub fn from_boundary(signal: &BoundarySignal) -> Result<Self> {
        if signal.real_values().is_none() {
            return Err(Error::Precondition("harmonic extension needs a real boundary signal".into()));
        }
        let n = signal.len();
        let modes = signal.fourier_modes();
        let half = n / 2;
        let mut coeffs: Vec<Complex64> = modes[1..=half].to_vec();
        if n % 2 == 0 {
            // The Nyquist slot carries cos(n theta / 2) alone; split it evenly.
            coeffs[half - 1] = Complex64::new(0.5 * modes[half].re, 0.0);
        }
        Ok(Self::from_coefficients(modes[0].re, coeffs))
    }

    fn trim(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(self.constant.abs(), f64::max);
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= MODE_CUTOFF * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len()
    }

    /// `G(z) = sum c_k z^k` and `G'(z)` by Horner's rule.
    fn holomorphic(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        // p now holds sum c_k z^{k-1}; multiply through by z.
        (p * z, dp * z + p)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.constant + 2.0 * self.holomorphic(z).0.re
    }

    /// Gradient as `h_x + i h_y = 2 conj(G'(z))`.
    pub fn gradient(&self, z: Complex64) -> Complex64 {
        2.0 * self.holomorphic(z).1.conj()
    }

    pub fn value_and_gradient(&self, z: Complex64) -> (f64, Complex64) {
        let (g, dg) = self.holomorphic(z);
        (self.constant + 2.0 * g.re, 2.0 * dg.conj())
    }

    /// Harmonic conjugate: mode `k` goes to `-i sign(k)` times itself and the
    /// mean is dropped, so the result vanishes at the origin and its gradient
    /// is the quarter-turn rotation of this field's gradient.
    pub fn conjugate(&self) -> Self {
        Self { constant: 0.0, coeffs: self.coeffs.iter().map(|c| c * Complex64::new(0.0, -1.0)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).copied().unwrap_or_default() + other.coeffs.get(k).copied().unwrap_or_default())
            .collect();
        Self::from_coefficients(self.constant + other.constant, coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_coefficients(s * self.constant, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Samples on the circle at `n` uniform angles.
    pub fn boundary_samples(&self, n: usize) -> Result<BoundarySignal> {
        BoundarySignal::sample_real(n, |t| self.value(Complex64::from_polar(1.0, t)))
    }
}

/// Harmonic extension of real boundary data.
pub fn harmonic_extension(boundary: &BoundarySignal) -> Result<HarmonicField> {
    HarmonicField::from_boundary(boundary)
}

/// Harmonic conjugate of the harmonic extension of real boundary data.
pub fn harmonic_conjugate(boundary: &BoundarySignal) -> Result<HarmonicField> {
    Ok(HarmonicField::from_boundary(boundary)?.conjugate())
}

/// `Phi(z) = sum d_i log|z - p_i|` and its gradient.
pub fn log_potential(vortices: &VortexConfig, z: Complex64) -> Result<(f64, Complex64)> {
    vortices.check_query(z)?;
    Ok(log_potential_unchecked(vortices, z))
}

pub(crate) fn log_potential_unchecked(vortices: &VortexConfig, z: Complex64) -> (f64, Complex64) {
    let mut value = 0.0;
    let mut grad = Complex64::new(0.0, 0.0);
    for v in vortices.entries() {
        let w = z - v.position;
        let d = v.charge as f64;
        value += d * w.norm().ln();
        grad += d * w / w.norm_sqr();
    }
    (value, grad)
}

/// Mean of `log|z - p|` over the unit disk.
pub fn disk_mean_log(p: Complex64) -> f64 {
    let r2 = p.norm_sqr();
    if r2 <= 1.0 {
        0.5 * (r2 - 1.0)
    } else {
        0.5 * r2.ln()
    }
}

/// Image-charge potential with zero normal derivative on the circle:
/// `sum_i w_i (log|z - p_i| + log|z - p_i^*| - |z|^2/2)` with the mirror
/// point `p^* = p/|p|^2` (term omitted for `p = 0`). The weight `w_i` is the
/// charge for interior vortices and half the charge on the circle, where the
/// mirror point merges with the vortex and the pair acts as one vortex of
/// the full charge.
pub fn mirror_potential(vortices: &VortexConfig, z: Complex64) -> Result<(f64, Complex64)> {
    vortices.check_query(z)?;
    let mut value = 0.0;
    let mut grad = Complex64::new(0.0, 0.0);
    for v in vortices.entries() {
        let w = v.effective_charge();
        let u = z - v.position;
        value += w * (u.norm().ln() - 0.5 * z.norm_sqr());
        grad += w * (u / u.norm_sqr() - z);
        if v.position.norm_sqr() > 0.0 {
            let m = z - v.position / v.position.norm_sqr();
            value += w * m.norm().ln();
            grad += w * m / m.norm_sqr();
        }
    }
    Ok((value, grad))
}

/// Zero-mean variant of [`mirror_potential`], continuous in the vortex
/// positions: the mirror term is written `log|1 - z conj(p)|`, which differs
/// from `log|z - p^*|` by the constant `log|p|`, and the disk mean
/// `w ((|p|^2 - 1)/2 - 1/4)` of each term is subtracted.
pub fn neumann_potential(vortices: &VortexConfig, z: Complex64) -> (f64, Complex64) {
    let mut value = 0.0;
    let mut grad = Complex64::new(0.0, 0.0);
    for v in vortices.entries() {
        let w = v.effective_charge();
        let p = v.position;
        let u = z - p;
        let m = Complex64::new(1.0, 0.0) - z * p.conj();
        value += w * (u.norm().ln() + m.norm().ln() - 0.5 * z.norm_sqr() - 0.5 * (p.norm_sqr() - 1.0) + 0.25);
        // grad log|1 - z conj(p)| = -conj(conj(p) / (1 - z conj(p))) as a vector.
        grad += w * (u / u.norm_sqr() - (p.conj() / m).conj() - z);
    }
    (value, grad)
}

/// Exact part `b = psi_poly - P[psi_poly]`: polynomial minus the harmonic
/// extension of its trace. Vanishes on the circle; its Laplacian is that of
/// the polynomial.
#[derive(Debug, Clone)]
pub struct ExactPart {
    polynomial: SmoothPhase,
    extension: HarmonicField,
    /// The polynomial is harmonic, so it equals its extension and `b = 0`.
    harmonic: bool,
}

impl ExactPart {
    pub fn value(&self, z: Complex64) -> f64 {
        if self.harmonic {
            return 0.0;
        }
        self.polynomial.polynomial_value(z) - self.extension.value(z)
    }

    pub fn gradient(&self, z: Complex64) -> Complex64 {
        if self.harmonic {
            return Complex64::new(0.0, 0.0);
        }
        self.polynomial.polynomial_gradient(z) - self.extension.gradient(z)
    }

    pub fn is_zero(&self) -> bool {
        self.harmonic
    }

    /// Harmonic extension of the polynomial's trace.
    pub fn trace_extension(&self) -> &HarmonicField {
        &self.extension
    }
}

/// Solves `Delta b = Delta psi`, `b = 0` on the circle. The harmonic part of
/// the phase drops out, and the polynomial part is handled exactly.
pub fn solve_b(phase: &SmoothPhase) -> Result<ExactPart> {
    let polynomial = SmoothPhase::polynomial_with_cap(phase.terms().to_vec(), phase.degree())?;
    let n = (4 * (polynomial.degree() as usize + 1)).max(64);
    let trace = BoundarySignal::sample_real(n, |t| polynomial.polynomial_value(Complex64::from_polar(1.0, t)))?;
    let extension = HarmonicField::from_boundary(&trace)?;
    let harmonic = laplacian_vanishes(&polynomial);
    Ok(ExactPart { polynomial, extension, harmonic })
}

/// Whether the Laplacian of the polynomial cancels coefficient by coefficient
/// up to rounding.
fn laplacian_vanishes(p: &SmoothPhase) -> bool {
    let mut lap: std::collections::BTreeMap<(u32, u32), f64> = Default::default();
    let mut scale = 0.0f64;
    for t in p.terms() {
        let (m, n) = (t.mx, t.ny);
        if m >= 2 {
            let c = t.coefficient * (m * (m - 1)) as f64;
            *lap.entry((m - 2, n)).or_default() += c;
            scale = scale.max(c.abs());
        }
        if n >= 2 {
            let c = t.coefficient * (n * (n - 1)) as f64;
            *lap.entry((m, n - 2)).or_default() += c;
            scale = scale.max(c.abs());
        }
    }
    lap.values().all(|c| c.abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE))
}

/// Result of the finite-difference route for `b`.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub field: DiskField,
    /// Discrete L2 norm of the residual of the per-mode linear systems.
    pub residual: f64,
}

/// Finite-difference route for `b`: FFT in angle, then for every angular
/// mode a three-point radial solve of `u'' + u'/r - k^2 u / r^2 = s_k` with
/// `u(1) = 0`. Regularity at the origin enters through a ghost node at
/// `-r_0` carrying `(-1)^k u(r_0)`.
pub fn solve_b_fd(phase: &SmoothPhase, grid: Arc<PolarGrid>) -> Result<FdSolution> {
    let (nr, nt) = (grid.n_radial(), grid.n_theta());
    let source: Vec<f64> = grid.sample(|z| phase.laplacian(z));
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let inv = planner.plan_fft_inverse(nt);

    let mut spectra: Vec<Vec<Complex64>> = (0..nr)
        .map(|i| {
            let mut row: Vec<Complex64> =
                source[i * nt..(i + 1) * nt].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fwd.process(&mut row);
            row
        })
        .collect();

    let radii = grid.radii().to_vec();
    let m = nr - 1;
    let solutions: Vec<(Vec<Complex64>, f64)> = (0..=nt / 2)
        .into_par_iter()
        .map(|k| {
            let rhs: Vec<Complex64> = (0..m).map(|i| spectra[i][k]).collect();
            let (lower, diag, upper) = radial_operator(&radii, k);
            let u = thomas(&lower, &diag, &upper, &rhs);
            let mut res = 0.0;
            for i in 0..m {
                let mut lu = diag[i] * u[i];
                if i > 0 {
                    lu += lower[i] * u[i - 1];
                }
                if i + 1 < m {
                    lu += upper[i] * u[i + 1];
                }
                res += (lu - rhs[i]).norm_sqr();
            }
            (u, res)
        })
        .collect();

    let mut residual = 0.0;
    for (k, (u, res)) in solutions.iter().enumerate() {
        residual += res;
        for i in 0..m {
            spectra[i][k] = u[i];
            if k != 0 && k != nt / 2 {
                spectra[i][nt - k] = u[i].conj();
            }
        }
    }
    let scale = 1.0 / nt as f64;
    let mut values = vec![0.0; nr * nt];
    for (i, row) in spectra.iter_mut().enumerate() {
        if i == m {
            continue;
        }
        inv.process(row);
        for (kk, v) in row.iter().enumerate() {
            values[i * nt + kk] = v.re * scale;
        }
    }
    Ok(FdSolution { field: DiskField::scalar(grid, values), residual: (residual / (nr * nt) as f64).sqrt() * scale })
}

/// Tridiagonal radial operator on interior rings (the outer ring is Dirichlet).
fn radial_operator(radii: &[f64], k: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = radii.len() - 1;
    let kk = (k * k) as f64;
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for i in 0..m {
        let r = radii[i];
        let left = if i == 0 { -radii[0] } else { radii[i - 1] };
        let right = radii[i + 1];
        let (hm, hp) = (r - left, right - r);
        let s = hm + hp;
        let c_left = 2.0 / (hm * s) - hp / (hm * s) / r;
        let c_mid = -2.0 / (hm * hp) + (hp - hm) / (hm * hp) / r - kk / (r * r);
        let c_right = 2.0 / (hp * s) + hm / (hp * s) / r;
        diag[i] = c_mid;
        if i == 0 {
            diag[i] += parity * c_left;
        } else {
            lower[i] = c_left;
        }
        if i + 1 < m {
            upper[i] = c_right;
        }
    }
    (lower, diag, upper)
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Both potentials of the decomposition with closed-form evaluators and
/// nodal samples.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub grid: Arc<PolarGrid>,
    vortices: VortexConfig,
    /// `h0 = P[psi]`, harmonic extension of the phase trace.
    trace_extension: HarmonicField,
    /// `H(h0)`.
    conjugate: HarmonicField,
    exact: ExactPart,
    mean_shift: f64,
    /// Samples of `a` at the grid nodes.
    pub a: DiskField,
    /// Samples of `b` at the grid nodes.
    pub b: DiskField,
}

impl HodgeParts {
    pub fn vortices(&self) -> &VortexConfig {
        &self.vortices
    }

    /// The singular component `Phi`.
    pub fn a_singular(&self, z: Complex64) -> Result<(f64, Complex64)> {
        log_potential(&self.vortices, z)
    }

    /// The harmonic remainder `a - Phi = c - H(h0)`.
    pub fn a_harmonic(&self, z: Complex64) -> (f64, Complex64) {
        let (v, g) = self.conjugate.value_and_gradient(z);
        (self.mean_shift - v, -g)
    }

    pub fn a_value_gradient(&self, z: Complex64) -> Result<(f64, Complex64)> {
        self.vortices.check_query(z)?;
        Ok(self.a_unchecked(z))
    }

    pub(crate) fn a_unchecked(&self, z: Complex64) -> (f64, Complex64) {
        let (pv, pg) = log_potential_unchecked(&self.vortices, z);
        let (hv, hg) = self.a_harmonic(z);
        (pv + hv, pg + hg)
    }

    pub fn b_value(&self, z: Complex64) -> f64 {
        self.exact.value(z)
    }

    pub fn b_gradient(&self, z: Complex64) -> Complex64 {
        self.exact.gradient(z)
    }

    pub fn exact_part(&self) -> &ExactPart {
        &self.exact
    }

    pub fn trace_extension(&self) -> &HarmonicField {
        &self.trace_extension
    }

    pub fn mean_shift(&self) -> f64 {
        self.mean_shift
    }

    /// True when the phase polynomial is harmonic-free of exact part, i.e.
    /// `b` vanishes identically by construction.
    pub fn b_vanishes(&self) -> bool {
        self.exact.is_zero()
    }

    /// Normal derivative of `a - Phi` on the circle at angle `theta`.
    pub fn harmonic_normal_derivative(&self, theta: f64) -> f64 {
        let x = Complex64::from_polar(1.0, theta);
        let (_, g) = self.a_harmonic(x);
        (g * x.conj()).re
    }

    /// Max of `|grad-perp a + grad b - A|` over nodes at distance at least
    /// `RESIDUAL_EXCLUSION` from every vortex.
    pub fn reconstruction_residual(&self, map: &SingularMap) -> f64 {
        let worst: Vec<f64> = self.grid.sample(|z| {
            if self.vortices.distance_to(z) < RESIDUAL_EXCLUSION {
                return 0.0;
            }
            let (_, ga) = self.a_unchecked(z);
            let rebuilt = Complex64::new(0.0, 1.0) * ga + self.exact.gradient(z);
            (rebuilt - map.connection_unchecked(z)).norm()
        });
        worst.into_iter().fold(0.0, f64::max)
    }
}

/// Decomposes a map, sampling both potentials on `grid`.
pub fn decompose(map: &SingularMap, grid: Arc<PolarGrid>) -> Result<HodgeParts> {
    let exact = solve_b(&map.phase)?;
    let mut trace_extension = exact.trace_extension().clone();
    if let Some(h) = map.phase.harmonic_part() {
        trace_extension = trace_extension.add(h);
    }
    let conjugate = trace_extension.conjugate();
    let mean_shift = -map.vortices.entries().iter().map(|v| v.charge as f64 * disk_mean_log(v.position)).sum::<f64>();

    let mut parts = HodgeParts {
        a: DiskField::scalar(grid.clone(), vec![0.0; grid.len()]),
        b: DiskField::scalar(grid.clone(), vec![0.0; grid.len()]),
        grid: grid.clone(),
        vortices: map.vortices.clone(),
        trace_extension,
        conjugate,
        exact,
        mean_shift,
    };
    let a: Vec<f64> = grid.sample(|z| parts.a_value_gradient(z).map(|(v, _)| v)).into_iter().collect::<Result<_>>()?;
    let b: Vec<f64> = grid.sample(|z| parts.exact.value(z));
    parts.a = DiskField::scalar(grid.clone(), a);
    parts.b = DiskField::scalar(grid, b);
    Ok(parts)
}

/// Neumann data of the harmonic remainder of `a`.
#[derive(Debug, Clone)]
pub struct NeumannData {
    /// `beta` at the boundary sample angles.
    pub beta: BoundarySignal,
    /// `i int g0^{-1} d_theta g0 + 2 pi sum_int d + pi sum_bdy d`.
    pub defect: f64,
    pub lift: BoundaryLift,
}

pub fn neumann_data(vortices: &VortexConfig, g0: &BoundarySignal) -> Result<NeumannData> {
    let lift = boundary_lift(g0)?;
    let interior: f64 = vortices.interior().map(|v| v.charge as f64).sum();
    let boundary: f64 = vortices.boundary().map(|v| v.charge as f64).sum();
    let defect = -2.0 * PI * lift.degree as f64 + 2.0 * PI * interior + PI * boundary;
    if defect.abs() > COMPATIBILITY_TOLERANCE {
        return Err(Error::Incompatible { defect });
    }
    let dlift = lift.derivative()?;
    let beta: Vec<f64> = dlift
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let x = Complex64::from_polar(1.0, g0.theta(j));
            let normal: f64 = vortices
                .interior()
                .map(|v| {
                    let w = x - v.position;
                    v.charge as f64 * (w * x.conj()).re / w.norm_sqr()
                })
                .sum();
            l - normal - 0.5 * boundary
        })
        .collect();
    Ok(NeumannData { beta: BoundarySignal::from_real(beta)?, defect, lift })
}

/// Distance below which a query point counts as sitting on a vortex.
const COINCIDENCE_GUARD: f64 = 1e-10;

/// Boundary datum prepared for the Neumann route to `a`.
///
/// With `lambda` the lift of `g0` and `D` its degree, the smooth part of
/// `a` is `D |x|^2 / 2 + h_N` where `h_N` is harmonic with
/// `d_r h_N = lambda' - D` on the circle, i.e. `h_N = -H(lambda - D theta)`.
#[derive(Debug, Clone)]
pub struct BoundaryDatum {
    pub lift: BoundaryLift,
    smooth: HarmonicField,
}

impl BoundaryDatum {
    pub fn new(g0: &BoundarySignal) -> Result<Self> {
        let lift = boundary_lift(g0)?;
        let smooth = HarmonicField::from_boundary(&lift.periodic_part()?)?.conjugate().scale(-1.0);
        Ok(Self { lift, smooth })
    }

    pub fn degree(&self) -> i64 {
        self.lift.degree
    }

    /// Zero-mean `a` for vortices at the given places, built from image
    /// charges and the fixed smooth part.
    pub fn potential(&self, vortices: VortexConfig) -> Result<NeumannPotential<'_>> {
        let total: f64 = vortices.entries().iter().map(|v| v.effective_charge()).sum();
        let defect = 2.0 * PI * (total - self.lift.degree as f64);
        if defect.abs() > COMPATIBILITY_TOLERANCE {
            return Err(Error::Incompatible { defect });
        }
        Ok(NeumannPotential { vortices, smooth: &self.smooth, degree: self.lift.degree as f64 })
    }
}

/// `a = sum_i (image-charge potential of vortex i) + D |x|^2 / 2 + h_N - D/4`.
#[derive(Debug, Clone)]
pub struct NeumannPotential<'a> {
    vortices: VortexConfig,
    smooth: &'a HarmonicField,
    degree: f64,
}

impl NeumannPotential<'_> {
    pub fn vortices(&self) -> &VortexConfig {
        &self.vortices
    }

    pub fn value_gradient(&self, z: Complex64) -> (f64, Complex64) {
        let (mv, mg) = neumann_potential(&self.vortices, z);
        let (hv, hg) = self.smooth.value_and_gradient(z);
        (mv + hv + self.degree * (0.5 * z.norm_sqr() - 0.25), mg + hg + self.degree * z)
    }

    /// `f(a) |grad a|^2`. At a vortex the value is the limit from a point
    /// `1e-8` closer to the origin, which is finite for every charge.
    pub fn weighted_density(&self, z: Complex64) -> f64 {
        let z = if self.vortices.entries().iter().any(|v| (z - v.position).norm() < COINCIDENCE_GUARD) {
            if z.norm() > 1e-8 {
                z * (1.0 - 1e-8 / z.norm())
            } else {
                z + 1e-8
            }
        } else {
            z
        };
        let (a, g) = self.value_gradient(z);
        crate::energy::weight_f(a) * g.norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_polar_grid;
    use crate::maps::{PhaseTerm, Vortex};

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn ext(f: impl Fn(f64) -> f64) -> HarmonicField {
        harmonic_extension(&BoundarySignal::sample_real(64, f).unwrap()).unwrap()
    }

    #[test]
    fn extension_examples() {
        let h = ext(f64::cos);
        let z = c(0.3, -0.7);
        assert!((h.value(z) - 0.3).abs() < 1e-14);
        assert!((h.gradient(z) - c(1.0, 0.0)).norm() < 1e-14);
        let one = ext(|_| 1.0);
        assert!((one.value(z) - 1.0).abs() < 1e-14);
        let h2 = ext(|t| (2.0 * t).cos());
        assert!((h2.value(c(0.5, 0.0)) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn conjugate_examples() {
        let z = c(-0.2, 0.6);
        assert!((ext(f64::cos).conjugate().value(z) - 0.6).abs() < 1e-14);
        assert_eq!(ext(|_| 2.5).conjugate().value(z), 0.0);
        let h = ext(|t| (2.0 * t).cos()).conjugate();
        for j in 0..64 {
            let p = Complex64::from_polar(0.99 * ((j * 37 % 64) as f64 / 64.0), j as f64 * 0.7);
            assert!((h.value(p) - (p * p).im).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugate_gradient_is_rotated_gradient() {
        let h = ext(|t| (t.sin() * 2.0).exp() + (3.0 * t).cos());
        let hc = h.conjugate();
        let z = c(0.35, 0.4);
        assert!((hc.gradient(z) - c(0.0, 1.0) * h.gradient(z)).norm() < 1e-12);
    }

    #[test]
    fn log_potential_examples() {
        let v = VortexConfig::single(c(0.0, 0.0), 1).unwrap();
        let (val, grad) = log_potential(&v, c(0.5, 0.0)).unwrap();
        assert!((val - 0.5f64.ln()).abs() < 1e-15);
        assert!((grad - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(log_potential(&VortexConfig::empty(), c(0.1, 0.2)).unwrap(), (0.0, c(0.0, 0.0)));
        let pair = VortexConfig::new(vec![Vortex::new(0.3, 0.0, 1), Vortex::new(-0.3, 0.0, -1)]).unwrap();
        assert!(log_potential(&pair, c(0.0, 1.0)).unwrap().0.abs() < 1e-15);
        assert!(log_potential(&v, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn mirror_potential_has_zero_normal_derivative() {
        let v = VortexConfig::single(c(0.5, 0.0), 1).unwrap();
        let (_, g) = mirror_potential(&v, c(1.0, 0.0)).unwrap();
        assert!(g.re.abs() < 1e-14);
        let v0 = VortexConfig::single(c(0.0, 0.0), 1).unwrap();
        let z = c(0.3, 0.4);
        let (val, _) = mirror_potential(&v0, z).unwrap();
        assert!((val - (0.5f64.ln() - 0.125)).abs() < 1e-15);
        let (_, g) = mirror_potential(&v0, c(0.0, 1.0)).unwrap();
        assert!(g.im.abs() < 1e-15);
    }

    #[test]
    fn neumann_potential_matches_mirror_gradient_and_has_zero_mean() {
        let v = VortexConfig::new(vec![Vortex::new(0.4, -0.3, 2), Vortex::new(-0.1, 0.5, -1)]).unwrap();
        let z = c(0.2, 0.7);
        let (_, g1) = mirror_potential(&v, z).unwrap();
        let (_, g2) = neumann_potential(&v, z);
        assert!((g1 - g2).norm() < 1e-13);
        let grid = build_polar_grid(128, 256, &v.positions()).unwrap();
        let mean = grid.mean(|z| neumann_potential(&v, z).0);
        assert!(mean.abs() < 1e-4, "mean {mean}");
    }

    #[test]
    fn exact_part_examples() {
        let x = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 1, 0)]).unwrap();
        let b = solve_b(&x).unwrap();
        assert!(b.value(c(0.3, 0.2)).abs() < 1e-14);
        let r2 = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 2, 0), PhaseTerm::new(1.0, 0, 2)]).unwrap();
        let b = solve_b(&r2).unwrap();
        for z in [c(0.0, 0.0), c(0.5, 0.1), c(-0.3, 0.9)] {
            assert!((b.value(z) - (z.norm_sqr() - 1.0)).abs() < 1e-14);
        }
        assert!(solve_b(&SmoothPhase::zero()).unwrap().value(c(0.2, 0.2)) == 0.0);
    }

    #[test]
    fn finite_difference_route_reproduces_quadratic() {
        let grid = Arc::new(build_polar_grid(64, 64, &[]).unwrap());
        let r2 = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 2, 0), PhaseTerm::new(1.0, 0, 2)]).unwrap();
        let sol = solve_b_fd(&r2, grid.clone()).unwrap();
        let values = sol.field.as_scalar().unwrap();
        let err = grid.nodes().iter().zip(values).map(|(z, v)| (v - (z.norm_sqr() - 1.0)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
        assert!(sol.residual < 1e-6);
    }

    #[test]
    fn finite_difference_route_tracks_exact_route() {
        let grid = Arc::new(build_polar_grid(128, 128, &[]).unwrap());
        let phase = SmoothPhase::polynomial(vec![
            PhaseTerm::new(0.7, 3, 0),
            PhaseTerm::new(-0.4, 1, 2),
            PhaseTerm::new(0.5, 2, 2),
            PhaseTerm::new(0.2, 0, 1),
        ])
        .unwrap();
        let fd = solve_b_fd(&phase, grid.clone()).unwrap();
        let exact = solve_b(&phase).unwrap();
        let err = grid
            .nodes()
            .iter()
            .zip(fd.field.as_scalar().unwrap())
            .map(|(z, v)| (v - exact.value(*z)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn decomposition_examples() {
        let grid = Arc::new(build_polar_grid(128, 256, &[c(0.0, 0.0)]).unwrap());
        let z = c(0.3, -0.45);

        let id = SingularMap::new(VortexConfig::single(c(0.0, 0.0), 1).unwrap(), SmoothPhase::zero());
        let p = decompose(&id, grid.clone()).unwrap();
        assert!((p.a_value_gradient(z).unwrap().0 - (z.norm().ln() + 0.5)).abs() < 1e-14);
        assert!(p.b_vanishes());

        let r2 = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 2, 0), PhaseTerm::new(1.0, 0, 2)]).unwrap();
        let p = decompose(&SingularMap::new(VortexConfig::empty(), r2), grid.clone()).unwrap();
        assert!(p.a_value_gradient(z).unwrap().0.abs() < 1e-14);
        assert!((p.b_value(z) - (z.norm_sqr() - 1.0)).abs() < 1e-14);

        let x = SmoothPhase::polynomial(vec![PhaseTerm::new(1.0, 1, 0)]).unwrap();
        let p = decompose(&SingularMap::new(VortexConfig::empty(), x), grid.clone()).unwrap();
        assert!((p.a_value_gradient(z).unwrap().0 + z.im).abs() < 1e-14);
        assert!(p.b_value(z).abs() < 1e-14);
    }

    #[test]
    fn decomposition_invariants_on_mixed_map() {
        let v =
            VortexConfig::new(vec![Vortex::new(0.3, 0.2, 1), Vortex::new(-0.4, -0.1, -2), Vortex::new(0.1, -0.6, 1)])
                .unwrap();
        let phase = SmoothPhase::polynomial(vec![
            PhaseTerm::new(0.8, 2, 1),
            PhaseTerm::new(-0.3, 0, 3),
            PhaseTerm::new(0.5, 1, 0),
        ])
        .unwrap();
        let map = SingularMap::new(v.clone(), phase);
        let grid = Arc::new(build_polar_grid(128, 256, &v.positions()).unwrap());
        let parts = decompose(&map, grid.clone()).unwrap();

        assert!(parts.reconstruction_residual(&map) < 1e-10);
        let mean = grid.integrate_values(parts.a.as_scalar().unwrap()) / PI;
        assert!(mean.abs() < 1e-4, "mean {mean}");
        for j in 0..64 {
            let x = Complex64::from_polar(1.0, j as f64 * 0.1);
            assert!(parts.b_value(x).abs() < 1e-12);
        }

        let g0 = map.trace(512).unwrap();
        let nd = neumann_data(&v, &g0).unwrap();
        for (j, beta) in nd.beta.real_values().unwrap().iter().enumerate() {
            let got = parts.harmonic_normal_derivative(nd.beta.theta(j));
            assert!((got - beta).abs() < 1e-6, "j = {j}: {got} vs {beta}");
        }
    }

    #[test]
    fn neumann_examples() {
        let g0 = BoundarySignal::sample_unit(128, |t| Complex64::from_polar(1.0, t)).unwrap();
        let v = VortexConfig::single(c(0.0, 0.0), 1).unwrap();
        let nd = neumann_data(&v, &g0).unwrap();
        assert!(nd.beta.real_values().unwrap().iter().all(|b| b.abs() < 1e-12));

        let one = BoundarySignal::sample_unit(128, |_| c(1.0, 0.0)).unwrap();
        let nd = neumann_data(&VortexConfig::empty(), &one).unwrap();
        assert!(nd.beta.real_values().unwrap().iter().all(|b| b.abs() < 1e-12));

        match neumann_data(&v, &one) {
            Err(Error::Incompatible { defect }) => assert!((defect - 2.0 * PI).abs() < 1e-12),
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn neumann_route_matches_decomposition() {
        let v =
            VortexConfig::new(vec![Vortex::new(0.35, -0.2, 1), Vortex::new(-0.3, 0.4, 1), Vortex::new(0.1, 0.1, -1)])
                .unwrap();
        let phase = SmoothPhase::polynomial(vec![PhaseTerm::new(0.4, 2, 1), PhaseTerm::new(0.2, 0, 1)]).unwrap();
        let map = SingularMap::new(v.clone(), phase);
        let grid = Arc::new(build_polar_grid(64, 128, &v.positions()).unwrap());
        let parts = decompose(&map, grid).unwrap();
        let datum = BoundaryDatum::new(&map.trace(512).unwrap()).unwrap();
        let pot = datum.potential(v).unwrap();
        for z in [c(0.0, 0.5), c(0.7, -0.1), c(-0.2, -0.8), c(0.99, 0.0)] {
            let (av, ag) = parts.a_value_gradient(z).unwrap();
            let (nv, ng) = pot.value_gradient(z);
            assert!((av - nv).abs() < 1e-9, "{av} vs {nv}");
            assert!((ag - ng).norm() < 1e-8);
        }
    }
}

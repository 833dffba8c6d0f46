//! Maps on the flat unit-square torus and their Hodge decomposition
//! `A = grad^perp a + grad b + h` with a constant harmonic covector `h`.
//!
//! Points and covectors are complex numbers as on the disk. Vortex positions
//! are reduced to `[0, 1)^2`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::energy::{weight_f, EnergyBreakdown, SphereJet};
use crate::error::{Error, Result};
use crate::grid::compensated_sum;
use crate::maps::{Vortex, COINCIDENCE_TOLERANCE};

/// Default Fourier cutoff of the truncated Green's function.
pub const DEFAULT_FOURIER_CUTOFF: usize = 128;
/// Default number of midpoints per side of the quadrature grid.
pub const TORUS_RESOLUTION: usize = 256;
/// Points closer than this to a vortex are excluded from evaluation.
const EXCLUSION: f64 = 1e-12;
/// Nome `e^{-pi}` of the square lattice.
const NOME: f64 = 0.043_213_918_263_772_25;
/// Terms of the theta series; the next one is below `1e-70`.
const THETA_TERMS: i32 = 8;

/// One real Fourier mode `c cos(2 pi k.x) + s sin(2 pi k.x)` of the smooth phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub k: (i32, i32),
    pub cos: f64,
    pub sin: f64,
}

impl TrigTerm {
    pub fn new(k: (i32, i32), cos: f64, sin: f64) -> Self {
        Self { k, cos, sin }
    }

    fn phase(&self, z: Complex64) -> f64 {
        2.0 * PI * (self.k.0 as f64 * z.re + self.k.1 as f64 * z.im)
    }

    fn wave(&self) -> Complex64 {
        Complex64::new(self.k.0 as f64, self.k.1 as f64) * (2.0 * PI)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        let (s, c) = self.phase(z).sin_cos();
        self.cos * c + self.sin * s
    }

    pub fn gradient(&self, z: Complex64) -> Complex64 {
        let (s, c) = self.phase(z).sin_cos();
        self.wave() * (self.sin * c - self.cos * s)
    }

    /// `(1/4) int |grad|^2` over the unit square.
    fn quarter_dirichlet(&self) -> f64 {
        if self.k == (0, 0) {
            return 0.0;
        }
        0.125 * self.wave().norm_sqr() * (self.cos * self.cos + self.sin * self.sin)
    }
}

/// Green's function used for the singular potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreenKernel {
    /// Closed form through the Jacobi theta function.
    #[default]
    Theta,
    /// Symmetric Fourier truncation `max(|k1|, |k2|) <= cutoff`.
    Fourier { cutoff: usize },
}

/// A map on the torus given through its connection
/// `A = sum d_i grad^perp G(. - p_i) + grad psi + 2 pi (m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMap {
    vortices: Vec<Vortex>,
    phase: Vec<TrigTerm>,
    winding: (i64, i64),
}

impl TorusMap {
    pub fn new(vortices: Vec<Vortex>, phase: Vec<TrigTerm>, winding: (i64, i64)) -> Result<Self> {
        let total: i64 = vortices.iter().map(|v| v.charge as i64).sum();
        if total != 0 {
            return Err(Error::InvalidConfiguration(format!(
                "total charge {total} is nonzero; a periodic potential exists only for neutral configurations"
            )));
        }
        let mut reduced = Vec::with_capacity(vortices.len());
        for v in vortices {
            if !v.position.re.is_finite() || !v.position.im.is_finite() {
                return Err(Error::InvalidConfiguration("vortex position is not finite".into()));
            }
            if v.charge == 0 {
                return Err(Error::InvalidConfiguration("vortex charge must be nonzero".into()));
            }
            let p = Complex64::new(v.position.re.rem_euclid(1.0), v.position.im.rem_euclid(1.0));
            if reduced.iter().any(|w: &Vortex| periodic_offset(p - w.position).norm() < COINCIDENCE_TOLERANCE) {
                return Err(Error::InvalidConfiguration(format!("coincident vortices at {p}")));
            }
            reduced.push(Vortex { position: p, charge: v.charge });
        }
        for t in &phase {
            if !t.cos.is_finite() || !t.sin.is_finite() {
                return Err(Error::InvalidPhase("phase coefficient is not finite".into()));
            }
        }
        Ok(Self { vortices: reduced, phase, winding })
    }

    pub fn constant() -> Self {
        Self { vortices: Vec::new(), phase: Vec::new(), winding: (0, 0) }
    }

    /// `e^{2 pi i (m x + n y)}`.
    pub fn winding(m: i64, n: i64) -> Self {
        Self { vortices: Vec::new(), phase: Vec::new(), winding: (m, n) }
    }

    /// A `+1` vortex at `p` and a `-1` vortex at `q`.
    pub fn dipole(p: Complex64, q: Complex64) -> Result<Self> {
        Self::new(vec![Vortex { position: p, charge: 1 }, Vortex { position: q, charge: -1 }], Vec::new(), (0, 0))
    }

    pub fn vortices(&self) -> &[Vortex] {
        &self.vortices
    }

    pub fn phase(&self) -> &[TrigTerm] {
        &self.phase
    }

    pub fn winding_pair(&self) -> (i64, i64) {
        self.winding
    }

    fn check(&self, z: Complex64) -> Result<()> {
        match self.vortices.iter().find(|v| periodic_offset(z - v.position).norm() < EXCLUSION) {
            Some(_) => Err(Error::Domain { x: z.re, y: z.im, reason: "point coincides with a vortex" }),
            None => Ok(()),
        }
    }

    /// `-i g^{-1} grad g` at `z`.
    pub fn connection(&self, z: Complex64) -> Result<Complex64> {
        self.check(z)?;
        let singular: Complex64 =
            self.vortices.iter().map(|v| v.charge as f64 * Complex64::i() * theta_green_gradient(z - v.position)).sum();
        Ok(singular + self.smooth_connection(z))
    }

    /// Connection without the vortex part.
    fn smooth_connection(&self, z: Complex64) -> Complex64 {
        let h = Complex64::new(self.winding.0 as f64, self.winding.1 as f64) * (2.0 * PI);
        self.phase.iter().map(|t| t.gradient(z)).sum::<Complex64>() + h
    }
}

/// Representative of `z` modulo the lattice in `[-1/2, 1/2)^2`.
fn periodic_offset(z: Complex64) -> Complex64 {
    Complex64::new(z.re - (z.re + 0.5).floor(), z.im - (z.im + 0.5).floor())
}

/// `theta_1(w)` and `theta_1'(w)` for the nome `e^{-pi}`.
fn theta1(w: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for n in 0..THETA_TERMS {
        let odd = (2 * n + 1) as f64;
        let e = (n as f64 + 0.5).powi(2);
        let coefficient = 2.0 * if n % 2 == 0 { 1.0 } else { -1.0 } * NOME.powf(e);
        value += coefficient * (odd * w).sin();
        deriv += coefficient * odd * (odd * w).cos();
    }
    (value, deriv)
}

/// Mean of `log|theta_1(pi z)| - pi y^2` over the square:
/// `-pi/12 + sum_{n>=1} log(1 - e^{-2 pi n})`.
fn theta_green_mean() -> f64 {
    static MEAN: OnceLock<f64> = OnceLock::new();
    *MEAN.get_or_init(|| {
        let tail: f64 = (1..12).map(|n| (-(-2.0 * PI * n as f64).exp()).ln_1p()).sum();
        -PI / 12.0 + tail
    })
}

/// Zero-mean periodic solution of `Delta G = 2 pi (delta_0 - 1)`.
pub fn theta_green(z: Complex64) -> f64 {
    let z = periodic_offset(z);
    let (t, _) = theta1(z * PI);
    t.norm().ln() - PI * z.im * z.im - theta_green_mean()
}

pub fn theta_green_gradient(z: Complex64) -> Complex64 {
    let z = periodic_offset(z);
    let (t, dt) = theta1(z * PI);
    (dt / t * PI).conj() - Complex64::new(0.0, 2.0 * PI * z.im)
}

/// `-sum_{k != 0} cos(2 pi k.z) / (2 pi |k|^2)` over the square of cutoff `cutoff`.
pub fn fourier_green(z: Complex64, cutoff: usize) -> f64 {
    let terms = fourier_modes(cutoff).map(|(k1, k2)| {
        let kk = (k1 * k1 + k2 * k2) as f64;
        -(2.0 * PI * (k1 as f64 * z.re + k2 as f64 * z.im)).cos() / (2.0 * PI * kk)
    });
    compensated_sum(terms)
}

pub fn fourier_green_gradient(z: Complex64, cutoff: usize) -> Complex64 {
    let (mut gx, mut gy) = (Vec::new(), Vec::new());
    for (k1, k2) in fourier_modes(cutoff) {
        let kk = (k1 * k1 + k2 * k2) as f64;
        let s = (2.0 * PI * (k1 as f64 * z.re + k2 as f64 * z.im)).sin() / kk;
        gx.push(k1 as f64 * s);
        gy.push(k2 as f64 * s);
    }
    Complex64::new(compensated_sum(gx), compensated_sum(gy))
}

fn fourier_modes(cutoff: usize) -> impl Iterator<Item = (i64, i64)> {
    let k = cutoff as i64;
    (-k..=k).flat_map(move |k1| (-k..=k).map(move |k2| (k1, k2))).filter(|&m| m != (0, 0))
}

/// Output of [`torus_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct TorusParts {
    map: TorusMap,
    kernel: GreenKernel,
    /// Nonconstant modes of the smooth phase; `b` is their sum.
    b_modes: Vec<TrigTerm>,
    /// Constant harmonic covector.
    pub h: Complex64,
}

impl TorusParts {
    pub fn kernel(&self) -> GreenKernel {
        self.kernel
    }

    pub fn a_value_gradient(&self, z: Complex64) -> Result<(f64, Complex64)> {
        self.map.check(z)?;
        let mut value = 0.0;
        let mut grad = Complex64::new(0.0, 0.0);
        for v in &self.map.vortices {
            let d = v.charge as f64;
            let w = z - v.position;
            let (g, dg) = match self.kernel {
                GreenKernel::Theta => (theta_green(w), theta_green_gradient(w)),
                GreenKernel::Fourier { cutoff } => (fourier_green(w, cutoff), fourier_green_gradient(w, cutoff)),
            };
            value += d * g;
            grad += d * dg;
        }
        Ok((value, grad))
    }

    pub fn b_value(&self, z: Complex64) -> f64 {
        self.b_modes.iter().map(|t| t.value(z)).sum()
    }

    pub fn b_gradient(&self, z: Complex64) -> Complex64 {
        self.b_modes.iter().map(|t| t.gradient(z)).sum()
    }

    pub fn b_vanishes(&self) -> bool {
        self.b_modes.is_empty()
    }

    /// `h / 2 pi`.
    pub fn h_quanta(&self) -> (f64, f64) {
        (self.h.re / (2.0 * PI), self.h.im / (2.0 * PI))
    }

    /// Largest `|A - grad^perp a - grad b - h|` over `points`, with `grad a`
    /// taken by central differences of the potential.
    pub fn reconstruction_residual(&self, points: &[Complex64], step: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for &z in points {
            let a = |w: Complex64| self.a_value_gradient(w).map(|(v, _)| v);
            let ax = (a(z + step)? - a(z - step)?) / (2.0 * step);
            let ay = (a(z + Complex64::new(0.0, step))? - a(z - Complex64::new(0.0, step))?) / (2.0 * step);
            let rebuilt = Complex64::i() * Complex64::new(ax, ay) + self.b_gradient(z) + self.h;
            worst = worst.max((self.map.connection(z)? - rebuilt).norm());
        }
        Ok(worst)
    }
}

/// Splits the connection of `map` into vortex potential, exact part and
/// harmonic covector.
///
/// `h` is the midpoint-rule mean of the smooth part of the connection; the
/// vortex part is a periodic gradient and has mean zero.
pub fn torus_decompose(map: &TorusMap, kernel: GreenKernel) -> Result<TorusParts> {
    if let GreenKernel::Fourier { cutoff: 0 } = kernel {
        return Err(Error::Precondition("Fourier cutoff must be positive".into()));
    }
    let max_mode = map.phase.iter().map(|t| t.k.0.unsigned_abs().max(t.k.1.unsigned_abs())).max().unwrap_or(0) as usize;
    let n = 2 * max_mode + 2;
    let samples: Vec<Complex64> = uniform_midpoints(n).map(|z| map.smooth_connection(z)).collect();
    let h =
        Complex64::new(compensated_sum(samples.iter().map(|s| s.re)), compensated_sum(samples.iter().map(|s| s.im)))
            / (n * n) as f64;
    let b_modes = map.phase.iter().copied().filter(|t| t.k != (0, 0) && (t.cos != 0.0 || t.sin != 0.0)).collect();
    Ok(TorusParts { map: map.clone(), kernel, b_modes, h })
}

fn uniform_midpoints(n: usize) -> impl Iterator<Item = Complex64> {
    let step = 1.0 / n as f64;
    (0..n).flat_map(move |i| (0..n).map(move |j| Complex64::new((i as f64 + 0.5) * step, (j as f64 + 0.5) * step)))
}

/// Renormalized energy on the torus:
/// `int f(a)(|A - h|^2 + |grad a|^2) + (1/4) int |grad b|^2 + (1/4) |h|^2`.
///
/// The weighted term integrates over an `n x n` midpoint grid; midpoints
/// that coincide with a vortex contribute zero. The `b` and `h` terms are
/// exact.
pub fn torus_energy(parts: &TorusParts, n: usize) -> Result<EnergyBreakdown> {
    if n < 4 {
        return Err(Error::InvalidGrid(format!("torus grid needs at least 4 points per side, got {n}")));
    }
    let step = 1.0 / n as f64;
    let rows: Vec<[f64; 2]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut weighted = Vec::with_capacity(n);
            let mut lift = Vec::with_capacity(n);
            for j in 0..n {
                let z = Complex64::new((i as f64 + 0.5) * step, (j as f64 + 0.5) * step);
                let Ok((a, ga)) = parts.a_value_gradient(z) else { continue };
                let rest = Complex64::i() * ga + parts.b_gradient(z);
                weighted.push(weight_f(a) * (rest.norm_sqr() + ga.norm_sqr()));
                let jet = SphereJet::from_polar(a, ga, Complex64::new(1.0, 0.0), rest);
                lift.push(0.25 * jet.dirichlet_density());
            }
            [compensated_sum(weighted), compensated_sum(lift)]
        })
        .collect();
    let area = step * step;
    let weighted_term = compensated_sum(rows.iter().map(|r| r[0])) * area;
    let lift_term = compensated_sum(rows.iter().map(|r| r[1])) * area;
    let b_term = compensated_sum(parts.b_modes.iter().map(|t| t.quarter_dirichlet()));
    let h_term = 0.25 * parts.h.norm_sqr();
    Ok(EnergyBreakdown { weighted_term, b_term, h_term, lift_term, total: weighted_term + b_term + h_term })
}

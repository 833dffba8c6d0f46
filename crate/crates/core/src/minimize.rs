//! Search over vortex positions for a fixed boundary datum.
//!
//! For fixed vortices and trace the `b = 0` representative has the least
//! energy, `2 int f(a) |grad a|^2`, so the search only moves positions.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{build_polar_grid, BoundarySignal, PolarGrid};
use crate::hodge::BoundaryDatum;
use crate::maps::{Vortex, VortexConfig};

/// Default interior margin: vortices stay in `|p| <= 1 - margin`.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Default quadrature grid of the search.
pub const MINIMIZE_RESOLUTION: (usize, usize) = (128, 256);

/// `2 int f(a)|grad a|^2` for the `b = 0` map with trace `g0` and the given
/// vortices, integrated on `grid`. Coincident positions give `+inf`.
pub fn configuration_energy(
    g0: &BoundarySignal,
    positions: &[Complex64],
    charges: &[i32],
    grid: &PolarGrid,
) -> Result<f64> {
    let datum = BoundaryDatum::new(g0)?;
    check_charges(&datum, charges)?;
    if positions.len() != charges.len() {
        return Err(Error::Precondition(format!("{} positions for {} charges", positions.len(), charges.len())));
    }
    if let Some(p) = positions.iter().find(|p| p.norm().is_nan() || p.norm() >= 1.0) {
        return Err(Error::Precondition(format!("position {p} is not interior")));
    }
    Ok(datum_energy(&datum, positions, charges, grid))
}

fn check_charges(datum: &BoundaryDatum, charges: &[i32]) -> Result<()> {
    if charges.contains(&0) {
        return Err(Error::InvalidConfiguration("vortex charges must be nonzero integers".into()));
    }
    let total: i64 = charges.iter().map(|&d| d as i64).sum();
    if total != datum.degree() {
        return Err(Error::InvalidConfiguration(format!(
            "charges sum to {total} but the boundary datum has degree {}",
            datum.degree()
        )));
    }
    Ok(())
}

fn datum_energy(datum: &BoundaryDatum, positions: &[Complex64], charges: &[i32], grid: &PolarGrid) -> f64 {
    let entries = positions.iter().zip(charges).map(|(&position, &charge)| Vortex { position, charge }).collect();
    let Ok(config) = VortexConfig::new(entries) else { return f64::INFINITY };
    let Ok(potential) = datum.potential(config) else { return f64::INFINITY };
    2.0 * grid.integrate(|z| potential.weighted_density(z))
}

/// Nelder-Mead and multistart parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    /// Energy evaluations allowed per start.
    pub max_evaluations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Termination threshold on the simplex diameter.
    pub tolerance: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { max_evaluations: 2000, initial_step: 0.1, tolerance: 1e-6, restarts: 2, starts: 4, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeProblem {
    g0: BoundarySignal,
    datum: BoundaryDatum,
    charges: Vec<i32>,
    margin: f64,
    grid: Arc<PolarGrid>,
    pub settings: OptimizerSettings,
}

impl MinimizeProblem {
    /// The quadrature grid is fixed for the whole search and refined toward
    /// the circle, where minimizers tend to sit.
    pub fn new(
        g0: BoundarySignal,
        charges: Vec<i32>,
        margin: f64,
        resolution: (usize, usize),
        settings: OptimizerSettings,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::InvalidConfiguration(format!("margin {margin} must lie in [0, 0.5)")));
        }
        if settings.starts == 0 || settings.max_evaluations == 0 {
            return Err(Error::InvalidConfiguration("need at least one start and one evaluation".into()));
        }
        if !(settings.tolerance > 0.0 && settings.initial_step > 0.0) {
            return Err(Error::InvalidConfiguration("tolerance and initial step must be positive".into()));
        }
        let datum = BoundaryDatum::new(&g0)?;
        check_charges(&datum, &charges)?;
        let grid = Arc::new(build_polar_grid(resolution.0, resolution.1, &[Complex64::new(1.0, 0.0)])?);
        Ok(Self { g0, datum, charges, margin, grid, settings })
    }

    pub fn boundary(&self) -> &BoundarySignal {
        &self.g0
    }

    pub fn charges(&self) -> &[i32] {
        &self.charges
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// Energy on the search grid; positions are clamped into the admissible disk.
    pub fn energy(&self, positions: &[Complex64]) -> f64 {
        let clamped: Vec<Complex64> = positions.iter().map(|&p| self.clamp(p)).collect();
        datum_energy(&self.datum, &clamped, &self.charges, &self.grid)
    }

    fn clamp(&self, p: Complex64) -> Complex64 {
        let limit = 1.0 - self.margin;
        let r = p.norm();
        if r > limit {
            p * (limit / r)
        } else {
            p
        }
    }

    fn energy_flat(&self, x: &[f64]) -> f64 {
        self.energy(&unflatten(x))
    }
}

fn flatten(positions: &[Complex64]) -> Vec<f64> {
    positions.iter().flat_map(|p| [p.re, p.im]).collect()
}

fn unflatten(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Simplex diameter fell below the tolerance.
    Converged,
    /// Evaluation budget exhausted; the result is the best point seen.
    Budget,
    /// Nothing to optimize.
    Trivial,
}

/// A new best point found during the search.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub positions: Vec<Complex64>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary {
    pub initial: Vec<Complex64>,
    pub energy: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub positions: Vec<Complex64>,
    pub charges: Vec<i32>,
    pub energy: f64,
    /// Evaluations over all starts.
    pub evaluations: usize,
    pub termination: Termination,
    /// Best-so-far iterates of the winning start.
    pub trace: Vec<TraceEntry>,
    pub starts: Vec<StartSummary>,
}

/// Seeded multistart Nelder-Mead with restarts.
///
/// Starts run in parallel but each one is sequential and seeded
/// independently, so the result does not depend on the thread count. Ties in
/// energy go to the lexicographically smaller position list.
pub fn minimize_positions(problem: &MinimizeProblem) -> Result<MinimizeResult> {
    let q = problem.charges.len();
    if q == 0 {
        let energy = problem.energy(&[]);
        return Ok(MinimizeResult {
            positions: Vec::new(),
            charges: Vec::new(),
            energy,
            evaluations: 1,
            termination: Termination::Trivial,
            trace: vec![TraceEntry { evaluation: 1, positions: Vec::new(), energy }],
            starts: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(problem.settings.seed);
    let initials: Vec<Vec<Complex64>> =
        (0..problem.settings.starts).map(|_| random_start(&mut rng, q, problem.margin)).collect();
    let runs: Vec<(StartSummary, Vec<TraceEntry>, Vec<Complex64>)> =
        initials.into_par_iter().map(|x0| run_start(problem, x0)).collect();

    let winner = runs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.0.energy.total_cmp(&b.0.energy).then_with(|| lexicographic(&a.2, &b.2)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let evaluations = runs.iter().map(|r| r.0.evaluations).sum();
    let (summary, trace, positions) = runs[winner].clone();
    Ok(MinimizeResult {
        positions,
        charges: problem.charges.clone(),
        energy: summary.energy,
        evaluations,
        termination: summary.termination,
        trace,
        starts: runs.into_iter().map(|r| r.0).collect(),
    })
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        let o = p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Uniform-by-area points in `|p| <= 0.7 (1 - margin)` kept `0.05` apart.
fn random_start(rng: &mut ChaCha8Rng, q: usize, margin: f64) -> Vec<Complex64> {
    let radius = 0.7 * (1.0 - margin);
    let mut out: Vec<Complex64> = Vec::with_capacity(q);
    while out.len() < q {
        let r = radius * rng.gen::<f64>().sqrt();
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = Complex64::from_polar(r, t);
        if out.iter().all(|o| (o - p).norm() > 0.05) {
            out.push(p);
        }
    }
    out
}

fn run_start(problem: &MinimizeProblem, initial: Vec<Complex64>) -> (StartSummary, Vec<TraceEntry>, Vec<Complex64>) {
    let s = &problem.settings;
    let mut search =
        Search { problem, evaluations: 0, best: f64::INFINITY, best_x: flatten(&initial), trace: Vec::new() };
    let mut x = flatten(&initial);
    let mut termination = Termination::Budget;
    for _ in 0..=s.restarts {
        let before = search.best;
        let outcome = nelder_mead(&mut search, &x);
        x = search.best_x.clone();
        termination = outcome;
        if outcome == Termination::Budget {
            break;
        }
        if before.is_finite() && before - search.best <= 1e-12 * before.abs().max(1.0) {
            break;
        }
    }
    let positions: Vec<Complex64> = unflatten(&search.best_x).into_iter().map(|p| problem.clamp(p)).collect();
    let summary = StartSummary { initial, energy: search.best, evaluations: search.evaluations, termination };
    (summary, search.trace, positions)
}

struct Search<'a> {
    problem: &'a MinimizeProblem,
    evaluations: usize,
    best: f64,
    best_x: Vec<f64>,
    trace: Vec<TraceEntry>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.problem.settings.max_evaluations
    }

    /// Clamps `x` in place and returns its energy, recording improvements.
    fn eval(&mut self, x: &mut [f64]) -> f64 {
        let clamped = flatten(&unflatten(x).into_iter().map(|p| self.problem.clamp(p)).collect::<Vec<_>>());
        x.copy_from_slice(&clamped);
        let e = self.problem.energy_flat(x);
        self.evaluations += 1;
        if e < self.best {
            self.best = e;
            self.best_x = x.to_vec();
            self.trace.push(TraceEntry { evaluation: self.evaluations, positions: unflatten(x), energy: e });
        }
        e
    }
}

fn nelder_mead(search: &mut Search<'_>, x0: &[f64]) -> Termination {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    let n = x0.len();
    let step = search.problem.settings.initial_step;
    let tol = search.problem.settings.tolerance;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if search.exhausted() {
            return Termination::Budget;
        }
        let mut x = x0.to_vec();
        if i > 0 {
            // Step toward the origin so the vertex stays admissible.
            x[i - 1] += if x[i - 1] > 0.0 { -step } else { step };
        }
        let e = search.eval(&mut x);
        simplex.push((x, e));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < tol {
            return Termination::Converged;
        }
        if search.exhausted() {
            return Termination::Budget;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v.0[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };

        let mut xr = along(REFLECT);
        let er = search.eval(&mut xr);
        if er < simplex[0].1 {
            let mut xe = along(REFLECT * EXPAND);
            let ee = if search.exhausted() { f64::INFINITY } else { search.eval(&mut xe) };
            simplex[n] = if ee < er { (xe, ee) } else { (xr, er) };
            continue;
        }
        if er < simplex[n - 1].1 {
            simplex[n] = (xr, er);
            continue;
        }
        if search.exhausted() {
            return Termination::Budget;
        }
        let (mut xc, outside) =
            if er < simplex[n].1 { (along(REFLECT * CONTRACT), true) } else { (along(-CONTRACT), false) };
        let ec = search.eval(&mut xc);
        if (outside && ec <= er) || (!outside && ec < simplex[n].1) {
            simplex[n] = (xc, ec);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if search.exhausted() {
                return Termination::Budget;
            }
            let mut x: Vec<f64> = best.iter().zip(&v.0).map(|(b, w)| b + SHRINK * (w - b)).collect();
            let e = search.eval(&mut x);
            *v = (x, e);
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let s: f64 = a.0.iter().zip(&b.0).map(|(p, q)| (p - q) * (p - q)).sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

/// Central-difference gradient of the search energy with respect to all
/// position coordinates.
pub fn position_gradient(problem: &MinimizeProblem, positions: &[Complex64], step: f64) -> Vec<f64> {
    let x = flatten(positions);
    (0..x.len())
        .map(|j| {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[j] += step;
            lo[j] -= step;
            (problem.energy_flat(&hi) - problem.energy_flat(&lo)) / (2.0 * step)
        })
        .collect()
}

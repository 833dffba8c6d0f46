//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use num_complex::Complex64;
use renorm_core::{
    build_polar_grid, BoundarySignal, MinimizeProblem, OptimizerSettings, PhaseTerm, PolarGrid, SingularMap,
    SmoothPhase, TorusMap, TrigTerm, Vortex, VortexConfig,
};

/// Grid sizes swept by the disk benches.
pub const RESOLUTIONS: [(usize, usize); 3] = [(32, 64), (64, 128), (128, 256)];

/// A `+1`/`-1` pair on the real axis under a non-harmonic quadratic phase.
pub fn disk_map() -> SingularMap {
    let vortices = VortexConfig::new(vec![Vortex::new(0.3, 0.1, 1), Vortex::new(-0.4, -0.2, -1)]).expect("valid pair");
    let phase =
        SmoothPhase::polynomial(vec![PhaseTerm::new(0.3, 2, 0), PhaseTerm::new(0.2, 0, 2)]).expect("quadratic phase");
    SingularMap::new(vortices, phase)
}

pub fn disk_grid(map: &SingularMap, (nr, nt): (usize, usize)) -> Arc<PolarGrid> {
    Arc::new(build_polar_grid(nr, nt, &map.vortices.positions()).expect("bench grid"))
}

/// A dipole with one trigonometric term on a `(1, 0)` winding background.
pub fn torus_map() -> TorusMap {
    TorusMap::new(
        vec![Vortex::new(0.3, 0.4, 1), Vortex::new(0.7, 0.55, -1)],
        vec![TrigTerm::new((1, 2), 0.2, -0.1)],
        (1, 0),
    )
    .expect("neutral configuration")
}

/// Degree-one boundary datum `e^{i(theta + 0.3 sin 2 theta)}`.
pub fn wobble(n: usize) -> BoundarySignal {
    BoundarySignal::sample_unit(n, |t| Complex64::from_polar(1.0, t + 0.3 * (2.0 * t).sin())).expect("unit samples")
}

pub fn search_problem(charges: Vec<i32>, starts: usize) -> MinimizeProblem {
    let settings = OptimizerSettings { starts, max_evaluations: 200, ..OptimizerSettings::default() };
    MinimizeProblem::new(wobble(256), charges, 0.02, (64, 128), settings).expect("valid search problem")
}

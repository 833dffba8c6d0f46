//! Renormalized Dirichlet energy of circle-valued maps with point
//! singularities on the unit disk and the flat torus.
//!
//! Points and planar vectors are [`Complex64`] values throughout: `(u, v)` is
//! `u + i v` and the rotation `grad^perp` is multiplication by `i`.

pub mod bounds;
pub mod energy;
pub mod error;
pub mod family;
pub mod grid;
pub mod hodge;
pub mod maps;
pub mod minimize;
pub mod torus;

pub use num_complex::Complex64;

pub use bounds::{
    extend_boundary, extension_energy_bound, level_set_flux, stability_sweep, vortex_count_bound, weak_l2_quasinorm,
    BoundReport, FluxReport, StabilityReport,
};
pub use energy::{
    antiderivative_f, arctan_term, conformality_defect, dbar_residual, el_residual, el_test_basis, first_variation,
    first_variation_fd, gauge_project, lift_degree, plane_energy, plane_energy_at, renormalized_energy, weight_f,
    weighted_gradient_term, EnergyBreakdown, GaugeReport, LiftDegree, SphereField,
};
pub use error::{Error, Result};
pub use grid::{build_polar_grid, integrate_disk, BoundarySignal, DiskField, PolarGrid};
pub use hodge::{
    decompose, harmonic_conjugate, harmonic_extension, mirror_potential, BoundaryDatum, HarmonicField, HodgeParts,
};
pub use maps::{
    boundary_lift, detect_map, detect_singularities, BoundaryLift, PhaseTerm, SingularMap, SmoothPhase, Vortex,
    VortexConfig,
};
pub use minimize::{configuration_energy, minimize_positions, MinimizeProblem, MinimizeResult, OptimizerSettings};
pub use torus::{torus_decompose, torus_energy, GreenKernel, TorusMap, TorusParts, TrigTerm};

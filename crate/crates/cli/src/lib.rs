//! Library side of the `renorm` command line tool: config parsing,
//! commands and report emission. The binary in `main.rs` only wires flags
//! to these pieces.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use clap::Subcommand;

pub use config::{emit_config, parse_config, parse_raw, preset_config, Domain, Preset, ProblemConfig, Resolution};
pub use error::{CliError, ConfigError, EXIT_CONTRACT, EXIT_OK, EXIT_VALIDATION};
pub use report::{emit_report, Outcome, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Hodge decomposition of a disk map; table of a and b per node.
    Decompose,
    /// Renormalized energy on the disk, torus or truncated plane.
    Energy,
    /// Sphere-valued lift, its degree and conformality.
    Lift,
    /// Locate vortices and their charges by plaquette winding.
    Detect,
    /// Vortex-count bounds against boundary variation and energy.
    BoundCheck,
    /// Flux of grad a through level sets of a.
    LevelFlux,
    /// Extension of a boundary datum and its energy bound.
    Extend,
    /// Search for energy-minimizing vortex positions.
    Minimize,
    /// Energy along a path of one vortex toward a limit point.
    SweepStability,
    /// Renormalized energy of a torus map.
    TorusEnergy,
    /// Quick invariant suite on closed-form instances.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Energy => "energy",
            Command::Lift => "lift",
            Command::Detect => "detect",
            Command::BoundCheck => "bound-check",
            Command::LevelFlux => "level-flux",
            Command::Extend => "extend",
            Command::Minimize => "minimize",
            Command::SweepStability => "sweep-stability",
            Command::TorusEnergy => "torus-energy",
            Command::Selftest => "selftest",
        }
    }

    pub fn run(self, config: &ProblemConfig) -> Result<Outcome, CliError> {
        use commands::*;
        match self {
            Command::Decompose => decompose_cmd(config),
            Command::Energy => energy_cmd(config),
            Command::Lift => lift_cmd(config),
            Command::Detect => detect_cmd(config),
            Command::BoundCheck => bound_check_cmd(config),
            Command::LevelFlux => level_flux_cmd(config),
            Command::Extend => extend_cmd(config),
            Command::Minimize => minimize_cmd(config),
            Command::SweepStability => sweep_cmd(config),
            Command::TorusEnergy => torus_energy_cmd(config),
            Command::Selftest => selftest_cmd(config),
        }
    }
}

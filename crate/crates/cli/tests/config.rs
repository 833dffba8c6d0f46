use proptest::prelude::*;
use renorm_cli::config::{BoundarySpec, ModeSpec, PhaseSpec, VortexSpec};
use renorm_cli::report::{bound, breakdown};
use renorm_cli::{emit_config, parse_config, Domain, ProblemConfig, Resolution};
use renorm_core::{BoundReport, EnergyBreakdown};

#[test]
fn minimal_disk_config_gets_defaults() {
    let cfg = parse_config("[[vortices]]\nposition = [0.0, 0.0]\ncharge = 1\n").unwrap();
    assert_eq!(cfg.domain(), Domain::Disk);
    assert_eq!(cfg.resolution, Resolution { n_radial: 128, n_theta: 256 });
    assert_eq!(cfg.margin, 0.02);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.vortices.len(), 1);
}

#[test]
fn zero_charge_is_rejected_with_its_field() {
    let err = parse_config("[[vortices]]\nposition = [0.1, 0.0]\ncharge = 0\n").unwrap_err();
    assert_eq!(err.path.as_deref(), Some("vortices[0].charge"));
    assert!(err.message.contains("nonzero integer"), "{err}");
}

#[test]
fn odd_boundary_charge_cites_even_rule() {
    let text = "[[vortices]]\nposition = [0.2, 0.0]\ncharge = 1\n[[vortices]]\nposition = [0.0, 1.0]\ncharge = 3\n";
    let err = parse_config(text).unwrap_err();
    assert_eq!(err.path.as_deref(), Some("vortices[1].charge"));
    assert!(err.message.contains("even charge"), "{err}");
    assert!(parse_config("[[vortices]]\nposition = [0.0, 1.0]\ncharge = 2\n").is_ok());
}

#[test]
fn unknown_fields_are_rejected_with_location() {
    let err = parse_config("seed = 1\n\n[boundary]\npreset = \"identity\"\nwobble = 2\n").unwrap_err();
    assert_eq!(err.line, Some(5));
    assert!(err.message.contains("wobble"), "{err}");
}

#[test]
fn malformed_resolution_is_rejected() {
    let err = parse_config("resolution = \"128by256\"\n").unwrap_err();
    assert!(err.message.contains("NrxNt"), "{err}");
}

#[test]
fn seeds_must_fit_a_toml_integer() {
    let cfg = ProblemConfig { seed: u64::MAX, ..ProblemConfig::default() };
    assert_eq!(cfg.resolve().unwrap_err().path.as_deref(), Some("seed"));
}

#[test]
fn torus_charges_must_cancel() {
    let err = parse_config("domain = \"torus\"\n[[vortices]]\nposition = [0.5, 0.5]\ncharge = 1\n").unwrap_err();
    assert_eq!(err.path.as_deref(), Some("vortices"));
}

#[test]
fn preset_on_wrong_domain_is_rejected() {
    let err = parse_config("domain = \"torus\"\npreset = \"single-vortex\"\n").unwrap_err();
    assert_eq!(err.path.as_deref(), Some("preset"));
}

#[test]
fn presets_expand_and_round_trip() {
    for preset in
        ["single-vortex", "blaschke-pair", "quadratic-phase", "plane-blaschke", "torus-winding", "torus-dipole"]
    {
        let cfg = parse_config(&format!("preset = \"{preset}\"\n")).unwrap();
        assert!(cfg.preset.is_none());
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg, "{preset}");
    }
}

#[test]
fn boundary_preset_expands_to_modes() {
    let cfg = parse_config("[boundary]\npreset = \"wobble\"\n").unwrap();
    let b = cfg.boundary.as_ref().unwrap();
    assert_eq!(b.degree, Some(1));
    assert_eq!(b.modes, vec![ModeSpec { k: 2, cos: 0.0, sin: 0.3 }]);
    assert_eq!(b.samples, Some(256));
    let g0 = cfg.boundary_signal().unwrap();
    assert_eq!(g0.len(), 256);
}

#[test]
fn full_config_round_trips() {
    let text = r#"
seed = 7
resolution = "64x128"
margin = 0.05

[[vortices]]
position = [0.2, -0.1]
charge = 1

[[phase]]
coefficient = 0.3
mx = 2
ny = 1

[boundary]
degree = 1
modes = [{ k = 3, cos = 0.1, sin = -0.2 }]

[minimize]
charges = [1]
starts = 3

[level_flux]
levels = [-0.5, 0.25]

[sweep]
limit = [1.0, 0.0]
steps = 4
"#;
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.optimizer_settings().seed, 7);
    assert_eq!(cfg.optimizer_settings().starts, 3);
    assert_eq!(cfg.flux_levels(), vec![-0.5, 0.25]);
    let (index, path, _) = cfg.sweep_path().unwrap();
    assert_eq!((index, path.len()), (0, 4));
    let again = parse_config(&emit_config(&cfg)).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(emit_config(&again), emit_config(&cfg));
}

#[test]
fn report_keys_are_stable() {
    let e = EnergyBreakdown { weighted_term: 1.0, b_term: 0.5, h_term: 0.0, lift_term: 1.0, total: 1.5 };
    let v = breakdown(&e);
    for key in ["weighted_term", "b_term", "h_term", "lift_term", "total"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let v = bound(&BoundReport::new(1.0, 2.0, "test"));
    for key in ["lhs", "rhs", "holds", "slack"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

fn vortex_specs() -> impl Strategy<Value = Vec<VortexSpec>> {
    prop::collection::vec(
        (0.0f64..0.9, 0.0f64..std::f64::consts::TAU, prop_oneof![Just(-2), Just(-1), Just(1), Just(2)]),
        0..4,
    )
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            // Spread radii so entries never coincide.
            .map(|(i, (r, t, d))| VortexSpec {
                position: [(r + i as f64) / 4.0 * t.cos(), (r + i as f64) / 4.0 * t.sin()],
                charge: d,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_emit_parse_is_idempotent(
        vortices in vortex_specs(),
        coeffs in prop::collection::vec((-2.0f64..2.0, 0u32..4, 0u32..4), 0..4),
        seed in 0..=i64::MAX as u64,
        nr in 8usize..200,
        nt in 8usize..300,
        degree in -3i64..4,
        mode in prop::option::of((1u32..6, -1.0f64..1.0, -1.0f64..1.0)),
    ) {
        let cfg = ProblemConfig {
            seed,
            resolution: Resolution { n_radial: nr, n_theta: 2 * nt },
            vortices,
            phase: coeffs.into_iter().map(|(coefficient, mx, ny)| PhaseSpec { coefficient, mx, ny }).collect(),
            boundary: Some(BoundarySpec {
                degree: Some(degree),
                modes: mode.into_iter().map(|(k, cos, sin)| ModeSpec { k, cos, sin }).collect(),
                ..BoundarySpec::default()
            }),
            ..ProblemConfig::default()
        }
        .resolve()
        .unwrap();
        let once = parse_config(&emit_config(&cfg)).unwrap();
        prop_assert_eq!(&once, &cfg);
        let twice = parse_config(&emit_config(&once)).unwrap();
        prop_assert_eq!(twice, once);
    }
}

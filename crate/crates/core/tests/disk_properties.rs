use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use proptest::prelude::*;
use renorm_core::energy::weight_f;
use renorm_core::family::map_family;
use renorm_core::*;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn grid_for(map: &SingularMap) -> Arc<PolarGrid> {
    Arc::new(build_polar_grid(128, 256, &map.vortices.positions()).unwrap())
}

fn family() -> Vec<renorm_core::family::FamilyMember> {
    map_family(11, 20)
}

#[test]
fn maps_are_unit_modulus() {
    for m in family() {
        for k in 0..200 {
            let z = Complex64::from_polar(0.995 * ((k as f64 + 0.5) / 200.0).sqrt(), 2.399 * k as f64);
            if m.map.vortices.distance_to(z) < 1e-6 {
                continue;
            }
            assert!((m.map.eval(z).unwrap().norm() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn detection_recovers_family_charges() {
    let grid = build_polar_grid(128, 256, &[]).unwrap();
    for m in family() {
        let found = detect_map(&grid, &m.map).unwrap();
        assert_eq!(found.len(), m.map.vortices.len(), "member {}", m.index);
        for v in m.map.vortices.entries() {
            let hit = found
                .entries()
                .iter()
                .find(|w| (w.position - v.position).norm() < 0.03)
                .unwrap_or_else(|| panic!("member {}: no vortex found near {}", m.index, v.position));
            assert_eq!(hit.charge, v.charge);
        }
    }
}

#[test]
fn boundary_degree_is_total_charge() {
    for m in family() {
        let lift = boundary_lift(&m.map.trace(256).unwrap()).unwrap();
        assert_eq!(lift.degree, m.map.vortices.total_charge(), "member {}", m.index);
    }
}

#[test]
fn lift_reexponentiates_to_the_datum() {
    for m in family() {
        let g0 = m.map.trace(256).unwrap();
        let lift = boundary_lift(&g0).unwrap();
        let lam = lift.lift.real_values().unwrap();
        for (u, l) in g0.unit_values().unwrap().iter().zip(lam) {
            assert!((u - Complex64::from_polar(1.0, *l)).norm() <= 1e-12);
        }
    }
}

#[test]
fn decomposition_invariants_on_family() {
    for m in family() {
        let grid = grid_for(&m.map);
        let parts = decompose(&m.map, grid.clone()).unwrap();
        assert!(parts.reconstruction_residual(&m.map) <= 1e-5, "member {}", m.index);
        let mean = grid.integrate_values(parts.a.as_scalar().unwrap()) / PI;
        assert!(mean.abs() <= 1e-3, "member {}: mean of a {mean:e}", m.index);
        for j in 0..256 {
            let w = Complex64::from_polar(1.0, TAU * j as f64 / 256.0);
            assert!(parts.b_value(w).abs() <= 1e-8);
        }
        if parts.b_vanishes() {
            assert!(dbar_residual(&m.map, &parts) <= 1e-5, "member {}", m.index);
        }
    }
}

#[test]
fn energy_identities_on_family() {
    for m in family() {
        let parts = decompose(&m.map, grid_for(&m.map)).unwrap();
        let e = renormalized_energy(&m.map, &parts).unwrap();
        assert!((e.lift_term - e.weighted_term).abs() / e.total.max(1.0) <= 1e-4, "member {}", m.index);

        let direct = parts.grid.integrate(|z| {
            let (a, ga) = parts.a_value_gradient(z).unwrap_or((0.0, c(0.0, 0.0)));
            weight_f(a) * ga.norm_sqr()
        });
        let arctan = arctan_term(&parts);
        assert!((direct - arctan).abs() <= 1e-4 * direct.abs().max(1e-12) + 1e-12, "member {}", m.index);

        let (_, gauge) = gauge_project(&m.map, &parts).unwrap();
        assert!(gauge.energy_after <= gauge.energy_before + 1e-8, "member {}", m.index);
        if parts.b_vanishes() {
            assert!((gauge.energy_after - gauge.energy_before).abs() <= 1e-8);
        }
    }
}

#[test]
fn plane_truncation_degree_is_nearly_integral() {
    for (zeros, poles) in
        [(vec![c(0.3, 0.0)], vec![c(-0.3, 0.0)]), (vec![c(0.3, 0.0), c(-0.3, 0.0)], vec![c(0.0, 0.3), c(0.0, -0.3)])]
    {
        let u = SphereField::meromorphic(&zeros, &poles, 20.0, 128, 256).unwrap();
        let d = lift_degree(&u);
        assert_eq!(d.rounded, zeros.len() as i64);
        assert!((d.raw - d.rounded as f64).abs() <= 0.02);
    }
}

#[test]
fn log_error_does_not_grow_under_refinement() {
    let exact = -PI / 2.0;
    let mut last = f64::INFINITY;
    for (nr, nt) in [(16, 32), (32, 64), (64, 128), (128, 256)] {
        let g = build_polar_grid(nr, nt, &[]).unwrap();
        let err = (g.integrate(|z| z.norm().ln()) - exact).abs();
        assert!(err <= last * (1.0 + 1e-12), "{nr}x{nt}: {err:e} after {last:e}");
        last = err;
    }
}

#[test]
fn weak_l2_constant_across_family() {
    let mut worst: f64 = 0.0;
    for m in family() {
        if m.map.vortices.is_empty() {
            continue;
        }
        let grid = grid_for(&m.map);
        let parts = decompose(&m.map, grid.clone()).unwrap();
        let values: Vec<f64> = grid.sample(|z| parts.a_value_gradient(z).map(|(_, d)| d.norm()).unwrap_or(0.0));
        let q = weak_l2_quasinorm(&values, grid.weights());
        let e = renormalized_energy(&m.map, &parts).unwrap().total;
        let tv = boundary_lift(&m.map.trace(256).unwrap()).unwrap().total_variation;
        worst = worst.max(q / (e + tv));
    }
    println!("fitted weak-L2 constant over the family: {worst:.4}");
    assert!(worst.is_finite() && worst > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_round_trip(values in prop::collection::vec(-10.0f64..10.0, 8..200)) {
        let n = values.len() & !1;
        let values = values[..n].to_vec();
        let s = BoundarySignal::from_real(values.clone()).unwrap();
        let back = BoundarySignal::from_modes_real(s.fourier_modes()).unwrap();
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in values.iter().zip(back.real_values().unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale * (n as f64).log2());
        }
    }

    #[test]
    fn grid_weights_sum_to_area(nr in 32usize..96, half in 8usize..64, r in 0.0f64..0.95, t in 0.0f64..TAU) {
        let g = build_polar_grid(nr, 2 * half, &[Complex64::from_polar(r, t)]).unwrap();
        prop_assert!((g.weights().iter().sum::<f64>() - PI).abs() <= 1e-8);
        prop_assert!((g.integrate(|z| z.norm_sqr()) - PI / 2.0).abs() <= 1e-6);
    }

    #[test]
    fn mirror_potential_is_neumann(r in 0.0f64..0.98, t in 0.0f64..TAU, d in prop_oneof![Just(-2), Just(-1), Just(1), Just(3)]) {
        let v = VortexConfig::single(Complex64::from_polar(r, t), d).unwrap();
        for j in 0..256 {
            let w = Complex64::from_polar(1.0, TAU * j as f64 / 256.0);
            let (_, grad) = mirror_potential(&v, w).unwrap();
            prop_assert!((grad * w.conj()).re.abs() <= 1e-10);
        }
    }

    #[test]
    fn count_bounds_hold(seed in 0u64..10_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let vortices = renorm_core::family::random_vortices(&mut rng, n, 3);
        let phase = SmoothPhase::polynomial(vec![
            PhaseTerm::new(rng.gen_range(-0.5..0.5), 2, 0),
            PhaseTerm::new(rng.gen_range(-0.5..0.5), 1, 1),
        ]).unwrap();
        let map = SingularMap::new(vortices, phase);
        let parts = decompose(&map, grid_for(&map)).unwrap();
        let (pos, total) = vortex_count_bound(&parts, &map.trace(256).unwrap()).unwrap();
        prop_assert!(pos.holds, "{pos:?}");
        prop_assert!(total.holds, "{total:?}");
    }

    #[test]
    fn extension_bound_has_positive_slack(
        degree in 1i64..=3,
        k in 1u32..5,
        amp in -0.4f64..0.4,
    ) {
        let g0 = BoundarySignal::sample_unit(256, |t| {
            Complex64::from_polar(1.0, degree as f64 * t + amp * (k as f64 * t).sin())
        }).unwrap();
        let grid = Arc::new(build_polar_grid(128, 256, &[c(0.0, 0.0)]).unwrap());
        let r = extension_energy_bound(&g0, degree, grid).unwrap();
        prop_assert!(r.holds && r.slack > 0.0, "{r:?}");
    }
}

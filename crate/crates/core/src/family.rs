//! Seeded families of test maps shared by tests, benches and the CLI self-test.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maps::{PhaseTerm, SingularMap, SmoothPhase, Vortex, VortexConfig};

/// Largest vortex radius in generated configurations.
pub const FAMILY_RADIUS: f64 = 0.8;
/// Smallest distance between generated vortices.
pub const FAMILY_SEPARATION: f64 = 0.15;

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub index: usize,
    pub map: SingularMap,
    /// The phase is harmonic, so the exact part of the decomposition vanishes.
    pub harmonic: bool,
}

/// `count` maps with 0 to 3 interior vortices of charge `+-1` or `+-2` and a
/// random polynomial phase. Even-indexed members have harmonic phases.
pub fn map_family(seed: u64, count: usize) -> Vec<FamilyMember> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|index| {
            let n = rng.gen_range(0..=3);
            let vortices = random_vortices(&mut rng, n, 2);
            let harmonic = index % 2 == 0;
            let phase = if harmonic { harmonic_phase(&mut rng) } else { generic_phase(&mut rng) };
            FamilyMember { index, map: SingularMap::new(vortices, phase), harmonic }
        })
        .collect()
}

/// `n` interior vortices with charges in `[-max_charge, max_charge] \ {0}`,
/// radius at most [`FAMILY_RADIUS`] and pairwise distance at least
/// [`FAMILY_SEPARATION`].
pub fn random_vortices(rng: &mut ChaCha8Rng, n: usize, max_charge: i32) -> VortexConfig {
    assert!(max_charge >= 1, "charges need a positive bound");
    let charges: Vec<i32> = (-max_charge..=max_charge).filter(|&d| d != 0).collect();
    let mut entries: Vec<Vortex> = Vec::with_capacity(n);
    while entries.len() < n {
        let r = FAMILY_RADIUS * rng.gen::<f64>().sqrt();
        let p = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        if entries.iter().all(|v| (v.position - p).norm() >= FAMILY_SEPARATION) {
            let charge = *charges.choose(rng).expect("nonempty charge set");
            entries.push(Vortex { position: p, charge });
        }
    }
    VortexConfig::new(entries).expect("generated vortices are valid")
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.gen_range(0.1..0.5);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Sum of one or two `Re(c z^k)`, `1 <= k <= 3`.
fn harmonic_phase(rng: &mut ChaCha8Rng) -> SmoothPhase {
    let mut phase = SmoothPhase::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let c = Complex64::new(coefficient(rng), coefficient(rng));
        let term = SmoothPhase::complex_monomial(c, rng.gen_range(1..=3)).expect("low degree");
        phase = phase.add_scaled(&term, 1.0).expect("polynomial phases add");
    }
    phase
}

/// A non-harmonic quadratic plus up to two random monomials of degree at most 4.
fn generic_phase(rng: &mut ChaCha8Rng) -> SmoothPhase {
    let mut terms = vec![PhaseTerm::new(coefficient(rng), 2, 0), PhaseTerm::new(coefficient(rng).abs(), 0, 2)];
    // Same-sign x^2 and y^2 coefficients give a nonzero Laplacian.
    terms[0].coefficient = terms[0].coefficient.abs();
    for _ in 0..rng.gen_range(0..=2) {
        let mx = rng.gen_range(0..=3u32);
        let ny = rng.gen_range(0..=(4 - mx).min(3));
        terms.push(PhaseTerm::new(coefficient(rng), mx, ny));
    }
    SmoothPhase::polynomial(terms).expect("low degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_reproducible() {
        let a = map_family(7, 12);
        let b = map_family(7, 12);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.map.vortices, y.map.vortices);
            assert_eq!(x.map.phase.terms(), y.map.phase.terms());
        }
    }

    #[test]
    fn family_respects_constraints() {
        for m in map_family(3, 60) {
            let v = m.map.vortices.entries();
            assert!(v.len() <= 3);
            for (i, a) in v.iter().enumerate() {
                assert!(a.position.norm() <= FAMILY_RADIUS && a.charge != 0 && a.charge.abs() <= 2);
                for b in &v[i + 1..] {
                    assert!((a.position - b.position).norm() >= FAMILY_SEPARATION);
                }
            }
            let lap = m.map.phase.laplacian(Complex64::new(0.1, 0.2)).abs();
            assert_eq!(lap < 1e-12, m.harmonic, "member {}", m.index);
        }
    }
}

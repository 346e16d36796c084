//! The oracles must notice a corrupted basis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sbspline::check::{c1_continuity, partition_of_unity};
use sbspline::mesh::ShapeSpec;
use sbspline::study::{Level, SpaceKind};

fn pentagon() -> (Level, sbspline::blend::BlendedBasis) {
    let level = Level::generate(&ShapeSpec::VGon { valence: 5 }).unwrap();
    let basis = level.basis(SpaceKind::Blended).unwrap();
    (level, basis)
}

#[test]
fn intact_basis_passes() {
    let (level, basis) = pentagon();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(partition_of_unity(&basis, &mut rng, 200).unwrap().passed);
    assert!(c1_continuity(&basis, &level.topo, &mut rng, 4).unwrap().iter().all(|o| o.passed));
}

#[test]
fn corrupted_weight_breaks_partition_of_unity() {
    let (_, mut basis) = pentagon();
    let w = &mut basis.weights[0];
    w.coeffs[0][4] += 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let outcome = partition_of_unity(&basis, &mut rng, 200).unwrap();
    assert!(!outcome.passed, "{outcome}");
}

#[test]
fn corrupted_weight_edge_breaks_c1() {
    let (level, mut basis) = pentagon();
    // Raising one boundary coefficient of a weight leaves a kink at the
    // element edge it sits on.
    let w = &mut basis.weights[0];
    w.coeffs[0][1] += 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let outcomes = c1_continuity(&basis, &level.topo, &mut rng, 4).unwrap();
    assert!(outcomes.iter().any(|o| !o.passed));
}

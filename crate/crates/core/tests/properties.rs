mod common;

use aklt_core::*;
use common::*;
use proptest::prelude::*;

fn lattice() -> impl Strategy<Value = (Lattice, PovmConfig)> {
    (1usize..=6, prop::bool::ANY, any::<u64>()).prop_map(|(half, open, seed)| {
        let b = if open { Boundary::Open } else { Boundary::Periodic };
        let lat = build_honeycomb(2 * half, b).unwrap();
        let cfg = random_config(lat.n_sites(), seed);
        (lat, cfg)
    })
}

fn open_lattice() -> impl Strategy<Value = (Lattice, PovmConfig)> {
    (2usize..=8, any::<u64>()).prop_map(|(half, seed)| {
        let lat = build_honeycomb(2 * half, Boundary::Open).unwrap();
        let cfg = random_config(lat.n_sites(), seed);
        (lat, cfg)
    })
}

fn outcome() -> impl Strategy<Value = Outcome> {
    prop::sample::select(Outcome::ALL.to_vec())
}

proptest! {
    #[test]
    fn betti_identity_per_sample((lat, cfg) in lattice()) {
        prop_assert_eq!(betti_identity(&lat, &cfg), Ok(()));
    }

    #[test]
    fn mod2_reduction_is_idempotent((lat, cfg) in lattice()) {
        prop_assert_eq!(mod2_idempotent(&lat, &cfg), Ok(()));
    }

    #[test]
    fn reduced_graph_obeys_euler_bound((lat, cfg) in lattice()) {
        prop_assert_eq!(euler_bound(&lat, &cfg), Ok(()));
    }

    #[test]
    fn outcome_relabelling_is_a_symmetry((lat, cfg) in lattice()) {
        prop_assert_eq!(label_permutation(&lat, &cfg), Ok(()));
    }

    #[test]
    fn torus_translation_is_a_symmetry(half in 1usize..=6, seed in any::<u64>()) {
        let lat = build_honeycomb(2 * half, Boundary::Periodic).unwrap();
        let cfg = random_config(lat.n_sites(), seed);
        prop_assert_eq!(translation_invariance(&lat, &cfg), Ok(()));
    }

    #[test]
    fn crossing_is_monotone_in_deletion(
        (lat, cfg) in open_lattice(),
        seed in any::<u64>(),
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
        edge in prop::bool::ANY,
    ) {
        let mode = if edge { DeletionMode::Edge } else { DeletionMode::Vertex };
        prop_assert_eq!(crossing_monotone(&lat, &cfg, seed, a.min(b), a.max(b), mode), Ok(()));
    }

    #[test]
    fn incremental_weight_matches_recount(
        (lat, cfg) in lattice(),
        moves in prop::collection::vec((any::<usize>(), outcome()), 1..60),
        seed in any::<u64>(),
        simple in prop::bool::ANY,
    ) {
        let conv = if simple { WeightConvention::Simple } else { WeightConvention::Multigraph };
        prop_assert_eq!(incremental_vs_recount(&lat, &cfg, conv, &moves, seed), Ok(()));
    }
}

#[test]
fn single_flip_kernel_satisfies_detailed_balance() {
    for conv in [WeightConvention::Multigraph, WeightConvention::Simple] {
        assert_eq!(exact_detailed_balance(conv), Ok(()));
    }
}

#[test]
fn sweep_flows_are_symmetric() {
    let z = empirical_flow_asymmetry(11, 100_000).unwrap();
    assert!(z.abs() < 5.0, "standardized flow asymmetry {z}");
}

#[test]
fn reduction_hand_examples() {
    assert_eq!(hand_examples(), Ok(()));
}

use proptest::prelude::*;

use gluing_core::algebra::{sample_rng, Algebra, Elem};
use gluing_core::atlas::{extract_gluing_data, validate_gluing_data};
use gluing_core::bitrel::BitRelation;
use gluing_core::builders::projective_space_kit;
use gluing_core::dsl::{parse_gluing_file, serialize};
use gluing_core::exec::Exec;
use gluing_core::groupoid::{epos_isomorphism, validate_epos, validate_groupoid};
use gluing_core::morphism::{atlas_continuous, extract_morphism_data, reconstruct_map, validate_morphism_data};
use gluing_core::natrel::{compose_relational, validate_nr};
use gluing_core::reconstruct::{atlas_isomorphism, glue_with, relation_is_equivalence};
use gluing_core::testing::{random_atlas, random_composable_pair, random_continuous_map, random_groupoid, random_model};

fn relation(n: usize, bits: &[bool]) -> BitRelation {
    BitRelation::from_pairs(n, n, (0..n * n).filter(|&k| bits[k]).map(|k| (k / n, k % n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(bits in prop::collection::vec(any::<bool>(), 75)) {
        let (a, b, c) = (relation(5, &bits[..25]), relation(5, &bits[25..50]), relation(5, &bits[50..]));
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert_eq!(a.compose(&b).transpose(), b.transpose().compose(&a.transpose()));
    }

    #[test]
    fn closures_are_idempotent(bits in prop::collection::vec(any::<bool>(), 36)) {
        let r = relation(6, &bits);
        let e = r.equivalence_closure();
        prop_assert!(r.is_subset(&e));
        prop_assert_eq!(e.transpose(), e.clone());
        prop_assert_eq!(e.equivalence_closure(), e.clone());
        let l = r.reflexive_transitive_closure();
        prop_assert_eq!(l.compose(&l), l.clone());
    }

    #[test]
    fn prime_field_inverse(p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]), a in 1u64..13) {
        let alg = Algebra::prime(p).unwrap();
        let x = Elem::Mod(a % p);
        if a % p != 0 {
            let xi = alg.inv(&x).unwrap();
            prop_assert_eq!(alg.mul(&x, &xi), alg.one());
        } else {
            prop_assert!(!alg.is_invertible(&x));
        }
    }

    #[test]
    fn random_atlases_round_trip(seed in any::<u64>()) {
        let a = random_atlas(&mut sample_rng(seed, 0), 8);
        let g = extract_gluing_data(&a).unwrap();
        prop_assert!(validate_gluing_data(&g).is_valid());
        prop_assert!(validate_epos(&g.epos).is_valid());
        prop_assert!(relation_is_equivalence(&g).is_valid());
        let m = glue_with(&g, Exec::Sequential).unwrap();
        prop_assert!(atlas_isomorphism(&a, &m).is_ok());
        let back = extract_gluing_data(&m.to_atlas()).unwrap();
        prop_assert!(epos_isomorphism(&g.epos, &back.epos).is_some());
    }

    #[test]
    fn execution_modes_agree(seed in any::<u64>()) {
        let g = extract_gluing_data(&random_atlas(&mut sample_rng(seed, 1), 8)).unwrap();
        let (a, b) = (glue_with(&g, Exec::Sequential).unwrap(), glue_with(&g, Exec::Parallel).unwrap());
        prop_assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn continuous_maps_round_trip(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 2);
        let (a, b) = (random_model(&mut rng, 6), random_model(&mut rng, 6));
        let f = random_continuous_map(&a, &b, &mut rng, 5000);
        prop_assert!(atlas_continuous(&a, &b, &f).is_ok());
        let d = extract_morphism_data(&a, &b, &f).unwrap();
        prop_assert!(validate_morphism_data(&d).is_valid());
        prop_assert_eq!(reconstruct_map(&d, &a, &b).unwrap(), f);
    }

    #[test]
    fn groupoids_and_relational_composites_are_valid(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 3);
        prop_assert!(validate_groupoid(&random_groupoid(&mut rng)).is_valid());
        let (n1, n2) = random_composable_pair(&mut rng);
        prop_assert!(validate_nr(&compose_relational(&n2, &n1).unwrap()).is_valid());
    }
}

#[test]
fn generated_kits_survive_serialization() {
    for (p, n) in [(2, 1), (3, 2), (2, 3)] {
        let kit = projective_space_kit(&Algebra::prime(p).unwrap(), n).unwrap();
        assert_eq!(parse_gluing_file(&serialize(&kit)).unwrap(), kit);
    }
}

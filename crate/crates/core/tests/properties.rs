mod common;

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;

use common::*;
use rcmplex::boolean::{grains_intersect, PlacedGrain};
use rcmplex::functionals::{count_induced, euler_characteristic, is_isomorphic, make_k_p};
use rcmplex::homology::{betti_vector, betti_vector_direct, chain_complex};
use rcmplex::stats::{mean, standardize, variance};
use rcmplex::{
    build_complex, build_coupled, sample_poisson, ConnectionKernel, Mark, MarkSampler, PointConfiguration, Window,
};

fn kernel_strategy() -> impl Strategy<Value = ConnectionKernel> {
    prop_oneof![
        (0.3..1.5f64, 0.0..1.0f64).prop_map(|(r, p)| ConnectionKernel::geometric_plus_p(3, r, p).unwrap()),
        (0.3..1.5f64).prop_map(|r| ConnectionKernel::vietoris_rips(3, r).unwrap()),
        (0.5..4.0f64, 0.01..0.5f64).prop_map(|(rate, theta)| ConnectionKernel::exponential(3, rate, theta).unwrap()),
    ]
}

fn sample(side: f64, gamma: f64, seed: u64) -> PointConfiguration {
    sample_poisson(&Window::centered(2, side).unwrap(), gamma, &MarkSampler::default(), seed, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampling_is_reproducible_and_inside_the_window(seed: u64, side in 1.0..6.0f64, gamma in 0.0..3.0f64) {
        let a = sample(side, gamma, seed);
        let b = sample(side, gamma, seed);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.points.iter().all(|p| a.window.contains(&p.position)));
        let ids: HashSet<u64> = a.ids().collect();
        prop_assert_eq!(ids.len(), a.len());
    }

    #[test]
    fn configuration_json_round_trips(seed: u64) {
        let a = sample(3.0, 2.0, seed);
        prop_assert_eq!(PointConfiguration::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn kernels_are_symmetric_translation_invariant_probabilities(
        k in kernel_strategy(),
        pts in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..=4),
        shift in (-50.0..50.0f64, -50.0..50.0f64),
    ) {
        let j = pts.len() - 1;
        let mark = Mark::Constant(0.0);
        let pos: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
        let args: Vec<(&[f64], &Mark)> = pos.iter().map(|p| (p.as_slice(), &mark)).collect();
        let v = k.evaluate(j, &args).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let rev: Vec<(&[f64], &Mark)> = args.iter().rev().copied().collect();
        prop_assert_eq!(k.evaluate(j, &rev).unwrap(), v);
        let moved: Vec<Vec<f64>> = pos.iter().map(|p| vec![p[0] + shift.0, p[1] + shift.1]).collect();
        let margs: Vec<(&[f64], &Mark)> = moved.iter().map(|p| (p.as_slice(), &mark)).collect();
        prop_assert!((k.evaluate(j, &margs).unwrap() - v).abs() <= 1e-12);
    }

    #[test]
    fn restriction_commutes_with_building(k in kernel_strategy(), seed: u64, inner in 1.0..4.0f64) {
        let cfg = sample(4.0, 2.0, seed);
        let full = build_complex(&cfg, &k).unwrap();
        let sub = cfg.restrict(&Window::centered(2, inner).unwrap()).unwrap();
        let keep: HashSet<u64> = sub.ids().collect();
        prop_assert_eq!(build_complex(&sub, &k).unwrap(), full.restrict_to(&keep));
    }

    #[test]
    fn inserting_a_point_only_adds_simplices(k in kernel_strategy(), seed: u64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let cfg = sample(4.0, 2.0, seed);
        let extra = cfg.new_point(vec![x, y], Mark::Constant(0.0)).unwrap();
        let pair = build_coupled(&cfg, &k, &extra).unwrap();
        prop_assert!(pair.without_point.is_subcomplex_of(&pair.with_point));
        prop_assert!(!pair.without_point.contains_vertex(extra.id));
        prop_assert!(pair.with_point.contains_vertex(extra.id));
        let old: HashSet<u64> = cfg.ids().collect();
        prop_assert_eq!(pair.with_point.restrict_to(&old), pair.without_point);
    }

    #[test]
    fn larger_connection_probabilities_give_larger_complexes(seed: u64, r in 0.3..1.2f64, dr in 0.0..0.5f64, p in 0.0..1.0f64, dp in 0.0..0.5f64) {
        let cfg = sample(4.0, 2.0, seed);
        let small = build_complex(&cfg, &ConnectionKernel::geometric_plus_p(2, r, p).unwrap()).unwrap();
        let big = build_complex(&cfg, &ConnectionKernel::geometric_plus_p(2, r + dr, (p + dp).min(1.0)).unwrap()).unwrap();
        prop_assert!(small.is_subcomplex_of(&big));
    }

    #[test]
    fn betti_numbers_obey_the_basic_identities(seed: u64, alpha in 1usize..=4) {
        let mut rng = rng(seed);
        let k = random_small_complex(&mut rng, 7, alpha);
        let other = random_small_complex(&mut rng, 7, alpha);
        let b = betti_vector_direct(&k, alpha + 1).unwrap();
        prop_assert_eq!(&b, &betti_vector(&k, alpha + 1).unwrap());
        prop_assert_eq!(&b, &brute_betti(&k, alpha + 1));
        // vanishing above the dimension
        let dim = k.dim().unwrap();
        prop_assert!(b[dim + 1..].iter().all(|&x| x == 0));
        // only the (p+1)-skeleton matters for β_p
        for p in 0..alpha {
            prop_assert_eq!(betti_vector_direct(&k.skeleton(p + 1), p).unwrap()[p], b[p]);
        }
        // additivity over disjoint unions
        let bo = betti_vector_direct(&other, alpha + 1).unwrap();
        let bu = betti_vector_direct(&k.disjoint_union(&other, 100).unwrap(), alpha + 1).unwrap();
        for p in 0..=alpha + 1 {
            prop_assert_eq!(bu[p], b[p] + bo[p]);
        }
        // Euler–Poincaré
        let alt: i64 = b.iter().enumerate().map(|(p, &x)| if p % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        prop_assert_eq!(alt, euler_characteristic(&k));
    }

    #[test]
    fn boundary_of_boundary_vanishes(seed: u64, alpha in 1usize..=4) {
        let k = random_small_complex(&mut rng(seed), 7, alpha);
        let c = chain_complex(&k).unwrap();
        for p in 1..=alpha {
            if let Some(d) = c.boundary(p) {
                for col in 0..d.cols() {
                    prop_assert_eq!(d.column_weight(col), p + 1);
                }
                if let Some(next) = c.boundary(p + 1) {
                    prop_assert!(d.mul(next).is_zero());
                }
            }
        }
    }

    #[test]
    fn isomorphism_ignores_vertex_names(seed: u64, offset in 1u64..1000, alpha in 1usize..=3) {
        let mut r = rng(seed);
        let k = random_small_complex(&mut r, 6, alpha);
        let verts: Vec<u64> = k.vertex_ids().collect();
        let mut perm = verts.clone();
        perm.rotate_left(seed as usize % verts.len().max(1));
        let map: HashMap<u64, u64> = verts.iter().zip(&perm).map(|(&a, &b)| (a, b + offset)).collect();
        let renamed = k.relabel(&map).unwrap();
        prop_assert!(is_isomorphic(&k, &renamed).unwrap());
        let pattern = make_k_p(1);
        prop_assert_eq!(count_induced(&k, &pattern).unwrap(), count_induced(&renamed, &pattern).unwrap());
    }

    #[test]
    fn grain_intersection_ignores_argument_order(
        disks in prop::collection::vec((0.0..3.0f64, 0.0..3.0f64, 0.2..1.2f64), 2..=5),
        shift in 0usize..5,
    ) {
        let grains: Vec<PlacedGrain> = disks.iter().map(|&(x, y, r)| PlacedGrain::ball(vec![x, y], r)).collect();
        let mut rotated = grains.clone();
        rotated.rotate_left(shift % grains.len());
        let mut reversed = grains.clone();
        reversed.reverse();
        let a = grains_intersect(&grains).unwrap();
        prop_assert_eq!(a, grains_intersect(&rotated).unwrap());
        prop_assert_eq!(a, grains_intersect(&reversed).unwrap());
    }

    #[test]
    fn standardized_samples_have_unit_moments(xs in prop::collection::vec(-100.0..100.0f64, 3..50)) {
        if let Some(z) = standardize(&xs) {
            prop_assert!(mean(&z).abs() < 1e-12);
            prop_assert!((variance(&z) - 1.0).abs() < 1e-12);
        }
    }
}

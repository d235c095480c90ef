//! Property tests for the structural invariants: monotonicity of
//! neighborhoods and profiles, component refinement and separation,
//! tower nesting, and checker/solver agreement on random spaces.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsekit::corpus;
use coarsekit::dimension::{control_exact, control_upper, verify_cover, UpperStrategy};
use coarsekit::maps::n_to_1_threshold;
use coarsekit::space::{diameter, neighborhood, threshold_components, validate_metric, PointId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn neighborhoods_are_monotone(seed in 0u64..500, r1 in 0.0f64..20.0, r2 in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_line_subset(&mut rng, 12, 60);
        let a: Vec<PointId> = space.points().iter().copied().step_by(3).collect();
        let b: Vec<PointId> = space.points().iter().copied().step_by(6).collect();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let n_lo = neighborhood(&space, &a, lo);
        let n_hi = neighborhood(&space, &a, hi);
        // monotone in R
        prop_assert!(n_lo.iter().all(|p| n_hi.contains(p)));
        // contains A
        prop_assert!(a.iter().all(|p| n_lo.contains(p)));
        // monotone in A
        let n_b = neighborhood(&space, &b, lo);
        prop_assert!(n_b.iter().all(|p| n_lo.contains(p)));
    }

    #[test]
    fn components_refine_and_separate(seed in 0u64..500, r1 in 1.0f64..10.0, r2 in 1.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_path_metric_space(&mut rng, 14);
        let pts: Vec<PointId> = space.points().to_vec();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let fine = threshold_components(&space, &pts, lo);
        let coarse = threshold_components(&space, &pts, hi);
        // refinement: every fine component sits inside one coarse component
        for f in &fine {
            let hosts: Vec<usize> = coarse
                .iter()
                .enumerate()
                .filter(|(_, c)| f.iter().any(|p| c.contains(p)))
                .map(|(i, _)| i)
                .collect();
            prop_assert_eq!(hosts.len(), 1);
        }
        // separation: distinct components are more than R apart
        for (i, c1) in fine.iter().enumerate() {
            for c2 in fine.iter().skip(i + 1) {
                for &p in c1 {
                    for &q in c2 {
                        prop_assert!(space.dist(p, q) > lo);
                    }
                }
            }
        }
    }

    #[test]
    fn random_metrics_validate_and_diameters_monotone(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_path_metric_space(&mut rng, 10);
        prop_assert!(validate_metric(&space).is_valid());
        let all: Vec<PointId> = space.points().to_vec();
        let sub: Vec<PointId> = all.iter().copied().take(5).collect();
        prop_assert!(diameter(&space, &sub).unwrap() <= diameter(&space, &all).unwrap());
    }

    #[test]
    fn threshold_is_monotone_in_scale(k in 5u32..8, s1 in 1.0f64..8.0, s2 in 1.0f64..8.0) {
        let map = corpus::coarse_cantor(k).unwrap();
        let r = map.source().max_radius();
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let c_lo = n_to_1_threshold(&map, 2, lo, r).unwrap();
        let c_hi = n_to_1_threshold(&map, 2, hi, r).unwrap();
        prop_assert!(c_lo.s.unwrap_or(0.0) <= c_hi.s.unwrap_or(0.0));
    }

    #[test]
    fn covers_always_verify(seed in 0u64..500, n in 1usize..3, scale in 1.0f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_path_metric_space(&mut rng, 12);
        let (b_up, cover_up) = control_upper(&space, n, scale, UpperStrategy::Auto, seed);
        prop_assert!(verify_cover(&space, &cover_up));
        let (b_ex, cover_ex) = control_exact(&space, n, scale, 40).unwrap();
        prop_assert!(verify_cover(&space, &cover_ex));
        prop_assert!(b_ex <= b_up);
    }

    #[test]
    fn tower_truncations_nest(j in 1u32..8) {
        let tower = corpus::xor_space(8).unwrap();
        let radii = tower.declared_radii().to_vec();
        let small = tower.truncation(radii[(j as usize - 1).min(radii.len() - 1)]).unwrap();
        let big = tower.truncation(*radii.last().unwrap()).unwrap();
        for &p in small.points() {
            prop_assert!(big.contains(p));
            for &q in small.points() {
                prop_assert_eq!(small.dist(p, q), big.dist(p, q));
            }
        }
    }
}

//! Property tests for the structural invariants that hold on every input,
//! not just the curated fixtures.

use ap3_core::apsets::{count_3aps, is_ap_free};
use ap3_core::fourier::{forward_transform, inverse_transform, transform_indicator};
use ap3_core::group::{AmbientGroup, IntervalSet, SetData, SiteSet};
use ap3_core::increment::dirichlet;
use num_complex::Complex64;
use proptest::collection::btree_set;
use proptest::prelude::*;

fn arb_cyclic_group() -> impl Strategy<Value = AmbientGroup> {
    (1u64..=90).prop_map(|n| AmbientGroup::cyclic(n).unwrap())
}

fn arb_vector_group() -> impl Strategy<Value = AmbientGroup> {
    (1u32..=4).prop_map(|n| AmbientGroup::vector(n).unwrap())
}

fn arb_group() -> impl Strategy<Value = AmbientGroup> {
    prop_oneof![arb_cyclic_group(), arb_vector_group()]
}

proptest! {
    #[test]
    fn addition_is_a_group_law(g in arb_group(), seed in any::<u64>()) {
        let n = g.order();
        let a = seed % n;
        let b = seed.rotate_left(17) % n;
        let c = seed.rotate_left(43) % n;
        prop_assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
        prop_assert_eq!(g.add(a, g.neg(a)), 0);
        prop_assert_eq!(g.add(a, 0), a);
    }

    #[test]
    fn set_json_round_trips(g in arb_group(), raw in btree_set(0u64..81, 0..20)) {
        let elems: Vec<u64> = raw.into_iter().filter(|&e| e < g.order()).collect();
        let set = SetData::Group(SiteSet::new(g, elems).unwrap());
        let back = SetData::from_json(&set.to_json()).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn interval_json_round_trips(n in 1u64..200, raw in btree_set(1u64..200, 0..30)) {
        let elems: Vec<u64> = raw.into_iter().filter(|&e| e <= n).collect();
        let set = SetData::Interval(IntervalSet::new(n, elems).unwrap());
        let back = SetData::from_json(&set.to_json()).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn transform_round_trips(g in arb_group(), seed in any::<u64>()) {
        let mut state = seed | 1;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let f: Vec<Complex64> = (0..g.order()).map(|_| Complex64::new(next(), next())).collect();
        let back = inverse_transform(&forward_transform(&g, &f).unwrap()).unwrap();
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval_mass_is_density(raw in btree_set(0u64..81, 1..30), dim in 2u32..=4) {
        let g = AmbientGroup::vector(dim).unwrap();
        let elems: Vec<u64> = raw.into_iter().filter(|&e| e < g.order()).collect();
        prop_assume!(!elems.is_empty());
        let set = SiteSet::new(g, elems).unwrap();
        let mass: f64 = transform_indicator(&set).values.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((mass - set.density_f64()).abs() < 1e-10);
    }

    #[test]
    fn ap_counts_are_consistent(n in 1u64..40, raw in btree_set(1u64..40, 0..20)) {
        let elems: Vec<u64> = raw.into_iter().filter(|&e| e <= n).collect();
        let set = SetData::Interval(IntervalSet::new(n, elems.clone()).unwrap());
        // count_3aps itself cross-checks the loop and convolution routes
        let counts = count_3aps(&set).unwrap();
        prop_assert_eq!(counts.trivial, elems.len() as u64);
        prop_assert_eq!(counts.nontrivial % 2, 0);
        let (free, witness) = is_ap_free(&set).unwrap();
        prop_assert_eq!(free, counts.nontrivial == 0);
        if let Some(w) = witness {
            prop_assert!(set.as_interval().unwrap().contains(w.start));
            prop_assert!(set.as_interval().unwrap().contains(w.start + w.gap));
            prop_assert!(set.as_interval().unwrap().contains(w.start + 2 * w.gap));
        }
    }

    #[test]
    fn dirichlet_inequality_is_strict(gamma in 0.0f64..1.0, q_max in 1u64..300) {
        let r = dirichlet(&[gamma], q_max, 1).unwrap();
        prop_assert!(r.q >= 1 && r.q <= q_max);
        let err = (gamma - r.numerators[0] as f64 / r.q as f64).abs();
        prop_assert!(err < 1.0 / (r.q as f64 * q_max as f64));
        // minimality of q
        for q in 1..r.q {
            let p = (gamma * q as f64).round();
            let e = (gamma - p / q as f64).abs();
            prop_assert!(e >= 1.0 / (q as f64 * q_max as f64));
        }
    }
}

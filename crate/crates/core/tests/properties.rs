//! Randomized invariants that cut across modules: code/permutation
//! correspondence, group laws, inversion symmetries, window patterns, grid
//! mass additivity, and the analytic truncated-geometric table. Sizes here go
//! well past the exhaustive-enumeration range of the unit suites.

use proptest::prelude::*;

use mallows_core::measure::{ks_statistic, AnchoredMasses, GridCounts};
use mallows_core::perm::Permutation;
use mallows_core::sampler::{
    decode_lehmer, sample_mallows, truncated_geometric_prob, LehmerCode, MallowsParams, SeedSpec,
};

/// Valid inversion table for size n: digit i is reduced modulo n−i.
fn code_from_raw(n: usize, raw: &[u32]) -> LehmerCode {
    let digits: Vec<u32> = raw
        .iter()
        .enumerate()
        .map(|(i, &v)| v % (n - i) as u32)
        .collect();
    LehmerCode::new(digits).expect("reduced digits are in range")
}

fn perm_strategy(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<u32>(), n)
            .prop_map(move |raw| decode_lehmer(&code_from_raw(n, &raw)).unwrap())
    })
}

/// Three same-size permutations plus two index seeds.
fn triple_strategy(
    max_n: usize,
) -> impl Strategy<Value = (Permutation, Permutation, Permutation, usize, usize)> {
    (2..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<u32>(), n),
            proptest::collection::vec(any::<u32>(), n),
            proptest::collection::vec(any::<u32>(), n),
            0..n,
            0..n,
        )
            .prop_map(move |(a, b, c, i, k)| {
                (
                    decode_lehmer(&code_from_raw(n, &a)).unwrap(),
                    decode_lehmer(&code_from_raw(n, &b)).unwrap(),
                    decode_lehmer(&code_from_raw(n, &c)).unwrap(),
                    i + 1,
                    k + 1,
                )
            })
    })
}

proptest! {
    #[test]
    fn decoded_code_sum_is_the_inversion_number(
        (n, raw) in (1usize..=80).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(any::<u32>(), n))
        })
    ) {
        let code = code_from_raw(n, &raw);
        let p = decode_lehmer(&code).unwrap();
        prop_assert_eq!(p.inversion_number(), code.sum());
        prop_assert_eq!(decode_lehmer(&code).unwrap(), p);
    }

    #[test]
    fn reassignment_delta_matches_the_rebuilt_neighbor(
        (p, _, _, i, k) in triple_strategy(40)
    ) {
        let neighbors = p.q_neighbors(i).unwrap();
        prop_assert_eq!(neighbors.len(), p.n());
        prop_assert_eq!(&neighbors[p.get(i) - 1], &p);
        let tau = &neighbors[k - 1];
        prop_assert_eq!(tau.get(i), k);
        let predicted = p.inversion_delta(i, k).unwrap();
        let actual = tau.inversion_number() as i64 - p.inversion_number() as i64;
        prop_assert_eq!(predicted, actual);
    }

    #[test]
    fn composition_laws_hold((a, b, c, _, _) in triple_strategy(50)) {
        let n = a.n();
        let id = Permutation::identity(n).unwrap();
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(a.compose(&id).unwrap(), a.clone());
        prop_assert_eq!(id.compose(&a).unwrap(), a.clone());
        prop_assert_eq!(a.compose(&a.inverse()).unwrap(), id);
    }

    #[test]
    fn inversion_symmetries_hold(p in perm_strategy(80)) {
        let n = p.n() as u64;
        let l = p.inversion_number();
        prop_assert_eq!(p.inverse().inversion_number(), l);
        prop_assert_eq!(p.reverse().inversion_number(), n * (n - 1) / 2 - l);
    }

    #[test]
    fn window_pattern_preserves_relative_order(
        (p, _, _, i, k) in triple_strategy(60)
    ) {
        let (j, k) = (i.min(k), i.max(k));
        prop_assume!(j < k);
        let pattern = p.restrict(j, k).unwrap();
        let w = k - j + 1;
        prop_assert_eq!(pattern.n(), w);
        for s in 1..=w {
            for t in (s + 1)..=w {
                prop_assert_eq!(
                    pattern.get(s) < pattern.get(t),
                    p.get(j + s - 1) < p.get(j + t - 1)
                );
            }
        }
    }

    #[test]
    fn full_window_pattern_is_the_permutation(p in perm_strategy(60)) {
        prop_assume!(p.n() >= 2);
        prop_assert_eq!(p.restrict(1, p.n()).unwrap(), p);
    }

    #[test]
    fn grid_masses_are_additive(
        (p, m, cut) in perm_strategy(120).prop_flat_map(|p| {
            let n = p.n();
            (Just(p), 1..=n.min(12), any::<u32>()).prop_map(|(p, m, cut)| (p, m, cut))
        })
    ) {
        let counts = GridCounts::from_permutation(&p, m).unwrap();
        let masses: AnchoredMasses<f64> = AnchoredMasses::from_grid_counts(&counts);
        prop_assert!((masses.anchored(m, m) - 1.0).abs() < 1e-12);
        // Vertical split of the full square.
        if m >= 2 {
            let c = 1 + (cut as usize) % (m - 1);
            let left = masses.rect_mass(1, c, 1, m);
            let right = masses.rect_mass(c + 1, m, 1, m);
            prop_assert!((left + right - 1.0).abs() < 1e-12);
        }
        // Each band column sums the counts it covers.
        let band = 1 + (cut as usize) % m;
        let direct: u64 = (1..=m).map(|b| counts.count(band, b) as u64).sum();
        let via_mass = masses.rect_mass(band, band, 1, m);
        prop_assert!((via_mass - direct as f64 / p.n() as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_statistic_is_bounded_and_order_free(
        values in proptest::collection::vec(0.0f64..1.0, 1..200)
    ) {
        let ks = ks_statistic(&values, |x: f64| x).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
        let mut reversed = values.clone();
        reversed.reverse();
        let ks_rev = ks_statistic(&reversed, |x: f64| x).unwrap();
        prop_assert_eq!(ks, ks_rev);
    }

    #[test]
    fn truncated_geometric_table_is_a_distribution(
        q in 0.05f64..=2.0,
        m in 0usize..=60
    ) {
        let total: f64 = (0..=m).map(|k| truncated_geometric_prob(q, m, k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for k in 0..m {
            let ratio = truncated_geometric_prob(q, m, k + 1) / truncated_geometric_prob(q, m, k);
            prop_assert!((ratio - q).abs() < 1e-9 * q.max(1.0));
        }
    }

    #[test]
    fn draws_are_a_pure_function_of_seed_and_stream(
        // The 1 - beta/n schedule needs beta < n for a positive ratio.
        n in 8usize..=200,
        beta in -4.0f64..=4.0,
        seed in any::<u64>(),
        stream in 0u64..=8
    ) {
        let params = MallowsParams::from_beta(n, beta).unwrap();
        let spec = SeedSpec::new(seed);
        let first = sample_mallows(&params, &spec, stream);
        let second = sample_mallows(&params, &spec, stream);
        prop_assert_eq!(first, second);
    }
}

//! Property tests for the standalone lemma checks: the normalized-difference
//! bound with its proof-internal steps, the exponential transform bounds, and
//! the concave profile's derivative ranges.

use normpx_core::proofkit::{
    exp_transform, normalized_difference_bound, normalized_difference_intermediates, phi,
    phi_prime, phi_second,
};
use proptest::prelude::*;

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2500))]

    #[test]
    fn difference_bound_and_intermediates_hold_at_unit_scale(
        dim in 1..=4usize,
        seed_a in vec_strategy(4),
        seed_b in vec_strategy(4),
        eps in prop_oneof![Just(0.0), 1e-4..10.0f64],
    ) {
        let a = &seed_a[..dim];
        let b = &seed_b[..dim];
        let main = match normalized_difference_bound(a, b, eps) {
            Ok(v) => v,
            // zero vectors and near-equal pairs are rejected by contract
            Err(_) => return Ok(()),
        };
        prop_assert!(main.holds, "lhs {} > rhs {}", main.lhs, main.rhs);
        let (step, norm_gap) = normalized_difference_intermediates(a, b, eps).unwrap();
        prop_assert!(step.holds);
        prop_assert!(norm_gap.holds);
        // the chain is consistent: the step bound is at least as sharp
        prop_assert!(step.rhs <= main.rhs * (1.0 + 1e-12));
    }

    #[test]
    fn exp_transform_respects_the_convexity_bounds(
        h_gap in 0.0..4.0f64,
        hmax in -3.0..3.0f64,
        nu_exp in -4.0..2.0f64,
    ) {
        let nu = 10f64.powf(nu_exp);
        let h = hmax - h_gap;
        let hbar = exp_transform(h, nu, hmax).unwrap();
        prop_assert!(hbar >= 0.0);
        prop_assert!(hbar <= h_gap * (1.0 + 1e-12) + 1e-15);
        // equality at the top
        prop_assert_eq!(exp_transform(hmax, nu, hmax).unwrap(), 0.0);
    }

    #[test]
    fn exp_transform_approaches_the_identity_as_nu_vanishes(
        h_gap in 0.0..2.0f64,
        hmax in -1.0..1.0f64,
    ) {
        let hbar = exp_transform(hmax - h_gap, 1e-9, hmax).unwrap();
        prop_assert!((hbar - h_gap).abs() <= 1e-7 * (1.0 + h_gap));
    }

    #[test]
    fn profile_derivatives_stay_in_their_proven_ranges(
        gamma in 1.0001..1.9999f64,
        s in 0.0..2.0f64,
        ds in 1e-6..0.5f64,
    ) {
        prop_assert_eq!(phi(0.0, gamma).unwrap(), 0.0);
        let d1 = phi_prime(s, gamma).unwrap();
        prop_assert!((0.75 - 1e-12..=1.0 + 1e-12).contains(&d1), "phi' = {d1}");
        if s > 0.0 {
            prop_assert!(phi_second(s, gamma).unwrap() < 0.0);
        }
        // mean value consequence of phi' in [3/4, 1]
        let s2 = (s + ds).min(2.0);
        let gap = phi(s2, gamma).unwrap() - phi(s, gamma).unwrap();
        prop_assert!(gap >= 0.75 * (s2 - s) - 1e-12);
        prop_assert!(gap <= (s2 - s) + 1e-12);
    }

    #[test]
    fn profile_prime_at_two_is_exactly_three_quarters(gamma in 1.0001..1.9999f64) {
        prop_assert!((phi_prime(2.0, gamma).unwrap() - 0.75).abs() <= 1e-14);
    }
}

//! Property tests for the grid calculus and region statistics: stencil
//! exactness on random quadratics, measurement invariances, and monotonicity
//! under region inclusion.

use normpx_core::field::{self, ScalarField};
use normpx_core::grid::{BallRegion, Grid};
use proptest::prelude::*;

fn test_grid() -> Grid {
    Grid::new(2, 17).unwrap()
}

proptest! {
    #[test]
    fn stencils_reproduce_random_quadratics_exactly(c in prop::array::uniform6(-2.0..2.0f64)) {
        let grid = test_grid();
        let u = ScalarField::from_fn(&grid, |x| {
            c[0] + c[1] * x[0]
                + c[2] * x[1]
                + 0.5 * c[3] * x[0] * x[0]
                + c[4] * x[0] * x[1]
                + 0.5 * c[5] * x[1] * x[1]
        })
        .unwrap();
        let du = field::gradient(&u).unwrap();
        for &node in grid.interior_nodes() {
            let x = [grid.coord(node, 0), grid.coord(node, 1)];
            let gx = c[1] + c[3] * x[0] + c[4] * x[1];
            let gy = c[2] + c[4] * x[0] + c[5] * x[1];
            prop_assert!((du.component(node, 0) - gx).abs() <= 1e-9);
            prop_assert!((du.component(node, 1) - gy).abs() <= 1e-9);
            let h = field::hessian(&u, node).unwrap();
            prop_assert!((h[0] - c[3]).abs() <= 1e-9);
            prop_assert!((h[1] - c[4]).abs() <= 1e-9);
            prop_assert!((h[2] - c[4]).abs() <= 1e-9);
            prop_assert!((h[3] - c[5]).abs() <= 1e-9);
        }
    }

    #[test]
    fn oscillation_is_shift_invariant_and_absolutely_homogeneous(
        shift in -10.0..10.0f64,
        scale in -4.0..4.0f64,
        (k1, k2) in (0.5..4.0f64, 0.5..4.0f64),
        r in 0.2..0.9f64,
    ) {
        let grid = test_grid();
        let region = BallRegion::centred(2, r).unwrap();
        let u = ScalarField::from_fn(&grid, |x| (k1 * x[0]).sin() + (k2 * x[1]).cos()).unwrap();
        let osc = field::oscillation(&u, &region).unwrap();
        prop_assert!((field::supremum(&u, &region).unwrap()
            - field::infimum(&u, &region).unwrap()
            - osc)
            .abs()
            == 0.0);

        let moved = ScalarField::from_fn(&grid, |x| (k1 * x[0]).sin() + (k2 * x[1]).cos() + shift)
            .unwrap();
        prop_assert!((field::oscillation(&moved, &region).unwrap() - osc).abs() <= 1e-12);

        let scaled = ScalarField::from_fn(&grid, |x| scale * ((k1 * x[0]).sin() + (k2 * x[1]).cos()))
            .unwrap();
        prop_assert!(
            (field::oscillation(&scaled, &region).unwrap() - scale.abs() * osc).abs()
                <= 1e-12 * (1.0 + scale.abs() * osc)
        );
    }

    #[test]
    fn oscillation_is_subadditive(
        (a1, a2) in (-2.0..2.0f64, -2.0..2.0f64),
        (k1, k2) in (0.5..4.0f64, 0.5..4.0f64),
        r in 0.2..0.9f64,
    ) {
        let grid = test_grid();
        let region = BallRegion::centred(2, r).unwrap();
        let u = ScalarField::from_fn(&grid, |x| a1 * (k1 * x[0]).sin()).unwrap();
        let v = ScalarField::from_fn(&grid, |x| a2 * (k2 * (x[0] + x[1])).cos()).unwrap();
        let sum = ScalarField::from_fn(&grid, |x| {
            a1 * (k1 * x[0]).sin() + a2 * (k2 * (x[0] + x[1])).cos()
        })
        .unwrap();
        let lhs = field::oscillation(&sum, &region).unwrap();
        let rhs =
            field::oscillation(&u, &region).unwrap() + field::oscillation(&v, &region).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn statistics_are_monotone_under_region_inclusion(
        (cx, cy) in (-0.2..0.2f64, -0.2..0.2f64),
        r1 in 0.15..0.4f64,
        grow in 1.0..2.0f64,
        q in 0.5..3.0f64,
    ) {
        let grid = test_grid();
        let r2 = (r1 * grow).min(0.75);
        let inner = BallRegion::new(vec![cx, cy], r1).unwrap();
        let outer = BallRegion::new(vec![cx, cy], r2).unwrap();
        let u = ScalarField::from_fn(&grid, |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + x[0])
            .unwrap();

        // node sets nest
        let ni = inner.nodes(&grid).unwrap();
        let no = outer.nodes(&grid).unwrap();
        prop_assert!(ni.iter().all(|n| no.contains(n)));
        prop_assume!(!ni.is_empty());

        prop_assert!(field::supremum(&u, &inner).unwrap() <= field::supremum(&u, &outer).unwrap());
        prop_assert!(field::infimum(&u, &inner).unwrap() >= field::infimum(&u, &outer).unwrap());
        prop_assert!(
            field::oscillation(&u, &inner).unwrap() <= field::oscillation(&u, &outer).unwrap()
        );
        // the L^q statistic sums nonnegative terms, so it grows with the region
        prop_assert!(
            field::lq_integral_mean(&u, &inner, q).unwrap()
                <= field::lq_integral_mean(&u, &outer, q).unwrap() * (1.0 + 1e-12)
        );
    }

    #[test]
    fn gradient_of_scaled_field_scales(scale in -5.0..5.0f64) {
        let grid = test_grid();
        let u = ScalarField::from_fn(&grid, |x| (2.0 * x[0] - x[1]).sin()).unwrap();
        let su = ScalarField::from_fn(&grid, |x| scale * (2.0 * x[0] - x[1]).sin()).unwrap();
        let du = field::gradient(&u).unwrap();
        let dsu = field::gradient(&su).unwrap();
        for &node in grid.interior_nodes() {
            for k in 0..2 {
                let want = scale * du.component(node, k);
                prop_assert!((dsu.component(node, k) - want).abs() <= 1e-11 * (1.0 + want.abs()));
            }
        }
    }
}

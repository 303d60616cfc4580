mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::random_triangle;
use wgfem::quadrature::Rules;
use wgfem::weak_ops::ElementWeakOps;
use wgfem::wg_space::ElementFrame;
use wgfem::SpaceOrder;

fn random_local(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn rel_gap(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_local_mass_solve(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let frame = ElementFrame::from_points(random_triangle(&mut rng));
        let closed = ElementWeakOps::closed_form(&frame);
        let solved = ElementWeakOps::local_solve(&frame, SpaceOrder::ONE, &Rules::default());
        let v = random_local(&mut rng, closed.grad.ncols());
        prop_assert!(rel_gap(&closed.gradient_coeffs(&v), &solved.gradient_coeffs(&v)) <= 1e-12);
        prop_assert!(rel_gap(&closed.divergence_coeffs(&v), &solved.divergence_coeffs(&v)) <= 1e-12);
    }

    #[test]
    fn divergence_is_trace_of_gradient(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let frame = ElementFrame::from_points(random_triangle(&mut rng));
        let ops = ElementWeakOps::new(&frame, SpaceOrder::ONE, &Rules::default());
        let v = random_local(&mut rng, ops.grad.ncols());
        let x = frame.geometry.centroid;
        let g = ops.gradient_at(&v, x);
        let d = ops.divergence_at(&v, x);
        prop_assert!((g[0][0] + g[1][1] - d).abs() <= 1e-13 * d.abs().max(1.0));
    }

    #[test]
    fn weak_operators_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let frame = ElementFrame::from_points(random_triangle(&mut rng));
        let ops = ElementWeakOps::local_solve(&frame, SpaceOrder::ONE, &Rules::default());
        let n = ops.grad.ncols();
        let (v, w) = (random_local(&mut rng, n), random_local(&mut rng, n));
        let combined = ops.gradient_coeffs(&(&v * a + &w * b));
        let separate = ops.gradient_coeffs(&v) * a + ops.gradient_coeffs(&w) * b;
        prop_assert!(rel_gap(&combined, &separate) <= 1e-12);
    }

    /// With `v_b = Q_b v_0` on every edge the weak gradient of a linear
    /// field is its classical gradient.
    #[test]
    fn weak_gradient_reproduces_linear_fields(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rules = Rules::default();
        let frame = ElementFrame::from_points(random_triangle(&mut rng));
        let ops = ElementWeakOps::new(&frame, SpaceOrder::ONE, &rules);
        let v0: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut local = DVector::zeros(15);
        local.rows_mut(0, 6).copy_from_slice(&v0);
        for le in 0..3 {
            let c = frame.edges[le].project(|x| frame.interior_value(&v0, 1, x), &rules).unwrap();
            local.rows_mut(6 + 3 * le, 3).copy_from_slice(&c);
        }
        let x = frame.geometry.centroid;
        let gw = ops.gradient_at(&local, x);
        let g0 = frame.interior_gradient(&v0, 1, x);
        let scale = g0.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((gw[i][j] - g0[i][j]).abs() <= 1e-12 * scale);
            }
        }
        prop_assert!((ops.divergence_at(&local, x) - g0[0][0] - g0[1][1]).abs() <= 1e-12 * scale);
    }
}

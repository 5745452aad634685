//! Property tests for structural invariants: solver linearity, the sawtooth
//! perturbation contract, and boundedness of the kernel antiderivative.

use proptest::collection::vec;
use proptest::prelude::*;

use volterra_heat::experiment::{perturb, PerturbationSpec};
use volterra_heat::forward::{GridFunction, Location, Mesh};
use volterra_heat::kernel::{kernel_antiderivative, KernelSpec};
use volterra_heat::solver::{solve, Scheme};

fn grid(mesh: Mesh, values: Vec<f64>) -> GridFunction {
    GridFunction::new(mesh, Location::Nodes, values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn forward_substitution_is_linear_in_the_data(
        (y1, y2) in (2usize..24).prop_flat_map(|n| (vec(-1.0..1.0f64, n), vec(-1.0..1.0f64, n))),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        midpoint in any::<bool>(),
    ) {
        let spec = KernelSpec::new(3);
        let scheme = if midpoint { Scheme::Midpoint } else { Scheme::ProductIntegration };
        let mesh = Mesh::new(0.02, y1.len());
        let combined: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = solve(spec, scheme, &grid(mesh, combined)).unwrap();
        let r1 = solve(spec, scheme, &grid(mesh, y1)).unwrap();
        let r2 = solve(spec, scheme, &grid(mesh, y2)).unwrap();
        for ((l, a), b) in lhs.phi.values().iter().zip(r1.phi.values()).zip(r2.phi.values()) {
            let r = alpha * a + beta * b;
            let tol = 1e-9 * l.abs().max(r.abs()).max(1.0);
            prop_assert!((l - r).abs() <= tol, "{l} vs {r}");
        }
    }

    #[test]
    fn sawtooth_perturbation_alternates_and_has_sup_norm_delta(
        y in vec(-10.0..10.0f64, 1..40),
        delta in 1e-6..1.0f64,
    ) {
        let mesh = Mesh::new(1.0, y.len());
        let original = grid(mesh, y);
        let noisy = perturb(&original, &PerturbationSpec::sawtooth(delta));
        let mut sup = 0.0f64;
        for (idx, (&a, &b)) in original.values().iter().zip(noisy.values()).enumerate() {
            let signed = b - a;
            // 1-based index 1 gets -delta
            if idx % 2 == 0 {
                prop_assert!(signed < 0.0);
            } else {
                prop_assert!(signed > 0.0);
            }
            sup = sup.max(signed.abs());
        }
        prop_assert!((sup / delta - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn antiderivative_stays_within_alternating_tail_bounds(
        order in 1u32..=41,
        t in 0.0..10.0f64,
    ) {
        let f = kernel_antiderivative(KernelSpec::new(order), t);
        prop_assert!((-1.5..=1.5).contains(&f), "N = {order}, t = {t}: {f}");
    }
}

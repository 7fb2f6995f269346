use proptest::prelude::*;
use sdca::bounds::{self, BoundInputs, GammaProfile};

proptest! {
    #[test]
    fn iteration_bounds_are_monotone(
        n in 1usize..5000,
        lambda in 1e-6f64..1.0,
        eps in 1e-6f64..1.0,
        hinge in any::<bool>(),
    ) {
        let lip = |lambda: f64, eps: f64| {
            let b = BoundInputs::lipschitz(n, lambda, 1.0, eps);
            if hinge { b.with_hinge_constants() } else { b }
        };
        let smooth = |lambda: f64, eps: f64| BoundInputs::smooth(n, lambda, 1.0, eps);

        // looser target, fewer steps
        prop_assert!(bounds::thm1_iterations(&lip(lambda, 2.0 * eps)).unwrap().1 <= bounds::thm1_iterations(&lip(lambda, eps)).unwrap().1);
        prop_assert!(bounds::thm4_iterations(&lip(lambda, 2.0 * eps)).unwrap().1 <= bounds::thm4_iterations(&lip(lambda, eps)).unwrap().1);
        prop_assert!(bounds::thm2_iterations(&smooth(lambda, 2.0 * eps)).unwrap() <= bounds::thm2_iterations(&smooth(lambda, eps)).unwrap());

        // weaker regularization, more steps (T - T0 grows in 1/lambda)
        let (a0, a) = bounds::thm1_iterations(&lip(lambda, eps)).unwrap();
        let (b0, b) = bounds::thm1_iterations(&lip(lambda / 2.0, eps)).unwrap();
        prop_assert!(b - b0 >= a - a0);
        prop_assert!(bounds::thm4_iterations(&lip(lambda / 2.0, eps)).unwrap().1 >= bounds::thm4_iterations(&lip(lambda, eps)).unwrap().1);
        prop_assert!(bounds::thm2_iterations(&smooth(lambda / 2.0, eps)).unwrap() >= bounds::thm2_iterations(&smooth(lambda, eps)).unwrap());
    }

    #[test]
    fn n_of_u_is_a_count(gammas in prop::collection::vec(0.0f64..3.0, 1..200), u in -1.0f64..4.0, v in -1.0f64..4.0) {
        let profile = GammaProfile::new(gammas.clone()).unwrap();
        let exhaustive = gammas.iter().filter(|&&g| g < u).count();
        prop_assert_eq!(bounds::n_of_u(&profile, u), exhaustive);
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        prop_assert!(bounds::n_of_u(&profile, lo) <= bounds::n_of_u(&profile, hi));
    }

    #[test]
    fn thm6_infimum_is_below_every_grid_point(
        gammas in prop::collection::vec(0.0f64..2.0, 1..100),
        lambda in 1e-4f64..0.1,
        rho in 0.01f64..1.0,
        eps in 1e-6f64..1e-2,
        probe in 0.0f64..1.0,
    ) {
        let profile = GammaProfile::new(gammas.clone()).unwrap();
        let best = bounds::thm6_eps_tilde(&profile, lambda, rho, 1.0, eps);
        let hi = profile.max() + 1.0;
        let gamma = bounds::THM6_GRID_MIN * (hi / bounds::THM6_GRID_MIN).powf(probe);
        prop_assert!(best.eps_tilde <= bounds::thm6_objective(&profile, lambda, rho, 1.0, eps, gamma) * (1.0 + 1e-12));
        prop_assert!((bounds::thm6_objective(&profile, lambda, rho, 1.0, eps, best.gamma) - best.eps_tilde).abs() <= 1e-12 * best.eps_tilde);
    }
}

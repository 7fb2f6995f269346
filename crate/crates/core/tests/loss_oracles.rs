//! Loss functions checked against independent numerical oracles.

use proptest::prelude::*;
use sdca::losses::{LossKind, LossSpec};
use sdca::CoordinateProblem;

fn kind_strategy() -> impl Strategy<Value = LossKind> {
    prop::sample::select(LossKind::ALL.to_vec())
}

fn sign() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(-1.0)]
}

/// Max of a concave function on `[lo, hi]` by ternary search.
fn concave_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi))
}

/// A feasible dual value for `kind` and label `y` from a uniform `t in [0, 1]`.
fn feasible_alpha(kind: LossKind, y: f64, t: f64) -> f64 {
    match kind {
        LossKind::Hinge | LossKind::SmoothedHinge => y * t,
        LossKind::Logistic => y * (0.001 + 0.998 * t),
        LossKind::AbsoluteDeviation => 2.0 * t - 1.0,
        LossKind::Squared => 8.0 * t - 4.0,
    }
}

proptest! {
    #[test]
    fn conjugate_is_the_supremum(
        kind in kind_strategy(),
        y_sign in sign(),
        y_mag in 0.0f64..2.0,
        t in 0.0f64..=1.0,
        gamma in 0.05f64..2.0,
    ) {
        let loss = LossSpec::new(kind, gamma).unwrap();
        let y = if kind.is_classification() { y_sign } else { y_sign * y_mag };
        let alpha = feasible_alpha(kind, y, t);
        let conj = loss.eval_conjugate(alpha, y).unwrap();
        let sup = concave_max(|z| -z * alpha - loss.eval_primal(z, y), -60.0, 60.0);
        prop_assert!((sup - conj).abs() < 1e-8, "sup {} conj {}", sup, conj);
    }

    #[test]
    fn fenchel_young(
        kind in kind_strategy(),
        y_sign in sign(),
        a in -10.0f64..10.0,
        t in 0.0f64..=1.0,
    ) {
        let loss = LossSpec::new(kind, 0.5).unwrap();
        let y = y_sign;
        let alpha = feasible_alpha(kind, y, t);
        let lhs = loss.eval_primal(a, y) + loss.eval_conjugate(alpha, y).unwrap();
        prop_assert!(lhs >= -a * alpha - 1e-12);
        // tight at the subgradient
        let g = loss.subgradient(a, y);
        let tight = loss.eval_primal(a, y) + loss.eval_conjugate(-g, y).unwrap();
        prop_assert!((tight - a * g).abs() < 1e-9);
    }

    #[test]
    fn smoothed_hinge_conjugate_is_shifted_hinge(y in sign(), t in 0.0f64..=1.0, gamma in 0.01f64..5.0) {
        let alpha = y * t;
        let smooth = LossSpec::smoothed_hinge(gamma).unwrap().eval_conjugate(alpha, y).unwrap();
        let hinge = LossSpec::hinge().eval_conjugate(alpha, y).unwrap();
        prop_assert!((smooth - hinge - 0.5 * gamma * alpha * alpha).abs() < 1e-14);
    }

    #[test]
    fn smoothed_hinge_tends_to_hinge(y in sign(), a in -5.0f64..5.0, gamma in 1e-9f64..1.0) {
        let smooth = LossSpec::smoothed_hinge(gamma).unwrap().eval_primal(a, y);
        let hinge = LossSpec::hinge().eval_primal(a, y);
        prop_assert!(smooth <= hinge + 1e-15);
        prop_assert!(hinge - smooth <= gamma / 2.0 + 1e-15);
    }

    #[test]
    fn derivative_is_lipschitz_for_smooth_losses(
        kind in kind_strategy(),
        y in sign(),
        a in -8.0f64..8.0,
        b in -8.0f64..8.0,
        gamma in 0.05f64..2.0,
    ) {
        let loss = LossSpec::new(kind, gamma).unwrap();
        if let Some(beta) = loss.smoothness() {
            let d = (loss.subgradient(a, y) - loss.subgradient(b, y)).abs();
            prop_assert!(d <= beta * (a - b).abs() * (1.0 + 1e-12) + 1e-15);
        }
        if let Some(l) = loss.lipschitz() {
            let d = (loss.eval_primal(a, y) - loss.eval_primal(b, y)).abs();
            prop_assert!(d <= l * (a - b).abs() + 1e-14);
        }
    }

    #[test]
    fn coordinate_step_beats_every_feasible_point(
        kind in kind_strategy(),
        y in sign(),
        t in 0.0f64..=1.0,
        wx in -3.0f64..3.0,
        norm_sq in 0.0f64..1.0,
        lambda_n in 0.01f64..100.0,
    ) {
        let loss = LossSpec::new(kind, 0.5).unwrap();
        let p = CoordinateProblem { alpha: feasible_alpha(kind, y, t), wx, norm_sq, lambda_n, label: y };
        let delta = loss.coordinate_update(&p).unwrap();
        let best = loss.coordinate_objective(&p, delta).unwrap();
        for k in 0..=400 {
            let candidate = feasible_alpha(kind, y, k as f64 / 400.0);
            let value = loss.coordinate_objective(&p, candidate - p.alpha).unwrap();
            prop_assert!(value <= best + 1e-10, "{} beats {} at alpha {}", value, best, candidate);
        }
        prop_assert!(loss.is_feasible(p.alpha + delta, y));
    }
}

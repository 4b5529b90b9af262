use reglab_core::radius::{
    gamma_sequence, make_inverse_family, minimize_spectral_radius, power_law_check, regularity_radius_estimate,
    zemanek_gap, FamilyKind, OptimizerOptions, WindowSchedule,
};
use reglab_core::{OperatorExpr, C64};

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn weighted() -> OperatorExpr {
    OperatorExpr::weighted_shift(&[1.0, 4.0]).unwrap()
}

#[test]
fn weighted_shift_radius_and_optimizer() {
    let tab = gamma_sequence(&weighted(), 16, WindowSchedule::default()).unwrap();
    let s = regularity_radius_estimate(&tab).unwrap();
    assert!((s - 2.0).abs() < 1e-3);

    let a = weighted().scaled(c(-1.0));
    let s0 = OperatorExpr::weighted_backward_shift(&[1.0, 0.25])
        .unwrap()
        .scaled(c(-1.0));
    let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (2, 2)).unwrap();
    let res = minimize_spectral_radius(&fam, &OptimizerOptions::default()).unwrap();
    let sup = 1.0 / res.best_spectral_radius;
    assert!(sup >= 2.0 - 1e-2, "{sup}");
    // the sup bound holds for every member visited
    assert!(sup <= s + 2e-2);
}

#[test]
fn power_law() {
    for t in [OperatorExpr::shift(), weighted()] {
        let r = power_law_check(&t, 2, 12, WindowSchedule::default()).unwrap();
        assert!(r.gap <= 5e-3, "{r:?}");
    }
    let r = power_law_check(&OperatorExpr::shift().scaled(c(2.0)), 3, 8, WindowSchedule::default()).unwrap();
    assert!((r.s_tn - 8.0).abs() < 1e-3);
}

#[test]
fn zemanek_routes_agree() {
    let opts = OptimizerOptions {
        budget: 320,
        ..OptimizerOptions::default()
    };
    for (t, l0, want) in [
        (OperatorExpr::shift(), c(0.0), 1.0),
        (OperatorExpr::shift(), c(0.5), 0.5),
        (OperatorExpr::shift().scaled(c(2.0)), c(0.0), 2.0),
    ] {
        let r = zemanek_gap(&t, l0, 12, WindowSchedule::default(), &opts).unwrap();
        assert_eq!(r.closed_form, Some(want));
        assert!((r.gamma_limit - want).abs() < 1e-2, "{r:?}");
        assert!((r.optimizer_sup - want).abs() < 1e-2, "{r:?}");
        assert!(r.max_gap() < 2e-2);
    }
}

#[test]
fn optimizer_scales_inversely() {
    let opts = OptimizerOptions {
        budget: 160,
        restarts: 4,
        ..OptimizerOptions::default()
    };
    let base = |alpha: f64| {
        let a = OperatorExpr::shift().scaled(c(-alpha));
        let s0 = OperatorExpr::backward().scaled(c(-1.0 / alpha));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (2, 2)).unwrap();
        minimize_spectral_radius(&fam, &opts).unwrap().best_spectral_radius
    };
    let (r1, r3) = (base(1.0), base(3.0));
    assert!((r3 - r1 / 3.0).abs() < 1e-3);
}

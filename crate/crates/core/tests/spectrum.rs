mod common;

use std::f64::consts::PI;

use varmp::mesh::{build_interval_mesh, build_rect_mesh, norm_lr};
use varmp::spectrum::{
    embedding_constant, first_eigenpair, ladder_inequality_check, laplacian_modes,
    rayleigh_quotient, subspace_ladder,
};
use varmp::Error;

#[test]
fn eigenvalues_follow_the_shooting_oracle() {
    let mesh = build_interval_mesh(300, 1.0).unwrap();
    for p in [1.5, 2.5, 4.0] {
        let r = first_eigenpair(p, &mesh, 1e-10).unwrap();
        let oracle = common::p_laplacian_eigenvalue_closed_form(p);
        assert!(
            (r.lambda / oracle - 1.0).abs() < 5e-3,
            "p={p}: {} vs {oracle}",
            r.lambda
        );
        assert!(r.phi.iter().all(|&x| x >= -1e-12));
        assert!((norm_lr(&mesh, &r.phi, p).unwrap() - 1.0).abs() < 1e-10);
        assert!((rayleigh_quotient(&mesh, &r.phi, p) - r.lambda).abs() < 1e-8 * r.lambda);
    }
}

#[test]
fn laplacian_modes_on_the_interval() {
    let mesh = build_interval_mesh(200, 1.0).unwrap();
    let (vals, modes) = laplacian_modes(&mesh, 5).unwrap();
    assert_eq!(modes.len(), 5);
    for (k, v) in vals.iter().enumerate() {
        let exact = ((k + 1) as f64 * PI).powi(2);
        assert!((v / exact - 1.0).abs() < 2e-3, "mode {k}: {v} vs {exact}");
    }
}

#[test]
fn ladder_is_monotone_and_dominates_sampled_quotients() {
    let mesh = build_interval_mesh(80, 1.0).unwrap();
    for p in [2.0, 3.0] {
        let ladder = subspace_ladder(p, &mesh, 6).unwrap();
        assert!(
            ladder.lambda_hat.windows(2).all(|w| w[0] <= w[1]),
            "{:?}",
            ladder.lambda_hat
        );
        let first = first_eigenpair(p, &mesh, 1e-9).unwrap();
        assert!((ladder.lambda_hat[0] - first.lambda).abs() < 1e-6 * first.lambda);
        let check = ladder_inequality_check(&ladder, &mesh, 3, 200, 1, 1e-8).unwrap();
        assert!(check.verdict.holds(), "{check:?}");
        assert!(check.min_quotient >= check.threshold * (1.0 - 1e-8));
    }
}

#[test]
fn embedding_constant_bounds_the_quotient() {
    let mesh = build_rect_mesh(12, 12).unwrap();
    let first = first_eigenpair(2.0, &mesh, 1e-9).unwrap();
    let tau = embedding_constant(2.0, 2.0, &mesh).unwrap();
    // For r = p the sharpest constant is λ₁^{-1/p}.
    assert!((tau - first.lambda.powf(-0.5)).abs() < 1e-4 * tau, "{tau}");
    assert!(embedding_constant(2.0, 3.0, &mesh).unwrap() > 0.0);
    assert!(matches!(
        embedding_constant(2.0, 0.5, &mesh),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn bad_arguments_are_rejected() {
    let mesh = build_interval_mesh(10, 1.0).unwrap();
    assert!(first_eigenpair(1.0, &mesh, 1e-9).is_err());
    assert!(first_eigenpair(2.0, &mesh, 0.0).is_err());
    assert!(subspace_ladder(2.0, &mesh, 0).is_err());
    assert!(subspace_ladder(2.0, &mesh, 50).is_err());
}

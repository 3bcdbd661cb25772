mod common;

use common::*;

#[test]
fn eigenvalue_shooting_matches_closed_form() {
    for p in [1.5, 2.0, 3.0, 4.0] {
        let shot = p_laplacian_eigenvalue(p);
        let exact = p_laplacian_eigenvalue_closed_form(p);
        assert!(
            (shot / exact - 1.0).abs() < 1e-5,
            "p = {p}: {shot} vs {exact}"
        );
    }
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((p_laplacian_eigenvalue(2.0) - pi2).abs() < 1e-5);
}

#[test]
fn cubic_ground_state_energy() {
    // Energy of the scaled solution: the first integral U'² + U⁴/2 = 1 gives
    // X = 2∫₀^{2^{1/4}} dU/√(1 − U⁴/2), computed here by an independent quadrature.
    let top = 2f64.powf(0.25);
    let e = cubic_ground_energy();
    let x = 2.0
        * simpson(
            |t| {
                // substitution U = top·sin θ removes the endpoint singularity
                let u = top * t.sin();
                top * t.cos() / (1.0 - u.powi(4) / 2.0).sqrt()
            },
            0.0,
            std::f64::consts::FRAC_PI_2 - 1e-9,
            20_000,
        );
    let int_du2 = 2.0
        * simpson(
            |t| {
                let u = top * t.sin();
                let du = (1.0 - u.powi(4) / 2.0).max(0.0).sqrt();
                du * top * t.cos()
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            20_000,
        );
    let e2 = 0.25 * x.powi(3) * int_du2;
    assert!((e / e2 - 1.0).abs() < 1e-4, "{e} vs {e2}");
    assert!(cubic_ground_amplitude() > 0.0);
    assert!((cubic_excited_energy(2) / e - 16.0).abs() < 1e-12);
}

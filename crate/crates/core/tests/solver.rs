use varmp::energy::{Functional, State};
use varmp::mesh::{build_interval_mesh, Field};
use varmp::models::{constant_coefficient, Model, ModelDecl, NonlinearityModel};
use varmp::solver::{descend, mountain_pass, verify_geometry, Classification, SolveConfig};
use varmp::spectrum::first_eigenpair;
use varmp::Error;

fn laplace_model() -> Model {
    let a = constant_coefficient(1.0).unwrap();
    Model {
        p1: 2.0,
        p2: 2.0,
        n: 1,
        a: a.clone(),
        b: a,
        g: NonlinearityModel::zero(),
        decl: None,
    }
}

#[test]
fn descent_is_monotone_and_reaches_zero_for_convex_energy() {
    let mesh = build_interval_mesh(40, 1.0).unwrap();
    let model = laplace_model();
    let f = Functional::new(&mesh, &model).unwrap();
    let u = Field::interpolate_dirichlet(&mesh, |x| x[0] * (1.0 - x[0]) * (1.0 + 5.0 * x[0]));
    let v = Field::interpolate_dirichlet(&mesh, |x| (9.0 * x[0]).sin() * x[0] * (1.0 - x[0]));
    let mut s = State::new(u, v, 2.0, 2.0);
    let cfg = SolveConfig::default();
    let mut j = f.value(&s).unwrap();
    for _ in 0..200 {
        let step = descend(&f, &s, &cfg).unwrap();
        assert!(step.energy <= j, "{} > {j}", step.energy);
        j = step.energy;
        s = step.state;
    }
    // The H¹-preconditioned gradient of the Dirichlet energy is the state itself.
    assert!(j.abs() < 1e-20, "{j}");
    assert!(f.cps_quantity(&s).unwrap() < 1e-9);
}

#[test]
fn no_superlinear_growth_without_a_potential() {
    let mesh = build_interval_mesh(50, 1.0).unwrap();
    let model = laplace_model();
    let f = Functional::new(&mesh, &model).unwrap();
    let e1 = first_eigenpair(2.0, &mesh, 1e-9).unwrap();
    match verify_geometry(&f, [&e1, &e1], 0) {
        Err(Error::SuperlinearityNotDetected { last_energy, .. }) => assert!(last_energy > 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn swapping_components_gives_the_same_level() {
    let mesh = build_interval_mesh(100, 1.0).unwrap();
    let e1 = first_eigenpair(2.0, &mesh, 1e-9).unwrap();
    let cfg = SolveConfig::default();
    let level = |d: ModelDecl| {
        let model = d.build().unwrap();
        let f = Functional::new(&mesh, &model).unwrap();
        let geo = verify_geometry(&f, [&e1, &e1], 0).unwrap();
        let r = mountain_pass(&f, &geo, &cfg).unwrap();
        assert_eq!(r.classification, Classification::Converged);
        (r.level, geo.e_component)
    };
    let (lu, cu) = level(ModelDecl::cubic1d());
    let mut swapped = ModelDecl::cubic1d();
    swapped.w1 = Some(0.0);
    swapped.w2 = Some(0.25);
    let (lv, cv) = level(swapped);
    assert_eq!((cu.as_str(), cv.as_str()), ("u", "v"));
    assert!((lu - lv).abs() < 1e-6 * lu, "{lu} vs {lv}");
}

#[test]
fn converged_state_satisfies_the_weak_equation() {
    let mesh = build_interval_mesh(100, 1.0).unwrap();
    let model = ModelDecl::cor1().build().unwrap();
    let f = Functional::new(&mesh, &model).unwrap();
    let e1 = first_eigenpair(2.0, &mesh, 1e-9).unwrap();
    let geo = verify_geometry(&f, [&e1, &e1], 3).unwrap();
    let r = mountain_pass(&f, &geo, &SolveConfig::default()).unwrap();
    assert_eq!(r.classification, Classification::Converged);
    assert!(r.cps_final <= 1e-6);
    assert!(r.level >= geo.rho0);
    assert!(
        r.residual[0] < 1e-6 && r.residual[1] < 1e-6,
        "{:?}",
        r.residual
    );
    let energies: Vec<f64> = r.trace.rows.iter().map(|row| row.energy).collect();
    assert!(energies.iter().all(|j| j.is_finite()));
}

#[test]
fn invalid_config_is_rejected() {
    let bad = [
        SolveConfig {
            path_points: 2,
            ..SolveConfig::default()
        },
        SolveConfig {
            tol_cps: 0.0,
            ..SolveConfig::default()
        },
        SolveConfig {
            armijo_shrink: 1.5,
            ..SolveConfig::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}

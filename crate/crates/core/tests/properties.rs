use proptest::prelude::*;

use varmp::diagnostics::{CpsTrace, TraceRow};
use varmp::energy::{remainder, truncate, Cotangent, Functional, State};
use varmp::mesh::{build_interval_mesh, build_rect_mesh, norm_w, Field, Mesh};
use varmp::models::ModelDecl;

fn interval() -> Mesh {
    build_interval_mesh(16, 1.0).unwrap()
}

fn interior_field(mesh: &Mesh, raw: &[f64]) -> Field {
    let mut v = vec![0.0; mesh.n_nodes()];
    for (k, &i) in mesh.interior_nodes().iter().enumerate() {
        v[i] = raw[k % raw.len()];
    }
    Field::new(v)
}

fn sine_series(mesh: &Mesh, c: &[f64]) -> Field {
    Field::interpolate_dirichlet(mesh, |x| {
        c.iter()
            .enumerate()
            .map(|(k, ck)| ck * ((k + 1) as f64 * std::f64::consts::PI * x[0]).sin())
            .sum()
    })
}

fn clear_of_zero(mesh: &Mesh, f: &Field) -> bool {
    (0..mesh.n_elements()).all(|e| {
        let el = mesh.element(e);
        let mean = el.iter().map(|&n| f[n]).sum::<f64>() / el.len() as f64;
        mean.abs() > 1e-2
    })
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, 15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_homogeneous_and_subadditive(a in values(), b in values(), c in -5.0..5.0f64, p in 1.2..4.0f64) {
        let m = interval();
        let (x, y) = (interior_field(&m, &a), interior_field(&m, &b));
        let nx = norm_w(&m, &x, p).unwrap();
        let scaled = norm_w(&m, &x.scaled(c), p).unwrap();
        prop_assert!((scaled - c.abs() * nx).abs() <= 1e-10 * (1.0 + scaled));
        let sum = norm_w(&m, &x.axpy(1.0, &y), p).unwrap();
        prop_assert!(sum <= nx + norm_w(&m, &y, p).unwrap() + 1e-10);
    }

    #[test]
    fn truncation_identities(a in values(), b in values(), k in 0.05..5.0f64) {
        let m = interval();
        let s = State::new(interior_field(&m, &a), interior_field(&m, &b), 2.0, 2.0);
        let t = truncate(&s, k).unwrap();
        prop_assert_eq!(&truncate(&t, k).unwrap(), &t);
        prop_assert_eq!(s.axpy(-1.0, &t), remainder(&s, k).unwrap());
        prop_assert!(t.u.iter().chain(t.v.iter()).all(|x| x.abs() <= k));
        prop_assert!(t.norm_x(&m) <= s.norm_x(&m));
    }

    #[test]
    fn dual_norm_brackets_its_parts(a in values(), b in values(), zero_v in any::<bool>()) {
        let m = interval();
        let model = ModelDecl::cor1().build().unwrap();
        let f = Functional::new(&m, &model).unwrap();
        let c = Cotangent {
            du: interior_field(&m, &a).into_values(),
            dv: if zero_v { vec![0.0; m.n_nodes()] } else { interior_field(&m, &b).into_values() },
        };
        let d = f.dual_norm(&c);
        prop_assert!(d.part_u.max(d.part_v) <= d.total);
        prop_assert!(d.total <= d.part_u + d.part_v);
        if zero_v {
            prop_assert_eq!(d.total, d.part_u);
        }
    }

    #[test]
    fn energy_is_even_and_differential_odd(a in values(), b in values()) {
        let m = build_rect_mesh(4, 4).unwrap();
        let model = ModelDecl::cor1().build().unwrap();
        let f = Functional::new(&m, &model).unwrap();
        let s = State::new(interior_field(&m, &a), interior_field(&m, &b), 2.0, 2.0);
        prop_assert_eq!(f.value(&s).unwrap(), f.value(&s.neg()).unwrap());
        let (c, cn) = (f.differential(&s).unwrap(), f.differential(&s.neg()).unwrap());
        for (x, y) in c.du.iter().zip(&cn.du).chain(c.dv.iter().zip(&cn.dv)) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn differential_matches_central_differences(
        lead in prop::array::uniform2(0.5..2.0f64),
        signs in prop::array::uniform2(any::<bool>()),
        a in prop::collection::vec(-0.15..0.15f64, 4),
        w in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let m = interval();
        let model = ModelDecl::cor1().build().unwrap();
        let f = Functional::new(&m, &model).unwrap();
        // A dominant first mode keeps each component of one sign inside the domain.
        let comp = |k: usize| {
            let c0 = if signs[k] { lead[k] } else { -lead[k] };
            sine_series(&m, &[c0, a[2 * k] * c0, a[2 * k + 1] * c0])
        };
        let s = State::new(comp(0), comp(1), 2.0, 2.0);
        let d = State::new(sine_series(&m, &w[..3]), sine_series(&m, &w[3..]), 2.0, 2.0);
        // A = 1 + |u|^1.5 is only C¹ at 0, where central differences lose accuracy.
        prop_assert!(clear_of_zero(&m, &s.u) && clear_of_zero(&m, &s.v));
        let exact = f.differential(&s).unwrap().pair(&d.u, &d.v);
        let h = 1e-5;
        let fd = (f.value(&s.axpy(h, &d)).unwrap() - f.value(&s.axpy(-h, &d)).unwrap()) / (2.0 * h);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn trace_round_trips_through_csv(rows in prop::collection::vec(prop::array::uniform7(-1e6..1e6f64), 1..20)) {
        let mut trace = CpsTrace::new();
        for (i, r) in rows.iter().enumerate() {
            trace.push(TraceRow {
                iter: i,
                energy: r[0],
                cps: r[1].abs(),
                wu: r[2].abs(),
                wv: r[3].abs(),
                lu: r[4].abs(),
                lv: r[5].abs(),
                step: r[6].abs(),
            }).unwrap();
        }
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        prop_assert_eq!(CpsTrace::read_csv(buf.as_slice()).unwrap(), trace.clone());
        let json = serde_json::to_string(&trace).unwrap();
        prop_assert_eq!(serde_json::from_str::<CpsTrace>(&json).unwrap(), trace);
    }

    #[test]
    fn model_declaration_round_trips(q in 3.6..5.9f64, g4 in 1.5..2.4f64, c in 0.0..3.0f64) {
        let mut d = ModelDecl::cor1();
        d.q1 = q;
        d.gamma4 = g4;
        d.c_star = Some(c);
        prop_assert_eq!(ModelDecl::parse(&d.to_text()).unwrap(), d);
    }
}

use heis_tube::{Domain, LevelSurface, Monomial, Patch, Polynomial};
use proptest::prelude::*;

fn poly3() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..3, 3), -2.0..2.0f64), 1..6).prop_map(|terms| {
        Polynomial::new(
            3,
            terms.into_iter().map(|(exps, coef)| Monomial { exps, coef }).collect(),
        )
        .unwrap()
    })
}

fn x3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 3)
}

#[test]
fn rejects_malformed() {
    assert!(Polynomial::new(
        2,
        vec![Monomial {
            exps: vec![1],
            coef: 1.0
        }]
    )
    .is_err());
    assert!(Polynomial::new(
        1,
        vec![Monomial {
            exps: vec![1],
            coef: f64::NAN
        }]
    )
    .is_err());
    assert!(Patch::graph_box(0, &[0.0], &[1.0], 0.0).is_err());
    assert!(Patch::graph_box(0, &[1.0, 0.0], &[0.0, 1.0], 0.0).is_err());
    assert!(Patch::annulus(2, -1.0, 1.0, &[], &[], 0.0).is_err());
}

#[test]
fn patch_json_round_trip() {
    let p = Patch::annulus(4, 0.5, 1.0, &[-1.0, 0.0], &[1.0, 2.0], 0.1).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<Patch>(&text).unwrap(), p);
    assert!(matches!(p.domain, Domain::Annulus { .. }));
    assert!(serde_json::from_str::<Patch>(
        r#"{"axis":0,"domain":{"kind":"box","lo":[0,0],"hi":[1,1]},"guess":0,"x":1}"#
    )
    .is_err());
}

#[test]
fn lifted_points_lie_on_the_surface() {
    let s = LevelSurface::paraboloid(2, 0.6);
    let patch = Patch::annulus(4, 0.2, 1.0, &[-0.5, -0.5], &[0.5, 0.5], 0.0).unwrap();
    for u in patch.lattice(4) {
        let q = patch.point(&s, &u).unwrap();
        assert!(s.value(&q).abs() < 1e-14);
        let back = patch.params_of(&q);
        for (a, b) in back.iter().zip(&u) {
            let d = (a - b).abs();
            assert!(d < 1e-12 || (d - std::f64::consts::TAU).abs() < 1e-12, "{a} vs {b}");
        }
    }
    let cyl = LevelSurface::cylinder(1, 1.0);
    let patch = Patch::graph_box(0, &[-2.0, -1.0], &[2.0, 1.0], 0.5).unwrap();
    assert!(patch.point(&cyl, &[1.5, 0.0]).is_err());
    assert_eq!(patch.lattice(3).len(), 9);
    assert!(patch.contains(&[0.0, 0.0]) && !patch.contains(&[0.0, 1.5]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_differences(p in poly3(), x in x3()) {
        let (v, grad) = p.eval_grad(&x);
        prop_assert_eq!(v, p.eval(&x));
        let jet = p.jet(&x);
        prop_assert!((jet.value - v).abs() <= 1e-12 * (1.0 + v.abs()));
        let h = 1e-6;
        for k in 0..3 {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[k] += h;
            b[k] -= h;
            let fd = (p.eval(&a) - p.eval(&b)) / (2.0 * h);
            prop_assert!((fd - grad[k]).abs() <= 1e-7 * (1.0 + grad[k].abs()));
            prop_assert!((jet.grad[k] - grad[k]).abs() <= 1e-12 * (1.0 + grad[k].abs()));
            let (ga, gb) = (p.eval_grad(&a).1, p.eval_grad(&b).1);
            for m in 0..3 {
                let fd2 = (ga[m] - gb[m]) / (2.0 * h);
                prop_assert!((fd2 - jet.hess_at(m, k)).abs() <= 1e-6 * (1.0 + fd2.abs()));
            }
        }
    }

    #[test]
    fn algebra_is_pointwise(p in poly3(), q in poly3(), x in x3()) {
        let (a, b) = (p.eval(&x), q.eval(&x));
        let tol = 1e-11 * (1.0 + a.abs()) * (1.0 + b.abs());
        prop_assert!((p.add(&q).eval(&x) - (a + b)).abs() <= tol);
        prop_assert!((p.sub(&q).eval(&x) - (a - b)).abs() <= tol);
        prop_assert!((p.mul(&q).eval(&x) - a * b).abs() <= tol);
        prop_assert!((p.pow(2).eval(&x) - a * a).abs() <= 1e-11 * (1.0 + a * a));
        prop_assert!((p.scale(-1.5).eval(&x) + 1.5 * a).abs() <= tol);
    }

    #[test]
    fn composition(p in poly3(), q in poly3(), r in poly3(), x in x3()) {
        let subs = [q.clone(), r.clone(), Polynomial::var(3, 0)];
        let y = [q.eval(&x), r.eval(&x), x[0]];
        let c = p.compose(&subs).unwrap().eval(&x);
        prop_assert!((c - p.eval(&y)).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn gradient_bound_holds(p in poly3(), x in prop::collection::vec(-0.5..0.5f64, 3)) {
        let bound = p.grad_abs_bound(&[-0.5; 3], &[0.5; 3]);
        let (_, grad) = p.eval_grad(&x);
        for (g, b) in grad.iter().zip(&bound) {
            prop_assert!(g.abs() <= b * (1.0 + 1e-12) + 1e-15);
        }
    }
}

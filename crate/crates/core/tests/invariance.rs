use ckforms::liealg::{gab, type4, type6};
use ckforms::{ck_dims, classify_theorem_main, flags, riemann, Matrix, MetricLieAlgebra, Rational, Scalar, Tolerance};

type Q = Rational;

fn q(s: &str) -> Q {
    Q::parse_literal(s).unwrap()
}

fn rotation() -> Matrix<Q> {
    let mut a = Matrix::zeros(4, 4);
    for (i, j, v) in [(0, 1, "1/2"), (0, 3, "-1"), (1, 2, "2"), (2, 3, "1/3")] {
        a[(i, j)] = q(v);
        a[(j, i)] = -q(v);
    }
    a.cayley(&Tolerance::default()).unwrap()
}

#[test]
fn type6_dims_survive_a_frame_rotation() {
    let tol = Tolerance::default();
    let m: MetricLieAlgebra<Q> = type6().rotated(&rotation());
    assert!(m.validate(&tol).is_empty());
    assert_eq!(ck_dims(&m, &tol).unwrap().dims(), (10, 10));
}

#[test]
fn complex_hyperbolic_dims_survive_a_frame_rotation() {
    let tol = Tolerance::default();
    let m: MetricLieAlgebra<Q> = gab(q("1/2"), q("-2")).rotated(&rotation());
    let cls = classify_theorem_main(&m, &tol).unwrap();
    assert_eq!(cls.ck.unordered(), [8, 1]);
    assert_eq!(cls.case.map(|c| c.number()), Some(2));
}

#[test]
fn type4_sign_of_b_is_checked_independently() {
    let tol = Tolerance::default();
    for (a, b) in [("1", "0"), ("2", "1"), ("1", "-1"), ("3/2", "2")] {
        for bb in [q(b), -q(b)] {
            let m: MetricLieAlgebra<Q> = type4(q(a), bb.clone());
            assert!(flags(&riemann(&m), &tol).is_conf_flat, "type4({a}, {bb})");
        }
    }
}

#[test]
fn float_and_exact_backends_agree_on_the_gab_family() {
    let tol = Tolerance::default();
    for (a, b) in [("1/2", "1"), ("1", "0"), ("2", "1"), ("-1", "1")] {
        let exact: MetricLieAlgebra<Q> = gab(q(a), q(b));
        let float: MetricLieAlgebra<f64> = exact.map_scalars(Scalar::to_f64);
        let e = ck_dims(&exact, &tol).unwrap().dims();
        let f = ck_dims(&float, &tol).unwrap().dims();
        assert_eq!(e, f, "gab({a}, {b})");
    }
}

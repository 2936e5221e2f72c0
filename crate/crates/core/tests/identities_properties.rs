use proptest::prelude::*;
use qleg::families::{dual_q_krawtchouk, little_q_jacobi, DualQKrawtchoukParams};
use qleg::identities::{
    addition_polynomiality, big00_weight, product_formula, product_formula_descending, product_lhs,
    q_charlier_orthogonality, verify_addition, verify_addition_in, AdditionParams, CharlierKind,
};
use qleg::{DoubleDouble, Precision, QBase};

const QS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

fn point(c: f64, d: f64, t: f64) -> f64 {
    -d - 1.0 + t * (c + d + 2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn addition_in_double(
        l in 0usize..=4,
        p in 0usize..=8,
        qi in 0usize..4,
        c in 0.01f64..=2.0,
        d in 0.01f64..=2.0,
        t in 0.0f64..=1.0,
    ) {
        let a = AdditionParams::new(l, p, point(c, d, t), c, d, QBase::new(QS[qi]).unwrap()).unwrap();
        let r = verify_addition(&a, 1e-8).unwrap();
        prop_assert!(r.passed, "{r}");
    }

    #[test]
    fn addition_in_extended(
        l in 0usize..=6,
        p in 0usize..=8,
        qi in 0usize..4,
        c in 0.01f64..=2.0,
        d in 0.01f64..=2.0,
        t in 0.0f64..=1.0,
    ) {
        let a = AdditionParams::new(l, p, point(c, d, t), c, d, QBase::new(QS[qi]).unwrap()).unwrap();
        let r = verify_addition_in(&a, Precision::Extended, 1e-20).unwrap();
        prop_assert!(r.passed, "{r}");
    }
}

#[test]
fn addition_is_polynomial_in_x() {
    for q in [0.3, 0.7] {
        let base = QBase::<DoubleDouble>::new(q).unwrap();
        for (c, d) in [(1.0, 0.5), (0.4, 1.7)] {
            for l in 0..=4 {
                for p in 0..=4 {
                    let r = addition_polynomiality(l, p, c.into(), d.into(), &base, 1e-9).unwrap();
                    assert!(r.passed, "{r}");
                }
            }
        }
    }
}

#[test]
fn both_integrations_give_the_same_product_formula() {
    let base = QBase::new(0.5).unwrap();
    let (c, d) = (0.8, 1.3);
    for l in 0..=3 {
        for m in 0..=l {
            for p in 0..=3 {
                let up = product_formula(l, m, p, c, d, &base, 1e-14, 1e-8).unwrap();
                let down = product_formula_descending(l, m, p + m, c, d, &base, 1e-14, 1e-8).unwrap();
                assert!(up.passed && down.passed, "{up}\n{down}");
                assert_eq!(up.lhs, down.lhs);
                let gap = (up.rhs - down.rhs).abs() / up.rhs.abs().max(1e-300);
                assert!(gap < 1e-8, "l={l} m={m} p={p}: {} vs {}", up.rhs, down.rhs);
            }
        }
    }
}

#[test]
fn zero_order_product_matches_family_values() {
    let base = QBase::new(0.6).unwrap();
    let q = base.q();
    let (c, d) = (1.2, 0.7);
    for l in 0..=4 {
        for p in 0..=4 {
            let kraw = DualQKrawtchoukParams::new(c / d, 2 * l, base).unwrap();
            let expected = dual_q_krawtchouk(l, l, &kraw).unwrap() * little_q_jacobi(l, q.powi(p as i32), 1.0, 1.0, &base).unwrap();
            let lhs = product_lhs(l, 0, p, c, d, &base).unwrap();
            assert!((lhs - expected).abs() <= 1e-14 * expected.abs().max(1.0), "{lhs} vs {expected}");
            let r = product_formula(l, 0, p, c, d, &base, 1e-14, 1e-8).unwrap();
            assert!(r.passed, "{r}");
        }
    }
    // The kernel is the weight times P̂_p², so it is nonnegative on the lattice.
    for k in 0..40 {
        for x in [c * q.powi(k), -d * q.powi(k)] {
            assert!(big00_weight(x, c, d, &base).unwrap() >= 0.0);
        }
    }
}

#[test]
fn charlier_cross_sums_vanish() {
    for q in [0.4, 0.7] {
        let base = QBase::new(q).unwrap();
        for a in [0.5, 1.5, 3.0] {
            for n in 0..=6 {
                for m in 0..=6 {
                    let r = q_charlier_orthogonality(n, m, a, &base, CharlierKind::Cross, 1e-10).unwrap();
                    assert!(r.abs_residual <= 1e-10, "{r}");
                }
            }
        }
    }
}

#[test]
fn charlier_orthogonality() {
    let base = QBase::new(0.5).unwrap();
    for a in [0.5, 1.5, 3.0] {
        for n in 0..=6 {
            for m in 0..=6 {
                let r = q_charlier_orthogonality(n, m, a, &base, CharlierKind::Same, 1e-9).unwrap();
                assert!(r.passed, "{r}");
            }
        }
    }
}

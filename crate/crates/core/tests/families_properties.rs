use proptest::prelude::*;
use qleg::families::{
    big_q_jacobi, little_q_jacobi, monic_big_q_jacobi00, monic_recurrence, BigQJacobiParams, MonicPath,
};
use qleg::poly::{chebyshev_nodes, max_relative_deviation, NewtonPoly};
use qleg::suites::monic_paths;
use qleg::{DoubleDouble, QBase, QParam, Real};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

type DD = DoubleDouble;

/// Fits degree `n` on Chebyshev nodes of `[lo, hi]` and checks 20 fresh points.
fn fit_reproduces(n: usize, lo: f64, hi: f64, mut f: impl FnMut(DD) -> DD) {
    let poly = NewtonPoly::sample(&mut f, n, lo.into(), hi.into());
    let fresh: Vec<DD> = (0..20).map(|k| DD::from(lo + (hi - lo) * (k as f64 + 0.37) / 20.0)).collect();
    let dev = max_relative_deviation(&poly, &mut f, &fresh);
    assert!(dev < 1e-9, "degree {n}: deviation {dev:e}");
    assert!(poly.leading().hi() != 0.0, "degree {n}: vanishing leading coefficient");
}

// Terminating series with small q have terms near q^{-n²/2}, so the
// evaluations below run in double-double.
#[test]
fn every_family_has_the_stated_degree() {
    let base = QBase::<DD>::new(0.6).unwrap();
    let (c, d) = (0.9, 0.4);
    let big = BigQJacobiParams::new(DD::from(0.5), DD::from(0.3), c.into(), d.into(), base);
    for n in 0..=8 {
        fit_reproduces(n, -d - 0.5, c + 0.5, |x| monic_recurrence(n, x, c.into(), d.into(), &base));
        fit_reproduces(n, -d - 0.5, c + 0.5, |x| big_q_jacobi(n, x, &big).unwrap());
        fit_reproduces(n, -0.5, 1.5, |x| little_q_jacobi(n, x, DD::from(0.4), DD::from(0.7), &base).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monic_paths_agree_in_extended(
        n in 0usize..=8,
        q in 0.1f64..0.9,
        c in 0.05f64..2.0,
        d in 0.05f64..2.0,
        t in 0.0f64..1.0,
    ) {
        let x = -d - 1.0 + t * (c + d + 2.0);
        prop_assume!(x.abs() > 1e-3);
        let base = QBase::<DoubleDouble>::new(q).unwrap();
        let r = monic_paths(n, x.into(), c.into(), d.into(), &base, 1e-25).unwrap();
        prop_assert!(r.passed, "{r}");
    }

    #[test]
    fn big_q_jacobi_scaling(
        n in 0usize..=8,
        q in 0.3f64..0.9,
        a in 0.1f64..0.9,
        b in 0.1f64..0.9,
        c in 0.1f64..2.0,
        d in 0.1f64..2.0,
        t in 0.0f64..1.0,
    ) {
        let base = QBase::<DD>::new(q).unwrap();
        let (a, b, c, d) = (DD::from(a), DD::from(b), DD::from(c), DD::from(d));
        let x = -d + DD::from(t) * (c + d);
        let lhs = big_q_jacobi(n, x / d, &BigQJacobiParams::new(a, b, c / d, DD::from(1.0), base)).unwrap();
        let rhs = big_q_jacobi(n, x, &BigQJacobiParams::new(a, b, c, d, base)).unwrap();
        let (lhs, rhs) = (lhs.to_f64(), rhs.to_f64());
        prop_assert!(rel(lhs, rhs) < 1e-10 || (lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn monic_scaling_and_dilation(
        n in 0usize..=8,
        q in 0.1f64..0.9,
        c in 0.1f64..2.0,
        d in 0.1f64..2.0,
        t in 0.0f64..1.0,
    ) {
        let base = QBase::new(q).unwrap();
        let x = -d - 1.0 + t * (c + d + 2.0);
        let direct = monic_recurrence(n, x, c, d, &base);
        let via_d = d.powi(n as i32) * monic_recurrence(n, x / d, c / d, 1.0, &base);
        let via_c = c.powi(n as i32) * monic_recurrence(n, x / c, 1.0, d / c, &base);
        // Monic values can cancel; measure against the size of x^n.
        let scale = direct.abs().max((x.abs() + c + d).powi(n as i32));
        prop_assert!((direct - via_d).abs() <= 1e-10 * scale, "{direct} vs {via_d}");
        prop_assert!((direct - via_c).abs() <= 1e-10 * scale, "{direct} vs {via_c}");
    }

    #[test]
    fn little_is_big_at_unit_c_and_zero_d(
        n in 0usize..=5,
        q in 0.5f64..0.9,
        a in 0.3f64..0.9,
        b in 0.3f64..0.9,
        x in -0.5f64..1.5,
    ) {
        let base = QBase::<DD>::new(q).unwrap();
        let (a, b, x) = (DD::from(a), DD::from(b), DD::from(x));
        let big = BigQJacobiParams::new(a, b, DD::from(1.0), DD::from(0.0), base);
        let normalised = (big_q_jacobi(n, x, &big).unwrap() / big_q_jacobi(n, DD::from(0.0), &big).unwrap()).to_f64();
        // The roles of a and b trade places between the two normalisations.
        // The value at 0 is of size (abq^{n+1})^n, which limits the degrees
        // that survive the division even in double-double.
        let little = little_q_jacobi(n, x, b, a, &base).unwrap().to_f64();
        prop_assert!(rel(normalised, little) < 1e-10 || (normalised - little).abs() < 1e-12, "{normalised} vs {little}");
    }
}

#[test]
fn series_paths_reject_zero_argument() {
    let base = QBase::new(0.5).unwrap();
    assert!(monic_big_q_jacobi00(3, 0.0, 1.0, 0.5, &base, MonicPath::SeriesC).is_err());
    assert!(monic_big_q_jacobi00(3, 0.0, 1.0, 0.5, &base, MonicPath::SeriesD).is_err());
    let auto = monic_big_q_jacobi00(3, 0.0, 1.0, 0.5, &base, MonicPath::Auto).unwrap();
    assert_eq!(auto, monic_recurrence(3, 0.0, 1.0, 0.5, &base));
}

#[test]
fn monic_paths_agree_in_double_on_a_grid() {
    let base = QBase::new(0.5).unwrap();
    for n in 0..=6 {
        for x in chebyshev_nodes(7, -1.2, 1.7) {
            let r = monic_paths(n, x, 0.8, 0.3, &base, 1e-10).unwrap();
            assert!(r.passed, "{r}");
        }
    }
}

#[test]
fn symbolic_parameters_give_exact_zeros() {
    // a = q^{-1} makes the lower parameter qa equal to one.
    let base = QBase::new(0.5).unwrap();
    let v = little_q_jacobi(2, 0.3, QParam::q_power(0), QParam::q_power(0), &base).unwrap();
    assert!(v.is_finite());
}

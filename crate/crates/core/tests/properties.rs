use ellq::dybe;
use ellq::rmatrix::{RFamily, RKind};
use ellq::series::{Jet, LaurentSeries, Param};
use ellq::{ModularParams, Theta, C64};
use proptest::prelude::*;

fn tau() -> C64 {
    C64::new(0.0, 0.75)
}

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn cell() -> impl Strategy<Value = C64> {
    (-0.5..0.5f64, -0.5..0.5f64).prop_map(|(a, b)| tau() * b + a)
}

fn theta() -> Theta {
    Theta::new(&ModularParams::new(tau(), C64::new(0.05, 0.0)).unwrap())
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_odd_and_periodic(z in cell()) {
        let th = theta();
        let t = th.eval(z);
        let scale = t.norm().max(1.0);
        prop_assert!((th.eval(-z) + t).norm() / scale < 1e-12);
        prop_assert!((th.eval(z + 1.0) + t).norm() / scale < 1e-12);
        let m = (-C64::i() * std::f64::consts::PI * (tau() + 2.0 * z)).exp();
        prop_assert!((th.eval(z + tau()) + m * t).norm() / scale < 1e-11);
    }

    #[test]
    fn reduction_is_transparent(z in cell(), m in -3i32..3, n in -2i32..2) {
        let th = theta();
        let w = z + m as f64 + tau() * n as f64;
        let direct = th.eval(w);
        let expected = th.eval(z)
            * (-C64::i() * std::f64::consts::PI * (tau() * (n * n) as f64 + 2.0 * n as f64 * z)).exp()
            * if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((direct - expected).norm() / expected.norm().max(1.0) < 1e-10);
    }

    #[test]
    fn laurent_distributive_associative(a in coeffs(8), b in coeffs(8), c in coeffs(8), da in -2i64..1, db in -2i64..1) {
        let f = LaurentSeries::new(da, a, 6);
        let g = LaurentSeries::new(db, b, 6);
        let h = LaurentSeries::from_taylor(c);
        let lhs = &f * &(&g + &h);
        let rhs = &(&f * &g) + &(&f * &h);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        let l2 = &(&f * &g) * &h;
        let r2 = &f * &(&g * &h);
        prop_assert!(l2.max_abs_diff(&r2) < 1e-13);
    }

    #[test]
    fn laurent_invert_roundtrip(mut a in coeffs(10), d in -3i64..3) {
        a[0] += C64::new(2.0, 0.0);
        let f = LaurentSeries::new(d, a, d + 9);
        let one = &f * &f.invert().unwrap();
        prop_assert!((one.coeff(0).unwrap() - 1.0).norm() < 1e-12);
        for k in 1..=one.order_valid() {
            prop_assert!(one.coeff(k).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn jet_exp_log_inverse(mut a in coeffs(9)) {
        a[0] = C64::new(0.0, 0.0);
        let j = Jet::new(Param::Gamma, a);
        let back = j.exp().log().unwrap();
        prop_assert!(back.max_abs_diff(&j) < 1e-12);
    }

    #[test]
    fn jet_mul_is_convolution(a in coeffs(6), b in coeffs(6)) {
        let p = &Jet::new(Param::Hbar, a.clone()) * &Jet::new(Param::Hbar, b.clone());
        for k in 0..6 {
            let want: C64 = (0..=k).map(|i| a[i] * b[k - i]).sum();
            prop_assert!((p.coeff(k) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn r_matrices_conserve_weight_and_invert(z in cell(), l in cell(), g in complex(0.15)) {
        let th = theta();
        prop_assume!([z, l, z + l, z - l].iter().all(|p| th.lattice_distance(*p) > 0.05));
        let p = ModularParams::new(tau(), g).unwrap();
        let minus = RFamily::new(RKind::Rminus, &p);
        prop_assume!(minus.denominator_distance(z, l) > 0.05);
        prop_assume!(minus.with_kind(RKind::Rplus).denominator_distance(z, l) > 0.05);
        for k in [RKind::Rminus, RKind::Rplus, RKind::Rbar] {
            prop_assert_eq!(minus.with_kind(k).eval(z, l).unwrap().weight_leakage(), 0.0);
        }
        prop_assert!(dybe::unitarity_residual(&minus, z, l).unwrap() < 1e-10);
    }
}

use bcmod::commutant::PrincipalPart;
use bcmod::scalar::Scalar;
use bcmod::spectral_curve::{bc_residual, genus};
use bcmod::verify::{monic, LameRun};
use proptest::prelude::*;

fn lame_curve(omega: Scalar, w: Scalar) -> (LameRun, bcmod::spectral_curve::PlaneCurve, f64) {
    let run = LameRun::with_window(omega, Scalar::new(2.0, 0.0), w, 16, 6).unwrap();
    let q = run.commutant(&PrincipalPart::new(3, monic(3)).unwrap(), 1e-9).unwrap();
    let (_, f) = run.curve(&q).unwrap();
    let bc = bc_residual(&f, &run.p, &q.q, 1e-12).unwrap();
    (run, f, bc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // the curve depends on the lattice only, never on the basepoint
    #[test]
    fn curve_is_basepoint_free(
        re in -0.5f64..0.5, im in 0.9f64..1.8,
        wr in 0.2f64..0.8, wi in -0.2f64..0.2,
    ) {
        let om = Scalar::new(re, im);
        let (_, f1, bc) = lame_curve(om, Scalar::new(0.5, 0.0));
        let (_, f2, _) = lame_curve(om, Scalar::new(wr, wi));
        prop_assert!(bc < 1e-8);
        prop_assert!(f1.distance(&f2) < 1e-8, "distance {}", f1.distance(&f2));
        prop_assert_eq!(genus(&f1).unwrap().varpi, Some(1));
    }

    // f10 and f00 have weights 4 and 6 under omega -> -1/omega
    #[test]
    fn curve_coefficients_are_modular(re in -0.45f64..0.45, im in 1.0f64..1.6) {
        let om = Scalar::new(re, im);
        let (_, fa, _) = lame_curve(om, Scalar::new(0.5, 0.0));
        let (_, fb, _) = lame_curve(-om.inv(), Scalar::new(0.5, 0.0));
        let want4 = fa.f(1, 0) * om.powi(4);
        let s6 = fa.f(1, 0).norm().powf(1.5) * om.norm().powi(6);
        prop_assert!((fb.f(1, 0) - want4).norm() < 1e-7 * want4.norm());
        prop_assert!((fb.f(0, 0) - fa.f(0, 0) * om.powi(6)).norm() < 1e-7 * s6);
    }
}

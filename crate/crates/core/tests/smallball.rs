use hyperhaar::dyadic::enumerate_shapes;
use hyperhaar::field::GridFunction;
use hyperhaar::scalar::ratio;
use hyperhaar::smallball::{
    decompose, duality_certificate, hyperbolic_sum, hyperbolic_sup, pairing_with_int, rfunction, riesz_product,
    shapes_resolution, verify_all, BlockMode, CoefficientField, InequalityForm, RandomSigns, RieszEngine, RieszParams,
};
use hyperhaar::{ExactGrid, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn params(n: u32, d: usize, q: usize, mode: BlockMode) -> RieszParams {
    RieszParams::new(n, d, Some(q), mode).unwrap().with_surrogate(ratio(1, 3))
}

#[test]
fn rfunctions_square_to_one_and_are_orthogonal() {
    for (n, d) in [(3, 2), (2, 3), (4, 2)] {
        let shapes = enumerate_shapes(n, d);
        let res = shapes_resolution(&shapes, d);
        let source = RandomSigns { seed: 11 };
        let fs: Vec<ExactGrid> = shapes.iter().map(|s| rfunction(s, &source, &res).unwrap()).collect();
        for (i, f) in fs.iter().enumerate() {
            assert!(f.mul(f).unwrap().values().iter().all(One::is_one));
            assert!(f.integral().is_zero());
            for g in &fs[i + 1..] {
                assert!(f.inner_product(g).unwrap().is_zero());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_product_has_unit_mean(seed in any::<u64>(), case in 0usize..4) {
        let (n, d, q, mode) = [(4, 2, 2, BlockMode::Partition), (6, 2, 3, BlockMode::Partition), (4, 3, 2, BlockMode::Partition), (8, 2, 2, BlockMode::Shifted)][case];
        let p = params(n, d, q, mode);
        let psi: ExactGrid = riesz_product(&p, &RandomSigns { seed }).unwrap();
        prop_assert_eq!(psi.integral(), Rational::one());
        let dec = decompose::<Rational>(&p, &RandomSigns { seed }).unwrap();
        prop_assert!(dec.identity_holds().unwrap());
        for sd in &dec.sd_by_order {
            prop_assert!(sd.integral().is_zero());
        }
        prop_assert!(dec.neg.integral().is_zero());
    }

    #[test]
    fn pairing_matches_grid_inner_product(seed in any::<u64>()) {
        let coeffs = CoefficientField::random_rational(3, 2, seed, 5, 4);
        let p = params(3, 2, 2, BlockMode::Partition);
        let engine = RieszEngine::new(&p, &coeffs).unwrap();
        let f: ExactGrid = hyperbolic_sum(&coeffs, true).unwrap();
        for s in engine.sd_sums().unwrap() {
            let res = f.resolution().clone();
            let lifted: ExactGrid = s.refine(&res).unwrap().lift().unwrap();
            prop_assert_eq!(pairing_with_int(&coeffs, &s, true).unwrap(), f.inner_product(&lifted).unwrap());
        }
    }

    #[test]
    fn duality_bound_never_exceeds_the_sup(seed in any::<u64>(), case in 0usize..3) {
        let (n, d, q) = [(4, 2, 2), (6, 2, 3), (3, 3, 2)][case];
        let coeffs = CoefficientField::random_rational(n, d, seed, 7, 3);
        let p = params(n, d, q, BlockMode::Partition);
        let cert = duality_certificate::<Rational>(&coeffs, &p).unwrap();
        prop_assert!(cert.first_order_matches);
        prop_assert!(cert.higher_orders_vanish);
        prop_assert!(cert.lower_bound.clone().abs() <= hyperbolic_sup(&coeffs, true).unwrap());
    }

    #[test]
    fn average_form_always_holds(seed in any::<u64>(), case in 0usize..3) {
        let (n, d) = [(4, 2), (3, 3), (5, 2)][case];
        let coeffs = CoefficientField::random_rational(n, d, seed, 9, 5);
        let records = verify_all(&coeffs, 0.25).unwrap();
        let average = records.iter().find(|r| r.form == InequalityForm::Average).unwrap();
        prop_assert_eq!(average.holds, Some(true));
        prop_assert!(records.iter().filter(|r| r.form != InequalityForm::Average).all(|r| r.holds.is_none()));
    }
}

#[test]
fn float_and_exact_certificates_agree() {
    let coeffs = CoefficientField::random_signs(5, 2, 3);
    let p = RieszParams::new(5, 2, Some(2), BlockMode::Partition).unwrap();
    let surrogate = hyperhaar::smallball::dyadic_approximation(p.rho_tilde, 40);
    let exact = duality_certificate::<Rational>(&coeffs, &p.clone().with_surrogate(surrogate)).unwrap();
    let float = duality_certificate::<f64>(&coeffs, &p).unwrap();
    let e = hyperhaar::scalar::Scalar::to_f64(&exact.lower_bound);
    assert!((e - float.lower_bound).abs() < 1e-9 * e.abs().max(1.0), "{e} vs {}", float.lower_bound);
}

#[test]
fn empty_layer_gives_zero_sum() {
    let coeffs = CoefficientField::zeros(3, 2);
    let f: GridFunction<f64> = hyperbolic_sum(&coeffs, true).unwrap();
    assert!(f.values().iter().all(|v| *v == 0.0));
}

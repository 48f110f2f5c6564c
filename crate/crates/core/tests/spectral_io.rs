use std::f64::consts::PI;

use isturm::forward::{spectral_data, weyl_m, EigenRecord, Forward};
use isturm::model::ModelData;
use isturm::regular::weyl_m1;
use isturm::spectral::{
    detect_m1, eval_partial_fraction, group_multiplicities, lift_weyl, reduce_weyl, SpectralData,
    WeylPartialFraction,
};
use isturm::{Complex64, Error, Polynomial, ProblemL, SigmaFunction};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn step() -> SigmaFunction {
    SigmaFunction::Step {
        height: c(1.0, 0.0),
        jump_point: PI / 2.0,
    }
}

fn fixtures() -> Vec<ProblemL> {
    vec![
        ProblemL::new(SigmaFunction::Zero, Polynomial::one(), Polynomial::one()).unwrap(),
        ProblemL::new(step(), Polynomial::one(), Polynomial::one()).unwrap(),
        ProblemL::new(step(), Polynomial::from_real(&[1.0, 1.0]), Polynomial::one()).unwrap(),
        ProblemL::new(
            SigmaFunction::PolynomialInX {
                coeffs: vec![c(0.0, 0.0), c(0.5, 0.0)],
            },
            Polynomial::from_real(&[2.0, 0.0, 1.0]),
            Polynomial::from_real(&[1.0, 3.0]),
        )
        .unwrap(),
    ]
}

#[test]
fn identity_reduction_matches_forward_weyl() {
    let prob = ProblemL::new(SigmaFunction::Zero, Polynomial::one(), Polynomial::one()).unwrap();
    let fwd = Forward::new(&prob, 512).unwrap();
    let p1 = Polynomial::one();
    let p2 = Polynomial::zero();
    // deterministic scatter of 20 points away from the real axis
    for k in 0..20 {
        let t = k as f64;
        let z = c(-10.0 + 3.1 * t, 0.5 + (1.7 * t).sin().abs() * 4.0);
        let m1 = weyl_m1(&fwd, &p1, &p2, z).unwrap();
        let m = reduce_weyl(|_| m1, &p1, &p2, z).unwrap();
        let ex = weyl_m(&prob, z, 512).unwrap();
        assert!((m - ex).norm() < 1e-8 * (1.0 + ex.norm()), "λ = {z}: {m} vs {ex}");
    }
}

#[test]
fn rational_reduction() {
    let m1 = |l: Complex64| Complex64::new(1.0, 0.0) / (l - 2.0);
    for z in [c(0.3, 0.2), c(5.0, -1.0), c(-4.0, 3.0)] {
        let m = reduce_weyl(m1, &Polynomial::from_real(&[0.0, 1.0]), &Polynomial::one(), z).unwrap();
        assert!((m - z / (z - 1.0)).norm() < 1e-14);
    }
    let r = reduce_weyl(m1, &Polynomial::one(), &Polynomial::one(), c(1.0, 0.0));
    assert!(matches!(r, Err(Error::DenominatorZero(_))));
}

#[test]
fn model_partial_fraction_matches_closed_form() {
    let md = ModelData::new(0);
    let pf = WeylPartialFraction::new(&md.spectral_data(1));
    let v = eval_partial_fraction(&pf, c(-1.0, 0.0), 2000).unwrap();
    let ex = -1.0 / PI.tanh();
    assert!((v.re - ex).abs() < 2e-3);
    assert!((md.weyl(c(-1.0, 0.0)).re - ex).abs() < 1e-13);
}

#[test]
fn partial_fraction_small_examples() {
    let mut r = EigenRecord::new(c(2.0, 0.0), 1);
    r.alpha_coeffs = vec![c(1.0, 0.0)];
    let pf = WeylPartialFraction { records: vec![r], m1: 0 };
    assert!((eval_partial_fraction(&pf, c(3.0, 0.0), 0).unwrap() - 1.0).norm() < 1e-15);
    assert!(matches!(eval_partial_fraction(&pf, c(2.0, 0.0), 0), Err(Error::AtPole(_))));

    let mut r = EigenRecord::new(c(0.0, 0.0), 2);
    r.alpha_coeffs = vec![c(0.0, 0.0), c(1.0, 0.0)];
    let pf = WeylPartialFraction { records: vec![r], m1: 0 };
    assert!((eval_partial_fraction(&pf, c(2.0, 0.0), 0).unwrap() - 0.25).norm() < 1e-15);
}

#[test]
fn partial_fraction_of_forward_data_matches_weyl() {
    for prob in fixtures() {
        let sd = SpectralData {
            m1: prob.m1,
            case: prob.case,
            eigs: spectral_data(&prob, 60, 512).unwrap(),
        };
        let pf = WeylPartialFraction::new(&sd);
        for z in [c(-3.0, 2.0), c(12.5, 1.5), c(150.0, 5.0)] {
            let v = eval_partial_fraction(&pf, z, 2000).unwrap();
            let ex = weyl_m(&prob, z, 512).unwrap();
            assert!((v - ex).norm() < 5e-3, "M1 = {}, λ = {z}: {v} vs {ex}", prob.m1);
        }
    }
}

#[test]
fn detect_on_exact_sequences() {
    let mk = |off: f64| -> Vec<EigenRecord> {
        (1..=30).map(|n| EigenRecord::new(c((n as f64 - off).powi(2), 0.0), 1)).collect()
    };
    assert_eq!(detect_m1(&mk(2.0)).unwrap().0, 1);
    let (m1, case) = detect_m1(&mk(2.5)).unwrap();
    assert_eq!((m1 + 1, case.label()), (2, "M1=M2-1"));
    assert!(matches!(detect_m1(&mk(2.75)), Err(Error::AmbiguousOffset(_))));
    assert!(matches!(detect_m1(&mk(2.0)[..10]), Err(Error::InvalidInput(_))));
}

#[test]
fn detect_on_step_fixture() {
    let prob = ProblemL::new(step(), Polynomial::from_real(&[1.0, 1.0]), Polynomial::one()).unwrap();
    let eigs = spectral_data(&prob, 40, 512).unwrap();
    let (m1, case) = detect_m1(&eigs).unwrap();
    assert_eq!(m1, 1);
    assert_eq!(case.label(), "M1=M2");
}

#[test]
fn detect_is_exact_on_forward_data() {
    for prob in fixtures() {
        for k in [30, 45] {
            let eigs = spectral_data(&prob, k, 512).unwrap();
            assert_eq!(detect_m1(&eigs).unwrap(), (prob.m1, prob.case), "K = {k}");
        }
    }
}

#[test]
fn grouping() {
    let l = |v: &[f64]| v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>();
    assert_eq!(group_multiplicities(&l(&[0.0, 0.0, 1.0, 4.0])), (vec![1, 3, 4], vec![2, 1, 1]));
    assert_eq!(group_multiplicities(&l(&[1.0, 2.0, 3.0])), (vec![1, 2, 3], vec![1, 1, 1]));
    assert_eq!(group_multiplicities(&l(&[1.0, 1.0, 1.0, 4.0])), (vec![1, 4], vec![3, 1]));
    // tolerance scales with |λ|
    let big = l(&[1e4, 1e4 + 1e-5, 1e4 + 1.0]);
    assert_eq!(group_multiplicities(&big), (vec![1, 3], vec![2, 1]));
}

fn small_poly() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..4)
}

proptest! {
    #[test]
    fn mobius_round_trip(a in small_poly(), b in small_poly(),
                         pole_re in -5.0..5.0f64, pole_im in 0.5..3.0f64,
                         re in -6.0..6.0f64, im in -2.0..2.0f64) {
        let p1 = Polynomial::from_real(&a);
        let p2 = Polynomial::from_real(&b);
        let pole = c(pole_re, pole_im);
        let z = c(re, im);
        let f = |l: Complex64| Complex64::new(1.0, 0.0) / (l - pole);
        prop_assume!(p1.eval(z).norm() > 1e-3);
        let den = Complex64::new(1.0, 0.0) + p2.eval(z) * f(z);
        prop_assume!(den.norm() > 1e-3);
        let m = reduce_weyl(f, &p1, &p2, z).unwrap();
        let back = lift_weyl(m, &p1, &p2, z).unwrap();
        prop_assert!((back - f(z)).norm() < 1e-10 * (1.0 + f(z).norm()));
    }
}

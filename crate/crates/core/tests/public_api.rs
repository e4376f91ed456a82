use std::f64::consts::SQRT_2;

use summing_core::domination::{
    canonical, canonical_points, codomain_atoms, fit_certificate, refine, validate_certificate, AbstractPoint,
    RefineConfig,
};
use summing_core::operators::{random_op, LinearOp, MultilinearOp, Operator};
use summing_core::seqnorms::{VecSequence, WeakMode};
use summing_core::spaces::Vector;
use summing_core::witness::{lower_bound, ratio, ExponentScheme, SearchConfig, SummingWitness};
use summing_core::{DominationCertificate, Exponent, SpaceSpec};

fn e(q: f64) -> Exponent {
    Exponent::finite(q).unwrap()
}

fn quick() -> RefineConfig {
    RefineConfig { search: SearchConfig { budget: 3, seed: 0, m_max: 3 }, ..RefineConfig::default() }
}

#[test]
fn single_precision_identity_bracket() {
    let est = refine(&LinearOp::<f32>::identity(SpaceSpec::l2(2)), &ExponentScheme::cohen(e(2.0)).unwrap(), &quick())
        .unwrap();
    let s = SQRT_2 as f32;
    assert!((est.lower - s).abs() < 1e-4 && (est.upper.unwrap() - s).abs() < 1e-3, "{est:?}");
}

#[test]
fn certificate_json_roundtrip() {
    let t = LinearOp::<f64>::identity(SpaceSpec::l2(2));
    let est = refine(&t, &ExponentScheme::cohen(e(2.0)).unwrap(), &quick()).unwrap();
    let cert = est.certificate.unwrap();
    let text = serde_json::to_string(&cert).unwrap();
    let back: DominationCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert!(text.contains("\"exponent\":\"2\""));
}

#[test]
fn validated_constant_is_scheme_independent() {
    let t = summing_core::operators::random_linear::<f64>(SpaceSpec::l1(2), SpaceSpec::new(2, e(3.0)).unwrap(), 8);
    let est = refine(&t, &ExponentScheme::cohen(e(2.0)).unwrap(), &quick()).unwrap();
    let mut cert = est.certificate.unwrap();
    let a = validate_certificate(&t, &cert, 4, 0).unwrap().value;
    cert.scheme = ExponentScheme::linear(e(2.0), e(4.0 / 3.0), e(4.0)).unwrap();
    let b = validate_certificate(&t, &cert, 4, 0).unwrap().value;
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn canonical_general_scheme_bit_identical() {
    let l2 = SpaceSpec::l2(2);
    let b = random_op::<f64>(&[l2, SpaceSpec::l1(2)], SpaceSpec::new(2, e(3.0)).unwrap(), 4).unwrap();
    let scheme = ExponentScheme::general(e(2.0), e(1.0), vec![e(4.0), e(4.0)]).unwrap();
    let atoms = codomain_atoms::<f64>(b.codomain(), 24);
    let xs1 = VecSequence::new(l2, vec![Vector(vec![1.0, 0.5]), Vector(vec![-0.3, 0.2])]).unwrap();
    let xs2 = VecSequence::new(SpaceSpec::l1(2), vec![Vector(vec![0.1, 1.0]), Vector(vec![0.7, -0.7])]).unwrap();
    let fs = VecSequence::new(b.codomain().dual(), vec![Vector(vec![1.0, 0.2]), Vector(vec![-0.4, 0.9])]).unwrap();
    let w = SummingWitness::new(vec![xs1, xs2], fs).unwrap();
    let prob = canonical::<f64, MultilinearOp<f64>>(b.domains(), &scheme.slot_exponents().unwrap(), scheme.pstar, atoms.clone());
    let r = ratio(&b, &w, &scheme, WeakMode::Atoms(&atoms.points)).unwrap().value;
    assert_eq!(r.to_bits(), prob.ratio(&b, &canonical_points(&w)).unwrap().to_bits());
    let cert = fit_certificate(&b, &scheme, &atoms, std::slice::from_ref(&w)).unwrap();
    let pts: Vec<AbstractPoint<f64>> = canonical_points(&w);
    let (c, weights) = prob.fit(&b, &pts).unwrap();
    assert_eq!(c.to_bits(), cert.constant.to_bits());
    assert_eq!(weights, cert.weights);
}

#[test]
fn lower_bound_never_exceeds_refined_upper() {
    for seed in 0..4 {
        let t = summing_core::operators::random_linear::<f64>(
            SpaceSpec::new(3, e(1.5)).unwrap(),
            SpaceSpec::linf(2),
            seed,
        );
        let scheme = ExponentScheme::linear(e(2.0), e(8.0 / 7.0), e(8.0 / 3.0)).unwrap();
        let lo = lower_bound(&t, &scheme, 3, seed, 3).unwrap().lower;
        let up = refine(&t, &scheme, &quick()).unwrap().upper.unwrap();
        assert!(lo <= up + 1e-6, "seed {seed}: {lo} > {up}");
    }
}

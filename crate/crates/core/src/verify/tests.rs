use super::*;
use crate::curvature::base_coefficients;
use crate::sample::SampleBox;
use crate::symexpr::parse;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn derivs(src: &str) -> FDerivs {
    FDerivs::new(parse(src).unwrap())
}

fn bundle_samples(n: usize, seed: u64) -> Vec<Binding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampleBox::bundle_default().samples(&mut rng, n)
}

fn jet_samples(n: usize, seed: u64) -> Vec<Binding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampleBox::jet_default().samples(&mut rng, n)
}

#[test]
fn flat_structure_residuals_vanish() {
    let fd = FDerivs::new(Expr::zero());
    let reports = structure_residuals(&fd, &bundle_samples(10, 1), 1e-12, None).unwrap();
    for r in &reports {
        assert!(r.pass, "{}: max {:e}", r.label, r.max_residual);
    }
}

#[test]
fn four_thirds_structure_residuals() {
    let fd = derivs("y3^(4/3)");
    let reports = structure_residuals(&fd, &bundle_samples(20, 2), 1e-8, None).unwrap();
    for r in &reports {
        assert!(r.pass, "{}: max {:e} at {:?}", r.label, r.max_residual, r.worst_point);
    }
}

#[test]
fn street_structure_residuals() {
    let fd = derivs("(4/3)*y3^2/y2");
    let reports = structure_residuals(&fd, &bundle_samples(20, 3), 1e-8, None).unwrap();
    for r in &reports {
        assert!(r.pass, "{}: max {:e}", r.label, r.max_residual);
    }
}

#[test]
fn mutations_are_detected() {
    // every corrupted coefficient formula must break some equation; small y3
    // keeps |b0|, which decays in y3, well above the detection floor
    let fd = derivs("y3^(4/3)");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = SampleBox::bundle_default()
        .with("y3", 0.02, 0.15)
        .samples(&mut rng, 5);
    let names = ["a0", "a1", "a2", "b0", "b1", "b2", "b3", "b4"];
    let coeffs = base_coefficients(&fd);
    let probe = &samples[0];
    let cv = coeffs.eval(probe).unwrap();
    let vals = [cv.a0, cv.a1, cv.a2, cv.b0, cv.b1, cv.b2, cv.b3, cv.b4];
    for (index, name) in names.iter().enumerate() {
        assert!(
            vals[index].abs() > 1e-6,
            "{name} vanishes at the probe point; the mutation would be invisible"
        );
        let m = Mutation { index, factor: 2.0 };
        let reports = structure_residuals(&fd, &samples, 1e-8, Some(m)).unwrap();
        let worst = reports
            .iter()
            .map(|r| r.max_residual)
            .fold(0.0f64, f64::max);
        assert!(worst > 1e-3, "mutation of {name} undetected: worst {worst:e}");
    }
}

#[test]
fn normalize_branches() {
    // flat class is not normalizable
    let fd = FDerivs::new(Expr::zero());
    let jet = &jet_samples(1, 7)[0];
    assert!(matches!(
        normalize_section(&fd, jet),
        Err(VerifyError::NotNormalizable)
    ));

    // street rhs: eps1 = +1, I2 = 0 branch, a2 -> 8, a1 -> 0
    let fd = derivs("(4/3)*y3^2/y2");
    for jet in jet_samples(10, 8) {
        let nm = normalize_section(&fd, &jet).unwrap();
        assert_eq!(nm.eps1, 1);
        assert!(nm.eps2.is_none(), "street should be on the I2 = 0 branch");
        assert!((nm.coeffs.a2 - 8.0).abs() < 1e-9, "a2 = {}", nm.coeffs.a2);
        assert!(nm.coeffs.a1.abs() < 1e-9, "a1 = {}", nm.coeffs.a1);
    }

    // y3^(4/3) is also on the I2 = 0 branch
    let fd = derivs("y3^(4/3)");
    for jet in jet_samples(10, 9) {
        let nm = normalize_section(&fd, &jet).unwrap();
        assert!(nm.eps2.is_none());
        assert!((nm.coeffs.a2 - 8.0 * nm.eps1 as f64).abs() < 1e-9);
        assert!(nm.coeffs.a1.abs() < 1e-9);
    }
}

#[test]
fn street_model_equations_hold() {
    let reports = street_model_check(&jet_samples(20, 11), 1e-8).unwrap();
    for r in &reports {
        assert!(r.pass, "{}: max {:e} at {:?}", r.label, r.max_residual, r.worst_point);
    }
}

#[test]
fn eds_closes_for_all_sign_pairs() {
    for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let report = eds_closure_check(e1, e2, EdsVariant::Consistent, 50, 13, 1e-9);
        assert!(
            report.pass,
            "({e1},{e2}): max {:e} at {:?}",
            report.max_residual, report.worst_point
        );
    }
}

#[test]
fn printed_eds_variant_fails_iff_signs_differ() {
    // the two transcriptions coincide when eps1 = eps2; for mixed signs the
    // printed exponential-term coefficients break closure (DEVIATIONS.md)
    for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let report = eds_closure_check(e1, e2, EdsVariant::Printed, 10, 17, 1e-9);
        assert_eq!(report.pass, e1 == e2, "({e1},{e2}): max {:e}", report.max_residual);
        if e1 != e2 {
            assert!(report.max_residual > 1.0, "failure should be gross, not marginal");
        }
    }
}

#[test]
fn constant_scalars_contradict_the_system() {
    for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let c = constancy_contradiction(e1, e2, EdsVariant::Printed);
        assert!(
            (c + e2 as f64 / 4.0).abs() < 1e-15,
            "({e1},{e2}): sigma0 coefficient of d(w0) is {c}"
        );
        assert!(c.abs() > 0.1);
        // nonzero in the consistent variant too, so the argument survives
        let c = constancy_contradiction(e1, e2, EdsVariant::Consistent);
        assert!((c + e1 as f64 / 4.0).abs() < 1e-15);
    }
}

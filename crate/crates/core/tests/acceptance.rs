//! Top-level acceptance suite: one test per headline claim, each printing a
//! single pass/fail line. Tolerances and sample counts are the contractual
//! values; the per-module unit tests probe the same machinery more finely.
//!
//! Two behaviors intentionally differ from the printed source formulas and
//! are covered by DEVIATIONS.md: the b1 line of the coefficient
//! transformation list, and the exponential-term signs of the reduced
//! exterior differential system.

use gl2ode::bryant::{bryant_residuals, check_bryant};
use gl2ode::curvature::{
    assemble_curvature, base_coefficients, compare_transform_paths, invariants, quartic_i4,
    ricci, transformed_coefficients, weyl_data, Coefficients,
};
use gl2ode::fderiv::FDerivs;
use gl2ode::forms::Chart;
use gl2ode::gl2coframe::{
    base_coframe, commutator, det, gl2_generators, rat_mat_scale, FiberPoint, gauge_matrix,
};
use gl2ode::family::{
    ansatz_f, integrate_q, interior_sample_box, scan_family, special_slopes, Branch,
};
use gl2ode::sample::SampleBox;
use gl2ode::symexpr::{eval, parse, rat, simplify, Binding, Rat};
use gl2ode::verify::{
    eds_closure_check, street_model_check, structure_residuals, EdsVariant, Mutation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn derivs(src: &str) -> FDerivs {
    FDerivs::new(parse(src).unwrap())
}

fn verdict(n: usize, what: &str, pass: bool) -> bool {
    println!("[{n:>2}] {what}: {}", if pass { "pass" } else { "FAIL" });
    pass
}

/// The catalogue of closed-form right sides known to satisfy both
/// conditions.
const CATALOGUE: [&str; 5] = [
    "0",
    "y3^(4/3)",
    "(4/3)*y3^2/y2",
    "3*y3^2/y2",
    "(5/3)*y3^2/y2",
];

#[test]
fn c01_bryant_catalogue() {
    let t0 = Instant::now();
    let mut pass = true;
    for src in CATALOGUE {
        let fd = derivs(src);
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let samples = SampleBox::jet_default().samples(&mut rng, 100);
        let r = check_bryant(&fd, &samples, 1e-9).unwrap();
        pass &= r.pass;
        assert!(r.pass, "{src}: r1 {:e}, r2 {:e}", r.max_r1, r.max_r2);
    }
    // y3^2 violates the second condition with r2 = 144 y3^4
    let fd = derivs("y3^2");
    let at1 = Binding::from_pairs(&[("x", 0.0), ("y", 0.0), ("y1", 0.0), ("y2", 1.0), ("y3", 1.0)]);
    let r2 = eval(&bryant_residuals(&fd).r2, &at1).unwrap();
    pass &= r2 == 144.0;
    assert_eq!(r2, 144.0);
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let samples = SampleBox::jet_default().samples(&mut rng, 20);
    let neg = check_bryant(&fd, &samples, 1e-9).unwrap();
    pass &= !neg.pass;
    assert!(!neg.pass);
    assert!(t0.elapsed().as_secs_f64() < 5.0, "catalogue check too slow");
    assert!(verdict(1, "bryant catalogue and y3^2 counterexample", pass));
}

#[test]
fn c02_flat_model_is_flat() {
    let fd = derivs("0");
    let c = base_coefficients(&fd);
    let mut pass = [&c.a0, &c.a1, &c.a2, &c.b0, &c.b1, &c.b2, &c.b3, &c.b4]
        .iter()
        .all(|e| simplify(e).is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let samples = SampleBox::bundle_default().samples(&mut rng, 10);
    for r in structure_residuals(&fd, &samples, 1e-12, None).unwrap() {
        pass &= r.pass;
        assert!(r.pass, "{}: {:e}", r.label, r.max_residual);
    }
    assert!(verdict(2, "flat model: zero coefficients, residuals < 1e-12", pass));
}

#[test]
fn c03_structure_equations_and_mutation() {
    let t0 = Instant::now();
    let mut pass = true;
    for src in ["y3^(4/3)", "(4/3)*y3^2/y2"] {
        let fd = derivs(src);
        let mut rng = ChaCha8Rng::seed_from_u64(301);
        let samples = SampleBox::bundle_default().samples(&mut rng, 20);
        for r in structure_residuals(&fd, &samples, 1e-8, None).unwrap() {
            pass &= r.pass;
            assert!(r.pass, "{src} {}: {:e}", r.label, r.max_residual);
        }
    }
    // corrupting any coefficient formula by a factor 2 must be detected;
    // small y3 keeps the weakest coefficient (b0) above the trip level
    let fd = derivs("y3^(4/3)");
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let samples = SampleBox::bundle_default()
        .with("y3", 0.02, 0.15)
        .samples(&mut rng, 5);
    for index in 0..8 {
        let m = Mutation { index, factor: 2.0 };
        let worst = structure_residuals(&fd, &samples, 1e-8, Some(m))
            .unwrap()
            .iter()
            .map(|r| r.max_residual)
            .fold(0.0f64, f64::max);
        pass &= worst > 1e-3;
        assert!(worst > 1e-3, "mutation {index} undetected: {worst:e}");
    }
    assert!(t0.elapsed().as_secs_f64() < 30.0, "structure suite too slow");
    assert!(verdict(3, "structure equations < 1e-8, mutations trip > 1e-3", pass));
}

#[test]
fn c04_ricci_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut pass = true;
    for _ in 0..1000 {
        // exact rational tuple: contraction identities hold on the nose
        let mut r = || rat(rng.gen_range(-9i64..10), rng.gen_range(1i64..7));
        let c = Coefficients::<Rat> {
            a0: r(),
            a1: r(),
            a2: r(),
            b0: r(),
            b1: r(),
            b2: r(),
            b3: r(),
            b4: r(),
        };
        let t = assemble_curvature(&c);
        let direct = ricci(&c);
        let contracted = t.ricci();
        let anti = direct.antisymmetric_part();
        let tr = t.first_trace();
        for j in 0..4 {
            for l in 0..4 {
                pass &= contracted[j][l] == direct.r[j][l];
                pass &= tr[j][l] == &anti[j][l] * &rat(2, 1);
            }
        }
    }
    assert!(pass, "an exact Ricci identity failed");
    let mut rngf = ChaCha8Rng::seed_from_u64(402);
    for _ in 0..1000 {
        let mut g = || rngf.gen_range(-2.0..2.0);
        let c = Coefficients::<f64> {
            a0: g(),
            a1: g(),
            a2: g(),
            b0: g(),
            b1: g(),
            b2: g(),
            b3: g(),
            b4: g(),
        };
        let (i2, i3) = invariants(&c);
        let r = ricci(&c);
        let mut s: Vec<Vec<f64>> = r.symmetric_part().iter().map(|x| x.to_vec()).collect();
        let mut a: Vec<Vec<f64>> = r.antisymmetric_part().iter().map(|x| x.to_vec()).collect();
        let ds = det(&mut s);
        let da = det(&mut a);
        pass &= (ds - i2 * i2).abs() < 1e-9 * (1.0 + i2 * i2);
        pass &= (da - i3 * i3).abs() < 1e-9 * (1.0 + i3 * i3);
    }
    assert!(verdict(4, "ricci contraction and determinant identities", pass));
}

#[test]
fn c05_gauge_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let mut pass = true;
    let mut b1_mismatch_seen = false;
    for _ in 0..200 {
        let mut g = || rng.gen_range(-2.0..2.0);
        let base = Coefficients::<f64> {
            a0: g(),
            a1: g(),
            a2: g(),
            b0: g(),
            b1: g(),
            b2: g(),
            b3: g(),
            b4: g(),
        };
        let p = FiberPoint::new(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.4..2.5),
            rng.gen_range(0.4..2.5),
        )
        .unwrap();
        // succeeding here asserts the conjugated Ricci stayed on-pattern
        // (internal check at 1e-10 relative)
        let t = transformed_coefficients(&base, &p).unwrap();
        let (i2b, _) = invariants(&base);
        let (i2t, _) = invariants(&t);
        let w = (p.a44 / (p.a11 * p.a11)).powi(2);
        pass &= (i2t - w * i2b).abs() < 1e-9 * (1.0 + (w * i2b).abs());
        // the printed transformation list agrees except on its b1 line,
        // whose corrected value is recorded in DEVIATIONS.md
        for (label, _, _) in compare_transform_paths(&base, &p, 1e-9).unwrap() {
            pass &= label == "b1";
            b1_mismatch_seen |= label == "b1";
        }
    }
    pass &= b1_mismatch_seen;
    assert!(verdict(5, "gauge pattern, I2 weight law, b1 line deviation", pass));
}

#[test]
fn c06_quartic_equivariance() {
    // the quartic has constant coefficients, so the ratio test is a pure
    // statement about the 4-dimensional representation; run it at 10 fibers
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut pass = true;
    for _ in 0..10 {
        let p = FiberPoint::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        )
        .unwrap();
        let g = gauge_matrix(&p).unwrap();
        let mut ratio: Option<f64> = None;
        let mut tested = 0;
        while tested < 50 {
            let t: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let base = quartic_i4(t);
            if base.abs() < 1e-3 {
                continue;
            }
            let mt: [f64; 4] =
                std::array::from_fn(|i| (0..4).map(|j| g.m[i][j] * t[j]).sum());
            let r = quartic_i4(mt) / base;
            match ratio {
                None => ratio = Some(r),
                Some(r0) => pass &= (r - r0).abs() < 1e-9 * r0.abs().max(1.0),
            }
            tested += 1;
        }
    }
    assert!(verdict(6, "quartic invariant ratio constant to 1e-9", pass));
}

#[test]
fn c07_street_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let samples = SampleBox::jet_default().samples(&mut rng, 20);
    let mut pass = true;
    for r in street_model_check(&samples, 1e-8).unwrap() {
        pass &= r.pass;
        assert!(r.pass, "{}: {:e}", r.label, r.max_residual);
    }
    // dOmega vanishes identically: every b coefficient is symbolically zero
    let fd = derivs("(4/3)*y3^2/y2");
    let c = base_coefficients(&fd);
    for e in [&c.b0, &c.b1, &c.b2, &c.b3, &c.b4] {
        pass &= simplify(e).is_zero();
    }
    let frame = base_coframe(&fd, Chart::jet());
    let w = weyl_data(&frame, &c, &samples, 1e-9).unwrap();
    pass &= w.maxwell_flat;
    assert!(verdict(7, "street model equations and flat Maxwell form", pass));
}

#[test]
fn c08_eds_closure() {
    // closure holds for all four sign pairs after the exponential-term sign
    // correction documented in DEVIATIONS.md; the formulas as printed close
    // only when the two signs agree
    let mut pass = true;
    for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let r = eds_closure_check(e1, e2, EdsVariant::Consistent, 50, 801, 1e-9);
        pass &= r.pass;
        assert!(r.pass, "{}: {:e}", r.label, r.max_residual);
        let printed = eds_closure_check(e1, e2, EdsVariant::Printed, 10, 802, 1e-9);
        pass &= printed.pass == (e1 == e2);
    }
    assert!(verdict(8, "eds closure (sign-corrected; see DEVIATIONS.md)", pass));
}

#[test]
fn c09_family() {
    let t0 = Instant::now();
    let mut pass = true;
    pass &= special_slopes(Branch::A) == [rat(0, 1), rat(4, 3)];
    pass &= special_slopes(Branch::B) == [rat(5, 3), rat(3, 1)];

    // fourth-order convergence against a fine reference
    let end_q = |step: f64, nodes: usize| {
        let sol = integrate_q(Branch::A, 1.0, 1.0, 1.0, step, nodes).unwrap();
        *sol.q.last().unwrap()
    };
    let reference = end_q(0.5 / 512.0, 513);
    let factor = (end_q(0.05, 11) - reference).abs() / (end_q(0.025, 21) - reference).abs();
    pass &= (12.0..=20.0).contains(&factor);
    assert!(pass, "convergence factor {factor}");

    // generic members of both branches; the scanned invariants are I2 and
    // I3 (see DEVIATIONS.md on the claimed vanishing quartic)
    for (branch, q0, qp0, seed) in [(Branch::A, 1.0, 1.0, 901u64), (Branch::B, 2.0, 2.0, 902)] {
        let sol = integrate_q(branch, 1.0, q0, qp0, 0.005, 201).unwrap();
        let model = ansatz_f(&sol);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = interior_sample_box(&model).samples(&mut rng, 20);
        let r = scan_family(&sol, &samples).unwrap();
        pass &= r.special_slope.is_none();
        pass &= r.bryant_max < 1e-6;
        pass &= r.i2_max < 1e-6;
        pass &= r.i3_max < 1e-6;
        pass &= r.a2_max > 1e-6;
        pass &= r.b4_max > 1e-6;
        pass &= !r.maxwell_flat;
        assert!(
            pass,
            "{branch:?}: bryant {:e}, I2 {:e}, I3 {:e}, a2 {:e}, b4 {:e}, flat {}",
            r.bryant_max, r.i2_max, r.i3_max, r.a2_max, r.b4_max, r.maxwell_flat
        );
    }
    assert!(t0.elapsed().as_secs_f64() < 20.0, "family suite too slow");
    assert!(verdict(9, "family roots, rk4 order, member invariants", pass));
}

#[test]
fn c10_gl2_commutation_relations() {
    let g = gl2_generators();
    let mut pass = true;
    pass &= commutator(&g.e_zero, &g.e_plus) == rat_mat_scale(&g.e_plus, &rat(-2, 1));
    pass &= commutator(&g.e_zero, &g.e_minus) == rat_mat_scale(&g.e_minus, &rat(2, 1));
    pass &= commutator(&g.e_plus, &g.e_minus) == rat_mat_scale(&g.e_zero, &rat(-1, 1));
    assert!(verdict(10, "gl(2,R) commutation relations exact", pass));
}

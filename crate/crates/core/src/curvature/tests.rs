use super::*;
use crate::fderiv::FDerivs;
use crate::forms::Chart;
use crate::gl2coframe::{base_coframe, det};
use crate::sample::SampleBox;
use crate::symexpr::{parse, simplify};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn derivs(src: &str) -> FDerivs {
    FDerivs::new(parse(src).unwrap())
}

fn jet_samples(n: usize, seed: u64) -> Vec<Binding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampleBox::jet_default().samples(&mut rng, n)
}

fn random_coeffs_f64(rng: &mut ChaCha8Rng) -> Coefficients<f64> {
    Coefficients {
        a0: rng.gen_range(-2.0..2.0),
        a1: rng.gen_range(-2.0..2.0),
        a2: rng.gen_range(-2.0..2.0),
        b0: rng.gen_range(-2.0..2.0),
        b1: rng.gen_range(-2.0..2.0),
        b2: rng.gen_range(-2.0..2.0),
        b3: rng.gen_range(-2.0..2.0),
        b4: rng.gen_range(-2.0..2.0),
    }
}

fn random_coeffs_rat(rng: &mut ChaCha8Rng) -> Coefficients<Rat> {
    let mut r = || rat(rng.gen_range(-9i64..10), rng.gen_range(1i64..7));
    Coefficients {
        a0: r(),
        a1: r(),
        a2: r(),
        b0: r(),
        b1: r(),
        b2: r(),
        b3: r(),
        b4: r(),
    }
}

#[test]
fn flat_base_coefficients_vanish() {
    let c = base_coefficients(&FDerivs::new(Expr::zero()));
    for e in [&c.a0, &c.a1, &c.a2, &c.b0, &c.b1, &c.b2, &c.b3, &c.b4] {
        assert!(e.is_zero(), "nonzero flat coefficient: {e}");
    }
}

#[test]
fn four_thirds_power_spot_values() {
    let fd = derivs("y3^(4/3)");
    let c = base_coefficients(&fd);
    let at1 = Binding::from_pairs(&[("x", 0.0), ("y", 0.0), ("y1", 0.0), ("y2", 1.0), ("y3", 1.0)]);
    // b4 = -2 F333 = -2 * (-8/27)
    let v = eval(&c.b4, &at1).unwrap();
    assert!((v - 16.0 / 27.0).abs() < 1e-14, "b4 = {v}");
    // the Remark forces I2 = 0: a1^2 = a0 a2 at every point
    for b in jet_samples(30, 4) {
        let a0 = eval(&c.a0, &b).unwrap();
        let a1 = eval(&c.a1, &b).unwrap();
        let a2 = eval(&c.a2, &b).unwrap();
        assert!(
            (a1 * a1 - a0 * a2).abs() < 1e-9 * (1.0 + a1 * a1),
            "I2 != 0 at {b:?}"
        );
        // and I3 = 0
        let cv = c.eval(&b).unwrap();
        let (_, i3) = invariants(&cv);
        assert!(i3.abs() < 1e-9, "I3 = {i3}");
    }
}

#[test]
fn ricci_examples() {
    let c = Coefficients::<f64> {
        a0: 8.0,
        a1: 0.0,
        a2: 8.0,
        ..Coefficients::zero()
    };
    let r = ricci(&c).r;
    let expect = [
        [0.0, 0.0, 8.0, 0.0],
        [0.0, -16.0, 0.0, 8.0],
        [8.0, 0.0, -16.0, 0.0],
        [0.0, 8.0, 0.0, 0.0],
    ];
    assert_eq!(r, expect);

    let zero = ricci(&Coefficients::<f64>::zero()).r;
    assert_eq!(zero, [[0.0; 4]; 4]);

    let c = Coefficients::<f64> {
        b0: 1.0,
        b4: 1.0,
        ..Coefficients::zero()
    };
    let r = ricci(&c);
    assert_eq!(r.r[0][1], 1.0);
    assert_eq!(r.r[2][3], 1.0);
    let s = r.symmetric_part();
    assert_eq!(s, [[0.0; 4]; 4]);
}

#[test]
fn curvature_contraction_matches_ricci_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let c = random_coeffs_rat(&mut rng);
        let t = assemble_curvature(&c);
        let contracted = t.ricci();
        let direct = ricci(&c).r;
        for j in 0..4 {
            for l in 0..4 {
                assert_eq!(contracted[j][l], direct[j][l], "slot ({j},{l})");
            }
        }
        // R^i_{ikl} = 2 R_[kl]
        let tr = t.first_trace();
        let anti = ricci(&c).antisymmetric_part();
        for k in 0..4 {
            for l in 0..4 {
                assert_eq!(tr[k][l], anti[k][l].scale(&rat(2, 1)), "trace ({k},{l})");
            }
        }
    }
    let zt = assemble_curvature(&Coefficients::<Rat>::zero());
    assert!(zt.r.iter().flatten().flatten().flatten().all(|v| v.is_zero()));
}

#[test]
fn invariant_polynomial_examples() {
    let c = Coefficients::<f64> {
        a0: 1.0,
        a1: 2.0,
        a2: 3.0,
        ..Coefficients::zero()
    };
    assert_eq!(invariants(&c).0, 1.0);
    let c = Coefficients::<f64> {
        b0: 1.0,
        b4: 1.0,
        ..Coefficients::zero()
    };
    assert_eq!(invariants(&c).1, 1.0);
}

#[test]
fn determinant_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let c = random_coeffs_f64(&mut rng);
        let (i2, i3) = invariants(&c);
        let r = ricci(&c);
        let mut s: Vec<Vec<f64>> = r.symmetric_part().iter().map(|x| x.to_vec()).collect();
        let mut a: Vec<Vec<f64>> = r.antisymmetric_part().iter().map(|x| x.to_vec()).collect();
        let ds = det(&mut s);
        let da = det(&mut a);
        assert!(
            (ds - i2 * i2).abs() < 1e-9 * (1.0 + i2 * i2),
            "det sym {ds} vs {}",
            i2 * i2
        );
        assert!(
            (da - i3 * i3).abs() < 1e-9 * (1.0 + i3 * i3),
            "det asym {da} vs {}",
            i3 * i3
        );
    }
}

#[test]
fn quartic_examples_and_equivariance() {
    assert_eq!(quartic_i4([1.0, 0.0, 0.0, 1.0]), 1.0);
    assert_eq!(quartic_i4([0.0, 1.0, 1.0, 0.0]), -3.0);
    assert_eq!(quartic_i4([1.0, 1.0, 1.0, 1.0]), 0.0);

    // for a fixed fiber point the ratio I4(m t)/I4(t) is constant in t
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..5 {
        let p = FiberPoint::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        )
        .unwrap();
        let g = gauge_matrix(&p).unwrap();
        let mut ratio: Option<f64> = None;
        let mut tested = 0;
        while tested < 20 {
            let t: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let base = quartic_i4(t);
            if base.abs() < 1e-3 {
                continue;
            }
            let mt: [f64; 4] = std::array::from_fn(|i| {
                (0..4).map(|j| g.m[i][j] * t[j]).sum()
            });
            let r = quartic_i4(mt) / base;
            match ratio {
                None => ratio = Some(r),
                Some(r0) => assert!(
                    (r - r0).abs() < 1e-9 * r0.abs().max(1.0),
                    "ratio drifted: {r} vs {r0}"
                ),
            }
            tested += 1;
        }
    }
}

#[test]
fn transform_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let base = random_coeffs_f64(&mut rng);

    let id = transformed_coefficients(&base, &FiberPoint::identity()).unwrap();
    assert!((id.a0 - base.a0).abs() < 1e-12);
    assert!((id.b3 - base.b3).abs() < 1e-12);

    let p = FiberPoint::new(0.0, 2.0, 1.0).unwrap();
    let t = transformed_coefficients(&base, &p).unwrap();
    assert!((t.a2 - base.a2 / 4.0).abs() < 1e-12, "a2 {} vs {}", t.a2, base.a2 / 4.0);

    let p = FiberPoint::new(3.0, 1.0, 1.0).unwrap();
    let t = transformed_coefficients(&base, &p).unwrap();
    assert!((t.a1 - (base.a1 - base.a2)).abs() < 1e-12);
}

#[test]
fn transform_pattern_and_weight_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..200 {
        let base = random_coeffs_f64(&mut rng);
        let p = FiberPoint::new(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.4..2.5),
            rng.gen_range(0.4..2.5),
        )
        .unwrap();
        // extraction succeeding is the pattern-preservation assertion
        let t = transformed_coefficients(&base, &p).unwrap();
        let (i2b, _) = invariants(&base);
        let (i2t, _) = invariants(&t);
        let w = (p.a44 / (p.a11 * p.a11)).powi(2);
        assert!(
            (i2t - w * i2b).abs() < 1e-9 * (1.0 + i2b.abs() * w),
            "I2 weight law: {i2t} vs {}",
            w * i2b
        );
    }
}

#[test]
fn printed_transform_disagrees_only_on_b1() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let base = random_coeffs_f64(&mut rng);
        let p = FiberPoint::new(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        )
        .unwrap();
        let mismatches = compare_transform_paths(&base, &p, 1e-9).unwrap();
        for (label, _, _) in &mismatches {
            assert_eq!(*label, "b1", "unexpected mismatch on {label}");
        }
        // with a10 = 0 the suspect term drops out and everything agrees
        let p0 = FiberPoint::new(0.0, p.a11, p.a44).unwrap();
        assert!(compare_transform_paths(&base, &p0, 1e-9).unwrap().is_empty());
        // correcting (3 a11)^4 -> 3 a11^4 reconciles b1
        let auth = transformed_coefficients(&base, &p).unwrap();
        let corrected = base.b1 / p.a11.powi(2)
            + p.a10 / p.a11.powi(3) * base.b2
            + p.a10.powi(2) / (3.0 * p.a11.powi(4)) * base.b3
            + p.a10.powi(3) / (27.0 * p.a11.powi(5)) * base.b4;
        assert!((auth.b1 - corrected).abs() < 1e-9, "{} vs {corrected}", auth.b1);
    }
}

#[test]
fn weyl_flat_and_street() {
    let samples = jet_samples(20, 37);

    let fd = FDerivs::new(Expr::zero());
    let frame = base_coframe(&fd, Chart::jet());
    let c = base_coefficients(&fd);
    let w = weyl_data(&frame, &c, &samples, 1e-9).unwrap();
    assert!(w.maxwell_flat);
    assert!(w.a_form.is_empty());
    assert!(w.da.is_empty());

    let fd = derivs("(4/3)*y3^2/y2");
    let frame = base_coframe(&fd, Chart::jet());
    let c = base_coefficients(&fd);
    for e in [&c.b0, &c.b1, &c.b2, &c.b3, &c.b4] {
        assert!(simplify(e).is_zero(), "street b-coefficient nonzero: {e}");
    }
    let w = weyl_data(&frame, &c, &samples, 1e-9).unwrap();
    assert!(w.maxwell_flat, "max_b = {:e}", w.max_b);
    assert!(w.consistency < 1e-8);
}

use super::*;
use crate::fderiv::FDerivs;
use crate::forms::Chart;
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

#[test]
fn generator_relations_hold_exactly() {
    let g = gl2_generators();
    let neg = |m: &RatMat| rat_mat_scale(m, &int(-1));
    assert_eq!(commutator(&g.e_zero, &g.e_plus), rat_mat_scale(&g.e_plus, &int(-2)));
    assert_eq!(commutator(&g.e_zero, &g.e_minus), rat_mat_scale(&g.e_minus, &int(2)));
    assert_eq!(commutator(&g.e_plus, &g.e_minus), neg(&g.e_zero));
    for (i, row) in g.e.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let expect = if i == j { int(-3) } else { int(0) };
            assert_eq!(*v, expect);
        }
    }
    for other in [&g.e_plus, &g.e_minus, &g.e_zero] {
        let c = commutator(&g.e, other);
        assert!(c.iter().flatten().all(|v| v.is_zero()), "E must be central");
    }
}

#[test]
fn flat_base_coframe_collapses() {
    let fd = FDerivs::new(Expr::zero());
    let set = base_coframe(&fd, Chart::jet());
    // theta^2_0 = -1/2 omega^2 = -1/2 (dy2 - y3 dx)
    assert_eq!(set.theta[2].coeff(&[3]), Expr::frac(-1, 2));
    assert_eq!(
        crate::symexpr::simplify(&set.theta[2].coeff(&[0])),
        crate::symexpr::simplify(&Expr::mul(vec![Expr::frac(1, 2), Expr::sym("y3")])),
    );
    // Omega^0_+ = w_+ = dx
    assert_eq!(set.om_plus.coeff(&[0]), Expr::one());
    assert!(set.om_plus.coeffs().count() == 1);
    // Omega^0, Omega^0_0, Omega^0_- all vanish
    assert!(set.om.is_empty());
    assert!(set.om_zero.is_empty());
    assert!(set.om_minus.is_empty());
}

#[test]
fn omega_plus_coefficient_for_four_thirds_power() {
    // F = y3^(4/3): omega^1-coefficient of Omega^0_+ is F33/6 = (2/27) y3^(-2/3)
    let fd = derivs("y3^(4/3)");
    let set = base_coframe(&fd, Chart::jet());
    // the omega^1 = dy1 - y2 dx contribution puts the coefficient on dy1
    let c = set.om_plus.coeff(&[2]);
    let b = Binding::from_pairs(&[("x", 0.0), ("y", 0.0), ("y1", 0.0), ("y2", 1.0), ("y3", 1.0)]);
    let v = eval(&c, &b).unwrap();
    assert!((v - 2.0 / 27.0).abs() < 1e-15, "got {v}");
}

#[test]
fn gauge_matrix_examples() {
    let id = gauge_matrix(&FiberPoint::identity()).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_eq!(id.m[i][j], expect);
        }
    }
    let diag = gauge_matrix(&FiberPoint::new(0.0, 2.0, 1.0).unwrap()).unwrap();
    for i in 0..4 {
        assert_eq!(diag.m[i][i], 2.0);
        for j in 0..4 {
            if i != j {
                assert_eq!(diag.m[i][j], 0.0);
            }
        }
    }
    let sheared = gauge_matrix(&FiberPoint::new(3.0, 1.0, 1.0).unwrap()).unwrap();
    assert_eq!(sheared.m[1][0], -1.0);

    assert!(matches!(
        FiberPoint::new(0.0, 0.0, 1.0),
        Err(CoframeError::SingularFiber("a11"))
    ));
}

#[test]
fn gauge_determinant_formula() {
    // det m = a11^4 / a44^2
    for (a10, a11, a44) in [(0.7, 1.3, 0.6), (-1.1, 0.8, 1.9)] {
        let g = gauge_matrix(&FiberPoint::new(a10, a11, a44).unwrap()).unwrap();
        let mut rows: Vec<Vec<f64>> = g.m.iter().map(|r| r.to_vec()).collect();
        let d = det(&mut rows);
        let expect = a11.powi(4) / a44.powi(2);
        assert!((d - expect).abs() < 1e-12 * expect.abs(), "{d} vs {expect}");
    }
}

#[test]
fn lift_reduces_to_base_at_identity_fiber() {
    let fd = derivs("y3^(4/3)");
    let base = base_coframe(&fd, Chart::bundle());
    let lifted = lift_coframe(&base).unwrap();
    let mut b = Binding::from_pairs(&[
        ("x", 0.3),
        ("y", -0.4),
        ("y1", 0.2),
        ("y2", 1.1),
        ("y3", 1.7),
        ("a10", 0.0),
        ("a11", 1.0),
        ("a44", 1.0),
    ]);
    // horizontal components must agree; vertical (da) components belong to
    // the lift only, so compare the jet-indexed coefficients
    for (lf, bf) in lifted.forms().iter().zip(base.forms().iter()) {
        let lv = lf.eval(&b).unwrap();
        let bv = bf.eval(&b).unwrap();
        for idx in 0..5u8 {
            let l = lv.get(&vec![idx]).copied().unwrap_or(0.0);
            let r = bv.get(&vec![idx]).copied().unwrap_or(0.0);
            assert!((l - r).abs() < 1e-12, "index {idx}: {l} vs {r}");
        }
    }
    // moving the fiber point changes theta^0 by the expected factor
    b.set(crate::Sym::new("a11"), 2.0);
    let v = lifted.theta[0].eval(&b).unwrap();
    assert!((v[&vec![1u8]] - (-6.0)).abs() < 1e-12);
}

#[test]
fn flat_lift_connection() {
    // F = 0 at fiber (0,1,1): Omega has no horizontal part and Omega_+ = w_+
    let fd = FDerivs::new(Expr::zero());
    let base = base_coframe(&fd, Chart::bundle());
    let lifted = lift_coframe(&base).unwrap();
    let b = Binding::from_pairs(&[
        ("x", 0.1),
        ("y", 0.2),
        ("y1", 0.3),
        ("y2", 1.0),
        ("y3", 1.0),
        ("a10", 0.0),
        ("a11", 1.0),
        ("a44", 1.0),
    ]);
    let om = lifted.om.eval(&b).unwrap();
    for idx in 0..5u8 {
        assert!(om.get(&vec![idx]).copied().unwrap_or(0.0).abs() < 1e-12);
    }
    let op = lifted.om_plus.eval(&b).unwrap();
    assert!((op.get(&vec![0u8]).copied().unwrap_or(0.0) - 1.0).abs() < 1e-12);
    for idx in 1..5u8 {
        assert!(op.get(&vec![idx]).copied().unwrap_or(0.0).abs() < 1e-12);
    }
}

#[test]
fn coframe_rank_is_full() {
    for src in ["0", "y3^(4/3)", "(4/3)*y3^2/y2", "3*y3^2/y2"] {
        let fd = derivs(src);
        let base = base_coframe(&fd, Chart::bundle());
        let lifted = lift_coframe(&base).unwrap();
        for b in bundle_samples(5, 11) {
            let d = lifted.frame_determinant(&b).unwrap();
            assert!(d.abs() > 1e-8, "{src}: det {d} at {b:?}");
        }
    }
}

#[test]
fn alpha_table_examples() {
    let fd = FDerivs::new(Expr::zero());
    let at = alpha_table(&fd);
    let b = FiberPoint::new(0.5, 1.0, 1.0).unwrap().binding();
    assert!((eval(&at.a2_2, &b).unwrap() + 0.5).abs() < 1e-15);
    assert!(at.a4_1.is_zero());

    let fd = derivs("y3^(4/3)");
    let at = alpha_table(&fd);
    let mut b = FiberPoint::identity().binding();
    for (s, v) in [("x", 0.0), ("y", 0.0), ("y1", 0.0), ("y2", 1.0), ("y3", 1.0)] {
        b.set(crate::Sym::new(s), v);
    }
    let v = eval(&at.a4_1, &b).unwrap();
    assert!((v - 2.0 / 27.0).abs() < 1e-15, "alpha^4_1 = {v}");
}

#[test]
fn alpha_assembly_matches_lift() {
    for src in ["y3^(4/3)", "(4/3)*y3^2/y2"] {
        let fd = derivs(src);
        let base = base_coframe(&fd, Chart::bundle());
        let lifted = lift_coframe(&base).unwrap();
        let samples = bundle_samples(10, 17);
        let worst = check_alpha_consistency(&fd, &lifted, &samples, 1e-10).unwrap();
        assert!(worst <= 1e-10, "{src}: worst {worst:e}");
    }
}

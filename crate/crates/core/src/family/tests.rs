use super::*;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn affine_profiles_have_the_stated_roots() {
    // q = cz turns the residual into z times a quadratic in c
    for z in [0.5, 1.0, 2.0] {
        for c in [-1.0, 0.0, 0.5, 4.0 / 3.0, 5.0 / 3.0, 3.0] {
            let ra = q_residual(Branch::A, z, c * z, c, 0.0);
            assert!((ra - z * (-3.0 * c * c + 4.0 * c)).abs() < 1e-12);
            let rb = q_residual(Branch::B, z, c * z, c, 0.0);
            assert!((rb - z * (-3.0 * c * c + 14.0 * c - 15.0)).abs() < 1e-12);
        }
    }
    let a = special_slopes(Branch::A);
    assert_eq!(a, [rat(0, 1), rat(4, 3)]);
    let b = special_slopes(Branch::B);
    assert_eq!(b, [rat(5, 3), rat(3, 1)]);
    for c in a {
        let cf = c.to_f64().unwrap();
        assert!(q_residual(Branch::A, 1.3, cf * 1.3, cf, 0.0).abs() < 1e-12);
    }
    for c in b {
        let cf = c.to_f64().unwrap();
        assert!(q_residual(Branch::B, 1.3, cf * 1.3, cf, 0.0).abs() < 1e-12);
    }
    // solving branch a for q'' at (1, 1, 1) gives -(3 - 6 + 4)/6
    assert!(q_residual(Branch::A, 1.0, 1.0, 1.0, -1.0 / 6.0).abs() < 1e-14);
}

#[test]
fn integrator_reproduces_the_specials() {
    let sol = integrate_q(Branch::A, 1.0, 4.0 / 3.0, 4.0 / 3.0, 0.05, 21).unwrap();
    assert!(!sol.truncated);
    for (z, q) in sol.z.iter().zip(&sol.q) {
        assert!((q - 4.0 / 3.0 * z).abs() < 1e-8, "q({z}) = {q}");
    }
    assert_eq!(sol.special_slope(), Some(rat(4, 3)));

    let sol = integrate_q(Branch::B, 1.0, 3.0, 3.0, 0.05, 21).unwrap();
    for (z, q) in sol.z.iter().zip(&sol.q) {
        assert!((q - 3.0 * z).abs() < 1e-8);
    }
    assert_eq!(sol.special_slope(), Some(rat(3, 1)));
}

#[test]
fn generic_solution_is_not_affine() {
    let sol = integrate_q(Branch::A, 1.0, 1.0, 1.0, 0.05, 21).unwrap();
    assert!(sol.max_node_residual() < 1e-8);
    assert!(sol.special_slope().is_none());
    // slope through two interior nodes differs from the secant elsewhere
    let c1 = sol.q[5] / sol.z[5];
    let c2 = sol.q[15] / sol.z[15];
    assert!((c1 - c2).abs() > 1e-4, "profile looks affine: {c1} vs {c2}");
}

#[test]
fn rk4_order_four_convergence() {
    // error at z = 1.5 against a much finer reference halves ~16x per step halving
    let end_q = |step: f64, nodes: usize| {
        let sol = integrate_q(Branch::A, 1.0, 1.0, 1.0, step, nodes).unwrap();
        assert!((sol.z.last().unwrap() - 1.5).abs() < 1e-12);
        *sol.q.last().unwrap()
    };
    let reference = end_q(0.5 / 512.0, 513);
    let e1 = (end_q(0.05, 11) - reference).abs();
    let e2 = (end_q(0.025, 21) - reference).abs();
    let factor = e1 / e2;
    assert!((12.0..=20.0).contains(&factor), "convergence factor {factor}");
}

#[test]
fn singular_guards() {
    assert!(matches!(
        integrate_q(Branch::A, 1.0, 1.5, 0.0, 0.1, 5),
        Err(FamilyError::SingularInitial)
    ));
    // start just above the locus with q' > 3/2 so the gap 3z - 2q closes
    let sol = integrate_q(Branch::A, 1.0, 1.45, 2.0, 0.005, 100).unwrap();
    assert!(sol.truncated, "expected truncation near the singular locus");
    assert!(sol.max_node_residual() < 1e-8);
}

#[test]
fn ansatz_matches_chain_rule_oracles() {
    // q = 3z exactly (branch b special): F = 3 y3^2 / y2, F3 = 6 y3 / y2
    let sol = integrate_q(Branch::B, 0.5, 1.5, 3.0, 0.05, 31).unwrap();
    let model = ansatz_f(&sol);
    let mut b = Binding::from_pairs(&[
        ("x", 0.0),
        ("y", 0.0),
        ("y1", 0.0),
        ("y2", 1.0),
        ("y3", 1.0),
    ]);
    model.bind(&mut b);
    let f = eval(&model.fd.f(), &b).unwrap();
    assert!((f - 3.0).abs() < 1e-9, "F = {f}");
    let f3 = eval(&model.fd.p("3"), &b).unwrap();
    assert!((f3 - 6.0).abs() < 1e-8, "F3 = {f3}");
    // outside the grid the evaluator refuses and eval surfaces the error
    let mut far = Binding::from_pairs(&[
        ("x", 0.0),
        ("y", 0.0),
        ("y1", 0.0),
        ("y2", 1.0),
        ("y3", 10.0),
    ]);
    model.bind(&mut far);
    assert!(eval(&model.fd.f(), &far).is_err());
}

#[test]
fn generic_family_member_scan() {
    let sol = integrate_q(Branch::A, 1.0, 1.0, 1.0, 0.005, 201).unwrap();
    let model = ansatz_f(&sol);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let samples = interior_sample_box(&model).samples(&mut rng, 20);
    let r = scan_family(&sol, &samples).unwrap();
    assert!(r.evaluated >= 15, "only {} samples evaluated", r.evaluated);
    assert!(r.special_slope.is_none());
    assert!(r.bryant_max < 1e-6, "bryant {:e}", r.bryant_max);
    assert!(r.i2_max < 1e-6, "I2 {:e}", r.i2_max);
    assert!(r.i3_max < 1e-6, "I3 {:e}", r.i3_max);
    assert!(r.a2_max > 1e-6, "a2 {:e}", r.a2_max);
    assert!(r.b4_max > 1e-6, "b4 {:e}", r.b4_max);
    assert!(!r.maxwell_flat);
}

#[test]
fn street_slope_member_scan() {
    // c = 4/3 is the street class: I2 = 0 and every b coefficient vanishes
    let sol = integrate_q(Branch::A, 1.0, 4.0 / 3.0, 4.0 / 3.0, 0.005, 201).unwrap();
    let model = ansatz_f(&sol);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let samples = interior_sample_box(&model).samples(&mut rng, 20);
    let r = scan_family(&sol, &samples).unwrap();
    assert_eq!(r.special_slope, Some(4.0 / 3.0));
    assert!(r.bryant_max < 1e-6);
    assert!(r.i2_max < 1e-6, "I2 {:e}", r.i2_max);
    assert!(r.max_b < 1e-6, "max b {:e}", r.max_b);
    assert!(r.a2_max > 1e-6);
}

//! The gl(2,R) generators, the base-section coframe, the gauge matrix of
//! the residual group, and the lifted coframe and connection on the
//! 8-dimensional bundle.
//!
//! All long coefficient formulas are transcribed once, with exact rational
//! constants, and are covered by the structure-equation residual suite in
//! `verify`. One transcription choice is documented in DEVIATIONS.md.

use crate::fderiv::FDerivs;
use crate::forms::{contact_forms, Chart, KForm};
use crate::symexpr::{eval, int, Binding, Expr, Rat};
use num_traits::Zero;
use std::array;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoframeError {
    #[error("fiber point has a vanishing parameter ({0})")]
    SingularFiber(&'static str),
    #[error("connection decomposition residual {residual:e} exceeds 1e-10 (transcription bug)")]
    Decomposition { residual: f64 },
    #[error("alpha-table cross-check failed at entry {entry}: residual {residual:e}")]
    AlphaMismatch { entry: &'static str, residual: f64 },
}

// ---------------------------------------------------------------------------
// gl(2,R) generators
// ---------------------------------------------------------------------------

pub type RatMat = [[Rat; 4]; 4];

pub struct Gl2Generators {
    pub e_plus: RatMat,
    pub e_minus: RatMat,
    pub e_zero: RatMat,
    pub e: RatMat,
}

fn rmat(rows: [[i64; 4]; 4]) -> RatMat {
    rows.map(|r| r.map(int))
}

fn rat_zeros() -> RatMat {
    array::from_fn(|_| array::from_fn(|_| Rat::zero()))
}

pub fn rat_mat_mul(a: &RatMat, b: &RatMat) -> RatMat {
    let mut out = rat_zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Rat::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += &a[i][k] * &bk[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn rat_mat_sub(a: &RatMat, b: &RatMat) -> RatMat {
    let mut out = rat_zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = &a[i][j] - &b[i][j];
        }
    }
    out
}

pub fn commutator(a: &RatMat, b: &RatMat) -> RatMat {
    rat_mat_sub(&rat_mat_mul(a, b), &rat_mat_mul(b, a))
}

pub fn rat_mat_scale(a: &RatMat, c: &Rat) -> RatMat {
    let mut out = rat_zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = &a[i][j] * c;
        }
    }
    out
}

impl Default for Gl2Generators {
    fn default() -> Self {
        gl2_generators()
    }
}

/// The 4-dimensional irreducible representation of gl(2,R):
/// `[E0,E+] = -2E+`, `[E0,E-] = 2E-`, `[E+,E-] = -E0`, `E = -3 id`.
pub fn gl2_generators() -> Gl2Generators {
    Gl2Generators {
        e_plus: rmat([[0, 3, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1], [0, 0, 0, 0]]),
        e_minus: rmat([[0, 0, 0, 0], [1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 3, 0]]),
        e_zero: rmat([[-3, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 3]]),
        e: rmat([[-3, 0, 0, 0], [0, -3, 0, 0], [0, 0, -3, 0], [0, 0, 0, -3]]),
    }
}

// ---------------------------------------------------------------------------
// fiber point and gauge matrix
// ---------------------------------------------------------------------------

/// Point (a10, a11, a44) of the residual group; a11, a44 nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPoint {
    pub a10: f64,
    pub a11: f64,
    pub a44: f64,
}

impl FiberPoint {
    pub fn new(a10: f64, a11: f64, a44: f64) -> Result<Self, CoframeError> {
        if a11 == 0.0 {
            return Err(CoframeError::SingularFiber("a11"));
        }
        if a44 == 0.0 {
            return Err(CoframeError::SingularFiber("a44"));
        }
        Ok(FiberPoint { a10, a11, a44 })
    }

    pub fn identity() -> Self {
        FiberPoint {
            a10: 0.0,
            a11: 1.0,
            a44: 1.0,
        }
    }

    pub fn binding(&self) -> Binding {
        Binding::from_pairs(&[("a10", self.a10), ("a11", self.a11), ("a44", self.a44)])
    }
}

pub type ExprMat = [[Expr; 4]; 4];

/// Symbolic gauge matrix in the fiber symbols a10, a11, a44.
pub fn gauge_matrix_sym() -> ExprMat {
    let a10 = || Expr::sym("a10");
    let a11 = || Expr::sym("a11");
    let a44 = || Expr::sym("a44");
    let z = Expr::zero;
    [
        [Expr::mul(vec![a11(), a44()]), z(), z(), z()],
        [
            Expr::mul(vec![Expr::frac(-1, 3), a10()]),
            a11(),
            z(),
            z(),
        ],
        [
            Expr::mul(vec![
                Expr::frac(1, 9),
                a10().powi(2),
                a11().powi(-1),
                a44().powi(-1),
            ]),
            Expr::mul(vec![Expr::frac(-2, 3), a10(), a44().powi(-1)]),
            Expr::mul(vec![a11(), a44().powi(-1)]),
            z(),
        ],
        [
            Expr::mul(vec![
                Expr::frac(-1, 27),
                a10().powi(3),
                a11().powi(-2),
                a44().powi(-2),
            ]),
            Expr::mul(vec![
                Expr::frac(1, 3),
                a10().powi(2),
                a11().powi(-1),
                a44().powi(-2),
            ]),
            Expr::mul(vec![Expr::num(-1), a10(), a44().powi(-2)]),
            Expr::mul(vec![a11(), a44().powi(-2)]),
        ],
    ]
}

/// Inverse of a lower-triangular Expr matrix by forward substitution.
pub fn invert_lower_triangular(m: &ExprMat) -> ExprMat {
    let mut inv: ExprMat = array::from_fn(|_| array::from_fn(|_| Expr::zero()));
    for i in 0..4 {
        inv[i][i] = crate::symexpr::simplify(&Expr::one().div(m[i][i].clone()));
    }
    for i in 1..4 {
        for j in (0..i).rev() {
            let mut acc = Vec::new();
            for k in j..i {
                acc.push(Expr::mul(vec![m[i][k].clone(), inv[k][j].clone()]));
            }
            let s = Expr::add(acc);
            inv[i][j] = crate::symexpr::simplify(
                &Expr::mul(vec![Expr::num(-1), s]).div(m[i][i].clone()),
            );
        }
    }
    inv
}

/// Numeric gauge matrix with verified inverse.
#[derive(Debug, Clone)]
pub struct GaugeMatrix {
    pub m: [[f64; 4]; 4],
    pub inv: [[f64; 4]; 4],
}

pub fn gauge_matrix(p: &FiberPoint) -> Result<GaugeMatrix, CoframeError> {
    if p.a11 == 0.0 {
        return Err(CoframeError::SingularFiber("a11"));
    }
    if p.a44 == 0.0 {
        return Err(CoframeError::SingularFiber("a44"));
    }
    let b = p.binding();
    let msym = gauge_matrix_sym();
    let isym = invert_lower_triangular(&msym);
    let mut m = [[0.0f64; 4]; 4];
    let mut inv = [[0.0f64; 4]; 4];
    for (i, (mi, invi)) in m.iter_mut().zip(inv.iter_mut()).enumerate() {
        for (j, (mij, invij)) in mi.iter_mut().zip(invi.iter_mut()).enumerate() {
            *mij = eval(&msym[i][j], &b).expect("gauge entry evaluates");
            *invij = eval(&isym[i][j], &b).expect("gauge inverse entry evaluates");
        }
    }
    // m * inv = identity to 1e-12
    for (i, mi) in m.iter().enumerate() {
        for j in 0..4 {
            let mut acc = 0.0;
            for (k, invk) in inv.iter().enumerate() {
                acc += mi[k] * invk[j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!(
                (acc - expect).abs() < 1e-12,
                "gauge inverse check failed at ({i},{j}): {acc}"
            );
        }
    }
    Ok(GaugeMatrix { m, inv })
}

// ---------------------------------------------------------------------------
// coframes
// ---------------------------------------------------------------------------

/// The eight invariant 1-forms. `theta[0..4]` plus the connection forms
/// Omega_+, Omega_-, Omega_0, Omega.
#[derive(Debug, Clone)]
pub struct CoframeSet {
    pub theta: [KForm; 4],
    pub om_plus: KForm,
    pub om_minus: KForm,
    pub om_zero: KForm,
    pub om: KForm,
}

impl CoframeSet {
    pub fn forms(&self) -> [&KForm; 8] {
        [
            &self.theta[0],
            &self.theta[1],
            &self.theta[2],
            &self.theta[3],
            &self.om_plus,
            &self.om_minus,
            &self.om_zero,
            &self.om,
        ]
    }

    pub fn labels() -> [&'static str; 8] {
        [
            "theta0", "theta1", "theta2", "theta3", "Omega+", "Omega-", "Omega0", "Omega",
        ]
    }

    /// Determinant of the 8x8 numeric coefficient matrix at a point
    /// (coframe rank check).
    pub fn frame_determinant(&self, b: &Binding) -> Result<f64, crate::forms::FormError> {
        let dim = self.theta[0].chart().dim();
        let mut rows = Vec::with_capacity(8);
        for f in self.forms() {
            let vals = f.eval(b)?;
            let mut row = vec![0.0f64; dim];
            for (k, v) in vals {
                row[k[0] as usize] = v;
            }
            rows.push(row);
        }
        Ok(det(&mut rows))
    }
}

/// Gaussian-elimination determinant with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn det(rows: &mut [Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut sign = 1.0;
    let mut acc = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()))
            .unwrap();
        if rows[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            rows.swap(piv, c);
            sign = -sign;
        }
        acc *= rows[c][c];
        for r in c + 1..n {
            let f = rows[r][c] / rows[c][c];
            for k in c..n {
                let v = rows[c][k] * f;
                rows[r][k] -= v;
            }
        }
    }
    sign * acc
}

/// The coframe of the base section (gauge (0,1,1)) built from the contact
/// forms on `chart` (jet or bundle chart; only jet coordinates appear).
pub fn base_coframe(fd: &FDerivs, chart: Arc<Chart>) -> CoframeSet {
    let ([om0, om1, om2, om3], w_plus) = contact_forms(chart.clone(), &fd.f());
    let n = Expr::num;
    let c = Expr::frac;

    let lin = |terms: Vec<(Expr, &KForm)>| {
        let mut acc = KForm::zero(chart.clone(), 1);
        for (e, f) in terms {
            acc = acc.add(&f.scale(&e));
        }
        acc
    };

    let theta0 = om0.scale(&n(-3));
    let theta1 = om1.clone();

    // (1/240)(-24 DF3 + 36 F2 + 11 F3^2)
    let t2_c0 = Expr::mul(vec![
        c(1, 240),
        Expr::add(vec![
            Expr::mul(vec![n(-24), fd.d("3")]),
            Expr::mul(vec![n(36), fd.p("2")]),
            Expr::mul(vec![n(11), fd.p("3").powi(2)]),
        ]),
    ]);
    let theta2 = lin(vec![
        (t2_c0.clone(), &om0),
        (Expr::mul(vec![c(1, 12), fd.p("3")]), &om1),
        (c(-1, 2), &om2),
    ]);

    // omega^0 coefficient of theta^3_0; the printed form ends in -7 F3^2 but
    // the alpha-table's matching entry ends in -7 F3^3, which is the variant
    // the structure equations accept (see DEVIATIONS.md).
    let t3_c0 = Expr::mul(vec![
        c(1, 720),
        Expr::add(vec![
            Expr::mul(vec![n(36), fd.d("2").sub(Expr::mul(vec![n(4), fd.p("1")]))]),
            Expr::mul(vec![
                n(18),
                fd.d("3").sub(Expr::mul(vec![n(2), fd.p("2")])),
                fd.p("3"),
            ]),
            Expr::mul(vec![n(-7), fd.p("3").powi(3)]),
        ]),
    ]);
    let t3_c1 = Expr::mul(vec![
        c(1, 240),
        Expr::add(vec![
            Expr::mul(vec![n(36), fd.d("3")]),
            Expr::mul(vec![n(-84), fd.p("2")]),
            Expr::mul(vec![n(-19), fd.p("3").powi(2)]),
        ]),
    ]);
    let theta3 = lin(vec![
        (t3_c0, &om0),
        (t3_c1, &om1),
        (Expr::mul(vec![c(-1, 4), fd.p("3")]), &om2),
        (c(1, 2), &om3),
    ]);

    // Omega^0_+ = -(1/60)(12 DF33 - 6 F23 + F3 F33) omega^0 + (1/6) F33 omega^1 + w_+
    let op_c0 = Expr::mul(vec![
        c(-1, 60),
        Expr::add(vec![
            Expr::mul(vec![n(12), fd.d("33")]),
            Expr::mul(vec![n(-6), fd.p("23")]),
            Expr::mul(vec![fd.p("3"), fd.p("33")]),
        ]),
    ]);
    let om_plus = lin(vec![
        (op_c0, &om0),
        (Expr::mul(vec![c(1, 6), fd.p("33")]), &om1),
        (Expr::one(), &w_plus),
    ]);

    // The remaining three are combinations of theta^0_0, theta^1_0,
    // theta^2_0 and Omega^0_+.
    let o0_c0 = Expr::mul(vec![
        c(1, 4320),
        Expr::add(vec![
            Expr::mul(vec![n(72), fd.d("23")]),
            Expr::mul(vec![n(432), fd.p("13")]),
            Expr::mul(vec![n(-288), fd.p("22")]),
            Expr::mul(vec![n(60), fd.d("33"), fd.p("3")]),
            Expr::mul(vec![n(-216), fd.p("23"), fd.p("3")]),
            Expr::mul(vec![n(-108), fd.d("3"), fd.p("33")]),
            Expr::mul(vec![n(324), fd.p("2"), fd.p("33")]),
            Expr::mul(vec![n(47), fd.p("3").powi(2), fd.p("33")]),
        ]),
    ]);
    let o0_c1 = Expr::mul(vec![
        c(1, 180),
        Expr::add(vec![
            Expr::mul(vec![n(3), fd.d("33")]),
            Expr::mul(vec![n(-9), fd.p("23")]),
            Expr::mul(vec![n(-1), fd.p("3"), fd.p("33")]),
        ]),
    ]);
    let om_zero = lin(vec![
        (o0_c0, &theta0),
        (o0_c1, &theta1),
        (Expr::mul(vec![c(1, 6), fd.p("33")]), &theta2),
        (Expr::mul(vec![c(-1, 12), fd.p("3")]), &om_plus),
    ]);

    let omm_c0 = Expr::mul(vec![
        c(1, 64800),
        Expr::add(vec![
            Expr::mul(vec![n(720), fd.d("22")]),
            Expr::mul(vec![n(288), fd.d("3"), fd.d("33")]),
            Expr::mul(vec![n(-2160), fd.p("12")]),
            Expr::mul(vec![n(-432), fd.d("33"), fd.p("2")]),
            Expr::mul(vec![n(216), fd.d("3"), fd.p("23")]),
            Expr::mul(vec![n(216), fd.p("2"), fd.p("23")]),
            Expr::mul(vec![n(720), fd.d("23"), fd.p("3")]),
            Expr::mul(vec![n(-1080), fd.p("13"), fd.p("3")]),
            Expr::mul(vec![n(-360), fd.p("22"), fd.p("3")]),
            Expr::mul(vec![n(48), fd.d("33"), fd.p("3").powi(2)]),
            Expr::mul(vec![n(-174), fd.p("23"), fd.p("3").powi(2)]),
            Expr::mul(vec![n(-360), fd.d("2"), fd.p("33")]),
            Expr::mul(vec![n(1440), fd.p("1"), fd.p("33")]),
            Expr::mul(vec![n(24), fd.d("3"), fd.p("3"), fd.p("33")]),
            Expr::mul(vec![n(324), fd.p("2"), fd.p("3"), fd.p("33")]),
            Expr::mul(vec![n(29), fd.p("3").powi(3), fd.p("33")]),
            Expr::mul(vec![n(3600), fd.p("3y")]),
        ]),
    ]);
    let omm_c1 = Expr::mul(vec![
        c(1, 1080),
        Expr::add(vec![
            Expr::mul(vec![n(-108), fd.d("23")]),
            Expr::mul(vec![n(-288), fd.p("13")]),
            Expr::mul(vec![n(252), fd.p("22")]),
            Expr::mul(vec![n(-54), fd.d("33"), fd.p("3")]),
            Expr::mul(vec![n(186), fd.p("23"), fd.p("3")]),
            Expr::mul(vec![n(66), fd.d("3"), fd.p("33")]),
            Expr::mul(vec![n(-252), fd.p("2"), fd.p("33")]),
            Expr::mul(vec![n(-31), fd.p("3").powi(2), fd.p("33")]),
        ]),
    ]);
    let omm_c2 = Expr::mul(vec![
        c(1, 90),
        Expr::add(vec![
            Expr::mul(vec![n(12), fd.d("33")]),
            Expr::mul(vec![n(-6), fd.p("23")]),
            Expr::mul(vec![fd.p("3"), fd.p("33")]),
        ]),
    ]);
    let omm_c4 = Expr::mul(vec![
        c(1, 360),
        Expr::add(vec![
            Expr::mul(vec![n(-24), fd.d("3")]),
            Expr::mul(vec![n(36), fd.p("2")]),
            Expr::mul(vec![n(11), fd.p("3").powi(2)]),
        ]),
    ]);
    let om_minus = lin(vec![
        (omm_c0, &theta0),
        (omm_c1, &theta1),
        (omm_c2, &theta2),
        (omm_c4, &om_plus),
    ]);

    let om_c0 = Expr::mul(vec![
        c(1, 4320),
        Expr::add(vec![
            Expr::mul(vec![n(120), fd.d("23")]),
            Expr::mul(vec![n(240), fd.p("13")]),
            Expr::mul(vec![n(-240), fd.p("22")]),
            Expr::mul(vec![n(36), fd.d("33"), fd.p("3")]),
            Expr::mul(vec![n(-168), fd.p("23"), fd.p("3")]),
            Expr::mul(vec![n(-36), fd.d("3"), fd.p("33")]),
            Expr::mul(vec![n(204), fd.p("2"), fd.p("33")]),
            Expr::mul(vec![n(17), fd.p("3").powi(2), fd.p("33")]),
        ]),
    ]);
    let om = lin(vec![
        (om_c0, &theta0),
        (
            Expr::mul(vec![c(1, 12), fd.p("23").sub(fd.d("33"))]),
            &theta1,
        ),
        (Expr::mul(vec![c(-1, 6), fd.p("33")]), &theta2),
        (Expr::mul(vec![c(1, 12), fd.p("3")]), &om_plus),
    ]);

    CoframeSet {
        theta: [
            theta0.simplified(),
            theta1.simplified(),
            theta2.simplified(),
            theta3.simplified(),
        ],
        om_plus: om_plus.simplified(),
        om_minus: om_minus.simplified(),
        om_zero: om_zero.simplified(),
        om: om.simplified(),
    }
}

/// Connection matrix Gamma = Om_- E_- + Om_+ E_+ + Om_0 E_0 + Om E.
pub fn connection_matrix(set: &CoframeSet) -> Vec<Vec<KForm>> {
    let g = gl2_generators();
    let chart = set.om_plus.chart().clone();
    let mut out = vec![vec![KForm::zero(chart.clone(), 1); 4]; 4];
    let pieces: [(&KForm, &RatMat); 4] = [
        (&set.om_minus, &g.e_minus),
        (&set.om_plus, &g.e_plus),
        (&set.om_zero, &g.e_zero),
        (&set.om, &g.e),
    ];
    for (form, mat) in pieces {
        for i in 0..4 {
            for j in 0..4 {
                if mat[i][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&form.scale(&Expr::Rat(mat[i][j].clone())));
            }
        }
    }
    out
}

/// Lift the base-section coframe to the bundle chart:
/// `theta^i = m^i_j theta^j_0` and `Gamma = m Gamma0 m^-1 + m d(m^-1)`,
/// decomposed back into the four connection forms.
pub fn lift_coframe(base: &CoframeSet) -> Result<CoframeSet, CoframeError> {
    let chart = base.theta[0].chart().clone();
    assert_eq!(chart.dim(), 8, "lift requires the bundle chart");
    let m = gauge_matrix_sym();
    let minv = invert_lower_triangular(&m);

    // theta^i = m^i_j theta^j_0
    let mut theta: Vec<KForm> = Vec::with_capacity(4);
    for mi in &m {
        let mut acc = KForm::zero(chart.clone(), 1);
        for (j, mij) in mi.iter().enumerate() {
            if mij.is_zero() {
                continue;
            }
            acc = acc.add(&base.theta[j].scale(mij));
        }
        theta.push(acc.simplified());
    }

    // Gamma = m Gamma0 m^-1 + m d(m^-1)
    let gamma0 = connection_matrix(base);
    let mut gamma = vec![vec![KForm::zero(chart.clone(), 1); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = KForm::zero(chart.clone(), 1);
            for (k, g0k) in gamma0.iter().enumerate() {
                for (l, g0kl) in g0k.iter().enumerate() {
                    if m[i][k].is_zero() || minv[l][j].is_zero() {
                        continue;
                    }
                    let factor = Expr::mul(vec![m[i][k].clone(), minv[l][j].clone()]);
                    acc = acc.add(&g0kl.scale(&factor));
                }
            }
            for (k, invk) in minv.iter().enumerate() {
                if m[i][k].is_zero() || invk[j].is_zero() {
                    continue;
                }
                let dinv = KForm::scalar(chart.clone(), invk[j].clone()).d();
                acc = acc.add(&dinv.scale(&m[i][k]));
            }
            gamma[i][j] = acc.simplified();
        }
    }

    // decompose in the generator basis
    let om_plus = gamma[0][1].scale(&Expr::frac(1, 3)).simplified();
    let om_minus = gamma[1][0].clone();
    let om_zero = gamma[2][2]
        .sub(&gamma[1][1])
        .scale(&Expr::frac(1, 2))
        .simplified();
    let om = gamma[1][1]
        .add(&gamma[2][2])
        .scale(&Expr::frac(-1, 6))
        .simplified();

    let lifted = CoframeSet {
        theta: [
            theta[0].clone(),
            theta[1].clone(),
            theta[2].clone(),
            theta[3].clone(),
        ],
        om_plus,
        om_minus,
        om_zero,
        om,
    };

    // exactness check: rebuilding Gamma from the four forms must reproduce
    // every entry, including the six slots outside the generator span
    let rebuilt = connection_matrix(&lifted);
    let mut worst = 0.0f64;
    let probes = decomposition_probes();
    for b in &probes {
        for i in 0..4 {
            for j in 0..4 {
                let resid = gamma[i][j].sub(&rebuilt[i][j]);
                if let Ok(v) = resid.max_abs(b) {
                    worst = worst.max(v);
                }
            }
        }
    }
    if worst > 1e-10 {
        return Err(CoframeError::Decomposition { residual: worst });
    }
    Ok(lifted)
}

fn decomposition_probes() -> Vec<Binding> {
    let pts = [
        [0.3, -0.2, 0.4, 1.1, 0.9, 0.5, 1.3, 0.8],
        [-0.7, 0.6, -0.1, 0.7, 1.6, -0.9, 0.7, 1.7],
        [0.1, 0.9, 0.8, 1.9, 0.6, 0.2, 1.9, 0.6],
    ];
    pts.iter()
        .map(|p| {
            Binding::from_pairs(&[
                ("x", p[0]),
                ("y", p[1]),
                ("y1", p[2]),
                ("y2", p[3]),
                ("y3", p[4]),
                ("a10", p[5]),
                ("a11", p[6]),
                ("a44", p[7]),
            ])
        })
        .collect()
}

// ---------------------------------------------------------------------------
// alpha table
// ---------------------------------------------------------------------------

/// The ten group parameters of the invariant forms, as expressions in the
/// fiber symbols and the derivatives of F.
pub struct AlphaTable {
    pub a0_0: Expr,
    pub a1_0: Expr,
    pub a1_1: Expr,
    pub a2_0: Expr,
    pub a2_1: Expr,
    pub a2_2: Expr,
    pub a3_0: Expr,
    pub a3_1: Expr,
    pub a3_2: Expr,
    pub a3_3: Expr,
    pub a4_0: Expr,
    pub a4_1: Expr,
    pub a4_4: Expr,
}

pub fn alpha_table(fd: &FDerivs) -> AlphaTable {
    let n = Expr::num;
    let c = Expr::frac;
    let a10 = || Expr::sym("a10");
    let a11 = || Expr::sym("a11");
    let a44 = || Expr::sym("a44");

    let q240 = Expr::add(vec![
        Expr::mul(vec![n(-24), fd.d("3")]),
        Expr::mul(vec![n(36), fd.p("2")]),
        Expr::mul(vec![n(11), fd.p("3").powi(2)]),
    ]);
    let t3_inner = Expr::add(vec![
        Expr::mul(vec![n(36), fd.d("2").sub(Expr::mul(vec![n(4), fd.p("1")]))]),
        Expr::mul(vec![
            n(18),
            fd.d("3").sub(Expr::mul(vec![n(2), fd.p("2")])),
            fd.p("3"),
        ]),
        Expr::mul(vec![n(-7), fd.p("3").powi(3)]),
    ]);

    AlphaTable {
        a0_0: Expr::mul(vec![n(-3), a11(), a44()]),
        a1_0: a10(),
        a1_1: a11(),
        a4_4: a44(),
        a2_0: Expr::add(vec![
            Expr::mul(vec![
                c(-1, 3),
                a10().powi(2),
                a11().powi(-1),
                a44().powi(-1),
            ]),
            Expr::mul(vec![c(1, 240), a11(), a44().powi(-1), q240.clone()]),
        ]),
        a2_1: Expr::add(vec![
            Expr::mul(vec![c(-2, 3), a10(), a44().powi(-1)]),
            Expr::mul(vec![c(1, 12), a11(), a44().powi(-1), fd.p("3")]),
        ]),
        a2_2: Expr::mul(vec![c(-1, 2), a11(), a44().powi(-1)]),
        a3_0: Expr::add(vec![
            Expr::mul(vec![
                c(1, 9),
                a10().powi(3),
                a11().powi(-2),
                a44().powi(-2),
            ]),
            Expr::mul(vec![
                c(-1, 240),
                a10(),
                a44().powi(-2),
                q240.clone(),
            ]),
            Expr::mul(vec![c(1, 720), a11(), a44().powi(-2), t3_inner]),
        ]),
        a3_1: Expr::add(vec![
            Expr::mul(vec![
                c(1, 3),
                a10().powi(2),
                a11().powi(-1),
                a44().powi(-2),
            ]),
            Expr::mul(vec![c(-1, 12), a10(), a44().powi(-2), fd.p("3")]),
            Expr::mul(vec![
                c(1, 240),
                a11(),
                a44().powi(-2),
                Expr::add(vec![
                    Expr::mul(vec![n(36), fd.d("3")]),
                    Expr::mul(vec![n(-84), fd.p("2")]),
                    Expr::mul(vec![n(-19), fd.p("3").powi(2)]),
                ]),
            ]),
        ]),
        a3_2: Expr::add(vec![
            Expr::mul(vec![c(1, 2), a10(), a44().powi(-2)]),
            Expr::mul(vec![c(-1, 4), a11(), a44().powi(-2), fd.p("3")]),
        ]),
        a3_3: Expr::mul(vec![c(1, 2), a11(), a44().powi(-2)]),
        a4_0: Expr::mul(vec![
            c(-1, 60),
            a44(),
            Expr::add(vec![
                Expr::mul(vec![n(12), fd.d("33")]),
                Expr::mul(vec![n(-6), fd.p("23")]),
                Expr::mul(vec![fd.p("3"), fd.p("33")]),
            ]),
        ]),
        a4_1: Expr::mul(vec![c(1, 6), a44(), fd.p("33")]),
    }
}

/// Assemble (theta^0..theta^3, Omega_+) from the contact forms via the
/// alpha table. Used as a cross-check against `lift_coframe`.
pub fn assemble_from_alpha(fd: &FDerivs, chart: Arc<Chart>) -> ([KForm; 5], AlphaTable) {
    let at = alpha_table(fd);
    let ([om0, om1, om2, om3], w_plus) = contact_forms(chart.clone(), &fd.f());
    let theta0 = om0.scale(&at.a0_0);
    let theta1 = om0.scale(&at.a1_0).add(&om1.scale(&at.a1_1));
    let theta2 = om0
        .scale(&at.a2_0)
        .add(&om1.scale(&at.a2_1))
        .add(&om2.scale(&at.a2_2));
    let theta3 = om0
        .scale(&at.a3_0)
        .add(&om1.scale(&at.a3_1))
        .add(&om2.scale(&at.a3_2))
        .add(&om3.scale(&at.a3_3));
    let om_plus = om0
        .scale(&at.a4_0)
        .add(&om1.scale(&at.a4_1))
        .add(&w_plus.scale(&at.a4_4));
    (
        [
            theta0.simplified(),
            theta1.simplified(),
            theta2.simplified(),
            theta3.simplified(),
            om_plus.simplified(),
        ],
        at,
    )
}

/// Cross-check: the alpha-table assembly and the gauge-matrix lift agree.
pub fn check_alpha_consistency(
    fd: &FDerivs,
    lifted: &CoframeSet,
    samples: &[Binding],
    tol: f64,
) -> Result<f64, CoframeError> {
    let chart = lifted.theta[0].chart().clone();
    let (forms, _) = assemble_from_alpha(fd, chart);
    let labels = ["theta0", "theta1", "theta2", "theta3", "Omega+"];
    let lifted_five = [
        &lifted.theta[0],
        &lifted.theta[1],
        &lifted.theta[2],
        &lifted.theta[3],
        &lifted.om_plus,
    ];
    let mut worst = 0.0f64;
    let mut worst_entry = labels[0];
    for (i, f) in forms.iter().enumerate() {
        let resid = f.sub(lifted_five[i]);
        for b in samples {
            if let Ok(v) = resid.max_abs(b) {
                if v > worst {
                    worst = v;
                    worst_entry = labels[i];
                }
            }
        }
    }
    if worst > tol {
        return Err(CoframeError::AlphaMismatch {
            entry: worst_entry,
            residual: worst,
        });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;

//! Curvature coefficients, the Ricci tensor, the invariant polynomials
//! I2, I3, I4 and the Weyl (Maxwell) data of the gl(2,R) connection.
//!
//! Coefficient algebra is generic over a small ring trait so the same
//! assembly code runs with exact rationals (identity tests), doubles
//! (gauge transport) and symbolic expressions (residual suites).

use crate::fderiv::FDerivs;
use crate::forms::KForm;
use crate::gl2coframe::{gauge_matrix, CoframeSet, FiberPoint, Gl2Generators};
use crate::symexpr::{eval, rat, Binding, Expr, Rat};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("transformed Ricci matrix breaks the invariant Ricci pattern at slot {slot}: residual {residual:e}")]
    OffPattern { slot: &'static str, residual: f64 },
    #[error("the two dA computations disagree: {residual:e} > {tol:e}")]
    WeylMismatch { residual: f64, tol: f64 },
    #[error(transparent)]
    Coframe(#[from] crate::gl2coframe::CoframeError),
}

/// Minimal ring interface for coefficient algebra.
pub trait Coeff: Clone {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Multiplication by an exact rational constant.
    fn scale(&self, r: &Rat) -> Self;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat(-1, 1)))
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, r: &Rat) -> Self {
        self * r.to_f64().unwrap()
    }
}

impl Coeff for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, r: &Rat) -> Self {
        self * r
    }
}

impl Coeff for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn add(&self, o: &Self) -> Self {
        Expr::add(vec![self.clone(), o.clone()])
    }
    fn mul(&self, o: &Self) -> Self {
        Expr::mul(vec![self.clone(), o.clone()])
    }
    fn scale(&self, r: &Rat) -> Self {
        Expr::mul(vec![Expr::Rat(r.clone()), self.clone()])
    }
}

/// The eight curvature coefficients (a0, a1, a2) and (b0..b4).
#[derive(Debug, Clone)]
pub struct Coefficients<T> {
    pub a0: T,
    pub a1: T,
    pub a2: T,
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub b4: T,
}

impl<T: Coeff> Coefficients<T> {
    pub fn zero() -> Self {
        Coefficients {
            a0: T::zero(),
            a1: T::zero(),
            a2: T::zero(),
            b0: T::zero(),
            b1: T::zero(),
            b2: T::zero(),
            b3: T::zero(),
            b4: T::zero(),
        }
    }

    pub fn a(&self) -> [&T; 3] {
        [&self.a0, &self.a1, &self.a2]
    }

    pub fn b(&self) -> [&T; 5] {
        [&self.b0, &self.b1, &self.b2, &self.b3, &self.b4]
    }
}

impl Coefficients<Expr> {
    pub fn eval(&self, b: &Binding) -> Result<Coefficients<f64>, crate::symexpr::EvalError> {
        Ok(Coefficients {
            a0: eval(&self.a0, b)?,
            a1: eval(&self.a1, b)?,
            a2: eval(&self.a2, b)?,
            b0: eval(&self.b0, b)?,
            b1: eval(&self.b1, b)?,
            b2: eval(&self.b2, b)?,
            b3: eval(&self.b3, b)?,
            b4: eval(&self.b4, b)?,
        })
    }
}

// ---------------------------------------------------------------------------
// base-section coefficient formulas
// ---------------------------------------------------------------------------

/// The eight coefficients of the base section as symbolic expressions in the
/// derivatives of F.
pub fn base_coefficients(fd: &FDerivs) -> Coefficients<Expr> {
    let n = Expr::num;
    let c = Expr::frac;
    let m = Expr::mul;

    let b4 = m(vec![n(-2), fd.p("333")]);
    let b3 = m(vec![
        c(1, 12),
        Expr::add(vec![
            m(vec![n(-6), fd.d("333")]),
            m(vec![n(-5), fd.p("3"), fd.p("333")]),
        ]),
    ]);
    let b2 = m(vec![
        c(1, 360),
        Expr::add(vec![
            m(vec![n(120), fd.d("233")]),
            m(vec![n(240), fd.p("133")]),
            m(vec![n(-120), fd.p("223")]),
            m(vec![n(60), fd.d("333"), fd.p("3")]),
            m(vec![n(-36), fd.d("3"), fd.p("333")]),
            m(vec![n(204), fd.p("2"), fd.p("333")]),
            m(vec![n(79), fd.p("3").powi(2), fd.p("333")]),
        ]),
    ]);
    let b1 = m(vec![
        c(1, 1080),
        Expr::add(vec![
            m(vec![n(-180), fd.d("223")]),
            m(vec![n(-540), fd.p("123")]),
            m(vec![n(360), fd.p("222")]),
            m(vec![n(-90), fd.d("33"), fd.p("23")]),
            m(vec![n(270), fd.p("23").powi(2)]),
            m(vec![n(90), fd.d("3"), fd.p("233")]),
            m(vec![n(-540), fd.p("2"), fd.p("233")]),
            m(vec![n(-180), fd.d("233"), fd.p("3")]),
            m(vec![n(-270), fd.p("133"), fd.p("3")]),
            m(vec![n(360), fd.p("223"), fd.p("3")]),
            m(vec![n(-45), fd.d("333"), fd.p("3").powi(2)]),
            m(vec![n(-45), fd.p("233"), fd.p("3").powi(2)]),
            m(vec![n(90), fd.d("23"), fd.p("33")]),
            m(vec![n(90), fd.p("13"), fd.p("33")]),
            m(vec![n(-360), fd.p("22"), fd.p("33")]),
            m(vec![n(-90), fd.p("23"), fd.p("3"), fd.p("33")]),
            m(vec![n(90), fd.p("2"), fd.p("33").powi(2)]),
            m(vec![n(18), fd.d("2"), fd.p("333")]),
            m(vec![n(-72), fd.p("1"), fd.p("333")]),
            m(vec![n(54), fd.d("3"), fd.p("3"), fd.p("333")]),
            m(vec![n(-288), fd.p("2"), fd.p("3"), fd.p("333")]),
            m(vec![n(-71), fd.p("3").powi(3), fd.p("333")]),
            m(vec![n(-180), fd.p("33y")]),
        ]),
    ]);
    let b0 = m(vec![
        c(1, 129600),
        Expr::add(vec![
            m(vec![n(-8640), fd.d("233"), fd.d("3")]),
            m(vec![n(-12960), fd.d("23"), fd.d("33")]),
            m(vec![n(-4320), fd.d("2"), fd.d("333")]),
            m(vec![n(43200), fd.d("33y")]),
            m(vec![n(17280), fd.d("333"), fd.p("1")]),
            m(vec![n(129600), fd.p("113")]),
            m(vec![n(-64800), fd.p("122")]),
            m(vec![n(-34560), fd.d("33"), fd.p("13")]),
            m(vec![n(-86400), fd.d("3"), fd.p("133")]),
            m(vec![n(12960), fd.d("233"), fd.p("2")]),
            m(vec![n(194400), fd.p("133"), fd.p("2")]),
            m(vec![n(30240), fd.d("33"), fd.p("22")]),
            m(vec![n(32400), fd.d("3"), fd.p("223")]),
            m(vec![n(-64800), fd.p("2"), fd.p("223")]),
            m(vec![n(6480), fd.d("23"), fd.p("23")]),
            m(vec![n(-25920), fd.p("13"), fd.p("23")]),
            m(vec![n(-15120), fd.p("22"), fd.p("23")]),
            m(vec![n(2160), fd.d("2"), fd.p("233")]),
            m(vec![n(-8640), fd.p("1"), fd.p("233")]),
            m(vec![n(-64800), fd.p("23y")]),
            m(vec![n(-6480), fd.d("33").powi(2), fd.p("3")]),
            m(vec![n(-6480), fd.d("3"), fd.d("333"), fd.p("3")]),
            m(vec![n(-21600), fd.p("123"), fd.p("3")]),
            m(vec![n(10800), fd.d("333"), fd.p("2"), fd.p("3")]),
            m(vec![n(-10800), fd.p("222"), fd.p("3")]),
            m(vec![n(25560), fd.d("33"), fd.p("23"), fd.p("3")]),
            m(vec![n(-18360), fd.p("23").powi(2), fd.p("3")]),
            m(vec![n(13320), fd.d("3"), fd.p("233"), fd.p("3")]),
            m(vec![n(-25920), fd.p("2"), fd.p("233"), fd.p("3")]),
            m(vec![n(3960), fd.d("233"), fd.p("3").powi(2)]),
            m(vec![n(50400), fd.p("133"), fd.p("3").powi(2)]),
            m(vec![n(-28800), fd.p("223"), fd.p("3").powi(2)]),
            m(vec![n(2820), fd.d("333"), fd.p("3").powi(3)]),
            m(vec![n(-10980), fd.p("233"), fd.p("3").powi(3)]),
            m(vec![n(-18000), fd.d("22"), fd.p("33")]),
            m(vec![n(6480), fd.d("3"), fd.d("33"), fd.p("33")]),
            m(vec![n(86400), fd.p("12"), fd.p("33")]),
            m(vec![n(-28080), fd.d("33"), fd.p("2"), fd.p("33")]),
            m(vec![n(-11880), fd.d("3"), fd.p("23"), fd.p("33")]),
            m(vec![n(10800), fd.p("2"), fd.p("23"), fd.p("33")]),
            m(vec![n(-19080), fd.d("23"), fd.p("3"), fd.p("33")]),
            m(vec![n(18720), fd.p("13"), fd.p("3"), fd.p("33")]),
            m(vec![n(16920), fd.p("22"), fd.p("3"), fd.p("33")]),
            m(vec![n(-8100), fd.d("33"), fd.p("3").powi(2), fd.p("33")]),
            m(vec![n(7200), fd.p("23"), fd.p("3").powi(2), fd.p("33")]),
            m(vec![n(7560), fd.d("2"), fd.p("33").powi(2)]),
            m(vec![n(-30240), fd.p("1"), fd.p("33").powi(2)]),
            m(vec![n(-11520), fd.p("2"), fd.p("3"), fd.p("33").powi(2)]),
            m(vec![n(-1620), fd.p("3").powi(3), fd.p("33").powi(2)]),
            m(vec![n(11664), fd.d("3").powi(2), fd.p("333")]),
            m(vec![n(-63072), fd.d("3"), fd.p("2"), fd.p("333")]),
            m(vec![n(76464), fd.p("2").powi(2), fd.p("333")]),
            m(vec![n(-2520), fd.d("2"), fd.p("3"), fd.p("333")]),
            m(vec![n(10080), fd.p("1"), fd.p("3"), fd.p("333")]),
            m(vec![n(-17712), fd.d("3"), fd.p("3").powi(2), fd.p("333")]),
            m(vec![n(42768), fd.p("2"), fd.p("3").powi(2), fd.p("333")]),
            m(vec![n(5299), fd.p("3").powi(4), fd.p("333")]),
            m(vec![n(-18000), fd.p("3"), fd.p("33y")]),
            m(vec![n(-75600), fd.p("33"), fd.p("3y")]),
            m(vec![n(43200), fd.p("333"), fd.p("y")]),
        ]),
    ]);
    let a2 = m(vec![
        c(1, 45),
        Expr::add(vec![
            m(vec![n(-18), fd.d("333")]),
            m(vec![n(-24), fd.p("233")]),
            m(vec![n(-4), fd.p("33").powi(2)]),
            m(vec![n(-27), fd.p("3"), fd.p("333")]),
        ]),
    ]);
    let a1 = m(vec![
        c(1, 540),
        Expr::add(vec![
            m(vec![n(-72), fd.d("233")]),
            m(vec![n(-432), fd.p("133")]),
            m(vec![n(216), fd.p("223")]),
            m(vec![n(-36), fd.d("333"), fd.p("3")]),
            m(vec![n(96), fd.p("233"), fd.p("3")]),
            m(vec![n(48), fd.d("33"), fd.p("33")]),
            m(vec![n(16), fd.p("3"), fd.p("33").powi(2)]),
            m(vec![n(108), fd.d("3"), fd.p("333")]),
            m(vec![n(-324), fd.p("2"), fd.p("333")]),
            m(vec![n(-81), fd.p("3").powi(2), fd.p("333")]),
        ]),
    ]);
    let a0 = m(vec![
        c(1, 4050),
        Expr::add(vec![
            m(vec![n(-180), fd.d("223")]),
            m(vec![n(288), fd.d("33").powi(2)]),
            m(vec![n(-4860), fd.p("123")]),
            m(vec![n(2520), fd.p("222")]),
            m(vec![n(-378), fd.d("33"), fd.p("23")]),
            m(vec![n(1782), fd.p("23").powi(2)]),
            m(vec![n(810), fd.d("3"), fd.p("233")]),
            m(vec![n(-2700), fd.p("2"), fd.p("233")]),
            m(vec![n(-180), fd.d("233"), fd.p("3")]),
            m(vec![n(-2430), fd.p("133"), fd.p("3")]),
            m(vec![n(2880), fd.p("223"), fd.p("3")]),
            m(vec![n(-45), fd.d("333"), fd.p("3").powi(2)]),
            m(vec![n(435), fd.p("233"), fd.p("3").powi(2)]),
            m(vec![n(810), fd.d("23"), fd.p("33")]),
            m(vec![n(810), fd.p("13"), fd.p("33")]),
            m(vec![n(-2520), fd.p("22"), fd.p("33")]),
            m(vec![n(408), fd.d("33"), fd.p("3"), fd.p("33")]),
            m(vec![n(-594), fd.p("23"), fd.p("3"), fd.p("33")]),
            m(vec![n(810), fd.p("2"), fd.p("33").powi(2)]),
            m(vec![n(122), fd.p("3").powi(2), fd.p("33").powi(2)]),
            m(vec![n(-270), fd.d("2"), fd.p("333")]),
            m(vec![n(1080), fd.p("1"), fd.p("333")]),
            m(vec![n(270), fd.d("3"), fd.p("3"), fd.p("333")]),
            m(vec![n(-1080), fd.p("2"), fd.p("3"), fd.p("333")]),
            m(vec![n(-135), fd.p("3").powi(3), fd.p("333")]),
            m(vec![n(2700), fd.p("33y")]),
        ]),
    ]);

    Coefficients {
        a0: crate::symexpr::simplify(&a0),
        a1: crate::symexpr::simplify(&a1),
        a2: crate::symexpr::simplify(&a2),
        b0: crate::symexpr::simplify(&b0),
        b1: crate::symexpr::simplify(&b1),
        b2: crate::symexpr::simplify(&b2),
        b3: crate::symexpr::simplify(&b3),
        b4: crate::symexpr::simplify(&b4),
    }
}

// ---------------------------------------------------------------------------
// curvature 2-form blocks and tensor assembly
// ---------------------------------------------------------------------------

/// Ordered index pairs (j, l) with j < l for the theta^j ^ theta^l cobasis
/// of curvature 2-forms.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The theta^j ^ theta^l coefficients of the four curvature 2-forms
/// (components of the curvature in the generator basis), in PAIRS order.
pub struct CurvatureBlocks<T> {
    pub k_plus: [T; 6],
    pub k_minus: [T; 6],
    pub k_zero: [T; 6],
    pub k_e: [T; 6],
}

pub fn curvature_blocks<T: Coeff>(c: &Coefficients<T>) -> CurvatureBlocks<T> {
    let s = |t: &T, n: i64, d: i64| t.scale(&rat(n, d));
    let comb = |x: &T, nx: i64, y: &T, ny: i64, d: i64| {
        x.scale(&rat(nx, d)).add(&y.scale(&rat(ny, d)))
    };
    CurvatureBlocks {
        // dOmega_+ line of the structure equations
        k_plus: [
            comb(&c.a0, -3, &c.b1, 4, 12),
            comb(&c.a1, 1, &c.b2, 2, 4),
            comb(&c.a2, 3, &c.b3, 4, 24),
            comb(&c.a2, -5, &c.b3, 4, 8),
            s(&c.b4, 1, 6),
            T::zero(),
        ],
        // dOmega_- line
        k_minus: [
            T::zero(),
            s(&c.b0, 1, 6),
            comb(&c.a0, -3, &c.b1, 4, 24),
            comb(&c.a0, 5, &c.b1, 4, 8),
            comb(&c.a1, -1, &c.b2, 2, 4),
            comb(&c.a2, 3, &c.b3, 4, 12),
        ],
        // dOmega_0 line
        k_zero: [
            s(&c.b0, -1, 6),
            comb(&c.a0, -3, &c.b1, -4, 24),
            s(&c.a1, 1, 4),
            s(&c.a1, -1, 4),
            comb(&c.a2, -3, &c.b3, 4, 24),
            s(&c.b4, 1, 6),
        ],
        // dOmega line
        k_e: [
            s(&c.b0, -1, 6),
            s(&c.b1, -1, 3),
            s(&c.b2, -1, 6),
            s(&c.b2, -1, 2),
            s(&c.b3, -1, 3),
            s(&c.b4, -1, 6),
        ],
    }
}

/// Full curvature tensor R^i_{kjl}, antisymmetric in (j, l).
pub struct CurvatureTensor<T> {
    /// indexed r[i][k][j][l]
    pub r: Vec<Vec<Vec<Vec<T>>>>,
}

pub fn assemble_curvature<T: Coeff>(c: &Coefficients<T>) -> CurvatureTensor<T> {
    let blocks = curvature_blocks(c);
    let g = Gl2Generators::default();
    let mut r = vec![vec![vec![vec![T::zero(); 4]; 4]; 4]; 4];
    for (p, &(j, l)) in PAIRS.iter().enumerate() {
        for i in 0..4 {
            for k in 0..4 {
                // M_{jl} = K_- E_- + K_+ E_+ + K_0 E_0 + K E
                let mut v = T::zero();
                for (coefs, gen) in [
                    (&blocks.k_minus, &g.e_minus),
                    (&blocks.k_plus, &g.e_plus),
                    (&blocks.k_zero, &g.e_zero),
                    (&blocks.k_e, &g.e),
                ] {
                    if gen[i][k].is_zero() {
                        continue;
                    }
                    v = v.add(&coefs[p].scale(&gen[i][k]));
                }
                r[i][k][j][l] = v.clone();
                r[i][k][l][j] = T::zero().sub(&v);
            }
        }
    }
    CurvatureTensor { r }
}

impl<T: Coeff> CurvatureTensor<T> {
    /// Ricci contraction R_jl = R^i_{jil}.
    pub fn ricci(&self) -> [[T; 4]; 4] {
        std::array::from_fn(|j| {
            std::array::from_fn(|l| {
                let mut acc = T::zero();
                for i in 0..4 {
                    acc = acc.add(&self.r[i][j][i][l]);
                }
                acc
            })
        })
    }

    /// Contraction over the first two indices, R^i_{ikl}.
    pub fn first_trace(&self) -> [[T; 4]; 4] {
        std::array::from_fn(|k| {
            std::array::from_fn(|l| {
                let mut acc = T::zero();
                for i in 0..4 {
                    acc = acc.add(&self.r[i][i][k][l]);
                }
                acc
            })
        })
    }
}

// ---------------------------------------------------------------------------
// Ricci tensor
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RicciTensor<T> {
    pub r: [[T; 4]; 4],
}

/// The closed-form Ricci matrix of the connection.
pub fn ricci<T: Coeff>(c: &Coefficients<T>) -> RicciTensor<T> {
    let z = T::zero;
    let n = |t: &T| z().sub(t);
    let two = |t: &T| t.scale(&rat(2, 1));
    let r = [
        [
            z(),
            c.b0.clone(),
            c.a0.add(&two(&c.b1)),
            n(&c.a1).add(&c.b2),
        ],
        [
            n(&c.b0),
            c.a0.scale(&rat(-2, 1)),
            c.a1.add(&c.b2.scale(&rat(3, 1))),
            c.a2.add(&two(&c.b3)),
        ],
        [
            c.a0.sub(&two(&c.b1)),
            c.a1.sub(&c.b2.scale(&rat(3, 1))),
            c.a2.scale(&rat(-2, 1)),
            c.b4.clone(),
        ],
        [
            n(&c.a1).sub(&c.b2),
            c.a2.sub(&two(&c.b3)),
            n(&c.b4),
            z(),
        ],
    ];
    RicciTensor { r }
}

impl<T: Coeff> RicciTensor<T> {
    pub fn symmetric_part(&self) -> [[T; 4]; 4] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| self.r[i][j].add(&self.r[j][i]).scale(&rat(1, 2)))
        })
    }

    pub fn antisymmetric_part(&self) -> [[T; 4]; 4] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| self.r[i][j].sub(&self.r[j][i]).scale(&rat(1, 2)))
        })
    }
}

// ---------------------------------------------------------------------------
// invariants
// ---------------------------------------------------------------------------

/// I2 = a1^2 - a0 a2 and I3 = 3 b2^2 - 4 b1 b3 + b0 b4.
pub fn invariants<T: Coeff>(c: &Coefficients<T>) -> (T, T) {
    let i2 = c.a1.mul(&c.a1).sub(&c.a0.mul(&c.a2));
    let i3 = c
        .b2
        .mul(&c.b2)
        .scale(&rat(3, 1))
        .sub(&c.b1.mul(&c.b3).scale(&rat(4, 1)))
        .add(&c.b0.mul(&c.b4));
    (i2, i3)
}

/// The invariant quartic evaluated on a cotangent vector with components
/// (theta^0, theta^1, theta^2, theta^3).
pub fn quartic_i4(t: [f64; 4]) -> f64 {
    let [t0, t1, t2, t3] = t;
    -3.0 * t1 * t1 * t2 * t2 + 4.0 * t0 * t2 * t2 * t2 + 4.0 * t1 * t1 * t1 * t3
        - 6.0 * t0 * t1 * t2 * t3
        + t0 * t0 * t3 * t3
}

// ---------------------------------------------------------------------------
// gauge transport of the coefficients
// ---------------------------------------------------------------------------

/// Transport the base coefficients to a fiber point by conjugating the
/// Ricci matrix and reading the eight coefficients back off the
/// invariant Ricci pattern. The redundant slots of the overdetermined pattern
/// are asserted consistent.
pub fn transformed_coefficients(
    base: &Coefficients<f64>,
    p: &FiberPoint,
) -> Result<Coefficients<f64>, CurvatureError> {
    let g = gauge_matrix(p)?;
    let r0 = ricci(base).r;
    let mut r = [[0.0f64; 4]; 4];
    for (i, ri) in r.iter_mut().enumerate() {
        for (j, rij) in ri.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, r0k) in r0.iter().enumerate() {
                for (l, v) in r0k.iter().enumerate() {
                    acc += v * g.inv[k][i] * g.inv[l][j];
                }
            }
            *rij = acc;
        }
    }
    extract_coefficients(&RicciTensor { r })
}

/// Read the eight coefficients off a Ricci matrix that is expected to
/// match the invariant Ricci pattern.
pub fn extract_coefficients(
    t: &RicciTensor<f64>,
) -> Result<Coefficients<f64>, CurvatureError> {
    let sym = t.symmetric_part();
    let asym = t.antisymmetric_part();
    let scale = t
        .r
        .iter()
        .flatten()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;

    let c = Coefficients {
        a0: -sym[1][1] / 2.0,
        a1: sym[1][2],
        a2: -sym[2][2] / 2.0,
        b0: asym[0][1],
        b1: asym[0][2] / 2.0,
        b2: asym[0][3],
        b3: asym[1][3] / 2.0,
        b4: asym[2][3],
    };

    // redundant slots
    let checks: [(&'static str, f64); 6] = [
        ("R_(00)", sym[0][0]),
        ("R_(33)", sym[3][3]),
        ("R_(01)", sym[0][1]),
        ("R_(23)", sym[2][3]),
        ("R_(02)-a0", sym[0][2] - c.a0),
        ("R_(13)-a2", sym[1][3] - c.a2),
    ];
    for (slot, v) in checks {
        if v.abs() > tol {
            return Err(CurvatureError::OffPattern {
                slot,
                residual: v.abs(),
            });
        }
    }
    let asym_checks: [(&'static str, f64); 2] = [
        ("R_[12]-3b2", asym[1][2] - 3.0 * c.b2),
        ("R_(03)+a1", sym[0][3] + c.a1),
    ];
    for (slot, v) in asym_checks {
        if v.abs() > tol {
            return Err(CurvatureError::OffPattern {
                slot,
                residual: v.abs(),
            });
        }
    }
    Ok(c)
}

/// The printed transformation list; secondary path kept for cross-checks.
/// Its b1 line is transcribed exactly as printed, including the
/// "(3 a11)^4" denominator that the conjugation path contradicts
/// (see DEVIATIONS.md).
pub fn transformed_coefficients_printed(
    base: &Coefficients<f64>,
    p: &FiberPoint,
) -> Coefficients<f64> {
    let (a10, a11, a44) = (p.a10, p.a11, p.a44);
    Coefficients {
        b4: a44.powi(3) / a11.powi(2) * base.b4,
        b3: a44.powi(2) / a11.powi(2) * base.b3
            + a10 * a44.powi(2) / (3.0 * a11.powi(3)) * base.b4,
        b2: a44 / a11.powi(2) * base.b2
            + 2.0 * a10 * a44 / (3.0 * a11.powi(3)) * base.b3
            + a10.powi(2) * a44 / (9.0 * a11.powi(4)) * base.b4,
        b1: base.b1 / a11.powi(2)
            + a10 / a11.powi(3) * base.b2
            + a10.powi(2) / (3.0 * a11).powi(4) * base.b3
            + a10.powi(3) / (27.0 * a11.powi(5)) * base.b4,
        b0: base.b0 / (a11.powi(2) * a44)
            + 4.0 * a10 / (3.0 * a11.powi(3) * a44) * base.b1
            + 2.0 * a10.powi(2) / (3.0 * a11.powi(4) * a44) * base.b2
            + 4.0 * a10.powi(3) / (27.0 * a11.powi(5) * a44) * base.b3
            + a10.powi(4) / (81.0 * a11.powi(6) * a44) * base.b4,
        a2: a44.powi(2) / a11.powi(2) * base.a2,
        a1: a44 / a11.powi(2) * base.a1 - a10 * a44 / (3.0 * a11.powi(3)) * base.a2,
        a0: base.a0 / a11.powi(2) - 2.0 * a10 / (3.0 * a11.powi(3)) * base.a1
            + a10.powi(2) / (9.0 * a11.powi(4)) * base.a2,
    }
}

/// Compare the conjugation path against the printed list; returns the
/// labels and (conjugated, printed) values of entries that disagree.
pub fn compare_transform_paths(
    base: &Coefficients<f64>,
    p: &FiberPoint,
    tol: f64,
) -> Result<Vec<(&'static str, f64, f64)>, CurvatureError> {
    let auth = transformed_coefficients(base, p)?;
    let printed = transformed_coefficients_printed(base, p);
    let pairs = [
        ("a0", auth.a0, printed.a0),
        ("a1", auth.a1, printed.a1),
        ("a2", auth.a2, printed.a2),
        ("b0", auth.b0, printed.b0),
        ("b1", auth.b1, printed.b1),
        ("b2", auth.b2, printed.b2),
        ("b3", auth.b3, printed.b3),
        ("b4", auth.b4, printed.b4),
    ];
    Ok(pairs
        .into_iter()
        .filter(|(_, a, b)| {
            let s = 1.0f64.max(a.abs()).max(b.abs());
            (a - b).abs() > tol * s
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Weyl data
// ---------------------------------------------------------------------------

pub struct WeylData {
    /// A = -12 Omega.
    pub a_form: KForm,
    /// dA, from the exterior derivative.
    pub da: KForm,
    /// worst disagreement between dA and the structure-equation right side
    pub consistency: f64,
    pub maxwell_flat: bool,
    pub max_b: f64,
}

/// Weyl (Maxwell) data of the base-section coframe.
pub fn weyl_data(
    coframe: &CoframeSet,
    c: &Coefficients<Expr>,
    samples: &[Binding],
    tol: f64,
) -> Result<WeylData, CurvatureError> {
    let a_form = coframe.om.scale(&Expr::num(-12));
    let da = a_form.d().simplified();

    // dOmega = -(1/6) b0 t0^t1 - (1/3) b1 t0^t2 - (1/6) b2 t0^t3
    //          -(1/2) b2 t1^t2 - (1/3) b3 t1^t3 - (1/6) b4 t2^t3
    let th = &coframe.theta;
    let term = |b: &Expr, n: i64, d: i64, j: usize, l: usize| {
        th[j]
            .wedge(&th[l])
            .scale(&Expr::mul(vec![Expr::frac(n, d), b.clone()]))
    };
    let d_om_rhs = term(&c.b0, -1, 6, 0, 1)
        .add(&term(&c.b1, -1, 3, 0, 2))
        .add(&term(&c.b2, -1, 6, 0, 3))
        .add(&term(&c.b2, -1, 2, 1, 2))
        .add(&term(&c.b3, -1, 3, 1, 3))
        .add(&term(&c.b4, -1, 6, 2, 3));
    let da_alt = d_om_rhs.scale(&Expr::num(-12));

    let resid = da.sub(&da_alt);
    let mut consistency = 0.0f64;
    let mut max_b = 0.0f64;
    let mut evaluated = 0usize;
    for b in samples {
        if let Ok(v) = resid.max_abs(b) {
            consistency = consistency.max(v);
            evaluated += 1;
        }
        if let Ok(cv) = c.eval(b) {
            for v in cv.b() {
                max_b = max_b.max(v.abs());
            }
        }
    }
    if evaluated > 0 && consistency > 1e-8 {
        return Err(CurvatureError::WeylMismatch {
            residual: consistency,
            tol: 1e-8,
        });
    }
    Ok(WeylData {
        a_form,
        da,
        consistency,
        maxwell_flat: max_b < tol,
        max_b,
    })
}

#[cfg(test)]
mod tests;

//! Symbolic expression engine.
//!
//! Expressions live over the jet coordinates `x, y, y1, y2, y3`, the fiber
//! coordinates `a10, a11, a44`, and any auxiliary symbols a caller
//! introduces. Rational constants are kept exact; floats appear only at
//! evaluation time. Opaque unary function nodes carry a derivative-order
//! tag so numerically tabulated functions (the `q` of the inhomogeneous
//! ansatz) can flow through the chain rule without a closed form.

mod parse;
mod print;
mod simplify;

pub use parse::{parse, ParseError};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Interned-ish symbol name. Cheap to clone, ordered by name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(name: &str) -> Self {
        Sym(Arc::from(name))
    }
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque unary function application, e.g. `q''(z)`.
#[derive(Clone, Debug)]
pub struct FunApp {
    pub name: String,
    /// Number of derivatives applied to the base function.
    pub order: u32,
    pub arg: Box<Expr>,
}

#[derive(Clone, Debug)]
pub enum Expr {
    /// Exact rational constant.
    Rat(Rat),
    /// Real constant (used rarely; exact rationals are preferred).
    Const(f64),
    Sym(Sym),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    /// Power with exact rational exponent.
    Pow(Box<Expr>, Rat),
    Div(Box<Expr>, Box<Expr>),
    Fun(FunApp),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("missing value for symbol `{0}`")]
    MissingSymbol(Sym),
    #[error("missing evaluator for function `{0}`")]
    MissingFunction(String),
    #[error("domain error ({what}) in subexpression `{subexpr}`")]
    Domain { what: String, subexpr: String },
    #[error("function `{name}` failed: {message}")]
    Function { name: String, message: String },
}

pub type FunEval = Arc<dyn Fn(u32, f64) -> Result<f64, String> + Send + Sync>;

/// Point at which expressions are evaluated: symbol values plus evaluators
/// for opaque function nodes.
#[derive(Clone, Default)]
pub struct Binding {
    vals: BTreeMap<Sym, f64>,
    funcs: BTreeMap<String, FunEval>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, s: Sym, v: f64) -> &mut Self {
        self.vals.insert(s, v);
        self
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.vals.insert(Sym::new(name), v);
        self
    }

    pub fn set_fun(&mut self, name: &str, f: FunEval) -> &mut Self {
        self.funcs.insert(name.to_string(), f);
        self
    }

    pub fn get(&self, s: &Sym) -> Option<f64> {
        self.vals.get(s).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Sym, f64)> {
        self.vals.iter().map(|(s, v)| (s, *v))
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        let mut b = Binding::new();
        for (n, v) in pairs {
            b.set(Sym::new(n), *v);
        }
        b
    }
}

impl std::fmt::Debug for Binding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Binding")
            .field("vals", &self.vals)
            .field("funcs", &self.funcs.keys().collect::<Vec<_>>())
            .finish()
    }
}

// ---------------------------------------------------------------------------
// construction helpers
// ---------------------------------------------------------------------------

impl Expr {
    pub fn zero() -> Expr {
        Expr::Rat(Rat::zero())
    }

    pub fn one() -> Expr {
        Expr::Rat(Rat::one())
    }

    pub fn num(n: i64) -> Expr {
        Expr::Rat(int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::Rat(rat(n, d))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Sym::new(name))
    }

    pub fn fun(name: &str, order: u32, arg: Expr) -> Expr {
        Expr::Fun(FunApp {
            name: name.to_string(),
            order,
            arg: Box::new(arg),
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Rat(r) if r.is_one())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        let mut c = Rat::zero();
        for t in terms {
            match t {
                Expr::Rat(r) => c += r,
                Expr::Sum(v) => {
                    for u in v {
                        match u {
                            Expr::Rat(r) => c += r,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if !c.is_zero() || out.is_empty() {
            out.push(Expr::Rat(c));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Sum(out)
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        let mut c = Rat::one();
        for t in factors {
            match t {
                Expr::Rat(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    c *= r;
                }
                Expr::Prod(v) => {
                    for u in v {
                        match u {
                            Expr::Rat(r) => {
                                if r.is_zero() {
                                    return Expr::zero();
                                }
                                c *= r;
                            }
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if out.is_empty() {
            return Expr::Rat(c);
        }
        if !c.is_one() {
            out.insert(0, Expr::Rat(c));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Prod(out)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::num(-1), self])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs.neg()])
    }

    pub fn pow(self, exp: Rat) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return self;
        }
        match self {
            Expr::Rat(r) if exp.is_integer() => {
                Expr::Rat(rat_int_pow(&r, exp.to_integer().to_i64().unwrap()))
            }
            Expr::Pow(b, e) => Expr::Pow(b, e * exp),
            other => Expr::Pow(Box::new(other), exp),
        }
    }

    pub fn powi(self, n: i64) -> Expr {
        self.pow(int(n))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Expr) -> Expr {
        if rhs.is_one() {
            return self;
        }
        if let (Expr::Rat(a), Expr::Rat(b)) = (&self, &rhs) {
            if !b.is_zero() {
                return Expr::Rat(a / b);
            }
        }
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

pub(crate) fn rat_int_pow(r: &Rat, n: i64) -> Rat {
    if n >= 0 {
        num_traits::pow::pow(r.clone(), n as usize)
    } else {
        num_traits::pow::pow(r.clone(), (-n) as usize).recip()
    }
}

// ---------------------------------------------------------------------------
// structural order / equality
// ---------------------------------------------------------------------------

fn kind_rank(e: &Expr) -> u8 {
    match e {
        Expr::Rat(_) => 0,
        Expr::Const(_) => 1,
        Expr::Sym(_) => 2,
        Expr::Fun(_) => 3,
        Expr::Pow(_, _) => 4,
        Expr::Prod(_) => 5,
        Expr::Sum(_) => 6,
        Expr::Div(_, _) => 7,
    }
}

impl Expr {
    /// Total structural order; used for canonical forms and decidable
    /// structural equality.
    pub fn cmp_structural(&self, other: &Expr) -> Ordering {
        let k = kind_rank(self).cmp(&kind_rank(other));
        if k != Ordering::Equal {
            return k;
        }
        match (self, other) {
            (Expr::Rat(a), Expr::Rat(b)) => a.cmp(b),
            (Expr::Const(a), Expr::Const(b)) => a.total_cmp(b),
            (Expr::Sym(a), Expr::Sym(b)) => a.cmp(b),
            (Expr::Fun(a), Expr::Fun(b)) => a
                .name
                .cmp(&b.name)
                .then(a.order.cmp(&b.order))
                .then_with(|| a.arg.cmp_structural(&b.arg)),
            (Expr::Pow(ab, ae), Expr::Pow(bb, be)) => {
                ab.cmp_structural(bb).then_with(|| ae.cmp(be))
            }
            (Expr::Prod(a), Expr::Prod(b)) | (Expr::Sum(a), Expr::Sum(b)) => {
                let n = a.len().cmp(&b.len());
                if n != Ordering::Equal {
                    return n;
                }
                for (x, y) in a.iter().zip(b) {
                    let c = x.cmp_structural(y);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                Ordering::Equal
            }
            (Expr::Div(an, ad), Expr::Div(bn, bd)) => an
                .cmp_structural(bn)
                .then_with(|| ad.cmp_structural(bd)),
            _ => unreachable!(),
        }
    }

    pub fn structurally_eq(&self, other: &Expr) -> bool {
        self.cmp_structural(other) == Ordering::Equal
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.structurally_eq(other)
    }
}
impl Eq for Expr {}
impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_structural(other)
    }
}

// ---------------------------------------------------------------------------
// differentiation
// ---------------------------------------------------------------------------

/// Exact symbolic partial derivative with respect to `v`.
pub fn partial(e: &Expr, v: &Sym) -> Expr {
    match e {
        Expr::Rat(_) | Expr::Const(_) => Expr::zero(),
        Expr::Sym(s) => {
            if s == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(ts) => Expr::add(ts.iter().map(|t| partial(t, v)).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = partial(f, v);
                if df.is_zero() {
                    continue;
                }
                let mut fac: Vec<Expr> = fs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                fac.push(df);
                terms.push(Expr::mul(fac));
            }
            Expr::add(terms)
        }
        Expr::Pow(b, r) => {
            let db = partial(b, v);
            if db.is_zero() {
                return Expr::zero();
            }
            Expr::mul(vec![
                Expr::Rat(r.clone()),
                b.as_ref().clone().pow(r.clone() - Rat::one()),
                db,
            ])
        }
        Expr::Div(n, d) => {
            let dn = partial(n, v);
            let dd = partial(d, v);
            if dd.is_zero() {
                return dn.div(d.as_ref().clone());
            }
            let num = Expr::mul(vec![dn, d.as_ref().clone()])
                .sub(Expr::mul(vec![n.as_ref().clone(), dd]));
            num.div(d.as_ref().clone().powi(2))
        }
        Expr::Fun(f) => {
            let darg = partial(&f.arg, v);
            if darg.is_zero() {
                return Expr::zero();
            }
            Expr::mul(vec![
                Expr::fun(&f.name, f.order + 1, f.arg.as_ref().clone()),
                darg,
            ])
        }
    }
}

/// Derivative along a vector field given as `(coordinate, component)` pairs.
pub fn directional(e: &Expr, field: &[(Sym, Expr)]) -> Expr {
    Expr::add(
        field
            .iter()
            .map(|(s, c)| Expr::mul(vec![c.clone(), partial(e, s)]))
            .collect(),
    )
}

/// Total-derivative operator of the ODE `y'''' = F`:
/// `D = d/dx + y1 d/dy + y2 d/dy1 + y3 d/dy2 + F d/dy3`.
pub fn total_derivative(e: &Expr, f_rhs: &Expr) -> Expr {
    directional(
        e,
        &[
            (Sym::new("x"), Expr::one()),
            (Sym::new("y"), Expr::sym("y1")),
            (Sym::new("y1"), Expr::sym("y2")),
            (Sym::new("y2"), Expr::sym("y3")),
            (Sym::new("y3"), f_rhs.clone()),
        ],
    )
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

/// Exact rational value of a constant subtree, when one exists.
fn eval_rat(e: &Expr) -> Option<Rat> {
    match e {
        Expr::Rat(r) => Some(r.clone()),
        Expr::Sum(ts) => {
            let mut acc = Rat::zero();
            for t in ts {
                acc += eval_rat(t)?;
            }
            Some(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = Rat::one();
            for f in fs {
                acc *= eval_rat(f)?;
            }
            Some(acc)
        }
        Expr::Pow(b, r) if r.is_integer() => {
            let bv = eval_rat(b)?;
            let n = r.to_integer().to_i64()?;
            if bv.is_zero() && n < 0 {
                return None;
            }
            Some(rat_int_pow(&bv, n))
        }
        Expr::Div(n, d) => {
            let dv = eval_rat(d)?;
            if dv.is_zero() {
                return None;
            }
            Some(eval_rat(n)? / dv)
        }
        _ => None,
    }
}

/// Evaluate to an IEEE double. Exact-rational subtrees are folded exactly
/// before rounding.
pub fn eval(e: &Expr, b: &Binding) -> Result<f64, EvalError> {
    if let Some(r) = eval_rat(e) {
        return Ok(r.to_f64().unwrap_or(f64::NAN));
    }
    match e {
        Expr::Rat(r) => Ok(r.to_f64().unwrap_or(f64::NAN)),
        Expr::Const(c) => Ok(*c),
        Expr::Sym(s) => b.get(s).ok_or_else(|| EvalError::MissingSymbol(s.clone())),
        Expr::Sum(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval(t, b)?;
            }
            Ok(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval(f, b)?;
            }
            Ok(acc)
        }
        Expr::Pow(base, r) => {
            let bv = eval(base, b)?;
            if r.is_integer() {
                let n = r.to_integer().to_i64().unwrap();
                if bv == 0.0 && n < 0 {
                    return Err(EvalError::Domain {
                        what: "zero base with negative exponent".into(),
                        subexpr: e.to_string(),
                    });
                }
                Ok(bv.powi(n as i32))
            } else {
                let rv = r.to_f64().unwrap();
                if bv < 0.0 {
                    return Err(EvalError::Domain {
                        what: "fractional power of a negative base".into(),
                        subexpr: e.to_string(),
                    });
                }
                if bv == 0.0 && rv < 0.0 {
                    return Err(EvalError::Domain {
                        what: "zero base with negative exponent".into(),
                        subexpr: e.to_string(),
                    });
                }
                Ok(bv.powf(rv))
            }
        }
        Expr::Div(n, d) => {
            let dv = eval(d, b)?;
            if dv == 0.0 {
                return Err(EvalError::Domain {
                    what: "division by zero".into(),
                    subexpr: e.to_string(),
                });
            }
            Ok(eval(n, b)? / dv)
        }
        Expr::Fun(f) => {
            let av = eval(&f.arg, b)?;
            let fun = b
                .funcs
                .get(&f.name)
                .ok_or_else(|| EvalError::MissingFunction(f.name.clone()))?;
            fun(f.order, av).map_err(|message| EvalError::Function {
                name: f.name.clone(),
                message,
            })
        }
    }
}

pub use simplify::simplify;

/// Probabilistic zero test: simplify first, then fall back to randomized
/// evaluation at `points` bindings with tolerance `tol`. Bindings that hit
/// domain errors are skipped.
pub fn is_probably_zero(e: &Expr, points: &[Binding], tol: f64) -> bool {
    let s = simplify(e);
    if s.is_zero() {
        return true;
    }
    let mut tested = 0usize;
    for b in points {
        match eval(&s, b) {
            Ok(v) => {
                tested += 1;
                if v.abs() > tol {
                    return false;
                }
            }
            Err(_) => continue,
        }
    }
    tested > 0
}

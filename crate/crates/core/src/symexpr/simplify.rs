//! Expand-and-collect simplification.
//!
//! Expressions are normalized into a sum of monomials: each monomial is an
//! exact rational coefficient times a product of atomic bases raised to
//! rational exponents. Like monomials merge, identical factors cancel, and
//! exponents of a shared base add. The result `0` certifies symbolic
//! vanishing; anything else is best-effort and value-preserving.

use super::{rat_int_pow, Expr, FunApp, Rat};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Atomic base of a monomial factor: anything that is not a rational
/// constant, sum, or product.
type FactorMap = BTreeMap<Expr, Rat>;

#[derive(Clone, Debug, Default)]
struct Poly {
    /// monomial factors -> rational coefficient
    terms: BTreeMap<FactorMap, Rat>,
}

impl Poly {
    fn constant(c: Rat) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(FactorMap::new(), c);
        }
        p
    }

    fn monomial(coeff: Rat, factors: FactorMap) -> Poly {
        let mut p = Poly::default();
        if !coeff.is_zero() {
            p.terms.insert(factors, coeff);
        }
        p
    }

    fn atom(e: Expr) -> Poly {
        let mut fm = FactorMap::new();
        fm.insert(e, Rat::one());
        Poly::monomial(Rat::one(), fm)
    }

    fn add_assign(&mut self, other: Poly) {
        for (fm, c) in other.terms {
            let entry = self.terms.entry(fm).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                // remove below; BTreeMap entry API lacks remove-on-zero
            }
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &other.terms {
                let mut fm = fa.clone();
                for (base, exp) in fb {
                    let e = fm.entry(base.clone()).or_insert_with(Rat::zero);
                    *e += exp.clone();
                    if e.is_zero() {
                        fm.remove(base);
                    }
                }
                let c = ca * cb;
                let entry = out.terms.entry(fm).or_insert_with(Rat::zero);
                *entry += c;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Raise to a rational power. Only single-monomial polys distribute the
    /// exponent; everything else becomes an opaque atom.
    fn pow(self, r: &Rat) -> Poly {
        if r.is_zero() {
            return Poly::constant(Rat::one());
        }
        if r.is_one() {
            return self;
        }
        if self.terms.is_empty() {
            return Poly::default(); // 0^r with r > 0
        }
        if self.terms.len() == 1 {
            let (fm, c) = self.terms.into_iter().next().unwrap();
            let mut out_fm = FactorMap::new();
            for (base, exp) in fm {
                out_fm.insert(base, exp * r);
            }
            let coeff = if c.is_one() {
                Rat::one()
            } else if r.is_integer() {
                rat_int_pow(&c, r.to_integer().to_i64().unwrap())
            } else {
                // keep |c|^r as an atom when the exponent is fractional;
                // a negative c would be a domain issue surfaced at eval
                let atom = Expr::Pow(Box::new(Expr::Rat(c)), r.clone());
                out_fm.insert(atom, Rat::one());
                Rat::one()
            };
            return Poly::monomial(coeff, out_fm);
        }
        // multi-term base
        if r.is_integer() {
            let n = r.to_integer().to_i64().unwrap();
            if (1..=8).contains(&n) {
                let mut acc = self.clone();
                for _ in 1..n {
                    acc = acc.mul(&self);
                }
                return acc;
            }
        }
        Poly::atom(Expr::Pow(Box::new(rebuild(&self)), r.clone()))
    }

    fn recip(self) -> Poly {
        self.pow(&-Rat::one())
    }
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Rat(r) => Poly::constant(r.clone()),
        Expr::Const(c) => {
            if *c == 0.0 {
                Poly::default()
            } else {
                Poly::atom(Expr::Const(*c))
            }
        }
        Expr::Sym(_) => Poly::atom(e.clone()),
        Expr::Sum(ts) => {
            let mut acc = Poly::default();
            for t in ts {
                acc.add_assign(to_poly(t));
            }
            acc
        }
        Expr::Prod(fs) => {
            let mut acc = Poly::constant(Rat::one());
            for f in fs {
                acc = acc.mul(&to_poly(f));
            }
            acc
        }
        Expr::Pow(b, r) => to_poly(b).pow(r),
        Expr::Div(n, d) => to_poly(n).mul(&to_poly(d).recip()),
        Expr::Fun(f) => Poly::atom(Expr::Fun(FunApp {
            name: f.name.clone(),
            order: f.order,
            arg: Box::new(simplify(&f.arg)),
        })),
    }
}

fn rebuild(p: &Poly) -> Expr {
    let mut terms = Vec::new();
    for (fm, c) in &p.terms {
        let mut factors = Vec::new();
        if !c.is_one() || fm.is_empty() {
            factors.push(Expr::Rat(c.clone()));
        }
        for (base, exp) in fm {
            factors.push(base.clone().pow(exp.clone()));
        }
        terms.push(Expr::mul(factors));
    }
    Expr::add(terms)
}

/// Normalize `e` to an expanded, collected canonical form. Returns the
/// constant `0` when the expression vanishes identically as a rational
/// combination of its atomic factors.
pub fn simplify(e: &Expr) -> Expr {
    rebuild(&to_poly(e))
}

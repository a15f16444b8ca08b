//! Grammar-compatible printing. `parse(print(e))` is structurally
//! idempotent for expressions within the grammar; opaque function nodes
//! print with prime marks and are display-only.

use super::{Expr, Rat};
use num_traits::Signed;
use std::fmt;

fn fmt_rat(r: &Rat, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

// Precedence levels: 0 sum, 1 product, 2 power base / atom.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 0,
        Expr::Prod(_) | Expr::Div(_, _) => 1,
        Expr::Pow(_, _) => 2,
        Expr::Rat(r) => {
            if r.is_negative() || !r.is_integer() {
                0
            } else {
                3
            }
        }
        Expr::Const(c) => {
            if *c < 0.0 {
                0
            } else {
                3
            }
        }
        Expr::Sym(_) | Expr::Fun(_) => 3,
    }
}

fn write_expr(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let need_paren = prec(e) < parent;
    if need_paren {
        f.write_str("(")?;
    }
    match e {
        Expr::Rat(r) => {
            if r.is_integer() {
                write!(f, "{}", r.numer())?;
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())?;
            }
        }
        Expr::Const(c) => write!(f, "{c}")?,
        Expr::Sym(s) => write!(f, "{s}")?,
        Expr::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write_expr(t, 1, f)?;
            }
        }
        Expr::Prod(fs) => {
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write_expr(x, 2, f)?;
            }
        }
        Expr::Pow(b, r) => {
            write_expr(b, 3, f)?;
            f.write_str("^")?;
            if r.is_integer() && !r.is_negative() {
                write!(f, "{}", r.numer())?;
            } else {
                fmt_rat(r, f)?;
            }
        }
        Expr::Div(n, d) => {
            write_expr(n, 1, f)?;
            f.write_str("/")?;
            write_expr(d, 2, f)?;
        }
        Expr::Fun(fun) => {
            write!(f, "{}", fun.name)?;
            for _ in 0..fun.order {
                f.write_str("'")?;
            }
            f.write_str("(")?;
            write_expr(&fun.arg, 0, f)?;
            f.write_str(")")?;
        }
    }
    if need_paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, 0, f)
    }
}

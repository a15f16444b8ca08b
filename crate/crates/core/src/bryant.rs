//! Bryant's two contact-invariant conditions on F.
//!
//! A 4th-order ODE `y'''' = F` belongs to the GL(2,R) class iff both
//! residuals below vanish identically:
//!
//! ```text
//! r1 = 4 D^2F3 - 8 DF2 + 8 F1 - 6 (DF3) F3 + 4 F2 F3 + F3^3
//! r2 = 160 D^2F2 - 640 DF1 + 144 (DF3)^2 - 352 (DF3) F2 + 144 F2^2
//!      - 80 (DF2) F3 + 160 F1 F3 - 72 (DF3) F3^2 + 88 F2 F3^2
//!      + 9 F3^4 + 16000 Fy
//! ```

use crate::fderiv::FDerivs;
use crate::symexpr::{eval, Binding, Expr};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct BryantResiduals {
    pub r1: Expr,
    pub r2: Expr,
}

#[derive(Debug, Error)]
pub enum BryantError {
    #[error("every sample hit a domain error; nothing was evaluated")]
    AllSamplesSkipped,
}

/// Symbolic Bryant residuals of F.
pub fn bryant_residuals(f: &FDerivs) -> BryantResiduals {
    let n = Expr::num;
    let r1 = Expr::add(vec![
        Expr::mul(vec![n(4), f.d2("3")]),
        Expr::mul(vec![n(-8), f.d("2")]),
        Expr::mul(vec![n(8), f.p("1")]),
        Expr::mul(vec![n(-6), f.d("3"), f.p("3")]),
        Expr::mul(vec![n(4), f.p("2"), f.p("3")]),
        f.p("3").powi(3),
    ]);
    let r2 = Expr::add(vec![
        Expr::mul(vec![n(160), f.d2("2")]),
        Expr::mul(vec![n(-640), f.d("1")]),
        Expr::mul(vec![n(144), f.d("3").powi(2)]),
        Expr::mul(vec![n(-352), f.d("3"), f.p("2")]),
        Expr::mul(vec![n(144), f.p("2").powi(2)]),
        Expr::mul(vec![n(-80), f.d("2"), f.p("3")]),
        Expr::mul(vec![n(160), f.p("1"), f.p("3")]),
        Expr::mul(vec![n(-72), f.d("3"), f.p("3").powi(2)]),
        Expr::mul(vec![n(88), f.p("2"), f.p("3").powi(2)]),
        Expr::mul(vec![n(9), f.p("3").powi(4)]),
        Expr::mul(vec![n(16000), f.p("y")]),
    ]);
    BryantResiduals { r1, r2 }
}

#[derive(Debug, Clone, Serialize)]
pub struct BryantReport {
    pub pass: bool,
    pub max_r1: f64,
    pub max_r2: f64,
    pub tolerance: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub worst_point: Vec<(String, f64)>,
}

/// Evaluate both residuals over the samples; pass iff the worst residual
/// stays within `tol`. Samples that hit domain errors are skipped.
/// Residuals are simplified first so that symbolic cancellations are not
/// re-measured as floating-point noise.
pub fn check_bryant(
    f: &FDerivs,
    samples: &[Binding],
    tol: f64,
) -> Result<BryantReport, BryantError> {
    let raw = bryant_residuals(f);
    let res = BryantResiduals {
        r1: crate::symexpr::simplify(&raw.r1),
        r2: crate::symexpr::simplify(&raw.r2),
    };
    let mut max_r1 = 0.0f64;
    let mut max_r2 = 0.0f64;
    let mut worst = Vec::new();
    let mut worst_val = -1.0f64;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for b in samples {
        let (v1, v2) = match (eval(&res.r1, b), eval(&res.r2, b)) {
            (Ok(a), Ok(c)) => (a, c),
            _ => {
                skipped += 1;
                continue;
            }
        };
        evaluated += 1;
        max_r1 = max_r1.max(v1.abs());
        max_r2 = max_r2.max(v2.abs());
        let here = v1.abs().max(v2.abs());
        if here > worst_val {
            worst_val = here;
            worst = b
                .symbols()
                .map(|(s, v)| (s.name().to_string(), v))
                .collect();
        }
    }
    if evaluated == 0 {
        return Err(BryantError::AllSamplesSkipped);
    }
    Ok(BryantReport {
        pass: max_r1 <= tol && max_r2 <= tol,
        max_r1,
        max_r2,
        tolerance: tol,
        evaluated,
        skipped,
        worst_point: worst,
    })
}

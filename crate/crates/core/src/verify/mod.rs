//! Residual suites: the eight structure equations on the bundle, the
//! normalization of the curvature coefficients, the reduced (I2 = 0,
//! a2 != 0) model check, and formal closure of the reduced exterior
//! differential system.

mod eds;
#[cfg(test)]
mod tests;

pub use eds::{constancy_contradiction, eds_closure_check, EdsSystem, EdsVariant};

use crate::curvature::{
    base_coefficients, curvature_blocks, transformed_coefficients, Coefficients, PAIRS,
};
use crate::fderiv::FDerivs;
use crate::forms::{Chart, FormError, KForm};
use crate::gl2coframe::{base_coframe, lift_coframe, CoframeError, CoframeSet, FiberPoint};
use crate::report::{point_of, ResidualReport};
use crate::symexpr::{eval, rat, Binding, Expr};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Coframe(#[from] CoframeError),
    #[error(transparent)]
    Curvature(#[from] crate::curvature::CurvatureError),
    #[error("every sample hit a domain error; nothing was evaluated")]
    AllSamplesSkipped,
    #[error("the a2 coefficient vanishes; the class is not normalizable (flat family)")]
    NotNormalizable,
}

/// Scale one of the eight base curvature coefficients, in the order
/// (a0, a1, a2, b0, b1, b2, b3, b4). Used by the mutation tests to prove
/// the residual suite detects transcription errors.
#[derive(Debug, Clone, Copy)]
pub struct Mutation {
    pub index: usize,
    pub factor: f64,
}

pub const EQUATION_LABELS: [&str; 8] = [
    "d theta0", "d theta1", "d theta2", "d theta3", "d Omega+", "d Omega-", "d Omega0", "d Omega",
];

fn apply_mutation(c: &mut Coefficients<f64>, m: Mutation) {
    let slot = [
        &mut c.a0, &mut c.a1, &mut c.a2, &mut c.b0, &mut c.b1, &mut c.b2, &mut c.b3, &mut c.b4,
    ];
    *slot.into_iter().nth(m.index).expect("mutation index < 8") *= m.factor;
}

/// Evaluated 2-form coefficient table.
type FormVals = BTreeMap<Vec<u8>, f64>;

fn fv_axpy(acc: &mut FormVals, a: f64, x: &FormVals) {
    if a == 0.0 {
        return;
    }
    for (k, v) in x {
        *acc.entry(k.clone()).or_insert(0.0) += a * v;
    }
}

fn fv_max(acc: &FormVals) -> f64 {
    acc.values().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Everything precomputed symbolically for the residual evaluation.
pub struct StructureSuite {
    pub coframe: CoframeSet,
    base_coeffs: Coefficients<Expr>,
    /// dLHS minus the Maurer-Cartan part, one 2-form per equation
    resid_mc: [KForm; 8],
    /// theta^j ^ theta^l in PAIRS order
    theta_wedges: [KForm; 6],
}

impl StructureSuite {
    pub fn new(fd: &FDerivs) -> Result<Self, VerifyError> {
        let base = base_coframe(fd, Chart::bundle());
        let coframe = lift_coframe(&base)?;
        let th = &coframe.theta;
        let (op, om_, o0, om) = (
            &coframe.om_plus,
            &coframe.om_minus,
            &coframe.om_zero,
            &coframe.om,
        );
        let s = |f: &KForm, n: i64, d: i64| f.scale(&Expr::frac(n, d));

        // Maurer-Cartan parts of the eight right-hand sides
        let mc: [KForm; 8] = [
            s(&om.add(o0).wedge(&th[0]), 3, 1).sub(&s(&op.wedge(&th[1]), 3, 1)),
            om_.wedge(&th[0])
                .neg()
                .add(&s(om, 3, 1).add(o0).wedge(&th[1]))
                .sub(&s(&op.wedge(&th[2]), 2, 1)),
            s(&om_.wedge(&th[1]), -2, 1)
                .add(&s(om, 3, 1).sub(o0).wedge(&th[2]))
                .sub(&op.wedge(&th[3])),
            s(&om_.wedge(&th[2]), -3, 1).add(&s(&om.sub(o0).wedge(&th[3]), 3, 1)),
            s(&o0.wedge(op), 2, 1),
            s(&o0.wedge(om_), -2, 1),
            op.wedge(om_),
            KForm::zero(th[0].chart().clone(), 2),
        ];
        let d_forms: Vec<KForm> = coframe.forms().iter().map(|f| f.d().simplified()).collect();
        let resid_mc: [KForm; 8] =
            std::array::from_fn(|i| d_forms[i].sub(&mc[i]).simplified());
        let theta_wedges: [KForm; 6] =
            std::array::from_fn(|p| th[PAIRS[p].0].wedge(&th[PAIRS[p].1]).simplified());

        Ok(StructureSuite {
            coframe,
            base_coeffs: base_coefficients(fd),
            resid_mc,
            theta_wedges,
        })
    }

    /// Max residual of each of the eight equations at one point; `None`
    /// if the point hits a domain error.
    pub fn residuals_at(
        &self,
        b: &Binding,
        mutation: Option<Mutation>,
    ) -> Result<[f64; 8], FormError> {
        let mut coeffs = self
            .base_coeffs
            .eval(b)
            .map_err(|source| FormError::Eval {
                key: Vec::new(),
                source,
            })?;
        if let Some(m) = mutation {
            apply_mutation(&mut coeffs, m);
        }
        let p = FiberPoint::new(
            eval(&Expr::sym("a10"), b).unwrap_or(0.0),
            eval(&Expr::sym("a11"), b).unwrap_or(1.0),
            eval(&Expr::sym("a44"), b).unwrap_or(1.0),
        )
        .map_err(|_| FormError::Eval {
            key: Vec::new(),
            source: crate::symexpr::EvalError::Domain {
                what: "singular fiber point".into(),
                subexpr: "a11/a44".into(),
            },
        })?;
        let t = transformed_coefficients(&coeffs, &p).map_err(|e| FormError::Eval {
            key: Vec::new(),
            source: crate::symexpr::EvalError::Domain {
                what: e.to_string(),
                subexpr: "gauge transport".into(),
            },
        })?;
        let blocks = curvature_blocks(&t);

        let wedge_vals: Vec<FormVals> = self
            .theta_wedges
            .iter()
            .map(|w| w.eval(b))
            .collect::<Result<_, _>>()?;

        let mut out = [0.0f64; 8];
        for (i, resid) in self.resid_mc.iter().enumerate() {
            let mut acc = resid.eval(b)?;
            // curvature part of the four connection equations
            let block = match i {
                4 => Some(&blocks.k_plus),
                5 => Some(&blocks.k_minus),
                6 => Some(&blocks.k_zero),
                7 => Some(&blocks.k_e),
                _ => None,
            };
            if let Some(block) = block {
                for (p, w) in wedge_vals.iter().enumerate() {
                    fv_axpy(&mut acc, -block[p], w);
                }
            }
            out[i] = fv_max(&acc);
        }
        Ok(out)
    }
}

/// Verify the eight structure equations at the given bundle-chart samples.
pub fn structure_residuals(
    fd: &FDerivs,
    samples: &[Binding],
    tol: f64,
    mutation: Option<Mutation>,
) -> Result<Vec<ResidualReport>, VerifyError> {
    let suite = StructureSuite::new(fd)?;
    let mut reports: Vec<ResidualReport> = EQUATION_LABELS
        .iter()
        .map(|l| ResidualReport::new(l, tol))
        .collect();
    let mut evaluated = 0usize;
    for b in samples {
        let vals = match suite.residuals_at(b, mutation) {
            Ok(v) => v,
            Err(_) => continue,
        };
        evaluated += 1;
        for (r, v) in reports.iter_mut().zip(vals) {
            r.record(v, || point_of(b));
        }
    }
    if evaluated == 0 {
        return Err(VerifyError::AllSamplesSkipped);
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// normalization (I2 != 0 and I2 = 0 branches)
// ---------------------------------------------------------------------------

/// Result of normalizing the residual gauge freedom at a jet point.
#[derive(Debug, Clone)]
pub struct NormalizedModel {
    pub eps1: i32,
    /// Present only on the I2 != 0 branch.
    pub eps2: Option<i32>,
    pub section: FiberPoint,
    /// transformed coefficients at the section
    pub coeffs: Coefficients<f64>,
}

/// Normalize a2 -> 8 eps1 and a1 -> 0 (and a0 -> 8 eps2 when I2 != 0)
/// at one jet point.
pub fn normalize_section(fd: &FDerivs, jet: &Binding) -> Result<NormalizedModel, VerifyError> {
    let base = base_coefficients(fd);
    let c0 = base.eval(jet).map_err(|_| VerifyError::AllSamplesSkipped)?;
    if c0.a2.abs() < 1e-12 {
        return Err(VerifyError::NotNormalizable);
    }
    let eps1 = if c0.a2 > 0.0 { 1 } else { -1 };
    let i2 = c0.a1 * c0.a1 - c0.a0 * c0.a2;

    // a44 is fixed only on the I2 != 0 branch
    let (a44, eps2) = if i2.abs() > 1e-10 {
        let disc = c0.a0 * c0.a2 - c0.a1 * c0.a1; // = -I2
        let eps2 = if (eps1 as f64) * disc > 0.0 { 1 } else { -1 };
        let a44 = ((eps1 * eps2) as f64 * disc / (c0.a2 * c0.a2)).sqrt();
        (a44, Some(eps2))
    } else {
        (1.0, None)
    };

    let sq = std::f64::consts::SQRT_2;
    let a11 = sq / 4.0 * a44 * c0.a2.abs().sqrt();
    let a10 = 3.0 * sq / 4.0 * (eps1 as f64) * a44 * c0.a1 / c0.a2.abs().sqrt();
    let section = FiberPoint::new(a10, a11, a44)?;
    let coeffs = transformed_coefficients(&c0, &section)?;

    debug_assert!((coeffs.a2 - 8.0 * eps1 as f64).abs() < 1e-9 * (1.0 + coeffs.a2.abs()));
    Ok(NormalizedModel {
        eps1,
        eps2,
        section,
        coeffs,
    })
}

// ---------------------------------------------------------------------------
// reduced-model (street) check for F = (4/3) y3^2 / y2
// ---------------------------------------------------------------------------

pub const STREET_LABELS: [&str; 8] = [
    "street d theta0",
    "street d theta1",
    "street d theta2",
    "street d theta3",
    "street d Omega+",
    "street d Omega",
    "street Omega- relation",
    "street Omega0 relation",
];

/// Pull the lifted coframe back along the normalized section for
/// F = (4/3) y3^2 / y2 and verify the six reduced structure equations
/// plus the two relations tying Omega- and Omega0 to the surviving forms.
pub fn street_model_check(
    samples: &[Binding],
    tol: f64,
) -> Result<Vec<ResidualReport>, VerifyError> {
    let fd = FDerivs::new(
        crate::symexpr::parse("(4/3)*y3^2/y2").expect("street rhs parses"),
    );
    let base = base_coframe(&fd, Chart::bundle());
    let lifted = lift_coframe(&base)?;

    // normalized section: the base a2 coefficient is positive (eps1 = +1)
    // and I2 = 0 leaves a44 free, set to 1. Then
    //   a11 = (sqrt2/4) sqrt(a2^0),  a10 = (3 sqrt2/4) a1^0 / sqrt(a2^0)
    // with a1^0, a2^0 the base coefficients (a1^0 is not identically zero).
    let c0 = base_coefficients(&fd);
    let sqrt2 = Expr::num(2).pow(rat(1, 2));
    let a11 = Expr::mul(vec![
        Expr::frac(1, 4),
        sqrt2.clone(),
        c0.a2.clone().pow(rat(1, 2)),
    ]);
    let a10 = Expr::mul(vec![
        Expr::frac(3, 4),
        sqrt2.clone(),
        c0.a1.clone(),
        c0.a2.clone().pow(rat(-1, 2)),
    ]);
    let jet = Chart::jet();
    let section: Vec<Expr> = vec![
        Expr::sym("x"),
        Expr::sym("y"),
        Expr::sym("y1"),
        Expr::sym("y2"),
        Expr::sym("y3"),
        a10,
        a11,
        Expr::one(), // a44
    ];
    let pull = |f: &KForm| f.pullback(jet.clone(), &section).simplified();

    let th: [KForm; 4] = std::array::from_fn(|i| pull(&lifted.theta[i]));
    let op = pull(&lifted.om_plus);
    let om_ = pull(&lifted.om_minus);
    let o0 = pull(&lifted.om_zero);
    let om = pull(&lifted.om);

    let sc = |f: &KForm, e: Expr| f.scale(&e);
    let r2 = || sqrt2.clone();
    let n = Expr::num;
    let m = Expr::mul;

    // the six reduced equations, as residual 2-forms
    let residual_forms: [KForm; 6] = [
        th[0].d().sub(
            &sc(&om.wedge(&th[0]), n(12))
                .sub(&sc(&op.wedge(&th[1]), n(3)))
                .add(&sc(&th[0].wedge(&th[2]), m(vec![Expr::frac(3, 2), r2()]))),
        ),
        th[1].d().sub(
            &sc(&om.wedge(&th[1]), n(6))
                .sub(&sc(&op.wedge(&th[2]), n(2)))
                .add(&sc(
                    &th[0].wedge(&th[3]).add(&th[1].wedge(&th[2])),
                    m(vec![Expr::frac(1, 2), r2()]),
                )),
        ),
        th[2].d().sub(
            &op.wedge(&th[3])
                .neg()
                .add(&sc(&th[1].wedge(&th[3]), r2())),
        ),
        th[3].d().sub(
            &sc(&om.wedge(&th[3]), n(-6)).add(&sc(&th[2].wedge(&th[3]), m(vec![n(3), r2()]))),
        ),
        op.d().sub(
            &sc(&om.wedge(&op), n(6))
                .add(&sc(&op.wedge(&th[2]), r2()))
                .add(&th[0].wedge(&th[3]))
                .sub(&sc(&th[1].wedge(&th[2]), n(5))),
        ),
        om.d(),
    ];
    // Omega- = (sqrt2/2) theta^3 and Omega0 = 3 Omega - (sqrt2/2) theta^2
    let rel_minus = om_.sub(&sc(&th[3], m(vec![Expr::frac(1, 2), r2()])));
    let rel_zero = o0.sub(&sc(&om, n(3)).sub(&sc(&th[2], m(vec![Expr::frac(1, 2), r2()]))));

    let mut reports: Vec<ResidualReport> = STREET_LABELS
        .iter()
        .map(|l| ResidualReport::new(l, tol))
        .collect();
    let mut evaluated = 0usize;
    for b in samples {
        let mut vals = [0.0f64; 8];
        let mut ok = true;
        for (i, f) in residual_forms
            .iter()
            .chain([&rel_minus, &rel_zero])
            .enumerate()
        {
            match f.max_abs(b) {
                Ok(v) => vals[i] = v,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        evaluated += 1;
        for (r, v) in reports.iter_mut().zip(vals) {
            r.record(v, || point_of(b));
        }
    }
    if evaluated == 0 {
        return Err(VerifyError::AllSamplesSkipped);
    }
    Ok(reports)
}

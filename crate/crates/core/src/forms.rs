//! Exterior algebra of differential forms with symbolic coefficients on
//! explicit charts.
//!
//! A chart is an ordered list of coordinate symbols; the order fixes the
//! cobasis indexing. A `KForm` of degree `k` stores coefficients keyed by
//! strictly increasing index tuples into the chart.

use crate::symexpr::{eval, partial, simplify, Binding, EvalError, Expr, Sym};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    syms: Vec<Sym>,
}

impl Chart {
    pub fn new(names: &[&str]) -> Arc<Chart> {
        let syms: Vec<Sym> = names.iter().map(|n| Sym::new(n)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for s in &syms {
            assert!(seen.insert(s.clone()), "duplicate chart symbol {s}");
        }
        Arc::new(Chart { syms })
    }

    /// Jet-space chart (x, y, y1, y2, y3).
    pub fn jet() -> Arc<Chart> {
        Chart::new(&["x", "y", "y1", "y2", "y3"])
    }

    /// Bundle chart (x, y, y1, y2, y3, a10, a11, a44); fiber coordinates last.
    pub fn bundle() -> Arc<Chart> {
        Chart::new(&["x", "y", "y1", "y2", "y3", "a10", "a11", "a44"])
    }

    pub fn dim(&self) -> usize {
        self.syms.len()
    }

    pub fn sym(&self, i: usize) -> &Sym {
        &self.syms[i]
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn index(&self, s: &Sym) -> Option<usize> {
        self.syms.iter().position(|t| t == s)
    }
}

#[derive(Debug, Error)]
pub enum FormError {
    #[error("chart mismatch between operands")]
    ChartMismatch,
    #[error("evaluation failed at key {key:?}: {source}")]
    Eval { key: Vec<u8>, source: EvalError },
}

/// Differential form of degree `k` with `Expr` coefficients.
#[derive(Debug, Clone)]
pub struct KForm {
    chart: Arc<Chart>,
    degree: usize,
    coeffs: BTreeMap<Vec<u8>, Expr>,
}

/// Sort an index tuple, returning the permutation sign; `None` on repeats.
fn sort_key(mut key: Vec<u8>) -> Option<(Vec<u8>, i64)> {
    let mut sign = 1i64;
    // insertion sort, counting swaps
    for i in 1..key.len() {
        let mut j = i;
        while j > 0 && key[j - 1] > key[j] {
            key.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in key.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((key, sign))
}

impl KForm {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> KForm {
        KForm {
            chart,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Degree-0 form (a scalar function).
    pub fn scalar(chart: Arc<Chart>, e: Expr) -> KForm {
        let mut f = KForm::zero(chart, 0);
        if !e.is_zero() {
            f.coeffs.insert(Vec::new(), e);
        }
        f
    }

    /// The cobasis 1-form `d s` of a chart coordinate.
    pub fn coordinate_differential(chart: Arc<Chart>, s: &Sym) -> KForm {
        let i = chart.index(s).expect("symbol not on chart") as u8;
        let mut f = KForm::zero(chart, 1);
        f.coeffs.insert(vec![i], Expr::one());
        f
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<u8>, &Expr)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, key: &[u8]) -> Expr {
        self.coeffs.get(key).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn insert(&mut self, key: Vec<u8>, e: Expr) {
        if e.is_zero() {
            return;
        }
        match self.coeffs.remove(&key) {
            None => {
                self.coeffs.insert(key, e);
            }
            Some(prev) => {
                let s = Expr::add(vec![prev, e]);
                if !s.is_zero() {
                    self.coeffs.insert(key, s);
                }
            }
        }
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!(self.chart, other.chart, "chart mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (k, e) in &other.coeffs {
            out.insert(k.clone(), e.clone());
        }
        out
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        self.add(&other.scale(&Expr::num(-1)))
    }

    pub fn scale(&self, e: &Expr) -> KForm {
        if e.is_zero() {
            return KForm::zero(self.chart.clone(), self.degree);
        }
        let mut out = KForm::zero(self.chart.clone(), self.degree);
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), Expr::mul(vec![e.clone(), c.clone()]));
        }
        out
    }

    pub fn neg(&self) -> KForm {
        self.scale(&Expr::num(-1))
    }

    /// Wedge product. Degrees beyond the chart dimension collapse to the
    /// zero form.
    pub fn wedge(&self, other: &KForm) -> KForm {
        assert_eq!(self.chart, other.chart, "chart mismatch");
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return KForm::zero(self.chart.clone(), degree);
        }
        let mut out = KForm::zero(self.chart.clone(), degree);
        for (ka, ea) in &self.coeffs {
            for (kb, eb) in &other.coeffs {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                if let Some((key, sign)) = sort_key(key) {
                    let mut factors = vec![ea.clone(), eb.clone()];
                    if sign < 0 {
                        factors.push(Expr::num(-1));
                    }
                    out.insert(key, Expr::mul(factors));
                }
            }
        }
        out
    }

    /// Exterior derivative via coordinate partials of the coefficients.
    pub fn d(&self) -> KForm {
        let mut out = KForm::zero(self.chart.clone(), self.degree + 1);
        if self.degree + 1 > self.chart.dim() {
            return out;
        }
        for (k, e) in &self.coeffs {
            for (i, s) in self.chart.syms.iter().enumerate() {
                let de = partial(e, s);
                if de.is_zero() {
                    continue;
                }
                let mut key = vec![i as u8];
                key.extend_from_slice(k);
                if let Some((key, sign)) = sort_key(key) {
                    let e = if sign < 0 { de.neg() } else { de };
                    out.insert(key, e);
                }
            }
        }
        out
    }

    /// Simplify every coefficient and drop the ones that collapse to zero.
    pub fn simplified(&self) -> KForm {
        let mut out = KForm::zero(self.chart.clone(), self.degree);
        for (k, e) in &self.coeffs {
            let s = simplify(e);
            if !s.is_zero() {
                out.coeffs.insert(k.clone(), s);
            }
        }
        out
    }

    /// Numeric coefficients at a point, keyed like the symbolic table.
    pub fn eval(&self, b: &Binding) -> Result<BTreeMap<Vec<u8>, f64>, FormError> {
        let mut out = BTreeMap::new();
        for (k, e) in &self.coeffs {
            let v = eval(e, b).map_err(|source| FormError::Eval {
                key: k.clone(),
                source,
            })?;
            out.insert(k.clone(), v);
        }
        Ok(out)
    }

    /// Largest |coefficient| at a point.
    pub fn max_abs(&self, b: &Binding) -> Result<f64, FormError> {
        Ok(self
            .eval(b)?
            .values()
            .fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Pull back along a map into this form's chart. `target_exprs[i]` is
    /// the i-th target coordinate written in the source chart's symbols.
    /// Works for any degree; coefficients are substituted and each cobasis
    /// differential is replaced by `d` of the corresponding expression.
    pub fn pullback(&self, source: Arc<Chart>, target_exprs: &[Expr]) -> KForm {
        assert_eq!(target_exprs.len(), self.chart.dim());
        let subs: Vec<(Sym, Expr)> = self
            .chart
            .syms
            .iter()
            .cloned()
            .zip(target_exprs.iter().cloned())
            .collect();
        let d_targets: Vec<KForm> = target_exprs
            .iter()
            .map(|e| KForm::scalar(source.clone(), e.clone()).d())
            .collect();
        let mut out = KForm::zero(source.clone(), self.degree);
        for (k, e) in &self.coeffs {
            let coeff = substitute(e, &subs);
            let mut acc = KForm::scalar(source.clone(), coeff);
            for &i in k {
                acc = acc.wedge(&d_targets[i as usize]);
            }
            out = out.add(&acc);
        }
        out
    }
}

/// Substitute symbols by expressions (simultaneous).
pub fn substitute(e: &Expr, subs: &[(Sym, Expr)]) -> Expr {
    match e {
        Expr::Rat(_) | Expr::Const(_) => e.clone(),
        Expr::Sym(s) => subs
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| e.clone()),
        Expr::Sum(ts) => Expr::add(ts.iter().map(|t| substitute(t, subs)).collect()),
        Expr::Prod(fs) => Expr::mul(fs.iter().map(|t| substitute(t, subs)).collect()),
        Expr::Pow(b, r) => substitute(b, subs).pow(r.clone()),
        Expr::Div(n, d) => substitute(n, subs).div(substitute(d, subs)),
        Expr::Fun(f) => Expr::fun(&f.name, f.order, substitute(&f.arg, subs)),
    }
}

/// The four contact forms and `w_+ = dx` of the jet chart for a given F:
/// `omega^0 = dy - y1 dx`, ..., `omega^3 = dy3 - F dx`.
pub fn contact_forms(chart: Arc<Chart>, f_rhs: &Expr) -> ([KForm; 4], KForm) {
    let dx = KForm::coordinate_differential(chart.clone(), &Sym::new("x"));
    let d = |n: &str| KForm::coordinate_differential(chart.clone(), &Sym::new(n));
    let om0 = d("y").sub(&dx.scale(&Expr::sym("y1")));
    let om1 = d("y1").sub(&dx.scale(&Expr::sym("y2")));
    let om2 = d("y2").sub(&dx.scale(&Expr::sym("y3")));
    let om3 = d("y3").sub(&dx.scale(f_rhs));
    ([om0, om1, om2, om3], dx)
}

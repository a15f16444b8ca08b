//! Cached partial and total derivatives of a right-hand side F.
//!
//! Derivative specs are strings over `1 2 3 y x` naming the jet coordinate
//! differentiated against (`3` = y3 and so on). Mixed partials commute, so
//! specs are canonicalized by sorting. Every cached entry is simplified
//! once; the long coefficient formulas downstream reference these leaves.

use crate::symexpr::{partial, simplify, total_derivative, Expr, Sym};
use std::collections::BTreeMap;
use std::sync::Mutex;

pub struct FDerivs {
    f: Expr,
    cache: Mutex<BTreeMap<String, Expr>>,
}

fn coord(c: char) -> Sym {
    match c {
        'x' => Sym::new("x"),
        'y' => Sym::new("y"),
        '1' => Sym::new("y1"),
        '2' => Sym::new("y2"),
        '3' => Sym::new("y3"),
        other => panic!("bad derivative spec char `{other}`"),
    }
}

impl FDerivs {
    pub fn new(f: Expr) -> Self {
        FDerivs {
            f: simplify(&f),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn f(&self) -> Expr {
        self.f.clone()
    }

    /// Mixed partial of F, e.g. `p("233")` = F_{233}.
    pub fn p(&self, spec: &str) -> Expr {
        let mut chars: Vec<char> = spec.chars().collect();
        chars.sort_unstable();
        let key: String = chars.iter().collect();
        self.get(&key)
    }

    fn get(&self, key: &str) -> Expr {
        if let Some(e) = self.cache.lock().unwrap().get(key) {
            return e.clone();
        }
        let e = if key.is_empty() {
            self.f.clone()
        } else {
            let (head, last) = key.split_at(key.len() - 1);
            let base = self.get(head);
            simplify(&partial(&base, &coord(last.chars().next().unwrap())))
        };
        self.cache
            .lock()
            .unwrap()
            .insert(key.to_string(), e.clone());
        e
    }

    /// Total derivative D applied to the partial named by `spec`.
    pub fn d(&self, spec: &str) -> Expr {
        self.d_key(spec, 1)
    }

    /// D^2 of the partial named by `spec`.
    pub fn d2(&self, spec: &str) -> Expr {
        self.d_key(spec, 2)
    }

    fn d_key(&self, spec: &str, order: u32) -> Expr {
        let mut chars: Vec<char> = spec.chars().collect();
        chars.sort_unstable();
        let base_key: String = chars.iter().collect();
        let key = format!("D{order}:{base_key}");
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return e.clone();
        }
        let inner = if order == 1 {
            self.get(&base_key)
        } else {
            self.d_key(spec, order - 1)
        };
        let e = simplify(&total_derivative(&inner, &self.f));
        self.cache.lock().unwrap().insert(key, e.clone());
        e
    }
}

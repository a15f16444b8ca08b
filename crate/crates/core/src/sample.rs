//! Seeded sample-point generation.
//!
//! Boxes default to regions where every construction in the crate is
//! real-valued: y2 away from 0 (street-model pole) and y3 > 0 (fractional
//! powers), fiber coordinates a11, a44 in [0.5, 2] and a10 in [-1, 1].

use crate::symexpr::{Binding, Sym};
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct SampleBox {
    bounds: BTreeMap<String, (f64, f64)>,
}

impl SampleBox {
    pub fn new() -> Self {
        SampleBox {
            bounds: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty range for {name}");
        self.bounds.insert(name.to_string(), (lo, hi));
        self
    }

    /// Jet coordinates only.
    pub fn jet_default() -> Self {
        SampleBox::new()
            .with("x", -1.0, 1.0)
            .with("y", -1.0, 1.0)
            .with("y1", -1.0, 1.0)
            .with("y2", 0.5, 2.0)
            .with("y3", 0.5, 2.0)
    }

    /// Jet plus fiber coordinates of the bundle chart.
    pub fn bundle_default() -> Self {
        Self::jet_default()
            .with("a10", -1.0, 1.0)
            .with("a11", 0.5, 2.0)
            .with("a44", 0.5, 2.0)
    }

    pub fn set(&mut self, name: &str, lo: f64, hi: f64) {
        assert!(lo < hi, "empty range for {name}");
        self.bounds.insert(name.to_string(), (lo, hi));
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Binding {
        let mut b = Binding::new();
        for (name, (lo, hi)) in &self.bounds {
            b.set(Sym::new(name), rng.gen_range(*lo..*hi));
        }
        b
    }

    pub fn samples<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<Binding> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        Self::jet_default()
    }
}

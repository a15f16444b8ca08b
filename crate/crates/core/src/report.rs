//! Residual reports shared by the verification suites and the CLI.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub label: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn new(label: &str, tolerance: f64) -> Self {
        ResidualReport {
            label: label.to_string(),
            samples: 0,
            max_residual: 0.0,
            tolerance,
            pass: true,
            worst_point: Vec::new(),
        }
    }

    /// Fold one sample's residual into the report.
    pub fn record(&mut self, residual: f64, point: impl Fn() -> Vec<(String, f64)>) {
        self.samples += 1;
        if residual > self.max_residual || self.samples == 1 {
            self.max_residual = residual;
            self.worst_point = point();
        }
        self.pass = self.max_residual <= self.tolerance;
    }
}

pub fn point_of(b: &crate::symexpr::Binding) -> Vec<(String, f64)> {
    b.symbols().map(|(s, v)| (s.name().to_string(), v)).collect()
}

use serde::{Deserialize, Serialize};

use crate::par::Moments;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    /// Deterministic product quadrature (no sampling error).
    TensorQuadrature,
    ClosedForm,
}

/// A numerical estimate bundled with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub method: Method,
}

impl EstimateWithError {
    pub fn quadrature(value: f64, nodes: u64) -> Self {
        Self { value, std_error: 0.0, n_samples: nodes, seed: 0, method: Method::TensorQuadrature }
    }

    pub fn closed_form(value: f64) -> Self {
        Self { value, std_error: 0.0, n_samples: 0, seed: 0, method: Method::ClosedForm }
    }

    pub fn from_moments(m: &Moments, seed: u64) -> Self {
        Self {
            value: m.mean,
            std_error: m.std_error(),
            n_samples: m.n,
            seed,
            method: Method::MonteCarlo,
        }
    }

    /// Sum of independent estimates; errors add in quadrature.
    pub fn sum(parts: &[EstimateWithError]) -> Self {
        let value = parts.iter().map(|e| e.value).sum();
        let std_error = parts.iter().map(|e| e.std_error * e.std_error).sum::<f64>().sqrt();
        let method = if parts.iter().any(|e| e.method == Method::MonteCarlo) {
            Method::MonteCarlo
        } else if parts.iter().all(|e| e.method == Method::ClosedForm) {
            Method::ClosedForm
        } else {
            Method::TensorQuadrature
        };
        Self {
            value,
            std_error,
            n_samples: parts.iter().map(|e| e.n_samples).sum(),
            seed: parts.first().map_or(0, |e| e.seed),
            method,
        }
    }

    /// `|value - target| <= k * std_error`
    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    pub fn relative_error(&self, target: f64) -> f64 {
        (self.value - target).abs() / target.abs()
    }
}

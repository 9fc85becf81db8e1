use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dyson::SeriesPlan;
use crate::operators::matrix::{cvec_serde, vec_diff_norm, CMatrix};

/// A propagator or an evolved state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Evolved {
    Matrix(CMatrix),
    Vector(#[serde(with = "cvec_serde")] Vec<C64>),
}

impl Evolved {
    pub fn dim(&self) -> usize {
        match self {
            Evolved::Matrix(m) => m.dim(),
            Evolved::Vector(v) => v.len(),
        }
    }

    /// Spectral norm for matrices, Euclidean norm for vectors.
    pub fn distance(&self, other: &Evolved) -> f64 {
        match (self, other) {
            (Evolved::Matrix(a), Evolved::Matrix(b)) => (a - b).spectral_norm(),
            (Evolved::Vector(a), Evolved::Vector(b)) => vec_diff_norm(a, b),
            _ => f64::INFINITY,
        }
    }

    pub fn as_matrix(&self) -> Option<&CMatrix> {
        match self {
            Evolved::Matrix(m) => Some(m),
            Evolved::Vector(_) => None,
        }
    }
}

/// Outcome of one approximation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub method: String,
    pub approx: Evolved,
    pub reference: Evolved,
    pub error_2norm: f64,
    /// Target the error is checked against, when one applies.
    pub bound: Option<f64>,
    pub plan: Option<SeriesPlan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall-clock seconds. Kept out of the serialized report so repeated runs
    /// serialize identically.
    #[serde(skip)]
    pub wall_time: f64,
}

impl EvolutionReport {
    pub fn new(method: &str, approx: Evolved, reference: Evolved, bound: Option<f64>) -> Self {
        let error_2norm = approx.distance(&reference);
        Self {
            method: method.to_string(),
            approx,
            reference,
            error_2norm,
            bound,
            plan: None,
            notes: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn with_plan(mut self, plan: SeriesPlan) -> Self {
        self.plan = Some(plan);
        self
    }

    pub fn within_bound(&self) -> bool {
        match self.bound {
            Some(b) => self.error_2norm <= b,
            None => self.error_2norm.is_finite(),
        }
    }
}

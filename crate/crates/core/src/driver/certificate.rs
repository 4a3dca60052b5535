//! Certificate documents: a cut, or a routed demand graph with a spectral gap.

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub seed: u64,
    pub epsilon: f64,
    pub kappa: f64,
    /// Game iterations played.
    pub rounds: usize,
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
    #[serde(flatten)]
    pub body: CertificateBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CertificateBody {
    Cut(CutBody),
    Flow(FlowBody),
}

/// A cut, with every quantity in the units of the input graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutBody {
    pub cut_side: Vec<usize>,
    pub capacity: f64,
    pub balance: usize,
    pub expansion: f64,
    /// Factor the capacities were multiplied by when the cut was found.
    pub capacity_scale: f64,
    /// Guaranteed upper bound on the expansion, `κ / capacity_scale`.
    pub expansion_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFlow {
    pub walk: Vec<usize>,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub iteration: usize,
    pub mwu_rounds: usize,
    pub trials: usize,
    pub phi: f64,
    /// `λ₂` of the running average of the demands.
    pub lambda2: f64,
    pub congestion: f64,
    pub measured_width: f64,
}

/// Demands routable in the graph with capacities multiplied by
/// `capacity_scale`, whose Laplacian has second eigenvalue `lambda2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowBody {
    pub capacity_scale: f64,
    pub lambda2: f64,
    pub lambda_min: f64,
    /// `Φ` of the final demands against the final embedding.
    pub phi: f64,
    pub phi_tol: f64,
    /// `max_e F_e / (capacity_scale · G_e)` of the walks below.
    pub congestion: f64,
    pub max_degree: f64,
    pub beta: f64,
    /// Averaged demands `(x, y, D_xy)` with `x < y`.
    pub demand: Vec<(usize, usize, f64)>,
    pub flow_paths: Vec<PathFlow>,
    pub final_embedding: Vec<Vec<f64>>,
    /// Demands of the last game iteration, one of the averaged terms.
    pub final_demand: Vec<(usize, usize, f64)>,
    pub round_summaries: Vec<RoundSummary>,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn is_cut(&self) -> bool {
        matches!(self.body, CertificateBody::Cut(_))
    }

    pub fn cut(&self) -> Option<&CutBody> {
        match &self.body {
            CertificateBody::Cut(c) => Some(c),
            CertificateBody::Flow(_) => None,
        }
    }

    pub fn flow(&self) -> Option<&FlowBody> {
        match &self.body {
            CertificateBody::Flow(f) => Some(f),
            CertificateBody::Cut(_) => None,
        }
    }
}

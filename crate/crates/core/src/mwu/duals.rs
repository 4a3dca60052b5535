//! Edge and vertex lengths of the packing dual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Lengths `w_e ≥ 0` on edges and `w_x ≥ 0` on vertices, with the degree
/// bound `β` that weighs the vertex terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub w_e: Vec<f64>,
    pub w_x: Vec<f64>,
    pub beta: f64,
}

impl DualState {
    /// Unit lengths everywhere, normalized.
    pub fn uniform(g: &WeightedGraph, beta: f64) -> Result<Self> {
        let mut d = DualState { w_e: vec![1.0; g.m()], w_x: vec![1.0; g.n()], beta };
        d.normalize(g)?;
        Ok(d)
    }

    /// Lengths taken as given, without normalization.
    pub fn from_raw(w_e: Vec<f64>, w_x: Vec<f64>, beta: f64) -> Result<Self> {
        if w_e.iter().chain(&w_x).any(|w| !(*w >= 0.0 && w.is_finite())) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Parameter("dual lengths must be finite and nonnegative, beta positive".into()));
        }
        Ok(DualState { w_e, w_x, beta })
    }

    /// `Σ_e w_e G_e + β Σ_x w_x`.
    pub fn mass(&self, g: &WeightedGraph) -> f64 {
        let edges: f64 = g.edges().iter().zip(&self.w_e).map(|(e, w)| e.w * w).sum();
        edges + self.beta * self.w_x.iter().sum::<f64>()
    }

    /// Rescales so that the mass is exactly `2n`.
    pub fn normalize(&mut self, g: &WeightedGraph) -> Result<()> {
        if self.w_e.len() != g.m() || self.w_x.len() != g.n() {
            return Err(Error::Parameter("dual lengths do not match the graph".into()));
        }
        let mass = self.mass(g);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numeric { iterations: 0, estimate: mass });
        }
        let f = 2.0 * g.n() as f64 / mass;
        self.w_e.iter_mut().chain(self.w_x.iter_mut()).for_each(|w| *w *= f);
        Ok(())
    }

    /// Left side of the relative feasibility condition,
    /// `Σ_e w_e F_e + Σ_x w_x deg_D(x)`.
    pub fn load(&self, edge_flow: &[f64], degrees: &[f64]) -> f64 {
        let e: f64 = self.w_e.iter().zip(edge_flow).map(|(w, f)| w * f).sum();
        e + self.w_x.iter().zip(degrees).map(|(w, d)| w * d).sum::<f64>()
    }
}

//! Vector embeddings of the vertex set and the flow player's payoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DemandGraph;

/// `n` points in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl Embedding {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != n * d {
            return Err(Error::Parameter(format!(
                "embedding of {n} points in dimension {d} needs {} coordinates, got {}",
                n * d,
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("embedding has a non-finite coordinate".into()));
        }
        Ok(Embedding { n, d, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parameter("embedding rows have unequal lengths".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.coords[x * self.d..(x + 1) * self.d]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|x| self.row(x).to_vec()).collect()
    }

    /// Column `i` as an `n`-vector.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|x| self.coords[x * self.d + i]).collect()
    }

    pub fn sq_dist(&self, x: usize, y: usize) -> f64 {
        self.row(x).iter().zip(self.row(y)).map(|(a, b)| (a - b).powi(2)).sum()
    }

    pub fn sq_norm(&self, x: usize) -> f64 {
        self.row(x).iter().map(|a| a * a).sum()
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.n).map(|x| self.sq_norm(x)).fold(0.0, f64::max).sqrt()
    }

    /// Projections `v_x · u`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.d, "direction dimension mismatch");
        (0..self.n).map(|x| self.row(x).iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for x in 0..self.n {
            m.iter_mut().zip(self.row(x)).for_each(|(a, b)| *a += b);
        }
        m.iter_mut().for_each(|a| *a /= self.n as f64);
        m
    }

    /// `Σ_{x<y} ‖v_x - v_y‖²`, evaluated as `n Σ_x ‖v_x - mean‖²`.
    pub fn spread(&self) -> f64 {
        let m = self.mean();
        let centered: f64 =
            (0..self.n).map(|x| self.row(x).iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum();
        self.n as f64 * centered
    }

    pub fn scale(&mut self, factor: f64) {
        self.coords.iter_mut().for_each(|c| *c *= factor);
    }

    pub fn center(&mut self) {
        let m = self.mean();
        for x in 0..self.n {
            self.coords[x * self.d..(x + 1) * self.d].iter_mut().zip(&m).for_each(|(a, b)| *a -= b);
        }
    }

    /// Centers and rescales so that `Σ_{x<y} ‖v_x - v_y‖² = n²`.
    pub fn normalize(&mut self) -> Result<()> {
        self.center();
        let s = self.spread();
        if !(s > 0.0) {
            return Err(Error::DegenerateEmbedding("all points coincide".into()));
        }
        self.scale((self.n as f64 * self.n as f64 / s).sqrt());
        Ok(())
    }

    /// Shrinks rows longer than `radius` onto the ball, then renormalizes.
    /// Repeats a few times since renormalizing can push rows back out.
    pub fn clip_norms(&mut self, radius: f64) -> Result<()> {
        for _ in 0..8 {
            let mut clipped = false;
            for x in 0..self.n {
                let norm = self.sq_norm(x).sqrt();
                if norm > radius {
                    clipped = true;
                    let f = radius / norm;
                    self.coords[x * self.d..(x + 1) * self.d].iter_mut().for_each(|c| *c *= f);
                }
            }
            self.normalize()?;
            if !clipped {
                break;
            }
        }
        Ok(())
    }
}

/// `Φ(V, D) = Σ_{x<y} D_xy ‖v_x - v_y‖² / ((1/n) Σ_{x<y} ‖v_x - v_y‖²)`.
pub fn payoff_phi(v: &Embedding, d: &DemandGraph) -> Result<f64> {
    if v.n() != d.n() {
        return Err(Error::Parameter(format!("embedding has {} points, demands {} vertices", v.n(), d.n())));
    }
    let denom = v.spread() / v.n() as f64;
    if !(denom > 0.0) {
        return Err(Error::DegenerateEmbedding("all points coincide".into()));
    }
    let num: f64 = d.pairs().map(|(x, y, w)| w * v.sq_dist(x, y)).sum();
    Ok(num / denom)
}

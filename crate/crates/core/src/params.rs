//! Solver constants and the quantities derived from them for a given `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How each MWU trial draws its direction chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainRule {
    /// A single independent direction when `R < 7`, otherwise the shuffled
    /// sampler with correlation `1 - 1/⌊R/7⌋`.
    Standard,
    /// The shuffled sampler with correlation `1 - 1/R` at every `R`.
    Shuffled,
}

/// User-facing knobs. Everything else is derived in [`Params::derive`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub epsilon: f64,
    /// Balance constant: `A` and `B` hold `⌊2cn⌋` vertices each.
    pub c: f64,
    /// Minimum stretch `(v_y - v_x)·u` of a matched pair.
    pub sigma: f64,
    /// Probability of a good direction; only feeds `δ = γc/16`.
    pub gamma: f64,
    pub eta: f64,
    /// Constant in the MWU round count `⌈C n^{2ε} ln² n⌉`.
    pub mwu_c: f64,
    /// Certificate threshold on `λ₂` of the averaged demand graph.
    pub lambda_min: f64,
    /// Trials per round are capped at `⌈factor · n^ε⌉`.
    pub trial_cap_factor: f64,
    pub phi_tol: f64,
    pub chain_rule: ChainRule,
    /// Replaces the default `L = ε/4`.
    pub l_override: Option<f64>,
    /// Replaces the default `R = ⌈√(ε log₂ n)⌉`.
    pub r_override: Option<usize>,
}

impl Params {
    pub fn new(epsilon: f64) -> Self {
        Params {
            epsilon,
            c: 1.0 / 8.0,
            sigma: 0.25,
            gamma: 1.0 / 8.0,
            eta: 0.25,
            mwu_c: 4.0,
            lambda_min: 0.1,
            trial_cap_factor: 8.0,
            phi_tol: 1e-6,
            chain_rule: ChainRule::Standard,
            l_override: None,
            r_override: None,
        }
    }

    /// Valid range of `ε` for `n` vertices, `[1/log₂ n, 1/2]`.
    pub fn epsilon_range(n: usize) -> (f64, f64) {
        (1.0 / (n as f64).log2(), 0.5)
    }

    /// Checks every knob against `n` and computes the derived constants.
    pub fn derive(&self, n: usize) -> Result<Derived> {
        if n < 4 {
            return Err(Error::Parameter(format!("the solver needs n >= 4, got {n}")));
        }
        let (lo, hi) = Self::epsilon_range(n);
        if !(self.epsilon >= lo - 1e-12 && self.epsilon <= hi) {
            return Err(Error::Parameter(format!(
                "epsilon = {} outside [{lo:.6}, {hi}] for n = {n}",
                self.epsilon
            )));
        }
        let positive = [
            ("c", self.c),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("mwu_c", self.mwu_c),
            ("lambda_min", self.lambda_min),
            ("trial_cap_factor", self.trial_cap_factor),
            ("phi_tol", self.phi_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} = {v} must be positive and finite")));
            }
        }
        if self.c > 0.25 {
            return Err(Error::Parameter(format!("c = {} must be at most 1/4", self.c)));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::Parameter(format!("eta = {} must lie in (0, 1/2)", self.eta)));
        }
        let nf = n as f64;
        let log2n = nf.log2();
        let l = self.l_override.unwrap_or(self.epsilon / 4.0);
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Parameter(format!("L = {l} must be positive and finite")));
        }
        let r = self.r_override.unwrap_or_else(|| (self.epsilon * log2n).sqrt().ceil().max(1.0) as usize);
        if r == 0 {
            return Err(Error::Parameter("R must be at least 1".into()));
        }
        let (chain_len, chain_rho) = match self.chain_rule {
            ChainRule::Standard if r < 7 => (1, 0.0),
            ChainRule::Standard => (r, 1.0 - 1.0 / (r / 7) as f64),
            ChainRule::Shuffled => (r, 1.0 - 1.0 / r as f64),
        };
        let kappa = 24.0 * r as f64 / (self.c * l);
        let beta = 12.0 / (self.c * l);
        let mwu_rounds = (self.mwu_c * nf.powf(2.0 * self.epsilon) * nf.ln().powi(2)).ceil() as usize;
        Ok(Derived {
            n,
            epsilon: self.epsilon,
            c: self.c,
            sigma: self.sigma,
            delta: self.gamma * self.c / 16.0,
            eta: self.eta,
            l,
            r,
            chain_rule: self.chain_rule,
            chain_len,
            chain_rho,
            kappa,
            beta,
            lambda_min: self.lambda_min,
            phi_tol: self.phi_tol,
            mwu_rounds: mwu_rounds.max(1),
            trial_cap: (self.trial_cap_factor * nf.powf(self.epsilon)).ceil() as usize,
            pairs_needed: (nf.powf(1.0 - self.epsilon) / 2.0).ceil() as usize,
            probes: log2n.ceil() as usize,
            game_rounds: (log2n / self.epsilon).ceil() as usize,
            embed_dim: log2n.ceil() as usize,
        })
    }
}

/// Constants fixed for one instance size.
#[derive(Clone, Debug, PartialEq)]
pub struct Derived {
    pub n: usize,
    pub epsilon: f64,
    pub c: f64,
    pub sigma: f64,
    pub delta: f64,
    pub eta: f64,
    /// Squared-distance threshold for a long pair.
    pub l: f64,
    pub r: usize,
    /// Directions per trial and their correlation.
    pub chain_rule: ChainRule,
    pub chain_len: usize,
    pub chain_rho: f64,
    pub kappa: f64,
    pub beta: f64,
    pub lambda_min: f64,
    pub phi_tol: f64,
    pub mwu_rounds: usize,
    pub trial_cap: usize,
    /// Long pairs a round must collect, `⌈n^{1-ε}/2⌉`.
    pub pairs_needed: usize,
    /// Direct FlowAndCut probes before the MWU rounds.
    pub probes: usize,
    pub game_rounds: usize,
    pub embed_dim: usize,
}

impl Derived {
    /// Flow value separating the two FlowAndCut branches.
    pub fn flow_threshold(&self) -> f64 {
        self.kappa * self.c * self.n as f64
    }

    /// Smallest path flow a matching keeps, `κcn/(4m)`.
    pub fn min_path_flow(&self, m: usize) -> f64 {
        self.flow_threshold() / (4.0 * m as f64)
    }

    /// Bound `4m/(κcn)` on the congestion of a matching's unit demands.
    pub fn matching_congestion_bound(&self, m: usize) -> f64 {
        4.0 * m as f64 / self.flow_threshold()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_at_sixty_four() {
        let d = Params::new(0.25).derive(64).unwrap();
        assert_eq!(d.r, 2);
        assert_eq!(d.l, 1.0 / 16.0);
        assert_eq!(d.kappa, 24.0 * 2.0 * 8.0 * 16.0);
        assert_eq!(d.beta, 12.0 * 8.0 * 16.0);
        assert_eq!(d.delta, 1.0 / 1024.0);
        assert_eq!((d.chain_len, d.chain_rho), (1, 0.0));
        assert_eq!(d.mwu_rounds, (4.0 * 8.0 * 64f64.ln().powi(2)).ceil() as usize);
        assert_eq!(d.trial_cap, 23);
        assert_eq!(d.pairs_needed, 12);
        assert_eq!(d.game_rounds, 24);
    }

    #[test]
    fn epsilon_range_enforced() {
        assert!(Params::new(0.9).derive(16).is_err());
        assert!(Params::new(0.2).derive(16).is_err());
        assert!(Params::new(0.25).derive(16).is_ok());
        assert!(Params::new(0.5).derive(3).is_err());
    }

    #[test]
    fn long_chains_use_correlated_sampler() {
        let mut p = Params::new(0.5);
        p.r_override = Some(14);
        let d = p.derive(1024).unwrap();
        assert_eq!((d.chain_len, d.chain_rho), (14, 0.5));
        p.chain_rule = ChainRule::Shuffled;
        p.r_override = Some(4);
        let d = p.derive(1024).unwrap();
        assert_eq!((d.chain_len, d.chain_rho), (4, 0.75));
    }
}

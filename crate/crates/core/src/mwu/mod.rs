//! Width-bounded multiplicative weights for packing constraints `Ax ≤ b`, and
//! the flow player built on it.

mod duals;
mod flow_player;

pub use duals::DualState;
pub use flow_player::{
    find_flow, flow_player_round, mwu_width, FindFlowResult, FlowOutcome, RoundOutcome, RoundResult, RoundTrace,
};

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwuConfig {
    pub eta: f64,
    /// Width `ρ_w` used in the update denominator.
    pub width: f64,
    pub rounds: usize,
}

impl MwuConfig {
    pub fn new(eta: f64, width: f64, rounds: usize) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::Parameter(format!("eta = {eta} must lie in (0, 1/2)")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Parameter(format!("width = {width} must be positive and finite")));
        }
        if rounds == 0 {
            return Err(Error::Parameter("MWU needs at least one round".into()));
        }
        Ok(MwuConfig { eta, width, rounds })
    }

    /// `⌈ρ_w η⁻² ln k⌉` rounds for `k` constraints, after which the averaged
    /// solution is within `1 + 4η` of every bound.
    pub fn guaranteed_rounds(eta: f64, width: f64, constraints: usize) -> usize {
        (width / (eta * eta) * (constraints.max(2) as f64).ln()).ceil().max(1.0) as usize
    }
}

/// An oracle answering weighted feasibility queries.
pub trait MwuOracle {
    type Solution;

    /// A solution `x` with `0 ≤ Ax ≤ ρ_w b` and `y·Ax ≤ y·b` for the weights `y`.
    fn respond(&mut self, iteration: usize, weights: &[f64]) -> Result<Self::Solution>;

    /// The vector `Ax`.
    fn evaluate(&self, x: &Self::Solution) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwuOutcome {
    pub rounds: usize,
    /// `A` applied to the average of the accepted solutions.
    pub average: Vec<f64>,
    /// `max_j (A x̄)_j / b_j`.
    pub max_ratio: f64,
    /// Largest `(Ax)_j / b_j` seen in any single round.
    pub measured_width: f64,
    /// Final weights, rescaled so the largest is one.
    pub weights: Vec<f64>,
    pub stopped_early: bool,
}

/// Runs `config.rounds` iterations of
/// `y_j ← (1 + η (Ax)_j / (ρ_w b_j)) y_j` from `y = 1`, checking the
/// oracle's contract on every answer. `accept` receives each solution and may
/// stop the run.
///
/// When the round count reaches [`MwuConfig::guaranteed_rounds`], the averaged
/// solution is asserted to satisfy `A x̄ ≤ (1 + 4η) b`.
pub fn generic_mwu<O: MwuOracle>(
    oracle: &mut O,
    b: &[f64],
    config: &MwuConfig,
    mut accept: impl FnMut(usize, O::Solution) -> Result<ControlFlow<()>>,
) -> Result<MwuOutcome> {
    if b.is_empty() || b.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::Parameter("bounds must be positive and finite".into()));
    }
    let k = b.len();
    let mut y = vec![1.0; k];
    let mut sum = vec![0.0; k];
    let mut measured_width = 0.0f64;
    let mut done = 0;
    let mut stopped_early = false;
    for iteration in 1..=config.rounds {
        let x = oracle.respond(iteration, &y)?;
        let ax = oracle.evaluate(&x);
        if ax.len() != k {
            return Err(Error::OracleFault { iteration, reason: format!("{} constraint values for {k} rows", ax.len()) });
        }
        for (j, (&a, &bj)) in ax.iter().zip(b).enumerate() {
            if !a.is_finite() || a < -1e-12 * bj {
                return Err(Error::OracleFault { iteration, reason: format!("row {j} has value {a}") });
            }
            if a > config.width * bj * (1.0 + 1e-9) {
                return Err(Error::OracleFault {
                    iteration,
                    reason: format!("row {j} is violated by factor {} beyond width {}", a / bj, config.width),
                });
            }
            measured_width = measured_width.max(a / bj);
        }
        let lhs: f64 = y.iter().zip(&ax).map(|(y, a)| y * a).sum();
        let rhs: f64 = y.iter().zip(b).map(|(y, b)| y * b).sum();
        if lhs > rhs * (1.0 + 1e-9) {
            return Err(Error::OracleFault {
                iteration,
                reason: format!("weighted load {lhs} exceeds weighted bound {rhs}"),
            });
        }
        for j in 0..k {
            sum[j] += ax[j];
            y[j] *= 1.0 + config.eta * ax[j] / (config.width * b[j]);
        }
        // The procedure is invariant to scaling the weights.
        let top = y.iter().fold(0.0f64, |m, &w| m.max(w));
        y.iter_mut().for_each(|w| *w /= top);
        done = iteration;
        if accept(iteration, x)?.is_break() {
            stopped_early = true;
            break;
        }
    }
    let average: Vec<f64> = sum.iter().map(|s| s / done.max(1) as f64).collect();
    let max_ratio = average.iter().zip(b).map(|(a, b)| a / b).fold(0.0, f64::max);
    let bound = 1.0 + 4.0 * config.eta;
    if !stopped_early && done >= MwuConfig::guaranteed_rounds(config.eta, config.width, k) && max_ratio > bound * (1.0 + 1e-9) {
        return Err(Error::Contract(format!("averaged solution violates a bound by {max_ratio} > {bound}")));
    }
    Ok(MwuOutcome { rounds: done, average, max_ratio, measured_width, weights: y, stopped_early })
}

//! Frequency leakage of the ideal linear-phase state.
//!
//! For linear `f`, `U_QFT ψ_L` factorizes into a global phase times
//! `⊗_m φ_m`, and every outcome of axis `m` whose decoded value is at least
//! `δ` away from `∂f/∂x_m` has amplitude at most `2^{-n}|csc(πλμδ)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::fract;
use crate::grid::{Direction, GridState};
use crate::model::FunctionModel;
use crate::params::AlgorithmParams;
use crate::pipeline::{check_margin, decode_component};

use super::decomposition::linear_phase_state;

/// Tolerance on each out-of-window amplitude against the cosecant bound.
pub const LEAKAGE_TOLERANCE: f64 = 1e-12;
/// Tolerance on the tensor factorization.
pub const FACTORIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub delta: f64,
    /// `2^{-n}|csc(πλμδ)|`
    pub bound: f64,
    /// The bound is at least 1 and therefore says nothing.
    pub vacuous: bool,
    /// Largest `|⟨g_m|φ_m⟩|` over out-of-window outcomes of every axis.
    pub max_out_of_window: f64,
    pub out_of_window_outcomes: usize,
    /// `max |U_QFT ψ_L − phase·⊗φ_m|`
    pub factorization_error: f64,
    pub holds: bool,
}

/// `φ_m = 2^{-n} Σ_g Σ_h e^{2πi h (g/2ⁿ + λμ ∂_m f)} |g⟩`, by direct summation.
pub fn axis_factor(params: &AlgorithmParams, partial: f64) -> Vec<Complex64> {
    let side = 1usize << params.n;
    let shift = params.lambda * params.mu * partial;
    let norm = 1.0 / side as f64;
    (0..side)
        .map(|g| {
            let freq = g as f64 / side as f64 + shift;
            (0..side)
                .map(|h| Complex64::from_polar(norm, 2.0 * PI * fract(h as f64 * freq)))
                .sum()
        })
        .collect()
}

pub fn leakage_check(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    delta: f64,
) -> Result<LeakageReport> {
    if !model.is_linear() {
        return Err(Error::NotLinear);
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::NonPositive {
            name: "delta",
            value: delta,
        });
    }
    check_margin(model, x, params)?;
    // the cosecant bound needs the decoded range to cover [-L-δ, L+δ]
    let bandwidth = 1.0 / (2.0 * params.lambda * params.mu);
    if bandwidth < model.grad_bound() + delta {
        return Err(Error::InvalidArgument(format!(
            "bandwidth 1/(2λμ) = {bandwidth} is below L + δ = {}",
            model.grad_bound() + delta
        )));
    }

    let shape = params.grid_shape(x.len())?;
    let grad = model.gradient(x);
    let factors: Vec<Vec<Complex64>> = grad.iter().map(|&d| axis_factor(params, d)).collect();

    let bound = (1.0 / (PI * params.lambda * params.mu * delta).sin()).abs() / shape.side() as f64;
    let mut max_out = 0.0f64;
    let mut count = 0;
    for (phi, &partial) in factors.iter().zip(&grad) {
        for (g, amp) in phi.iter().enumerate() {
            if (decode_component(g, params)? - partial).abs() >= delta {
                max_out = max_out.max(amp.norm());
                count += 1;
            }
        }
    }

    // global phase e^{2πiλ(f(x) − μ∇f·g₀)}
    let g0 = shape.center();
    let turns = params.lambda * (model.evaluate(x) - params.mu * g0 * grad.iter().sum::<f64>());
    let global = Complex64::from_polar(1.0, 2.0 * PI * fract(turns));
    let transformed = linear_phase_state(model, x, params)?.qft(Direction::Forward);
    let mut product = Vec::with_capacity(shape.len());
    for flat in 0..shape.len() {
        let index = shape.decode(flat)?;
        let amp = index
            .iter()
            .zip(&factors)
            .fold(global, |acc, (&g, phi)| acc * phi[g]);
        product.push(amp);
    }
    let factorization_error =
        transformed.max_abs_diff(&GridState::from_amplitudes(shape, product)?);

    Ok(LeakageReport {
        delta,
        bound,
        vacuous: bound >= 1.0,
        max_out_of_window: max_out,
        out_of_window_outcomes: count,
        factorization_error,
        holds: max_out <= bound + LEAKAGE_TOLERANCE
            && factorization_error <= FACTORIZATION_TOLERANCE,
    })
}

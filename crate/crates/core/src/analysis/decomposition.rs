//! Splitting the pre-transform grid state into its ideal and error parts.
//!
//! The phase state `ψ_h = 2^{-pn/2} e^{2πiλ·v_h}` uses the oracle's value
//! `v_h` at grid point `h`. Writing `v_h = f(x) + μ∇f(x)·(h−g₀) + ε_N + ε_D`
//! gives `ψ = ψ_L + ψ_N + ψ_D`: the linear-phase part, the curvature error
//! and the arithmetic-precision error.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gates::{fract, rotation_turns};
use crate::grid::{GridShape, GridState};
use crate::model::FunctionModel;
use crate::oracle::{oracle_value, DomainLabel, FixedPointFormat};
use crate::params::AlgorithmParams;
use crate::pipeline::check_margin;

fn phase(amplitude: f64, turns: f64) -> Complex64 {
    Complex64::from_polar(amplitude, 2.0 * PI * fract(turns))
}

/// Same phase the rotation operator applies to the range word.
fn register_phase(amplitude: f64, lambda: f64, format: &FixedPointFormat, word: u64) -> Complex64 {
    let turns = rotation_turns(lambda, format.offset(), format.step(), word);
    Complex64::from_polar(amplitude, 2.0 * PI * turns)
}

/// Worst-case per-term errors against their pointwise bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermErrors {
    /// `max_h |ε_D(x, h)|`
    pub max_precision_error: f64,
    /// Number of grid points with `|ε_D| > ν`.
    pub precision_violations: usize,
    /// `max_h |ε_N(x, h)| / (Mμ²|h−g₀|²/2)` over points with a non-zero bound.
    pub max_curvature_ratio: f64,
    /// Number of grid points with `|ε_N|` above its Taylor-remainder bound.
    pub curvature_violations: usize,
}

#[derive(Debug, Clone)]
pub struct ErrorDecomposition {
    pub psi: GridState,
    pub psi_l: GridState,
    pub psi_n: GridState,
    pub psi_d: GridState,
    pub term_errors: TermErrors,
}

impl ErrorDecomposition {
    pub fn norm_n(&self) -> f64 {
        self.psi_n.norm()
    }

    pub fn norm_d(&self) -> f64 {
        self.psi_d.norm()
    }

    /// `max |ψ − (ψ_L + ψ_N + ψ_D)|` componentwise.
    pub fn reconstruction_error(&self) -> f64 {
        self.psi
            .amplitudes()
            .iter()
            .zip(self.psi_l.amplitudes())
            .zip(self.psi_n.amplitudes().iter().zip(self.psi_d.amplitudes()))
            .map(|((p, l), (n, d))| (p - (l + n + d)).norm())
            .fold(0.0, f64::max)
    }
}

fn grid_point(x: &[f64], offsets: &[f64], mu: f64) -> Vec<f64> {
    x.iter().zip(offsets).map(|(xi, o)| xi + mu * o).collect()
}

/// `ψ` built directly from the oracle's values, without running the pipeline.
pub fn oracle_phase_state(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    format: &FixedPointFormat,
) -> Result<GridState> {
    let shape = params.grid_shape(x.len())?;
    let base = DomainLabel::encode(x);
    let amp = (shape.len() as f64).sqrt().recip();
    let amps = (0..shape.len())
        .map(|h| {
            let word = oracle_value(model, format, params, &base.shift(h, &shape)?)?;
            Ok(register_phase(amp, params.lambda, format, word.0))
        })
        .collect::<Result<Vec<_>>>()?;
    GridState::from_amplitudes(shape, amps)
}

/// `ψ_L`: the ideal linear phase built from the exact gradient at `x`.
pub fn linear_phase_state(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
) -> Result<GridState> {
    let shape = params.grid_shape(x.len())?;
    let fx = model.evaluate(x);
    let grad = model.gradient(x);
    let amp = (shape.len() as f64).sqrt().recip();
    let amps = (0..shape.len())
        .map(|h| {
            let offsets = shape.centered_offsets(h)?;
            let lin = fx + params.mu * dot(&grad, &offsets);
            Ok(phase(amp, params.lambda * lin))
        })
        .collect::<Result<Vec<_>>>()?;
    GridState::from_amplitudes(shape, amps)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn decompose_state(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    format: &FixedPointFormat,
) -> Result<ErrorDecomposition> {
    check_margin(model, x, params)?;
    let shape: GridShape = params.grid_shape(x.len())?;
    let base = DomainLabel::encode(x);
    let fx = model.evaluate(x);
    let grad = model.gradient(x);
    let amp = (shape.len() as f64).sqrt().recip();
    let lambda = params.lambda;
    let curvature_scale = model.hess_bound() * params.mu * params.mu / 2.0;

    let mut psi = Vec::with_capacity(shape.len());
    let mut psi_l = Vec::with_capacity(shape.len());
    let mut psi_n = Vec::with_capacity(shape.len());
    let mut psi_d = Vec::with_capacity(shape.len());
    let mut errors = TermErrors {
        max_precision_error: 0.0,
        precision_violations: 0,
        max_curvature_ratio: 0.0,
        curvature_violations: 0,
    };

    for h in 0..shape.len() {
        let offsets = shape.centered_offsets(h)?;
        let point = grid_point(x, &offsets, params.mu);
        let exact = model.evaluate(&point);
        let linear = fx + params.mu * dot(&grad, &offsets);
        let word = oracle_value(model, format, params, &base.shift(h, &shape)?)?;
        let computed = format.decode(word);

        let e_l = phase(amp, lambda * linear);
        let e_f = phase(amp, lambda * exact);
        let e_c = register_phase(amp, lambda, format, word.0);
        psi.push(e_c);
        psi_l.push(e_l);
        psi_n.push(e_f - e_l);
        psi_d.push(e_c - e_f);

        let eps_d = (computed - exact).abs();
        errors.max_precision_error = errors.max_precision_error.max(eps_d);
        if eps_d > params.nu {
            errors.precision_violations += 1;
        }
        let eps_n = (exact - linear).abs();
        let bound = curvature_scale * dot(&offsets, &offsets);
        // cancellation in f(pt) − f(x) − μ∇f·(h−g₀) costs a few ulps of |f|
        let rounding = 16.0 * f64::EPSILON * (exact.abs() + fx.abs() + 1.0);
        if eps_n > bound + rounding {
            errors.curvature_violations += 1;
        }
        if bound > 0.0 {
            errors.max_curvature_ratio = errors.max_curvature_ratio.max(eps_n / bound);
        }
    }

    Ok(ErrorDecomposition {
        psi: GridState::from_amplitudes(shape, psi)?,
        psi_l: GridState::from_amplitudes(shape, psi_l)?,
        psi_n: GridState::from_amplitudes(shape, psi_n)?,
        psi_d: GridState::from_amplitudes(shape, psi_d)?,
        term_errors: errors,
    })
}

/// `‖ψ_N‖₂` bound `4^{n−1}πλMμ²/√5` (derived for one axis).
pub fn curvature_norm_bound(params: &AlgorithmParams, hess_bound: f64) -> f64 {
    4f64.powi(params.n as i32 - 1) * PI * params.lambda * hess_bound * params.mu * params.mu
        / 5f64.sqrt()
}

/// `‖ψ_D‖₂` bound `2πλν`.
pub fn precision_norm_bound(params: &AlgorithmParams) -> f64 {
    2.0 * PI * params.lambda * params.nu
}

//! The success projection `P = P₁ ⊗ … ⊗ P_p` onto outcomes whose decoded
//! gradient is within `δ` (∞-norm, strict) of the true gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridState;
use crate::params::AlgorithmParams;
use crate::pipeline::decode_component;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// `‖Pχ‖₂`
    pub norm: f64,
    /// `‖Pχ‖₂²`
    pub probability: f64,
}

/// `P_m` as a mask over the `2ⁿ` outcomes of one axis.
pub fn axis_window(params: &AlgorithmParams, true_component: f64, delta: f64) -> Result<Vec<bool>> {
    (0..1usize << params.n)
        .map(|g| Ok((decode_component(g, params)? - true_component).abs() < delta))
        .collect()
}

pub fn success_projection(
    chi: &GridState,
    true_grad: &[f64],
    delta: f64,
    params: &AlgorithmParams,
) -> Result<Projection> {
    let shape = chi.shape();
    if true_grad.len() != shape.axes() {
        return Err(Error::Dimension {
            expected: shape.axes(),
            got: true_grad.len(),
        });
    }
    let windows = true_grad
        .iter()
        .map(|&c| axis_window(params, c, delta))
        .collect::<Result<Vec<_>>>()?;
    let mut probability = 0.0;
    for (flat, amp) in chi.amplitudes().iter().enumerate() {
        let index = shape.decode(flat)?;
        if index.iter().zip(&windows).all(|(&g, w)| w[g]) {
            probability += amp.norm_sqr();
        }
    }
    Ok(Projection {
        norm: probability.sqrt(),
        probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Direction, GridShape};

    fn params() -> AlgorithmParams {
        // 2ⁿλμ = 1, so decoded values are integers
        AlgorithmParams::new(3, 1e-3, 1.0, 0.125).unwrap()
    }

    #[test]
    fn basis_state_at_true_gradient() {
        let shape = GridShape::new(3, 1).unwrap();
        let chi = GridState::basis(shape, 1).unwrap();
        let p = success_projection(&chi, &[-1.0], 0.5, &params()).unwrap();
        assert_eq!((p.norm, p.probability), (1.0, 1.0));
    }

    #[test]
    fn window_is_strict() {
        let shape = GridShape::new(3, 1).unwrap();
        // outcome 1 decodes to -1, which is exactly delta = 0.5 from -0.5
        let chi = GridState::basis(shape, 1).unwrap();
        let p = success_projection(&chi, &[-1.5], 0.5, &params()).unwrap();
        assert_eq!((p.norm, p.probability), (0.0, 0.0));
    }

    #[test]
    fn product_structure() {
        let shape = GridShape::new(3, 2).unwrap();
        let chi = GridState::basis(shape, 0).unwrap().qft(Direction::Forward);
        let p = success_projection(&chi, &[0.2, -1.0], 1.5, &params()).unwrap();
        let w0 = axis_window(&params(), 0.2, 1.5)
            .unwrap()
            .iter()
            .filter(|&&b| b)
            .count();
        let w1 = axis_window(&params(), -1.0, 1.5)
            .unwrap()
            .iter()
            .filter(|&&b| b)
            .count();
        assert!((p.probability - (w0 * w1) as f64 / 64.0).abs() < 1e-12);
    }
}

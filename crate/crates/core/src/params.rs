use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;

/// Parameters `(n, ν, λ, μ)` of the gradient estimator.
///
/// `n` is the number of qubits per grid axis, `nu` the arithmetic precision
/// of the function oracle, `lambda` the phase scale of the rotation operator
/// and `mu` the spacing of the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    pub n: u32,
    pub nu: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl AlgorithmParams {
    pub fn new(n: u32, nu: f64, lambda: f64, mu: f64) -> Result<Self> {
        let params = Self { n, nu, lambda, mu };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 31 {
            return Err(Error::InvalidArgument(format!(
                "n must lie in 1..=31, got {}",
                self.n
            )));
        }
        for (name, value) in [("nu", self.nu), ("lambda", self.lambda), ("mu", self.mu)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// Frequency resolution `1/(2ⁿλμ)` of the decoded gradient.
    pub fn resolution(&self) -> f64 {
        1.0 / (f64::from(self.n).exp2() * self.lambda * self.mu)
    }

    pub fn grid_shape(&self, p: usize) -> Result<GridShape> {
        GridShape::new(self.n, p)
    }
}

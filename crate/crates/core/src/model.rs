//! Objective functions with certified bounds.
//!
//! A [`FunctionModel`] is the black box whose gradient is estimated. Besides
//! the evaluator it carries the exact gradient and Hessian (used only by the
//! verifiers, never by the quantum pipeline) and the two constants the
//! convergence analysis depends on: `L`, an ∞-norm bound on the gradient over
//! the domain, and `M`, a spectral-norm bound on the Hessian.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `center ± half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

// Grid points are computed as x + mu*(g - g0); allow a few ulps at the faces.
const FACE_TOLERANCE: f64 = 1e-12;

impl DomainBox {
    pub fn new(center: Vec<f64>, half_width: Vec<f64>) -> Result<Self> {
        if center.len() != half_width.len() {
            return Err(Error::Dimension {
                expected: center.len(),
                got: half_width.len(),
            });
        }
        if center.is_empty() {
            return Err(Error::InvalidArgument(
                "domain must have at least one axis".into(),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "domain center must be finite".into(),
            ));
        }
        for &w in &half_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositive {
                    name: "half_width",
                    value: w,
                });
            }
        }
        Ok(Self { center, half_width })
    }

    /// The cube `[-r, r]^p`.
    pub fn cube(p: usize, r: f64) -> Result<Self> {
        Self::new(vec![0.0; p], vec![r; p])
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.center.iter().zip(&self.half_width))
                .all(|(&xi, (&c, &w))| {
                    (xi - c).abs() <= w + FACE_TOLERANCE * w.max(c.abs()).max(1.0)
                })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionKind {
    /// `constant + a·x`
    Linear {
        coefficients: Vec<f64>,
        constant: f64,
    },
    /// `constant + a·x + ½ xᵀHx` with symmetric `H`
    Quadratic {
        linear: Vec<f64>,
        hessian: Vec<Vec<f64>>,
        constant: f64,
    },
    /// `amplitude · sin(b·x)`
    Sinusoidal { amplitude: f64, frequency: Vec<f64> },
}

impl FunctionKind {
    pub fn dimension(&self) -> usize {
        match self {
            FunctionKind::Linear { coefficients, .. } => coefficients.len(),
            FunctionKind::Quadratic { linear, .. } => linear.len(),
            FunctionKind::Sinusoidal { frequency, .. } => frequency.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.dimension();
        if p == 0 {
            return Err(Error::InvalidArgument(
                "function needs at least one variable".into(),
            ));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            FunctionKind::Linear {
                coefficients,
                constant,
            } => {
                if !finite(coefficients) || !constant.is_finite() {
                    return Err(Error::InvalidArgument(
                        "non-finite linear coefficients".into(),
                    ));
                }
            }
            FunctionKind::Quadratic {
                linear,
                hessian,
                constant,
            } => {
                if hessian.len() != p {
                    return Err(Error::Dimension {
                        expected: p,
                        got: hessian.len(),
                    });
                }
                for row in hessian {
                    if row.len() != p {
                        return Err(Error::Dimension {
                            expected: p,
                            got: row.len(),
                        });
                    }
                    if !finite(row) {
                        return Err(Error::InvalidArgument("non-finite Hessian entry".into()));
                    }
                }
                for (i, row) in hessian.iter().enumerate() {
                    for (j, &h_ij) in row.iter().enumerate().take(i) {
                        if h_ij != hessian[j][i] {
                            return Err(Error::InvalidArgument(format!(
                                "Hessian must be symmetric (entries ({i},{j}) and ({j},{i}) differ)"
                            )));
                        }
                    }
                }
                if !finite(linear) || !constant.is_finite() {
                    return Err(Error::InvalidArgument(
                        "non-finite quadratic coefficients".into(),
                    ));
                }
            }
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            } => {
                if !finite(frequency) || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(
                        "non-finite sinusoid parameters".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Black-box objective with certified bounds `L` (gradient, ∞-norm) and
/// `M` (Hessian, spectral norm) over its domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionModel {
    kind: FunctionKind,
    domain: DomainBox,
    grad_bound: f64,
    hess_bound: f64,
}

impl FunctionModel {
    /// Builds a model whose `L` and `M` are derived from the coefficients.
    ///
    /// Linear: `L = max|a_m|`, `M = 0`. Quadratic: `L` is the exact maximum of
    /// `|a_m + (Hx)_m|` over the box and `M` the spectral norm of `H`.
    /// Sinusoidal: `L = |c|·max|b_m|`, `M = |c|·‖b‖²`.
    pub fn new(kind: FunctionKind, domain: DomainBox) -> Result<Self> {
        kind.validate()?;
        if domain.dimension() != kind.dimension() {
            return Err(Error::Dimension {
                expected: kind.dimension(),
                got: domain.dimension(),
            });
        }
        let (grad_bound, hess_bound) = derived_bounds(&kind, &domain);
        Ok(Self {
            kind,
            domain,
            grad_bound,
            hess_bound,
        })
    }

    /// Builds a model with caller-certified bounds. The bounds are trusted;
    /// they must dominate the true values on the domain for the analysis to apply.
    pub fn with_bounds(
        kind: FunctionKind,
        domain: DomainBox,
        grad_bound: f64,
        hess_bound: f64,
    ) -> Result<Self> {
        let mut model = Self::new(kind, domain)?;
        for (name, value) in [("grad_bound", grad_bound), ("hess_bound", hess_bound)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        model.grad_bound = grad_bound;
        model.hess_bound = hess_bound;
        Ok(model)
    }

    pub fn linear(coefficients: Vec<f64>, constant: f64, domain: DomainBox) -> Result<Self> {
        Self::new(
            FunctionKind::Linear {
                coefficients,
                constant,
            },
            domain,
        )
    }

    pub fn quadratic(
        linear: Vec<f64>,
        hessian: Vec<Vec<f64>>,
        constant: f64,
        domain: DomainBox,
    ) -> Result<Self> {
        Self::new(
            FunctionKind::Quadratic {
                linear,
                hessian,
                constant,
            },
            domain,
        )
    }

    pub fn sinusoidal(amplitude: f64, frequency: Vec<f64>, domain: DomainBox) -> Result<Self> {
        Self::new(
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            },
            domain,
        )
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    /// `L`
    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    /// `M`
    pub fn hess_bound(&self) -> f64 {
        self.hess_bound
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, FunctionKind::Linear { .. })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension());
        match &self.kind {
            FunctionKind::Linear {
                coefficients,
                constant,
            } => constant + dot(coefficients, x),
            FunctionKind::Quadratic {
                linear,
                hessian,
                constant,
            } => {
                let quad: f64 = hessian
                    .iter()
                    .zip(x)
                    .map(|(row, &xi)| xi * dot(row, x))
                    .sum();
                constant + dot(linear, x) + 0.5 * quad
            }
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            } => amplitude * dot(frequency, x).sin(),
        }
    }

    /// Exact gradient. Verification only.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            FunctionKind::Linear { coefficients, .. } => coefficients.clone(),
            FunctionKind::Quadratic {
                linear, hessian, ..
            } => linear
                .iter()
                .zip(hessian)
                .map(|(a, row)| a + dot(row, x))
                .collect(),
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            } => {
                let c = amplitude * dot(frequency, x).cos();
                frequency.iter().map(|b| c * b).collect()
            }
        }
    }

    /// Exact Hessian. Verification only.
    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let p = self.dimension();
        match &self.kind {
            FunctionKind::Linear { .. } => vec![vec![0.0; p]; p],
            FunctionKind::Quadratic { hessian, .. } => hessian.clone(),
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            } => {
                let s = -amplitude * dot(frequency, x).sin();
                frequency
                    .iter()
                    .map(|bi| frequency.iter().map(|bj| s * bi * bj).collect())
                    .collect()
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn derived_bounds(kind: &FunctionKind, domain: &DomainBox) -> (f64, f64) {
    match kind {
        FunctionKind::Linear { coefficients, .. } => (max_abs(coefficients), 0.0),
        FunctionKind::Quadratic {
            linear, hessian, ..
        } => {
            let grad = linear
                .iter()
                .zip(hessian)
                .map(|(a, row)| {
                    let at_center = a + dot(row, &domain.center);
                    let spread: f64 = row
                        .iter()
                        .zip(&domain.half_width)
                        .map(|(h, w)| h.abs() * w)
                        .sum();
                    at_center.abs() + spread
                })
                .fold(0.0, f64::max);
            (grad, spectral_norm(hessian))
        }
        FunctionKind::Sinusoidal {
            amplitude,
            frequency,
        } => {
            let c = amplitude.abs();
            (c * max_abs(frequency), c * dot(frequency, frequency))
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Spectral norm of a symmetric matrix: the largest absolute eigenvalue.
pub fn spectral_norm(symmetric: &[Vec<f64>]) -> f64 {
    let p = symmetric.len();
    if p == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(p, p, |i, j| symmetric[i][j]);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(0.0, |acc: f64, e| acc.max(e.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(p: usize) -> DomainBox {
        DomainBox::cube(p, 1.0).unwrap()
    }

    #[test]
    fn quadratic_hess_bound_is_spectral_norm() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let m = FunctionModel::quadratic(
            vec![0.0, 0.0],
            vec![vec![2.0, 1.0], vec![1.0, 2.0]],
            0.0,
            unit_box(2),
        )
        .unwrap();
        assert!((m.hess_bound() - 3.0).abs() < 1e-12);

        let neg = FunctionModel::quadratic(vec![0.0], vec![vec![-1.0]], 0.0, unit_box(1)).unwrap();
        assert_eq!(neg.hess_bound(), 1.0);
    }

    #[test]
    fn quadratic_grad_bound_is_exact_box_maximum() {
        // gradient 0.3 + x on [-1, 1]: max |.| = 1.3
        let m = FunctionModel::quadratic(vec![0.3], vec![vec![1.0]], 0.0, unit_box(1)).unwrap();
        assert!((m.grad_bound() - 1.3).abs() < 1e-15);
    }

    #[test]
    fn sampled_gradients_respect_bound() {
        let models = [
            FunctionModel::linear(vec![0.5, -2.0], 1.0, unit_box(2)).unwrap(),
            FunctionModel::quadratic(
                vec![0.1, -0.2],
                vec![vec![1.0, 0.5], vec![0.5, -0.7]],
                0.0,
                unit_box(2),
            )
            .unwrap(),
            FunctionModel::sinusoidal(0.8, vec![1.5, -2.5], unit_box(2)).unwrap(),
        ];
        for m in &models {
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                    let g = m.gradient(&x);
                    let inf = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    assert!(inf <= m.grad_bound() + 1e-12, "{m:?} at {x:?}");
                    let h = spectral_norm(&m.hessian(&x));
                    assert!(h <= m.hess_bound() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let m = FunctionModel::sinusoidal(0.8, vec![1.5, -2.5], unit_box(2)).unwrap();
        let x = [0.2, -0.3];
        let step = 1e-6;
        let g = m.gradient(&x);
        for k in 0..2 {
            let mut hi = x;
            let mut lo = x;
            hi[k] += step;
            lo[k] -= step;
            let fd = (m.evaluate(&hi) - m.evaluate(&lo)) / (2.0 * step);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_asymmetric_hessian_and_bad_domain() {
        assert!(FunctionModel::quadratic(
            vec![0.0, 0.0],
            vec![vec![1.0, 2.0], vec![0.0, 1.0]],
            0.0,
            unit_box(2)
        )
        .is_err());
        assert!(DomainBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(FunctionModel::linear(vec![1.0], 0.0, unit_box(2)).is_err());
    }

    #[test]
    fn domain_contains_faces() {
        let d = unit_box(1);
        assert!(d.contains(&[1.0]));
        assert!(d.contains(&[-1.0]));
        assert!(!d.contains(&[1.001]));
    }
}

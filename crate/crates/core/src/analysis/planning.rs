//! Parameter planning and the five sufficient conditions for success.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::AlgorithmParams;

/// Accuracy target: margin `γ`, ∞-norm tolerance `δ`, amplitude target `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySpec {
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl AccuracySpec {
    pub fn new(gamma: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            delta,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("gamma", self.gamma), ("delta", self.delta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositive { name, value });
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `(2+ε)/3`, the target for the leakage-only projection.
    pub fn leakage_target(&self) -> f64 {
        (2.0 + self.epsilon) / 3.0
    }

    /// `(1−ε)/3`, the budget for each of the curvature and precision errors.
    pub fn error_budget(&self) -> f64 {
        (1.0 - self.epsilon) / 3.0
    }
}

/// One inequality `lhs ≤ rhs` (or `lhs ≥ rhs`).
///
/// `slack` is the distance by which the inequality is satisfied: `rhs − lhs`
/// for upper bounds and `lhs − rhs` for lower bounds, so it is non-negative
/// exactly when the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityCheck {
    fn at_most(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            holds: slack >= 0.0,
            lhs,
            rhs,
            slack,
            note: None,
        }
    }

    fn at_least(lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            holds: slack >= 0.0,
            lhs,
            rhs,
            slack,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// `4^{n−1}πλMμ²/√5 ≤ (1−ε)/3`
    pub nonlinearity: InequalityCheck,
    /// `2πλν ≤ (1−ε)/3`
    pub precision: InequalityCheck,
    /// `2^{n−1}μ ≤ γ`
    pub margin: InequalityCheck,
    /// `1/(2λμ) ≥ L + δ`
    pub bandwidth: InequalityCheck,
    /// `csc(πλμδ) ≤ √(2ⁿ(1 − ((2+ε)/3)^{2/p}))`
    pub leakage: InequalityCheck,
}

impl InequalityReport {
    pub fn entries(&self) -> [(&'static str, &InequalityCheck); 5] {
        [
            ("nonlinearity", &self.nonlinearity),
            ("precision", &self.precision),
            ("margin", &self.margin),
            ("bandwidth", &self.bandwidth),
            ("leakage", &self.leakage),
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.entries().iter().all(|(_, c)| c.holds)
    }

    pub fn violated(&self) -> Vec<&'static str> {
        self.entries()
            .iter()
            .filter(|(_, c)| !c.holds)
            .map(|(name, _)| *name)
            .collect()
    }
}

fn leakage_rhs(n: u32, epsilon: f64, p: usize) -> f64 {
    let target = (2.0 + epsilon) / 3.0;
    (f64::from(n).exp2() * (1.0 - target.powf(2.0 / p as f64))).sqrt()
}

pub fn check_inequalities(
    params: &AlgorithmParams,
    spec: &AccuracySpec,
    grad_bound: f64,
    hess_bound: f64,
    p: usize,
) -> InequalityReport {
    let AlgorithmParams { n, nu, lambda, mu } = *params;
    let half_side = f64::from(n - 1).exp2();
    let budget = spec.error_budget();

    let nonlinearity = InequalityCheck::at_most(
        4f64.powi(n as i32 - 1) * PI * lambda * hess_bound * mu * mu / 5f64.sqrt(),
        budget,
    );
    let precision = InequalityCheck::at_most(2.0 * PI * lambda * nu, budget);
    let margin = InequalityCheck::at_most(half_side * mu, spec.gamma);
    let bandwidth = InequalityCheck::at_least(1.0 / (2.0 * lambda * mu), grad_bound + spec.delta);

    let angle = PI * lambda * mu * spec.delta;
    let rhs = leakage_rhs(n, spec.epsilon, p);
    let leakage = if angle > 0.0 && angle < PI {
        InequalityCheck::at_most(1.0 / angle.sin(), rhs)
    } else {
        let csc = (1.0 / angle.sin()).abs();
        InequalityCheck {
            holds: false,
            lhs: if csc.is_finite() { csc } else { f64::MAX },
            rhs,
            slack: f64::MIN,
            note: Some(format!(
                "πλμδ = {angle} lies outside (0, π); the cosecant bound does not apply"
            )),
        }
    };

    InequalityReport {
        nonlinearity,
        precision,
        margin,
        bandwidth,
        leakage,
    }
}

/// Closed-form parameter choice meeting all five inequalities:
///
/// * `n = ⌈−log₂(sin²(πδ/(2(L+δ)))·(1 − ((2+ε)/3)^{2/p}))⌉`
/// * `λ = max{2^{n−2}/(γ(L+δ)), 3·4^{n−2}πM/(√5(L+δ)²(1−ε))}`
/// * `μ = 1/(2λ(L+δ))`
/// * `ν = (1−ε)/(6πλ)`
///
/// Several inequalities hold with equality at these values; the result is
/// nudged by a few ulps where rounding would otherwise leave them violated.
pub fn select_parameters(
    spec: &AccuracySpec,
    grad_bound: f64,
    hess_bound: f64,
    p: usize,
    max_grid_bits: u32,
) -> Result<AlgorithmParams> {
    spec.validate()?;
    if p == 0 {
        return Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    for (name, value) in [("L", grad_bound), ("M", hess_bound)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and non-negative, got {value}"
            )));
        }
    }
    let AccuracySpec {
        gamma,
        delta,
        epsilon,
    } = *spec;
    let width = grad_bound + delta;

    let sin = (PI * delta / (2.0 * width)).sin();
    let leak = 1.0 - ((2.0 + epsilon) / 3.0).powf(2.0 / p as f64);
    let raw_n = (-(sin * sin * leak).log2()).ceil();
    if !raw_n.is_finite() {
        return Err(Error::InvalidArgument(
            "accuracy target is degenerate".into(),
        ));
    }
    let mut n = raw_n.max(1.0) as u32;
    let total = u64::from(n) * p as u64;
    if total > u64::from(max_grid_bits) {
        return Err(Error::MemoryGuard {
            bits: total.min(u64::from(u32::MAX)) as u32,
            limit: max_grid_bits,
        });
    }

    let lambda_for = |n: u32| {
        let margin_branch = f64::from(n as i32 - 2).exp2() / (gamma * width);
        let curvature_branch = 3.0 * 4f64.powi(n as i32 - 2) * PI * hess_bound
            / (5f64.sqrt() * width * width * (1.0 - epsilon));
        margin_branch.max(curvature_branch)
    };
    let mut lambda = lambda_for(n);
    let mut mu = 1.0 / (2.0 * lambda * width);
    let mut nu = (1.0 - epsilon) / (6.0 * PI * lambda);

    for _ in 0..64 {
        let params = AlgorithmParams::new(n, nu, lambda, mu)?;
        let report = check_inequalities(&params, spec, grad_bound, hess_bound, p);
        if report.all_hold() {
            return Ok(params);
        }
        if !report.leakage.holds && report.leakage.lhs > report.leakage.rhs * (1.0 + 1e-9) {
            break;
        }
        if !report.leakage.holds {
            n += 1;
            lambda = lambda_for(n);
            mu = 1.0 / (2.0 * lambda * width);
            nu = (1.0 - epsilon) / (6.0 * PI * lambda);
            continue;
        }
        if !report.nonlinearity.holds || !report.margin.holds {
            lambda = lambda.next_up();
            mu = 1.0 / (2.0 * lambda * width);
            nu = (1.0 - epsilon) / (6.0 * PI * lambda);
        }
        if !report.bandwidth.holds {
            mu = mu.next_down();
        }
        if !report.precision.holds {
            nu = nu.next_down();
        }
    }
    Err(Error::InvalidArgument(
        "closed-form parameters failed to satisfy the sufficient conditions".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> AccuracySpec {
        AccuracySpec::new(1.0, 0.5, 0.5).unwrap()
    }

    #[test]
    fn worked_example() {
        let params = select_parameters(&worked(), 1.0, 1.0, 1, 26).unwrap();
        assert_eq!(params.n, 4);
        // reference values from a 40-digit evaluation of the closed forms
        assert!((params.lambda - 59.945_085_704_880_86).abs() < 1e-9);
        assert!((params.mu - 5.560_644_870_446_696e-3).abs() < 1e-15);
        assert!((params.nu - 4.425_020_589_550_919e-4).abs() < 1e-15);
        let report = check_inequalities(&params, &worked(), 1.0, 1.0, 1);
        assert!(report.all_hold(), "{report:?}");
        for (_, c) in report.entries() {
            assert!(c.slack >= 0.0);
        }
    }

    #[test]
    fn zero_curvature_uses_margin_branch() {
        let spec = AccuracySpec::new(0.3, 0.2, 0.7).unwrap();
        let params = select_parameters(&spec, 1.5, 0.0, 2, 26).unwrap();
        let expected = f64::from(params.n as i32 - 2).exp2() / (0.3 * 1.7);
        assert!((params.lambda - expected).abs() <= 4.0 * f64::EPSILON * expected);
        let report = check_inequalities(&params, &spec, 1.5, 0.0, 2);
        assert!(report.all_hold());
        assert_eq!(report.nonlinearity.lhs, 0.0);
        assert!((report.nonlinearity.slack - 0.1).abs() < 1e-15);
    }

    #[test]
    fn always_satisfies_inequalities() {
        for &p in &[1usize, 2, 3] {
            for &l in &[0.0, 0.3, 1.0, 7.0] {
                for &m in &[0.0, 0.5, 1.0, 20.0] {
                    for &(gamma, delta, eps) in
                        &[(1.0, 0.5, 0.5), (0.1, 0.05, 0.9), (2.0, 1.3, 0.1)]
                    {
                        let spec = AccuracySpec::new(gamma, delta, eps).unwrap();
                        match select_parameters(&spec, l, m, p, 64) {
                            Ok(params) => {
                                let report = check_inequalities(&params, &spec, l, m, p);
                                assert!(
                                    report.all_hold(),
                                    "{spec:?} L={l} M={m} p={p}: {report:?}"
                                );
                            }
                            Err(Error::MemoryGuard { .. }) => {}
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn doubling_mu_breaks_tight_margin() {
        let params = select_parameters(&worked(), 1.0, 1.0, 1, 26).unwrap();
        // make the margin tight, then double mu
        let tight_gamma = f64::from(params.n - 1).exp2() * params.mu;
        let spec = AccuracySpec::new(tight_gamma, 0.5, 0.5).unwrap();
        assert!(check_inequalities(&params, &spec, 1.0, 1.0, 1).margin.holds);
        let doubled = AlgorithmParams {
            mu: 2.0 * params.mu,
            ..params
        };
        let report = check_inequalities(&doubled, &spec, 1.0, 1.0, 1);
        assert!(!report.margin.holds);
        assert!(report.violated().contains(&"margin"));
    }

    #[test]
    fn leakage_outside_principal_range_is_reported() {
        let params = AlgorithmParams::new(3, 1e-3, 1.0, 4.0).unwrap();
        let spec = AccuracySpec::new(1.0, 0.5, 0.5).unwrap();
        let report = check_inequalities(&params, &spec, 0.0, 0.0, 1);
        assert!(!report.leakage.holds);
        assert!(report.leakage.note.is_some());
    }

    #[test]
    fn rejects_invalid_spec_and_guard() {
        assert!(AccuracySpec::new(1.0, 0.5, 1.0).is_err());
        assert!(AccuracySpec::new(0.0, 0.5, 0.5).is_err());
        let tight = AccuracySpec::new(1.0, 1e-4, 0.99).unwrap();
        assert!(matches!(
            select_parameters(&tight, 1.0, 1.0, 4, 26),
            Err(Error::MemoryGuard { .. })
        ));
    }

    #[test]
    fn tighter_delta_means_more_bits_and_finer_precision() {
        let loose =
            select_parameters(&AccuracySpec::new(1.0, 0.5, 0.5).unwrap(), 1.0, 1.0, 1, 40).unwrap();
        let tight = select_parameters(&AccuracySpec::new(1.0, 0.05, 0.5).unwrap(), 1.0, 1.0, 1, 40)
            .unwrap();
        assert!(tight.n > loose.n);
        assert!(tight.nu < loose.nu);
    }
}

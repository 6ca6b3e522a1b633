//! Classical finite-difference baseline for call-count comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FunctionModel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferenceScheme {
    /// `(f(x + s·e_m) − f(x))/s`, `p + 1` calls.
    #[default]
    Forward,
    /// `(f(x + s·e_m) − f(x − s·e_m))/(2s)`, `2p` calls.
    Central,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEstimate {
    pub gradient: Vec<f64>,
    pub calls: u64,
}

struct Counted<'a> {
    model: &'a FunctionModel,
    calls: u64,
}

impl Counted<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        if !self.model.domain().contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        self.calls += 1;
        Ok(self.model.evaluate(x))
    }
}

pub fn classical_baseline(
    model: &FunctionModel,
    x: &[f64],
    step: f64,
    scheme: DifferenceScheme,
) -> Result<BaselineEstimate> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::NonPositive {
            name: "step",
            value: step,
        });
    }
    if x.len() != model.dimension() {
        return Err(Error::Dimension {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    let mut f = Counted { model, calls: 0 };
    let mut gradient = Vec::with_capacity(x.len());
    match scheme {
        DifferenceScheme::Forward => {
            let fx = f.eval(x)?;
            for m in 0..x.len() {
                let mut fwd = x.to_vec();
                fwd[m] += step;
                gradient.push((f.eval(&fwd)? - fx) / step);
            }
        }
        DifferenceScheme::Central => {
            for m in 0..x.len() {
                let mut fwd = x.to_vec();
                let mut back = x.to_vec();
                fwd[m] += step;
                back[m] -= step;
                gradient.push((f.eval(&fwd)? - f.eval(&back)?) / (2.0 * step));
            }
        }
    }
    Ok(BaselineEstimate {
        gradient,
        calls: f.calls,
    })
}

//! Experiment configuration, loaded from JSON.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qgrad_core::analysis::AccuracySpec;
use qgrad_core::grid::DEFAULT_MAX_GRID_BITS;
use qgrad_core::model::{DomainBox, FunctionKind, FunctionModel};
use qgrad_core::oracle::GroupMode;
use qgrad_core::params::AlgorithmParams;
use qgrad_core::sparse::PhaseVariant;

pub const DEFAULT_PROB_FLOOR: f64 = 1e-12;
pub const DEFAULT_SHOTS: u64 = 1000;

/// The objective. The first three kinds derive `L` and `M` from their
/// coefficients; `custom-coefficients` wraps any of them with caller-declared
/// bounds, which are trusted as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Linear {
        coefficients: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    Quadratic {
        linear: Vec<f64>,
        hessian: Vec<Vec<f64>>,
        #[serde(default)]
        constant: f64,
    },
    Sinusoidal {
        amplitude: f64,
        frequency: Vec<f64>,
    },
    CustomCoefficients {
        form: FunctionKind,
        grad_bound: f64,
        hess_bound: f64,
    },
}

impl FunctionSpec {
    pub fn dimension(&self) -> usize {
        match self {
            FunctionSpec::Linear { coefficients, .. } => coefficients.len(),
            FunctionSpec::Quadratic { linear, .. } => linear.len(),
            FunctionSpec::Sinusoidal { frequency, .. } => frequency.len(),
            FunctionSpec::CustomCoefficients { form, .. } => form.dimension(),
        }
    }

    pub fn build(&self, domain: DomainBox) -> qgrad_core::Result<FunctionModel> {
        match self.clone() {
            FunctionSpec::Linear {
                coefficients,
                constant,
            } => FunctionModel::linear(coefficients, constant, domain),
            FunctionSpec::Quadratic {
                linear,
                hessian,
                constant,
            } => FunctionModel::quadratic(linear, hessian, constant, domain),
            FunctionSpec::Sinusoidal {
                amplitude,
                frequency,
            } => FunctionModel::sinusoidal(amplitude, frequency, domain),
            FunctionSpec::CustomCoefficients {
                form,
                grad_bound,
                hess_bound,
            } => FunctionModel::with_bounds(form, domain, grad_bound, hess_bound),
        }
    }

    /// Extends the function to `p` variables by repeating its coefficients.
    /// A Hessian is repeated as diagonal blocks.
    pub fn broadcast(&self, p: usize) -> FunctionSpec {
        match self {
            FunctionSpec::Linear {
                coefficients,
                constant,
            } => FunctionSpec::Linear {
                coefficients: cycle(coefficients, p),
                constant: *constant,
            },
            FunctionSpec::Quadratic {
                linear,
                hessian,
                constant,
            } => FunctionSpec::Quadratic {
                linear: cycle(linear, p),
                hessian: block_diagonal(hessian, p),
                constant: *constant,
            },
            FunctionSpec::Sinusoidal {
                amplitude,
                frequency,
            } => FunctionSpec::Sinusoidal {
                amplitude: *amplitude,
                frequency: cycle(frequency, p),
            },
            FunctionSpec::CustomCoefficients {
                form,
                grad_bound,
                hess_bound,
            } => {
                let inner = FunctionSpec::from_kind(form).broadcast(p);
                FunctionSpec::CustomCoefficients {
                    form: inner.into_kind(),
                    grad_bound: *grad_bound,
                    hess_bound: *hess_bound,
                }
            }
        }
    }

    fn from_kind(kind: &FunctionKind) -> FunctionSpec {
        match kind.clone() {
            FunctionKind::Linear {
                coefficients,
                constant,
            } => FunctionSpec::Linear {
                coefficients,
                constant,
            },
            FunctionKind::Quadratic {
                linear,
                hessian,
                constant,
            } => FunctionSpec::Quadratic {
                linear,
                hessian,
                constant,
            },
            FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            } => FunctionSpec::Sinusoidal {
                amplitude,
                frequency,
            },
        }
    }

    fn into_kind(self) -> FunctionKind {
        match self {
            FunctionSpec::Linear {
                coefficients,
                constant,
            } => FunctionKind::Linear {
                coefficients,
                constant,
            },
            FunctionSpec::Quadratic {
                linear,
                hessian,
                constant,
            } => FunctionKind::Quadratic {
                linear,
                hessian,
                constant,
            },
            FunctionSpec::Sinusoidal {
                amplitude,
                frequency,
            } => FunctionKind::Sinusoidal {
                amplitude,
                frequency,
            },
            FunctionSpec::CustomCoefficients { form, .. } => form,
        }
    }
}

fn cycle(v: &[f64], p: usize) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    (0..p).map(|i| v[i % v.len()]).collect()
}

fn block_diagonal(h: &[Vec<f64>], p: usize) -> Vec<Vec<f64>> {
    let k = h.len().max(1);
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| if i / k == j / k { h[i % k][j % k] } else { 0.0 })
                .collect()
        })
        .collect()
}

/// One entry of a benchmark sweep. Missing fields inherit from the base
/// config; `p` alone broadcasts the base function, domain and point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<AccuracySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<AlgorithmParams>,
}

fn default_seed() -> u64 {
    0
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

fn default_max_grid_bits() -> u32 {
    DEFAULT_MAX_GRID_BITS
}

fn default_prob_floor() -> f64 {
    DEFAULT_PROB_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: FunctionSpec,
    pub domain: DomainBox,
    pub point: Vec<f64>,
    /// Drives parameter choice unless `params` is given, in which case it
    /// only supplies the targets the explicit parameters are checked against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<AccuracySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<AlgorithmParams>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub group_mode: GroupMode,
    #[serde(default)]
    pub phase_variant: PhaseVariant,
    #[serde(default = "default_max_grid_bits")]
    pub max_grid_bits: u32,
    #[serde(default = "default_prob_floor")]
    pub prob_floor: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file, or the `config` field of a saved result record.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let inner = match value.get("config") {
            Some(config) if value.get("command").is_some() => config.clone(),
            _ => value,
        };
        let config: ExperimentConfig = serde_json::from_value(inner)
            .with_context(|| format!("invalid config in {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.function.dimension();
        if self.point.len() != p || self.domain.dimension() != p {
            bail!(
                "function has {p} variables but point has {} and domain has {}",
                self.point.len(),
                self.domain.dimension()
            );
        }
        if !(self.prob_floor.is_finite() && self.prob_floor >= 0.0 && self.prob_floor < 1.0) {
            bail!("prob_floor must lie in [0, 1), got {}", self.prob_floor);
        }
        if let Some(a) = &self.accuracy {
            a.validate()?;
        }
        if let Some(params) = &self.params {
            params.validate()?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.point.len()
    }

    pub fn model(&self) -> Result<FunctionModel> {
        self.function
            .build(self.domain.clone())
            .context("model: invalid function or domain")
    }

    /// The config for one sweep entry, with the entry folded in and the
    /// sweep itself removed.
    pub fn sweep_config(&self, entry: &SweepEntry) -> Result<ExperimentConfig> {
        let mut cfg = self.clone();
        cfg.sweep.clear();
        if let Some(p) = entry.p {
            if p == 0 {
                bail!("sweep entry has p = 0");
            }
            cfg.function = self.function.broadcast(p);
            cfg.domain = DomainBox::new(
                cycle(&self.domain.center, p),
                cycle(&self.domain.half_width, p),
            )?;
            cfg.point = cycle(&self.point, p);
        }
        if let Some(f) = &entry.function {
            cfg.function = f.clone();
        }
        if let Some(d) = &entry.domain {
            cfg.domain = d.clone();
        }
        if let Some(x) = &entry.point {
            cfg.point = x.clone();
        }
        if entry.accuracy.is_some() {
            cfg.accuracy = entry.accuracy;
        }
        if entry.params.is_some() {
            cfg.params = entry.params;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

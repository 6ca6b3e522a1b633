//! The gradient estimator `A(n, ν, λ, μ; x)`.
//!
//! Starting from `|c_d(x)⟩|0⟩|0⟩` the state passes through
//! `QFT, U₊, U_f, U_R, U_f⁻¹, U₊⁻¹, QFT` (in that order of application).
//! The domain and range registers return to their initial basis states, and
//! measuring the grid register yields a gradient estimate via [`decode_gradient`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Direction, GridShape, GridState, DEFAULT_MAX_GRID_BITS};
use crate::model::FunctionModel;
use crate::oracle::{DomainLabel, FixedPointFormat, GroupMode, OracleCounter, RangeWord};
use crate::params::AlgorithmParams;
use crate::sparse::{PhaseVariant, SparseState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub group_mode: GroupMode,
    pub phase_variant: PhaseVariant,
    pub max_grid_bits: u32,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            group_mode: GroupMode::ModularAdd,
            phase_variant: PhaseVariant::Direct,
            max_grid_bits: DEFAULT_MAX_GRID_BITS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Grid register after the final transform.
    pub chi: GridState,
    pub oracle_calls: u64,
    pub format: FixedPointFormat,
}

/// Checks that every grid point `x + μ(g − g₀)` lies in the domain.
pub fn check_margin(model: &FunctionModel, x: &[f64], params: &AlgorithmParams) -> Result<()> {
    if x.len() != model.dimension() {
        return Err(Error::Dimension {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    let reach = params.mu * params.grid_shape(x.len())?.center();
    let domain = model.domain();
    for m in 0..x.len() {
        for sign in [-1.0, 1.0] {
            let mut corner = x.to_vec();
            corner[m] += sign * reach;
            let c = domain.center[m];
            let w = domain.half_width[m];
            let within = (corner[m] - c).abs() <= w * (1.0 + 1e-12) + 1e-15;
            if !within {
                return Err(Error::OutsideDomain { point: corner });
            }
        }
    }
    Ok(())
}

/// Range bound covering every grid value: `|f(x)| + L·p·(2^{n−1}−½)μ`, plus one step.
pub fn range_bound(model: &FunctionModel, x: &[f64], params: &AlgorithmParams) -> Result<f64> {
    let shape = params.grid_shape(x.len())?;
    let spread = model.grad_bound() * x.len() as f64 * shape.center() * params.mu;
    Ok(model.evaluate(x).abs() + spread + params.nu)
}

/// Fixed-point format with step `ν` sized so no grid value overflows.
pub fn plan_range_format(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    mode: GroupMode,
) -> Result<FixedPointFormat> {
    FixedPointFormat::plan(params.nu, range_bound(model, x, params)?, mode)
}

pub fn run_pipeline(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    params.validate()?;
    check_margin(model, x, params)?;
    let format = plan_range_format(model, x, params, options.group_mode)?;
    run_pipeline_with_format(model, x, params, &format, options)
}

/// Runs the pipeline with a caller-supplied range format.
pub fn run_pipeline_with_format(
    model: &FunctionModel,
    x: &[f64],
    params: &AlgorithmParams,
    format: &FixedPointFormat,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let shape = GridShape::guarded(params.n, x.len(), options.max_grid_bits)?;
    let start = DomainLabel::encode(x);
    let mut counter = OracleCounter::new();

    let state = SparseState::basis(shape, start.clone(), RangeWord::IDENTITY, 0)?;
    let state = state.apply_qft(Direction::Forward);
    let state = state.apply_u_plus()?;
    let state = state.apply_u_f(model, format, params, &mut counter)?;
    let state = state.apply_phase_rotation(params.lambda, format, options.phase_variant)?;
    let state = state.apply_u_f_inverse(model, format, params, &mut counter)?;
    let state = state.apply_u_plus_inverse()?;
    let state = state.apply_qft(Direction::Forward);

    let chi = state.collapse_to_grid(&start, RangeWord::IDENTITY)?;
    Ok(PipelineOutput {
        chi,
        oracle_calls: counter.calls(),
        format: *format,
    })
}

/// `c_{g,m}`: folds indices at or above `2^{n−1}` to the positive side.
pub fn decode_component(g: usize, params: &AlgorithmParams) -> Result<f64> {
    let side = 1usize << params.n;
    if g >= side {
        return Err(Error::GridIndex {
            index: g,
            limit: side,
        });
    }
    let scale = side as f64 * params.lambda * params.mu;
    Ok(if g < side / 2 {
        -(g as f64) / scale
    } else {
        (side - g) as f64 / scale
    })
}

/// `c_g`
pub fn decode_gradient(index: &[usize], params: &AlgorithmParams) -> Result<Vec<f64>> {
    index.iter().map(|&g| decode_component(g, params)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub outcome: Vec<usize>,
    pub gradient: Vec<f64>,
    pub probability: f64,
}

/// Every outcome with probability above `floor`, in row-major order.
pub fn outcome_distribution(
    chi: &GridState,
    params: &AlgorithmParams,
    floor: f64,
) -> Result<Vec<GradientEstimate>> {
    let shape = chi.shape();
    chi.probabilities()
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > floor)
        .map(|(flat, probability)| {
            let outcome = shape.decode(flat)?;
            Ok(GradientEstimate {
                gradient: decode_gradient(&outcome, params)?,
                outcome,
                probability,
            })
        })
        .collect()
}

/// Draws `shots` outcomes by inverse CDF over the row-major order.
pub fn sample_measurements(
    chi: &GridState,
    shots: u64,
    seed: u64,
    params: &AlgorithmParams,
) -> Result<Vec<GradientEstimate>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let norm_sqr = chi.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-8 {
        return Err(Error::Unnormalized { norm_sqr });
    }
    let shape = chi.shape();
    let probs = chi.probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    // outcomes past the last positive weight are never drawn
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: Vec<Option<GradientEstimate>> = vec![None; probs.len()];
    let mut out = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let flat = cdf.partition_point(|&c| c <= u).min(last);
        let estimate = match &cache[flat] {
            Some(e) => e.clone(),
            None => {
                let outcome = shape.decode(flat)?;
                let e = GradientEstimate {
                    gradient: decode_gradient(&outcome, params)?,
                    outcome,
                    probability: probs[flat],
                };
                cache[flat] = Some(e.clone());
                e
            }
        };
        out.push(estimate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainBox;

    fn exact_linear() -> (FunctionModel, AlgorithmParams) {
        let model =
            FunctionModel::linear(vec![-1.0], 0.0, DomainBox::cube(1, 1.0).unwrap()).unwrap();
        (model, AlgorithmParams::new(3, 1e-9, 1.0, 0.125).unwrap())
    }

    #[test]
    fn decode_examples() {
        let params = AlgorithmParams::new(3, 1e-3, 1.0, 0.125).unwrap();
        assert_eq!(decode_component(0, &params).unwrap(), 0.0);
        assert_eq!(decode_component(1, &params).unwrap(), -1.0);
        assert_eq!(decode_component(4, &params).unwrap(), 4.0);
        assert_eq!(decode_component(7, &params).unwrap(), 1.0);
        assert!(decode_component(8, &params).is_err());
    }

    #[test]
    fn decode_is_injective_and_nearly_symmetric() {
        let params = AlgorithmParams::new(4, 1e-3, 1.0, 1.0 / 16.0).unwrap();
        let mut values: Vec<f64> = (0..16)
            .map(|g| decode_component(g, &params).unwrap())
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        assert_eq!(values.len(), 16);
        let half = 0.5 / (params.lambda * params.mu);
        assert!(values.iter().all(|&v| v > -half && v <= half));
        // symmetric about zero apart from the extreme positive value
        for &v in &values[..15] {
            assert!(values.contains(&-v));
        }
        assert_eq!(values[15], half);
    }

    #[test]
    fn exact_linear_is_point_mass() {
        let (model, params) = exact_linear();
        let out = run_pipeline(&model, &[0.0], &params, &PipelineOptions::default()).unwrap();
        assert_eq!(out.oracle_calls, 2);
        assert!(out.chi.amplitudes()[1].norm_sqr() >= 1.0 - 1e-6);
        assert!((out.chi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_function_gives_zero_outcome() {
        let model =
            FunctionModel::linear(vec![0.0], 3.5, DomainBox::cube(1, 1.0).unwrap()).unwrap();
        let params = AlgorithmParams::new(4, 1e-9, 2.0, 0.05).unwrap();
        let out = run_pipeline(&model, &[0.1], &params, &PipelineOptions::default()).unwrap();
        assert!(out.chi.amplitudes()[0].norm_sqr() >= 1.0 - 1e-6);
    }

    #[test]
    fn margin_violation_is_domain_error() {
        let (model, _) = exact_linear();
        let params = AlgorithmParams::new(3, 1e-9, 1.0, 0.5).unwrap();
        assert!(matches!(
            run_pipeline(&model, &[0.0], &params, &PipelineOptions::default()),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn guard_applies() {
        let (model, params) = exact_linear();
        let opts = PipelineOptions {
            max_grid_bits: 2,
            ..PipelineOptions::default()
        };
        assert!(matches!(
            run_pipeline(&model, &[0.0], &params, &opts),
            Err(Error::MemoryGuard { .. })
        ));
    }

    #[test]
    fn sampling_basis_state_and_determinism() {
        let params = AlgorithmParams::new(3, 1e-3, 1.0, 0.125).unwrap();
        let shape = params.grid_shape(1).unwrap();
        let chi = GridState::basis(shape, 6).unwrap();
        let shots = sample_measurements(&chi, 100, 7, &params).unwrap();
        assert!(shots
            .iter()
            .all(|s| s.outcome == vec![6] && s.gradient == vec![2.0]));

        let spread = GridState::basis(shape, 0).unwrap().qft(Direction::Forward);
        let a = sample_measurements(&spread, 500, 42, &params).unwrap();
        let b = sample_measurements(&spread, 500, 42, &params).unwrap();
        assert_eq!(a, b);
        let c = sample_measurements(&spread, 500, 43, &params).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_rejects_bad_input() {
        let params = AlgorithmParams::new(2, 1e-3, 1.0, 0.25).unwrap();
        let shape = params.grid_shape(1).unwrap();
        let zero = GridState::zeros(shape);
        assert!(matches!(
            sample_measurements(&zero, 10, 0, &params),
            Err(Error::Unnormalized { .. })
        ));
        let basis = GridState::basis(shape, 0).unwrap();
        assert!(sample_measurements(&basis, 0, 0, &params).is_err());
    }

    #[test]
    fn distribution_respects_floor() {
        let params = AlgorithmParams::new(2, 1e-3, 1.0, 0.25).unwrap();
        let shape = params.grid_shape(2).unwrap();
        let chi = GridState::basis(shape, 0).unwrap().qft(Direction::Forward);
        let all = outcome_distribution(&chi, &params, 0.0).unwrap();
        assert_eq!(all.len(), 16);
        let total: f64 = all.iter().map(|e| e.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(outcome_distribution(&chi, &params, 0.5).unwrap().is_empty());
    }
}

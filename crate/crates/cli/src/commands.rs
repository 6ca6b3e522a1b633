//! The four subcommands. Each takes a validated config and returns records;
//! none of them print or write files.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use qgrad_core::analysis::{
    check_inequalities, classical_baseline, select_parameters, verify_theorem, DifferenceScheme,
    InequalityReport,
};
use qgrad_core::model::FunctionModel;
use qgrad_core::params::AlgorithmParams;
use qgrad_core::pipeline::{
    outcome_distribution, run_pipeline, sample_measurements, PipelineOptions,
};

use crate::config::ExperimentConfig;
use crate::record::{Command, GridFootprint, ResultRecord, SampleSummary, Timings};

#[derive(Debug, Clone, Copy, Default)]
pub struct CommandOptions {
    /// Record wall-clock timings. Off by default so records are reproducible.
    pub timings: bool,
    /// Finite-difference scheme for the classical column of `bench`.
    pub difference: DifferenceScheme,
}

fn pipeline_options(config: &ExperimentConfig) -> PipelineOptions {
    PipelineOptions {
        group_mode: config.group_mode,
        phase_variant: config.phase_variant,
        max_grid_bits: config.max_grid_bits,
    }
}

const GUARD_HINT: &str = "raise --max-grid-bits, loosen delta or epsilon, or shrink the dimension";

/// Explicit params if given, otherwise the planner's choice for the accuracy spec.
pub fn resolve_params(config: &ExperimentConfig, model: &FunctionModel) -> Result<AlgorithmParams> {
    if let Some(params) = config.params {
        return Ok(params);
    }
    let Some(accuracy) = &config.accuracy else {
        bail!("config needs either `accuracy` or `params`");
    };
    select_parameters(
        accuracy,
        model.grad_bound(),
        model.hess_bound(),
        config.dimension(),
        config.max_grid_bits,
    )
    .with_context(|| format!("planner: no admissible parameters ({GUARD_HINT})"))
}

fn inequalities(
    config: &ExperimentConfig,
    model: &FunctionModel,
    params: &AlgorithmParams,
) -> Option<InequalityReport> {
    config.accuracy.as_ref().map(|accuracy| {
        check_inequalities(
            params,
            accuracy,
            model.grad_bound(),
            model.hess_bound(),
            config.dimension(),
        )
    })
}

fn inequality_failures(report: &Option<InequalityReport>) -> Vec<String> {
    report
        .iter()
        .flat_map(|r| r.violated())
        .map(|name| format!("inequality {name} violated"))
        .collect()
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn base_record(
    command: Command,
    config: &ExperimentConfig,
    model: &FunctionModel,
    params: AlgorithmParams,
) -> ResultRecord {
    ResultRecord {
        command,
        config: config.clone(),
        params,
        grid: GridFootprint::new(&params, config.dimension()),
        true_gradient: model.gradient(&config.point),
        inequalities: None,
        oracle_calls: None,
        classical_calls: None,
        prob_floor: config.prob_floor,
        distribution: None,
        samples: None,
        theorem: None,
        timings: None,
        failures: Vec::new(),
    }
}

/// Parameters and the inequality report, without executing anything.
pub fn cmd_plan(config: &ExperimentConfig, opts: &CommandOptions) -> Result<ResultRecord> {
    let start = Instant::now();
    if config.accuracy.is_none() {
        bail!("plan needs an `accuracy` section");
    }
    let model = config.model()?;
    let params = resolve_params(config, &model)?;
    let mut record = base_record(Command::Plan, config, &model, params);
    record.inequalities = inequalities(config, &model, &params);
    record.failures = inequality_failures(&record.inequalities);
    if record.grid.bits > config.max_grid_bits {
        record.failures.push(format!(
            "grid needs {} bits, above the guard of {} ({GUARD_HINT})",
            record.grid.bits, config.max_grid_bits
        ));
    }
    if opts.timings {
        record.timings = Some(Timings {
            total: seconds(start),
            ..Timings::default()
        });
    }
    Ok(record)
}

/// Executes the estimator, records the outcome distribution and draws samples.
pub fn cmd_run(config: &ExperimentConfig, opts: &CommandOptions) -> Result<ResultRecord> {
    let start = Instant::now();
    let model = config.model()?;
    let params = resolve_params(config, &model)?;
    let mut record = base_record(Command::Run, config, &model, params);
    record.inequalities = inequalities(config, &model, &params);
    record.failures = inequality_failures(&record.inequalities);

    let t = Instant::now();
    let output = run_pipeline(&model, &config.point, &params, &pipeline_options(config))
        .with_context(|| {
            format!("pipeline: execution failed ({GUARD_HINT} if the grid is too large)")
        })?;
    let pipeline_time = seconds(t);
    record.oracle_calls = Some(output.oracle_calls);
    record.distribution = Some(outcome_distribution(
        &output.chi,
        &params,
        config.prob_floor,
    )?);
    if config.shots > 0 {
        let samples = sample_measurements(&output.chi, config.shots, config.seed, &params)
            .context("sampling")?;
        record.samples = Some(SampleSummary::from_samples(
            &samples,
            config.seed,
            &record.true_gradient,
            config.accuracy.map(|a| a.delta),
        ));
    }
    if opts.timings {
        record.timings = Some(Timings {
            total: seconds(start),
            pipeline: Some(pipeline_time),
            analysis: None,
        });
    }
    Ok(record)
}

/// Runs the estimator and checks every bound of the success guarantee.
pub fn cmd_verify(config: &ExperimentConfig, opts: &CommandOptions) -> Result<ResultRecord> {
    let start = Instant::now();
    let Some(accuracy) = config.accuracy else {
        bail!("verify needs an `accuracy` section");
    };
    let model = config.model()?;
    let params = resolve_params(config, &model)?;
    let mut record = base_record(Command::Verify, config, &model, params);
    let report = verify_theorem(
        &model,
        &config.point,
        &params,
        &accuracy,
        &pipeline_options(config),
    )
    .context("analysis: verification failed")?;
    record.inequalities = Some(report.inequalities.clone());
    record.oracle_calls = Some(report.oracle_calls);
    record.failures = report.failures();
    record.theorem = Some(report);
    if opts.timings {
        record.timings = Some(Timings {
            total: seconds(start),
            pipeline: None,
            analysis: Some(seconds(start)),
        });
    }
    Ok(record)
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// Comma-separated table, header first.
    pub table: String,
    pub records: Vec<ResultRecord>,
}

pub const BENCH_HEADER: &str =
    "index,p,delta,epsilon,n,nu,lambda,mu,grid_bits,quantum_calls,classical_calls";

/// Quantum versus classical oracle calls over the config's sweep.
pub fn cmd_bench(config: &ExperimentConfig, opts: &CommandOptions) -> Result<BenchOutput> {
    let mut table = String::from(BENCH_HEADER);
    table.push('\n');
    let mut records = Vec::with_capacity(config.sweep.len());
    for (index, entry) in config.sweep.iter().enumerate() {
        let start = Instant::now();
        let cfg = config
            .sweep_config(entry)
            .with_context(|| format!("sweep entry {index}"))?;
        let model = cfg.model()?;
        let params =
            resolve_params(&cfg, &model).with_context(|| format!("sweep entry {index}"))?;
        let mut record = base_record(Command::Bench, &cfg, &model, params);
        record.inequalities = inequalities(&cfg, &model, &params);
        record.failures = inequality_failures(&record.inequalities);

        let t = Instant::now();
        let output = run_pipeline(&model, &cfg.point, &params, &pipeline_options(&cfg))
            .with_context(|| format!("sweep entry {index}: pipeline failed ({GUARD_HINT})"))?;
        let pipeline_time = seconds(t);
        let baseline = classical_baseline(&model, &cfg.point, params.mu, opts.difference)
            .with_context(|| format!("sweep entry {index}: classical baseline"))?;
        record.oracle_calls = Some(output.oracle_calls);
        record.classical_calls = Some(baseline.calls);
        if opts.timings {
            record.timings = Some(Timings {
                total: seconds(start),
                pipeline: Some(pipeline_time),
                analysis: None,
            });
        }

        let fmt_opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            table,
            "{index},{},{},{},{},{},{},{},{},{},{}",
            cfg.dimension(),
            fmt_opt(cfg.accuracy.map(|a| a.delta)),
            fmt_opt(cfg.accuracy.map(|a| a.epsilon)),
            params.n,
            params.nu,
            params.lambda,
            params.mu,
            record.grid.bits,
            output.oracle_calls,
            baseline.calls,
        )
        .expect("writing to a String");
        records.push(record);
    }
    Ok(BenchOutput { table, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    const WORKED: &str = r#"{
        "function": {"kind": "quadratic", "linear": [0.0], "hessian": [[1.0]]},
        "domain": {"center": [0.0], "half_width": [1.0]},
        "point": [0.0],
        "accuracy": {"gamma": 1.0, "delta": 0.5, "epsilon": 0.5}
    }"#;

    #[test]
    fn plan_worked_example() {
        let record = cmd_plan(&config(WORKED), &CommandOptions::default()).unwrap();
        assert_eq!(record.params.n, 4);
        assert!(record.inequalities.as_ref().unwrap().all_hold());
        assert!(record.passed());
        assert!(record.oracle_calls.is_none());
    }

    #[test]
    fn plan_without_accuracy_is_an_error() {
        let cfg = config(
            r#"{"function": {"kind": "linear", "coefficients": [1.0]},
                "domain": {"center": [0.0], "half_width": [1.0]}, "point": [0.0],
                "params": {"n": 3, "nu": 1e-9, "lambda": 1.0, "mu": 0.125}}"#,
        );
        assert!(cmd_plan(&cfg, &CommandOptions::default()).is_err());
    }

    #[test]
    fn run_top_outcome_within_delta() {
        let cfg = config(WORKED);
        let record = cmd_run(&cfg, &CommandOptions::default()).unwrap();
        let dist = record.distribution.unwrap();
        let top = dist
            .iter()
            .max_by(|a, b| a.probability.total_cmp(&b.probability))
            .unwrap();
        assert!((top.gradient[0] - record.true_gradient[0]).abs() < 0.5);
        assert_eq!(record.oracle_calls, Some(2));
        assert!(record.timings.is_none());
    }

    #[test]
    fn bench_empty_sweep() {
        let out = cmd_bench(&config(WORKED), &CommandOptions::default()).unwrap();
        assert_eq!(out.table.trim(), BENCH_HEADER);
        assert!(out.records.is_empty());
    }
}

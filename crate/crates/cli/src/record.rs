//! Structured results written by every subcommand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qgrad_core::analysis::{InequalityReport, TheoremReport};
use qgrad_core::params::AlgorithmParams;
use qgrad_core::pipeline::GradientEstimate;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Plan,
    Run,
    Verify,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Run => "run",
            Command::Verify => "verify",
            Command::Bench => "bench",
        }
    }
}

/// Size of the dense grid register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFootprint {
    /// `p·n`
    pub bits: u32,
    /// `2^{pn}`
    pub outcomes: u64,
    /// Bytes for one vector of complex amplitudes.
    pub bytes: u64,
}

impl GridFootprint {
    pub fn new(params: &AlgorithmParams, p: usize) -> Self {
        let bits = params.n.saturating_mul(p as u32);
        let outcomes = 1u64.checked_shl(bits).unwrap_or(u64::MAX);
        Self {
            bits,
            outcomes,
            bytes: outcomes.saturating_mul(16),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCount {
    pub outcome: Vec<usize>,
    pub gradient: Vec<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub shots: u64,
    pub seed: u64,
    /// Distinct outcomes drawn, most frequent first (ties in row-major order).
    pub counts: Vec<OutcomeCount>,
    pub mean_gradient: Vec<f64>,
    /// Fraction of shots within `δ` of the true gradient, when `δ` is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_window_fraction: Option<f64>,
}

impl SampleSummary {
    pub fn from_samples(
        samples: &[GradientEstimate],
        seed: u64,
        truth: &[f64],
        delta: Option<f64>,
    ) -> Self {
        let mut tally: BTreeMap<Vec<usize>, (Vec<f64>, u64)> = BTreeMap::new();
        let mut mean = vec![0.0; truth.len()];
        let mut inside = 0u64;
        for s in samples {
            tally
                .entry(s.outcome.clone())
                .or_insert_with(|| (s.gradient.clone(), 0))
                .1 += 1;
            for (m, g) in mean.iter_mut().zip(&s.gradient) {
                *m += g;
            }
            if let Some(d) = delta {
                if s.gradient.iter().zip(truth).all(|(g, t)| (g - t).abs() < d) {
                    inside += 1;
                }
            }
        }
        let shots = samples.len() as u64;
        for m in &mut mean {
            *m /= shots.max(1) as f64;
        }
        let mut counts: Vec<OutcomeCount> = tally
            .into_iter()
            .map(|(outcome, (gradient, count))| OutcomeCount {
                outcome,
                gradient,
                count,
            })
            .collect();
        counts.sort_by_key(|c| std::cmp::Reverse(c.count));
        Self {
            shots,
            seed,
            counts,
            mean_gradient: mean,
            in_window_fraction: delta.map(|_| inside as f64 / shots.max(1) as f64),
        }
    }
}

/// Wall-clock durations in seconds. Only recorded on request, so that
/// repeated runs produce identical records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: Command,
    pub config: ExperimentConfig,
    pub params: AlgorithmParams,
    pub grid: GridFootprint,
    pub true_gradient: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_calls: Option<u64>,
    pub prob_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<GradientEstimate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    /// Asserted checks that failed. Empty means the command succeeded.
    pub failures: Vec<String>,
}

impl ResultRecord {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate(outcome: usize, gradient: f64) -> GradientEstimate {
        GradientEstimate {
            outcome: vec![outcome],
            gradient: vec![gradient],
            probability: 0.0,
        }
    }

    #[test]
    fn summary_counts_and_window() {
        let samples = vec![
            estimate(1, -1.0),
            estimate(2, -2.0),
            estimate(1, -1.0),
            estimate(0, 0.0),
        ];
        let s = SampleSummary::from_samples(&samples, 7, &[-1.0], Some(0.5));
        assert_eq!(s.shots, 4);
        assert_eq!(s.counts[0].outcome, vec![1]);
        assert_eq!(s.counts[0].count, 2);
        assert_eq!(s.counts.len(), 3);
        assert_eq!(s.mean_gradient, vec![-1.0]);
        assert_eq!(s.in_window_fraction, Some(0.5));
    }

    #[test]
    fn footprint() {
        let params = AlgorithmParams::new(4, 1e-3, 1.0, 0.1).unwrap();
        let f = GridFootprint::new(&params, 2);
        assert_eq!((f.bits, f.outcomes, f.bytes), (8, 256, 4096));
    }
}

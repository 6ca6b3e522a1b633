//! Sparse tracking of the domain ⊗ range ⊗ grid system.
//!
//! Every operator in the pipeline is either a permutation of basis triples,
//! a diagonal phase, or a transform acting on the grid register alone, so the
//! state stays a short list of `(label, word, grid index, amplitude)` terms.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{phase_rotation_gates, rotation_turns};
use crate::grid::{Direction, GridShape, GridState};
use crate::model::FunctionModel;
use crate::oracle::{oracle_value, DomainLabel, FixedPointFormat, OracleCounter, RangeWord};
use crate::params::AlgorithmParams;

/// How the phase rotation on the range register is carried out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseVariant {
    /// Multiply by `e^{2πiλ c_r(r)}`.
    #[default]
    Direct,
    /// One `diag(1, e^{2πiλa₁2^k})` gate per register bit; differs from
    /// `Direct` by the global phase `e^{2πiλa₀}`.
    PerBit,
}

impl std::str::FromStr for PhaseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(PhaseVariant::Direct),
            "per-bit" => Ok(PhaseVariant::PerBit),
            other => Err(Error::InvalidArgument(format!(
                "unknown phase variant `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: DomainLabel,
    pub word: RangeWord,
    pub grid: usize,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    shape: GridShape,
    terms: Vec<Term>,
}

impl SparseState {
    /// Validates grid indices and rejects duplicate basis triples.
    pub fn new(shape: GridShape, terms: Vec<Term>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(terms.len());
        for t in &terms {
            if t.grid >= shape.len() {
                return Err(Error::GridIndex {
                    index: t.grid,
                    limit: shape.len(),
                });
            }
            if seen.insert((&t.label, t.word, t.grid), ()).is_some() {
                return Err(Error::DuplicateTerm { grid: t.grid });
            }
        }
        Ok(Self { shape, terms })
    }

    pub fn basis(
        shape: GridShape,
        label: DomainLabel,
        word: RangeWord,
        grid: usize,
    ) -> Result<Self> {
        Self::new(
            shape,
            vec![Term {
                label,
                word,
                grid,
                amplitude: Complex64::new(1.0, 0.0),
            }],
        )
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    fn map_terms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Term) -> Result<Term>,
    {
        let terms = self.terms.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape: self.shape,
            terms,
        })
    }

    /// Grid-register QFT. Terms sharing `(label, word)` are transformed as
    /// one dense grid vector; groups keep first-appearance order.
    pub fn apply_qft(&self, direction: Direction) -> Self {
        let mut index: HashMap<(&DomainLabel, RangeWord), usize> = HashMap::new();
        let mut groups: Vec<(&DomainLabel, RangeWord, Vec<Complex64>)> = Vec::new();
        for t in &self.terms {
            let slot = *index.entry((&t.label, t.word)).or_insert_with(|| {
                groups.push((
                    &t.label,
                    t.word,
                    vec![Complex64::new(0.0, 0.0); self.shape.len()],
                ));
                groups.len() - 1
            });
            groups[slot].2[t.grid] += t.amplitude;
        }
        let mut terms = Vec::with_capacity(groups.len() * self.shape.len());
        for (label, word, amps) in groups {
            let out = GridState::from_amplitudes(self.shape, amps)
                .expect("group vectors have grid length")
                .qft(direction);
            terms.extend(
                out.amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(g, &amplitude)| Term {
                        label: label.clone(),
                        word,
                        grid: g,
                        amplitude,
                    }),
            );
        }
        Self {
            shape: self.shape,
            terms,
        }
    }

    /// `U₊`: `|d⟩|r⟩|g⟩ → |c_p(d, g)⟩|r⟩|g⟩`.
    pub fn apply_u_plus(&self) -> Result<Self> {
        self.map_terms(|t| {
            Ok(Term {
                label: t.label.shift(t.grid, &self.shape)?,
                ..t.clone()
            })
        })
    }

    /// `U₊⁻¹`
    pub fn apply_u_plus_inverse(&self) -> Result<Self> {
        self.map_terms(|t| {
            Ok(Term {
                label: t.label.unshift(t.grid, &self.shape)?,
                ..t.clone()
            })
        })
    }

    fn oracle_pass(
        &self,
        model: &FunctionModel,
        format: &FixedPointFormat,
        params: &AlgorithmParams,
        counter: &mut OracleCounter,
        inverse: bool,
    ) -> Result<Self> {
        let out = self.map_terms(|t| {
            let value = oracle_value(model, format, params, &t.label)?;
            let word = if inverse {
                format.sub(t.word, value)?
            } else {
                format.add(t.word, value)?
            };
            Ok(Term { word, ..t.clone() })
        })?;
        counter.record();
        Ok(out)
    }

    /// `U_f`: `|d⟩|r⟩|g⟩ → |d⟩|r + c_f(d)⟩|g⟩`. One oracle call.
    pub fn apply_u_f(
        &self,
        model: &FunctionModel,
        format: &FixedPointFormat,
        params: &AlgorithmParams,
        counter: &mut OracleCounter,
    ) -> Result<Self> {
        self.oracle_pass(model, format, params, counter, false)
    }

    /// `U_f⁻¹`: `|d⟩|r⟩|g⟩ → |d⟩|r − c_f(d)⟩|g⟩`. One oracle call.
    pub fn apply_u_f_inverse(
        &self,
        model: &FunctionModel,
        format: &FixedPointFormat,
        params: &AlgorithmParams,
        counter: &mut OracleCounter,
    ) -> Result<Self> {
        self.oracle_pass(model, format, params, counter, true)
    }

    /// `U_R`: phase `e^{2πiλ c_r(r)}` on each term (per-bit variant drops
    /// the global factor `e^{2πiλa₀}`).
    pub fn apply_phase_rotation(
        &self,
        lambda: f64,
        format: &FixedPointFormat,
        variant: PhaseVariant,
    ) -> Result<Self> {
        match variant {
            PhaseVariant::Direct => self.map_terms(|t| {
                let turns = rotation_turns(lambda, format.offset(), format.step(), t.word.0);
                let phase = Complex64::from_polar(1.0, 2.0 * PI * turns);
                Ok(Term {
                    amplitude: t.amplitude * phase,
                    ..t.clone()
                })
            }),
            PhaseVariant::PerBit => {
                let gates = phase_rotation_gates(format.bits(), lambda, format.step())?;
                self.map_terms(|t| {
                    Ok(Term {
                        amplitude: t.amplitude * gates.basis_phase(t.word.0)?,
                        ..t.clone()
                    })
                })
            }
        }
    }

    /// Extracts the grid register after checking the state factorizes as
    /// `|expected_label⟩|expected_word⟩|χ⟩`. Any other term is an error,
    /// whatever its amplitude.
    pub fn collapse_to_grid(
        &self,
        expected_label: &DomainLabel,
        expected_word: RangeWord,
    ) -> Result<GridState> {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.shape.len()];
        for t in &self.terms {
            if &t.label != expected_label || t.word != expected_word {
                return Err(Error::ResidualEntanglement {
                    label: t.label.to_string(),
                    word: t.word.0,
                    grid: t.grid,
                });
            }
            amps[t.grid] += t.amplitude;
        }
        GridState::from_amplitudes(self.shape, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainBox;
    use crate::oracle::{GroupMode, LabelTag};
    use proptest::prelude::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn setup() -> (FunctionModel, FixedPointFormat, AlgorithmParams, GridShape) {
        let model = FunctionModel::quadratic(
            vec![0.4],
            vec![vec![1.0]],
            0.1,
            DomainBox::cube(1, 1.0).unwrap(),
        )
        .unwrap();
        let format = FixedPointFormat::plan(1e-3, 2.0, GroupMode::ModularAdd).unwrap();
        let params = AlgorithmParams::new(3, 1e-3, 2.0, 0.1).unwrap();
        (model, format, params, params.grid_shape(1).unwrap())
    }

    /// A random-ish state over shifted labels and words, deterministic in `seed`.
    fn scrambled_state(shape: GridShape, seed: u64) -> SparseState {
        let base = DomainLabel::encode(&[0.0]);
        let mut terms = Vec::new();
        for g in 0..shape.len() {
            let s = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(g as u64 * 1442695040888963407);
            let label = if s.is_multiple_of(3) {
                base.clone()
            } else {
                base.shift((s as usize / 7) % shape.len(), &shape).unwrap()
            };
            let amp = Complex64::new(
                ((s >> 11) % 1000) as f64 / 1000.0 - 0.5,
                ((s >> 23) % 1000) as f64 / 1000.0 - 0.5,
            );
            terms.push(Term {
                label,
                word: RangeWord((s >> 40) % 256),
                grid: g,
                amplitude: amp,
            });
        }
        let norm = terms
            .iter()
            .map(|t| t.amplitude.norm_sqr())
            .sum::<f64>()
            .sqrt();
        for t in &mut terms {
            t.amplitude /= norm;
        }
        SparseState::new(shape, terms).unwrap()
    }

    #[test]
    fn rejects_duplicates() {
        let shape = GridShape::new(2, 1).unwrap();
        let t = Term {
            label: DomainLabel::encode(&[0.0]),
            word: RangeWord(0),
            grid: 1,
            amplitude: one(),
        };
        assert!(matches!(
            SparseState::new(shape, vec![t.clone(), t.clone()]),
            Err(Error::DuplicateTerm { grid: 1 })
        ));
        assert!(SparseState::new(shape, vec![Term { grid: 4, ..t }]).is_err());
    }

    #[test]
    fn u_plus_relabels_and_inverts() {
        let (_, _, _, shape) = setup();
        let base = DomainLabel::encode(&[0.0]);
        let s = SparseState::basis(shape, base.clone(), RangeWord(0), 5).unwrap();
        let out = s.apply_u_plus().unwrap();
        assert_eq!(out.terms()[0].label.tag(), LabelTag::Shifted(5));
        assert_eq!(out.terms()[0].amplitude, one());
        assert_eq!(out.apply_u_plus_inverse().unwrap(), s);

        for seed in 0..10 {
            let s = scrambled_state(shape, seed);
            let out = s.apply_u_plus().unwrap();
            assert_eq!(out.len(), s.len());
            assert_eq!(out.apply_u_plus_inverse().unwrap(), s);
        }
    }

    #[test]
    fn u_f_adds_oracle_word_and_counts_once() {
        let (model, format, params, shape) = setup();
        let label = DomainLabel::encode(&[0.0]).shift(6, &shape).unwrap();
        let expected = oracle_value(&model, &format, &params, &label).unwrap();
        let s = SparseState::basis(shape, label.clone(), RangeWord(0), 6).unwrap();
        let mut counter = OracleCounter::new();
        let out = s.apply_u_f(&model, &format, &params, &mut counter).unwrap();
        assert_eq!(out.terms()[0].word, expected);
        assert_eq!(counter.calls(), 1);

        let many = s.apply_qft(Direction::Forward).apply_u_plus().unwrap();
        let mut counter = OracleCounter::new();
        let applied = many
            .apply_u_f(&model, &format, &params, &mut counter)
            .unwrap();
        assert_eq!(counter.calls(), 1, "one call per operator, not per term");
        let back = applied
            .apply_u_f_inverse(&model, &format, &params, &mut counter)
            .unwrap();
        assert_eq!(counter.calls(), 2);
        assert_eq!(back, many);
    }

    #[test]
    fn xor_u_f_is_self_inverse() {
        let (model, format, params, shape) = setup();
        let format = format.with_mode(GroupMode::Xor);
        let s = SparseState::basis(shape, DomainLabel::encode(&[0.0]), RangeWord(0), 0)
            .unwrap()
            .apply_qft(Direction::Forward)
            .apply_u_plus()
            .unwrap();
        let mut counter = OracleCounter::new();
        let twice = s
            .apply_u_f(&model, &format, &params, &mut counter)
            .and_then(|t| t.apply_u_f(&model, &format, &params, &mut counter))
            .unwrap();
        assert_eq!(twice, s);
    }

    #[test]
    fn phase_rotation_examples() {
        let shape = GridShape::new(1, 1).unwrap();
        let zero_offset = FixedPointFormat::new(4, 0.0, 0.5, GroupMode::ModularAdd).unwrap();
        let label = DomainLabel::encode(&[0.0]);
        let s = SparseState::basis(shape, label.clone(), RangeWord(0), 0).unwrap();
        let out = s
            .apply_phase_rotation(0.7, &zero_offset, PhaseVariant::Direct)
            .unwrap();
        assert!((out.terms()[0].amplitude - one()).norm() < 1e-15);

        // word 2 decodes to 1.0; λ = 0.25 gives a quarter turn
        let s = SparseState::basis(shape, label, RangeWord(2), 0).unwrap();
        let out = s
            .apply_phase_rotation(0.25, &zero_offset, PhaseVariant::Direct)
            .unwrap();
        assert!((out.terms()[0].amplitude - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn per_bit_matches_direct_up_to_global_phase(
            bits in 1u32..=12,
            lambda in 0.01f64..100.0,
            step_exp in -6.0f64..0.0,
            seed in any::<u64>(),
        ) {
            let step = 10f64.powf(step_exp);
            let format = FixedPointFormat::new(bits, -step * ((bits - 1) as f64).exp2(), step, GroupMode::ModularAdd).unwrap();
            let shape = GridShape::new(3, 1).unwrap();
            let mut s = scrambled_state(shape, seed);
            s.terms.iter_mut().for_each(|t| t.word = RangeWord(t.word.0 & format.max_word()));
            let s = SparseState::new(shape, s.terms.clone()).unwrap_or(s);
            let direct = s.apply_phase_rotation(lambda, &format, PhaseVariant::Direct).unwrap();
            let per_bit = s.apply_phase_rotation(lambda, &format, PhaseVariant::PerBit).unwrap();
            let global = Complex64::from_polar(1.0, 2.0 * PI * rotation_turns(lambda, format.offset(), 0.0, 0));
            for (a, b) in direct.terms().iter().zip(per_bit.terms()) {
                prop_assert!((a.amplitude - b.amplitude * global).norm() < 1e-12);
            }
            prop_assert!((direct.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn operators_preserve_norm_and_weight_multiset(seed in any::<u64>()) {
            let (model, format, params, shape) = setup();
            let s = scrambled_state(shape, seed);
            let sorted = |st: &SparseState| {
                let mut w: Vec<f64> = st.terms().iter().map(|t| t.amplitude.norm_sqr()).collect();
                w.sort_by(f64::total_cmp);
                w
            };
            let plus = s.apply_u_plus().unwrap();
            prop_assert_eq!(sorted(&plus), sorted(&s));
            let mut counter = OracleCounter::new();
            let uf = s.apply_u_f(&model, &format, &params, &mut counter).unwrap();
            prop_assert_eq!(sorted(&uf), sorted(&s));
            let rot = s.apply_phase_rotation(params.lambda, &format, PhaseVariant::Direct).unwrap();
            prop_assert!((rot.norm_sqr() - 1.0).abs() < 1e-12);
            let q = s.apply_qft(Direction::Forward);
            prop_assert!((q.norm_sqr() - 1.0).abs() < 1e-12);
            let back = q.apply_qft(Direction::Inverse);
            prop_assert!((back.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_examples() {
        let shape = GridShape::new(3, 1).unwrap();
        let base = DomainLabel::encode(&[0.0]);
        let s = SparseState::basis(shape, base.clone(), RangeWord(0), 5).unwrap();
        let grid = s.collapse_to_grid(&base, RangeWord(0)).unwrap();
        assert_eq!(grid, GridState::basis(shape, 5).unwrap());

        let stray = Term {
            label: base.shift(2, &shape).unwrap(),
            word: RangeWord(0),
            grid: 2,
            amplitude: Complex64::new(1e-15, 0.0),
        };
        let mut terms = s.terms().to_vec();
        terms.push(stray);
        let bad = SparseState::new(shape, terms).unwrap();
        assert!(matches!(
            bad.collapse_to_grid(&base, RangeWord(0)),
            Err(Error::ResidualEntanglement { grid: 2, .. })
        ));
        assert!(s.collapse_to_grid(&base, RangeWord(1)).is_err());
    }
}

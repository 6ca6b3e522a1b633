//! Oracle model: fixed-point range registers, domain labels and the function oracle.
//!
//! A range register of `N` bits holds a word `w` that decodes to
//! `a₀ + a₁·w`. Words form a group under either modular addition (default)
//! or bitwise XOR; the oracle adds the quantized function value into the
//! register with that group operation, which is what makes evaluation
//! reversible.
//!
//! Domain points are represented symbolically. A [`DomainLabel`] is a base
//! point `x` together with a tag: `Base` stands for `x` itself and
//! `Shifted(g)` for the grid point `x + μ(g − g₀)`. The grid-shift map swaps
//! `Base` and `Shifted(g)` and fixes every other label, so it is an
//! involution for each `g` and represents shifted points exactly.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::model::FunctionModel;
use crate::params::AlgorithmParams;

pub const MAX_WORD_BITS: u32 = 62;

/// Group structure on range words.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupMode {
    /// Addition modulo `2^N`.
    #[default]
    #[serde(rename = "modular", alias = "modular-add")]
    ModularAdd,
    /// Bitwise exclusive-or; every word is its own inverse.
    Xor,
}

impl std::str::FromStr for GroupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modular" | "modular-add" => Ok(GroupMode::ModularAdd),
            "xor" => Ok(GroupMode::Xor),
            other => Err(Error::InvalidArgument(format!(
                "unknown group mode `{other}`"
            ))),
        }
    }
}

/// Contents of the range register as an unsigned integer.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct RangeWord(pub u64);

impl RangeWord {
    pub const IDENTITY: RangeWord = RangeWord(0);

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for RangeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `N`-bit binary fixed-point encoding `a₀ + a₁·w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointFormat {
    bits: u32,
    offset: f64,
    step: f64,
    mode: GroupMode,
}

impl FixedPointFormat {
    pub fn new(bits: u32, offset: f64, step: f64, mode: GroupMode) -> Result<Self> {
        if bits == 0 || bits > MAX_WORD_BITS {
            return Err(Error::WordWidth { bits });
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::NonPositive {
                name: "step",
                value: step,
            });
        }
        if !offset.is_finite() {
            return Err(Error::InvalidArgument("offset must be finite".into()));
        }
        Ok(Self {
            bits,
            offset,
            step,
            mode,
        })
    }

    /// Plans a two's-complement style format with step `nu` that covers
    /// `[-range_bound, range_bound]`: `N` is the smallest width with
    /// `ν(2^N − 1) ≥ 2·range_bound` and `a₀ = −ν·2^{N−1}`.
    pub fn plan(nu: f64, range_bound: f64, mode: GroupMode) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::NonPositive {
                name: "nu",
                value: nu,
            });
        }
        if !(range_bound.is_finite() && range_bound > 0.0) {
            return Err(Error::NonPositive {
                name: "range_bound",
                value: range_bound,
            });
        }
        let target = 2.0 * range_bound;
        let bits = (1..=MAX_WORD_BITS)
            .find(|&b| nu * ((b as f64).exp2() - 1.0) >= target)
            .ok_or(Error::WordWidth {
                bits: (target / nu + 1.0).log2().ceil() as u32,
            })?;
        let offset = -nu * ((bits - 1) as f64).exp2();
        Self::new(bits, offset, nu, mode)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `a₀`
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `a₁`
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn mode(&self) -> GroupMode {
        self.mode
    }

    pub fn with_mode(self, mode: GroupMode) -> Self {
        Self { mode, ..self }
    }

    pub fn max_word(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    pub fn min_value(&self) -> f64 {
        self.offset
    }

    pub fn max_value(&self) -> f64 {
        self.decode(RangeWord(self.max_word()))
    }

    /// `c_r`: `a₀ + a₁·w`.
    pub fn decode(&self, word: RangeWord) -> f64 {
        self.offset + self.step * word.0 as f64
    }

    /// Nearest representable word, ties to the even word.
    ///
    /// Values within half a step beyond either end still round onto the end word.
    pub fn quantize(&self, value: f64) -> Result<RangeWord> {
        let overflow = || Error::RangeOverflow {
            value,
            min: self.min_value(),
            max: self.max_value(),
        };
        if !value.is_finite() {
            return Err(overflow());
        }
        let k = ((value - self.offset) / self.step).round_ties_even();
        if k < 0.0 || k > self.max_word() as f64 {
            return Err(overflow());
        }
        Ok(RangeWord(k as u64))
    }

    fn check_width(&self, word: RangeWord) -> Result<()> {
        if word.0 > self.max_word() {
            return Err(Error::WordOverflow {
                word: word.0,
                bits: self.bits,
            });
        }
        Ok(())
    }

    /// Group operation `r1 + r2`.
    pub fn add(&self, r1: RangeWord, r2: RangeWord) -> Result<RangeWord> {
        self.check_width(r1)?;
        self.check_width(r2)?;
        Ok(match self.mode {
            GroupMode::ModularAdd => RangeWord(r1.0.wrapping_add(r2.0) & self.max_word()),
            GroupMode::Xor => RangeWord(r1.0 ^ r2.0),
        })
    }

    /// Group operation `r1 − r2`.
    pub fn sub(&self, r1: RangeWord, r2: RangeWord) -> Result<RangeWord> {
        self.check_width(r1)?;
        self.check_width(r2)?;
        Ok(match self.mode {
            GroupMode::ModularAdd => RangeWord(r1.0.wrapping_sub(r2.0) & self.max_word()),
            GroupMode::Xor => RangeWord(r1.0 ^ r2.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelTag {
    Base,
    /// Shifted by the flat grid index.
    Shifted(usize),
}

/// Symbolic domain point: a base point and a grid-shift tag.
#[derive(Debug, Clone)]
pub struct DomainLabel {
    base: Arc<[f64]>,
    tag: LabelTag,
}

impl PartialEq for DomainLabel {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
            && self.base.len() == other.base.len()
            && self
                .base
                .iter()
                .zip(other.base.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for DomainLabel {}

impl Hash for DomainLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag.hash(state);
        for v in self.base.iter() {
            v.to_bits().hash(state);
        }
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            LabelTag::Base => write!(f, "base{:?}", &*self.base),
            LabelTag::Shifted(g) => write!(f, "shifted{:?}+grid[{g}]", &*self.base),
        }
    }
}

impl DomainLabel {
    /// `c_d(x)`
    pub fn encode(x: &[f64]) -> Self {
        Self {
            base: Arc::from(x),
            tag: LabelTag::Base,
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn tag(&self) -> LabelTag {
        self.tag
    }

    pub fn dimension(&self) -> usize {
        self.base.len()
    }

    fn with_tag(&self, tag: LabelTag) -> Self {
        Self {
            base: Arc::clone(&self.base),
            tag,
        }
    }

    fn check_index(shape: &GridShape, g: usize) -> Result<()> {
        if g >= shape.len() {
            return Err(Error::GridIndex {
                index: g,
                limit: shape.len(),
            });
        }
        Ok(())
    }

    /// `c_p(d, g)`: swaps `Base` and `Shifted(g)`, fixes all other labels.
    pub fn shift(&self, g: usize, shape: &GridShape) -> Result<Self> {
        Self::check_index(shape, g)?;
        Ok(match self.tag {
            LabelTag::Base => self.with_tag(LabelTag::Shifted(g)),
            LabelTag::Shifted(k) => {
                Self::check_index(shape, k)?;
                if k == g {
                    self.with_tag(LabelTag::Base)
                } else {
                    self.clone()
                }
            }
        })
    }

    /// `c_p⁻¹(d, g)`. The swap is an involution, so this is `shift` again.
    pub fn unshift(&self, g: usize, shape: &GridShape) -> Result<Self> {
        self.shift(g, shape)
    }

    /// The represented point `π(d)`.
    pub fn point(&self, params: &AlgorithmParams) -> Result<Vec<f64>> {
        match self.tag {
            LabelTag::Base => Ok(self.base.to_vec()),
            LabelTag::Shifted(g) => {
                let shape = params.grid_shape(self.dimension())?;
                let offsets = shape.centered_offsets(g)?;
                Ok(self
                    .base
                    .iter()
                    .zip(offsets)
                    .map(|(x, o)| x + params.mu * o)
                    .collect())
            }
        }
    }
}

/// `c_f(d)`: quantized function value at the represented point.
pub fn oracle_value(
    model: &FunctionModel,
    format: &FixedPointFormat,
    params: &AlgorithmParams,
    label: &DomainLabel,
) -> Result<RangeWord> {
    if label.dimension() != model.dimension() {
        return Err(Error::Dimension {
            expected: model.dimension(),
            got: label.dimension(),
        });
    }
    let point = label.point(params)?;
    if !model.domain().contains(&point) {
        return Err(Error::OutsideDomain { point });
    }
    format.quantize(model.evaluate(&point))
}

/// Counts oracle invocations. A superposed evaluation is one invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounter {
    calls: u64,
}

impl OracleCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self) {
        self.calls += 1;
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

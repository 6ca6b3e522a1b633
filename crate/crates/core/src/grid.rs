//! Dense grid register and the multidimensional quantum Fourier transform.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default cap on `p·n`: 2^26 complex amplitudes is about 1 GiB.
pub const DEFAULT_MAX_GRID_BITS: u32 = 26;

/// Shape of the grid register: `p` axes of `n` qubits each.
///
/// Flat indices are row-major with axis 0 most significant:
/// `flat = Σ_m g_m · 2^{n(p-1-m)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    bits: u32,
    axes: usize,
}

impl GridShape {
    pub fn new(bits: u32, axes: usize) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one qubit per axis".into(),
            ));
        }
        if axes == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one axis".into(),
            ));
        }
        let total = u64::from(bits) * axes as u64;
        if total >= usize::BITS as u64 - 1 {
            return Err(Error::MemoryGuard {
                bits: total.min(u64::from(u32::MAX)) as u32,
                limit: usize::BITS - 2,
            });
        }
        Ok(Self { bits, axes })
    }

    /// Rejects shapes whose `p·n` exceeds `max_bits`.
    pub fn guarded(bits: u32, axes: usize, max_bits: u32) -> Result<Self> {
        let shape = Self::new(bits, axes)?;
        shape.check_guard(max_bits)?;
        Ok(shape)
    }

    pub fn check_guard(&self, max_bits: u32) -> Result<()> {
        if self.total_bits() > max_bits {
            return Err(Error::MemoryGuard {
                bits: self.total_bits(),
                limit: max_bits,
            });
        }
        Ok(())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn total_bits(&self) -> u32 {
        self.bits * self.axes as u32
    }

    /// `2ⁿ`
    pub fn side(&self) -> usize {
        1usize << self.bits
    }

    /// `2^{pn}`
    pub fn len(&self) -> usize {
        1usize << self.total_bits()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid centre `g₀ = 2^{n-1} - ½` (same on every axis).
    pub fn center(&self) -> f64 {
        (self.side() / 2) as f64 - 0.5
    }

    fn stride(&self, axis: usize) -> usize {
        1usize << (self.bits as usize * (self.axes - 1 - axis))
    }

    pub fn decode(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.len() {
            return Err(Error::GridIndex {
                index: flat,
                limit: self.len(),
            });
        }
        let mask = self.side() - 1;
        Ok((0..self.axes)
            .map(|m| (flat / self.stride(m)) & mask)
            .collect())
    }

    pub fn encode(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.axes {
            return Err(Error::Dimension {
                expected: self.axes,
                got: index.len(),
            });
        }
        let mut flat = 0;
        for &g in index {
            if g >= self.side() {
                return Err(Error::GridIndex {
                    index: g,
                    limit: self.side(),
                });
            }
            flat = (flat << self.bits) | g;
        }
        Ok(flat)
    }

    /// `g - g₀` for every axis of a flat index.
    pub fn centered_offsets(&self, flat: usize) -> Result<Vec<f64>> {
        let c = self.center();
        Ok(self
            .decode(flat)?
            .into_iter()
            .map(|g| g as f64 - c)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Dense amplitudes of the grid register.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    shape: GridShape,
    amplitudes: Vec<Complex64>,
}

impl GridState {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            amplitudes: vec![Complex64::new(0.0, 0.0); shape.len()],
        }
    }

    pub fn basis(shape: GridShape, flat: usize) -> Result<Self> {
        if flat >= shape.len() {
            return Err(Error::GridIndex {
                index: flat,
                limit: shape.len(),
            });
        }
        let mut state = Self::zeros(shape);
        state.amplitudes[flat] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn from_amplitudes(shape: GridShape, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != shape.len() {
            return Err(Error::Dimension {
                expected: shape.len(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { shape, amplitudes })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Largest componentwise distance to another state of the same shape.
    pub fn max_abs_diff(&self, other: &GridState) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// p-dimensional QFT: the 1-axis transform applied to every axis.
    ///
    /// Forward kernel is `2^{-n/2} e^{+2πi h·g/2ⁿ}` per axis; inverse is its conjugate.
    pub fn qft(&self, direction: Direction) -> GridState {
        let mut out = self.clone();
        let mut planner = FftPlanner::new();
        for axis in 0..self.shape.axes {
            out.transform_axis(&mut planner, axis, direction);
        }
        out
    }

    /// Transform a single axis in place.
    pub fn qft_axis(&mut self, axis: usize, direction: Direction) -> Result<()> {
        if axis >= self.shape.axes {
            return Err(Error::Dimension {
                expected: self.shape.axes,
                got: axis,
            });
        }
        let mut planner = FftPlanner::new();
        self.transform_axis(&mut planner, axis, direction);
        Ok(())
    }

    fn transform_axis(&mut self, planner: &mut FftPlanner<f64>, axis: usize, direction: Direction) {
        let side = self.shape.side();
        // rustfft's "inverse" uses the +2πi kernel
        let fft = match direction {
            Direction::Forward => planner.plan_fft_inverse(side),
            Direction::Inverse => planner.plan_fft_forward(side),
        };
        let scale = 1.0 / (side as f64).sqrt();
        let stride = self.shape.stride(axis);
        let block = stride * side;
        let mut line = vec![Complex64::new(0.0, 0.0); side];
        for outer in (0..self.amplitudes.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = self.amplitudes[base + k * stride];
                }
                fft.process(&mut line);
                for (k, value) in line.iter().enumerate() {
                    self.amplitudes[base + k * stride] = value * scale;
                }
            }
        }
    }
}
